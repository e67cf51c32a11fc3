"""Desk-scale lambda architecture.

* batch layer: refits the whole pipeline on accumulated data and publishes an
  immutable, versioned :class:`ModelSnapshot` by reference swap;
* speed layer: normalizes each arriving record with sliding-window
  statistics, routes it through the snapshot's cluster tree and leaf network,
  then inserts it into an incrementally ranked agent graph;
* latency experiment: replays a seeded stream over disjoint worker shards and
  splits per-record time into processing (normalize, route, forward) and MCDM
  (neighborhood, benefit update, re-rank).

Workers are separate processes standing in for cluster nodes. Each holds its
own window and agent graph over the shared, read-only snapshot, so more
workers means smaller per-shard graphs. ``throughput_us`` (makespan divided
by record count) is the wall-clock per-record latency; percentiles describe
per-record service time on the worker's own CPU clock.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import threading
import time
import warnings
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import PipelineConfig
from .ingest import Dataset
from .mcdm import IncrementalAgentGraph, RankingDelta
from .pipeline import PipelineModel, bundle_checksum, fit_pipeline, score_record
from .synth import GaussianMixture

REFERENCE_OVERHEAD_PCT = 4.9
MIN_STABLE_RECORDS = 1000


class StreamError(ValueError):
    pass


class ColdWindowError(StreamError):
    pass


class SnapshotError(RuntimeError):
    pass


@dataclass(frozen=True)
class StreamRecord:
    sequence_id: int
    timestamp: float
    features: np.ndarray

    def __post_init__(self):
        f = np.array(self.features, dtype=float).reshape(-1)
        f.setflags(write=False)
        object.__setattr__(self, "features", f)


# ------------------------------------------------------------ sliding window

_FRAC_BITS = 1074  # 2**-1074 is the smallest positive double


def _fixed(x: float) -> int:
    num, den = float(x).as_integer_ratio()
    return num * ((1 << _FRAC_BITS) // den)


class SlidingWindow:
    """Last ``capacity`` feature vectors with O(1) running mean and deviation.

    Running sums and sums of squares are kept as exact fixed-point integers,
    so evictions leave no rounding residue and the statistics equal a
    from-scratch computation up to the final rounding to float.
    """

    def __init__(self, capacity: int, dim: int, min_fill: int = 1):
        if capacity < 1 or dim < 1 or not 1 <= min_fill <= capacity:
            raise StreamError(f"bad window shape capacity={capacity} dim={dim} min_fill={min_fill}")
        self.capacity = capacity
        self.dim = dim
        self.min_fill = min_fill
        self._buf: deque[tuple[np.ndarray, list[int]]] = deque()
        self._s1 = [0] * dim
        self._s2 = [0] * dim
        self._stats: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def is_warm(self) -> bool:
        return len(self._buf) >= self.min_fill

    def update(self, record: StreamRecord | np.ndarray) -> "SlidingWindow":
        x = record.features if isinstance(record, StreamRecord) else np.asarray(record, dtype=float)
        if x.shape != (self.dim,):
            raise StreamError(f"record has shape {x.shape}, window expects ({self.dim},)")
        fx = [_fixed(v) for v in x.tolist()]
        if len(self._buf) == self.capacity:
            _, old = self._buf.popleft()
            for f in range(self.dim):
                self._s1[f] -= old[f]
                self._s2[f] -= old[f] * old[f]
        for f in range(self.dim):
            self._s1[f] += fx[f]
            self._s2[f] += fx[f] * fx[f]
        self._buf.append((x, fx))
        self._stats = None
        return self

    def _compute(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if self._stats is None:
            n = len(self._buf)
            if n == 0:
                raise ColdWindowError("window is empty")
            # int / int is correctly rounded in Python
            mean = [s / (n << _FRAC_BITS) for s in self._s1]
            var = [
                (n * s2 - s1 * s1) / ((n * n) << (2 * _FRAC_BITS))
                for s1, s2 in zip(self._s1, self._s2)
            ]
            mean_a, delta_a = np.array(mean), np.sqrt(np.array(var))
            const = delta_a == 0
            self._stats = (mean_a, delta_a, np.where(const, 0.0, mean_a), np.where(const, 1.0, delta_a))
        return self._stats

    @property
    def mean(self) -> np.ndarray:
        return self._compute()[0]

    @property
    def delta(self) -> np.ndarray:
        return self._compute()[1]

    @property
    def constant(self) -> np.ndarray:
        return self.delta == 0

    def buffer(self) -> np.ndarray:
        return np.array([x for x, _ in self._buf])

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Z-score with window statistics; constant features pass through."""
        _, _, shift, scale = self._compute()
        return (np.asarray(x, dtype=float) - shift) / scale


# ----------------------------------------------------------------- snapshots


@dataclass(frozen=True)
class ModelSnapshot:
    version: int
    model: PipelineModel
    checksum: str


class SnapshotStore:
    """Holds the live snapshot; publication is a single reference swap."""

    def __init__(self):
        self._current: ModelSnapshot | None = None
        self._lock = threading.Lock()  # serializes publishers, never readers
        self._version = 0

    @classmethod
    def pinned(cls, snapshot: ModelSnapshot) -> "SnapshotStore":
        """Read-only store already holding ``snapshot``."""
        store = cls()
        store._current = snapshot
        store._version = snapshot.version
        return store

    @property
    def current(self) -> ModelSnapshot:
        snap = self._current
        if snap is None:
            raise SnapshotError("no snapshot has been published")
        return snap

    @property
    def version(self) -> int:
        return self._version

    def publish(self, model: PipelineModel) -> ModelSnapshot:
        checksum = bundle_checksum(model)
        with self._lock:
            self._version += 1
            snap = ModelSnapshot(self._version, model, checksum)
            self._current = snap
        return snap


def batch_layer_run(store: SnapshotStore, accumulated: Dataset, config: PipelineConfig | None = None) -> ModelSnapshot:
    """Refit the pipeline privately, then publish it as the next version."""
    config = config or PipelineConfig()
    if len(accumulated) < config.clustering.min_leaf_size:
        raise StreamError(
            f"batch layer needs >= {config.clustering.min_leaf_size} rows, got {len(accumulated)}"
        )
    return store.publish(fit_pipeline(accumulated, config))


# --------------------------------------------------------------- speed layer

Scorer = Callable[[PipelineModel, SlidingWindow, np.ndarray], float]


def default_scorer(model: PipelineModel, window: SlidingWindow, x: np.ndarray) -> float:
    return score_record(model, window.normalize(x))


def speed_layer_score(
    record: StreamRecord,
    snapshot: ModelSnapshot | None,
    window: SlidingWindow,
    graph: IncrementalAgentGraph | None = None,
) -> tuple[float, RankingDelta | None]:
    """Decision value of ``record`` under the window's current statistics.

    When ``graph`` is given the record also joins it as a new agent and the
    resulting ranking change is returned.
    """
    if snapshot is None:
        raise SnapshotError("no snapshot has been published")
    if not window.is_warm:
        raise ColdWindowError(f"window holds {len(window)} records, needs {window.min_fill}")
    dv = default_scorer(snapshot.model, window, record.features)
    delta = graph.add(record.sequence_id, [dv]) if graph is not None else None
    return dv, delta


@dataclass(frozen=True)
class ScoredRecord:
    sequence_id: int
    decision_value: float
    delta: RankingDelta
    processing_s: float
    mcdm_s: float
    snapshot_version: int


class SpeedLayer:
    """One worker: a private window and agent graph over a shared snapshot store."""

    def __init__(
        self,
        store: SnapshotStore,
        window: SlidingWindow,
        graph: IncrementalAgentGraph,
        scorer: Scorer = default_scorer,
    ):
        self.store = store
        self.window = window
        self.graph = graph
        self.scorer = scorer
        self._last_seq: int | None = None

    def process(self, record: StreamRecord) -> ScoredRecord:
        if self._last_seq is not None and record.sequence_id <= self._last_seq:
            raise StreamError(f"sequence id {record.sequence_id} after {self._last_seq}")
        self._last_seq = record.sequence_id
        snap = self.store.current
        self.window.update(record)
        if not self.window.is_warm:
            raise ColdWindowError(f"window holds {len(self.window)} records, needs {self.window.min_fill}")
        # thread CPU clock: other workers' time slices are not charged here
        t0 = time.thread_time_ns()
        dv = self.scorer(snap.model, self.window, record.features)
        t1 = time.thread_time_ns()
        delta = self.graph.add(record.sequence_id, [dv])
        t2 = time.thread_time_ns()
        return ScoredRecord(record.sequence_id, dv, delta, (t1 - t0) * 1e-9, (t2 - t1) * 1e-9, snap.version)


# ---------------------------------------------------------- replay files


def write_replay(path: str | Path, records: Iterable[StreamRecord], feature_names: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence_id", "timestamp", *feature_names])
        for r in records:
            w.writerow([r.sequence_id, repr(float(r.timestamp)), *(repr(float(v)) for v in r.features)])


def read_replay(path: str | Path) -> tuple[list[StreamRecord], tuple[str, ...]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such replay file: {path}")
    out: list[StreamRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["sequence_id", "timestamp"]:
            raise StreamError(f"{path}: header must start with sequence_id,timestamp")
        for lineno, rec in enumerate(reader, start=1):
            if len(rec) != len(header):
                raise StreamError(f"{path}: ragged row {lineno}")
            r = StreamRecord(int(rec[0]), float(rec[1]), np.array([float(v) for v in rec[2:]]))
            if out and (r.sequence_id <= out[-1].sequence_id or r.timestamp < out[-1].timestamp):
                raise StreamError(f"{path}: row {lineno} breaks monotone sequence/timestamp order")
            out.append(r)
    return out, tuple(header[2:])


# ------------------------------------------------------------- experiment


def mixture_for(model: PipelineModel) -> GaussianMixture:
    """Gaussian mixture in raw feature space matching the training leaves."""
    fp = model.feature_params
    scale = np.where(fp.constant, 1.0, fp.delta)
    shift = np.where(fp.constant, 0.0, fp.mean)
    means, scales, weights = [], [], []
    for leaf in model.tree.leaves:
        means.append(leaf.centroid * scale + shift)
        scales.append(np.sqrt(leaf.quality / model.dim) * scale)
        weights.append(len(leaf.members))
    return GaussianMixture(np.array(means), np.array(scales), np.array(weights, dtype=float))


def synthetic_stream(model: PipelineModel, n: int, seed: int, warmup: int = 0) -> tuple[np.ndarray, list[StreamRecord]]:
    """Warm-up rows plus ``n`` seeded records drawn from :func:`mixture_for`."""
    rng = np.random.default_rng(seed)
    mix = mixture_for(model)
    warm = mix.sample(warmup, rng) if warmup else np.empty((0, model.dim))
    X = mix.sample(n, rng)
    return warm, [StreamRecord(i, i * 1e-3, X[i]) for i in range(n)]


@dataclass
class LatencyReport:
    workers: int
    records: int
    repetitions: int
    processing_us: float
    mcdm_us: float
    overhead_pct: float
    p50_us: float
    p95_us: float
    p99_us: float
    throughput_us: float
    paper_reference_overhead_pct: float = REFERENCE_OVERHEAD_PCT
    measured: tuple[str, ...] = field(default=(
        "processing_us", "mcdm_us", "overhead_pct", "p50_us", "p95_us", "p99_us", "throughput_us",
    ))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["measured"] = list(self.measured)
        return d


def _shard_worker(results, start, index, snapshot, shard, warm, window_cfg, mcdm_cfg, scorer):
    """Body of one worker process: private window and graph, shared snapshot."""
    try:
        store = SnapshotStore.pinned(snapshot)
        win = SlidingWindow(*window_cfg)
        for row in warm:
            win.update(row)
        layer = SpeedLayer(store, win, IncrementalAgentGraph(**mcdm_cfg), scorer)
        timings = np.empty((len(shard), 2))
        start.wait()
        t0 = time.perf_counter()  # CLOCK_MONOTONIC: comparable across processes
        for i, rec in enumerate(shard):
            out = layer.process(rec)
            timings[i] = out.processing_s, out.mcdm_s
        results.put((index, t0, time.perf_counter(), timings, None))
    except BaseException as exc:
        results.put((index, 0.0, 0.0, None, f"{type(exc).__name__}: {exc}"))


def _mp_context():
    methods = mp.get_all_start_methods()
    return mp.get_context("fork" if "fork" in methods else "spawn")


def _run_once(snapshot, records, workers, window_cfg, warm, mcdm_cfg, scorer):
    ctx = _mp_context()
    results = ctx.Queue()
    start = ctx.Event()
    procs = [
        ctx.Process(
            target=_shard_worker,
            args=(results, start, w, snapshot, records[w::workers], warm, window_cfg, mcdm_cfg, scorer),
            daemon=True,
        )
        for w in range(workers)
    ]
    for p in procs:
        p.start()
    start.set()
    collected = [results.get() for _ in procs]  # single consumer
    for p in procs:
        p.join()
    errors = [c[4] for c in collected if c[4] is not None]
    if errors:
        raise StreamError(f"worker failed: {errors[0]}")
    makespan = max(c[2] for c in collected) - min(c[1] for c in collected)
    return np.concatenate([c[3] for c in sorted(collected, key=lambda c: c[0])]), makespan


def run_latency_experiment(
    store: SnapshotStore,
    records: int = 10_000,
    workers: Sequence[int] = (1, 2, 4, 8),
    seed: int = 0,
    repetitions: int = 5,
    window: int = 1024,
    min_fill: int = 64,
    neighborhood_k: int = 10,
    K: float | None = None,
    weighting: str = "plain",
    scorer: Scorer = default_scorer,
) -> list[LatencyReport]:
    """Replay one seeded stream at each worker count.

    Records are dealt round-robin to the workers; each worker's window is
    pre-filled with the same ``window`` warm-up rows. Per-configuration
    statistics are medians over ``repetitions`` runs.
    """
    if records < MIN_STABLE_RECORDS:
        warnings.warn(
            f"{records} records is below {MIN_STABLE_RECORDS}; percentiles will be unstable",
            stacklevel=2,
        )
    model = store.current.model
    warm, stream = synthetic_stream(model, records, seed, warmup=window)
    mcdm_cfg = dict(neighborhood_k=neighborhood_k, K=K, weighting=weighting)
    reports = []
    for w in workers:
        reps = []
        for _ in range(repetitions):
            t, wall = _run_once(store.current, stream, w, (window, model.dim, min_fill), warm, mcdm_cfg, scorer)
            total = t.sum(axis=1) * 1e6
            reps.append((
                t[:, 0].mean() * 1e6,
                t[:, 1].mean() * 1e6,
                100.0 * t[:, 1].sum() / max(t.sum(), 1e-300),
                *np.percentile(total, [50, 95, 99]),
                wall * 1e6 / records,
            ))
        med = np.median(np.array(reps), axis=0)
        reports.append(LatencyReport(w, records, repetitions, *map(float, med)))
    return reports


LATENCY_CSV_COLUMNS = ("workers", "p50_us", "p95_us", "p99_us", "overhead_pct")


def latency_csv(reports: Sequence[LatencyReport]) -> str:
    lines = [",".join(LATENCY_CSV_COLUMNS)]
    for r in reports:
        lines.append(",".join([str(r.workers)] + [f"{getattr(r, c):.3f}" for c in LATENCY_CSV_COLUMNS[1:]]))
    return "\n".join(lines) + "\n"
