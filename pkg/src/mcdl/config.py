"""Pipeline configuration: one dataclass per section, stored as an INI file.

Keys are addressed by flat paths such as ``clustering.max_depth``. Values
resolve in the order default < config file < command-line override.
"""

import configparser
import dataclasses
import io
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass
class ClusteringConfig:
    branching_k: int = 2
    max_depth: int = 5
    min_leaf_size: int = 20
    quality_threshold: float = 0.5
    max_iter: int = 100
    tol: float = 1e-6


@dataclass
class NetworkConfig:
    hidden: tuple[int, ...] = (16, 8)
    lr: float = 0.1
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0


@dataclass
class McdmConfig:
    neighborhood_k: int = 10
    K: Optional[float] = None  # None: use neighborhood_k
    weighting: str = "plain"


@dataclass
class StreamConfig:
    window: int = 1024
    min_fill: int = 64
    workers: tuple[int, ...] = (1, 2, 4, 8)
    records: int = 10000
    repetitions: int = 5


@dataclass
class BenchConfig:
    test_fraction: float = 0.25
    knn_k: int = 10
    knn_metric: str = "euclidean"
    minkowski_p: float = 3.0
    ridge_lambda: float = 1.0
    tree_max_depth: int = 5
    tree_min_leaf: int = 5
    nb_threshold: float = 0.0
    svm_lr: float = 0.1
    svm_epochs: int = 200
    svm_c: float = 1.0


@dataclass
class IoConfig:
    target: str = "target"
    label: Optional[str] = None
    formats: tuple[str, ...] = ("csv", "json", "md")


@dataclass
class PipelineConfig:
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    mcdm: McdmConfig = field(default_factory=McdmConfig)
    stream: StreamConfig = field(default_factory=StreamConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    io: IoConfig = field(default_factory=IoConfig)

    @property
    def seed(self) -> int:
        return self.network.seed

    def validate(self) -> "PipelineConfig":
        c, n, m, s, b = self.clustering, self.network, self.mcdm, self.stream, self.bench
        checks = [
            (c.branching_k >= 2, "clustering.branching_k must be >= 2"),
            (c.max_depth >= 1, "clustering.max_depth must be >= 1"),
            (c.min_leaf_size >= 1, "clustering.min_leaf_size must be >= 1"),
            (c.quality_threshold >= 0, "clustering.quality_threshold must be >= 0"),
            (c.max_iter >= 1 and c.tol >= 0, "clustering.max_iter >= 1 and tol >= 0 required"),
            (all(h >= 1 for h in n.hidden), "network.hidden widths must be >= 1"),
            (n.lr > 0, "network.lr must be > 0"),
            (n.epochs >= 1 and n.batch_size >= 1, "network.epochs and batch_size must be >= 1"),
            (m.neighborhood_k >= 1, "mcdm.neighborhood_k must be >= 1"),
            (m.K is None or m.K > 0, "mcdm.K must be > 0"),
            (m.weighting in ("plain", "mutual"), "mcdm.weighting must be plain or mutual"),
            (s.window >= 1 and 1 <= s.min_fill <= s.window, "stream.min_fill must lie in [1, window]"),
            (len(s.workers) > 0 and all(w >= 1 for w in s.workers), "stream.workers must be >= 1"),
            (s.records >= 1 and s.repetitions >= 1, "stream.records and repetitions must be >= 1"),
            (0 < b.test_fraction < 1, "bench.test_fraction must lie in (0, 1)"),
            (b.knn_k >= 1, "bench.knn_k must be >= 1"),
            (b.knn_metric in ("euclidean", "manhattan", "minkowski"), "bench.knn_metric unknown"),
            (b.minkowski_p >= 1, "bench.minkowski_p must be >= 1"),
            (b.ridge_lambda >= 0, "bench.ridge_lambda must be >= 0"),
            (b.tree_max_depth >= 1 and b.tree_min_leaf >= 1, "bench tree settings must be >= 1"),
            (b.svm_lr > 0 and b.svm_epochs >= 1 and b.svm_c > 0, "bench svm settings out of range"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        return self

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keep key case (mcdm.K)
        for sec in dataclasses.fields(self):
            obj = getattr(self, sec.name)
            parser[sec.name] = {f.name: _format(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, overrides: dict[str, str] | None = None) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from None
        flat = {f"{s}.{k}": v for s in parser.sections() for k, v in parser[s].items()}
        flat.update(overrides or {})
        return cls.from_flat(flat)

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "PipelineConfig":
        cfg = cls()
        for path, raw in flat.items():
            cfg.set(path, raw)
        return cfg.validate()

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict[str, str] | None = None) -> "PipelineConfig":
        text = ""
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise FileNotFoundError(f"no such config file: {path}")
            text = path.read_text(encoding="utf-8")
        return cls.from_ini(text, overrides)

    def set(self, path: str, raw: str) -> None:
        section, _, key = path.partition(".")
        obj = getattr(self, section, None)
        if obj is None or not dataclasses.is_dataclass(obj) or not key:
            raise ConfigError(f"unknown config key {path!r}")
        hints = typing.get_type_hints(type(obj))
        if key not in hints:
            raise ConfigError(f"unknown config key {path!r}")
        try:
            setattr(obj, key, _parse(hints[key], raw))
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for {path}") from None


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(tp, raw):
    raw = str(raw).strip()
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:  # Optional[X]
        if raw == "" or raw.lower() == "none":
            return None
        return _parse(next(a for a in args if a is not type(None)), raw)
    if origin is tuple:
        return tuple(_parse(args[0], part) for part in raw.split(",") if part.strip())
    if tp is int:
        return int(raw)
    if tp is float:
        return float(raw)
    return raw
