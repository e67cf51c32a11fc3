"""``mcdl`` command line: train, rank, bench, stream.

Exit codes: 0 success, 1 computation error, 2 IO or configuration error.
Failures print a single ``error: <Type>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import sys
import time
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__
from .baselines.bench import bench
from .config import ConfigError, PipelineConfig
from .ingest import DataError, load_csv, load_features
from .pipeline import BundleError, PipelineModel, decision_values, fit_pipeline, load_bundle, rank_alternatives, save_bundle
from .stream import (
    MIN_STABLE_RECORDS,
    REFERENCE_OVERHEAD_PCT,
    SnapshotStore,
    latency_csv,
    run_latency_experiment,
)

EXIT_OK, EXIT_COMPUTE, EXIT_IO = 0, 1, 2
IO_ERRORS = (OSError, ConfigError, DataError, BundleError)

SUPPORTED_FORMATS = {
    "rank": ("csv", "json"),
    "bench": ("md", "csv", "json"),
    "stream": ("csv", "json"),
}


class UsageError(ConfigError):
    pass


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value
    if args.seed is not None:
        out["network.seed"] = str(args.seed)
    if getattr(args, "target", None):
        out["io.target"] = args.target
    if getattr(args, "label", None):
        out["io.label"] = args.label
    if getattr(args, "workers", None):
        out["stream.workers"] = args.workers
    if getattr(args, "records", None) is not None:
        out["stream.records"] = str(args.records)
    return out


def _config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig.load(args.config, _overrides(args))


def _formats(args: argparse.Namespace, config: PipelineConfig) -> list[str]:
    supported = SUPPORTED_FORMATS[args.command]
    if args.format:
        if args.format not in supported:
            raise UsageError(f"{args.command} cannot write format {args.format!r}; choose from {', '.join(supported)}")
        return [args.format]
    chosen = [f for f in config.io.formats if f in supported]
    return chosen or list(supported)


def _require(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


def _bundle_with(model: PipelineModel, args: argparse.Namespace) -> PipelineModel:
    """Bundle's own config, then keys set in ``--config``, then flags."""
    flat = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise FileNotFoundError(f"no such config file: {path}")
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read_string(path.read_text(encoding="utf-8"))
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from None
        flat = {f"{s}.{k}": v for s in parser.sections() for k, v in parser[s].items()}
    flat.update(_overrides(args))
    if not flat:
        return model
    return dataclasses.replace(model, config=PipelineConfig.from_ini(model.config.to_ini(), flat))


# ------------------------------------------------------------------ commands


def cmd_train(args: argparse.Namespace) -> int:
    config = _config(args)
    data = load_csv(_require(args.data, "--data"), config.io.target, config.io.label)
    t0 = time.perf_counter()
    model = fit_pipeline(data, config)
    fit_s = time.perf_counter() - t0
    out = save_bundle(model, args.out or "bundle")
    print(f"bundle: {out}")
    print(f"rows: {len(data)}  features: {data.dim}  leaves: {model.tree.n_leaves}  depth: {model.tree.depth}")
    for leaf, rep in zip(model.tree.leaves, model.leaf_reports):
        print(f"  leaf {leaf.leaf_id}: size {len(leaf.members)}  final mse {rep.final_loss:.6g}")
    print(f"fit time: {fit_s:.3f} s")
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    model = _bundle_with(load_bundle(_require(args.bundle, "--bundle")), args)
    X = load_features(_require(args.data, "--data"), model.feature_names)
    graph, ranking = rank_alternatives(model, X)
    dv = decision_values(model, X)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    b = {a.id: a.b for a in graph.agents}
    rows = [
        {"rank": pos + 1, "agent_id": i, "decision_value": float(dv[i]), "b": b[i], "B": score}
        for pos, (i, score) in enumerate(ranking.entries)
    ]
    for fmt in _formats(args, model.config):
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
            (out / "ranking.csv").write_text(buf.getvalue(), encoding="utf-8")
        else:
            m = model.config.mcdm
            doc = {"weighting": m.weighting, "neighborhood_k": m.neighborhood_k, "K": graph.K, "ranking": rows}
            (out / "ranking.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    top = ranking.entries[0]
    print(f"ranked {len(rows)} alternatives; top agent {top[0]} (B={top[1]:.6g})")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = _config(args)
    data = load_csv(_require(args.data, "--data"), config.io.target, config.io.label)
    report = bench(data, config)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    render = {"md": report.to_markdown, "csv": report.to_csv, "json": report.to_json}
    for fmt in _formats(args, config):
        (out / f"bench.{fmt}").write_text(render[fmt](), encoding="utf-8")
    print(report.to_markdown())
    return EXIT_OK


def cmd_stream(args: argparse.Namespace) -> int:
    model = _bundle_with(load_bundle(_require(args.bundle, "--bundle")), args)
    cfg = model.config
    s, m = cfg.stream, cfg.mcdm
    if s.records < MIN_STABLE_RECORDS:
        print(f"warning: {s.records} records is below {MIN_STABLE_RECORDS}; percentiles will be unstable", file=sys.stderr)
    store = SnapshotStore()
    store.publish(model)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # already reported above
        reports = run_latency_experiment(
            store,
            records=s.records,
            workers=s.workers,
            seed=cfg.seed,
            repetitions=s.repetitions,
            window=s.window,
            min_fill=s.min_fill,
            neighborhood_k=m.neighborhood_k,
            K=m.K,
            weighting=m.weighting,
        )
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for fmt in _formats(args, cfg):
        if fmt == "csv":
            (out / "latency.csv").write_text(latency_csv(reports), encoding="utf-8")
        else:
            doc = {
                "paper_reference_overhead_pct": REFERENCE_OVERHEAD_PCT,
                "snapshot_version": store.version,
                "reports": [r.to_dict() for r in reports],
            }
            (out / "latency.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"{'workers':>7} {'p50_us':>10} {'p95_us':>10} {'p99_us':>10} {'per_record_us':>13} {'overhead_pct':>12}")
    for r in reports:
        print(f"{r.workers:>7} {r.p50_us:>10.1f} {r.p95_us:>10.1f} {r.p99_us:>10.1f} {r.throughput_us:>13.1f} {r.overhead_pct:>12.2f}")
    print(f"paper_reference_overhead_pct: {REFERENCE_OVERHEAD_PCT}")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "rank": cmd_rank, "bench": cmd_bench, "stream": cmd_stream}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--seed", type=int, help="overrides network.seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key, e.g. mcdm.weighting=mutual")

    parser = argparse.ArgumentParser(prog="mcdl", description="Multi-criteria ranking over a cluster-tree neural predictor.")
    parser.add_argument("--version", action="version", version=f"mcdl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="fit the pipeline and write a model bundle")
    p.add_argument("--data", help="training CSV")
    p.add_argument("--target", help="target column (io.target)")
    p.add_argument("--label", help="label column to ignore as a feature (io.label)")

    p = sub.add_parser("rank", parents=[common], help="rank alternatives with a trained bundle")
    p.add_argument("--bundle", help="model bundle directory")
    p.add_argument("--data", help="alternatives CSV")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("bench", parents=[common], help="compare against the baseline models")
    p.add_argument("--data", help="CSV with target (and optional label) column")
    p.add_argument("--target")
    p.add_argument("--label")
    p.add_argument("--format", choices=("csv", "json", "md"))

    p = sub.add_parser("stream", parents=[common], help="latency experiment over the worker ladder")
    p.add_argument("--bundle", help="model bundle directory")
    p.add_argument("--workers", help="comma-separated worker counts, e.g. 1,2,4,8")
    p.add_argument("--records", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        # IO/config problems are 2, everything else is a computation error
        code = EXIT_IO if isinstance(exc, IO_ERRORS) else EXIT_COMPUTE
        msg = " ".join(str(exc).split())  # keep it to one line
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
