"""Replay a seeded stream over 1, 2, 4 and 8 workers and print the latency curve."""

import argparse
import json

from mcdl import synth
from mcdl.config import PipelineConfig
from mcdl.pipeline import fit_pipeline
from mcdl.stream import SnapshotStore, latency_csv, run_latency_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--records", type=int, default=10_000)
    ap.add_argument("--workers", default="1,2,4,8")
    ap.add_argument("--repetitions", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print full reports as JSON")
    args = ap.parse_args()

    store = SnapshotStore()
    store.publish(fit_pipeline(synth.blobs(n_per_blob=100, seed=args.seed)[0], PipelineConfig.load(None, {"network.seed": str(args.seed)})))
    reports = run_latency_experiment(
        store,
        records=args.records,
        workers=[int(w) for w in args.workers.split(",")],
        seed=args.seed,
        repetitions=args.repetitions,
    )
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=2))
        return
    print(latency_csv(reports), end="")
    for r in reports:
        print(f"workers={r.workers} throughput_us={r.throughput_us:.1f}")


if __name__ == "__main__":
    main()
