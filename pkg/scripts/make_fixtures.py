"""Write the seeded synthetic datasets used by the CLI examples."""

import argparse
from pathlib import Path

from mcdl import synth
from mcdl.ingest import write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("data"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    datasets = {
        "blobs.csv": synth.blobs(n_per_blob=100, seed=args.seed)[0],
        "linear_noise.csv": synth.linear_noise(n=400, seed=args.seed),
        "piecewise.csv": synth.piecewise(n=400, seed=args.seed),
    }
    for name, data in datasets.items():
        write_csv(args.out / name, data)
        print(f"{args.out / name}: {len(data)} rows, {data.dim} features")


if __name__ == "__main__":
    main()
