"""Estimate the sup-norm risk over an n-grid and fit the log-log rate.

    python scripts/run_rate.py configs/rate_f1.yaml --out rate.csv --jobs 4
"""
import argparse

from advreg.config import load_config
from advreg.experiments import run_rate, with_overrides, write_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--out")
    ap.add_argument("--jobs", type=int)
    args = ap.parse_args()
    cfg = with_overrides(load_config(args.config), jobs=args.jobs)
    result = run_rate(cfg)
    print(f"{'n':>7} {'risk':>10} {'stderr':>10} {'ideal':>10}")
    for e in result.estimates:
        print(f"{e.n:>7} {e.mean:>10.5f} {e.stderr:>10.5f} {e.ideal_loss:>10.5f}")
    if result.slope is not None:
        print(f"slope={result.slope:.4f} intercept={result.intercept:.4f} max_residual={result.max_residual:.4f}")
    if args.out:
        write_csv(result, args.out)


if __name__ == "__main__":
    main()
