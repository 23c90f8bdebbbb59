"""Sweep the perturbation radius at fixed n and print the risk decomposition.

    python scripts/run_phase_sweep.py configs/phase_f2.yaml --jobs 4
"""
import argparse

from advreg.config import load_config
from advreg.experiments import phase_sweep, with_overrides, write_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--out")
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--c-h", type=float, help="bandwidth constant override")
    args = ap.parse_args()
    cfg = with_overrides(load_config(args.config), jobs=args.jobs)
    if args.c_h is not None:
        cfg = with_overrides(cfg, estimator=type(cfg.estimator)(cfg.estimator.method, args.c_h))
    table, result = phase_sweep(cfg, cfg.q_grid)
    print(f"{'q':>10} {'risk':>9} {'std risk':>9} {'ideal':>9} {'slope':>7}")
    for r in table:
        print(f"{r.q:>10.6f} {r.mean_risk:>9.4f} {r.standard_risk:>9.4f} {r.ideal_loss:>9.4f} {r.local_slope:>7.3f}")
    if args.out:
        write_csv(result, args.out)


if __name__ == "__main__":
    main()
