"""Compare ideal losses for anisotropic and isotropic witnesses under a one-coordinate attack.

    python scripts/run_aniso.py configs/aniso.yaml
"""
import argparse

from advreg.config import load_config
from advreg.experiments import aniso_comparison, log_slope


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    args = ap.parse_args()
    cfg = load_config(args.config)
    rows = aniso_comparison(cfg)
    print(f"beta_bar={cfg.spec.beta_bar:.4f}")
    print(f"{'q':>9} {'aniso':>9} {'iso':>9} {'ratio':>8}")
    for r in rows:
        print(f"{r.q:>9.5f} {r.aniso_ideal:>9.5f} {r.iso_ideal:>9.5f} {r.ratio:>8.4f}")
    pos = [r for r in rows if r.q > 0]
    print(f"aniso_slope={log_slope([r.q for r in pos], [r.aniso_ideal for r in pos]):.4f} "
          f"iso_slope={log_slope([r.q for r in pos], [r.iso_ideal for r in pos]):.4f}")


if __name__ == "__main__":
    main()
