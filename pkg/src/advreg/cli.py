"""``advreg`` command-line front end.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 config error.
"""
from __future__ import annotations

import argparse
import sys

from . import experiments as ex
from .adversarial import adversarial_loss, ideal_loss, plug_in, standard_loss
from .checks import run_selftest
from .config import ConfigError, load_config
from .estimators import InsufficientData, predict, tabulate
from .functions import generate
from .perturbation import EmptyNeighborhood

COMMANDS = ("eval-loss", "ideal-loss", "fit", "risk", "rate-fit", "phase-sweep", "aniso-compare", "selftest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "selftest":
            p.add_argument("--seed", type=int, default=0)
            continue
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--out", required=True, help="CSV output path")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--jobs", type=int, help="worker processes (never changes outputs)")
        p.add_argument("--resolution", type=int, help="lattice points per axis")
        if name == "eval-loss":
            p.add_argument("--no-plug-in", action="store_true", help="score the base estimator itself")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _config(args) -> ex.ExperimentConfig:
    cfg = load_config(args.config)
    try:
        return ex.with_overrides(cfg, seed=args.seed, jobs=args.jobs, resolution=args.resolution)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _report_row(rep, d):
    header = ["value"] + [f"x{i + 1}" for i in range(d)] + [f"delta{i + 1}" for i in range(d)] + ["grid_spacing"]
    row = [rep.value, *map(float, rep.argmax_x), *map(float, rep.argmax_delta), rep.grid_spacing]
    return header, row


def _single_fit(cfg):
    f = cfg.regression_function()
    X = cfg.domain()
    n = cfg.n_grid[0]
    pset = cfg.perturbation_set(n)
    samp = cfg.perturbation_sample(pset, X)
    data = generate(f, n, cfg.sigma, cfg.seed)
    try:
        base = tabulate(ex.fit_base(cfg, f, data), X)
    except InsufficientData as exc:
        raise InsufficientData(f"{exc} (n={n}, replicate seed={cfg.seed})") from None
    return f, X, pset, samp, base


def cmd_eval_loss(args, out) -> None:
    cfg = _config(args)
    f, X, pset, samp, base = _single_fit(cfg)
    p = base if args.no_plug_in else plug_in(base, pset, samp, X)
    rep = adversarial_loss(f, p, X, pset, samp)
    ex.atomic_write(args.out, *_wrap(_report_row(rep, cfg.d)))
    out(f"value={rep.value!r}")


def _wrap(pair):
    header, row = pair
    return header, [row]


def cmd_ideal_loss(args, out) -> None:
    cfg = _config(args)
    f = cfg.regression_function()
    X = cfg.domain()
    pset = cfg.perturbation_set(cfg.n_grid[0])
    rep = ideal_loss(f, X, pset, cfg.perturbation_sample(pset, X))
    ex.atomic_write(args.out, *_wrap(_report_row(rep, cfg.d)))
    out(f"value={rep.value!r}")


def cmd_fit(args, out) -> None:
    cfg = _config(args)
    f, X, pset, samp, base = _single_fit(cfg)
    robust = plug_in(base, pset, samp, X)
    truth = f(X.points)
    rows = [[*map(float, x), t, b, r] for x, t, b, r in
            zip(X.points, truth, predict(base, X.points), predict(robust, X.points))]
    header = [f"x{i + 1}" for i in range(cfg.d)] + ["truth", "base", "plug_in"]
    ex.atomic_write(args.out, header, rows)
    out(f"standard_loss={standard_loss(f, base, X).value!r} "
        f"adversarial_loss={adversarial_loss(f, robust, X, pset, samp).value!r}")


def _print_estimates(result, out) -> None:
    for e in result.estimates:
        out(f"n={e.n} q={e.q!r} risk={e.mean!r} stderr={e.stderr!r} "
            f"standard_risk={e.standard_risk!r} ideal_loss={e.ideal_loss!r}")


def cmd_risk(args, out) -> None:
    cfg = _config(args)
    result = ex.ExperimentResult()
    for n in cfg.n_grid:
        est = ex.estimate_risk(cfg, n)
        result.estimates.append(est)
        result.rows.extend(est.rows)
    ex.write_csv(result, args.out)
    _print_estimates(result, out)


def cmd_rate_fit(args, out) -> None:
    cfg = _config(args)
    if len(cfg.n_grid) < 3:
        raise ConfigError("rate-fit needs at least 3 entries in n_grid")
    result = ex.run_rate(cfg)
    ex.write_csv(result, args.out)
    out(f"slope={result.slope!r} intercept={result.intercept!r} max_residual={result.max_residual!r}")


def cmd_phase_sweep(args, out) -> None:
    cfg = _config(args)
    if not cfg.q_grid:
        raise ConfigError("phase-sweep needs q_grid")
    table, result = ex.phase_sweep(cfg, cfg.q_grid)
    ex.write_csv(result, args.out)
    for row in table:
        out(f"q={row.q!r} risk={row.mean_risk!r} standard_risk={row.standard_risk!r} "
            f"ideal_loss={row.ideal_loss!r} local_slope={row.local_slope!r}")


def cmd_aniso_compare(args, out) -> None:
    cfg = _config(args)
    if not cfg.q_grid:
        raise ConfigError("aniso-compare needs q_grid")
    rows = ex.aniso_comparison(cfg)
    ex.atomic_write(args.out, ["q", "aniso_ideal", "iso_ideal", "ratio", "aniso_rate"],
                    [[r.q, r.aniso_ideal, r.iso_ideal, r.ratio, r.aniso_rate] for r in rows])
    pos = [r for r in rows if r.q > 0]
    if len(pos) >= 2:
        a = ex.log_slope([r.q for r in pos], [r.aniso_ideal for r in pos])
        b = ex.log_slope([r.q for r in pos], [r.iso_ideal for r in pos])
        out(f"aniso_slope={a!r} iso_slope={b!r}")
    else:
        out(f"rows={len(rows)}")


HANDLERS = {
    "eval-loss": cmd_eval_loss, "ideal-loss": cmd_ideal_loss, "fit": cmd_fit, "risk": cmd_risk,
    "rate-fit": cmd_rate_fit, "phase-sweep": cmd_phase_sweep, "aniso-compare": cmd_aniso_compare,
}


def run(args: argparse.Namespace, out=print, err=None) -> int:
    err = err or (lambda msg: print(msg, file=sys.stderr))
    try:
        if args.command == "selftest":
            return 0 if run_selftest(args.seed, echo=out) else 1
        HANDLERS[args.command](args, out)
        return 0
    except ConfigError as exc:
        err(f"advreg: config error: {exc}")
        return 3
    except (InsufficientData, EmptyNeighborhood) as exc:
        err(f"advreg: {type(exc).__name__}: {exc}")
        return 1
    except (ValueError, OSError, ArithmeticError) as exc:
        err(f"advreg: error: {exc}")
        return 1


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
