"""Monte Carlo harness: risk estimation, rate fitting, perturbation sweeps, CSV output."""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import perturbation as pert
from .adversarial import adversarial_loss, ideal_loss, plug_in, standard_loss
from .estimators import (InsufficientData, bandwidth_aniso, bandwidth_iso, constant, exact,
                         fit_aniso_kernel, fit_local_poly, tabulate)
from .functions import (RegressionFunction, SmoothnessSpec, aniso_witness_coord, anisotropic,
                        by_label, generate, isotropic, witness_aniso, witness_iso_rough)
from .grid import GridDomain, unit_lattice

CSV_COLUMNS = ("n", "replicate", "seed", "loss", "standard_loss", "ideal_loss", "q")


class NonPositiveRisk(ValueError):
    pass


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "local_poly"
    c_h: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``perturbation`` is a config mapping (see `advreg.perturbation.from_config`)
    whose radius may depend on n through ``c_q`` and ``a``: q_n = c_q n^-a.
    ``sample_resolution=None`` samples perturbations on the domain lattice.
    """

    function: str = "f1"
    beta: float | tuple[float, ...] = 1.0
    L: float | tuple[float, ...] = 1.0
    d: int = 1
    witness_coord: int | None = None
    function_params: dict = field(default_factory=dict)
    perturbation: dict = field(default_factory=lambda: {"kind": "singleton0"})
    estimator: EstimatorConfig = EstimatorConfig()
    n_grid: tuple[int, ...] = (1024,)
    replicates: int = 20
    sigma: float = 0.2
    resolution: int | None = None
    sample_resolution: int | None = None
    seed: int = 0
    q_grid: tuple[float, ...] = ()
    jobs: int = 1

    def __post_init__(self):
        ns = list(self.n_grid)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_grid must be nonempty and strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def spec(self) -> SmoothnessSpec:
        if np.isscalar(self.beta):
            return isotropic(self.beta, self.L, self.d)
        return anisotropic(self.beta, self.L)

    def domain(self) -> GridDomain:
        return unit_lattice(self.d, self.resolution)

    def regression_function(self) -> RegressionFunction:
        j = self.witness_coord
        if self.function == "f3" and j is None:
            j = aniso_witness_coord(self.spec, pert.coord_ranges(self.perturbation_set(self.n_grid[0])))
        return by_label(self.function, self.spec, j=j or 0, **self.function_params)

    def perturbation_set(self, n: int, q: float | None = None) -> pert.PerturbationSet:
        desc = dict(self.perturbation)
        kind = desc.get("kind", "lp_ball")
        if q is not None:
            if kind == "box":
                template = np.asarray(desc.get("a", [1.0] + [0.0] * (self.d - 1)), dtype=float)
                desc["a"] = [q if t > 0 else 0.0 for t in template]
            elif kind in ("lp_ball", "sparse_lp_ball", "singleton0", "none"):
                if kind in ("singleton0", "none"):
                    desc["kind"] = "lp_ball"
                desc["q"] = q
            else:
                raise ValueError(f"perturbation kind {kind!r} has no radius to sweep")
        elif "c_q" in desc:
            desc["q"] = desc["c_q"] * n ** (-desc.get("a", 0.0))
        desc.pop("c_q", None)
        if kind != "box":
            desc.pop("a", None)
        return pert.from_config(desc, self.d)

    def perturbation_sample(self, pset: pert.PerturbationSet, X: GridDomain) -> pert.PerturbationSample:
        if self.sample_resolution is None:
            return pert.grid_sample(pset, X.spacing)
        return pert.sample(pset, self.sample_resolution)


@dataclass(frozen=True)
class ResultRow:
    n: int
    replicate: int
    seed: int
    loss: float
    standard_loss: float
    ideal_loss: float
    q: float
    pi_standard_loss: float = float("nan")


@dataclass(frozen=True)
class RiskEstimate:
    n: int
    q: float
    mean: float
    stderr: float
    ideal_loss: float
    rows: tuple[ResultRow, ...]

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.rows])

    @property
    def standard_risk(self) -> float:
        return float(np.mean([r.standard_loss for r in self.rows]))


@dataclass
class ExperimentResult:
    rows: list[ResultRow] = field(default_factory=list)
    estimates: list[RiskEstimate] = field(default_factory=list)
    slope: float | None = None
    intercept: float | None = None
    max_residual: float | None = None


def fit_base(cfg: ExperimentConfig, f: RegressionFunction, data):
    method = cfg.estimator.method
    spec = cfg.spec
    if method == "local_poly":
        h = bandwidth_iso(data.n, spec.beta, cfg.d, cfg.estimator.c_h)
        return fit_local_poly(data, spec, h)
    if method == "aniso_kernel":
        return fit_aniso_kernel(data, spec, bandwidth_aniso(data.n, spec, cfg.estimator.c_h))
    if method == "exact":
        return exact(f)
    if method == "constant":
        return constant(float(np.mean(data.ys)), cfg.d)
    raise ValueError(f"unknown estimator method {method!r}")


def replicate_seed(cfg: ExperimentConfig, r: int) -> int:
    return cfg.seed + r


def _run_replicates(cfg: ExperimentConfig, n: int, q: float | None, reps: list[int]) -> list[tuple]:
    f = cfg.regression_function()
    X = cfg.domain()
    pset = cfg.perturbation_set(n, q)
    samp = cfg.perturbation_sample(pset, X)
    out = []
    for r in reps:
        seed = replicate_seed(cfg, r)
        data = generate(f, n, cfg.sigma, seed)
        try:
            base = tabulate(fit_base(cfg, f, data), X)
        except InsufficientData as exc:
            raise InsufficientData(f"{exc} (n={n}, replicate seed={seed})") from None
        robust = plug_in(base, pset, samp, X)
        out.append((adversarial_loss(f, robust, X, pset, samp).value,
                    standard_loss(f, base, X).value,
                    standard_loss(f, robust, X).value))
    return out


def _chunks(items: list[int], k: int) -> list[list[int]]:
    k = max(1, min(k, len(items)))
    size = math.ceil(len(items) / k)
    return [items[i:i + size] for i in range(0, len(items), size)]


def estimate_risk(cfg: ExperimentConfig, n: int, q: float | None = None, jobs: int | None = None) -> RiskEstimate:
    """Average adversarial loss of the plug-in estimator over replicates.

    Replicate r uses seed ``cfg.seed + r``; results do not depend on ``jobs``.
    """
    jobs = cfg.jobs if jobs is None else jobs
    reps = list(range(cfg.replicates))
    if jobs > 1 and len(reps) > 1:
        chunks = _chunks(reps, jobs)
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_run_replicates, [cfg] * len(chunks), [n] * len(chunks),
                                  [q] * len(chunks), chunks))
        values = [v for part in parts for v in part]
    else:
        values = _run_replicates(cfg, n, q, reps)

    f = cfg.regression_function()
    X = cfg.domain()
    pset = cfg.perturbation_set(n, q)
    ideal = ideal_loss(f, X, pset, cfg.perturbation_sample(pset, X)).value
    q_val = _radius(pset)
    rows = tuple(ResultRow(n, r, replicate_seed(cfg, r), loss, std, ideal, q_val, pi_std)
                 for r, (loss, std, pi_std) in zip(reps, values))
    losses = np.array([v[0] for v in values])
    stderr = float(losses.std(ddof=1) / math.sqrt(len(losses))) if len(losses) > 1 else 0.0
    return RiskEstimate(n, q_val, float(losses.mean()), stderr, ideal, rows)


def _radius(pset: pert.PerturbationSet) -> float:
    if pset.kind in ("lp_ball", "sparse_lp_ball"):
        return pset.q
    if pset.kind == "box":
        return max(pset.half_widths)
    if pset.kind == "singleton0":
        return 0.0
    return pert.diameter(pset) / 2


def worst_case_risk(cfgs: list[ExperimentConfig], n: int) -> RiskEstimate:
    """Largest mean risk over several witness configs (a proxy for the sup over a class)."""
    return max((estimate_risk(c, n) for c in cfgs), key=lambda e: e.mean)


def rate_fit(ns, risks) -> tuple[float, float, float]:
    """Least-squares line of log(risk) on log(log(n)/n): (slope, intercept, max |residual|)."""
    ns = np.asarray(ns, dtype=float)
    risks = np.asarray(risks, dtype=float)
    if len(ns) < 3 or len(ns) != len(risks):
        raise ValueError("need at least 3 (n, risk) points")
    if np.any(risks <= 0):
        raise NonPositiveRisk("risks must be positive for a log-log fit")
    x = np.log(np.log(ns) / ns)
    y = np.log(risks)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


def run_rate(cfg: ExperimentConfig) -> ExperimentResult:
    result = ExperimentResult()
    for n in cfg.n_grid:
        est = estimate_risk(cfg, n)
        result.estimates.append(est)
        result.rows.extend(est.rows)
    if len(cfg.n_grid) >= 3:
        result.slope, result.intercept, result.max_residual = rate_fit(
            cfg.n_grid, [e.mean for e in result.estimates])
    return result


@dataclass(frozen=True)
class PhaseRow:
    q: float
    mean_risk: float
    stderr: float
    ideal_loss: float
    standard_risk: float
    local_slope: float


def _local_slopes(qs, values) -> list[float]:
    """Backward log-log differences; NaN where undefined (first point or q = 0)."""
    out = [float("nan")]
    for (q0, v0), (q1, v1) in zip(zip(qs, values), zip(qs[1:], values[1:])):
        if q0 > 0 and v0 > 0 and v1 > 0:
            out.append(math.log(v1 / v0) / math.log(q1 / q0))
        else:
            out.append(float("nan"))
    return out


def phase_sweep(cfg: ExperimentConfig, q_grid) -> tuple[list[PhaseRow], ExperimentResult]:
    """Risk decomposition across perturbation radii at the fixed n = cfg.n_grid[0]."""
    qs = [float(q) for q in q_grid]
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise ValueError("q grid must be increasing")
    n = cfg.n_grid[0]
    result = ExperimentResult()
    for q in qs:
        est = estimate_risk(cfg, n, q)
        result.estimates.append(est)
        result.rows.extend(est.rows)
    means = [e.mean for e in result.estimates]
    slopes = _local_slopes(qs, means)
    table = [PhaseRow(q, e.mean, e.stderr, e.ideal_loss, e.standard_risk, s)
             for q, e, s in zip(qs, result.estimates, slopes)]
    return table, result


@dataclass(frozen=True)
class AnisoRow:
    q: float
    aniso_ideal: float
    iso_ideal: float
    ratio: float
    aniso_rate: float


def aniso_comparison(cfg: ExperimentConfig, q_grid=None) -> list[AnisoRow]:
    """Ideal losses under a one-coordinate box attack: anisotropic witness vs isotropic one.

    The anisotropic witness varies along argmax_i r_i^{beta_i}; the isotropic
    witness is x_1^{bbar}, the rough witness for the class with the same
    average smoothness.
    """
    spec = cfg.spec
    if spec.isotropic or cfg.d < 2:
        raise ValueError("anisotropic comparison needs an anisotropic spec with d >= 2")
    X = cfg.domain()
    bbar = spec.beta_bar
    iso = witness_iso_rough(bbar, cfg.d) if bbar < 1 else by_label("f1", isotropic(1.0, 1.0, cfg.d))
    rows = []
    for q in (cfg.q_grid if q_grid is None else q_grid):
        q = float(q)
        pset = pert.box([q] + [0.0] * (cfg.d - 1))
        samp = pert.grid_sample(pset, X.spacing)
        ranges = pert.coord_ranges(pset)
        f3 = witness_aniso(spec, aniso_witness_coord(spec, ranges))
        a = ideal_loss(f3, X, pset, samp).value
        b = ideal_loss(iso, X, pset, samp).value
        ratio = a / b if b > 0 else float("nan")
        rate = float(np.max(ranges ** np.asarray(spec.beta)))
        rows.append(AnisoRow(q, a, b, ratio, rate))
    return rows


def log_slope(xs, ys) -> float:
    """Least-squares slope of log(y) on log(x)."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def atomic_write(path: str, header, rows) -> None:
    """Write CSV to a temp file next to ``path`` and rename it into place."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    target = os.path.abspath(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".advreg-", suffix=".csv")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, target)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(result: ExperimentResult, path: str) -> None:
    """Per-replicate rows in n-major, replicate-minor order."""
    rows = sorted(result.rows, key=lambda r: (r.n, r.q, r.replicate))
    atomic_write(path, CSV_COLUMNS, [(r.n, r.replicate, r.seed, r.loss, r.standard_loss, r.ideal_loss, r.q)
                                     for r in rows])


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
