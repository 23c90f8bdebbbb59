"""Standard (non-adversarial) base estimators: local polynomial and anisotropic kernel."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .functions import Dataset, RegressionFunction, SmoothnessSpec
from .grid import GridDomain

WIDEN_FACTOR = 1.5
WIDEN_STEPS = 5


class InsufficientData(RuntimeError):
    """A query window stayed empty after all widening steps."""


@dataclass(frozen=True, eq=False)
class FittedPredictor:
    """An evaluable estimator with provenance.

    ``evaluator`` maps an (m, d) array to m values. When ``bounds`` is set,
    queries are clamped into that box first.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    method: str
    params: dict = field(default_factory=dict)
    training_n: int = 0
    bounds: tuple[np.ndarray, np.ndarray] | None = None
    base: "FittedPredictor | None" = None
    perturbation: object = None


def predict(p: FittedPredictor, x) -> float | np.ndarray:
    """Evaluate a predictor at one point (returns float) or at rows of an array."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if p.bounds is not None:
        x = np.clip(x, p.bounds[0], p.bounds[1])
    out = np.asarray(p.evaluator(x), dtype=float)
    return float(out[0]) if single else out


def _unit_bounds(d: int):
    return (np.zeros(d), np.ones(d))


def constant(c: float, d: int = 1) -> FittedPredictor:
    return FittedPredictor(lambda x: np.full(len(x), float(c)), "constant", {"c": float(c)},
                           bounds=_unit_bounds(d))


def exact(f: RegressionFunction) -> FittedPredictor:
    return FittedPredictor(f.evaluator, "exact", {"label": f.label}, bounds=_unit_bounds(f.d))


def tabulated(domain: GridDomain, values, method: str = "tabulated", **kw) -> FittedPredictor:
    """Predictor defined by values on a domain's points; other queries use the nearest point."""
    values = np.asarray(values, dtype=float)
    if values.shape != (len(domain),):
        raise ValueError("one value per domain point required")
    return FittedPredictor(lambda x: values[domain.nearest_index(x)], method,
                           {"domain": domain, "values": values}, **kw)


def tabulate(p: FittedPredictor, domain: GridDomain) -> FittedPredictor:
    """Materialize a predictor on a lattice, keeping its provenance."""
    return tabulated(domain, predict(p, domain.points), p.method,
                     training_n=p.training_n, base=p.base, perturbation=p.perturbation)


def bandwidth_iso(n: int, beta: float, d: int, c_h: float = 1.0) -> float:
    """h = c_h (log n / n)^{1/(2 beta + d)}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return c_h * (math.log(n) / n) ** (1.0 / (2.0 * beta + d))


def bandwidth_aniso(n: int, spec: SmoothnessSpec, c_h: float = 1.0) -> np.ndarray:
    """h_i = c_h (log n / n)^{bbar / (beta_i (2 bbar + d))}, equalizing h_i^{beta_i}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if spec.isotropic:
        raise ValueError("anisotropic spec required")
    b = np.asarray(spec.beta, dtype=float)
    bbar = spec.beta_bar
    return c_h * (math.log(n) / n) ** (bbar / (b * (2.0 * bbar + spec.d)))


def _monomial_exponents(d: int, degree: int) -> list[tuple[int, ...]]:
    exps = [e for e in itertools.product(range(degree + 1), repeat=d) if sum(e) <= degree]
    return sorted(exps, key=lambda e: (sum(e), tuple(-v for v in e)))


def _local_poly_at(xs, ys, tree, x, h, exps):
    n_coef = len(exps)
    width = h
    idx = None
    for _ in range(WIDEN_STEPS + 1):
        idx = tree.query_ball_point(x, width, p=np.inf)
        if len(idx) >= n_coef:
            u = (xs[idx] - x) / width
            design = np.stack([np.prod(u ** np.array(e), axis=1) for e in exps], axis=1)
            coef, _, rank, _ = np.linalg.lstsq(design, ys[idx], rcond=None)
            if rank == n_coef:
                return coef[0]
        width *= WIDEN_FACTOR
    if not idx:
        raise InsufficientData(f"no training points within {width / WIDEN_FACTOR:.4g} of {x.tolist()}")
    # degenerate even after widening: local constant
    return float(np.mean(ys[idx]))


def fit_local_poly(data: Dataset, spec: SmoothnessSpec, h: float, degree: int | None = None) -> FittedPredictor:
    """Local polynomial with boxcar weights 1{|X_i - x|_inf <= h}.

    The default degree is k from beta = k + alpha with alpha in (0, 1], i.e.
    floor(beta) except that integer beta uses beta - 1.

    The prediction is the intercept of the window's least-squares fit
    centered at the query. A rank-deficient window is widened by 1.5x up to
    five times, after which the window mean is used.
    """
    if not spec.isotropic:
        raise ValueError("local polynomial fit expects an isotropic spec")
    if degree is None:
        degree = spec.k
    xs, ys = data.xs, data.ys
    d = xs.shape[1]
    exps = _monomial_exponents(d, degree)
    tree = cKDTree(xs)

    def evaluate(q: np.ndarray) -> np.ndarray:
        return np.array([_local_poly_at(xs, ys, tree, row, h, exps) for row in q])

    return FittedPredictor(evaluate, "local_poly", {"degree": degree, "h": float(h)},
                           training_n=data.n, bounds=_unit_bounds(d))


def fit_aniso_kernel(data: Dataset, spec: SmoothnessSpec, h) -> FittedPredictor:
    """Nadaraya-Watson with product boxcar kernel prod_j 1{|X_ij - x_j| <= h_j}."""
    xs, ys = data.xs, data.ys
    d = xs.shape[1]
    h = np.broadcast_to(np.asarray(h, dtype=float), (d,)).copy()
    tree = cKDTree(xs / h)

    def at(row: np.ndarray) -> float:
        width = 1.0
        for _ in range(WIDEN_STEPS + 1):
            idx = tree.query_ball_point(row / h, width, p=np.inf)
            if idx:
                return float(np.mean(ys[idx]))
            width *= WIDEN_FACTOR
        raise InsufficientData(f"empty kernel window at {row.tolist()}")

    def evaluate(q: np.ndarray) -> np.ndarray:
        return np.array([at(row) for row in q])

    return FittedPredictor(evaluate, "aniso_kernel", {"h": tuple(h.tolist())},
                           training_n=data.n, bounds=_unit_bounds(d))
