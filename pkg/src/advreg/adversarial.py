"""Adversarial sup-norm losses, the ideal adversarial loss/predictor and the plug-in transform.

Every supremum is a finite maximum over a lattice of domain points and a
sample of perturbations. Ties in argmax go to the first point in row-major
order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import FittedPredictor, predict, tabulated
from .functions import RegressionFunction
from .grid import GridDomain, unit_lattice
from .perturbation import (EmptyNeighborhood, PerturbationSample, PerturbationSet,
                           neighborhood_table, singleton0)

__all__ = [
    "GridDomain", "LossReport", "EmptyNeighborhood", "unit_lattice",
    "adversarial_loss", "adversarial_loss_swapped", "standard_loss",
    "ideal_loss", "ideal_predictor", "plug_in", "oscillation",
]


@dataclass(frozen=True)
class LossReport:
    value: float
    argmax_x: np.ndarray
    argmax_delta: np.ndarray
    grid_spacing: float


def _zero_sample(d: int) -> PerturbationSample:
    return PerturbationSample(points=np.zeros((1, d)), resolution=1)


def adversarial_loss(f: RegressionFunction, p: FittedPredictor, X: GridDomain,
                     pset: PerturbationSet, samp: PerturbationSample) -> LossReport:
    """max over x in X, delta in samp of |f(x) - p(x + delta)|."""
    pts, deltas = X.points, samp.points
    fx = f(pts)
    shifted = (pts[:, None, :] + deltas[None, :, :]).reshape(-1, X.dim)
    px = predict(p, shifted).reshape(len(pts), len(deltas))
    err = np.abs(fx[:, None] - px)
    flat = int(np.argmax(err))
    i, k = divmod(flat, len(deltas))
    return LossReport(float(err.flat[flat]), pts[i].copy(), deltas[k].copy(), X.grid_spacing)


def adversarial_loss_swapped(f: RegressionFunction, p: FittedPredictor, X: GridDomain,
                             pset: PerturbationSet, samp: PerturbationSample) -> LossReport:
    """max over x' in X', x in (x' - Delta) cap X of |f(x) - p(x')|."""
    table = neighborhood_table(X, samp)
    xp = table.xprime.points
    fx = f(X.points)
    pxp = predict(p, xp)
    err = np.where(table.valid, np.abs(fx[table.cand] - pxp[None, :]), -np.inf)
    # x'-major scan for the argmax
    flat = int(np.argmax(err.T))
    g, k = divmod(flat, len(samp))
    x = X.points[table.cand[k, g]]
    return LossReport(float(err[k, g]), x.copy(), samp.points[k].copy(), X.grid_spacing)


def standard_loss(f: RegressionFunction, p: FittedPredictor, X: GridDomain) -> LossReport:
    """sup-norm loss without an adversary."""
    return adversarial_loss(f, p, X, singleton0(X.dim), _zero_sample(X.dim))


def _neighborhood_extremes(values: np.ndarray, X: GridDomain, samp: PerturbationSample):
    table = neighborhood_table(X, samp)
    v = values[table.cand]
    hi = np.where(table.valid, v, -np.inf)
    lo = np.where(table.valid, v, np.inf)
    return table, hi.argmax(axis=0), lo.argmin(axis=0), hi.max(axis=0), lo.min(axis=0)


def oscillation(f: RegressionFunction, X: GridDomain, samp: PerturbationSample) -> tuple[GridDomain, np.ndarray]:
    """Per-x' range max - min of f over its neighborhood."""
    table, _, _, hi, lo = _neighborhood_extremes(f(X.points), X, samp)
    return table.xprime, hi - lo


def ideal_loss(f: RegressionFunction, X: GridDomain, pset: PerturbationSet,
               samp: PerturbationSample) -> LossReport:
    """Half the largest oscillation of f over a perturbation neighborhood.

    The reported argmax is the pair attaining the loss of the ideal
    predictor: the neighborhood's minimizer x and the perturbation carrying
    it to the worst x'.
    """
    table, _, kmin, hi, lo = _neighborhood_extremes(f(X.points), X, samp)
    osc = hi - lo
    g = int(np.argmax(osc))
    k = int(kmin[g])
    x = X.points[table.cand[k, g]]
    return LossReport(0.5 * float(osc[g]), x.copy(), samp.points[k].copy(), X.grid_spacing)


def _midpoint_predictor(values: np.ndarray, X: GridDomain, pset, samp, method: str,
                        base: FittedPredictor | None) -> FittedPredictor:
    table, _, _, hi, lo = _neighborhood_extremes(values, X, samp)
    mid = 0.5 * (hi + lo)
    return tabulated(table.xprime, mid, method, base=base, perturbation=pset,
                     training_n=base.training_n if base is not None else 0)


def ideal_predictor(f: RegressionFunction, pset: PerturbationSet, samp: PerturbationSample,
                    X: GridDomain) -> FittedPredictor:
    """Midpoint of max and min of f over each neighborhood, tabulated on X'."""
    return _midpoint_predictor(f(X.points), X, pset, samp, "ideal", None)


def plug_in(base: FittedPredictor, pset: PerturbationSet, samp: PerturbationSample,
            X: GridDomain) -> FittedPredictor:
    """Robustify a fitted estimator with the same midpoint construction."""
    return _midpoint_predictor(predict(base, X.points), X, pset, samp, "plug_in", base)
