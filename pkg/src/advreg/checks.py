"""Randomized invariant suites (exchange of suprema, ideal-predictor optimality, plug-in sandwich).

Used by ``advreg selftest`` and by the test-suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import perturbation as pert
from .adversarial import (adversarial_loss, adversarial_loss_swapped, ideal_loss, ideal_predictor,
                          plug_in, standard_loss)
from .estimators import bandwidth_iso, exact, fit_local_poly, tabulate, tabulated
from .functions import (RegressionFunction, generate, isotropic, witness_iso_rough,
                        witness_iso_smooth)
from .grid import GridDomain, unit_lattice


@dataclass(frozen=True)
class Instance:
    f: RegressionFunction
    X: GridDomain
    pset: pert.PerturbationSet
    samp: pert.PerturbationSample


def random_piecewise_linear(rng: np.random.Generator, d: int) -> RegressionFunction:
    """Sum over coordinates of random piecewise-linear profiles."""
    parts = []
    for _ in range(d):
        knots = np.sort(np.concatenate([[0.0, 1.0], rng.random(rng.integers(1, 6))]))
        vals = rng.normal(size=len(knots))
        parts.append((knots, vals))

    def evaluate(x: np.ndarray) -> np.ndarray:
        return sum(np.interp(x[:, i], k, v) for i, (k, v) in enumerate(parts))

    return RegressionFunction(evaluate, isotropic(1.0, 1.0, d), "piecewise_linear")


def random_perturbation(rng: np.random.Generator, d: int) -> pert.PerturbationSet:
    kind = rng.choice(["lp_ball", "sparse_lp_ball", "box", "segment", "finite", "singleton0"])
    q = float(rng.uniform(0.0, 0.3))
    p = float(rng.choice([0.5, 1.0, 2.0, math.inf]))
    if kind == "lp_ball":
        return pert.lp_ball(p, q, d)
    if kind == "sparse_lp_ball":
        return pert.sparse_lp_ball(p, q, int(rng.integers(0, d + 1)), d)
    if kind == "box":
        return pert.box(rng.uniform(0.0, 0.3, size=d))
    if kind == "segment":
        return pert.segment(rng.uniform(-0.2, 0.2, size=d), rng.uniform(-0.2, 0.2, size=d))
    if kind == "finite":
        pts = rng.uniform(-0.25, 0.25, size=(int(rng.integers(1, 6)), d))
        return pert.finite_points(np.vstack([np.zeros(d), pts]))
    return pert.singleton0(d)


def random_instance(rng: np.random.Generator, d: int | None = None) -> Instance:
    if d is None:
        d = int(rng.integers(1, 3))
    X = unit_lattice(d, int(rng.integers(9, 41)) if d == 1 else int(rng.integers(5, 12)))
    pset = random_perturbation(rng, d)
    if rng.random() < 0.5:
        samp = pert.grid_sample(pset, X.spacing)
    else:
        samp = pert.sample(pset, int(rng.integers(2, 8)))
    return Instance(random_piecewise_linear(rng, d), X, pset, samp)


def check_exchange(instances: int, seed: int) -> float:
    """Largest |direct - swapped| adversarial loss over random instances and predictors."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        inst = random_instance(rng)
        xprime = pert.perturbed_domain(inst.X, inst.pset, inst.samp)
        choice = rng.integers(3)
        if choice == 0:
            p = tabulated(xprime, rng.normal(size=len(xprime)))
        elif choice == 1:
            p = exact(inst.f)
        else:
            p = exact(random_piecewise_linear(rng, inst.X.dim))
        a = adversarial_loss(inst.f, p, inst.X, inst.pset, inst.samp).value
        b = adversarial_loss_swapped(inst.f, p, inst.X, inst.pset, inst.samp).value
        worst = max(worst, abs(a - b))
    return worst


def check_ideal_optimality(instances: int, candidates: int, seed: int) -> tuple[float, float]:
    """(max |L(f, f*) - L*(f)|, max violation of L(f, f*) <= L(f, g)) over random instances."""
    rng = np.random.default_rng(seed)
    gap = 0.0
    violation = -math.inf
    for _ in range(instances):
        inst = random_instance(rng)
        star = ideal_predictor(inst.f, inst.pset, inst.samp, inst.X)
        best = adversarial_loss(inst.f, star, inst.X, inst.pset, inst.samp).value
        ideal = ideal_loss(inst.f, inst.X, inst.pset, inst.samp).value
        gap = max(gap, abs(best - ideal))
        domain = star.params["domain"]
        values = star.params["values"]
        for _ in range(candidates):
            scale = 10.0 ** rng.uniform(-4, 0)
            g = tabulated(domain, values + scale * rng.normal(size=len(values)))
            other = adversarial_loss(inst.f, g, inst.X, inst.pset, inst.samp).value
            violation = max(violation, best - other)
    return gap, violation


@dataclass(frozen=True)
class SandwichRecord:
    label: str
    n: int
    q: float
    seed: int
    loss: float
    standard_pi: float
    standard_base: float
    ideal: float

    @property
    def lower_ok(self) -> bool:
        return max(self.standard_pi, self.ideal) <= self.loss

    @property
    def upper_ok(self) -> bool:
        return self.loss <= self.standard_base + 3 * self.ideal


def sandwich_records(ns, qs, replicates: int, seed: int, sigma: float = 0.2,
                     resolution: int | None = None) -> list[SandwichRecord]:
    """Plug-in fits for f1 (beta=1) and f2 (beta=0.5) in d=1 under l_inf balls."""
    X = unit_lattice(1, resolution)
    witnesses = [witness_iso_smooth(1.0, 1), witness_iso_rough(0.5)]
    out = []
    for f in witnesses:
        for n in ns:
            h = bandwidth_iso(n, f.spec.beta, 1)
            for q in qs:
                pset = pert.lp_ball(math.inf, q, 1)
                samp = pert.grid_sample(pset, X.spacing)
                ideal = ideal_loss(f, X, pset, samp).value
                for r in range(replicates):
                    data = generate(f, n, sigma, seed + r)
                    base = tabulate(fit_local_poly(data, f.spec, h), X)
                    robust = plug_in(base, pset, samp, X)
                    out.append(SandwichRecord(
                        f.label, n, q, seed + r,
                        adversarial_loss(f, robust, X, pset, samp).value,
                        standard_loss(f, robust, X).value,
                        standard_loss(f, base, X).value,
                        ideal))
    return out


def run_selftest(seed: int = 0, echo=print) -> bool:
    ok = True
    worst = check_exchange(100, seed)
    passed = worst <= 1e-12
    ok &= passed
    echo(f"check=exchange_of_suprema instances=100 max_gap={worst:.3g} status={'pass' if passed else 'fail'}")
    gap, viol = check_ideal_optimality(20, 10, seed)
    passed = gap <= 1e-12 and viol <= 1e-12
    ok &= passed
    echo(f"check=ideal_optimality instances=20 max_gap={gap:.3g} max_violation={viol:.3g} "
         f"status={'pass' if passed else 'fail'}")
    recs = sandwich_records([256], [0.0, 0.0625], 3, seed, resolution=257)
    passed = all(r.lower_ok and r.upper_ok for r in recs)
    ok &= passed
    echo(f"check=plug_in_sandwich fits={len(recs)} status={'pass' if passed else 'fail'}")
    return bool(ok)
