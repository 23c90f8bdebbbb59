"""Regression functions with Hölder metadata, witness functions and data generation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class SmoothnessSpec:
    """Hölder class membership: isotropic (scalar beta, L) or anisotropic (vectors).

    For the isotropic class ``beta = k + alpha`` with ``alpha`` in (0, 1], so an
    integer beta has ``k = beta - 1``.
    """

    cls: str
    beta: float | tuple[float, ...]
    L: float | tuple[float, ...]
    d: int

    def __post_init__(self):
        if self.cls == "isotropic":
            if not (np.isscalar(self.beta) and self.beta > 0 and np.isscalar(self.L) and self.L > 0):
                raise ValueError("isotropic class needs scalar beta > 0 and L > 0")
        elif self.cls == "anisotropic":
            b = np.asarray(self.beta, dtype=float)
            lc = np.asarray(self.L, dtype=float)
            if b.shape != (self.d,) or lc.shape != (self.d,):
                raise ValueError("anisotropic beta and L need one entry per coordinate")
            if np.any(b <= 0) or np.any(b > 1) or np.any(lc <= 0):
                raise ValueError("anisotropic class needs beta_i in (0, 1] and L_i > 0")
        else:
            raise ValueError(f"unknown smoothness class {self.cls!r}")

    @property
    def isotropic(self) -> bool:
        return self.cls == "isotropic"

    @property
    def k(self) -> int:
        """Derivative order in beta = k + alpha, alpha in (0, 1]."""
        if not self.isotropic:
            return 0
        return int(math.ceil(self.beta)) - 1

    @property
    def alpha(self) -> float:
        return float(self.beta) - self.k if self.isotropic else 1.0

    @property
    def beta_bar(self) -> float:
        """Harmonic-mean smoothness d / sum(1/beta_i); equals beta when isotropic."""
        if self.isotropic:
            return float(self.beta)
        return self.d / float(np.sum(1.0 / np.asarray(self.beta, dtype=float)))


def isotropic(beta: float, L: float, d: int) -> SmoothnessSpec:
    return SmoothnessSpec("isotropic", float(beta), float(L), int(d))


def anisotropic(beta, L) -> SmoothnessSpec:
    beta = tuple(float(b) for b in beta)
    if np.isscalar(L):
        L = (float(L),) * len(beta)
    return SmoothnessSpec("anisotropic", beta, tuple(float(v) for v in L), len(beta))


@dataclass(frozen=True)
class RegressionFunction:
    evaluator: Callable[[np.ndarray], np.ndarray]
    spec: SmoothnessSpec
    label: str

    @property
    def d(self) -> int:
        return self.spec.d

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.evaluator(x[None, :])[0])
        return self.evaluator(x)


@dataclass(frozen=True)
class Dataset:
    xs: np.ndarray
    ys: np.ndarray
    noise_sd: float
    seed: int

    def __post_init__(self):
        if len(self.xs) < 1 or len(self.xs) != len(self.ys):
            raise ValueError("dataset needs n >= 1 matching xs and ys")

    @property
    def n(self) -> int:
        return len(self.ys)


def witness_iso_smooth(L: float, d: int, beta: float = 1.0) -> RegressionFunction:
    """f1(x) = L exp(x_1 - 1), smooth; declared in the isotropic class with beta >= 1."""
    if L <= 0:
        raise ValueError("L must be positive")
    if beta < 1:
        raise ValueError("f1 is the witness for beta >= 1")
    return RegressionFunction(lambda x: L * np.exp(x[:, 0] - 1.0), isotropic(beta, L, d), "f1")


def witness_iso_rough(beta: float, d: int = 1) -> RegressionFunction:
    """f2(x) = x_1^beta for 0 < beta < 1."""
    if not 0 < beta < 1:
        raise ValueError("f2 needs 0 < beta < 1")
    return RegressionFunction(lambda x: np.power(x[:, 0], beta), isotropic(beta, 1.0, d), "f2")


def witness_aniso(spec: SmoothnessSpec, j: int) -> RegressionFunction:
    """f3(x) = L_j x_j^{beta_j} for a 0-based coordinate ``j``."""
    if spec.isotropic:
        raise ValueError("f3 needs an anisotropic spec")
    if not 0 <= j < spec.d:
        raise ValueError(f"coordinate {j} out of range for d={spec.d}")
    lj, bj = spec.L[j], spec.beta[j]
    return RegressionFunction(lambda x: lj * np.power(x[:, j], bj), spec, "f3")


def custom_linear(slope: float, intercept: float, spec: SmoothnessSpec) -> RegressionFunction:
    """f(x) = intercept + slope * x_1."""
    return RegressionFunction(lambda x: intercept + slope * x[:, 0], spec, "custom_linear")


def custom_constant(value: float, spec: SmoothnessSpec) -> RegressionFunction:
    return RegressionFunction(lambda x: np.full(len(x), float(value)), spec, "custom_constant")


def aniso_witness_coord(spec: SmoothnessSpec, ranges) -> int:
    """argmax_i r_i^{beta_i}, the coordinate the anisotropic witness varies along."""
    r = np.asarray(ranges, dtype=float)
    return int(np.argmax(r ** np.asarray(spec.beta, dtype=float)))


FUNCTION_LABELS = ("f1", "f2", "f3", "custom_linear", "custom_constant")


def by_label(label: str, spec: SmoothnessSpec, j: int = 0, **params) -> RegressionFunction:
    if label == "f1":
        return witness_iso_smooth(spec.L, spec.d, spec.beta)
    if label == "f2":
        return witness_iso_rough(spec.beta, spec.d)
    if label == "f3":
        return witness_aniso(spec, j)
    if label == "custom_linear":
        return custom_linear(params.get("slope", 1.0), params.get("intercept", 0.0), spec)
    if label == "custom_constant":
        return custom_constant(params.get("value", 0.0), spec)
    raise ValueError(f"unknown function label {label!r}")


@dataclass(frozen=True)
class HolderViolation:
    x: np.ndarray
    z: np.ndarray
    gap: float


def holder_bound(spec: SmoothnessSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    if not spec.isotropic:
        b = np.asarray(spec.beta)
        lc = np.asarray(spec.L)
        return (lc * np.abs(x - z) ** b).sum(axis=1)
    dist = np.linalg.norm(x - z, axis=1)
    if spec.beta <= 1:
        return spec.L * dist ** spec.beta
    # beta > 1: zeroth-order Lipschitz consequence only
    return spec.L * dist


def holder_check(f: RegressionFunction, pairs: int, seed: int, tol: float = 1e-10) -> HolderViolation | None:
    """Search random pairs for a violation of the class inequality.

    Half of the pairs are close together (distances down to 1e-6), since
    violations of fractional exponents hide at short range. Returns the first
    violation found, or None.
    """
    rng = np.random.default_rng(seed)
    d = f.d
    x = rng.random((pairs, d))
    z = rng.random((pairs, d))
    near = pairs // 2
    scale = 10.0 ** rng.uniform(-6, -1, size=(near, 1))
    z[:near] = np.clip(x[:near] + scale * rng.uniform(-1, 1, size=(near, d)), 0.0, 1.0)
    gap = np.abs(f(x) - f(z)) - holder_bound(f.spec, x, z)
    bad = np.flatnonzero(gap > tol)
    if len(bad) == 0:
        return None
    i = int(bad[0])
    return HolderViolation(x[i], z[i], float(gap[i]))


def generate(f: RegressionFunction, n: int, sigma: float, seed: int) -> Dataset:
    """Draw n points uniform on [0,1]^d with responses f(X) + N(0, sigma^2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    xs = rng.random((n, f.d))
    noise = rng.normal(0.0, 1.0, size=n) * sigma
    return Dataset(xs=xs, ys=f(xs) + noise, noise_sd=float(sigma), seed=int(seed))
