"""Perturbation sets available to the adversary, their discretizations and geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridDomain, point_keys, point_set

_TOL = 1e-12


class EmptyNeighborhood(ValueError):
    """No lattice point x satisfies x + delta = x' for a sampled delta."""


@dataclass(frozen=True)
class PerturbationSet:
    """Geometric description of a perturbation set.

    Use the constructor functions (`lp_ball`, `sparse_lp_ball`, `box`,
    `segment`, `finite_points`, `singleton0`) rather than building this
    directly.
    """

    kind: str
    dim: int
    p: float = math.inf
    q: float = 0.0
    s: int | None = None
    half_widths: tuple[float, ...] = ()
    start: tuple[float, ...] = ()
    end: tuple[float, ...] = ()
    points: tuple[tuple[float, ...], ...] = ()

    @property
    def contains_zero(self) -> bool:
        if self.kind == "segment":
            return bool(self.contains(np.zeros(self.dim)))
        return True

    def contains(self, delta) -> bool:
        return contains(self, delta)

    def describe(self) -> dict:
        """Config-style description (inverse of `from_config`)."""
        if self.kind in ("lp_ball", "sparse_lp_ball"):
            out = {"kind": self.kind, "p": "inf" if math.isinf(self.p) else self.p, "q": self.q}
            if self.kind == "sparse_lp_ball":
                out["s"] = self.s
            return out
        if self.kind == "box":
            return {"kind": "box", "a": list(self.half_widths)}
        if self.kind == "segment":
            return {"kind": "segment", "start": list(self.start), "end": list(self.end)}
        if self.kind == "finite":
            return {"kind": "finite", "points": [list(pt) for pt in self.points]}
        return {"kind": "singleton0"}


def lp_ball(p: float, q: float, d: int) -> PerturbationSet:
    if not p > 0 or q < 0:
        raise ValueError(f"need p > 0 and q >= 0, got p={p}, q={q}")
    return PerturbationSet("lp_ball", d, p=float(p), q=float(q))


def sparse_lp_ball(p: float, q: float, s: int, d: int) -> PerturbationSet:
    if not p > 0 or q < 0 or s < 0:
        raise ValueError(f"need p > 0, q >= 0, s >= 0, got p={p}, q={q}, s={s}")
    return PerturbationSet("sparse_lp_ball", d, p=float(p), q=float(q), s=int(s))


def box(half_widths) -> PerturbationSet:
    a = tuple(float(v) for v in half_widths)
    if any(v < 0 for v in a):
        raise ValueError("box half-widths must be nonnegative")
    return PerturbationSet("box", len(a), half_widths=a)


def segment(start, end) -> PerturbationSet:
    """Segment between two perturbations; 0 is *not* added implicitly."""
    a = tuple(float(v) for v in start)
    b = tuple(float(v) for v in end)
    if len(a) != len(b):
        raise ValueError("segment endpoints differ in dimension")
    return PerturbationSet("segment", len(a), start=a, end=b)


def finite_points(points) -> PerturbationSet:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.any(np.all(pts == 0.0, axis=1)):
        raise ValueError("finite perturbation set must contain the zero vector")
    return PerturbationSet("finite", pts.shape[1], points=tuple(tuple(r) for r in pts.tolist()))


def singleton0(d: int) -> PerturbationSet:
    return PerturbationSet("singleton0", d)


def from_config(desc: dict, d: int) -> PerturbationSet:
    """Build a set from a config mapping such as ``{kind: lp_ball, p: 2, q: 0.1}``."""
    kind = desc.get("kind", "lp_ball")
    if kind == "lp_ball":
        return lp_ball(_parse_p(desc.get("p", "inf")), desc["q"], d)
    if kind == "sparse_lp_ball":
        return sparse_lp_ball(_parse_p(desc.get("p", "inf")), desc["q"], desc["s"], d)
    if kind == "box":
        return box(desc["a"])
    if kind == "segment":
        return segment(desc["start"], desc["end"])
    if kind == "finite":
        return finite_points(desc["points"])
    if kind in ("singleton0", "none"):
        return singleton0(d)
    raise ValueError(f"unknown perturbation kind {kind!r}")


def _parse_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "oo"):
            return math.inf
        return float(p)
    return float(p)


def _lp_within(delta: np.ndarray, p: float, q: float) -> np.ndarray:
    a = np.abs(delta)
    tol = _TOL * max(q, 1.0)
    if math.isinf(p):
        return a.max(axis=-1) <= q + tol
    if p >= 1:
        return np.linalg.norm(a, ord=p, axis=-1) <= q + tol
    # quasi-norm ball, p < 1
    return (a**p).sum(axis=-1) <= q**p + tol


def contains_many(pset: PerturbationSet, deltas: np.ndarray) -> np.ndarray:
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    if deltas.shape[1] != pset.dim:
        raise ValueError(f"dimension mismatch: set has d={pset.dim}, got {deltas.shape[1]}")
    kind = pset.kind
    if kind == "lp_ball":
        return _lp_within(deltas, pset.p, pset.q)
    if kind == "sparse_lp_ball":
        nnz = np.count_nonzero(deltas, axis=1)
        return _lp_within(deltas, pset.p, pset.q) & (nnz <= pset.s)
    if kind == "box":
        return np.all(np.abs(deltas) <= np.array(pset.half_widths) + _TOL, axis=1)
    if kind == "segment":
        a = np.array(pset.start)
        b = np.array(pset.end)
        v = b - a
        vv = float(v @ v)
        if vv == 0.0:
            return np.all(np.abs(deltas - a) <= _TOL, axis=1)
        t = np.clip((deltas - a) @ v / vv, 0.0, 1.0)
        resid = deltas - (a + t[:, None] * v)
        return np.linalg.norm(resid, axis=1) <= _TOL * max(1.0, math.sqrt(vv))
    if kind == "finite":
        pts = np.array(pset.points)
        diff = np.abs(deltas[:, None, :] - pts[None, :, :]).max(axis=2)
        return (diff <= _TOL).any(axis=1)
    if kind == "singleton0":
        return np.all(deltas == 0.0, axis=1)
    raise ValueError(f"unknown perturbation kind {kind!r}")


def contains(pset: PerturbationSet, delta) -> bool:
    """Membership test for a single perturbation vector."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (pset.dim,):
        raise ValueError(f"dimension mismatch: set has d={pset.dim}, got shape {delta.shape}")
    return bool(contains_many(pset, delta[None, :])[0])


@dataclass(frozen=True, eq=False)
class PerturbationSample:
    """A finite list of member perturbations (sorted, deduplicated)."""

    points: np.ndarray
    resolution: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _finalize(pset: PerturbationSet, candidates: np.ndarray, resolution: int) -> PerturbationSample:
    keep = candidates[contains_many(pset, candidates)]
    # Sort and dedupe by key so tiny float noise does not create twins.
    _, first = np.unique(point_keys(keep), axis=0, return_index=True)
    pts = keep[np.sort(first)]
    order = np.lexsort(pts.T[::-1])
    return PerturbationSample(points=pts[order], resolution=resolution)


def _extent(pset: PerturbationSet) -> np.ndarray:
    """Per-axis half-extent of the bounding box of a symmetric set."""
    if pset.kind in ("lp_ball", "sparse_lp_ball"):
        return np.full(pset.dim, pset.q)
    if pset.kind == "box":
        return np.array(pset.half_widths)
    return np.zeros(pset.dim)


def _axis_extremes(pset: PerturbationSet) -> np.ndarray:
    e = _extent(pset)
    rows = [np.zeros(pset.dim)]
    for i in range(pset.dim):
        for sgn in (-1.0, 1.0):
            v = np.zeros(pset.dim)
            v[i] = sgn * e[i]
            rows.append(v)
    if pset.kind == "box":
        corners = np.array(np.meshgrid(*[[-a, a] for a in e], indexing="ij")).reshape(pset.dim, -1).T
        rows.extend(corners)
    return np.array(rows)


def sample(pset: PerturbationSet, resolution: int) -> PerturbationSample:
    """Deterministic lattice of members with ``resolution`` points per axis.

    Always includes 0 (when a member), axis extremes and segment endpoints.
    """
    d = pset.dim
    if pset.kind == "singleton0":
        return PerturbationSample(points=np.zeros((1, d)), resolution=max(resolution, 1))
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if pset.kind == "finite":
        return _finalize(pset, np.array(pset.points), resolution)
    if pset.kind == "segment":
        a, b = np.array(pset.start), np.array(pset.end)
        t = np.linspace(0.0, 1.0, resolution)
        return _finalize(pset, np.vstack([a + t[:, None] * (b - a), np.zeros((1, d))]), resolution)
    e = _extent(pset)
    axes = [np.linspace(-ei, ei, resolution) if ei > 0 else np.zeros(1) for ei in e]
    mesh = np.meshgrid(*axes, indexing="ij")
    cand = np.stack([m.ravel() for m in mesh], axis=1)
    return _finalize(pset, np.vstack([cand, _axis_extremes(pset)]), resolution)


def grid_sample(pset: PerturbationSet, spacing) -> PerturbationSample:
    """Members whose coordinates are integer multiples of the lattice spacing.

    Offsets commensurate with the domain lattice map lattice points onto
    lattice points, so perturbation neighborhoods are as rich as the lattice
    allows. Extremes that are not multiples of the spacing are still added.
    """
    d = pset.dim
    h = np.broadcast_to(np.asarray(spacing, dtype=float), (d,))
    if pset.kind == "singleton0":
        return PerturbationSample(points=np.zeros((1, d)), resolution=1)
    if pset.kind == "finite":
        return _finalize(pset, np.array(pset.points), 1)
    if pset.kind == "segment":
        a, b = np.array(pset.start), np.array(pset.end)
        steps = int(np.max(np.round(np.abs(b - a) / h))) if np.any(b != a) else 0
        t = np.linspace(0.0, 1.0, steps + 1)
        return _finalize(pset, np.vstack([a + t[:, None] * (b - a), np.zeros((1, d))]), steps + 1)
    e = _extent(pset)
    counts = np.floor(e / h + 1e-9).astype(int)
    axes = [np.arange(-c, c + 1) * hi for c, hi in zip(counts, h)]
    mesh = np.meshgrid(*axes, indexing="ij")
    cand = np.stack([m.ravel() for m in mesh], axis=1)
    return _finalize(pset, np.vstack([cand, _axis_extremes(pset)]), int(2 * counts.max() + 1))


def _pairwise_max(points: np.ndarray) -> float:
    best = 0.0
    chunk = 512
    for i in range(0, len(points), chunk):
        block = points[i:i + chunk]
        dist = np.sqrt(((block[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
        best = max(best, float(dist.max()))
    return best


def sample_diameter(samp: PerturbationSample) -> float:
    """Brute-force max pairwise Euclidean distance over a sample."""
    return _pairwise_max(samp.points)


def sample_coord_ranges(samp: PerturbationSample) -> np.ndarray:
    return samp.points.max(axis=0) - samp.points.min(axis=0)


def _lp_diameter(p: float, q: float, k: int) -> float:
    # Euclidean diameter of a centered lp ball in k effective dimensions.
    if p <= 2:
        return 2.0 * q
    if math.isinf(p):
        return 2.0 * q * math.sqrt(k)
    return 2.0 * q * k ** (0.5 - 1.0 / p)


def diameter(pset: PerturbationSet, samp: PerturbationSample | None = None) -> float:
    """Euclidean diameter r_n; closed form where known, else over the sample."""
    kind = pset.kind
    if kind == "singleton0":
        return 0.0
    if kind == "lp_ball":
        return _lp_diameter(pset.p, pset.q, pset.dim)
    if kind == "sparse_lp_ball":
        if pset.s == 0:
            return 0.0
        return _lp_diameter(pset.p, pset.q, min(pset.s, pset.dim))
    if kind == "box":
        return 2.0 * float(np.linalg.norm(pset.half_widths))
    if kind == "segment":
        return float(np.linalg.norm(np.array(pset.end) - np.array(pset.start)))
    if samp is None:
        samp = sample(pset, 2)
    return sample_diameter(samp)


def coord_ranges(pset: PerturbationSet, samp: PerturbationSample | None = None) -> np.ndarray:
    """Per-coordinate ranges r_i = sup |delta_i - delta'_i|."""
    kind = pset.kind
    d = pset.dim
    if kind == "singleton0":
        return np.zeros(d)
    if kind in ("lp_ball", "sparse_lp_ball"):
        if kind == "sparse_lp_ball" and pset.s == 0:
            return np.zeros(d)
        return np.full(d, 2.0 * pset.q)
    if kind == "box":
        return 2.0 * np.array(pset.half_widths)
    if kind == "segment":
        return np.abs(np.array(pset.end) - np.array(pset.start))
    if samp is None:
        samp = sample(pset, 2)
    return sample_coord_ranges(samp)


@dataclass(frozen=True, eq=False)
class NeighborhoodTable:
    """All (x', delta) incidences between the inflated domain and the lattice.

    ``cand[k, g]`` is the lattice index of x'_g - delta_k, valid where
    ``valid[k, g]``.
    """

    xprime: GridDomain
    cand: np.ndarray
    valid: np.ndarray


def _lattice_candidates(domain: GridDomain, xp: np.ndarray, delta: np.ndarray,
                        xp_keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    shape = np.array(domain.shape)
    steps = np.round((xp - delta - domain.lo) / domain.spacing).astype(np.int64)
    inside = np.all((steps >= 0) & (steps < shape), axis=1)
    steps = np.clip(steps, 0, shape - 1)
    flat = np.ravel_multi_index(tuple(steps.T), domain.shape)
    same = np.all(point_keys(domain.points[flat] + delta) == xp_keys, axis=1)
    return flat, inside & same


def perturbed_domain(domain: GridDomain, pset: PerturbationSet, samp: PerturbationSample) -> GridDomain:
    """The inflated lattice {x + delta}, deduplicated, in sorted key order."""
    return neighborhood_table(domain, samp).xprime


def neighborhood_table(domain: GridDomain, samp: PerturbationSample) -> NeighborhoodTable:
    if not domain.is_regular:
        raise ValueError("neighborhoods need a regular lattice domain")
    if samp.dim != domain.dim:
        raise ValueError(f"dimension mismatch: domain d={domain.dim}, sample d={samp.dim}")
    key = domain.signature()
    if key in samp._cache:
        return samp._cache[key]
    sums = (domain.points[:, None, :] + samp.points[None, :, :]).reshape(-1, domain.dim)
    keys = point_keys(sums)
    ukeys, first = np.unique(keys, axis=0, return_index=True)
    xprime = GridDomain(points=sums[first], lo=sums.min(axis=0), hi=sums.max(axis=0),
                        spacing=domain.spacing.copy(), shape=None)
    xprime._cache["keys"] = ukeys
    m, g = len(samp), len(xprime)
    cand = np.empty((m, g), dtype=np.int64)
    valid = np.empty((m, g), dtype=bool)
    for k in range(m):
        cand[k], valid[k] = _lattice_candidates(domain, xprime.points, samp.points[k], ukeys)
    if not valid.any(axis=0).all():
        bad = int(np.flatnonzero(~valid.any(axis=0))[0])
        raise EmptyNeighborhood(f"no lattice preimage for x'={xprime.points[bad].tolist()}")
    table = NeighborhoodTable(xprime=xprime, cand=cand, valid=valid)
    samp._cache[key] = table
    return table


def neighborhood(xprime, pset: PerturbationSet, domain: GridDomain, samp: PerturbationSample) -> np.ndarray:
    """Lattice points x with x + delta = x' for some sampled delta, in lattice order."""
    xp = np.asarray(xprime, dtype=float).reshape(1, -1)
    if xp.shape[1] != domain.dim:
        raise ValueError("dimension mismatch")
    xp_key = point_keys(xp)
    hits = []
    for delta in samp.points:
        flat, ok = _lattice_candidates(domain, xp, delta, xp_key)
        if ok[0]:
            hits.append(int(flat[0]))
    if not hits:
        raise EmptyNeighborhood(f"no lattice preimage for x'={xp[0].tolist()}")
    return domain.points[sorted(set(hits))]


__all__ = [
    "EmptyNeighborhood", "PerturbationSet", "PerturbationSample", "NeighborhoodTable",
    "lp_ball", "sparse_lp_ball", "box", "segment", "finite_points", "singleton0", "from_config",
    "contains", "contains_many", "sample", "grid_sample", "diameter", "coord_ranges",
    "sample_diameter", "sample_coord_ranges", "neighborhood", "neighborhood_table",
    "perturbed_domain", "point_set",
]
