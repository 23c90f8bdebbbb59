"""Finite lattices standing in for the domain X=[0,1]^d and its inflation X'."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Points are identified by rounding to a dyadic grid; dyadic lattices map exactly.
KEY_SCALE = float(2**30)

DEFAULT_RESOLUTION = {1: 1025, 2: 65, 3: 17}


def point_keys(points: np.ndarray) -> np.ndarray:
    """Integer identity keys for an (m, d) array of points."""
    return np.round(np.asarray(points, dtype=float) * KEY_SCALE).astype(np.int64)


class KeyIndex:
    """Exact lookup of key rows into a fixed table of unique key rows."""

    def __init__(self, keys: np.ndarray):
        keys = np.asarray(keys, dtype=np.int64)
        self._lo = keys.min(axis=0)
        self._hi = keys.max(axis=0)
        span = (self._hi - self._lo + 1).astype(object)
        total = 1
        for s in span:
            total *= int(s)
        self._dict = None
        if total < 2**62:
            self._radix = np.array([int(np.prod(span[i + 1:], dtype=object)) for i in range(len(span))],
                                   dtype=np.int64)
            codes = ((keys - self._lo) * self._radix).sum(axis=1)
            self._order = np.argsort(codes, kind="stable")
            self._codes = codes[self._order]
        else:
            self._dict = {tuple(k): i for i, k in enumerate(keys.tolist())}

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Row index of each key in the table, or -1 when absent."""
        keys = np.asarray(keys, dtype=np.int64)
        if self._dict is not None:
            return np.array([self._dict.get(tuple(k), -1) for k in keys.tolist()], dtype=np.int64)
        out = np.full(len(keys), -1, dtype=np.int64)
        inside = np.all((keys >= self._lo) & (keys <= self._hi), axis=1)
        if not inside.any():
            return out
        codes = ((keys[inside] - self._lo) * self._radix).sum(axis=1)
        pos = np.searchsorted(self._codes, codes)
        pos = np.minimum(pos, len(self._codes) - 1)
        hit = self._codes[pos] == codes
        found = np.where(hit, self._order[pos], -1)
        out[inside] = found
        return out


@dataclass(frozen=True, eq=False)
class GridDomain:
    """A finite point set with per-axis bounds and nominal spacing.

    Regular lattices carry ``shape`` (points per axis) and list their points in
    row-major order. Irregular sets, such as the inflated domain, have
    ``shape=None``.
    """

    points: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    spacing: np.ndarray
    shape: tuple[int, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def lattice(self) -> np.ndarray:
        return self.points

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_regular(self) -> bool:
        return self.shape is not None

    @property
    def grid_spacing(self) -> float:
        return float(np.max(self.spacing))

    def keys(self) -> np.ndarray:
        if "keys" not in self._cache:
            self._cache["keys"] = point_keys(self.points)
        return self._cache["keys"]

    def key_index(self) -> KeyIndex:
        if "key_index" not in self._cache:
            self._cache["key_index"] = KeyIndex(self.keys())
        return self._cache["key_index"]

    def nearest_index(self, x: np.ndarray) -> np.ndarray:
        """Index of the nearest point for each query row (exact key match first)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.is_regular:
            steps = np.round((x - self.lo) / self.spacing).astype(np.int64)
            steps = np.clip(steps, 0, np.array(self.shape) - 1)
            return np.ravel_multi_index(tuple(steps.T), self.shape)
        idx = self.key_index().lookup(point_keys(x))
        missing = idx < 0
        if missing.any():
            if "tree" not in self._cache:
                from scipy.spatial import cKDTree
                self._cache["tree"] = cKDTree(self.points)
            _, near = self._cache["tree"].query(x[missing])
            idx[missing] = near
        return idx

    def signature(self) -> tuple:
        return (self.shape, tuple(self.lo.tolist()), tuple(self.hi.tolist()))


def unit_lattice(d: int, resolution: int | None = None) -> GridDomain:
    """Axis-uniform lattice on [0,1]^d with ``resolution`` points per axis."""
    if resolution is None:
        resolution = DEFAULT_RESOLUTION.get(d, 9)
    return box_lattice(np.zeros(d), np.ones(d), (resolution,) * d)


def box_lattice(lo, hi, shape) -> GridDomain:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    shape = tuple(int(s) for s in shape)
    if len(shape) != len(lo) or any(s < 2 for s in shape):
        raise ValueError("need at least 2 points per axis")
    axes = [np.linspace(a, b, s) for a, b, s in zip(lo, hi, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    spacing = (hi - lo) / (np.array(shape) - 1)
    return GridDomain(points=points, lo=lo, hi=hi, spacing=spacing, shape=shape)


def point_set(points: np.ndarray, spacing) -> GridDomain:
    """Irregular domain from an explicit point list."""
    points = np.asarray(points, dtype=float)
    return GridDomain(points=points, lo=points.min(axis=0), hi=points.max(axis=0),
                      spacing=np.broadcast_to(np.asarray(spacing, dtype=float), (points.shape[1],)).copy())
