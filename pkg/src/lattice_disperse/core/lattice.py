"""Lattice points, boxes and finitely supported sequences on Z^d."""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Mapping

import numpy as np

MAX_DIM = 6
MAX_COORD = 2 ** 31 - 1


def as_lattice_vector(coords, max_dim: int = MAX_DIM) -> tuple[int, ...]:
    """Validate and normalise a lattice point to a tuple of ints."""
    if np.isscalar(coords):
        coords = (coords,)
    out = []
    for c in coords:
        if int(c) != c:
            raise ValueError(f"non-integer lattice coordinate {c!r}")
        c = int(c)
        if abs(c) > MAX_COORD:
            raise ValueError(f"coordinate {c} exceeds 2^31-1 in magnitude")
        out.append(c)
    if not 1 <= len(out) <= max_dim:
        raise ValueError(f"dimension {len(out)} outside [1, {max_dim}]")
    return tuple(out)


def rho_weight(n) -> float:
    """Product weight prod_j (1 + |n_j|)^-1."""
    n = np.atleast_1d(np.asarray(n))
    return float(np.prod(1.0 / (1.0 + np.abs(n).astype(float))))


def rho_weights(coords: np.ndarray) -> np.ndarray:
    """Row-wise ``rho_weight`` for an ``(k, d)`` integer array."""
    coords = np.asarray(coords)
    return np.prod(1.0 / (1.0 + np.abs(coords).astype(float)), axis=-1)


class Box:
    """The cube [-N, N]^d, enumerated in lexicographic order."""

    def __init__(self, radius: int, dim: int):
        if radius < 1:
            raise ValueError("box radius must be >= 1")
        if not 1 <= dim <= MAX_DIM:
            raise ValueError(f"dimension {dim} outside [1, {MAX_DIM}]")
        self.radius = int(radius)
        self.dim = int(dim)

    @property
    def side(self) -> int:
        return 2 * self.radius + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.dim

    def __len__(self) -> int:
        return self.side ** self.dim

    def __repr__(self) -> str:
        return f"Box(radius={self.radius}, dim={self.dim})"

    def points(self) -> np.ndarray:
        """All points as an ``(len(box), d)`` array, lexicographic order."""
        axis = np.arange(-self.radius, self.radius + 1)
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def index(self, coords) -> np.ndarray:
        """Flat indices of points (rows of ``coords``) inside the box."""
        c = np.atleast_2d(np.asarray(coords)) + self.radius
        if np.any(c < 0) or np.any(c >= self.side):
            raise IndexError("point outside the box")
        return np.ravel_multi_index(tuple(c.T), self.shape)

    def contains(self, coords) -> np.ndarray:
        c = np.atleast_2d(np.asarray(coords))
        return np.all(np.abs(c) <= self.radius, axis=1)


class LatticeSequence:
    """Finitely supported complex function on Z^d.

    Zero entries are dropped, so ``len(seq)`` is the size of the support.
    Instances are immutable.
    """

    __slots__ = ("dim", "_coords", "_values")

    def __init__(self, data: Mapping | None = None, dim: int | None = None):
        data = dict(data or {})
        keys = [as_lattice_vector(k) for k in data]
        if dim is None:
            if not keys:
                raise ValueError("dimension required for the empty sequence")
            dim = len(keys[0])
        if any(len(k) != dim for k in keys):
            raise ValueError("mixed dimensions in sequence support")
        acc: dict[tuple, complex] = {}
        for k, v in zip(keys, data.values()):
            acc[k] = acc.get(k, 0) + complex(v)
        items = sorted((k, v) for k, v in acc.items() if v != 0)
        self.dim = int(dim)
        self._coords = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, self.dim)
        self._values = np.array([v for _, v in items], dtype=complex)
        self._coords.setflags(write=False)
        self._values.setflags(write=False)

    @classmethod
    def from_arrays(cls, coords, values, dim: int | None = None) -> "LatticeSequence":
        coords = np.asarray(coords, dtype=np.int64)
        values = np.asarray(values, dtype=complex).ravel()
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1) if dim in (None, 1) else coords.reshape(-1, dim)
        dim = coords.shape[1] if dim is None else dim
        self = cls.__new__(cls)
        keep = values != 0
        coords, values = coords[keep], values[keep]
        if len(coords):
            uniq, inv = np.unique(coords, axis=0, return_inverse=True)
            summed = np.zeros(len(uniq), complex)
            np.add.at(summed, inv.ravel(), values)
            nz = summed != 0
            coords, values = uniq[nz], summed[nz]
        self.dim = int(dim)
        self._coords = np.ascontiguousarray(coords.reshape(-1, self.dim))
        self._values = np.ascontiguousarray(values)
        self._coords.setflags(write=False)
        self._values.setflags(write=False)
        return self

    @classmethod
    def delta(cls, n, value: complex = 1.0) -> "LatticeSequence":
        n = as_lattice_vector(n)
        return cls({n: value}, dim=len(n))

    @classmethod
    def from_dense(cls, array: np.ndarray, box: Box) -> "LatticeSequence":
        array = np.asarray(array).ravel()
        return cls.from_arrays(box.points(), array, box.dim)

    @classmethod
    def indicator(cls, box: Box, value: complex = 1.0) -> "LatticeSequence":
        return cls.from_arrays(box.points(), np.full(len(box), value, complex), box.dim)

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, n) -> complex:
        n = np.asarray(as_lattice_vector(n))
        hit = np.nonzero(np.all(self._coords == n, axis=1))[0]
        return complex(self._values[hit[0]]) if len(hit) else 0j

    def items(self):
        for c, v in zip(self._coords, self._values):
            yield tuple(int(x) for x in c), complex(v)

    def support_radius(self) -> int:
        """Largest sup-norm of a support point (0 for the empty sequence)."""
        return int(np.abs(self._coords).max()) if len(self) else 0

    def to_dense(self, box: Box) -> np.ndarray:
        out = np.zeros(len(box), complex)
        if len(self):
            out[box.index(self._coords)] = self._values
        return out

    def scaled(self, c: complex) -> "LatticeSequence":
        return LatticeSequence.from_arrays(self._coords, c * self._values, self.dim)

    def translated(self, shift) -> "LatticeSequence":
        shift = np.asarray(as_lattice_vector(shift))
        return LatticeSequence.from_arrays(self._coords + shift, self._values, self.dim)

    def __add__(self, other: "LatticeSequence") -> "LatticeSequence":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return LatticeSequence.from_arrays(np.vstack([self._coords, other._coords]),
                                           np.concatenate([self._values, other._values]), self.dim)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LatticeSequence) and other.dim == self.dim
                and np.array_equal(self._coords, other._coords)
                and np.array_equal(self._values, other._values))

    def __repr__(self) -> str:
        return f"LatticeSequence(dim={self.dim}, support={len(self)})"

    def norm(self, p: float = 2.0, kappa: float = 0.0) -> float:
        return norm(self, p, kappa)


def norm(f: LatticeSequence, p: float = 2.0, kappa: float = 0.0) -> float:
    """Weighted norm (sum_n rho_n^{-p kappa} |f_n|^p)^{1/p}.

    ``p = inf`` gives ``sup_n rho_n^{-kappa} |f_n|``; ``kappa = 0`` the plain
    l^p norm.
    """
    if not p >= 1:
        raise ValueError(f"norm exponent p={p} must be >= 1")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if len(f) == 0:
        return 0.0
    a = np.abs(f.values)
    if kappa:
        a = a * rho_weights(f.coords) ** (-kappa)
    if math.isinf(p):
        return float(a.max())
    # scale to avoid overflow for large p
    m = a.max()
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def convolve(f: LatticeSequence, g: LatticeSequence) -> LatticeSequence:
    """(f * g)_n = sum_m f_m g_{n-m}, summed exactly over the supports."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if len(f) == 0 or len(g) == 0:
        return LatticeSequence({}, dim=f.dim)
    if len(f) * len(g) <= 4_000_000:
        coords = (f.coords[:, None, :] + g.coords[None, :, :]).reshape(-1, f.dim)
        vals = (f.values[:, None] * g.values[None, :]).ravel()
        return LatticeSequence.from_arrays(coords, vals, f.dim)
    # large supports: chunk over f to bound memory
    out = LatticeSequence({}, dim=f.dim)
    step = max(1, 4_000_000 // len(g))
    for i in range(0, len(f), step):
        part = LatticeSequence.from_arrays(f.coords[i:i + step], f.values[i:i + step], f.dim)
        out = out + convolve(part, g)
    return out


def random_sequence(rng: np.random.Generator, dim: int, radius: int, density: float = 1.0,
                    complex_values: bool = True) -> LatticeSequence:
    """Random sequence supported in [-radius, radius]^dim (test helper)."""
    box = Box(max(radius, 1), dim)
    pts = box.points()
    if radius == 0:
        pts = np.zeros((1, dim), np.int64)
    keep = rng.random(len(pts)) < density
    if not keep.any():
        keep[rng.integers(len(pts))] = True
    vals = rng.standard_normal(keep.sum())
    if complex_values:
        vals = vals + 1j * rng.standard_normal(keep.sum())
    return LatticeSequence.from_arrays(pts[keep], vals, dim)


def lattice_points(dim: int, radius: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(-radius, radius + 1), repeat=dim)
