"""Rigidity-matrix assembly, pinning and SVD-based kernels.

Columns of the rigidity matrix are ordered vertex-major: column ``i*d + k``
holds coordinate ``k`` of vertex ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    EPS,
    Configuration,
    Framework,
    InvalidFramework,
    coord_label,
    numerical_rank,
    require_valid,
    trivial_dimension,
)

MARGINAL_FACTOR = 10.0


class InvalidPinSet(ValueError):
    pass


def _rigidity_entries(edges: Sequence[tuple[int, int]], points: np.ndarray) -> np.ndarray:
    n, d = points.shape
    R = np.zeros((len(edges), n * d))
    for row, (i, j) in enumerate(edges):
        diff = points[i] - points[j]
        R[row, i * d:(i + 1) * d] = diff
        R[row, j * d:(j + 1) * d] = -diff
    return R


@dataclass(frozen=True, eq=False)
class RigidityMatrix:
    entries: np.ndarray
    edges: tuple[tuple[int, int], ...]
    n: int
    d: int

    @property
    def row_index(self) -> tuple[tuple[int, int], ...]:
        return self.edges

    @property
    def col_index(self) -> list[tuple[int, int]]:
        return [(i, k) for i in range(self.n) for k in range(self.d)]


def build_rigidity_matrix(f: Framework) -> RigidityMatrix:
    require_valid(f)
    return RigidityMatrix(_rigidity_entries(f.graph.edges, f.points), f.graph.edges, f.n, f.d)


def trivial_motion_basis(c: Configuration) -> np.ndarray:
    """nd x D matrix: d translations followed by one rotation per axis pair k < l."""
    n, d = c.n, c.d
    cols = []
    for k in range(d):
        t = np.zeros((n, d))
        t[:, k] = 1.0
        cols.append(t.reshape(-1))
    for k in range(d):
        for l in range(k + 1, d):
            r = np.zeros((n, d))
            r[:, k] = c.points[:, l]
            r[:, l] = -c.points[:, k]
            cols.append(r.reshape(-1))
    return np.column_stack(cols) if cols else np.zeros((n * d, 0))


@dataclass(frozen=True)
class PinSet:
    """D pinned coordinates as (vertex, axis) pairs, 0-based, in ascending order."""

    pinned: tuple[tuple[int, int], ...]
    n: int
    d: int

    @classmethod
    def build(cls, config: Configuration, pinned: Sequence[Sequence[int]]) -> PinSet:
        """Validated constructor; raises InvalidPinSet unless the pins kill all trivial motions."""
        n, d = config.n, config.d
        pairs = sorted({(int(v), int(k)) for v, k in pinned})
        if len(pairs) != len(pinned):
            raise InvalidPinSet("duplicate pinned coordinate")
        D = trivial_dimension(d)
        if len(pairs) != D:
            raise InvalidPinSet(f"expected {D} pinned coordinates, got {len(pairs)}")
        for v, k in pairs:
            if not (0 <= v < n and 0 <= k < d):
                raise InvalidPinSet(f"pinned coordinate {coord_label(v, k)} out of range")
        pin = cls(tuple(pairs), n, d)
        T = trivial_motion_basis(config)
        if numerical_rank(T[list(pin.columns)]) < D:
            raise InvalidPinSet("pinned coordinates do not remove every trivial motion")
        return pin

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(v * self.d + k for v, k in self.pinned)

    @property
    def free_columns(self) -> tuple[int, ...]:
        pinned = set(self.columns)
        return tuple(c for c in range(self.n * self.d) if c not in pinned)

    def is_pinned(self, vertex: int, k: int) -> bool:
        return (vertex, k) in self.pinned

    def labels(self) -> list[str]:
        return [coord_label(v, k) for v, k in self.pinned]


def select_pin_set(f: Framework) -> PinSet:
    """Greedy pick of D coordinates in (vertex, axis) order.

    A coordinate is taken when its row of the trivial-motion basis raises
    the rank of the rows chosen so far.
    """
    span = f.config.affine_dimension()
    if span < f.d:
        raise InvalidFramework([f"affine span dimension {span} < {f.d}"])
    T = trivial_motion_basis(f.config)
    D = T.shape[1]
    # column-pivot in index order; rank test relative to the basis scale
    rtol = max(T.shape) * EPS * 1e3
    chosen: list[int] = []
    for c in range(T.shape[0]):
        if numerical_rank(T[chosen + [c]], rtol) > len(chosen):
            chosen.append(c)
            if len(chosen) == D:
                break
    if len(chosen) < D:
        raise InvalidFramework(["could not find a pin set; configuration is degenerate"])
    return PinSet.build(f.config, [divmod(c, f.d) for c in chosen])


@dataclass(frozen=True, eq=False)
class PinnedMatrix:
    entries: np.ndarray
    pin: PinSet
    edges: tuple[tuple[int, int], ...]

    @property
    def columns(self) -> tuple[int, ...]:
        """Parent column index of every column kept."""
        return self.pin.free_columns

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def pin_columns(R: RigidityMatrix, pin: PinSet) -> PinnedMatrix:
    if (pin.n, pin.d) != (R.n, R.d):
        raise InvalidPinSet(f"pin set is for n={pin.n}, d={pin.d}; matrix has n={R.n}, d={R.d}")
    return PinnedMatrix(R.entries[:, list(pin.free_columns)], pin, R.edges)


def pinned_matrix(f: Framework, pin: PinSet | None = None) -> PinnedMatrix:
    if pin is None:
        pin = select_pin_set(f)
    return pin_columns(build_rigidity_matrix(f), pin)


@dataclass(frozen=True, eq=False)
class KernelData:
    rank: int
    tol: float
    stress_basis: np.ndarray  # (m - rank) x m
    flex_basis: np.ndarray  # (cols - rank) x cols
    singular_values: np.ndarray
    marginal: bool

    @property
    def stress_count(self) -> int:
        return self.stress_basis.shape[0]

    @property
    def nullity(self) -> int:
        return self.flex_basis.shape[0]


def _canonical_basis(B: np.ndarray) -> np.ndarray:
    """Reproducible orthonormal basis of the row span of B.

    Gram-Schmidt over the projections of e_0, e_1, ... onto the span, so the
    result depends only on the subspace; each vector's first significant
    entry is made positive.
    """
    k, N = B.shape
    if k == 0:
        return B.copy()
    P = B.T @ B
    out: list[np.ndarray] = []
    for j in range(N):
        v = P[:, j].copy()
        for _ in range(2):
            for u in out:
                v -= (u @ v) * u
        nv = np.linalg.norm(v)
        if nv > 1e-4:
            out.append(v / nv)
            if len(out) == k:
                break
    if len(out) < k:  # fall back to the raw basis, still orthonormal
        return B.copy()
    basis = np.array(out)
    for row in basis:
        big = np.flatnonzero(np.abs(row) > 1e-9 * np.max(np.abs(row)))
        if row[big[0]] < 0:
            row *= -1
    return basis


def kernel_data(M: np.ndarray, rtol: float | None = None) -> KernelData:
    """Numerical rank and orthonormal left/right kernels of M.

    The rank tolerance is ``max(rows, cols) * eps * sigma_max``, or
    ``rtol * sigma_max`` when `rtol` is given.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    rows, cols = M.shape
    if M.size == 0:
        return KernelData(0, 0.0, np.eye(rows), np.eye(cols), np.zeros(0), False)
    U, s, Vh = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    tol = (rtol if rtol is not None else max(rows, cols) * EPS) * smax
    rank = int(np.sum(s > tol))
    if smax == 0:
        marginal = False
    else:
        marginal = bool(np.any((s > tol / MARGINAL_FACTOR) & (s < tol * MARGINAL_FACTOR)))
    left = _canonical_basis(U[:, rank:].T)
    right = _canonical_basis(Vh[rank:, :])
    return KernelData(rank, float(tol), left, right, s, marginal)


@dataclass(frozen=True, eq=False)
class FullFlex:
    vector: np.ndarray
    source: np.ndarray
    pin: PinSet

    def per_vertex(self) -> np.ndarray:
        return self.vector.reshape(self.pin.n, self.pin.d)


def zero_pad(flex: np.ndarray, pin: PinSet) -> FullFlex:
    flex = np.asarray(flex, dtype=float)
    free = pin.free_columns
    if flex.shape != (len(free),):
        raise ValueError(f"flex has length {flex.size}, expected {len(free)}")
    full = np.zeros(pin.n * pin.d)
    full[list(free)] = flex
    return FullFlex(full, flex.copy(), pin)


def strip_pinned(vector: np.ndarray, pin: PinSet) -> np.ndarray:
    return np.asarray(vector)[list(pin.free_columns)]


def rigidity_matrix_of_flex(f: Framework, v: FullFlex | np.ndarray, pin: PinSet) -> PinnedMatrix:
    """Pinned rigidity matrix with the configuration replaced by the vector v."""
    vec = v.vector if isinstance(v, FullFlex) else np.asarray(v, dtype=float)
    if vec.shape != (f.n * f.d,):
        raise ValueError(f"vector has length {vec.size}, expected {f.n * f.d}")
    R = RigidityMatrix(_rigidity_entries(f.graph.edges, vec.reshape(f.n, f.d)), f.graph.edges, f.n, f.d)
    return pin_columns(R, pin)
