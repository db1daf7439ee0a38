"""Canonical frameworks with known behaviour, and random singular generators."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import EPS, Configuration, Framework, Graph
from .matrixlab import PinSet, _rigidity_entries, kernel_data, pinned_matrix, select_pin_set

MAX_RETRIES = 50


class GenerationError(RuntimeError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    name: str
    description: str
    points: tuple[tuple[Fraction, ...], ...]  # exact coordinates
    edges: tuple[tuple[int, int], ...]  # 1-based, as written
    expected: dict = field(default_factory=dict)

    @property
    def framework(self) -> Framework:
        pts = np.array([[float(x) for x in p] for p in self.points])
        return Framework.build(pts, self.edges, name=self.name, one_based=True)


def _pts(*coords) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(x) for x in p) for p in coords)


def _edges(spec: str) -> tuple[tuple[int, int], ...]:
    """'12 13 23' -> ((1,2),(1,3),(2,3)); single-digit vertices only."""
    return tuple((int(e[0]), int(e[1])) for e in spec.split())


_CANONICAL = (
    CorpusEntry(
        "generic_triangle",
        "K3 in the plane; infinitesimally rigid",
        _pts((0, 0), (1, 0), (0, 1)),
        _edges("12 13 23"),
        dict(kind="isostatic", rank=3, nullity=0, stresses=0, verdict="infinitesimally_rigid"),
    ),
    CorpusEntry(
        "collinear_brace",
        "vertex 3 at the midpoint of bar line 12; one flex (3 moves in y), stress on 12, 13, 23",
        _pts((0, 0), (2, 0), (1, 0), (1, 1)),
        _edges("12 13 23 14 24"),
        dict(kind="isostatic", rank=4, nullity=1, stresses=1, verdict="prestress_stable",
             certified_by=["prestress_stable", "transverse_rigid"]),
    ),
    CorpusEntry(
        "double_collinear",
        "vertices 3 and 5 each inside a bar of triangle 124; two flexes, two stresses",
        _pts((0, 0), (2, 0), (1, 0), (0, 2), (0, 1)),
        _edges("12 14 24 13 23 15 45"),
        dict(kind="isostatic", rank=5, nullity=2, stresses=2, verdict="transverse_inapplicable"),
    ),
    CorpusEntry(
        "hyperstatic_brace",
        "collinear_brace plus vertex 5 braced to 1, 2, 4; one flex, two-dimensional stress space",
        _pts((0, 0), (2, 0), (1, 0), (1, 1), (Fraction(1, 2), 2)),
        _edges("12 13 23 14 24 15 25 45"),
        dict(kind="hyperstatic(1)", rank=6, nullity=1, stresses=2, verdict="prestress_stable",
             certified_by=["prestress_stable", "transverse_rigid"]),
    ),
    CorpusEntry(
        "spatial_collinear",
        "tetrahedron 1234 plus vertex 5 at the midpoint of 12, braced to 3; one flex in R^3",
        _pts((0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 0, 0)),
        _edges("12 13 14 23 24 34 15 25 35"),
        dict(kind="isostatic", rank=8, nullity=1, stresses=1, verdict="prestress_stable",
             certified_by=["prestress_stable", "transverse_rigid"]),
    ),
)


def canonical_entries() -> list[CorpusEntry]:
    return list(_CANONICAL)


def entry(name: str) -> CorpusEntry:
    for e in _CANONICAL:
        if e.name == name:
            return e
    raise KeyError(name)


def names() -> list[str]:
    return [e.name for e in _CANONICAL]


# ---------------------------------------------------------------------------
# random generators


def _grid_points(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    # multiples of 1/32 keep differences and dyadic interpolation exact in float64
    return rng.integers(-64, 65, size=(n, d)) / 32.0


def _henneberg_edges(rng: np.random.Generator, n: int, d: int) -> list[tuple[int, int]]:
    """Generically rigid isostatic graph on n >= d+1 vertices via Henneberg moves."""
    edges = [(i, j) for i in range(d + 1) for j in range(i + 1, d + 1)]
    for v in range(d + 1, n):
        if v > d + 1 and rng.random() < 0.5:
            # edge split: replace ab by a-v-b and join v to d-1 more vertices
            a, b = edges.pop(int(rng.integers(len(edges))))
            others = [u for u in range(v) if u not in (a, b)]
            extra = rng.choice(others, size=d - 1, replace=False)
            targets = [a, b, *map(int, extra)]
        else:
            targets = [int(u) for u in rng.choice(v, size=d, replace=False)]
        edges += [(u, v) for u in targets]
    return edges


def _plant(rng, points: np.ndarray, edges: list, d: int, count: int):
    """Append `count` vertices, each inside a segment between two base vertices."""
    base = points.shape[0]
    pts = [p for p in points]
    edges = list(edges)
    for _ in range(count):
        v = len(pts)
        a, b = (int(x) for x in rng.choice(base, size=2, replace=False))
        t = int(rng.integers(1, 16)) / 16.0
        pts.append(points[a] + t * (points[b] - points[a]))
        others = [u for u in range(base) if u not in (a, b)]
        extra = [int(u) for u in rng.choice(others, size=d - 2, replace=False)] if d > 2 else []
        edges += [(a, v), (b, v)] + [(u, v) for u in extra]
    return np.array(pts), edges


def _shuffled(rng, points: np.ndarray, edges: list, name: str) -> Framework:
    n = points.shape[0]
    perm = rng.permutation(n)  # old index -> new index
    new_points = np.empty_like(points)
    new_points[perm] = points
    new_edges = [(int(perm[i]), int(perm[j])) for i, j in edges]
    order = rng.permutation(len(new_edges))
    return Framework.build(new_points, [new_edges[k] for k in order], name=name)


def _random_singular(seed: int, planted: int, n: int | None, d: int, n_range: tuple[int, int]) -> Framework:
    rng = np.random.default_rng(seed)
    lo, hi = n_range
    for _ in range(MAX_RETRIES):
        total = n if n is not None else int(rng.integers(lo, hi + 1))
        base_n = total - planted
        if base_n < d + 1:
            raise GenerationError(f"n = {total} too small for {planted} planted vertices in R^{d}")
        points = _grid_points(rng, base_n, d)
        edges = _henneberg_edges(rng, base_n, d)
        base = Framework.build(points, edges)
        if base.config.affine_dimension() < d or kernel_data(pinned_matrix(base).entries).nullity != 0:
            continue
        points, edges = _plant(rng, points, edges, d, planted)
        f = _shuffled(rng, points, edges, f"random_nullity{planted}_seed{seed}")
        if kernel_data(pinned_matrix(f).entries).nullity == planted:
            return f
    raise GenerationError(f"no nullity-{planted} framework after {MAX_RETRIES} attempts (seed {seed})")


def random_singular_nullity1(seed: int, n: int | None = None, d: int = 2,
                             n_range: tuple[int, int] = (4, 12)) -> Framework:
    """Isostatic, generically rigid framework with exactly one non-trivial flex.

    A generic Henneberg framework gets one extra vertex placed inside the
    segment between two of its vertices and joined to both (plus d-2 more
    vertices), so that vertex can move perpendicular to the segment.
    """
    return _random_singular(seed, 1, n, d, n_range)


def random_singular_nullity2(seed: int, n: int | None = None, d: int = 2,
                             n_range: tuple[int, int] = (5, 12)) -> Framework:
    """Like random_singular_nullity1 with two planted vertices: two flexes."""
    return _random_singular(seed, 2, n, d, n_range)


def random_generic(seed: int, n: int | None = None, d: int = 2, n_range: tuple[int, int] = (3, 12)) -> Framework:
    """Infinitesimally rigid isostatic framework (nonsingular pinned matrix)."""
    rng = np.random.default_rng(seed)
    lo, hi = n_range
    for _ in range(MAX_RETRIES):
        total = n if n is not None else int(rng.integers(max(lo, d + 1), hi + 1))
        points = _grid_points(rng, total, d)
        f = _shuffled(rng, points, _henneberg_edges(rng, total, d), f"random_generic_seed{seed}")
        if f.config.affine_dimension() == d and kernel_data(pinned_matrix(f).entries).nullity == 0:
            return f
    raise GenerationError(f"no generic framework after {MAX_RETRIES} attempts (seed {seed})")


# ---------------------------------------------------------------------------
# singular configurations along a path


def find_singular_config(f: Framework, path: Callable[[float], np.ndarray], bracket: tuple[float, float],
                         pin: PinSet | None = None, max_iter: int = 200) -> Configuration:
    """Bisection on t for det R(path(t)) = 0, pins held fixed.

    Stops once |det| <= N * eps * (product of row norms) or the bracket is
    narrower than 1e-14.
    """
    pin = pin or select_pin_set(f)
    free = list(pin.free_columns)

    def det_and_scale(t):
        pts = np.asarray(path(t), dtype=float).reshape(f.n, f.d)
        R = _rigidity_entries(f.graph.edges, pts)[:, free]
        if R.shape[0] != R.shape[1]:
            raise ValueError(f"pinned matrix is {R.shape[0]}x{R.shape[1]}, not square")
        return np.linalg.det(R), R.shape[0] * EPS * float(np.prod(np.linalg.norm(R, axis=1)))

    lo, hi = bracket
    f_lo, tol_lo = det_and_scale(lo)
    f_hi, tol_hi = det_and_scale(hi)
    if abs(f_lo) <= tol_lo:
        return Configuration(path(lo))
    if abs(f_hi) <= tol_hi:
        return Configuration(path(hi))
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"det has the same sign at t={lo} and t={hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid, tol_mid = det_and_scale(mid)
        if abs(f_mid) <= tol_mid or hi - lo <= 1e-14:
            return Configuration(path(mid))
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return Configuration(path(0.5 * (lo + hi)))
