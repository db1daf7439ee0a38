"""Framework data model, validation and degree-of-freedom bookkeeping.

Vertices are 0-based inside the library.  File formats and printed reports
use 1-based indices; conversion happens at those boundaries only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

EPS = np.finfo(np.float64).eps
AXES = "xyz"


class InvalidFramework(ValueError):
    """Raised when a framework violates the standing assumptions."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid framework")


def numerical_rank(a: np.ndarray, rtol: float | None = None) -> int:
    """SVD rank with tol = max(shape) * eps * sigma_max unless `rtol` is given."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if rtol is None:
        rtol = max(a.shape) * EPS
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def coord_label(vertex: int, k: int) -> str:
    """1-based label such as ``(3,y)`` for internal vertex 2, axis 1."""
    axis = AXES[k] if k < len(AXES) else str(k + 1)
    return f"({vertex + 1},{axis})"


def edge_label(edge: tuple[int, int]) -> str:
    return f"{edge[0] + 1}{edge[1] + 1}" if max(edge) < 9 else f"{edge[0] + 1}-{edge[1] + 1}"


@dataclass(frozen=True)
class Graph:
    """Simple graph on vertices ``0..n-1``; edges stored as sorted pairs in input order."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n: int, edges: Iterable[Sequence[int]]):
        object.__setattr__(self, "n", int(n))
        normalized = []
        for e in edges:
            i, j = (int(x) for x in e)
            normalized.append((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(normalized))

    @classmethod
    def from_one_based(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        return cls(n, [(int(i) - 1, int(j) - 1) for i, j in edges])

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_index(self, i: int, j: int) -> int:
        return self.edges.index((min(i, j), max(i, j)))

    def without_edge(self, index: int) -> Graph:
        return Graph(self.n, self.edges[:index] + self.edges[index + 1:])


@dataclass(frozen=True, eq=False)
class Configuration:
    """n points in R^d, stored as a read-only (n, d) float64 array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def flat(self) -> np.ndarray:
        return self.points.reshape(-1).copy()

    def scale(self) -> float:
        """Radius of the point cloud about its centroid (1.0 for a single point)."""
        centered = self.points - self.points.mean(axis=0)
        r = float(np.max(np.linalg.norm(centered, axis=1))) if self.n else 0.0
        return r if r > 0 else 1.0

    def affine_dimension(self) -> int:
        if self.n < 2:
            return 0
        return numerical_rank(self.points[1:] - self.points[0])

    def __eq__(self, other):
        return isinstance(other, Configuration) and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Framework:
    graph: Graph
    config: Configuration
    name: str = ""

    @classmethod
    def build(cls, points, edges, name: str = "", one_based: bool = False) -> Framework:
        """Construct from an (n, d) point array and an edge list."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        graph = Graph.from_one_based(len(pts), edges) if one_based else Graph(len(pts), edges)
        return cls(graph, Configuration(pts), name)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def d(self) -> int:
        return self.config.d

    @property
    def points(self) -> np.ndarray:
        return self.config.points

    def with_points(self, points: np.ndarray) -> Framework:
        return Framework(self.graph, Configuration(np.asarray(points).reshape(self.n, self.d)), self.name)

    def with_graph(self, graph: Graph) -> Framework:
        return Framework(graph, self.config, self.name)


@dataclass(frozen=True)
class DofProfile:
    m: int
    nd: int
    D: int
    kind: str  # isostatic | hyperstatic | hypostatic
    excess: int = field(default=0)  # |m - (nd - D)|

    @property
    def free(self) -> int:
        return self.nd - self.D

    @property
    def label(self) -> str:
        return self.kind if self.kind == "isostatic" else f"{self.kind}({self.excess})"


def trivial_dimension(d: int) -> int:
    return comb(d + 1, 2)


def validate_framework(f: Framework) -> list[str]:
    """Return every violated invariant as a message; an empty list means valid."""
    out: list[str] = []
    g, pts = f.graph, f.config.points
    if g.n < 2:
        out.append(f"vertex count {g.n} < 2")
    if pts.ndim != 2 or pts.shape[1] < 1:
        out.append("dimension must be at least 1")
        return out
    n, d = pts.shape
    if n != g.n:
        out.append(f"graph has {g.n} vertices but configuration has {n} points")
    if not np.all(np.isfinite(pts)):
        out.append("non-finite coordinate")
    seen = set()
    for i, j in g.edges:
        label = f"{{{i + 1},{j + 1}}}"
        if i == j:
            out.append(f"self-loop {label}")
        if i < 0 or j >= g.n:
            out.append(f"edge {label} has vertex index outside 1..{g.n}")
        if (i, j) in seen:
            out.append(f"duplicate edge {label}")
        seen.add((i, j))
    if n < d + 1:
        out.append(f"n = {n} < d + 1 = {d + 1}")
    if np.all(np.isfinite(pts)) and n >= 2:
        span = f.config.affine_dimension()
        if span < d:
            out.append(f"affine span dimension {span} < {d}")
    return out


def require_valid(f: Framework) -> None:
    problems = validate_framework(f)
    if problems:
        raise InvalidFramework(problems)


def dof_profile(f: Framework) -> DofProfile:
    m, nd, D = f.graph.m, f.n * f.d, trivial_dimension(f.d)
    excess = m - (nd - D)
    kind = "isostatic" if excess == 0 else ("hyperstatic" if excess > 0 else "hypostatic")
    return DofProfile(m=m, nd=nd, D=D, kind=kind, excess=abs(excess))


def neighbor_sets(g: Graph) -> dict[int, list[int]]:
    nbrs: dict[int, set[int]] = {v: set() for v in range(g.n)}
    for i, j in g.edges:
        nbrs[i].add(j)
        nbrs[j].add(i)
    return {v: sorted(s) for v, s in nbrs.items()}
