"""Prestress-stability and transverse-rigidity certificates.

Both tests look at a framework with a single non-trivial infinitesimal flex
p' and ask whether an open condition holds:

* prestress stability: the stress energy sum_{ij} w_ij |p'_i - p'_j|^2 is
  nonzero for some equilibrium stress w;
* transverse rigidity: the gradient of det R(p) (pinned, square) has a
  nonzero component along p'.

The cofactor matrix of a nullity-1 square matrix is proportional to the
outer product of its left and right kernel vectors, which makes the
determinant gradient a multiple of w^T R(p'). ``equivalence_report``
measures that proportionality numerically.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .core import (
    DofProfile,
    Framework,
    Graph,
    coord_label,
    dof_profile,
    edge_label,
    neighbor_sets,
    require_valid,
)
from .matrixlab import (
    FullFlex,
    KernelData,
    PinSet,
    _rigidity_entries,
    kernel_data,
    pinned_matrix,
    rigidity_matrix_of_flex,
    select_pin_set,
    zero_pad,
)

DEFAULT_MARGIN = 1e-6
DEFAULT_FD_STEP = 1e-6
DEFAULT_EQUIVALENCE_THRESHOLD = 1e-8
ZERO_RELATIVE = 1e-10
MARGINAL_MESSAGE = "rank decision within 10x of the tolerance: certificate withheld"


class Verdict(str, Enum):
    INFINITESIMALLY_RIGID = "infinitesimally_rigid"
    PRESTRESS_STABLE = "prestress_stable"
    TRANSVERSE_RIGID = "transverse_rigid"
    INCONCLUSIVE = "inconclusive"
    TRANSVERSE_INAPPLICABLE = "transverse_inapplicable"
    NOT_APPLICABLE_HYPOSTATIC = "not_applicable_hypostatic"

    @property
    def rigid(self) -> bool:
        return self in RIGID_VERDICTS


RIGID_VERDICTS = frozenset(
    {Verdict.INFINITESIMALLY_RIGID, Verdict.PRESTRESS_STABLE, Verdict.TRANSVERSE_RIGID}
)


class NotSquare(ValueError):
    pass


class TransverseInapplicable(ValueError):
    """The transverse test needs a square pinned matrix with nullity exactly 1."""


class EquivalenceViolation(AssertionError):
    """Both tests ran on the same framework and disagreed."""


@dataclass(frozen=True)
class Settings:
    rank_rtol: float | None = None  # None: max(rows, cols) * eps
    margin: float = DEFAULT_MARGIN
    fd_step: float = DEFAULT_FD_STEP  # relative to the configuration scale
    equivalence_threshold: float = DEFAULT_EQUIVALENCE_THRESHOLD


# ---------------------------------------------------------------------------
# stress energy


def stress_energy(g: Graph, omega: np.ndarray, v: FullFlex | np.ndarray) -> float:
    """sum over edges of omega_ij * |v_i - v_j|^2."""
    omega = np.asarray(omega, dtype=float)
    vec = v.vector if isinstance(v, FullFlex) else np.asarray(v, dtype=float)
    if omega.shape != (g.m,):
        raise ValueError(f"stress has length {omega.size}, expected {g.m}")
    if vec.size % g.n:
        raise ValueError(f"flex length {vec.size} is not a multiple of n = {g.n}")
    per_vertex = vec.reshape(g.n, -1)
    total = 0.0
    for w, (i, j) in zip(omega, g.edges):
        diff = per_vertex[i] - per_vertex[j]
        total += w * float(diff @ diff)
    return total


def stress_energy_bilinear(f: Framework, pin: PinSet, omega: np.ndarray, flex: np.ndarray) -> float:
    """omega^T R(p') p' with R(p') the pinned matrix built on the padded flex."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (f.graph.m,):
        raise ValueError(f"stress has length {omega.size}, expected {f.graph.m}")
    full = zero_pad(flex, pin)
    return float(omega @ rigidity_matrix_of_flex(f, full, pin).entries @ full.source)


# ---------------------------------------------------------------------------
# cofactors


@dataclass(frozen=True, eq=False)
class CofactorData:
    cof: np.ndarray
    det: float
    nullity: int
    scale: float  # sigma_max ** (N - 1), the natural size of a cofactor
    rtol: float  # rank tolerance relative to sigma_max
    left: np.ndarray | None = None
    right: np.ndarray | None = None
    alpha: float = 0.0
    residual: float = float("nan")

    @property
    def vanishes(self) -> bool:
        return self.nullity >= 2

    @property
    def max_relative(self) -> float:
        """max |cofactor| / scale."""
        return float(np.max(np.abs(self.cof)) / self.scale) if self.scale > 0 else 0.0


def _products_except_one(s: np.ndarray) -> np.ndarray:
    """out[i] = prod_{j != i} s[j], without dividing."""
    prefix = np.concatenate(([1.0], np.cumprod(s[:-1])))
    suffix = np.concatenate((np.cumprod(s[::-1][:-1])[::-1], [1.0]))
    return prefix * suffix


def _cofactors_svd(M: np.ndarray):
    U, s, Vh = np.linalg.svd(M)
    sign = np.sign(np.linalg.det(U)) * np.sign(np.linalg.det(Vh))
    cof = sign * (U * _products_except_one(s)) @ Vh
    return cof, float(sign * np.prod(s)), s


def cofactor_minors(M: np.ndarray) -> np.ndarray:
    """Signed minors by direct determinant evaluation, O(N^5)."""
    N = M.shape[0]
    cof = np.empty((N, N))
    if N == 1:
        return np.ones((1, 1))
    for i in range(N):
        rows = np.delete(M, i, axis=0)
        for j in range(N):
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(np.delete(rows, j, axis=1))
    return cof


def cofactor_matrix(M: np.ndarray, rtol: float | None = None, method: str = "svd") -> CofactorData:
    """All cofactors of a square matrix, plus the rank-1 factorization when nullity is 1.

    ``method="svd"`` uses adj(U S V^T) = det(U) det(V) V adj(S) U^T, one
    decomposition for every rank. ``method="minors"`` evaluates each minor.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSquare(f"cofactor matrix needs a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    N = M.shape[0]
    if method == "svd":
        cof, det, s = _cofactors_svd(M)
    elif method == "minors":
        cof, det = cofactor_minors(M), float(np.linalg.det(M))
        s = np.linalg.svd(M, compute_uv=False)
    else:
        raise ValueError(f"unknown method {method!r}")
    kd = kernel_data(M, rtol)
    smax = s[0] if s.size else 0.0
    scale = smax ** (N - 1) if smax > 0 else 0.0
    rel = kd.tol / smax if smax > 0 else 0.0
    if kd.nullity != 1:
        return CofactorData(cof, det, kd.nullity, scale, rel)
    left, right = kd.stress_basis[0], kd.flex_basis[0]
    alpha = float(left @ cof @ right)
    norm = np.linalg.norm(cof)
    residual = float(np.linalg.norm(cof - alpha * np.outer(left, right)) / norm) if norm > 0 else float("inf")
    return CofactorData(cof, det, 1, scale, rel, left, right, alpha, residual)


# ---------------------------------------------------------------------------
# determinant gradient


@dataclass(frozen=True, eq=False)
class DetGradient:
    values: np.ndarray  # indexed like the free (unpinned) columns
    method: str  # analytic | finite-difference
    pin: PinSet
    degenerate: bool = False
    step: float | None = None
    cof_norm: float | None = None  # Frobenius norm of the cofactor matrix used

    def labels(self) -> list[str]:
        return [coord_label(*divmod(c, self.pin.d)) for c in self.pin.free_columns]


def _square_pinned(f: Framework, pin: PinSet):
    P = pinned_matrix(f, pin)
    if P.shape[0] != P.shape[1]:
        raise NotSquare(f"pinned rigidity matrix is {P.shape[0]}x{P.shape[1]}, not square")
    return P


def det_gradient_analytic(f: Framework, pin: PinSet, rtol: float | None = None) -> DetGradient:
    """Partials of det R(p) with respect to the free coordinates, from cofactors.

    For free coordinate (i, k)::

        d det / d p_ik = sum_{j in N(i)} cof[ij, (i,k)] - sum_{j in N_k(i)} cof[ij, (j,k)]

    where N_k(i) keeps the neighbours whose k-th coordinate is free.
    When the pinned matrix has nullity >= 2 every cofactor vanishes and the
    zero gradient is returned with ``degenerate=True``.
    """
    P = _square_pinned(f, pin)
    cd = cofactor_matrix(P.entries, rtol)
    free = pin.free_columns
    cof_norm = float(np.linalg.norm(cd.cof))
    if cd.vanishes:
        return DetGradient(np.zeros(len(free)), "analytic", pin, degenerate=True, cof_norm=cof_norm)
    col = {c: idx for idx, c in enumerate(free)}
    row = {e: idx for idx, e in enumerate(f.graph.edges)}
    nbrs = neighbor_sets(f.graph)
    d = f.d
    grad = np.zeros(len(free))
    for idx, c in enumerate(free):
        i, k = divmod(c, d)
        for j in nbrs[i]:
            r = row[(min(i, j), max(i, j))]
            grad[idx] += cd.cof[r, col[c]]
            if j * d + k in col:
                grad[idx] -= cd.cof[r, col[j * d + k]]
    return DetGradient(grad, "analytic", pin, cof_norm=cof_norm)


def det_gradient_fd(f: Framework, pin: PinSet, h: float | None = None) -> DetGradient:
    """Central differences of det R(p); `h` defaults to 1e-6 times the configuration scale."""
    _square_pinned(f, pin)
    if h is None:
        h = DEFAULT_FD_STEP * f.config.scale()
    if h <= 0:
        raise ValueError("step must be positive")
    free = list(pin.free_columns)
    base = f.config.flat()

    def det_at(x):
        R = _rigidity_entries(f.graph.edges, x.reshape(f.n, f.d))
        return np.linalg.det(R[:, free])

    grad = np.empty(len(free))
    for idx, c in enumerate(free):
        up, down = base.copy(), base.copy()
        up[c] += h
        down[c] -= h
        grad[idx] = (det_at(up) - det_at(down)) / (2 * h)
    return DetGradient(grad, "finite-difference", pin, step=h)


def transverse_value(f: Framework, pin: PinSet, flex: np.ndarray | None = None,
                     rtol: float | None = None) -> float:
    """d[det R(p)] . p' for a square pinned matrix with exactly one flex."""
    P = _square_pinned(f, pin)
    kd = kernel_data(P.entries, rtol)
    if kd.nullity != 1:
        reason = ("nonsingular: no flex" if kd.nullity == 0
                  else f"nullity {kd.nullity}: gradient identically zero")
        raise TransverseInapplicable(reason)
    if flex is None:
        flex = kd.flex_basis[0]
    return float(det_gradient_analytic(f, pin, rtol).values @ np.asarray(flex, dtype=float))


# ---------------------------------------------------------------------------
# equivalence


@dataclass(frozen=True, eq=False)
class Equivalence:
    alpha: float
    residual: float
    gradient: np.ndarray
    stress_row: np.ndarray  # omega^T R(p')
    stress: np.ndarray
    flex: np.ndarray
    degenerate: bool = False

    def passed(self, threshold: float = DEFAULT_EQUIVALENCE_THRESHOLD) -> bool:
        return self.degenerate or self.residual <= threshold


def equivalence_report(f: Framework, pin: PinSet, rtol: float | None = None) -> Equivalence:
    """Least-squares fit g ~ alpha * s with g = d[det R(p)] and s = omega^T R(p').

    residual = |g - alpha s| / |g|.  Raises TransverseInapplicable outside the
    square, nullity-1 regime.
    """
    P = _square_pinned(f, pin)
    kd = kernel_data(P.entries, rtol)
    if kd.nullity != 1:
        reason = ("nonsingular: no stress/flex to compare" if kd.nullity == 0
                  else f"nullity {kd.nullity}: gradient identically zero")
        raise TransverseInapplicable(reason)
    omega, flex = kd.stress_basis[0], kd.flex_basis[0]
    s = omega @ rigidity_matrix_of_flex(f, zero_pad(flex, pin), pin).entries
    grad = det_gradient_analytic(f, pin, rtol)
    g = grad.values
    # with unit omega and flex, |g| / |cof| and |s| are directly comparable
    g_zero = grad.cof_norm == 0 or np.linalg.norm(g) <= ZERO_RELATIVE * grad.cof_norm
    s_zero = np.linalg.norm(s) <= ZERO_RELATIVE
    if g_zero and s_zero:
        return Equivalence(0.0, 0.0, g, s, omega, flex, degenerate=True)
    if s_zero:
        return Equivalence(0.0, 1.0, g, s, omega, flex)
    alpha = float(g @ s / (s @ s))
    residual = float(np.linalg.norm(g - alpha * s) / np.linalg.norm(g)) if not g_zero else 1.0
    return Equivalence(alpha, residual, g, s, omega, flex)


# ---------------------------------------------------------------------------
# the two tests


@dataclass(frozen=True, eq=False)
class PrestressResult:
    status: str  # certified | not_certified | infinitesimally_rigid | out_of_scope | not_applicable
    message: str
    flex: np.ndarray | None = None
    stresses: np.ndarray | None = None
    energies: np.ndarray | None = None
    threshold: float | None = None
    certifying_index: int | None = None

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    @property
    def energy(self) -> float | None:
        if self.energies is None or not len(self.energies):
            return None
        idx = self.certifying_index if self.certifying_index is not None else 0
        return float(self.energies[idx])


@dataclass(frozen=True, eq=False)
class RowOutcome:
    """One dropped row of the hyperstatic transverse search."""

    edge: tuple[int, int]
    status: str  # certified | not_certified | uninformative
    value: float | None = None
    threshold: float | None = None
    stress: np.ndarray | None = None  # stress in S vanishing on the dropped edge

    @property
    def certified(self) -> bool:
        return self.status == "certified"


@dataclass(frozen=True, eq=False)
class TransverseResult:
    status: str  # certified | not_certified | infinitesimally_rigid | inapplicable | out_of_scope | not_applicable
    message: str
    gradient: np.ndarray | None = None
    flex: np.ndarray | None = None
    value: float | None = None
    threshold: float | None = None
    rows: tuple[RowOutcome, ...] = ()

    @property
    def certified(self) -> bool:
        return self.status == "certified"


def _energy_threshold(omega: np.ndarray, flex: np.ndarray, margin: float) -> float:
    return margin * float(np.linalg.norm(omega)) * float(np.linalg.norm(flex)) ** 2


def _transverse_threshold(grad: DetGradient, flex: np.ndarray, margin: float) -> float:
    # scaled by |cof| rather than |grad| so a gradient made of rounding noise cannot pass
    return margin * float(grad.cof_norm or 0.0) * float(np.linalg.norm(flex))


def _analysis(f: Framework, pin: PinSet | None, settings: Settings):
    require_valid(f)
    pin = pin or select_pin_set(f)
    P = pinned_matrix(f, pin)
    return pin, P, kernel_data(P.entries, settings.rank_rtol)


def prestress_test(f: Framework, settings: Settings = Settings(), pin: PinSet | None = None,
                   kd: KernelData | None = None) -> PrestressResult:
    """Search the stress basis for a stress with nonzero energy on the single flex.

    Energy is linear in the stress for a fixed flex, so checking a basis
    decides whether any certifying stress exists.
    """
    if kd is None:
        pin, _, kd = _analysis(f, pin, settings)
    profile = dof_profile(f)
    if kd.nullity == 0:
        return PrestressResult("infinitesimally_rigid", "infinitesimally rigid; test unnecessary")
    if profile.kind == "hypostatic":
        return PrestressResult("not_applicable", "hypostatic graph: no certification attempted")
    if kd.nullity >= 2:
        return PrestressResult("out_of_scope", f"{kd.nullity} independent flexes; single-flex test does not apply")
    flex = kd.flex_basis[0]
    full = zero_pad(flex, pin)
    stresses = kd.stress_basis
    if stresses.shape[0] == 0:
        return PrestressResult("not_certified", "no equilibrium stress", flex, stresses, np.zeros(0), 0.0)
    energies = np.array([stress_energy(f.graph, w, full) for w in stresses])
    threshold = _energy_threshold(stresses[0], flex, settings.margin)
    passing = np.flatnonzero(np.abs(energies) > threshold)
    if passing.size and kd.marginal:
        return PrestressResult("not_certified", MARGINAL_MESSAGE, flex, stresses, energies, threshold)
    if passing.size:
        best = int(passing[np.argmax(np.abs(energies[passing]))])
        return PrestressResult("certified", "stress energy nonzero on the flex", flex, stresses,
                               energies, threshold, best)
    return PrestressResult("not_certified", "every stress has zero energy on the flex", flex,
                           stresses, energies, threshold)


def stress_vanishing_on(stress_basis: np.ndarray, edge_index: int) -> np.ndarray | None:
    """Unit stress in span(stress_basis) with a zero entry on one edge, if unique up to scale."""
    B = np.asarray(stress_basis)
    col = B[:, edge_index]
    if B.shape[0] < 2:
        return None
    # null space of the single constraint c . col = 0
    _, s, Vh = np.linalg.svd(col.reshape(1, -1))
    rank = int(s[0] > 1e-12 * np.max(np.abs(B)))
    coeffs = Vh[rank:]
    if coeffs.shape[0] != 1:
        return None
    omega = coeffs[0] @ B
    omega /= np.linalg.norm(omega)
    big = np.flatnonzero(np.abs(omega) > 1e-9)
    return -omega if omega[big[0]] < 0 else omega


def transverse_test(f: Framework, settings: Settings = Settings(), pin: PinSet | None = None,
                    kd: KernelData | None = None) -> TransverseResult:
    """Transverse rigidity: isostatic directly, hyperstatic(1) by dropping each row in turn."""
    if kd is None:
        pin, _, kd = _analysis(f, pin, settings)
    profile = dof_profile(f)
    if profile.kind == "hypostatic":
        return TransverseResult("not_applicable", "hypostatic graph: pinned matrix is never square")
    if kd.nullity == 0:
        return TransverseResult("infinitesimally_rigid", "infinitesimally rigid; test unnecessary")
    if profile.kind == "isostatic":
        if kd.nullity >= 2:
            grad = det_gradient_analytic(f, pin, settings.rank_rtol)
            return TransverseResult("inapplicable",
                                    f"nullity {kd.nullity}: every cofactor vanishes, gradient identically zero",
                                    grad.values, kd.flex_basis)
        flex = kd.flex_basis[0]
        grad = det_gradient_analytic(f, pin, settings.rank_rtol)
        value = float(grad.values @ flex)
        threshold = _transverse_threshold(grad, flex, settings.margin)
        status = "certified" if abs(value) > threshold else "not_certified"
        msg = "flex is transverse to the singular locus" if status == "certified" else "gradient orthogonal to flex"
        if status == "certified" and kd.marginal:
            status, msg = "not_certified", MARGINAL_MESSAGE
        return TransverseResult(status, msg, grad.values, flex, value, threshold)
    # hyperstatic
    if kd.nullity >= 2:
        return TransverseResult("inapplicable",
                                f"nullity {kd.nullity}: every row-dropped square matrix is degenerate")
    if profile.excess != 1:
        return TransverseResult("out_of_scope", f"row-dropping search covers hyperstatic(1), got {profile.label}")
    P = pinned_matrix(f, pin)
    rows = []
    for e, edge in enumerate(f.graph.edges):
        sub = kernel_data(np.delete(P.entries, e, axis=0), settings.rank_rtol)
        if sub.nullity != 1:
            rows.append(RowOutcome(edge, "uninformative"))
            continue
        reduced = f.with_graph(f.graph.without_edge(e))
        flex = sub.flex_basis[0]
        grad = det_gradient_analytic(reduced, pin, settings.rank_rtol)
        value = float(grad.values @ flex)
        threshold = _transverse_threshold(grad, flex, settings.margin)
        ok = abs(value) > threshold and not (sub.marginal or kd.marginal)
        rows.append(RowOutcome(edge, "certified" if ok else "not_certified", value, threshold,
                               stress_vanishing_on(kd.stress_basis, e)))
    certified = [r for r in rows if r.certified]
    if certified:
        names = ", ".join(edge_label(r.edge) for r in certified)
        return TransverseResult("certified", f"transverse after dropping edge(s) {names}",
                                flex=kd.flex_basis[0], rows=tuple(rows))
    return TransverseResult("not_certified", "no dropped row gives a transverse square case",
                            flex=kd.flex_basis[0], rows=tuple(rows))


# ---------------------------------------------------------------------------
# orchestration


@dataclass(frozen=True, eq=False)
class CertificateReport:
    name: str
    profile: DofProfile
    pins: tuple[tuple[int, int], ...]
    rank: int
    nullity: int
    stress_count: int
    tol: float
    singular_values: np.ndarray
    marginal: bool
    verdict: Verdict
    certified_by: tuple[Verdict, ...]
    agreement: bool | None
    prestress: PrestressResult
    transverse: TransverseResult
    equivalence: Equivalence | None
    settings: Settings
    notes: tuple[str, ...] = field(default=())
    fd_step: float | None = None
    fd_error: float | None = None  # |analytic - central difference| / |cof|

    @property
    def rigid(self) -> bool:
        return self.verdict.rigid

    @property
    def verdict_text(self) -> str:
        if self.certified_by:
            return " + ".join(v.value for v in self.certified_by)
        return self.verdict.value

    def to_dict(self) -> dict[str, Any]:
        return _report_dict(self)


def full_certification(f: Framework, settings: Settings = Settings(), pin: PinSet | None = None,
                       strict: bool = False) -> CertificateReport:
    """Run the rank analysis and every applicable test.

    `strict` turns a disagreement between the two tests into an
    EquivalenceViolation instead of a warning.
    """
    pin, P, kd = _analysis(f, pin, settings)
    profile = dof_profile(f)
    notes: list[str] = []
    if kd.marginal:
        notes.append("numerically marginal: a singular value lies within 10x of the rank tolerance")
    pre = prestress_test(f, settings, pin, kd)
    trans = transverse_test(f, settings, pin, kd)
    equiv = None
    if profile.kind == "isostatic" and kd.nullity == 1:
        equiv = equivalence_report(f, pin, settings.rank_rtol)

    decided = {"certified", "not_certified"}
    agreement = None
    if pre.status in decided and trans.status in decided:
        agreement = pre.certified == trans.certified
        if equiv is not None and not equiv.passed(settings.equivalence_threshold):
            agreement = False
    if agreement is False:
        msg = "prestress and transverse tests disagree"
        if equiv is not None:
            msg += f" (equivalence residual {equiv.residual:.3e})"
        if strict:
            raise EquivalenceViolation(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    certified_by: tuple[Verdict, ...] = ()
    if profile.kind == "hypostatic" and kd.nullity > 0:
        verdict = Verdict.NOT_APPLICABLE_HYPOSTATIC
    elif kd.nullity == 0:
        verdict = Verdict.INFINITESIMALLY_RIGID
    else:
        certified_by = tuple(v for v, r in ((Verdict.PRESTRESS_STABLE, pre), (Verdict.TRANSVERSE_RIGID, trans))
                             if r.certified)
        if certified_by:
            verdict = certified_by[0]
        elif trans.status == "inapplicable":
            verdict = Verdict.TRANSVERSE_INAPPLICABLE
        else:
            verdict = Verdict.INCONCLUSIVE
    if pre.status == "out_of_scope":
        notes.append(pre.message)

    fd_step = fd_error = None
    if profile.kind == "isostatic":
        fd_step = settings.fd_step * f.config.scale()
        analytic = det_gradient_analytic(f, pin, settings.rank_rtol)
        numeric = det_gradient_fd(f, pin, fd_step)
        if analytic.cof_norm:
            fd_error = float(np.linalg.norm(analytic.values - numeric.values) / analytic.cof_norm)

    return CertificateReport(
        name=f.name, profile=profile, pins=pin.pinned, rank=kd.rank, nullity=kd.nullity,
        stress_count=kd.stress_count, tol=kd.tol, singular_values=kd.singular_values,
        marginal=kd.marginal, verdict=verdict, certified_by=certified_by, agreement=agreement,
        prestress=pre, transverse=trans, equivalence=equiv, settings=settings, notes=tuple(notes),
        fd_step=fd_step, fd_error=fd_error,
    )


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def _report_dict(r: CertificateReport) -> dict[str, Any]:
    pre, tr, eq = r.prestress, r.transverse, r.equivalence
    out: dict[str, Any] = {
        "name": r.name,
        "dof": {"m": r.profile.m, "nd": r.profile.nd, "D": r.profile.D, "class": r.profile.label},
        "pins": [[v + 1, k + 1] for v, k in r.pins],
        "rank": r.rank,
        "nullity": r.nullity,
        "stress_count": r.stress_count,
        "rank_tolerance": r.tol,
        "singular_values": _jsonable(r.singular_values),
        "marginal": r.marginal,
        "verdict": r.verdict.value,
        "certified_by": [v.value for v in r.certified_by],
        "rigid": r.rigid,
        "agreement": r.agreement,
        "settings": asdict(r.settings),
        "prestress": {
            "status": pre.status,
            "message": pre.message,
            "energies": _jsonable(pre.energies),
            "energy": pre.energy,
            "threshold": pre.threshold,
            "margin": r.settings.margin,
            "stresses": _jsonable(pre.stresses),
            "flex": _jsonable(pre.flex),
        },
        "transverse": {
            "status": tr.status,
            "message": tr.message,
            "value": tr.value,
            "threshold": tr.threshold,
            "margin": r.settings.margin,
            "gradient": _jsonable(tr.gradient),
            "flex": _jsonable(tr.flex),
            "rows": [
                {
                    "edge": [row.edge[0] + 1, row.edge[1] + 1],
                    "status": row.status,
                    "value": row.value,
                    "threshold": row.threshold,
                    "stress": _jsonable(row.stress),
                }
                for row in tr.rows
            ],
        },
        "equivalence": None if eq is None else {
            "alpha": eq.alpha,
            "residual": _jsonable(eq.residual),
            "threshold": r.settings.equivalence_threshold,
            "passed": eq.passed(r.settings.equivalence_threshold),
            "degenerate": eq.degenerate,
        },
        "fd_check": None if r.fd_step is None else {"step": r.fd_step, "error_relative_to_cofactors": r.fd_error},
        "notes": list(r.notes),
    }
    return out
