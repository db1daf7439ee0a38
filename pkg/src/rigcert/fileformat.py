"""Framework files (JSON, exact coordinates) and report rendering.

A framework file looks like::

    {
      "name": "collinear_brace",
      "dimension": 2,
      "vertices": [
        [0, 0],
        [2, 0],
        [1, 0],
        [1, 1]
      ],
      "edges": [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4]],
      "pins": [[1, 1], [1, 2], [2, 2]]
    }

Vertex and coordinate indices are 1-based.  Coordinates may be integers,
decimals, or strings holding a decimal or a fraction such as ``"1/3"``;
all are parsed exactly.  ``pins`` and ``name`` are optional.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Any

import numpy as np

from .certify import CertificateReport
from .core import Framework, Graph, Configuration, coord_label, edge_label, validate_framework
from .corpus import CorpusEntry
from .matrixlab import InvalidPinSet, PinSet


class FileFormatError(ValueError):
    """Malformed framework file; the message names the offending line or field."""


@dataclass(frozen=True)
class FrameworkFile:
    dimension: int
    vertices: tuple[tuple[Fraction, ...], ...]
    edges: tuple[tuple[int, int], ...]
    pins: tuple[tuple[int, int], ...] | None = None
    name: str | None = None

    @classmethod
    def from_entry(cls, e: CorpusEntry) -> FrameworkFile:
        return cls(len(e.points[0]), e.points, e.edges, None, e.name)

    def to_framework(self) -> Framework:
        pts = np.array([[float(x) for x in v] for v in self.vertices], dtype=float).reshape(-1, self.dimension)
        f = Framework(Graph.from_one_based(len(self.vertices), self.edges), Configuration(pts), self.name or "")
        problems = validate_framework(f)
        if problems:
            raise FileFormatError("invalid framework: " + "; ".join(problems))
        return f

    def pin_set(self, f: Framework) -> PinSet | None:
        if self.pins is None:
            return None
        try:
            return PinSet.build(f.config, [(v - 1, k - 1) for v, k in self.pins])
        except InvalidPinSet as exc:
            raise FileFormatError(f"field 'pins': {exc}") from None


def _exact(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise FileFormatError(f"field '{where}': expected a number, got {value!r}")
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise FileFormatError(f"field '{where}': cannot parse {value!r} as a number") from None
    raise FileFormatError(f"field '{where}': expected a number, got {type(value).__name__}")


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FileFormatError(f"field '{where}': expected an integer, got {value!r}")
    return value


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise FileFormatError(f"field '{where}': expected a list")
    return value


def parse_document(text: str) -> FrameworkFile:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FileFormatError("line 1: top level must be an object")
    unknown = set(doc) - {"name", "dimension", "vertices", "edges", "pins"}
    if unknown:
        raise FileFormatError(f"field '{sorted(unknown)[0]}': unknown field")
    for key in ("dimension", "vertices", "edges"):
        if key not in doc:
            raise FileFormatError(f"field '{key}': missing")
    dim = _int(doc["dimension"], "dimension")
    if dim < 1:
        raise FileFormatError("field 'dimension': must be at least 1")
    vertices = []
    for i, v in enumerate(_list(doc["vertices"], "vertices")):
        v = _list(v, f"vertices[{i}]")
        if len(v) != dim:
            raise FileFormatError(f"field 'vertices[{i}]': expected {dim} coordinates, got {len(v)}")
        vertices.append(tuple(_exact(x, f"vertices[{i}][{k}]") for k, x in enumerate(v)))
    n = len(vertices)
    edges = []
    for e, pair in enumerate(_list(doc["edges"], "edges")):
        pair = _list(pair, f"edges[{e}]")
        if len(pair) != 2:
            raise FileFormatError(f"field 'edges[{e}]': expected a pair of vertex indices")
        i, j = (_int(x, f"edges[{e}]") for x in pair)
        if not (1 <= i <= n and 1 <= j <= n):
            raise FileFormatError(f"field 'edges[{e}]': vertex index outside 1..{n} (indices are 1-based)")
        edges.append((i, j))
    pins = None
    if doc.get("pins") is not None:
        pins = []
        for p, pair in enumerate(_list(doc["pins"], "pins")):
            pair = _list(pair, f"pins[{p}]")
            if len(pair) != 2:
                raise FileFormatError(f"field 'pins[{p}]': expected [vertex, coordinate]")
            v, k = (_int(x, f"pins[{p}]") for x in pair)
            if not (1 <= v <= n and 1 <= k <= dim):
                raise FileFormatError(f"field 'pins[{p}]': index out of range (1-based)")
            pins.append((v, k))
        pins = tuple(pins)
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise FileFormatError("field 'name': expected a string")
    return FrameworkFile(dim, tuple(vertices), tuple(edges), pins, name)


def _format_number(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    den, twos, fives = x.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f'"{x.numerator}/{x.denominator}"'
    digits = max(twos, fives)
    return format(Decimal(x.numerator) / Decimal(x.denominator), f".{digits}f")


def dump_document(ff: FrameworkFile) -> str:
    pairs = lambda ps: "[" + ", ".join(f"[{a}, {b}]" for a, b in ps) + "]"
    lines = ["{"]
    if ff.name is not None:
        lines.append(f"  \"name\": {json.dumps(ff.name)},")
    lines.append(f"  \"dimension\": {ff.dimension},")
    lines.append("  \"vertices\": [")
    rows = ["    [" + ", ".join(_format_number(x) for x in v) + "]" for v in ff.vertices]
    lines.append(",\n".join(rows))
    lines.append("  ],")
    tail = f"  \"edges\": {pairs(ff.edges)}"
    if ff.pins is not None:
        tail += f",\n  \"pins\": {pairs(ff.pins)}"
    lines.append(tail)
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports


def _vec(x) -> str:
    if x is None:
        return "-"
    return "[" + ", ".join(f"{v:+.6g}" for v in np.ravel(x)) + "]"


def format_report(r: CertificateReport) -> str:
    p, t, eq, s = r.prestress, r.transverse, r.equivalence, r.settings
    out = [
        f"framework: {r.name or '(unnamed)'}",
        f"dof: m={r.profile.m} nd={r.profile.nd} D={r.profile.D} class={r.profile.label}",
        f"pins: {' '.join(coord_label(v, k) for v, k in r.pins)}",
        f"rank: {r.rank}  flexes: {r.nullity}  stresses: {r.stress_count}  rank tolerance: {r.tol:.3e}"
        + ("  [numerically marginal]" if r.marginal else ""),
        f"verdict: {r.verdict_text}",
    ]
    if r.agreement is not None:
        out.append(f"agreement: {str(r.agreement).lower()}")
    out.append(f"prestress test: {p.status} ({p.message})")
    if p.energies is not None:
        out.append(f"  energies: {_vec(p.energies)}  threshold: {p.threshold:.3e} (margin {s.margin:g})")
        out.append(f"  flex: {_vec(p.flex)}")
    out.append(f"transverse test: {t.status} ({t.message})")
    if t.value is not None:
        out.append(f"  d[det R] . p' = {t.value:+.6e}  threshold: {t.threshold:.3e} (margin {s.margin:g})")
        out.append(f"  gradient: {_vec(t.gradient)}")
    for row in t.rows:
        line = f"  drop edge {edge_label(row.edge)}: {row.status}"
        if row.value is not None:
            line += f"  value {row.value:+.6e}  threshold {row.threshold:.3e}"
        if row.certified and row.stress is not None:
            line += f"  stress vanishing on edge: {_vec(row.stress)}"
        out.append(line)
    if eq is not None:
        out.append(
            f"equivalence: alpha={eq.alpha:+.6e} residual={eq.residual:.3e} "
            f"(threshold {s.equivalence_threshold:g}) {'pass' if eq.passed(s.equivalence_threshold) else 'FAIL'}"
        )
    if r.fd_error is not None:
        out.append(f"finite-difference gradient check: step {r.fd_step:.3e}, error {r.fd_error:.3e} (relative to |cof|)")
    for note in r.notes:
        out.append(f"note: {note}")
    return "\n".join(out)


def report_document(r: CertificateReport, version: str, timings: dict[str, float], source: str | None = None) -> dict:
    doc = {"tool": "rigcert", "version": version, "source": source}
    doc.update(r.to_dict())
    doc["timings_seconds"] = timings
    return doc
