"""JSON file format for uncertain families.

A family file carries the order ``n``, the degree bound ``n_deg``, the fixed
polynomial matrices ``A`` and ``C`` (row-major nested arrays of ascending
coefficient lists), the interval matrices ``B`` and ``D`` (entries are arrays
of ``[lower, upper]`` pairs ascending by power; a bare number is shorthand
for a point bound), and an optional ``scale`` record.

The scale record enables margin search: a scaled entry lists one
``[center, spread]`` pair per power and realizes bounds
``center +/- spread * eps`` at uncertainty level eps; a ``null`` entry keeps
its static bounds from ``B``/``D`` at every level.

Emission is canonical (sorted keys, two-space indent, full ``[lo, hi]``
pairs), so emit -> parse -> emit is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .family import IntervalPolynomialMatrix, UncertainFamily
from .interval_poly import IntervalPolynomial
from .poly import Polynomial
from .poly_matrix import PolynomialMatrix

__all__ = ["FamilyFile", "FamilyFileError", "parse_family", "load_family", "dump_family"]


class FamilyFileError(ValueError):
    """Malformed family file; carries a location string for diagnostics."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class FamilyFile:
    """Parsed family file: the static family plus the optional scaling."""

    family: UncertainFamily
    scale: dict | None  # {"B": grid, "D": grid}; grid entries None or ((c, s), ...)

    @property
    def has_scale(self) -> bool:
        return self.scale is not None

    def at_epsilon(self, eps: float) -> UncertainFamily:
        """Family at uncertainty level eps; requires a scale record."""
        if self.scale is None:
            raise FamilyFileError("family file has no scale record", "scale")
        if eps < 0.0:
            raise ValueError(f"uncertainty level {eps} must be non-negative")
        fam = self.family
        new = {}
        for tag, mat in (("B", fam.B), ("D", fam.D)):
            rows = []
            for i in range(fam.order):
                row = []
                for j in range(fam.order):
                    entry_scale = self.scale[tag][i][j]
                    if entry_scale is None:
                        row.append(mat.entry(i, j))
                    else:
                        row.append(
                            IntervalPolynomial(
                                [(c - s * eps, c + s * eps) for c, s in entry_scale]
                            )
                        )
                rows.append(row)
            new[tag] = IntervalPolynomialMatrix(rows)
        return UncertainFamily(A=fam.A, C=fam.C, B=new["B"], D=new["D"], n_deg=fam.n_deg)


def _parse_poly(obj, location: str) -> Polynomial:
    if not isinstance(obj, list) or not all(isinstance(c, (int, float)) for c in obj):
        raise FamilyFileError("polynomial must be a list of numbers", location)
    return Polynomial(obj)


def _parse_interval_poly(obj, location: str) -> IntervalPolynomial:
    if not isinstance(obj, list):
        raise FamilyFileError("interval polynomial must be a list", location)
    for k, item in enumerate(obj):
        if isinstance(item, (int, float)):
            continue
        if (
            isinstance(item, list)
            and len(item) == 2
            and all(isinstance(v, (int, float)) for v in item)
        ):
            continue
        raise FamilyFileError(
            "coefficient must be a number or a [lower, upper] pair",
            f"{location} power {k}",
        )
    try:
        return IntervalPolynomial(obj)
    except ValueError as exc:
        raise FamilyFileError(str(exc), location) from None


def _parse_matrix(obj, n: int, location: str, parser):
    if not isinstance(obj, list) or len(obj) != n:
        raise FamilyFileError(f"expected {n} rows", location)
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise FamilyFileError(f"expected {n} columns", f"{location}[{i + 1}]")
        rows.append([parser(e, f"{location}[{i + 1}][{j + 1}]") for j, e in enumerate(row)])
    return rows


def _parse_scale_entry(obj, location: str):
    if obj is None:
        return None
    if not isinstance(obj, list):
        raise FamilyFileError("scale entry must be null or a list of pairs", location)
    pairs = []
    for k, item in enumerate(obj):
        if isinstance(item, (int, float)):
            pairs.append((float(item), 0.0))
            continue
        if (
            isinstance(item, list)
            and len(item) == 2
            and all(isinstance(v, (int, float)) for v in item)
        ):
            center, spread = float(item[0]), float(item[1])
            if spread < 0.0:
                raise FamilyFileError(
                    f"negative spread {spread}", f"{location} power {k}"
                )
            pairs.append((center, spread))
            continue
        raise FamilyFileError(
            "scale coefficient must be a number or [center, spread]",
            f"{location} power {k}",
        )
    return tuple(pairs)


def parse_family(payload: dict) -> FamilyFile:
    """Validate a decoded JSON payload and build the family."""
    if not isinstance(payload, dict):
        raise FamilyFileError("top level must be an object")
    for key in ("n", "n_deg", "A", "C", "B", "D"):
        if key not in payload:
            raise FamilyFileError(f"missing field {key!r}", key)
    n = payload["n"]
    n_deg = payload["n_deg"]
    if not isinstance(n, int) or n < 1:
        raise FamilyFileError("order must be a positive integer", "n")
    if not isinstance(n_deg, int) or n_deg < 0:
        raise FamilyFileError("degree bound must be a non-negative integer", "n_deg")

    a = PolynomialMatrix(_parse_matrix(payload["A"], n, "A", _parse_poly))
    c = PolynomialMatrix(_parse_matrix(payload["C"], n, "C", _parse_poly))
    b = IntervalPolynomialMatrix(_parse_matrix(payload["B"], n, "B", _parse_interval_poly))
    d = IntervalPolynomialMatrix(_parse_matrix(payload["D"], n, "D", _parse_interval_poly))
    try:
        fam = UncertainFamily(A=a, C=c, B=b, D=d, n_deg=n_deg)
    except ValueError as exc:
        raise FamilyFileError(str(exc)) from None

    scale = None
    if payload.get("scale") is not None:
        raw = payload["scale"]
        if not isinstance(raw, dict) or set(raw) - {"B", "D"}:
            raise FamilyFileError("scale must be an object with keys B and D", "scale")
        scale = {}
        for tag in ("B", "D"):
            grid = raw.get(tag)
            if grid is None:
                scale[tag] = [[None] * n for _ in range(n)]
                continue
            scale[tag] = _parse_matrix(grid, n, f"scale.{tag}", _parse_scale_entry)
    return FamilyFile(family=fam, scale=scale)


def load_family(path: str) -> FamilyFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise FamilyFileError(f"cannot read file: {exc}", path) from None
    except json.JSONDecodeError as exc:
        raise FamilyFileError(f"invalid JSON: {exc}", path) from None
    return parse_family(payload)


def _poly_json(p: Polynomial) -> list:
    return [float(c) for c in p.coeffs]


def _interval_json(ip: IntervalPolynomial) -> list:
    return [[float(lo), float(hi)] for lo, hi in ip.bounds]


def dump_family(ff: FamilyFile) -> str:
    """Canonical JSON text for a parsed family file."""
    fam = ff.family
    payload: dict = {
        "n": fam.order,
        "n_deg": fam.n_deg,
        "A": [[_poly_json(p) for p in row] for row in fam.A.entries],
        "C": [[_poly_json(p) for p in row] for row in fam.C.entries],
        "B": [[_interval_json(ip) for ip in row] for row in fam.B.entries],
        "D": [[_interval_json(ip) for ip in row] for row in fam.D.entries],
    }
    if ff.scale is not None:
        payload["scale"] = {
            tag: [
                [
                    None if e is None else [[float(c), float(s)] for c, s in e]
                    for e in row
                ]
                for row in ff.scale[tag]
            ]
            for tag in ("B", "D")
        }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
