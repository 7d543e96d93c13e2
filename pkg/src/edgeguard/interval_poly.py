"""Interval polynomials and their Kharitonov vertex and edge sets.

An interval polynomial fixes a closed bound ``[lo, hi]`` for each coefficient
independently. Its four Kharitonov vertices follow the classic alternating
lower/upper patterns (period four in the power index), and its edges are the
segments joining the vertex pairs (1,2), (2,4), (4,3), (3,1). Point-valued
coefficients collapse duplicate vertices and degenerate edges, which matters
for families that mix fixed and uncertain entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .poly import Polynomial, is_hurwitz

__all__ = [
    "IntervalPolynomial",
    "Edge",
    "kharitonov_vertices",
    "kharitonov_edges",
    "contains",
    "kharitonov_stable",
]

# Lower/upper selection patterns per vertex, indexed by power mod 4.
# 'L' picks the lower bound, 'U' the upper.
_VERTEX_PATTERNS = {
    1: "LLUU",
    2: "LUUL",
    3: "ULLU",
    4: "UULL",
}

_EDGE_PAIRS = ((1, 2), (2, 4), (4, 3), (3, 1))

# Absolute/relative slack when testing membership of floating-point
# coefficients against closed bounds (instantiated edge points may overshoot
# an endpoint by a few ulps).
_CONTAINS_SLACK = 1e-12


def _as_bound(item) -> tuple[float, float]:
    if isinstance(item, (int, float)):
        v = float(item)
        return (v, v)
    lo, hi = item
    return (float(lo), float(hi))


@dataclass(frozen=True)
class IntervalPolynomial:
    """Per-coefficient closed bounds, ascending by power.

    A bare number in the input is shorthand for a point bound. Powers absent
    from the input are point bounds [0, 0].
    """

    bounds: tuple[tuple[float, float], ...] = ()

    def __init__(self, bounds: Iterable = ()):
        normalized = [_as_bound(b) for b in bounds]
        while normalized and normalized[-1] == (0.0, 0.0):
            normalized.pop()
        for k, (lo, hi) in enumerate(normalized):
            if lo > hi:
                raise ValueError(f"reversed bounds [{lo}, {hi}] at power {k}")
        object.__setattr__(self, "bounds", tuple(normalized))

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "IntervalPolynomial":
        return cls((c, c) for c in p.coeffs)

    @property
    def degree_bound(self) -> int:
        """Highest power carrying a bound; -1 when all bounds are [0, 0]."""
        return len(self.bounds) - 1

    @property
    def is_point(self) -> bool:
        """True when every coefficient bound is a single point."""
        return all(lo == hi for lo, hi in self.bounds)

    def bound(self, power: int) -> tuple[float, float]:
        if 0 <= power < len(self.bounds):
            return self.bounds[power]
        return (0.0, 0.0)

    def vertex(self, index: int) -> Polynomial:
        """Kharitonov vertex 1-4 per the alternating bound patterns."""
        pattern = _VERTEX_PATTERNS[index]
        coeffs = []
        for k, (lo, hi) in enumerate(self.bounds):
            coeffs.append(lo if pattern[k % 4] == "L" else hi)
        return Polynomial(coeffs)


@dataclass(frozen=True)
class Edge:
    """Segment between two distinct Kharitonov vertices.

    A parameter value lam in [0, 1] denotes
    ``lam * endpoint_a + (1 - lam) * endpoint_b``.
    """

    endpoint_a: Polynomial
    endpoint_b: Polynomial
    pair_tag: tuple[int, int]

    def __post_init__(self):
        if self.endpoint_a == self.endpoint_b:
            raise ValueError("degenerate edge: identical endpoints")
        if self.pair_tag not in _EDGE_PAIRS:
            raise ValueError(f"unknown pair tag {self.pair_tag}")

    def at(self, lam: float) -> Polynomial:
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"edge parameter {lam} outside [0, 1]")
        return self.endpoint_a.scaled(lam) + self.endpoint_b.scaled(1.0 - lam)

    @property
    def endpoints(self) -> frozenset[Polynomial]:
        return frozenset((self.endpoint_a, self.endpoint_b))


def kharitonov_vertices(ip: IntervalPolynomial) -> list[Polynomial]:
    """Distinct Kharitonov vertices, in order 1-4 keeping first occurrences.

    Deduplication uses exact coefficient equality: bounds are read from the
    input, never computed, so no tolerance is involved.
    """
    seen: list[Polynomial] = []
    for idx in (1, 2, 3, 4):
        v = ip.vertex(idx)
        if v not in seen:
            seen.append(v)
    return seen


def kharitonov_edges(ip: IntervalPolynomial) -> list[Edge]:
    """Non-degenerate Kharitonov edges, deduplicated by endpoint pair.

    Two edges are the same edge iff their unordered endpoint pairs coincide;
    the first pair tag encountered is kept. A point-valued interval yields no
    edges.
    """
    edges: list[Edge] = []
    for i, j in _EDGE_PAIRS:
        a, b = ip.vertex(i), ip.vertex(j)
        if a == b:
            continue
        pair = frozenset((a, b))
        if any(e.endpoints == pair for e in edges):
            continue
        edges.append(Edge(a, b, (i, j)))
    return edges


def contains(ip: IntervalPolynomial, p: Polynomial, slack: float = _CONTAINS_SLACK) -> bool:
    """Whether every coefficient of ``p`` lies within the closed bounds.

    Implicit zero coefficients of ``p`` must also fit their bounds, and ``p``
    may not exceed the highest bounded power. A tiny relative slack absorbs
    floating-point dust from convex combinations hitting the endpoints.
    """
    if p.degree > ip.degree_bound:
        return False
    for k in range(ip.degree_bound + 1):
        lo, hi = ip.bound(k)
        tol = slack * max(1.0, abs(lo), abs(hi))
        c = p.coeff(k)
        if c < lo - tol or c > hi + tol:
            return False
    return True


def kharitonov_stable(ip: IntervalPolynomial, margin_tol: float = 1e-9) -> bool:
    """Robust Hurwitz stability of the whole box family via its vertices.

    Stability of the four vertex polynomials is necessary and sufficient for
    the full interval family, provided the leading coefficient interval
    excludes zero (otherwise the degree can drop and the reduction is
    invalid, so a ``ValueError`` is raised).
    """
    if ip.degree_bound < 0:
        raise ValueError("undefined stability: zero interval polynomial")
    lo, hi = ip.bounds[-1]
    if lo <= 0.0 <= hi:
        raise ValueError("degree drop: leading coefficient interval contains 0")
    return all(is_hurwitz(v, margin_tol) for v in kharitonov_vertices(ip))
