"""Uncertain MIMO families M(s) = B(s)*A(s) + D(s)*C(s) and their testing sets.

A and C are fixed polynomial matrices; B and D are interval polynomial
matrices whose entries vary independently inside coefficient boxes. Robust
Hurwitz stability of the whole family reduces to stability of structured
low-dimensional subfamilies ("test problems"): fixed Kharitonov vertex
choices everywhere except a small number of edge slots, each carrying one
segment parameter in [0, 1].

Two reductions are provided:

* ``enumerate_kamal_dahleh`` places one edge per row of B (along a column
  bijection) and one edge per row of D (along another bijection), so each
  test problem carries up to ``2n`` parameters.
* ``enumerate_minimal`` places exactly one edge per row, chosen from either
  B or D, with columns pairwise distinct within each matrix; every other
  entry of both matrices sits at a Kharitonov vertex. Each test problem
  carries up to ``n`` parameters, the lowest dimension such a reduction can
  achieve.

Point-valued entries cannot host edges; placements that degenerate this way
collapse to vertex choices, and structural patterns subsumed by a richer
pattern (every one of their members is a segment endpoint of the richer
pattern's members) are dropped so the emitted pattern list is irredundant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .interval_poly import (
    Edge,
    IntervalPolynomial,
    contains,
    kharitonov_edges,
    kharitonov_vertices,
)
from .poly import Polynomial
from .poly_matrix import PolynomialMatrix, det_cofactor, mat_add, mat_mul

__all__ = [
    "IntervalPolynomialMatrix",
    "UncertainFamily",
    "EdgeSlot",
    "TestProblem",
    "AssumptionAResult",
    "CountsReport",
    "EnumeratorCounts",
    "assemble",
    "check_assumption_a",
    "enumerate_kamal_dahleh",
    "enumerate_minimal",
    "instantiate",
    "counts_report",
]


@dataclass(frozen=True)
class IntervalPolynomialMatrix:
    """Square grid of interval polynomials."""

    entries: tuple[tuple[IntervalPolynomial, ...], ...]

    def __init__(self, rows: Iterable[Iterable]):
        grid = tuple(
            tuple(
                e if isinstance(e, IntervalPolynomial) else IntervalPolynomial(e)
                for e in row
            )
            for row in rows
        )
        n = len(grid)
        if n == 0 or any(len(row) != n for row in grid):
            raise ValueError("interval polynomial matrix must be square")
        object.__setattr__(self, "entries", grid)

    @property
    def order(self) -> int:
        return len(self.entries)

    def entry(self, i: int, j: int) -> IntervalPolynomial:
        return self.entries[i][j]

    def max_degree_bound(self) -> int:
        return max(ip.degree_bound for row in self.entries for ip in row)


@dataclass(frozen=True)
class UncertainFamily:
    """The family M(s) = B(s)*A(s) + D(s)*C(s).

    ``n_deg`` bounds the degree of every B and D entry; together with the
    degrees of A and C it fixes the characteristic degree every member must
    attain when the leading coefficient matrix stays nonsingular.
    """

    A: PolynomialMatrix
    C: PolynomialMatrix
    B: IntervalPolynomialMatrix
    D: IntervalPolynomialMatrix
    n_deg: int

    def __post_init__(self):
        n = self.A.order
        if not (self.C.order == n and self.B.order == n and self.D.order == n):
            raise ValueError("A, C, B, D must share one order")
        if self.n_deg < 0:
            raise ValueError("n_deg must be non-negative")
        for tag, mat in (("B", self.B), ("D", self.D)):
            for i, row in enumerate(mat.entries):
                for j, ip in enumerate(row):
                    if ip.degree_bound > self.n_deg:
                        raise ValueError(
                            f"{tag}[{i}][{j}] has power {ip.degree_bound} "
                            f"above n_deg={self.n_deg}"
                        )

    @property
    def order(self) -> int:
        return self.A.order

    @property
    def top_power(self) -> int:
        """Highest power any member matrix entry can attain."""
        return self.n_deg + max(self.A.max_entry_degree(), self.C.max_entry_degree(), 0)

    @property
    def char_degree(self) -> int:
        """Characteristic degree of every member under a nonsingular
        leading coefficient matrix."""
        return self.order * self.top_power


@dataclass(frozen=True)
class EdgeSlot:
    """One Kharitonov edge placed at a fixed entry of B or D."""

    matrix_tag: str
    row: int
    col: int
    edge: Edge

    def __post_init__(self):
        if self.matrix_tag not in ("B", "D"):
            raise ValueError(f"matrix tag must be 'B' or 'D', got {self.matrix_tag!r}")

    @property
    def label(self) -> str:
        """1-based position label, e.g. ``B(1,2)``."""
        return f"{self.matrix_tag}({self.row + 1},{self.col + 1})"


def _pattern_id(positions: Iterable[tuple[str, int, int]]) -> str:
    ordered = sorted(positions)
    if not ordered:
        return "fixed"
    return "+".join(f"{t}({r + 1},{c + 1})" for t, r, c in ordered)


@dataclass(frozen=True)
class TestProblem:
    """One low-dimensional member family: vertex choices plus edge slots.

    Slot positions inside ``fixed_B``/``fixed_D`` hold the slot's lambda=0
    endpoint, so the fixed matrices are always a valid member pair.
    """

    fixed_B: PolynomialMatrix
    fixed_D: PolynomialMatrix
    slots: tuple[EdgeSlot, ...]
    provenance: str

    def __post_init__(self):
        positions = [(s.matrix_tag, s.row, s.col) for s in self.slots]
        if len(set(positions)) != len(positions):
            raise ValueError("duplicate slot positions in test problem")

    @property
    def dimension(self) -> int:
        return len(self.slots)


def assemble(fam: UncertainFamily, Bc: PolynomialMatrix, Dc: PolynomialMatrix) -> Polynomial:
    """Characteristic polynomial det(Bc*A + Dc*C) of one member.

    Raises ``ValueError`` when an entry of Bc or Dc leaves its interval.
    """
    for tag, chosen, box in (("B", Bc, fam.B), ("D", Dc, fam.D)):
        for i in range(fam.order):
            for j in range(fam.order):
                if not contains(box.entry(i, j), chosen.entry(i, j)):
                    raise ValueError(
                        f"{tag}[{i}][{j}] entry outside its interval bounds"
                    )
    m = mat_add(mat_mul(Bc, fam.A), mat_mul(Dc, fam.C))
    return det_cofactor(m)


def instantiate(
    tp: TestProblem, lambdas: Sequence[float]
) -> tuple[PolynomialMatrix, PolynomialMatrix]:
    """Member matrices at one point of the slot parameter cube."""
    if len(lambdas) != len(tp.slots):
        raise ValueError(f"expected {len(tp.slots)} lambdas, got {len(lambdas)}")
    bc, dc = tp.fixed_B, tp.fixed_D
    for slot, lam in zip(tp.slots, lambdas):
        value = slot.edge.at(float(lam))
        if slot.matrix_tag == "B":
            bc = bc.with_entry(slot.row, slot.col, value)
        else:
            dc = dc.with_entry(slot.row, slot.col, value)
    return bc, dc


# --------------------------------------------------------------------------
# Leading coefficient matrix nonsingularity (no degree dropping)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionAResult:
    """Outcome of the exact leading-matrix nonsingularity check.

    ``vertex_determinants`` lists det of the leading coefficient matrix at
    every corner of the relevant parameter box, in corner enumeration order
    (parameters sorted by (matrix, row, col, power), each taking lower then
    upper bound).
    """

    holds: bool
    vertex_determinants: tuple[float, ...]
    parameters: tuple[tuple[str, int, int, int], ...]
    witness: dict | None = None


class AssumptionAViolation(ValueError):
    """Raised by family-level checks when the leading coefficient matrix can
    become singular within the family."""

    def __init__(self, result: AssumptionAResult):
        self.result = result
        super().__init__(f"leading matrix can be singular: witness {result.witness}")


def _coeff_matrix(mat: PolynomialMatrix, power: int) -> np.ndarray:
    n = mat.order
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = mat.entries[i][j].coeff(power)
    return out


def check_assumption_a(fam: UncertainFamily, max_parameters: int = 20) -> AssumptionAResult:
    """Exact check that the leading coefficient matrix is nonsingular over
    the whole family.

    The leading matrix is affine in each top-power interval coefficient of B
    and D, and each such coefficient enters exactly one of its rows, so its
    determinant is multilinear in these box-bounded parameters and attains
    its extrema at parameter vertices. The family passes iff all vertex
    determinants share one strict sign; otherwise a vanishing or
    sign-flipping vertex is returned as witness.
    """
    n = fam.order
    top = fam.top_power
    deg_ac = top - fam.n_deg
    a_top = _coeff_matrix(fam.A, deg_ac)
    c_top = _coeff_matrix(fam.C, deg_ac)

    # Only the power-n_deg coefficients of B and D can reach the top power.
    params: list[tuple[str, int, int, int]] = []
    mid_b = np.zeros((n, n))
    mid_d = np.zeros((n, n))
    for tag, mat, mid, mult in (("B", fam.B, mid_b, a_top), ("D", fam.D, mid_d, c_top)):
        for i in range(n):
            for j in range(n):
                lo, hi = mat.entry(i, j).bound(fam.n_deg)
                mid[i, j] = 0.5 * (lo + hi)
                if lo != hi and np.any(mult[j, :] != 0.0):
                    params.append((tag, i, j, fam.n_deg))
    params.sort()
    if len(params) > max_parameters:
        raise ValueError(
            f"{len(params)} leading-coefficient parameters exceed the corner "
            f"enumeration budget of {max_parameters}"
        )

    dets: list[float] = []
    witness: dict | None = None
    sign = 0.0
    holds = True
    for corner in itertools.product((0, 1), repeat=len(params)):
        b_mat = mid_b.copy()
        d_mat = mid_d.copy()
        assignment = {}
        for (tag, i, j, power), side in zip(params, corner):
            lo, hi = (fam.B if tag == "B" else fam.D).entry(i, j).bound(power)
            value = hi if side else lo
            assignment[f"{tag}[{i + 1}][{j + 1}]^{power}"] = value
            (b_mat if tag == "B" else d_mat)[i, j] = value
        det = float(np.linalg.det(b_mat @ a_top + d_mat @ c_top))
        dets.append(det)
        tol = 1e-12 * max(1.0, abs(det))
        if witness is None:
            if abs(det) <= tol or (sign != 0.0 and det * sign < 0.0):
                holds = False
                witness = {"assignment": assignment, "determinant": det}
            elif sign == 0.0:
                sign = 1.0 if det > 0 else -1.0
    return AssumptionAResult(holds, tuple(dets), tuple(params), witness)


# --------------------------------------------------------------------------
# Testing-set enumerators
# --------------------------------------------------------------------------


def _edge_map(mat: IntervalPolynomialMatrix) -> list[list[list[Edge]]]:
    return [[kharitonov_edges(ip) for ip in row] for row in mat.entries]


def _vertex_map(mat: IntervalPolynomialMatrix) -> list[list[list[Polynomial]]]:
    return [[kharitonov_vertices(ip) for ip in row] for row in mat.entries]


def _maximal_slot_sets(
    edge_map: list[list[list[Edge]]], n: int
) -> list[tuple[tuple[int, int], ...]]:
    """Distinct edge-bearing placements of one column per row, keeping only
    placements not subsumed by a richer one.

    A column bijection whose edge-bearing positions form a subset of another
    bijection's positions contributes only segment endpoints of the latter's
    members (every Kharitonov vertex is an endpoint of some edge whenever
    edges exist), so it is dropped.
    """
    seen: set[tuple[tuple[int, int], ...]] = set()
    for sigma in itertools.permutations(range(n)):
        positions = tuple(
            (i, sigma[i]) for i in range(n) if edge_map[i][sigma[i]]
        )
        seen.add(positions)
    kept = [
        s
        for s in seen
        if not any(s != t and set(s) <= set(t) for t in seen)
    ]
    kept.sort()
    return kept


def _build_problems(
    fam: UncertainFamily,
    slot_positions: Sequence[tuple[str, int, int]],
    edge_map_b,
    edge_map_d,
    vertex_map_b,
    vertex_map_d,
) -> list[TestProblem]:
    """All test problems for one structural pattern: the product of edge
    choices at the slots and vertex choices everywhere else."""
    n = fam.order
    pattern = _pattern_id(slot_positions)
    slot_positions = sorted(slot_positions)
    slot_edge_lists = [
        (edge_map_b if tag == "B" else edge_map_d)[i][j]
        for tag, i, j in slot_positions
    ]

    free_positions: list[tuple[str, int, int]] = []
    free_vertex_lists: list[list[Polynomial]] = []
    slot_set = set(slot_positions)
    for tag, vmap in (("B", vertex_map_b), ("D", vertex_map_d)):
        for i in range(n):
            for j in range(n):
                if (tag, i, j) in slot_set:
                    continue
                vs = vmap[i][j]
                if len(vs) > 1:
                    free_positions.append((tag, i, j))
                    free_vertex_lists.append(vs)

    base_b = [[vertex_map_b[i][j][0] for j in range(n)] for i in range(n)]
    base_d = [[vertex_map_d[i][j][0] for j in range(n)] for i in range(n)]

    problems = []
    for edge_choice in itertools.product(*slot_edge_lists):
        for vertex_choice in itertools.product(*free_vertex_lists):
            rows_b = [row[:] for row in base_b]
            rows_d = [row[:] for row in base_d]
            for (tag, i, j), v in zip(free_positions, vertex_choice):
                (rows_b if tag == "B" else rows_d)[i][j] = v
            slots = []
            for (tag, i, j), edge in zip(slot_positions, edge_choice):
                (rows_b if tag == "B" else rows_d)[i][j] = edge.at(0.0)
                slots.append(EdgeSlot(tag, i, j, edge))
            problems.append(
                TestProblem(
                    PolynomialMatrix(rows_b),
                    PolynomialMatrix(rows_d),
                    tuple(slots),
                    pattern,
                )
            )
    return problems


def enumerate_kamal_dahleh(fam: UncertainFamily) -> list[TestProblem]:
    """Testing set with one edge per row of B and one per row of D, placed
    along column bijections; up to ``2n`` parameters per problem.

    Bijections whose edge placements all land on point-valued entries
    degenerate to vertex choices and are absorbed by richer placements, so
    the emitted structural patterns are exactly the irredundant ones.
    """
    n = fam.order
    emap_b, emap_d = _edge_map(fam.B), _edge_map(fam.D)
    vmap_b, vmap_d = _vertex_map(fam.B), _vertex_map(fam.D)

    problems: list[TestProblem] = []
    for slots_b in _maximal_slot_sets(emap_b, n):
        for slots_d in _maximal_slot_sets(emap_d, n):
            positions = [("B", i, j) for i, j in slots_b] + [
                ("D", i, j) for i, j in slots_d
            ]
            problems.extend(
                _build_problems(fam, positions, emap_b, emap_d, vmap_b, vmap_d)
            )
    problems.sort(key=lambda tp: tp.provenance)
    return problems


def enumerate_minimal(fam: UncertainFamily) -> list[TestProblem]:
    """Minimal-dimension testing set: exactly one edge per row, placed in B
    or in D, columns pairwise distinct within each matrix; up to ``n``
    parameters per problem.

    Rows whose entries are all point-valued in both matrices host no edge
    and contribute vertex choices only.
    """
    n = fam.order
    emap_b, emap_d = _edge_map(fam.B), _edge_map(fam.D)
    vmap_b, vmap_d = _vertex_map(fam.B), _vertex_map(fam.D)

    eligible: list[list[tuple[str, int]]] = []
    for i in range(n):
        options = [("B", j) for j in range(n) if emap_b[i][j]]
        options += [("D", j) for j in range(n) if emap_d[i][j]]
        eligible.append(options)
    slotted_rows = [i for i in range(n) if eligible[i]]

    assignments: list[list[tuple[str, int, int]]] = []
    for combo in itertools.product(*(eligible[i] for i in slotted_rows)):
        cols_b = [j for tag, j in combo if tag == "B"]
        cols_d = [j for tag, j in combo if tag == "D"]
        if len(set(cols_b)) != len(cols_b) or len(set(cols_d)) != len(cols_d):
            continue
        assignments.append(
            [(tag, i, j) for i, (tag, j) in zip(slotted_rows, combo)]
        )

    if not assignments:
        assignments = [[]]

    problems: list[TestProblem] = []
    for positions in assignments:
        problems.extend(
            _build_problems(fam, positions, emap_b, emap_d, vmap_b, vmap_d)
        )
    problems.sort(key=lambda tp: tp.provenance)
    return problems


# --------------------------------------------------------------------------
# Size reporting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EnumeratorCounts:
    """Actual enumerated sizes next to the closed-form worst-case sizes."""

    patterns: int
    problems: int
    max_dimension: int
    nominal_problems: int
    nominal_dimension: int


@dataclass(frozen=True)
class CountsReport:
    order: int
    minimal: EnumeratorCounts
    kamal_dahleh: EnumeratorCounts


def _summarize(problems: Sequence[TestProblem], nominal_problems: int, nominal_dim: int):
    patterns = len({tp.provenance for tp in problems})
    max_dim = max((tp.dimension for tp in problems), default=0)
    return EnumeratorCounts(patterns, len(problems), max_dim, nominal_problems, nominal_dim)


def counts_report(fam: UncertainFamily) -> CountsReport:
    """Structural pattern and problem counts for both testing sets.

    The nominal formulas are the worst-case published sizes
    (``4**(2n^2) * (n!)**2`` problems of ``2n`` parameters, and
    ``(2n)! * 4**(2n^2) * n!`` problems of ``n`` parameters); they ignore
    degeneracy collapse and are reported for display only. Enumerated counts
    govern execution.
    """
    n = fam.order
    nominal_kd = 4 ** (2 * n * n) * math.factorial(n) ** 2
    nominal_min = math.factorial(2 * n) * 4 ** (2 * n * n) * math.factorial(n)
    return CountsReport(
        order=n,
        minimal=_summarize(enumerate_minimal(fam), nominal_min, n),
        kamal_dahleh=_summarize(enumerate_kamal_dahleh(fam), nominal_kd, 2 * n),
    )
