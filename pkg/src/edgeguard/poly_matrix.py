"""Square matrices of fixed polynomials.

Provides products, two independent determinant algorithms (Laplace cofactor
expansion and fraction-free Bareiss elimination), extraction of the scalar
coefficient matrix at a given power, and the affine decomposition of the
determinant with respect to two entries confined to a single row.

Cofactor expansion is the primary determinant path; the systems handled here
are small (order <= 5). Bareiss exists as an independent cross-check and
scales better for larger orders.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .poly import Polynomial, add, mul

__all__ = [
    "PolynomialMatrix",
    "BareissFallbackWarning",
    "mat_mul",
    "mat_add",
    "det_cofactor",
    "det_bareiss",
    "leading_matrix",
    "row_affine_decompose",
    "poly_allclose",
]

# Relative tolerance for polynomial coefficient comparisons, scaled by the
# largest coefficient magnitude in either operand.
COEFF_RTOL = 1e-8


class BareissFallbackWarning(UserWarning):
    """An exact-division step left a non-negligible remainder; the
    determinant was recomputed by cofactor expansion."""


def _as_poly(entry) -> Polynomial:
    if isinstance(entry, Polynomial):
        return entry
    if isinstance(entry, (int, float)):
        return Polynomial((float(entry),))
    return Polynomial(entry)


@dataclass(frozen=True)
class PolynomialMatrix:
    """Immutable n x n grid of polynomials."""

    entries: tuple[tuple[Polynomial, ...], ...]

    def __init__(self, rows: Iterable[Iterable]):
        grid = tuple(tuple(_as_poly(e) for e in row) for row in rows)
        n = len(grid)
        if n == 0 or any(len(row) != n for row in grid):
            raise ValueError("polynomial matrix must be square and non-empty")
        object.__setattr__(self, "entries", grid)

    @classmethod
    def identity(cls, n: int) -> "PolynomialMatrix":
        return cls([[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)])

    @property
    def order(self) -> int:
        return len(self.entries)

    def entry(self, i: int, j: int) -> Polynomial:
        return self.entries[i][j]

    def with_entry(self, i: int, j: int, p: Polynomial) -> "PolynomialMatrix":
        rows = [list(row) for row in self.entries]
        rows[i][j] = p
        return PolynomialMatrix(rows)

    def max_entry_degree(self) -> int:
        return max(p.degree for row in self.entries for p in row)

    def __matmul__(self, other: "PolynomialMatrix") -> "PolynomialMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "PolynomialMatrix") -> "PolynomialMatrix":
        return mat_add(self, other)


def mat_mul(x: PolynomialMatrix, y: PolynomialMatrix) -> PolynomialMatrix:
    """Matrix product; entry (i, k) is sum_j x[i][j] * y[j][k]."""
    n = x.order
    if y.order != n:
        raise ValueError(f"order mismatch: {n} vs {y.order}")
    rows = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = Polynomial()
            for j in range(n):
                acc = add(acc, mul(x.entries[i][j], y.entries[j][k]))
            row.append(acc)
        rows.append(row)
    return PolynomialMatrix(rows)


def mat_add(x: PolynomialMatrix, y: PolynomialMatrix) -> PolynomialMatrix:
    if y.order != x.order:
        raise ValueError(f"order mismatch: {x.order} vs {y.order}")
    return PolynomialMatrix(
        [
            [add(a, b) for a, b in zip(xrow, yrow)]
            for xrow, yrow in zip(x.entries, y.entries)
        ]
    )


def _minor(rows: tuple[tuple[Polynomial, ...], ...], drop_row: int, drop_col: int):
    return tuple(
        tuple(p for j, p in enumerate(row) if j != drop_col)
        for i, row in enumerate(rows)
        if i != drop_row
    )


def _det_rows(rows: tuple[tuple[Polynomial, ...], ...]) -> Polynomial:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = Polynomial()
    for j, p in enumerate(rows[0]):
        if p.is_zero:
            continue
        cofactor = _det_rows(_minor(rows, 0, j))
        term = mul(p, cofactor)
        acc = add(acc, term if j % 2 == 0 else term.scaled(-1.0))
    return acc


def det_cofactor(x: PolynomialMatrix) -> Polynomial:
    """Determinant via Laplace cofactor expansion along the first row."""
    return _det_rows(x.entries)


def _poly_divmod(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Long division of polynomials: num = quot * den + rem."""
    if den.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(num.coeffs)
    dlead = den.coeffs[-1]
    ddeg = den.degree
    quot = [0.0] * max(0, len(rem) - ddeg)
    for k in range(len(rem) - 1, ddeg - 1, -1):
        factor = rem[k] / dlead
        quot[k - ddeg] = factor
        if factor != 0.0:
            for j, dc in enumerate(den.coeffs):
                rem[k - ddeg + j] -= factor * dc
        rem[k] = 0.0
    return Polynomial(quot), Polynomial(rem)


def _exact_quotient(num: Polynomial, den: Polynomial, rtol: float) -> Polynomial | None:
    quot, rem = _poly_divmod(num, den)
    scale = max([1.0] + [abs(c) for c in num.coeffs])
    if rem.is_zero or max(abs(c) for c in rem.coeffs) <= rtol * scale:
        return quot
    return None


def det_bareiss(x: PolynomialMatrix, rtol: float = COEFF_RTOL) -> Polynomial:
    """Determinant via fraction-free (Bareiss) elimination over the
    polynomial ring.

    Every division in the recurrence is exact on integer-coefficient input.
    If a floating-point input leaves a remainder beyond ``rtol`` (relative to
    the dividend's largest coefficient), the routine falls back to cofactor
    expansion and emits a ``BareissFallbackWarning``.
    """
    n = x.order
    m = [[p for p in row] for row in x.entries]
    sign = 1.0
    prev_pivot = Polynomial((1.0,))
    for k in range(n - 1):
        if m[k][k].is_zero:
            for i in range(k + 1, n):
                if not m[i][k].is_zero:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Polynomial()
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = mul(pivot, m[i][j]) - mul(m[i][k], m[k][j])
                if k == 0:
                    m[i][j] = num
                else:
                    quot = _exact_quotient(num, prev_pivot, rtol)
                    if quot is None:
                        warnings.warn(
                            "inexact division in fraction-free elimination; "
                            "falling back to cofactor expansion",
                            BareissFallbackWarning,
                        )
                        return det_cofactor(x)
                    m[i][j] = quot
            m[i][k] = Polynomial()
        prev_pivot = pivot
    return m[n - 1][n - 1].scaled(sign)


def leading_matrix(x: PolynomialMatrix, n_deg: int) -> np.ndarray:
    """Scalar matrix of the coefficients of ``s**n_deg`` across all entries.

    ``n_deg`` must be at least the degree of every entry; entries of lower
    degree contribute zero.
    """
    if n_deg < x.max_entry_degree():
        raise ValueError(
            f"power {n_deg} below max entry degree {x.max_entry_degree()}"
        )
    n = x.order
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = x.entries[i][j].coeff(n_deg)
    return out


# Fixed, irrational-ish probe points: deterministic, and no polynomial with a
# genuine cross or quadratic term in (b, d) can vanish at both.
_AFFINE_PROBES = ((0.6180339887498949, 0.4142135623730951),
                  (0.8392867552141612, 0.3247179572447460))


def row_affine_decompose(
    matrix_map: Callable[[float, float], PolynomialMatrix], row: int
) -> tuple[Polynomial, Polynomial, Polynomial]:
    """Split ``det(matrix_map(b, d))`` as ``b*delta1 + d*delta2 + delta3``.

    ``matrix_map`` builds the matrix for scalar multipliers ``(b, d)`` that
    scale two designated entries confined to the given row, which makes the
    determinant jointly affine in ``(b, d)``. The parts are recovered from
    the substitutions (0,0), (1,0), (0,1) and the affine identity is verified
    at fixed probe points; a violation raises ``ValueError``.

    The ``row`` argument documents which row hosts the varying entries; it is
    reported in diagnostics only.
    """
    d00 = det_cofactor(matrix_map(0.0, 0.0))
    d10 = det_cofactor(matrix_map(1.0, 0.0))
    d01 = det_cofactor(matrix_map(0.0, 1.0))
    delta3 = d00
    delta1 = d10 - d00
    delta2 = d01 - d00

    for b, d in _AFFINE_PROBES:
        actual = det_cofactor(matrix_map(b, d))
        predicted = delta1.scaled(b) + delta2.scaled(d) + delta3
        if not poly_allclose(actual, predicted, rtol=1e-8):
            raise ValueError(
                f"not row-affine: determinant is not affine in the row-{row} "
                f"entries (probe b={b}, d={d})"
            )
    return delta1, delta2, delta3


def poly_allclose(p: Polynomial, q: Polynomial, rtol: float = COEFF_RTOL) -> bool:
    """Coefficient-wise comparison at ``rtol`` relative to the largest
    coefficient magnitude in either operand."""
    scale = max(
        [1e-300]
        + [abs(c) for c in p.coeffs]
        + [abs(c) for c in q.coeffs]
    )
    n = max(len(p.coeffs), len(q.coeffs))
    return all(abs(p.coeff(k) - q.coeff(k)) <= rtol * scale for k in range(n))
