"""Univariate real polynomials with Routh-array Hurwitz stability testing.

Coefficients are stored ascending by power: ``coeffs[k]`` multiplies ``s**k``.
All operations return normalized polynomials (trailing zeros stripped); the
zero polynomial is the empty coefficient tuple.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Polynomial",
    "add",
    "mul",
    "eval_imag",
    "is_hurwitz",
    "roots_oracle",
    "DEFAULT_MARGIN_TOL",
]

# Routh pivots with magnitude at or below this fraction of the current row's
# largest entry are treated as zero, i.e. the polynomial is rejected as not
# strictly Hurwitz.
DEFAULT_MARGIN_TOL = 1e-9


def _normalize(coeffs: Iterable[float]) -> tuple[float, ...]:
    out = [float(c) for c in coeffs]
    while out and out[-1] == 0.0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class Polynomial:
    """Immutable real polynomial, ascending coefficient order."""

    coeffs: tuple[float, ...] = ()

    def __init__(self, coeffs: Iterable[float] = ()):
        object.__setattr__(self, "coeffs", _normalize(coeffs))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def coeff(self, power: int) -> float:
        """Coefficient of ``s**power`` (0.0 beyond the stored degree)."""
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return 0.0

    def __call__(self, s: complex) -> complex:
        result: complex = 0.0
        for c in reversed(self.coeffs):
            result = result * s + c
        return result

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return add(self, other)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return add(self, other.scaled(-1.0))

    def __neg__(self) -> "Polynomial":
        return self.scaled(-1.0)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return mul(self, other)

    def scaled(self, factor: float) -> "Polynomial":
        return Polynomial(c * factor for c in self.coeffs)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            if k == 0:
                terms.append(f"{c:g}")
            elif k == 1:
                terms.append(f"{c:g}*s")
            else:
                terms.append(f"{c:g}*s^{k}")
        return " + ".join(terms).replace("+ -", "- ")


ZERO = Polynomial()
ONE = Polynomial((1.0,))


def monomial(power: int, coefficient: float = 1.0) -> Polynomial:
    """The polynomial ``coefficient * s**power``."""
    return Polynomial((0.0,) * power + (float(coefficient),))


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    """Coefficient-wise sum, normalized."""
    n = max(len(p.coeffs), len(q.coeffs))
    return Polynomial(p.coeff(k) + q.coeff(k) for k in range(n))


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    """Product by coefficient convolution."""
    if p.is_zero or q.is_zero:
        return ZERO
    return Polynomial(np.convolve(p.coeffs, q.coeffs))


def eval_imag(p: Polynomial, omega: float) -> complex:
    """Evaluate ``p(j*omega)`` by splitting even and odd powers.

    The even-power part contributes the real component and the odd-power
    part the imaginary component, each a polynomial in ``-omega**2``.
    """
    x = -omega * omega
    re = 0.0
    im = 0.0
    for c in reversed(p.coeffs[0::2]):
        re = re * x + c
    for c in reversed(p.coeffs[1::2]):
        im = im * x + c
    return complex(re, omega * im)


def _routh_rows(coeffs: Sequence[float]) -> tuple[list[float], list[float]]:
    # First two Routh rows from descending-order interleaving.
    desc = list(reversed(coeffs))
    return desc[0::2], desc[1::2]


def is_hurwitz(p: Polynomial, margin_tol: float = DEFAULT_MARGIN_TOL) -> bool:
    """Strict Hurwitz test (all roots in the open left half-plane).

    Uses the Routh array. Any first-column pivot with magnitude at or below
    ``margin_tol`` times the largest absolute entry of its row counts as a
    zero pivot and yields ``False``: marginal polynomials are rejected, never
    perturbed. Nonzero constants are stable by convention.

    Raises ``ValueError`` for the zero polynomial.
    """
    if p.is_zero:
        raise ValueError("undefined stability: zero polynomial")
    if p.degree == 0:
        return True

    coeffs = p.coeffs
    if coeffs[-1] < 0.0:
        coeffs = tuple(-c for c in coeffs)

    row_prev, row_cur = _routh_rows(coeffs)
    width = len(row_prev)
    row_cur = row_cur + [0.0] * (width - len(row_cur))

    # First column entries of all degree+1 rows must be strictly positive.
    if row_prev[0] <= 0.0:
        return False
    for _ in range(p.degree):
        pivot = row_cur[0]
        scale = max(abs(v) for v in row_cur)
        if pivot <= margin_tol * scale or scale == 0.0:
            return False
        nxt = [
            (pivot * row_prev[j + 1] - row_prev[0] * row_cur[j + 1]) / pivot
            for j in range(width - 1)
        ]
        nxt.append(0.0)
        row_prev, row_cur = row_cur, nxt
    return True


def roots_oracle(p: Polynomial, max_polish: int = 20) -> list[complex]:
    """All complex roots, via companion-matrix eigenvalues plus Newton polish.

    Test infrastructure: correctness is measured by residuals, not by the
    algorithm used. Each returned root r satisfies
    ``|p(r)| <= 1e-8 * |lead| * max(1, |r|)**deg``; a ``RuntimeError`` is
    raised if polishing cannot reach that residual.
    """
    if p.degree < 1:
        raise ValueError("roots require degree >= 1")
    desc = np.asarray(list(reversed(p.coeffs)), dtype=float)
    roots = np.roots(desc)
    deriv = np.polyder(desc)
    lead = abs(p.coeffs[-1])

    polished: list[complex] = []
    for r in roots:
        z = complex(r)
        for _ in range(max_polish):
            if _root_residual(p, z, lead) <= 1e-8:
                break
            dv = np.polyval(deriv, z)
            if dv == 0:
                break
            z = z - np.polyval(desc, z) / dv
        if _root_residual(p, z, lead) > 1e-8:
            raise RuntimeError(f"root refinement did not converge near {z}")
        polished.append(z)
    return polished


def _root_residual(p: Polynomial, z: complex, lead: float) -> float:
    return abs(p(z)) / (lead * max(1.0, abs(z)) ** p.degree)
