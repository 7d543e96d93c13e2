import numpy as np
import pytest

from edgeguard.datasets import manipulator_family
from edgeguard.family import IntervalPolynomialMatrix, UncertainFamily
from edgeguard.poly import Polynomial, is_hurwitz, roots_oracle
from edgeguard.poly_matrix import PolynomialMatrix


@pytest.fixture
def manipulator_nominal():
    return manipulator_family(0.0)


@pytest.fixture
def manipulator_10pct():
    return manipulator_family(0.1)


def random_stable_polynomial(rng, max_degree=6):
    """Hurwitz polynomial built from random LHP factors."""
    degree = rng.integers(1, max_degree + 1)
    p = Polynomial([1.0])
    remaining = degree
    while remaining > 0:
        if remaining >= 2 and rng.random() < 0.5:
            # conjugate pair: s^2 + 2a s + (a^2 + b^2), a > 0
            a = rng.uniform(0.05, 2.0)
            b = rng.uniform(0.0, 2.0)
            p = p * Polynomial([a * a + b * b, 2 * a, 1.0])
            remaining -= 2
        else:
            p = p * Polynomial([rng.uniform(0.05, 2.0), 1.0])
            remaining -= 1
    return p.scaled(rng.uniform(0.2, 3.0))


def random_sparse_family(rng, force_unstable=False):
    """Small n=2 family (entry degrees <= 2) with few uncertain coefficients.

    The nominal point family is rejection-sampled to be comfortably Hurwitz,
    then a handful of coefficients are widened into intervals; optionally one
    is pushed far enough that a corner member is clearly unstable.
    """
    n_deg = 2
    while True:
        a21 = float(rng.integers(-2, 3))
        A = PolynomialMatrix([[1.0, 0.0], [a21, 1.0]])
        C = PolynomialMatrix.identity(2)
        b_pts = rng.uniform(0.2, 2.0, size=(2, 2, 3))
        d_pts = rng.uniform(0.2, 2.0, size=(2, 2, 3))
        b_mat = PolynomialMatrix([[list(b_pts[i, j]) for j in range(2)] for i in range(2)])
        d_mat = PolynomialMatrix([[list(d_pts[i, j]) for j in range(2)] for i in range(2)])
        from edgeguard.poly_matrix import det_cofactor, mat_add, mat_mul

        char = det_cofactor(mat_add(mat_mul(b_mat, A), mat_mul(d_mat, C)))
        if char.degree != 4:
            continue
        try:
            roots = roots_oracle(char)
        except RuntimeError:
            continue
        if max(z.real for z in roots) > -0.25:
            continue

        bounds_b = [[[(c, c) for c in b_pts[i, j]] for j in range(2)] for i in range(2)]
        bounds_d = [[[(c, c) for c in d_pts[i, j]] for j in range(2)] for i in range(2)]
        n_uncertain = int(rng.integers(2, 4))
        spots = rng.choice(2 * 2 * 2 * 3, size=n_uncertain, replace=False)
        for flat in spots:
            mat_idx, rem = divmod(int(flat), 12)
            i, rem = divmod(rem, 6)
            j, p = divmod(rem, 3)
            target = bounds_b if mat_idx == 0 else bounds_d
            c = target[i][j][p][0]
            w = rng.uniform(0.05, 0.3) * max(1.0, abs(c))
            target[i][j][p] = (c - w, c + w)
        if force_unstable:
            # push one constant coefficient of D strongly negative
            i, j = int(rng.integers(2)), int(rng.integers(2))
            lo, hi = bounds_d[i][j][0]
            bounds_d[i][j][0] = (lo - rng.uniform(3.0, 6.0), hi)
        fam = UncertainFamily(
            A=A,
            C=C,
            B=IntervalPolynomialMatrix(bounds_b),
            D=IntervalPolynomialMatrix(bounds_d),
            n_deg=n_deg,
        )
        from edgeguard.family import check_assumption_a

        if not check_assumption_a(fam).holds:
            continue
        return fam


def family_root_band_clear(fam, points_per_coeff=3, band=1e-3):
    """True when every gridded member's roots stay outside the +/-band strip.

    This is the borderline filter for equivalence experiments: sampled
    methods cannot certify members whose roots sit on the axis within the
    band, so such instances are excluded rather than decided.
    """
    import itertools

    from edgeguard.family import assemble
    from edgeguard.interval_poly import IntervalPolynomial

    params = []
    for mat in (fam.B, fam.D):
        for i in range(fam.order):
            for j in range(fam.order):
                ip = mat.entry(i, j)
                for p in range(ip.degree_bound + 1):
                    lo, hi = ip.bound(p)
                    if lo != hi:
                        params.append((mat, i, j, p, lo, hi))
    axes = [np.linspace(lo, hi, points_per_coeff) for *_x, lo, hi in params]
    for combo in itertools.product(*axes):
        rows_b = [[list(fam.B.entry(i, j).bounds) for j in range(fam.order)]
                  for i in range(fam.order)]
        rows_d = [[list(fam.D.entry(i, j).bounds) for j in range(fam.order)]
                  for i in range(fam.order)]
        for (mat, i, j, p, _lo, _hi), v in zip(params, combo):
            target = rows_b if mat is fam.B else rows_d
            target[i][j][p] = (v, v)
        bc = PolynomialMatrix(
            [[Polynomial([b[0] for b in rows_b[i][j]]) for j in range(fam.order)]
             for i in range(fam.order)]
        )
        dc = PolynomialMatrix(
            [[Polynomial([b[0] for b in rows_d[i][j]]) for j in range(fam.order)]
             for i in range(fam.order)]
        )
        char = assemble(fam, bc, dc)
        if char.degree < 1:
            return False
        try:
            roots = roots_oracle(char)
        except RuntimeError:
            return False
        if any(abs(z.real) <= band for z in roots):
            return False
    return True
