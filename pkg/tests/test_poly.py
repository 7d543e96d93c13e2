import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeguard.poly import Polynomial, add, eval_imag, is_hurwitz, mul, roots_oracle

from conftest import random_stable_polynomial


def P(*coeffs):
    return Polynomial(coeffs)


class TestArithmetic:
    def test_add_cancellation(self):
        assert add(P(1, 1), P(1, -1)) == P(2)

    def test_add_identity(self):
        p = P(3, 0, 2)
        assert add(p, Polynomial()) == p

    def test_add_mixed_degrees(self):
        assert add(P(0, 0, 1), P(0, 1)) == P(0, 1, 1)

    def test_mul_square(self):
        assert mul(P(1, 1), P(1, 1)) == P(1, 2, 1)

    def test_mul_annihilator(self):
        assert mul(P(1, 2, 3), Polynomial()) == Polynomial()

    def test_mul_monomials(self):
        assert mul(P(0, 1), P(0, 0, 1)) == P(0, 0, 0, 1)

    def test_normalization_strips_trailing_zeros(self):
        assert P(1, 2, 0, 0).coeffs == (1.0, 2.0)
        assert P(0, 0).is_zero

    def test_degree_of_product(self):
        p, q = P(1, 2, 3), P(4, 5)
        assert mul(p, q).degree == p.degree + q.degree


int_coeffs = st.lists(st.integers(min_value=-9, max_value=9), min_size=0, max_size=6)


@given(int_coeffs, int_coeffs)
@settings(max_examples=100, deadline=None)
def test_mul_commutative_exact_on_integers(a, b):
    assert mul(Polynomial(a), Polynomial(b)) == mul(Polynomial(b), Polynomial(a))


@given(int_coeffs, int_coeffs, int_coeffs)
@settings(max_examples=100, deadline=None)
def test_mul_associative_exact_on_integers(a, b, c):
    pa, pb, pc = Polynomial(a), Polynomial(b), Polynomial(c)
    assert mul(mul(pa, pb), pc) == mul(pa, mul(pb, pc))


class TestEvalImag:
    def test_root_on_axis(self):
        assert eval_imag(P(1, 0, 1), 1.0) == 0

    def test_pure_imaginary(self):
        assert eval_imag(P(0, 1), 2.0) == 2j

    def test_direct_substitution(self):
        # 1 + j - 1 at omega = 1
        assert eval_imag(P(1, 1, 1), 1.0) == pytest.approx(1j)

    def test_even_odd_linearity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            coeffs = rng.uniform(-3, 3, size=rng.integers(1, 9))
            omega = rng.uniform(-4, 4)
            p = Polynomial(coeffs)
            even = Polynomial([c if k % 2 == 0 else 0.0 for k, c in enumerate(coeffs)])
            odd = Polynomial([c if k % 2 == 1 else 0.0 for k, c in enumerate(coeffs)])
            split = eval_imag(even, omega) + eval_imag(odd, omega)
            assert eval_imag(p, omega) == pytest.approx(split, abs=1e-12)

    def test_matches_direct_horner(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = Polynomial(rng.uniform(-3, 3, size=rng.integers(1, 9)))
            omega = rng.uniform(0, 5)
            assert eval_imag(p, omega) == pytest.approx(p(1j * omega), abs=1e-10)


class TestIsHurwitz:
    def test_stable_quadratic(self):
        assert is_hurwitz(P(1, 1, 1)) is True

    def test_sign_change_unstable(self):
        assert is_hurwitz(P(1, -1, 1)) is False

    def test_stable_cubic_against_roots(self):
        p = P(1, 3, 2, 1)
        assert max(z.real for z in roots_oracle(p)) < 0
        assert is_hurwitz(p) is True

    def test_degree_zero_stable_by_convention(self):
        assert is_hurwitz(P(5)) is True

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError, match="undefined stability"):
            is_hurwitz(Polynomial())

    def test_marginal_oscillator_rejected(self):
        # roots at +/- j: strictly Hurwitz must reject
        assert is_hurwitz(P(1, 0, 1)) is False

    def test_margin_tol_treats_small_pivots_as_zero(self):
        # third Routh row is [~1e-12, 1]: the pivot is negligible relative
        # to its own row and the conservative verdict is "not Hurwitz"
        assert is_hurwitz(P(2, 3, 2, 2 + 1e-12, 1, 1)) is False

    def test_margin_tol_is_row_relative(self):
        p = P(1, 1, 1)
        assert is_hurwitz(p, margin_tol=0.5) is True
        assert is_hurwitz(p, margin_tol=1.5) is False

    def test_agrees_with_roots_on_random_sample(self):
        # 500 polynomials, half constructed stable, half raw random;
        # roots within 1e-6 of the axis are excluded from the comparison.
        rng = np.random.default_rng(42)
        compared = 0
        for trial in range(500):
            if trial % 2 == 0:
                p = random_stable_polynomial(rng, max_degree=8)
            else:
                degree = rng.integers(1, 9)
                coeffs = rng.uniform(-5, 5, size=degree + 1)
                if abs(coeffs[-1]) < 1e-3:
                    coeffs[-1] = 1.0
                p = Polynomial(coeffs)
            try:
                roots = roots_oracle(p)
            except RuntimeError:
                continue
            worst = max(z.real for z in roots)
            if abs(worst) <= 1e-6:
                continue
            compared += 1
            assert is_hurwitz(p) is (worst < 0), f"disagreement on {p}"
        assert compared >= 450


class TestRootsOracle:
    def test_real_pair(self):
        roots = sorted(roots_oracle(P(-1, 0, 1)), key=lambda z: z.real)
        assert roots[0] == pytest.approx(-1)
        assert roots[1] == pytest.approx(1)

    def test_triple_root(self):
        roots = roots_oracle(P(1, 3, 3, 1))
        for z in roots:
            assert z == pytest.approx(-1, abs=1e-4)

    def test_imaginary_pair(self):
        roots = sorted(roots_oracle(P(1, 0, 1)), key=lambda z: z.imag)
        assert roots[0] == pytest.approx(-1j)
        assert roots[1] == pytest.approx(1j)

    def test_residuals_within_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            p = Polynomial(rng.uniform(-5, 5, size=rng.integers(2, 10)))
            if p.degree < 1:
                continue
            lead = abs(p.coeffs[-1])
            for z in roots_oracle(p):
                residual = abs(p(z)) / (lead * max(1.0, abs(z)) ** p.degree)
                assert residual <= 1e-8

    def test_requires_degree_one(self):
        with pytest.raises(ValueError):
            roots_oracle(P(3))
