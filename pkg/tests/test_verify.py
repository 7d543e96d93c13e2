import json

import numpy as np
import pytest

from edgeguard.datasets import manipulator_family
from edgeguard.family import (
    AssumptionAViolation,
    IntervalPolynomialMatrix,
    UncertainFamily,
    assemble,
    enumerate_kamal_dahleh,
    enumerate_minimal,
    instantiate,
)
from edgeguard.poly import Polynomial, roots_oracle
from edgeguard.poly_matrix import PolynomialMatrix
from edgeguard.verify import (
    CheckConfig,
    check_family,
    check_problem_grid,
    check_problem_zero_exclusion,
    corner_characteristics,
    grid_characteristics,
    margin_bisect,
    oracle_family,
    routh_stable_batch,
)

from conftest import random_sparse_family

FAST = CheckConfig(grid_points_per_axis=17, freq_points=256)


def n1_family(b_bounds, d_bounds, n_deg=None):
    if n_deg is None:
        n_deg = max(len(b_bounds), len(d_bounds)) - 1
    return UncertainFamily(
        A=PolynomialMatrix([[1.0]]),
        C=PolynomialMatrix([[1.0]]),
        B=IntervalPolynomialMatrix([[b_bounds]]),
        D=IntervalPolynomialMatrix([[d_bounds]]),
        n_deg=n_deg,
    )


def broken_manipulator(eps=0.05):
    """Manipulator variant with the (1,1) stiffness interval negated."""
    fam = manipulator_family(eps)
    d_rows = [[list(fam.D.entry(i, j).bounds) for j in range(2)] for i in range(2)]
    lo, hi = d_rows[0][0][0]
    d_rows[0][0][0] = (-hi, -lo)
    return UncertainFamily(
        A=fam.A, C=fam.C, B=fam.B, D=IntervalPolynomialMatrix(d_rows), n_deg=fam.n_deg
    )


class TestRouthBatch:
    def test_matches_scalar_routh(self):
        from edgeguard.poly import is_hurwitz

        rng = np.random.default_rng(51)
        for deg in (1, 2, 3, 5, 6, 8):
            coeffs = rng.uniform(-3, 3, size=(200, deg + 1))
            coeffs[:, -1] = np.where(np.abs(coeffs[:, -1]) < 0.1, 1.0, coeffs[:, -1])
            stable, _ = routh_stable_batch(coeffs, 1e-9)
            for row, got in zip(coeffs, stable):
                assert bool(got) == is_hurwitz(Polynomial(row))


class TestGridCheck:
    def test_slotless_problem_single_routh(self):
        fam = n1_family([(0, 0), (1, 1)], [(2, 2)])
        tp = enumerate_minimal(fam)[0]
        v = check_problem_grid(tp, fam, FAST)
        assert v.stable and v.routh_evaluations == 1

    def test_blend_matches_direct_assembly(self):
        rng = np.random.default_rng(52)
        checked = 0
        while checked < 20:
            fam = random_sparse_family(rng)
            for tp in enumerate_minimal(fam)[:3]:
                corners = corner_characteristics(tp, fam)
                lam = rng.uniform(0, 1, size=tp.dimension)
                direct = assemble(fam, *instantiate(tp, lam))
                blended = corners.reshape((2,) * tp.dimension + (-1,))
                for value in lam:
                    blended = (1 - value) * blended[0] + value * blended[1]
                blended = np.atleast_1d(blended)
                scale = max(1.0, float(np.abs(blended).max()))
                for k in range(len(blended)):
                    assert abs(blended[k] - direct.coeff(k)) <= 1e-10 * scale
                checked += 1

    def test_inertia_edges_stable_at_nominal_gains(self, manipulator_nominal):
        problems = enumerate_minimal(manipulator_nominal)
        assert len({tp.provenance for tp in problems}) == 1  # only B edges remain
        tp = problems[0]
        cfg = CheckConfig(grid_points_per_axis=33)
        v = check_problem_grid(tp, manipulator_nominal, cfg)
        assert v.stable
        assert v.routh_evaluations == 33**2
        rng = np.random.default_rng(53)
        grid = np.linspace(0, 1, 33)
        for _ in range(5):
            lam = tuple(rng.choice(grid) for _ in range(tp.dimension))
            char = assemble(manipulator_nominal, *instantiate(tp, lam))
            assert max(z.real for z in roots_oracle(char)) < 0

    def test_broken_family_witness_replays(self):
        fam = broken_manipulator()
        cfg = CheckConfig(grid_points_per_axis=9)
        verdict = check_family(fam, cfg, "minimal")
        assert not verdict.stable
        w = verdict.witness
        assert w is not None and w.kind == "routh"
        problems = enumerate_minimal(fam)
        tp = problems[w.problem_index]
        assert tp.provenance == w.pattern
        char = assemble(fam, *instantiate(tp, w.lambdas))
        roots = roots_oracle(char)
        assert max(z.real for z in roots) > 0
        assert any(z.real >= 0 for z in w.unstable_roots)

    def test_degree_drop_witnessed(self):
        # leading coefficient sweeps through zero inside an edge
        fam = n1_family([(0, 0), (-1.0, 1.0)], [(1, 1)])
        tp = enumerate_minimal(fam)[0]
        v = check_problem_grid(tp, fam, FAST)
        assert not v.stable
        assert v.witness.kind == "degree_drop"

    def test_slot_guard(self):
        fam = manipulator_family(0.1)
        problems = enumerate_kamal_dahleh(fam)
        from edgeguard.family import EdgeSlot, TestProblem

        tp = problems[0]
        extra = EdgeSlot("D", 0, 1, enumerate_minimal(fam)[-1].slots[0].edge)
        overloaded = TestProblem(
            tp.fixed_B, tp.fixed_D, tp.slots + (extra,), tp.provenance
        )
        with pytest.raises(ValueError, match="minimal"):
            check_problem_grid(overloaded, fam, FAST)


class TestZeroExclusion:
    def test_fixed_stable_first_order(self):
        fam = n1_family([(0, 0), (1, 1)], [(1, 1)])
        tp = enumerate_minimal(fam)[0]
        v = check_problem_zero_exclusion(tp, fam, FAST)
        assert v.stable
        assert v.min_modulus == pytest.approx(1.0)
        assert v.min_modulus_freq == 0.0

    def test_family_reaching_marginal_oscillator(self):
        # s^2 + c1 s + 1 with c1 in [0, 1] contains s^2 + 1 at an endpoint
        fam = n1_family([(0, 0), (0, 0), (1, 1)], [(1, 1), (0.0, 1.0)])
        tp = enumerate_minimal(fam)[0]
        cfg = CheckConfig(grid_points_per_axis=17, freq_points=513, freq_max=4.0)
        v = check_problem_zero_exclusion(tp, fam, cfg)
        assert not v.stable
        assert v.witness.kind == "value_set"
        assert v.witness.omega == pytest.approx(1.0)

    def test_unstable_base_member_short_circuits(self):
        fam = n1_family([(0, 0), (1, 1)], [(-2, -1)])
        tp = enumerate_minimal(fam)[0]
        v = check_problem_zero_exclusion(tp, fam, FAST)
        assert not v.stable
        assert v.witness.kind == "base_member"
        assert v.routh_evaluations == 1

    def test_agrees_with_grid_on_gain_edges(self, manipulator_10pct):
        problems = [
            tp
            for tp in enumerate_minimal(manipulator_10pct)
            if tp.provenance == "D(1,1)+D(2,2)"
        ]
        cfg = CheckConfig(grid_points_per_axis=17, freq_points=512)
        for tp in problems[:6]:
            g = check_problem_grid(tp, manipulator_10pct, cfg)
            z = check_problem_zero_exclusion(tp, manipulator_10pct, cfg)
            assert g.stable == z.stable

    def test_method_agreement_on_random_problems(self):
        # borderline evidence (near-axis corner roots, value sets inside the
        # tolerance or resolution bands, borderline pivots) is excluded
        # before comparing; everything else must agree
        rng = np.random.default_rng(54)
        cfg = CheckConfig(grid_points_per_axis=17, freq_points=256)
        included = 0
        attempts = 0
        while included < 100 and attempts < 150:
            attempts += 1
            fam = random_sparse_family(rng, force_unstable=bool(rng.random() < 0.4))
            for tp in enumerate_minimal(fam)[:4]:
                if not 1 <= tp.dimension <= 2:
                    continue
                corners = corner_characteristics(tp, fam)
                near_axis = False
                for row in corners:
                    p = Polynomial(row)
                    if p.degree < 1:
                        near_axis = True
                        break
                    try:
                        if any(abs(z.real) < 1e-4 for z in roots_oracle(p)):
                            near_axis = True
                            break
                    except RuntimeError:
                        near_axis = True
                        break
                if near_axis:
                    continue
                z = check_problem_zero_exclusion(tp, fam, cfg)
                g = check_problem_grid(tp, fam, cfg)
                if z.marginal or g.marginal:
                    continue
                assert g.stable == z.stable, (tp.provenance, g.witness, z.witness)
                included += 1
        assert included >= 100


class TestCheckFamily:
    def test_point_family(self):
        fam = n1_family([(0, 0), (1, 1)], [(2, 2)])
        v = check_family(fam, FAST, "minimal")
        assert v.stable and v.problems_checked == 1

    def test_nominal_manipulator_both_sets(self, manipulator_nominal):
        for set_choice in ("minimal", "kd"):
            v = check_family(manipulator_nominal, FAST, set_choice)
            assert v.stable, set_choice

    def test_assumption_a_gate(self):
        fam = n1_family([(0, 0), (-1, 1)], [(1, 1)])
        with pytest.raises(AssumptionAViolation):
            check_family(fam, FAST, "minimal")

    def test_deterministic_across_worker_counts(self):
        rng = np.random.default_rng(55)
        fam = random_sparse_family(rng)
        reports = []
        for jobs in (1, 3):
            v = check_family(fam, FAST, "minimal", jobs=jobs)
            reports.append(json.dumps(v.to_json(include_timing=False), sort_keys=True))
        assert reports[0] == reports[1]

    def test_method_both_combines(self):
        fam = n1_family([(0, 0), (1, 2)], [(1, 2)])
        cfg = CheckConfig(grid_points_per_axis=9, freq_points=64, method="both")
        v = check_family(fam, cfg, "minimal")
        assert v.stable
        assert not any(m["kind"] == "method_disagreement" for m in v.marginal)

    def test_no_degree_drop_under_assumption_a(self, manipulator_10pct):
        cfg = CheckConfig(grid_points_per_axis=9)
        v = check_family(manipulator_10pct, cfg, "minimal")
        if v.witness is not None:
            assert v.witness.kind != "degree_drop"


class TestOracle:
    def test_point_family_single_member(self):
        fam = n1_family([(0, 0), (1, 1)], [(2, 2)])
        v = oracle_family(fam, FAST)
        assert v.stable and v.problems_checked == 1

    def test_budget_guard(self, manipulator_10pct):
        with pytest.raises(ValueError, match="budget"):
            oracle_family(manipulator_10pct, FAST, points_per_coeff=3, budget=1000)

    def test_broken_family_member_witness(self):
        fam = broken_manipulator()
        v = oracle_family(fam, FAST, points_per_coeff=2)
        assert not v.stable
        assert v.witness.kind == "member"
        assert v.witness.member  # replayable coefficient assignment
        assert any(z.real >= 0 for z in v.witness.unstable_roots)

    def test_matches_testing_sets_on_random_families(self):
        rng = np.random.default_rng(56)
        agreements = 0
        trials = 0
        while agreements < 10 and trials < 40:
            trials += 1
            fam = random_sparse_family(rng, force_unstable=bool(trials % 2))
            from conftest import family_root_band_clear

            if not family_root_band_clear(fam, band=1e-3):
                continue
            o = oracle_family(fam, FAST, points_per_coeff=3)
            m = check_family(fam, FAST, "minimal")
            k = check_family(fam, FAST, "kd")
            assert o.stable == m.stable == k.stable
            agreements += 1
        assert agreements >= 10


class TestMargin:
    def test_upper_clamp_when_always_stable(self):
        base = n1_family([(0, 0), (1, 1)], [(2, 2)])
        result = margin_bisect(lambda eps: base, FAST, tol=1e-3)
        assert result.eps_star == 1.0
        assert result.first_unstable is None

    def test_unstable_at_lower_bound(self):
        broken = broken_manipulator()
        with pytest.raises(ValueError, match="unstable at the lower"):
            margin_bisect(lambda eps: broken, FAST, tol=1e-2)

    def test_manipulator_bracket(self):
        cfg = CheckConfig(grid_points_per_axis=9)
        result = margin_bisect(manipulator_family, cfg, tol=1e-2)
        assert 0.0 < result.eps_star < 0.05
        assert result.first_unstable is not None
        assert result.first_unstable - result.last_stable <= 1e-2 + 1e-12
