"""Robust Hurwitz stability of MIMO interval control-system families.

The family M(s) = B(s)*A(s) + D(s)*C(s) mixes fixed polynomial matrices A, C
with interval polynomial matrices B, D. This package builds the Kharitonov
vertex/edge testing sets that certify robust stability of the whole family,
decides each low-dimensional test problem by independent sampled methods,
and measures the dimension reduction between testing-set strategies.
"""

from .family import (
    AssumptionAResult,
    AssumptionAViolation,
    CountsReport,
    EdgeSlot,
    IntervalPolynomialMatrix,
    TestProblem,
    UncertainFamily,
    assemble,
    check_assumption_a,
    counts_report,
    enumerate_kamal_dahleh,
    enumerate_minimal,
    instantiate,
)
from .familyfile import FamilyFile, FamilyFileError, dump_family, load_family, parse_family
from .interval_poly import (
    Edge,
    IntervalPolynomial,
    contains,
    kharitonov_edges,
    kharitonov_stable,
    kharitonov_vertices,
)
from .poly import Polynomial, add, eval_imag, is_hurwitz, mul, roots_oracle
from .poly_matrix import (
    BareissFallbackWarning,
    PolynomialMatrix,
    det_bareiss,
    det_cofactor,
    leading_matrix,
    mat_add,
    mat_mul,
    poly_allclose,
    row_affine_decompose,
)
from .verify import (
    CheckConfig,
    CompareReport,
    MarginResult,
    Verdict,
    Witness,
    check_family,
    check_problem_grid,
    check_problem_zero_exclusion,
    compare_sets,
    margin_bisect,
    oracle_family,
)

__version__ = "0.1.0"
