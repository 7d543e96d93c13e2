"""Built-in example family: a two-link planar manipulator under PD control.

The closed-loop characteristic matrix is det(M*s^3 + Kd*s^2 + Kp*s + Kr)
with an uncertain inertia matrix and uncertain gain matrices. The inertia
uncertainty comes from the joint angle: factoring M as B*A with a fixed
unimodular A leaves two interval coefficients b12 in [1, 2] and b21 in
[-1, 0] at power three. Each gain entry k is an interval [k - k*eps,
k + k*eps], so eps is a uniform percentage uncertainty level and eps = 0 is
the nominal design.
"""

from __future__ import annotations

from .family import IntervalPolynomialMatrix, UncertainFamily
from .poly_matrix import PolynomialMatrix

__all__ = [
    "manipulator_family",
    "manipulator_file_payload",
    "EXAMPLE_BUILDERS",
]

# Nominal gain matrices, row-major.
KD_CENTERS = ((6.07, 2.22), (2.22, 1.62))
KP_CENTERS = ((6.12, 2.24), (2.24, 1.64))
KR_CENTERS = ((5.11, 1.87), (1.87, 1.37))

# Fixed inertia factor and measurement matrix.
A_MATRIX = ((1.0, 0.0), (2.0, 1.0))
B12_BOUNDS = (1.0, 2.0)
B21_BOUNDS = (-1.0, 0.0)
N_DEG = 3


def _gain_interval(center: float, eps: float) -> list[float]:
    spread = abs(center) * eps
    return [center - spread, center + spread]


def manipulator_family(eps: float) -> UncertainFamily:
    """The manipulator family at uncertainty level ``eps`` in [0, 1]."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"uncertainty level {eps} outside [0, 1]")
    point_cubic = [0.0, 0.0, 0.0, 1.0]
    b_rows = [
        [
            [(c, c) for c in point_cubic],
            [(0.0, 0.0)] * 3 + [B12_BOUNDS],
        ],
        [
            [(0.0, 0.0)] * 3 + [B21_BOUNDS],
            [(c, c) for c in point_cubic],
        ],
    ]
    d_rows = []
    for i in range(2):
        row = []
        for j in range(2):
            row.append(
                [
                    _gain_interval(KR_CENTERS[i][j], eps),
                    _gain_interval(KP_CENTERS[i][j], eps),
                    _gain_interval(KD_CENTERS[i][j], eps),
                ]
            )
        d_rows.append(row)
    return UncertainFamily(
        A=PolynomialMatrix(A_MATRIX),
        C=PolynomialMatrix.identity(2),
        B=IntervalPolynomialMatrix(b_rows),
        D=IntervalPolynomialMatrix(d_rows),
        n_deg=N_DEG,
    )


def manipulator_file_payload(eps: float) -> dict:
    """Family-file payload at level ``eps``, including the per-coefficient
    scaling record that enables margin search.

    Gain coefficients carry ``[center, spread]`` scaling; the inertia
    intervals are structural and do not scale, so their scale entries are
    null.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"uncertainty level {eps} outside [0, 1]")
    point_cubic = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0]]
    b = [
        [point_cubic, [[0.0, 0.0]] * 3 + [list(B12_BOUNDS)]],
        [[[0.0, 0.0]] * 3 + [list(B21_BOUNDS)], point_cubic],
    ]
    d = []
    d_scale = []
    for i in range(2):
        d_row = []
        scale_row = []
        for j in range(2):
            centers = (KR_CENTERS[i][j], KP_CENTERS[i][j], KD_CENTERS[i][j])
            d_row.append([_gain_interval(c, eps) for c in centers])
            scale_row.append([[c, abs(c)] for c in centers])
        d.append(d_row)
        d_scale.append(scale_row)
    return {
        "n": 2,
        "n_deg": N_DEG,
        "A": [[[1.0], [0.0]], [[2.0], [1.0]]],
        "C": [[[1.0], [0.0]], [[0.0], [1.0]]],
        "B": b,
        "D": d,
        "scale": {"B": [[None, None], [None, None]], "D": d_scale},
    }


EXAMPLE_BUILDERS = {"manipulator": manipulator_file_payload}
