"""Stability decision procedures for test problems and whole families.

Two independent sampled methods decide each test problem:

* a lambda-grid sweep that Routh-tests the member characteristic polynomial
  at every grid point (the primary method), and
* a zero-exclusion frequency sweep that checks the sampled value set of the
  family along the imaginary axis never reaches zero.

The characteristic polynomial of a test problem is jointly affine in each
slot parameter (every slot perturbs a single matrix row), so its value
anywhere on the parameter cube is the exact multilinear blend of the corner
characteristic polynomials. The grid sweep exploits this: corners are
assembled once by cofactor determinants, the grid is filled by tensor
contraction, and the Routh recursion runs vectorized over sample batches.
Cross-validation of the blend against direct assembly is part of the test
suite.

``oracle_family`` is the independent brute-force route: it grids every
uncertain coefficient of the full family box directly, assembling each
member without the corner shortcut.

Evidence that falls inside the borderline band (1e-4 relative) is reported
as marginal rather than trusted: sampled methods cannot certify boundary
cases.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .family import (
    AssumptionAViolation,
    TestProblem,
    UncertainFamily,
    assemble,
    check_assumption_a,
    enumerate_kamal_dahleh,
    enumerate_minimal,
    instantiate,
)
from .poly import Polynomial, is_hurwitz, roots_oracle

__all__ = [
    "CheckConfig",
    "Witness",
    "Verdict",
    "MarginResult",
    "CompareReport",
    "check_problem_grid",
    "check_problem_zero_exclusion",
    "check_family",
    "oracle_family",
    "margin_bisect",
    "compare_sets",
    "routh_stable_batch",
    "value_set_profile",
    "BORDERLINE_BAND",
]

# Relative band inside which sampled evidence counts as marginal.
BORDERLINE_BAND = 1e-4

_CHUNK = 65536
_MAX_MARGINAL_RECORDS = 8

_EINSUM_BY_DIM = {
    1: "ga,az->gz",
    2: "ga,hb,abz->ghz",
    3: "ga,hb,ic,abcz->ghiz",
    4: "ga,hb,ic,jd,abcdz->ghijz",
}


@dataclass(frozen=True)
class CheckConfig:
    """Sampling resolution and tolerances for the decision procedures."""

    grid_points_per_axis: int = 33
    freq_points: int = 512
    freq_max: float | None = None  # None selects the automatic root bound
    margin_tol: float = 1e-9
    method: str = "grid"  # grid | zero_exclusion | both

    def __post_init__(self):
        if self.grid_points_per_axis < 2:
            raise ValueError("grid_points_per_axis must be at least 2")
        if self.freq_points < 2:
            raise ValueError("freq_points must be at least 2")
        if self.margin_tol < 0:
            raise ValueError("margin_tol must be non-negative")
        if self.method not in ("grid", "zero_exclusion", "both"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class Witness:
    """Replayable evidence for a failed stability check."""

    kind: str  # routh | degree_drop | value_set | base_member | member
    coeffs: tuple[float, ...] = ()
    pattern: str | None = None
    problem_index: int | None = None
    lambdas: tuple[float, ...] | None = None
    omega: float | None = None
    member: dict | None = None
    unstable_roots: tuple[complex, ...] | None = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "coeffs": list(self.coeffs)}
        if self.pattern is not None:
            out["pattern"] = self.pattern
        if self.problem_index is not None:
            out["problem_index"] = self.problem_index
        if self.lambdas is not None:
            out["lambdas"] = list(self.lambdas)
        if self.omega is not None:
            out["omega"] = self.omega
        if self.member is not None:
            out["member"] = self.member
        if self.unstable_roots is not None:
            out["unstable_roots"] = [[z.real, z.imag] for z in self.unstable_roots]
        return out


@dataclass(frozen=True)
class Verdict:
    """Outcome of a stability check with enough data to replay failures."""

    stable: bool
    witness: Witness | None
    problems_checked: int
    routh_evaluations: int
    wall_time: float
    patterns: int | None = None
    marginal: tuple[dict, ...] = ()
    min_modulus: float | None = None
    min_modulus_freq: float | None = None

    def to_json(self, include_timing: bool = True) -> dict:
        out: dict = {
            "stable": self.stable,
            "patterns": self.patterns,
            "problems_checked": self.problems_checked,
            "routh_evaluations": self.routh_evaluations,
            "marginal": list(self.marginal),
        }
        if include_timing:
            out["wall_time_ms"] = self.wall_time * 1000.0
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


# --------------------------------------------------------------------------
# Vectorized Routh recursion
# --------------------------------------------------------------------------


def routh_stable_batch(
    coeffs: np.ndarray,
    margin_tol: float,
    borderline_band: float = BORDERLINE_BAND,
) -> tuple[np.ndarray, np.ndarray]:
    """Routh stability test over a batch of same-degree polynomials.

    ``coeffs`` is (N, degree+1) ascending with nonzero leading column.
    Returns boolean arrays (stable, borderline); a pivot within
    ``borderline_band`` of its row scale marks the sample borderline
    regardless of the verdict, and pivots within ``margin_tol`` of the row
    scale are treated as zero (not stable).
    """
    n, width = coeffs.shape
    d = width - 1
    if d <= 0:
        return np.ones(n, dtype=bool), np.zeros(n, dtype=bool)
    desc = coeffs[:, ::-1]
    lead = desc[:, 0]
    desc = np.where((lead < 0)[:, None], -desc, desc)
    w = (d + 2) // 2
    prev = np.zeros((n, w))
    cur = np.zeros((n, w))
    even = desc[:, 0::2]
    odd = desc[:, 1::2]
    prev[:, : even.shape[1]] = even
    cur[:, : odd.shape[1]] = odd

    stable = lead != 0.0
    borderline = np.zeros(n, dtype=bool)
    for step in range(d):
        pivot = cur[:, 0]
        rowscale = np.abs(cur).max(axis=1)
        borderline |= np.abs(pivot) <= borderline_band * rowscale
        stable &= pivot > margin_tol * rowscale
        if step == d - 1:
            break
        safe = np.where(np.abs(pivot) > margin_tol * rowscale, pivot, 1.0)
        nxt = np.empty_like(cur)
        np.multiply(prev[:, 1:], pivot[:, None], out=nxt[:, :-1])
        nxt[:, :-1] -= prev[:, 0:1] * cur[:, 1:]
        nxt[:, :-1] /= safe[:, None]
        nxt[:, -1] = 0.0
        prev, cur = cur, nxt
    return stable, borderline


# --------------------------------------------------------------------------
# Corner characteristic polynomials and grid filling
# --------------------------------------------------------------------------


def corner_characteristics(tp: TestProblem, fam: UncertainFamily) -> np.ndarray:
    """Characteristic polynomial at every corner of the slot cube.

    Returns (2**k, char_degree+1) ascending coefficients; corner index bits
    follow slot order with the last slot varying fastest.
    """
    length = fam.char_degree + 1
    k = len(tp.slots)
    out = np.zeros((2**k, length))
    for idx, bits in enumerate(itertools.product((0.0, 1.0), repeat=k)):
        bc, dc = instantiate(tp, bits)
        char = assemble(fam, bc, dc)
        if len(char.coeffs) > length:
            raise RuntimeError("characteristic degree exceeds the family bound")
        out[idx, : len(char.coeffs)] = char.coeffs
    return out


def grid_characteristics(corners: np.ndarray, k: int, grid: np.ndarray) -> np.ndarray:
    """Fill the lambda grid by exact multilinear blending of corner
    characteristics. Returns (G**k, length) in C order of the grid axes."""
    length = corners.shape[1]
    if k == 0:
        return corners.reshape(1, length)
    weights = np.column_stack([1.0 - grid, grid])
    tensor = corners.reshape((2,) * k + (length,))
    spec = _EINSUM_BY_DIM[k]
    blended = np.einsum(spec, *([weights] * k), tensor, optimize=True)
    return blended.reshape(len(grid) ** k, length)


def _lambda_tuple(flat: int, k: int, grid: np.ndarray) -> tuple[float, ...]:
    if k == 0:
        return ()
    idx = np.unravel_index(flat, (len(grid),) * k)
    return tuple(float(grid[i]) for i in idx)


def _unstable_roots(coeffs: Sequence[float]) -> tuple[complex, ...] | None:
    try:
        roots = roots_oracle(Polynomial(coeffs))
    except (ValueError, RuntimeError):
        return None
    return tuple(z for z in roots if z.real >= 0.0)


# --------------------------------------------------------------------------
# Grid sweep
# --------------------------------------------------------------------------


def _grid_status_numpy(
    chars: np.ndarray, margin_tol: float, lead_tol: float
) -> np.ndarray:
    status = np.zeros(chars.shape[0], dtype=np.uint8)
    for start in range(0, chars.shape[0], _CHUNK):
        block = chars[start : start + _CHUNK]
        ok, border = routh_stable_batch(block, margin_tol)
        bits = np.where(ok, 0, _kernels.FAIL_ROUTH).astype(np.uint8)
        bits |= np.where(border, _kernels.BORDERLINE, 0).astype(np.uint8)
        bits |= np.where(
            np.abs(block[:, -1]) <= lead_tol, _kernels.FAIL_LEAD, 0
        ).astype(np.uint8)
        status[start : start + block.shape[0]] = bits
    return status


def _blend_single(corners: np.ndarray, k: int, lambdas: Sequence[float]) -> np.ndarray:
    coeffs = corners.reshape((2,) * k + (-1,))
    for lam in lambdas:
        coeffs = (1.0 - lam) * coeffs[0] + lam * coeffs[1]
    return np.atleast_1d(coeffs)


def check_problem_grid(
    tp: TestProblem, fam: UncertainFamily, cfg: CheckConfig
) -> Verdict:
    """Routh-test the member polynomial at every point of the uniform slot
    grid (endpoints included).

    Stable only if every sample is Hurwitz and attains the full family
    degree. Grid sampling is a semidecision refined by resolution; the
    zero-exclusion sweep provides the independent cross-check. The whole
    grid is always evaluated, so reports do not depend on worker count or
    compute backend.
    """
    k = len(tp.slots)
    if k > 4:
        raise ValueError(
            f"{k} slot parameters exceed the grid guard (4); "
            "use the minimal testing set to lower the problem dimension"
        )
    t0 = time.perf_counter()
    corners = corner_characteristics(tp, fam)
    coeff_scale = max(float(np.abs(corners).max()), 1e-300)
    lead_tol = cfg.margin_tol * coeff_scale
    grid = np.linspace(0.0, 1.0, cfg.grid_points_per_axis)

    if k == 0:
        status = _grid_status_numpy(corners, cfg.margin_tol, lead_tol)
    elif _kernels.HAVE_NUMBA:
        status = _kernels.grid_scan_status(
            corners, k, grid, cfg.margin_tol, BORDERLINE_BAND, lead_tol
        )
    else:
        chars = grid_characteristics(corners, k, grid)
        status = _grid_status_numpy(chars, cfg.margin_tol, lead_tol)

    fail_mask = (status & (_kernels.FAIL_ROUTH | _kernels.FAIL_LEAD)) != 0
    witness: Witness | None = None
    if fail_mask.any():
        flat = int(np.flatnonzero(fail_mask)[0])
        lam = _lambda_tuple(flat, k, grid)
        coeffs = tuple(float(c) for c in _blend_single(corners, k, lam))
        degree_drop = bool(status[flat] & _kernels.FAIL_LEAD)
        witness = Witness(
            kind="degree_drop" if degree_drop else "routh",
            coeffs=coeffs,
            lambdas=lam,
            unstable_roots=None if degree_drop else _unstable_roots(coeffs),
        )
    marginal = tuple(
        {
            "kind": "routh_borderline",
            "lambdas": list(_lambda_tuple(int(flat), k, grid)),
        }
        for flat in np.flatnonzero(status & _kernels.BORDERLINE)[:_MAX_MARGINAL_RECORDS]
    )
    return Verdict(
        stable=witness is None,
        witness=witness,
        problems_checked=1,
        routh_evaluations=len(status),
        wall_time=time.perf_counter() - t0,
        marginal=marginal,
    )


# --------------------------------------------------------------------------
# Zero-exclusion sweep
# --------------------------------------------------------------------------


def _poly_at_imag(p: Polynomial, omegas: np.ndarray) -> np.ndarray:
    if p.is_zero:
        return np.zeros(len(omegas), dtype=complex)
    return np.polyval(list(reversed(p.coeffs)), 1j * omegas)


def _matrix_at_imag(mat, omegas: np.ndarray) -> np.ndarray:
    n = mat.order
    out = np.zeros((len(omegas), n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[:, i, j] = _poly_at_imag(mat.entries[i][j], omegas)
    return out


def _batch_complex_det(m: np.ndarray) -> np.ndarray:
    n = m.shape[-1]
    if n == 1:
        return m[..., 0, 0]
    if n == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return np.linalg.det(m)


def _auto_freq_max(corners: np.ndarray) -> float:
    # Cauchy-style root magnitude bound over the corner polynomials.
    lead = np.abs(corners[:, -1])
    lead = np.where(lead > 0, lead, 1e-300)
    ratios = np.abs(corners[:, :-1]) / lead[:, None]
    bound = 1.0 + ratios.max(axis=1)
    return float(1.0 + 2.0 * bound.max())


def _value_set_scan(
    tp: TestProblem,
    fam: UncertainFamily,
    cfg: CheckConfig,
    collect_profile: bool = False,
):
    """Shared core of the zero-exclusion sweep.

    Returns (min_ratio, min_flat_lambda, min_omega_index, omegas, grid,
    resolution_limited, profile) where ratios are value-set moduli
    normalized by the coefficient scale times max(1, omega)**degree.

    ``resolution_limited`` is set when the sampled minimum modulus at some
    frequency falls within the half-step excursion bound of the lambda grid:
    the value is affine along each slot axis, so between adjacent samples it
    can move at most the corner-to-corner swing divided by the step count,
    and a minimum inside that bound cannot certify zero exclusion at this
    resolution.
    """
    k = len(tp.slots)
    corners = corner_characteristics(tp, fam)
    coeff_scale = max(float(np.abs(corners).max()), 1e-300)
    deg = fam.char_degree

    freq_max = cfg.freq_max if cfg.freq_max is not None else _auto_freq_max(corners)
    omegas = np.linspace(0.0, freq_max, cfg.freq_points)
    scale_om = coeff_scale * np.maximum(1.0, omegas) ** deg

    # Half-step excursion bound: the sampled value set is a convex blend of
    # the corner values, so between adjacent lambda samples it moves at most
    # the per-axis corner swing over the step count, and between adjacent
    # frequencies at most the corner derivative magnitude times the step.
    corner_vals = np.empty((corners.shape[0], len(omegas)), dtype=complex)
    deriv_mag = np.zeros((corners.shape[0], len(omegas)))
    for idx in range(corners.shape[0]):
        p = Polynomial(corners[idx])
        corner_vals[idx] = _poly_at_imag(p, omegas)
        dp = Polynomial([i * c for i, c in enumerate(p.coeffs)][1:])
        deriv_mag[idx] = np.abs(_poly_at_imag(dp, omegas))
    d_omega = omegas[1] - omegas[0] if len(omegas) > 1 else 0.0
    step_bound = deriv_mag.max(axis=0) * (0.5 * d_omega)
    if k:
        spacing = cfg.grid_points_per_axis - 1
        for s in range(k):
            bit = 1 << (k - 1 - s)
            lows = [i for i in range(2**k) if not i & bit]
            swing = np.abs(corner_vals[[i | bit for i in lows]] - corner_vals[lows])
            step_bound += swing.max(axis=0) / (2.0 * spacing)

    a_eval = _matrix_at_imag(fam.A, omegas)
    c_eval = _matrix_at_imag(fam.C, omegas)
    base = (
        _matrix_at_imag(tp.fixed_B, omegas) @ a_eval
        + _matrix_at_imag(tp.fixed_D, omegas) @ c_eval
    )
    deltas = []
    for slot in tp.slots:
        dvals = _poly_at_imag(slot.edge.endpoint_a, omegas) - _poly_at_imag(
            slot.edge.endpoint_b, omegas
        )
        kmat = np.zeros_like(base)
        rhs = a_eval if slot.matrix_tag == "B" else c_eval
        kmat[:, slot.row, :] = dvals[:, None] * rhs[:, slot.col, :]
        deltas.append(kmat)

    grid = np.linspace(0.0, 1.0, cfg.grid_points_per_axis)
    total = len(grid) ** k
    lam_axes = (grid,) * k

    min_ratio = np.inf
    min_flat = 0
    min_om = 0
    min_abs_per_omega = np.full(len(omegas), np.inf)
    profile = np.full(len(omegas), np.inf) if collect_profile else None
    profile_vals = np.zeros(len(omegas), dtype=complex) if collect_profile else None

    chunk = max(1, _CHUNK // max(1, len(omegas)))
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        if k:
            idx = np.unravel_index(np.arange(start, stop), (len(grid),) * k)
            lams = np.column_stack([lam_axes[i][idx[i]] for i in range(k)])
        else:
            lams = np.zeros((stop - start, 0))
        mats = np.broadcast_to(base, (stop - start,) + base.shape).copy()
        for s, kmat in enumerate(deltas):
            mats += lams[:, s, None, None, None] * kmat
        dets = _batch_complex_det(mats)
        moduli = np.abs(dets)
        ratios = moduli / scale_om
        np.minimum(min_abs_per_omega, moduli.min(axis=0), out=min_abs_per_omega)
        if collect_profile:
            block_min = ratios.min(axis=0)
            better = block_min < profile
            if better.any():
                arg = ratios.argmin(axis=0)
                profile[better] = block_min[better]
                profile_vals[better] = dets[arg[better], np.flatnonzero(better)]
        local_flat = int(np.argmin(ratios))
        local_val = float(ratios.flat[local_flat])
        if local_val < min_ratio:
            min_ratio = local_val
            li, lj = divmod(local_flat, ratios.shape[1])
            min_flat = start + li
            min_om = lj
    resolution_limited = bool(np.any(min_abs_per_omega <= step_bound))
    return (
        min_ratio,
        min_flat,
        min_om,
        omegas,
        grid,
        resolution_limited,
        (profile, profile_vals),
    )


def check_problem_zero_exclusion(
    tp: TestProblem, fam: UncertainFamily, cfg: CheckConfig
) -> Verdict:
    """Frequency-domain check: the sampled value set of the member
    polynomial family must exclude zero at every frequency.

    Requires a stable base member (all slot parameters at zero) and constant
    degree across the family; an unstable base member yields an immediate
    unstable verdict carrying that witness. Values are computed as complex
    matrix determinants along the imaginary axis, independently of the
    Routh path.
    """
    t0 = time.perf_counter()
    k = len(tp.slots)
    base_char = assemble(fam, *instantiate(tp, (0.0,) * k))
    if not is_hurwitz(base_char, cfg.margin_tol):
        coeffs = base_char.coeffs
        return Verdict(
            stable=False,
            witness=Witness(
                kind="base_member",
                coeffs=coeffs,
                lambdas=(0.0,) * k,
                unstable_roots=_unstable_roots(coeffs),
            ),
            problems_checked=1,
            routh_evaluations=1,
            wall_time=time.perf_counter() - t0,
        )

    corners = corner_characteristics(tp, fam)
    coeff_scale = max(float(np.abs(corners).max()), 1e-300)
    lead_bad = np.abs(corners[:, -1]) <= cfg.margin_tol * coeff_scale
    if lead_bad.any():
        idx = int(np.flatnonzero(lead_bad)[0])
        bits = tuple(float((idx >> (k - 1 - s)) & 1) for s in range(k))
        return Verdict(
            stable=False,
            witness=Witness(
                kind="degree_drop",
                coeffs=tuple(float(c) for c in corners[idx]),
                lambdas=bits,
            ),
            problems_checked=1,
            routh_evaluations=1,
            wall_time=time.perf_counter() - t0,
        )

    min_ratio, min_flat, min_om, omegas, grid, limited, _ = _value_set_scan(
        tp, fam, cfg
    )
    lam = _lambda_tuple(min_flat, k, grid)
    omega = float(omegas[min_om])
    marginal: list[dict] = []
    stable = min_ratio > cfg.margin_tol
    witness = None
    if not stable:
        offending = assemble(fam, *instantiate(tp, lam))
        witness = Witness(
            kind="value_set",
            coeffs=offending.coeffs,
            lambdas=lam,
            omega=omega,
        )
    else:
        if min_ratio <= BORDERLINE_BAND:
            marginal.append(
                {
                    "kind": "value_set_borderline",
                    "min_modulus_ratio": min_ratio,
                    "omega": omega,
                    "lambdas": list(lam),
                }
            )
        if limited:
            marginal.append(
                {
                    "kind": "resolution_limited",
                    "min_modulus_ratio": min_ratio,
                    "omega": omega,
                }
            )
    return Verdict(
        stable=stable,
        witness=witness,
        problems_checked=1,
        routh_evaluations=1,
        wall_time=time.perf_counter() - t0,
        marginal=tuple(marginal),
        min_modulus=min_ratio,
        min_modulus_freq=omega,
    )


def value_set_profile(
    tp: TestProblem, fam: UncertainFamily, cfg: CheckConfig
) -> list[tuple[float, float, float, float]]:
    """Per-frequency minimum of the sampled value set, for CSV dumps:
    rows (omega, min_modulus_ratio, re, im)."""
    *_, omegas, _grid, _limited, (profile, values) = _value_set_scan(
        tp, fam, cfg, collect_profile=True
    )
    return [
        (float(w), float(r), float(v.real), float(v.imag))
        for w, r, v in zip(omegas, profile, values)
    ]


# --------------------------------------------------------------------------
# Family-level checks
# --------------------------------------------------------------------------


def _resolve_jobs(jobs: int | None) -> int:
    if jobs is not None:
        return max(1, int(jobs))
    env = os.environ.get("EDGEGUARD_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _check_one(tp: TestProblem, fam: UncertainFamily, cfg: CheckConfig) -> Verdict:
    if cfg.method == "grid":
        return check_problem_grid(tp, fam, cfg)
    if cfg.method == "zero_exclusion":
        return check_problem_zero_exclusion(tp, fam, cfg)
    g = check_problem_grid(tp, fam, cfg)
    z = check_problem_zero_exclusion(tp, fam, cfg)
    marginal = g.marginal + z.marginal
    if g.stable != z.stable:
        marginal += (
            {
                "kind": "method_disagreement",
                "grid_stable": g.stable,
                "zero_exclusion_stable": z.stable,
            },
        )
    return Verdict(
        stable=g.stable and z.stable,
        witness=g.witness or z.witness,
        problems_checked=1,
        routh_evaluations=g.routh_evaluations + z.routh_evaluations,
        wall_time=g.wall_time + z.wall_time,
        marginal=marginal,
        min_modulus=z.min_modulus,
        min_modulus_freq=z.min_modulus_freq,
    )


def _check_problems(
    problems: Sequence[TestProblem],
    fam: UncertainFamily,
    cfg: CheckConfig,
    jobs: int | None,
) -> Verdict:
    t0 = time.perf_counter()
    workers = _resolve_jobs(jobs)
    if workers > 1 and len(problems) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda tp: _check_one(tp, fam, cfg), problems))
    else:
        results = [_check_one(tp, fam, cfg) for tp in problems]

    stable = all(r.stable for r in results)
    witness = None
    marginal: list[dict] = []
    routh = 0
    for idx, (tp, r) in enumerate(zip(problems, results)):
        routh += r.routh_evaluations
        if witness is None and r.witness is not None:
            witness = Witness(
                kind=r.witness.kind,
                coeffs=r.witness.coeffs,
                pattern=tp.provenance,
                problem_index=idx,
                lambdas=r.witness.lambdas,
                omega=r.witness.omega,
                member=r.witness.member,
                unstable_roots=r.witness.unstable_roots,
            )
        for record in r.marginal:
            if len(marginal) < _MAX_MARGINAL_RECORDS:
                marginal.append(
                    {"pattern": tp.provenance, "problem_index": idx, **record}
                )
    return Verdict(
        stable=stable,
        witness=witness,
        problems_checked=len(problems),
        routh_evaluations=routh,
        wall_time=time.perf_counter() - t0,
        patterns=len({tp.provenance for tp in problems}),
        marginal=tuple(marginal),
    )


_SET_CHOICES = {
    "minimal": enumerate_minimal,
    "kd": enumerate_kamal_dahleh,
    "kamal_dahleh": enumerate_kamal_dahleh,
}


def check_family(
    fam: UncertainFamily,
    cfg: CheckConfig,
    set_choice: str = "minimal",
    jobs: int | None = None,
) -> Verdict:
    """Decide robust stability by checking every problem of a testing set.

    Raises ``AssumptionAViolation`` when the leading coefficient matrix can
    go singular (degree dropping invalidates the edge reduction). Every
    problem is always checked, in enumeration order, so reports are
    identical for any worker count.
    """
    if set_choice not in _SET_CHOICES:
        raise ValueError(f"unknown testing set {set_choice!r}")
    assumption = check_assumption_a(fam)
    if not assumption.holds:
        raise AssumptionAViolation(assumption)
    problems = _SET_CHOICES[set_choice](fam)
    return _check_problems(problems, fam, cfg, jobs)


# --------------------------------------------------------------------------
# Brute-force oracle over the full coefficient box
# --------------------------------------------------------------------------


def _batch_conv_fixed(a: np.ndarray, fixed: Sequence[float]) -> np.ndarray:
    """Convolve batch polynomials (N, la) with one fixed polynomial."""
    la = a.shape[1]
    lf = len(fixed)
    if lf == 0:
        return np.zeros((a.shape[0], 1))
    out = np.zeros((a.shape[0], la + lf - 1))
    for j, c in enumerate(fixed):
        if c != 0.0:
            out[:, j : j + la] += c * a
    return out


def _batch_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolve two batches of polynomials along axis 1."""
    la, lb = a.shape[1], b.shape[1]
    out = np.zeros((a.shape[0], la + lb - 1))
    for j in range(lb):
        out[:, j : j + la] += a * b[:, j : j + 1]
    return out


def _pad_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == b.shape[1]:
        return a + b
    width = max(a.shape[1], b.shape[1])
    out = np.zeros((a.shape[0], width))
    out[:, : a.shape[1]] += a
    out[:, : b.shape[1]] += b
    return out


def _batch_poly_det(rows: list[list[np.ndarray]]) -> np.ndarray:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc: np.ndarray | None = None
    for j in range(n):
        entry = rows[0][j]
        if not np.any(entry):
            continue
        minor = [
            [rows[i][jj] for jj in range(n) if jj != j] for i in range(1, n)
        ]
        term = _batch_conv(entry, _batch_poly_det(minor))
        if j % 2:
            term = -term
        acc = term if acc is None else _pad_add(acc, term)
    if acc is None:
        return np.zeros((rows[0][0].shape[0], 1))
    return acc


def _family_parameters(fam: UncertainFamily):
    params = []
    for tag, mat in (("B", fam.B), ("D", fam.D)):
        for i in range(fam.order):
            for j in range(fam.order):
                ip = mat.entry(i, j)
                for p in range(ip.degree_bound + 1):
                    lo, hi = ip.bound(p)
                    if lo != hi:
                        params.append((tag, i, j, p, lo, hi))
    return params


def oracle_family(
    fam: UncertainFamily,
    cfg: CheckConfig,
    points_per_coeff: int = 3,
    budget: int = 10_000_000,
    jobs: int | None = None,
) -> Verdict:
    """Brute-force sweep of the full coefficient box.

    Every uncertain coefficient of B and D is gridded at ``points_per_coeff``
    values (endpoints included); each member is assembled directly and
    Routh-tested. Independent of the testing-set reductions; used to
    validate them empirically. Raises ``ValueError`` when the grid exceeds
    ``budget`` members.
    """
    if points_per_coeff < 2:
        raise ValueError("points_per_coeff must be at least 2")
    t0 = time.perf_counter()
    n = fam.order
    params = _family_parameters(fam)
    m = len(params)
    total = points_per_coeff**m if m else 1
    if total > budget:
        raise ValueError(
            f"oracle grid of {total} members exceeds budget {budget}; "
            "reduce points_per_coeff"
        )

    a_polys = [[list(fam.A.entries[k][j].coeffs) for j in range(n)] for k in range(n)]
    c_polys = [[list(fam.C.entries[k][j].coeffs) for j in range(n)] for k in range(n)]
    base_b = np.zeros((n, n, fam.n_deg + 1))
    base_d = np.zeros((n, n, fam.n_deg + 1))
    for tag, mat, store in (("B", fam.B, base_b), ("D", fam.D, base_d)):
        for i in range(n):
            for j in range(n):
                ip = mat.entry(i, j)
                for p in range(fam.n_deg + 1):
                    lo, hi = ip.bound(p)
                    store[i, j, p] = 0.5 * (lo + hi)

    values = [
        np.linspace(lo, hi, points_per_coeff) for (*_ignore, lo, hi) in params
    ]
    strides = [points_per_coeff ** (m - 1 - p) for p in range(m)]
    length = fam.char_degree + 1
    coeff_scale_hint = max(
        1e-300,
        float(np.abs(base_b).max() + np.abs(base_d).max()),
    )

    evaluated = 0
    witness: Witness | None = None
    marginal: list[dict] = []
    stable = True
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        count = stop - start
        flat = np.arange(start, stop)
        bmats = np.broadcast_to(base_b, (count,) + base_b.shape).copy()
        dmats = np.broadcast_to(base_d, (count,) + base_d.shape).copy()
        for p, (tag, i, j, power, _lo, _hi) in enumerate(params):
            sel = (flat // strides[p]) % points_per_coeff
            target = bmats if tag == "B" else dmats
            target[:, i, j, power] = values[p][sel]

        rows: list[list[np.ndarray]] = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = np.zeros((count, 1))
                for k in range(n):
                    acc = _pad_add(acc, _batch_conv_fixed(bmats[:, i, k, :], a_polys[k][j]))
                    acc = _pad_add(acc, _batch_conv_fixed(dmats[:, i, k, :], c_polys[k][j]))
                row.append(acc)
            rows.append(row)
        width = max(e.shape[1] for row in rows for e in row)
        rows = [
            [np.pad(e, ((0, 0), (0, width - e.shape[1]))) for e in row]
            for row in rows
        ]
        chars = _batch_poly_det(rows)
        if chars.shape[1] < length:
            chars = np.pad(chars, ((0, 0), (0, length - chars.shape[1])))
        else:
            chars = chars[:, :length]
        evaluated += count

        scale = max(float(np.abs(chars).max()), coeff_scale_hint)
        lead_bad = np.abs(chars[:, -1]) <= cfg.margin_tol * scale
        ok, border = routh_stable_batch(chars, cfg.margin_tol)
        fail = lead_bad | ~ok
        if border.any() and len(marginal) < _MAX_MARGINAL_RECORDS:
            for local in np.flatnonzero(border)[:_MAX_MARGINAL_RECORDS]:
                if len(marginal) >= _MAX_MARGINAL_RECORDS:
                    break
                marginal.append(
                    {
                        "kind": "routh_borderline",
                        "member": _decode_member(start + int(local), params, values, strides, points_per_coeff),
                    }
                )
        if fail.any():
            local = int(np.flatnonzero(fail)[0])
            coeffs = tuple(float(c) for c in chars[local])
            kind = "degree_drop" if lead_bad[local] else "member"
            witness = Witness(
                kind=kind,
                coeffs=coeffs,
                member=_decode_member(start + local, params, values, strides, points_per_coeff),
                unstable_roots=None if kind == "degree_drop" else _unstable_roots(coeffs),
            )
            stable = False
            break
    return Verdict(
        stable=stable,
        witness=witness,
        problems_checked=evaluated,
        routh_evaluations=evaluated,
        wall_time=time.perf_counter() - t0,
        patterns=None,
        marginal=tuple(marginal),
    )


def _decode_member(flat, params, values, strides, points):
    member = {}
    for p, (tag, i, j, power, _lo, _hi) in enumerate(params):
        sel = (flat // strides[p]) % points
        member[f"{tag}[{i + 1}][{j + 1}]^{power}"] = float(values[p][sel])
    return member


# --------------------------------------------------------------------------
# Margin search and strategy comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginResult:
    """Largest uncertainty level found robustly stable, with its bracket."""

    eps_star: float
    last_stable: float
    first_unstable: float | None
    evaluations: int

    def __float__(self) -> float:
        return self.eps_star


def margin_bisect(
    family_at: Callable[[float], UncertainFamily],
    cfg: CheckConfig,
    eps_lo: float = 0.0,
    eps_hi: float = 1.0,
    tol: float = 1e-3,
    set_choice: str = "minimal",
    decision: Callable[[UncertainFamily], bool] | None = None,
    jobs: int | None = None,
) -> MarginResult:
    """Bisect the uncertainty level for the largest robustly stable family.

    ``family_at`` maps a level eps to the family at that level; the families
    must be nested (intervals expand monotonically with eps), which makes
    the stable set an interval and bisection valid. Marginal verdicts and
    leading-matrix violations count as unstable. Returns ``eps_hi`` when the
    family stays stable throughout; raises ``ValueError`` when it is already
    unstable at ``eps_lo``.
    """
    evaluations = 0

    def stable_at(eps: float) -> bool:
        nonlocal evaluations
        evaluations += 1
        fam = family_at(eps)
        if decision is not None:
            return bool(decision(fam))
        try:
            verdict = check_family(fam, cfg, set_choice, jobs=jobs)
        except AssumptionAViolation:
            return False
        return verdict.stable and not verdict.marginal

    if not stable_at(eps_lo):
        raise ValueError(f"family is unstable at the lower level {eps_lo}")
    if stable_at(eps_hi):
        return MarginResult(eps_hi, eps_hi, None, evaluations)
    lo, hi = eps_lo, eps_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable_at(mid):
            lo = mid
        else:
            hi = mid
    return MarginResult(lo, lo, hi, evaluations)


@dataclass(frozen=True)
class CompareReport:
    """Side-by-side statistics of the testing-set strategies."""

    rows: tuple[dict, ...]
    verdicts_agree: bool


def compare_sets(
    fam: UncertainFamily,
    cfg: CheckConfig,
    include_oracle: bool = True,
    oracle_points: int = 3,
    oracle_budget: int = 10_000_000,
    jobs: int | None = None,
) -> CompareReport:
    """Run the minimal set, the Kamal-Dahleh set, and (budget permitting)
    the brute-force oracle on one family and tabulate their costs."""
    assumption = check_assumption_a(fam)
    if not assumption.holds:
        raise AssumptionAViolation(assumption)

    rows: list[dict] = []
    verdicts: list[bool] = []
    for name, enumerator in (("minimal", enumerate_minimal), ("kd", enumerate_kamal_dahleh)):
        problems = enumerator(fam)
        verdict = _check_problems(problems, fam, cfg, jobs)
        rows.append(
            {
                "set": name,
                "stable": verdict.stable,
                "patterns": verdict.patterns,
                "problems": len(problems),
                "max_dimension": max((tp.dimension for tp in problems), default=0),
                "routh_evaluations": verdict.routh_evaluations,
                "wall_time": verdict.wall_time,
                "marginal": len(verdict.marginal),
            }
        )
        verdicts.append(verdict.stable)

    if include_oracle:
        try:
            verdict = oracle_family(
                fam, cfg, points_per_coeff=oracle_points, budget=oracle_budget, jobs=jobs
            )
        except ValueError as exc:
            rows.append({"set": "oracle", "skipped": str(exc)})
        else:
            rows.append(
                {
                    "set": "oracle",
                    "stable": verdict.stable,
                    "patterns": None,
                    "problems": verdict.problems_checked,
                    "max_dimension": None,
                    "routh_evaluations": verdict.routh_evaluations,
                    "wall_time": verdict.wall_time,
                    "marginal": len(verdict.marginal),
                }
            )
            verdicts.append(verdict.stable)

    return CompareReport(tuple(rows), len(set(verdicts)) == 1)
