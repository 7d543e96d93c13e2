"""Compiled hot path for the lambda-grid Routh sweep.

The kernel fuses the multilinear corner blend with the Routh recursion so
each grid sample is handled in registers, and parallelizes over the
outermost grid axis. Problems carry at most four slots; lower-dimensional
problems are padded with unit axes. When numba is unavailable the caller
falls back to the vectorized numpy sweep, which produces the same status
codes.

Status bits per sample: 1 = Routh rejected, 2 = borderline pivot seen,
4 = leading coefficient vanished (degree drop).
"""

from __future__ import annotations

import os
import threading

import numpy as np

# The default threading-layer probe can warn about stale TBB builds; the
# built-in workqueue layer is always present and plenty for this kernel.
# It is not threadsafe, so kernel entry is serialized below.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

_KERNEL_LOCK = threading.Lock()

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

    prange = range

FAIL_ROUTH = 1
BORDERLINE = 2
FAIL_LEAD = 4


@njit(cache=True)
def _routh_bits(buf, d, margin_tol, band, lead_tol, prev, cur):
    bits = 0
    if abs(buf[d]) <= lead_tol:
        bits |= FAIL_LEAD
    if buf[d] < 0.0:
        for t in range(d + 1):
            buf[t] = -buf[t]
    w = (d + 2) // 2
    for t in range(w):
        idx = d - 2 * t
        prev[t] = buf[idx] if idx >= 0 else 0.0
        idx = d - 1 - 2 * t
        cur[t] = buf[idx] if idx >= 0 else 0.0
    for step in range(d):
        pivot = cur[0]
        rowscale = 0.0
        for t in range(w):
            v = abs(cur[t])
            if v > rowscale:
                rowscale = v
        if abs(pivot) <= band * rowscale:
            bits |= BORDERLINE
        if not (pivot > margin_tol * rowscale):
            bits |= FAIL_ROUTH
        if step == d - 1:
            break
        safe = pivot if abs(pivot) > margin_tol * rowscale else 1.0
        p0 = prev[0]
        for t in range(w - 1):
            prev[t] = (pivot * prev[t + 1] - p0 * cur[t + 1]) / safe
        prev[w - 1] = 0.0
        tmp = prev
        prev = cur
        cur = tmp
    return bits


@njit(cache=True, parallel=True)
def _grid_scan(corners, wgs, gs, margin_tol, band, lead_tol, status):
    # corners: (16, L) corner polynomials, slot axes padded to four with the
    # dummy axes leading; wgs: (4, Gmax, 2) per-axis blend weights; gs: (4,)
    # axis lengths; status: (prod(gs),) uint8 output.
    length = corners.shape[1]
    d = length - 1
    w = (d + 2) // 2
    g0, g1, g2, g3 = gs[0], gs[1], gs[2], gs[3]
    for a in prange(g0):
        t1 = np.empty((8, length))
        t2 = np.empty((4, length))
        t3 = np.empty((2, length))
        buf = np.empty(length)
        prev = np.empty(w)
        cur = np.empty(w)
        wa0 = wgs[0, a, 0]
        wa1 = wgs[0, a, 1]
        for r in range(8):
            for t in range(length):
                t1[r, t] = wa0 * corners[r, t] + wa1 * corners[8 + r, t]
        for b in range(g1):
            wb0 = wgs[1, b, 0]
            wb1 = wgs[1, b, 1]
            for r in range(4):
                for t in range(length):
                    t2[r, t] = wb0 * t1[r, t] + wb1 * t1[4 + r, t]
            for c in range(g2):
                wc0 = wgs[2, c, 0]
                wc1 = wgs[2, c, 1]
                for r in range(2):
                    for t in range(length):
                        t3[r, t] = wc0 * t2[r, t] + wc1 * t2[2 + r, t]
                base = ((a * g1 + b) * g2 + c) * g3
                for e in range(g3):
                    we0 = wgs[3, e, 0]
                    we1 = wgs[3, e, 1]
                    for t in range(length):
                        buf[t] = we0 * t3[0, t] + we1 * t3[1, t]
                    status[base + e] = _routh_bits(
                        buf, d, margin_tol, band, lead_tol, prev, cur
                    )


def grid_scan_status(
    corners: np.ndarray,
    k: int,
    grid: np.ndarray,
    margin_tol: float,
    band: float,
    lead_tol: float,
) -> np.ndarray:
    """Status codes for every sample of the k-axis lambda grid (C order).

    ``corners`` is (2**k, L) with the last slot's corner bit fastest.
    """
    if not 1 <= k <= 4:
        raise ValueError("kernel supports 1 to 4 slot axes")
    length = corners.shape[1]
    tensor = corners.reshape((1,) * (4 - k) + (2,) * k + (length,))
    padded = np.ascontiguousarray(
        np.broadcast_to(tensor, (2, 2, 2, 2, length)).reshape(16, length)
    )
    g = len(grid)
    gmax = max(g, 1)
    wgs = np.zeros((4, gmax, 2))
    gs = np.ones(4, dtype=np.int64)
    for axis in range(4):
        if axis < 4 - k:
            wgs[axis, 0] = (1.0, 0.0)
        else:
            gs[axis] = g
            wgs[axis, :g, 0] = 1.0 - grid
            wgs[axis, :g, 1] = grid
    status = np.empty(int(np.prod(gs)), dtype=np.uint8)
    with _KERNEL_LOCK:
        _grid_scan(padded, wgs, gs, margin_tol, band, lead_tol, status)
    return status
