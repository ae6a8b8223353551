"""One-dimensional search helpers for unimodal objectives."""

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_max(f, lo, hi, tol=1e-9):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Returns ``(x, f(x))``. The endpoints are compared against the interior
    result, so a maximizer sitting on the boundary is returned exactly.
    """
    a, b = float(lo), float(hi)
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = a + INV_PHI2 * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = a + INV_PHI2 * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    for edge in (float(lo), float(hi)):
        fe = f(edge)
        if fe > fx:
            x, fx = edge, fe
    return x, fx


def unimodality_violation(values):
    """Largest dip below a unimodal envelope, relative to the peak value.

    A sequence is unimodal (every super-level set is a contiguous run of
    indices) iff it is non-decreasing up to its argmax and non-increasing
    after it. Returns 0.0 for a unimodal sequence.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 0.0
    peak = int(np.argmax(v))
    scale = max(abs(float(v[peak])), np.finfo(float).tiny)
    left = np.maximum.accumulate(v[: peak + 1])
    right = np.maximum.accumulate(v[peak:][::-1])[::-1]
    dip_left = float(np.max(left - v[: peak + 1]))
    dip_right = float(np.max(right - v[peak:]))
    return max(dip_left, dip_right) / scale


def is_unimodal(values, rtol=1e-12):
    return unimodality_violation(values) <= rtol
