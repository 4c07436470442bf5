"""Hyperbolic helpers with removable singularities at the origin."""

from __future__ import annotations

from math import factorial

import numpy as np

# sinh(r)/r is well conditioned away from 0; only r == 0 needs care.
_SINHC_SWITCH = 1e-6

# cosh(r) - sinh(r)/r cancels catastrophically for small r, so the series is
# used on a generous interval and carried to high order.
_F_SWITCH = 0.5
_F_TERMS = 12
_F_COEFFS = np.array([2 * k / factorial(2 * k + 1) for k in range(1, _F_TERMS + 1)])


def sinhc(r):
    """sinh(r)/r, equal to 1 at r = 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SINHC_SWITCH
    safe = np.where(small, 1.0, r)
    r2 = r * r
    out = np.where(small, 1.0 + r2 / 6.0 + r2 * r2 / 120.0, np.sinh(safe) / safe)
    return out[()] if out.ndim == 0 else out


def f_over_r2(r):
    """(cosh r - sinh(r)/r) / r**2, equal to 1/3 at r = 0."""
    r = np.asarray(r, dtype=float)
    r2 = r * r
    small = np.abs(r) < _F_SWITCH
    series = np.polynomial.polynomial.polyval(r2, _F_COEFFS)
    safe = np.where(small, 1.0, r)
    direct = (np.cosh(safe) - np.sinh(safe) / safe) / (safe * safe)
    out = np.where(small, series, direct)
    return out[()] if out.ndim == 0 else out


def F_factor(norm_xi):
    """cosh(t) - sinh(t)/t, the coefficient appearing in the fiber frame on Phi(L).

    Vanishes quadratically at the zero section (t**2/3 + t**4/30 + ...).
    """
    r = np.asarray(norm_xi, dtype=float)
    out = r * r * f_over_r2(r)
    return out[()] if out.ndim == 0 else out
