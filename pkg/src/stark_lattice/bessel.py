"""Integer-order Bessel functions of the first kind and their positive roots.

These are the only special functions the dispersion series needs.  Evaluation
is delegated to scipy's jv (well inside the 1e-12 absolute error budget for
|z| < 1e4); negative orders are reduced with J_{-n}(z) = (-1)^n J_n(z) so the
parity identity holds exactly.  Roots are bracketed by sign changes on a
pi/4 grid (roots of J_n are separated by more than pi/4 in this regime) and
polished by Brent bisection.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize, special

__all__ = ["bessel_j", "bessel_root"]


def bessel_j(n: int, z):
    """J_n(z) for any integer n, scalar or array argument."""
    n = int(n)
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("bessel_j requires finite argument")
    if n < 0:
        out = special.jv(-n, z)
        if (-n) % 2:
            out = -out
    else:
        out = special.jv(n, z)
    return out if out.ndim else float(out)


def bessel_root(n: int, k: int) -> float:
    """k-th positive root j_{n,k} of J_n, n >= 0, k >= 1."""
    n = int(n)
    k = int(k)
    if n < 0:
        raise ValueError(f"order must be non-negative, got {n}")
    if k < 1:
        raise ValueError(f"root index must be >= 1, got {k}")
    # All positive roots of J_n lie above n; walk a pi/4 grid counting
    # sign changes until the k-th bracket is found.
    step = math.pi / 4.0
    x = n + 1e-9
    f_prev = bessel_j(n, x)
    found = 0
    while True:
        x_next = x + step
        f_next = bessel_j(n, x_next)
        if f_prev == 0.0:
            found += 1
            if found == k:
                return x
        elif f_prev * f_next < 0.0:
            found += 1
            if found == k:
                return float(optimize.brentq(lambda t: bessel_j(n, t), x, x_next,
                                             xtol=1e-12, rtol=8.9e-16))
        x, f_prev = x_next, f_next
