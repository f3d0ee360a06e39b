"""Gates for the Bessel layer against an independent power-series oracle."""

import math

import numpy as np
import pytest

from stark_lattice import bessel_j, bessel_root

# frozen high-precision roots (50-digit arbitrary-precision evaluation)
J01_ROOT = 2.404825557695773
J31_ROOT = 6.380161895923984


def j_series(n, z, tol=1e-18):
    """J_n(z) for n >= 0 by the ascending power series; independent oracle."""
    term = (z / 2.0) ** n / math.factorial(n)
    total = term
    k = 0
    while abs(term) > tol * max(1.0, abs(total)):
        k += 1
        term *= -(z / 2.0) ** 2 / (k * (n + k))
        total += term
    return total


def test_values_match_series_oracle():
    for n in range(0, 9):
        for z in (0.0, 0.3, 1.0, 2.5, 5.0, 9.7):
            assert bessel_j(n, z) == pytest.approx(j_series(n, z), abs=1e-12)
        # the alternating series cancels ~1e4 at z ~ 14, oracle good to ~1e-11
        assert bessel_j(n, 14.2) == pytest.approx(j_series(n, 14.2), abs=1e-10)


def test_negative_argument_parity():
    # J_n(-z) = (-1)^n J_n(z)
    for n in range(0, 6):
        for z in (0.7, 3.3):
            assert bessel_j(n, -z) == pytest.approx((-1) ** n * bessel_j(n, z),
                                                    abs=1e-14)


def test_negative_order_parity_exact():
    for n in range(1, 8):
        for z in (0.5, 2.0, 7.7):
            assert bessel_j(-n, z) == (-1) ** n * bessel_j(n, z)


def test_normalization_identity():
    # J_0^2 + 2 sum_{n>=1} J_n^2 = 1
    for z in (0.5, 2.0, 6.0, 12.0):
        total = bessel_j(0, z) ** 2 + 2.0 * sum(bessel_j(n, z) ** 2
                                                for n in range(1, 60))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_recurrence():
    # J_{n-1} + J_{n+1} = (2n/z) J_n
    for n in range(1, 7):
        for z in (0.9, 3.1, 8.4):
            lhs = bessel_j(n - 1, z) + bessel_j(n + 1, z)
            assert lhs == pytest.approx(2.0 * n / z * bessel_j(n, z), abs=1e-12)


def test_small_argument_scaling():
    # J_n(z) -> (z/2)^n / n! as z -> 0
    z = 1e-4
    for n in range(0, 5):
        lead = (z / 2.0) ** n / math.factorial(n)
        assert bessel_j(n, z) / lead == pytest.approx(1.0, abs=1e-7)


def test_array_argument():
    z = np.linspace(0.0, 10.0, 23)
    vals = bessel_j(2, z)
    assert vals.shape == z.shape
    assert vals[0] == 0.0


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        bessel_j(0, float("nan"))
    with pytest.raises(ValueError):
        bessel_j(1, np.array([1.0, float("inf")]))


def test_roots_match_frozen_oracle():
    assert bessel_root(0, 1) == pytest.approx(J01_ROOT, abs=1e-9)
    assert bessel_root(3, 1) == pytest.approx(J31_ROOT, abs=1e-9)


def test_roots_match_series_bisection():
    # independent confirmation: bisect the series oracle around the root
    for n, frozen in ((0, J01_ROOT), (3, J31_ROOT)):
        lo, hi = frozen - 0.5, frozen + 0.5
        assert j_series(n, lo) * j_series(n, hi) < 0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if j_series(n, lo) * j_series(n, mid) <= 0:
                hi = mid
            else:
                lo = mid
        assert bessel_root(n, 1) == pytest.approx(0.5 * (lo + hi), abs=1e-9)


def test_roots_are_roots_and_increasing():
    for n in (0, 1, 3, 5):
        prev = 0.0
        for k in (1, 2, 3):
            x = bessel_root(n, k)
            assert abs(bessel_j(n, x)) < 1e-11
            assert x > prev
            prev = x


def test_root_argument_validation():
    with pytest.raises(ValueError):
        bessel_root(-1, 1)
    with pytest.raises(ValueError):
        bessel_root(2, 0)
