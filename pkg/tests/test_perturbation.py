import numpy as np
import pytest

from stark_lattice import (
    DegenerateOrientationError,
    LatticeSpec,
    NoDispersiveTermError,
    bessel_j,
    bessel_root,
    collapse_predict,
    dispersion_analytic,
    enumerate_terms,
    flat_ladder,
    flat_ladder_spacing,
    kappa_grid,
    make_tilt,
    mean_X,
    second_order_mean,
    width_analytic,
)


def terms_as_tuples(tilt, order):
    return [(t.n, t.m, t.harmonic, t.parity, t.amplitude_sign)
            for t in enumerate_terms(tilt, order)]


def test_term_enumeration_2_1_order_7():
    tilt = make_tilt(2, 1, 2.0)
    assert terms_as_tuples(tilt, 7) == [
        (-1, 0, 0, "odd", 1),
        (0, -3, 5, "odd", 1),
        (-2, 3, -5, "odd", -1),
        (1, -6, 10, "odd", -1),
    ]


def test_term_enumeration_3_1():
    # constraint 2m = -4(1+n): mixed parity, both harmonics signs
    tilt = make_tilt(3, 1, 2.0)
    got = terms_as_tuples(tilt, 6)
    assert (-1, 0, 0, "odd", 1) in got
    assert any(t[:3] == (0, -2, 5) for t in got)
    assert any(t[:3] == (-2, 2, -5) for t in got)
    parities = {t[3] for t in got}
    assert parities == {"odd", "even"}


def test_term_order_cutoff():
    tilt = make_tilt(2, 1, 2.0)
    assert all(abs(t.n) + abs(t.m) <= 3 for t in enumerate_terms(tilt, 3))
    assert len(enumerate_terms(tilt, 1)) == 1


def test_mean_x_matches_explicit_four_term_form():
    # hand-written four-term series for (2, 1), all Bessel orders positive
    rng = np.random.default_rng(42)
    lat = LatticeSpec(1.0, 0.5, 0.25)
    for _ in range(20):
        F = rng.uniform(1.0, 8.0)
        kap = rng.uniform(0.0, 7.0)
        tilt = make_tilt(2, 1, F, lat)
        d = tilt.d
        z1 = 8.0 * lat.t1 / (F * d)
        z2 = 4.0 * (lat.t2 + lat.t3) / (3.0 * F * d)
        explicit = (lat.t3 - lat.t2) * (
            bessel_j(0, z1) * bessel_j(1, z2)
            + bessel_j(3, z1) * bessel_j(0, z2) * np.cos(5 * kap * d)
            - bessel_j(3, z1) * bessel_j(2, z2) * np.cos(5 * kap * d)
            - bessel_j(6, z1) * bessel_j(1, z2) * np.cos(10 * kap * d)
        )
        got = mean_X(lat, tilt, kap, max_order=7)
        assert abs(got - explicit) < 1e-12


def test_mean_x_real_for_odd_index_sum():
    lat = LatticeSpec(1.0, 0.5, 0.25)
    tilt = make_tilt(2, 1, 2.3, lat)
    X = mean_X(lat, tilt, np.linspace(0, 6, 30))
    assert np.abs(X.imag).max() < 1e-15


def test_mean_x_complex_for_odd_odd_direction():
    lat = LatticeSpec(1.0, 0.5, -0.3)
    tilt = make_tilt(3, 1, 2.0, lat)
    X = mean_X(lat, tilt, 0.7, max_order=8)
    assert abs(X.imag) > 1e-6


def test_mean_x_rejects_degenerate_direction():
    lat = LatticeSpec(1.0, 0.5, 0.25)
    with pytest.raises(DegenerateOrientationError):
        mean_X(lat, make_tilt(1, 1, 2.0, lat), 0.3)


def second_order_quadrature(lat, tilt, kappa, n=8192):
    """Spectral-quadrature oracle for the second-order mean.

    X(chi) is built in closed form from the generating-function angles and
    Fourier-analyzed; the mean is -(2/d) sum_w |X_w|^2 / w over the nonzero
    half-integer harmonics w/2 of the chain frequency.
    """
    r, q, F, d = tilt.r, tilt.q, tilt.F, tilt.d
    z1 = 8.0 * lat.t1 / (F * d * (r - q))
    z2 = 4.0 * (lat.t2 + lat.t3) / (F * d * (r + q))
    chi = np.arange(n) * (4.0 * np.pi / d) / n
    M = ((q - r) * d * chi - (r + q) * d * kappa) / 2.0
    P = ((r + q) * d * chi + (q - r) * d * kappa) / 2.0
    X = -1j * (lat.t3 - lat.t2) * np.sin(P) * np.exp(
        -1j * z1 * np.sin(M) + 1j * z2 * np.sin(P))
    Xw = np.fft.fft(X) / n
    w = np.arange(1, n // 2)
    total = np.sum(np.abs(Xw[1:n // 2]) ** 2 / w
                   - np.abs(Xw[n - 1:n // 2:-1]) ** 2 / w)
    return -(2.0 / d) * float(total)


def test_second_order_matches_quadrature_oracle():
    lat = LatticeSpec(1.0, 0.5, -0.3)
    tilt = make_tilt(3, 1, 2.0, lat)
    for kap in (0.1, 0.5, 1.1, 2.3):
        got = second_order_mean(lat, tilt, kap, max_order=20)
        assert got == pytest.approx(second_order_quadrature(lat, tilt, kap),
                                    abs=1e-7)


def test_second_order_vanishes_for_odd_index_sum():
    lat = LatticeSpec(1.0, 0.5, 0.25)
    tilt = make_tilt(2, 1, 2.3, lat)
    assert abs(second_order_mean(lat, tilt, 0.3, max_order=10)) < 1e-15


def test_second_order_vanishes_for_equal_t2_t3():
    lat = LatticeSpec(1.0, 0.4, 0.4)
    tilt = make_tilt(3, 1, 2.0, lat)
    assert abs(second_order_mean(lat, tilt, 0.8)) < 1e-15


def test_dispersion_branch_kinds():
    lat = LatticeSpec(1.0, 0.5, 0.25)
    kap = np.linspace(0, 2, 8)
    assert dispersion_analytic(lat, make_tilt(2, 1, 2.0, lat), kap).branch_kind == "generic"
    assert dispersion_analytic(lat, make_tilt(1, 1, 2.0, lat), kap).branch_kind == "diagonal_a2"
    assert dispersion_analytic(lat, make_tilt(1, -1, 2.0, lat), kap).branch_kind == "antidiagonal_a3"


def test_diagonal_closed_form_value():
    lat = LatticeSpec(1.0, 0.5, 0.25)
    F = 6.0
    tilt = make_tilt(1, 1, F, lat)
    kap = np.array([0.0, 0.9])
    disp = dispersion_analytic(lat, tilt, kap)
    z = 2.0 * (lat.t2 + lat.t3) / (F * tilt.d)
    want = np.sqrt((lat.t2 - lat.t3) ** 2 * bessel_j(1, z) ** 2
                   + 4.0 * lat.t1 ** 2 * np.cos(kap * tilt.d) ** 2)
    assert np.allclose(disp.e_plus, want, atol=1e-14)
    assert np.allclose(disp.e_minus, -want, atol=1e-14)


def test_antidiagonal_closed_form_value():
    lat = LatticeSpec(1.0, 0.5, 0.0)
    F = 6.0
    tilt = make_tilt(1, -1, F, lat)
    kap = np.array([0.3, 1.2])
    disp = dispersion_analytic(lat, tilt, kap)
    z = 4.0 * lat.t1 / (F * tilt.d)
    want = np.sqrt((lat.t2 - lat.t3) ** 2 * bessel_j(0, z) ** 2
                   * np.sin(kap * tilt.d) ** 2
                   + (lat.t2 + lat.t3) ** 2 * np.cos(kap * tilt.d) ** 2)
    assert np.allclose(disp.e_plus, want, atol=1e-14)


def test_two_term_truncation_keeps_leading_harmonic():
    lat = LatticeSpec(1.0, 0.5, 0.25)
    tilt = make_tilt(2, 1, 3.0, lat)
    kap = kappa_grid(tilt, 64)
    d2 = dispersion_analytic(lat, tilt, kap, n_terms=2)
    d4 = dispersion_analytic(lat, tilt, kap)
    assert width_analytic(d2) > 0
    # truncation changes the curve but stays close at moderate F
    assert width_analytic(d2) == pytest.approx(width_analytic(d4), rel=0.2)


def test_flat_ladder_values():
    tilt = make_tilt(2, 1, 1.6)
    for p in (-2, 0, 3):
        assert flat_ladder(tilt, p) == pytest.approx(p * flat_ladder_spacing(tilt),
                                                     rel=1e-15)


def test_collapse_closed_form():
    lat = LatticeSpec(1.0, 0.25, -0.25)
    tilt = make_tilt(2, 1, 2.0, lat)
    got = collapse_predict(lat, tilt, 2)
    want1 = 8.0 * lat.t1 / (bessel_root(3, 1) * tilt.d)
    want2 = 8.0 * lat.t1 / (bessel_root(3, 2) * tilt.d)
    assert got[0] == pytest.approx(want1, rel=1e-12)
    assert got[1] == pytest.approx(want2, rel=1e-12)
    assert collapse_predict(lat, tilt, 0) == []


def test_collapse_numeric_fallback_near_pi_flux():
    # slightly detuned from t3 = -t2: collapses move but stay near the
    # closed-form locations
    lat = LatticeSpec(1.0, 0.25, -0.2)
    tilt = make_tilt(2, 1, 2.0, lat)
    exact = collapse_predict(LatticeSpec(1.0, 0.25, -0.25), tilt, 1)[0]
    got = collapse_predict(lat, tilt, 1, f_window=(1.0, 4.0), n_grid=120)
    assert len(got) == 1
    assert got[0] == pytest.approx(exact, abs=0.2)


def test_collapse_requires_dispersive_term():
    lat = LatticeSpec(1.0, 0.25, -0.25)
    tilt = make_tilt(2, 1, 2.0, lat)
    with pytest.raises(NoDispersiveTermError):
        collapse_predict(lat, tilt, 1, max_order=0)
