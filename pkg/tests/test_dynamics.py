import numpy as np
import pytest

from stark_lattice import (
    BoundaryContaminationError,
    LatticeSpec,
    WavepacketState,
    build_lattice,
    chain_equivalence_residual,
    initial_packet,
    make_tilt,
    propagate,
)
from stark_lattice.dynamics import (
    apply_hamiltonian,
    max_time_step,
    plane_wave_residual,
)

LAT = LatticeSpec(1.0, 0.5, 0.25)
TILT = make_tilt(2, 1, 2.3, LAT)


@pytest.fixture(scope="module")
def patch():
    return build_lattice(LAT, TILT, 32, 32)


def test_rejects_undersized_patch():
    with pytest.raises(ValueError):
        build_lattice(LAT, TILT, 16, 32)


def test_plane_wave_consistency(patch):
    rng = np.random.default_rng(3)
    for kap in rng.uniform(0, 2 * np.pi / TILT.d, 5):
        assert plane_wave_residual(patch, float(kap)) < 1e-12


def test_neighbor_longitudinal_offsets(patch):
    # the four B neighbors of an A site sit at xi shifts {-q, -r, -q-r, 0}*d
    # plus the sublattice offset d(r+q)/2
    d, r, q = TILT.d, TILT.r, TILT.q
    i, j = 16, 16
    xi_a = patch.xi[i, j, 0]
    off = d * (r + q) / 2.0
    assert patch.xi[i, j - 1, 1] == pytest.approx(xi_a - q * d + off, abs=1e-12)
    assert patch.xi[i - 1, j, 1] == pytest.approx(xi_a - r * d + off, abs=1e-12)
    assert patch.xi[i - 1, j - 1, 1] == pytest.approx(xi_a - (q + r) * d + off,
                                                     abs=1e-12)
    assert patch.xi[i, j, 1] == pytest.approx(xi_a + off, abs=1e-12)


def test_zero_hopping_hamiltonian_is_onsite():
    lat0 = LatticeSpec(0.0, 0.0, 0.0)
    patch0 = build_lattice(lat0, TILT, 32, 32)
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(patch0.shape) + 1j * rng.standard_normal(patch0.shape)
    out = apply_hamiltonian(patch0, psi)
    assert np.allclose(out, patch0.onsite * psi, atol=1e-14)


def test_apply_hamiltonian_hermitian(patch):
    rng = np.random.default_rng(6)
    a = rng.standard_normal(patch.shape) + 1j * rng.standard_normal(patch.shape)
    b = rng.standard_normal(patch.shape) + 1j * rng.standard_normal(patch.shape)
    lhs = np.vdot(a, apply_hamiltonian(patch, b))
    rhs = np.vdot(apply_hamiltonian(patch, a), b)
    assert lhs == pytest.approx(rhs, abs=1e-9 * abs(lhs))


def test_single_site_packet(patch):
    state = initial_packet(patch, "single_site")
    assert state.norm == pytest.approx(1.0, abs=1e-15)
    assert np.count_nonzero(state.amplitudes) == 1


def test_single_site_stationary_without_hopping():
    lat0 = LatticeSpec(0.0, 0.0, 0.0)
    patch0 = build_lattice(lat0, TILT, 32, 32)
    state = initial_packet(patch0, "single_site")
    traj = propagate(state, patch0, 1.0)
    assert np.abs(np.abs(state.amplitudes).max() - 1.0) < 1e-12
    assert np.ptp(traj.sigma_eta) < 1e-12


def test_gaussian_packet_momentum(patch):
    kappa0 = np.pi / (10.0 * TILT.d)
    state = initial_packet(patch, "gaussian", sigma=2.0, kappa0=kappa0)
    assert state.norm == pytest.approx(1.0, abs=1e-12)
    # a cell shift along (q, -r) is purely transverse with eta step
    # d (r^2 + q^2); the phase of its overlap measures <kappa>
    psi = state.amplitudes
    shifted = np.roll(psi, shift=(-TILT.q, TILT.r), axis=(0, 1))
    step = TILT.d * (TILT.r ** 2 + TILT.q ** 2)
    measured = np.angle(np.vdot(psi, shifted)) / step
    assert measured == pytest.approx(kappa0, rel=0.05)


def test_gaussian_packet_margin(patch):
    with pytest.raises(ValueError):
        initial_packet(patch, "gaussian", sigma=5.0)
    with pytest.raises(ValueError):
        initial_packet(patch, "gaussian", sigma=-1.0)
    with pytest.raises(ValueError):
        initial_packet(patch, "unknown")


def test_propagate_gates(patch):
    state = initial_packet(patch, "gaussian", sigma=2.0)
    with pytest.raises(ValueError):
        propagate(state, patch, 1.0, dt=10.0 * max_time_step(patch))
    traj = propagate(state, patch, 2.0)
    assert traj.norm_drift < 1e-6
    assert traj.energy_drift < 1e-8
    assert np.all(traj.sigma_eta >= 0)
    assert len(traj.times) >= 100


def test_boundary_contamination_detected(patch):
    psi = np.zeros(patch.shape, dtype=complex)
    psi[0, 5, 0] = 1.0
    with pytest.raises(BoundaryContaminationError):
        propagate(WavepacketState(psi), patch, 1.0)


def test_chebyshev_matches_rk4(patch):
    state_a = initial_packet(patch, "gaussian", sigma=2.0, kappa0=0.4)
    state_b = WavepacketState(state_a.amplitudes.copy())
    propagate(state_a, patch, 1.5)
    propagate(state_b, patch, 1.5, dt=max_time_step(patch))
    assert np.linalg.norm(state_a.amplitudes - state_b.amplitudes) < 1e-8


def test_longitudinal_localization():
    patch = build_lattice(LAT, TILT, 48, 48)
    kappa0 = np.pi / (10.0 * TILT.d)
    state = initial_packet(patch, "gaussian", sigma=2.5, kappa0=kappa0)
    traj = propagate(state, patch, 10.0)
    early = traj.sigma_xi[np.searchsorted(traj.times, 1.0)]
    assert traj.sigma_xi.max() <= 3.0 * early
    # transverse width grows while the longitudinal one stays put
    assert traj.sigma_eta[-1] > traj.sigma_eta[0]


def test_velocity_consistent_with_group_velocity_bound():
    # The packet populates both +-E branches, which separate at up to twice
    # the single-band group velocity; the sigma_eta slope must sit between a
    # fraction of the exact-spectrum bound and twice it.
    from stark_lattice import default_site_range, dispersion_numeric, kappa_grid

    kap = kappa_grid(TILT, 512)
    curve = dispersion_numeric(LAT, TILT, kap, 0.0, default_site_range(LAT, TILT))
    v_bound = np.abs(np.gradient(curve.energies, kap)).max()
    patch = build_lattice(LAT, TILT, 64, 64)
    state = initial_packet(patch, "gaussian", sigma=3.0,
                           kappa0=np.pi / (10.0 * TILT.d))
    traj = propagate(state, patch, 25.0)
    v = abs(traj.ballistic_velocity)
    assert v <= 2.0 * v_bound
    assert v >= 0.3 * v_bound


def test_chain_equivalence_residual():
    assert chain_equivalence_residual(LAT, TILT) < 1e-8
    lat_pf = LatticeSpec(1.0, 0.25, -0.25)
    tilt_pf = make_tilt(2, 1, 1.98, lat_pf)
    assert chain_equivalence_residual(lat_pf, tilt_pf) < 1e-8
