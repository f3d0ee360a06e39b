"""Exact spectra of the tilted lattice: reduced chain Hamiltonian at fixed
quasimomentum, band tracking over the Brillouin zone, and converged band
widths.

After separating the transverse plane wave, the problem reduces to a
two-component chain over sites j in [-J, J] with sublattice amplitudes
(psi^A_j, psi^B_j).  The A-row couplings are

    A_j -- B_{j-q}   : -t1 * exp(-i r kappa d)
    A_j -- B_{j-r}   : -t1 * exp(+i q kappa d)
    A_j -- B_{j-q-r} : -t2 * exp(+i (q-r) kappa d)
    A_j -- B_j       : -t3

with on-site energies F*d*j on A and F*d*j + E0 on B, and the B rows fixed
by Hermiticity.  Couplings leaving [-J, J] are dropped (open boundary);
Stark localization makes bulk eigenvalues insensitive to J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LatticeSpec, TiltSpec

__all__ = [
    "ReducedHamiltonian",
    "DispersionCurve",
    "TrackingAmbiguityError",
    "WidthConvergenceError",
    "build_reduced_hamiltonian",
    "eigen_spectrum",
    "dispersion_numeric",
    "ladder_symmetry_residual",
    "band_width_converged",
    "default_site_range",
    "flat_ladder_spacing",
]

TRACKING_TIE_TOL = 1e-10


class TrackingAmbiguityError(RuntimeError):
    """Two eigenvalues are equally close to the tracked band; refine the grid."""


class WidthConvergenceError(RuntimeError):
    """Band width failed to converge under doubling of the chain truncation."""

    def __init__(self, widths, site_ranges):
        self.widths = list(widths)
        self.site_ranges = list(site_ranges)
        super().__init__(
            f"band width not converged: widths {self.widths} at J {self.site_ranges}"
        )


@dataclass
class ReducedHamiltonian:
    """Dense Hermitian chain Hamiltonian at fixed kappa."""

    matrix: np.ndarray
    site_range: int
    kappa: float
    lattice: LatticeSpec
    tilt: TiltSpec

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class DispersionCurve:
    """One band E(kappa) tracked over a kappa grid."""

    kappas: np.ndarray
    energies: np.ndarray
    band_label: int = 0

    @property
    def width(self) -> float:
        return float(self.energies.max() - self.energies.min())

    @property
    def center(self) -> float:
        return float(self.energies.mean())


def _index(j: int, s: int, J: int) -> int:
    # basis order (j, A), (j, B) for j = -J..J
    return 2 * (j + J) + s


def build_reduced_hamiltonian(lat: LatticeSpec, tilt: TiltSpec, kappa: float,
                              J: int) -> ReducedHamiltonian:
    """Assemble the chain Hamiltonian; exactly Hermitian by construction."""
    r, q, F, d, E0 = tilt.r, tilt.q, tilt.F, tilt.d, tilt.E0
    min_J = 2 * (abs(r) + abs(q))
    if J < min_J:
        raise ValueError(f"site range J={J} below minimum {min_J} for (r,q)=({r},{q})")
    if not math.isfinite(kappa):
        raise ValueError("kappa must be finite")
    n = 2 * (2 * J + 1)
    H = np.zeros((n, n), dtype=complex)
    hops = (
        (-q, -lat.t1 * np.exp(-1j * r * kappa * d)),
        (-r, -lat.t1 * np.exp(1j * q * kappa * d)),
        (-q - r, -lat.t2 * np.exp(1j * (q - r) * kappa * d)),
        (0, -lat.t3 + 0j),
    )
    for j in range(-J, J + 1):
        H[_index(j, 0, J), _index(j, 0, J)] = F * d * j
        H[_index(j, 1, J), _index(j, 1, J)] = F * d * j + E0
        for dj, amp in hops:
            jb = j + dj
            if -J <= jb <= J:
                H[_index(j, 0, J), _index(jb, 1, J)] += amp
                H[_index(jb, 1, J), _index(j, 0, J)] += np.conj(amp)
    return ReducedHamiltonian(matrix=H, site_range=J, kappa=float(kappa),
                              lattice=lat, tilt=tilt)


def eigen_spectrum(ham: ReducedHamiltonian, vectors: bool = False):
    """All eigenvalues ascending; orthonormal eigenvectors on request."""
    try:
        if vectors:
            w, v = np.linalg.eigh(ham.matrix)
            return w, v
        return np.linalg.eigvalsh(ham.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - should not occur
        raise RuntimeError("Hermitian eigensolver failed to converge") from exc


def dispersion_numeric(lat: LatticeSpec, tilt: TiltSpec, kappas: np.ndarray,
                       band_ref_energy: float, J: int) -> DispersionCurve:
    """Track the band nearest band_ref_energy by nearest-energy continuity."""
    kappas = np.asarray(kappas, dtype=float)
    energies = np.empty_like(kappas)
    e_prev = float(band_ref_energy)
    for i, kap in enumerate(kappas):
        ham = build_reduced_hamiltonian(lat, tilt, kap, J)
        ev = eigen_spectrum(ham)
        dist = np.abs(ev - e_prev)
        order = np.argsort(dist)
        if i > 0 and dist.size > 1 and dist[order[1]] - dist[order[0]] < TRACKING_TIE_TOL:
            raise TrackingAmbiguityError(
                f"tracking tie at kappa={kap:.6g}: eigenvalues "
                f"{ev[order[0]]:.12g} and {ev[order[1]]:.12g} both nearest to {e_prev:.12g}"
            )
        e_prev = float(ev[order[0]])
        energies[i] = e_prev
    spacing = flat_ladder_spacing(tilt)
    label = int(round(energies.mean() / spacing)) if spacing > 0 else 0
    return DispersionCurve(kappas=kappas, energies=energies, band_label=label)


def ladder_symmetry_residual(curve: DispersionCurve, lat: LatticeSpec,
                             tilt: TiltSpec, J: int) -> float:
    """Track the reflection partner of a band and return max |E2 - S(E1)|.

    The two Wannier-Stark ladders are related by S(E) = -E when (r+q)/2 is an
    integer and by S(E) = -E + F*d/2 when it is a half-integer.
    """
    offset = 0.0 if (tilt.r + tilt.q) % 2 == 0 else tilt.F * tilt.d / 2.0
    target = -curve.energies + offset
    partner = dispersion_numeric(lat, tilt, curve.kappas, target[0], J)
    return float(np.abs(partner.energies - target).max())


def default_site_range(lat: LatticeSpec, tilt: TiltSpec) -> int:
    """Truncation heuristic from the Stark localization length."""
    hop = abs(lat.t1) + abs(lat.t2) + abs(lat.t3)
    J = math.ceil((12.0 * hop + 4.0 * abs(tilt.E0)) / (tilt.F * tilt.d))
    return J + 4 * (abs(tilt.r) + abs(tilt.q))


def band_width_converged(lat: LatticeSpec, tilt: TiltSpec, kappas: np.ndarray,
                         band_ref_energy: float = 0.0, J: int | None = None,
                         rel_tol: float = 1e-4, max_doublings: int = 5):
    """Band width recomputed with J doubled until successive values agree.

    Returns (width, J_used).  Agreement is relative (rel_tol) with a tiny
    absolute floor so that numerically flat bands (width ~ machine precision)
    converge.  Raises WidthConvergenceError with both values otherwise.
    """
    if J is None:
        J = default_site_range(lat, tilt)
    widths, ranges = [], []
    w_prev = dispersion_numeric(lat, tilt, kappas, band_ref_energy, J).width
    widths.append(w_prev)
    ranges.append(J)
    for _ in range(max_doublings):
        J2 = 2 * ranges[-1]
        w = dispersion_numeric(lat, tilt, kappas, band_ref_energy, J2).width
        widths.append(w)
        ranges.append(J2)
        if abs(w - w_prev) <= rel_tol * max(abs(w), abs(w_prev)) + 1e-10:
            return w, ranges[-2]
        w_prev = w
    raise WidthConvergenceError(widths, ranges)


def flat_ladder_spacing(tilt: TiltSpec) -> float:
    """Ladder spacing F*d*g/2 with g = gcd(r+q, |r-q|).

    Equals F*a/sqrt(r'^2+q'^2) with (r', q') the tilt direction re-expressed
    in the pi/4-rotated frame of the simple square lattice and reduced to
    coprime form.
    """
    g = math.gcd(abs(tilt.r + tilt.q), abs(tilt.r - tilt.q))
    return tilt.F * tilt.d * g / 2.0
