"""Lattice and tilt parameters, rotated-frame geometry, orientation classes.

The model is a square lattice with two sublattices A/B and three hopping
amplitudes t1 (the four diagonal bonds), t2 and t3 (the two inequivalent
straight bonds).  A static force F is applied along a rational direction
F_x/F_y = r/q with r, q coprime.  In the frame rotated by theta = arctan(r/q)
the site coordinates along the force are multiples of the period

    d = sqrt(2) * a / sqrt(r^2 + q^2),

and the B sublattice is offset in energy by E0 = F*d*(r+q)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "LatticeSpec",
    "TiltSpec",
    "Orientation",
    "make_tilt",
    "classify_orientation",
    "kappa_grid",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Hopping amplitudes and the period a of the underlying square lattice.

    t3 = t2 recovers the simple square lattice, t3 = 0 is honeycomb-like, and
    t3 = -t2 is the pi-flux (staggered field) case.  No sign restrictions.
    """

    t1: float
    t2: float
    t3: float
    a: float = 1.0

    def __post_init__(self):
        for name in ("t1", "t2", "t3", "a"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.a <= 0:
            raise ValueError(f"lattice period a must be positive, got {self.a}")


@dataclass(frozen=True)
class TiltSpec:
    """Tilt direction (r, q), force magnitude F, and derived geometry.

    Always stored with (r, q) coprime and q > 0 (or r > 0 when q = 0);
    use make_tilt to construct.
    """

    r: int
    q: int
    F: float
    a: float = 1.0

    @property
    def d(self) -> float:
        """Site-coordinate period along the force direction."""
        return math.sqrt(2.0) * self.a / math.hypot(self.r, self.q)

    @property
    def E0(self) -> float:
        """Sublattice-B energy offset F*d*(r+q)/2."""
        return self.F * self.d * (self.r + self.q) / 2.0

    @property
    def theta(self) -> float:
        """Rotation angle of the force frame, arctan(r/q)."""
        return math.atan2(self.r, self.q)


class Orientation(Enum):
    GENERIC = "generic"
    DIAGONAL = "diagonal"          # r = q, i.e. (1, 1)
    ANTIDIAGONAL = "antidiagonal"  # r = -q, i.e. (1, -1)


def make_tilt(r: int, q: int, F: float, lattice: LatticeSpec | None = None) -> TiltSpec:
    """Build a TiltSpec, reducing (r, q) to coprime form.

    The direction sign is normalized so that q > 0 when q != 0, else r > 0
    (flipping both components reverses F, which leaves the spectrum
    unchanged).  Rejects F <= 0 and (r, q) = (0, 0).
    """
    r, q = int(r), int(q)
    if (r, q) == (0, 0):
        raise ValueError("tilt direction (r, q) = (0, 0) is not allowed")
    if not (F > 0) or not math.isfinite(F):
        raise ValueError(f"force magnitude must be positive and finite, got {F!r}")
    g = math.gcd(abs(r), abs(q))
    r, q = r // g, q // g
    if q < 0 or (q == 0 and r < 0):
        r, q = -r, -q
    a = 1.0 if lattice is None else lattice.a
    return TiltSpec(r=r, q=q, F=float(F), a=a)


def classify_orientation(tilt: TiltSpec) -> Orientation:
    """Diagonal for (1, 1), AntiDiagonal for (1, -1) directions, else Generic."""
    if tilt.r == tilt.q:
        return Orientation.DIAGONAL
    if tilt.r == -tilt.q:
        return Orientation.ANTIDIAGONAL
    return Orientation.GENERIC


def kappa_grid(tilt: TiltSpec, n_points: int) -> np.ndarray:
    """Uniform quasimomentum samples on [0, 2*pi/d), endpoint excluded.

    2*pi/d is always a period of the dispersion since every kappa enters
    through harmonics of integer multiples of kappa*d; for specific (r, q)
    the fundamental period can be a fraction of it.
    """
    if n_points < 2:
        raise ValueError(f"need at least 2 kappa points, got {n_points}")
    return np.arange(n_points) * (2.0 * np.pi / tilt.d) / n_points
