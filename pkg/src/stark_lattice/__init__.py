"""Wannier-Stark spectra, Bessel-series dispersions, band collapses and
wavepacket spreading for the tilted two-sublattice square lattice."""

__version__ = "0.1.0"

from .bessel import bessel_j, bessel_root
from .model import (
    LatticeSpec,
    Orientation,
    TiltSpec,
    classify_orientation,
    kappa_grid,
    make_tilt,
)
from .spectrum import (
    DispersionCurve,
    ReducedHamiltonian,
    TrackingAmbiguityError,
    WidthConvergenceError,
    band_width_converged,
    build_reduced_hamiltonian,
    default_site_range,
    dispersion_numeric,
    eigen_spectrum,
    flat_ladder_spacing,
    ladder_symmetry_residual,
)
from .perturbation import (
    AnalyticDispersion,
    DegenerateOrientationError,
    NoDispersiveTermError,
    PerturbTerm,
    collapse_predict,
    dispersion_analytic,
    enumerate_terms,
    flat_ladder,
    mean_X,
    second_order_mean,
    width_analytic,
)
from .dynamics import (
    BoundaryContaminationError,
    Lattice2D,
    NormDriftError,
    SpreadTrajectory,
    WavepacketState,
    build_lattice,
    chain_equivalence_residual,
    initial_packet,
    propagate,
)
from .scan import (
    BandWidthScan,
    RunConfig,
    ScanRow,
    Table,
    emit,
    find_collapses,
    fit_power_law,
    run_scan_width,
)

__all__ = [
    "__version__",
    "LatticeSpec", "TiltSpec", "Orientation", "make_tilt",
    "classify_orientation", "kappa_grid",
    "bessel_j", "bessel_root",
    "ReducedHamiltonian", "DispersionCurve", "TrackingAmbiguityError",
    "WidthConvergenceError", "build_reduced_hamiltonian", "eigen_spectrum",
    "dispersion_numeric", "ladder_symmetry_residual", "band_width_converged",
    "default_site_range", "flat_ladder_spacing",
    "PerturbTerm", "AnalyticDispersion", "DegenerateOrientationError",
    "NoDispersiveTermError", "enumerate_terms", "mean_X", "second_order_mean",
    "dispersion_analytic", "width_analytic", "flat_ladder", "collapse_predict",
    "Lattice2D", "WavepacketState", "SpreadTrajectory", "NormDriftError",
    "BoundaryContaminationError", "build_lattice", "initial_packet",
    "propagate", "chain_equivalence_residual",
    "RunConfig", "ScanRow", "BandWidthScan", "Table", "run_scan_width",
    "find_collapses", "fit_power_law", "emit",
]
