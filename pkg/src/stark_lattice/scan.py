"""Force scans, collapse finding, power-law fits and CSV/JSON emission.

A RunConfig captures everything a batch run needs and round-trips through
JSON, so the sidecar metadata written next to every CSV fully reproduces the
run.  Scans over F are embarrassingly parallel across rows; the worker pool
is capped by the STARK_LATTICE_THREADS environment variable.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .model import LatticeSpec, make_tilt, kappa_grid
from .perturbation import dispersion_analytic, width_analytic
from .spectrum import WidthConvergenceError, band_width_converged

__all__ = [
    "RunConfig",
    "ScanRow",
    "BandWidthScan",
    "Table",
    "run_scan_width",
    "find_collapses",
    "fit_power_law",
    "emit",
    "thread_count",
]

MODES = ("spectrum", "scan-width", "collapse", "analytic", "propagate", "bessel")
COLLAPSE_DF = 1e-3  # refinement target for collapse locations


@dataclass
class RunConfig:
    """Validated batch-run configuration; JSON round-trippable."""

    mode: str = "scan-width"
    t1: float = 1.0
    t2: float = 0.5
    t3: float = 0.25
    a: float = 1.0
    r: int = 2
    q: int = 1
    F: float = 2.3
    f_min: float = 1.5
    f_max: float = 30.0
    n_points: int = 60
    spacing: str = "linear"
    kappa_points: int = 256
    max_order: int = 7
    out: str | None = None
    # dynamics sub-config
    T: float = 30.0
    dt: float | None = None
    packet: str = "gaussian"
    sigma: float = 4.0
    kappa0: float | None = None
    patch: int = 128
    # collapse sub-config
    threshold_ratio: float = 0.2
    k_max: int = 3

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not (self.f_min > 0):
            raise ValueError(f"f_min must be positive, got {self.f_min}")
        if self.f_max < self.f_min:
            raise ValueError("f_max must be >= f_min")
        if self.n_points < 1:
            raise ValueError(f"n_points must be >= 1, got {self.n_points}")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be linear|log, got {self.spacing!r}")
        if self.kappa_points < 2:
            raise ValueError(f"kappa_points must be >= 2, got {self.kappa_points}")
        if self.max_order < 0:
            raise ValueError("max_order must be non-negative")
        if not (self.F > 0):
            raise ValueError(f"F must be positive, got {self.F}")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.packet not in ("single_site", "gaussian"):
            raise ValueError(f"unknown packet kind {self.packet!r}")
        if self.patch < 8:
            raise ValueError("patch must be >= 8 cells")
        if not (0 < self.threshold_ratio < 1):
            raise ValueError("threshold_ratio must lie in (0, 1)")
        # constructor validation of the physical parameters
        self.lattice()
        make_tilt(self.r, self.q, self.F, self.lattice())

    def lattice(self) -> LatticeSpec:
        return LatticeSpec(t1=self.t1, t2=self.t2, t3=self.t3, a=self.a)

    def f_values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.f_min, self.f_max, self.n_points)
        return np.linspace(self.f_min, self.f_max, self.n_points)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass
class ScanRow:
    F: float
    width_numeric: float
    width_analytic_2term: float
    width_analytic_full: float
    J_used: int
    converged: bool


@dataclass
class BandWidthScan:
    rows: list
    config: RunConfig | None = None

    @property
    def F(self) -> np.ndarray:
        return np.array([row.F for row in self.rows])

    @property
    def width_numeric(self) -> np.ndarray:
        return np.array([row.width_numeric for row in self.rows])


@dataclass
class Table:
    """Generic emittable artifact: a header and rows of scalars."""

    header: list
    rows: list


def thread_count() -> int:
    env = os.environ.get("STARK_LATTICE_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("STARK_LATTICE_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _numeric_width(cfg: RunConfig, F: float):
    lat = cfg.lattice()
    tilt = make_tilt(cfg.r, cfg.q, F, lat)
    kappas = kappa_grid(tilt, cfg.kappa_points)
    return band_width_converged(lat, tilt, kappas, band_ref_energy=0.0)


def _scan_row(cfg: RunConfig, F: float) -> ScanRow:
    lat = cfg.lattice()
    tilt = make_tilt(cfg.r, cfg.q, F, lat)
    kappas = kappa_grid(tilt, cfg.kappa_points)
    converged = True
    try:
        w_num, J_used = band_width_converged(lat, tilt, kappas, band_ref_energy=0.0)
    except WidthConvergenceError as exc:
        w_num, J_used, converged = exc.widths[-1], exc.site_ranges[-1], False
    w2 = width_analytic(dispersion_analytic(lat, tilt, kappas, cfg.max_order, n_terms=2))
    w_full = width_analytic(dispersion_analytic(lat, tilt, kappas, cfg.max_order))
    return ScanRow(F=float(F), width_numeric=w_num, width_analytic_2term=w2,
                   width_analytic_full=w_full, J_used=J_used, converged=converged)


def run_scan_width(cfg: RunConfig) -> BandWidthScan:
    """One ScanRow per F value, computed independently, assembled in F order."""
    cfg.validate()
    if cfg.mode != "scan-width":
        raise ValueError(f"run_scan_width requires mode=scan-width, got {cfg.mode!r}")
    fs = cfg.f_values()
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(lambda F: _scan_row(cfg, F), fs))
    return BandWidthScan(rows=rows, config=cfg)


def _golden_min(f, a: float, b: float, c: float, dx: float):
    """Golden-section minimum of f on the bracket (a, b, c) to width dx."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = a, c
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > dx:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    return x, f(x)


def find_collapses(scan: BandWidthScan, threshold_ratio: float):
    """Local minima of the numeric width, refined and thresholded.

    Each interior grid minimum is refined by golden-section search on fresh
    numeric evaluations until the bracket is narrower than 1e-3 in F, and
    reported as (F*, width_min) only if width_min <= threshold_ratio times
    both neighboring local maxima of the scan (a flat scan therefore reports
    nothing).
    """
    if len(scan.rows) < 20:
        raise ValueError(f"need at least 20 scan rows, got {len(scan.rows)}")
    if scan.config is None:
        raise ValueError("scan carries no config; cannot refine collapses")
    fs = scan.F
    ws = scan.width_numeric
    out = []
    for i in range(1, len(fs) - 1):
        if not (ws[i] < ws[i - 1] and ws[i] <= ws[i + 1]):
            continue
        left_max = ws[:i].max()
        right_max = ws[i + 1:].max()
        f_star, w_star = _golden_min(
            lambda F: _numeric_width(scan.config, F)[0],
            fs[i - 1], fs[i], fs[i + 1], COLLAPSE_DF,
        )
        if w_star <= threshold_ratio * min(left_max, right_max):
            out.append((float(f_star), float(w_star)))
    return out


def fit_power_law(scan: BandWidthScan, f_min_fit: float):
    """Least-squares slope of log(width_numeric) vs log(F) for F >= f_min_fit."""
    fs, ws = scan.F, scan.width_numeric
    sel = fs >= f_min_fit
    if sel.sum() < 5:
        raise ValueError(f"need >= 5 rows with F >= {f_min_fit}, got {int(sel.sum())}")
    if np.any(ws[sel] <= 0):
        raise ValueError("zero or negative widths in the fit window")
    x = np.log(fs[sel])
    y = np.log(ws[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _table(artifact) -> Table:
    from .dynamics import SpreadTrajectory
    from .perturbation import AnalyticDispersion
    from .spectrum import DispersionCurve

    if isinstance(artifact, Table):
        return artifact
    if isinstance(artifact, BandWidthScan):
        header = ["F", "width_numeric", "width_analytic_2term",
                  "width_analytic_full", "J_used", "converged"]
        rows = [(r.F, r.width_numeric, r.width_analytic_2term,
                 r.width_analytic_full, r.J_used, r.converged)
                for r in artifact.rows]
        return Table(header, rows)
    if isinstance(artifact, DispersionCurve):
        return Table(["kappa", "E"], list(zip(artifact.kappas, artifact.energies)))
    if isinstance(artifact, AnalyticDispersion):
        return Table(["kappa", "E_plus", "E_minus"],
                     list(zip(artifact.kappas, artifact.e_plus, artifact.e_minus)))
    if isinstance(artifact, SpreadTrajectory):
        return Table(["t", "sigma_eta", "sigma_xi"],
                     list(zip(artifact.times, artifact.sigma_eta, artifact.sigma_xi)))
    raise TypeError(f"cannot emit artifact of type {type(artifact).__name__}")


def emit(artifact, path, config: RunConfig | None = None,
         wall_time: float | None = None) -> None:
    """Write artifact as CSV (17 significant digits, LF) plus sidecar metadata.

    The sidecar <path>.meta.json holds the full RunConfig, the package
    version and the wall time.  CSV bytes are deterministic for identical
    inputs.
    """
    table = _table(artifact)
    lines = [",".join(table.header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in table.rows)
    text = "\n".join(lines) + "\n"
    meta = {
        "config": config.to_dict() if config is not None else None,
        "version": __version__,
        "wall_time_s": wall_time,
    }
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        with open(f"{path}.meta.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed to write output near {path!r}: {exc}") from exc
