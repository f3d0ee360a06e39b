"""Command-line front end.

    stark-lattice <mode> [--config cfg.json] [flag overrides...]

Modes: spectrum | scan-width | collapse | analytic | propagate | bessel.
Configuration comes from an optional JSON file holding RunConfig fields;
command-line flags override file values.  Every run writes a CSV artifact
plus a <out>.meta.json sidecar with the resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
a scan with more than 20% unconverged rows).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from .dynamics import (
    BoundaryContaminationError,
    NormDriftError,
    build_lattice,
    initial_packet,
    propagate,
)
from .model import kappa_grid, make_tilt
from .bessel import bessel_root
from .perturbation import (
    DegenerateOrientationError,
    NoDispersiveTermError,
    collapse_predict,
    dispersion_analytic,
)
from .scan import (
    MODES,
    RunConfig,
    Table,
    emit,
    find_collapses,
    run_scan_width,
)
from .spectrum import (
    TrackingAmbiguityError,
    WidthConvergenceError,
    default_site_range,
    dispersion_numeric,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (
    TrackingAmbiguityError,
    WidthConvergenceError,
    NormDriftError,
    BoundaryContaminationError,
    NoDispersiveTermError,
    np.linalg.LinAlgError,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stark-lattice",
        description="Wannier-Stark spectra and band collapses of the tilted "
                    "two-sublattice square lattice",
    )
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--t3", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--r", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--F", type=float)
    p.add_argument("--f-min", type=float, dest="f_min")
    p.add_argument("--f-max", type=float, dest="f_max")
    p.add_argument("--n-points", type=int, dest="n_points")
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--kappa-points", type=int, dest="kappa_points")
    p.add_argument("--max-order", type=int, dest="max_order")
    p.add_argument("--out")
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--packet", choices=("single_site", "gaussian"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--kappa0", type=float)
    p.add_argument("--patch", type=int)
    p.add_argument("--threshold-ratio", type=float, dest="threshold_ratio")
    p.add_argument("--k-max", type=int, dest="k_max")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"config {args.config!r} must hold a JSON object")
    for key in ("t1", "t2", "t3", "a", "r", "q", "F", "f_min", "f_max",
                "n_points", "spacing", "kappa_points", "max_order", "out",
                "T", "dt", "packet", "sigma", "kappa0", "patch",
                "threshold_ratio", "k_max"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    data["mode"] = args.mode
    return RunConfig.from_dict(data)


def _run_spectrum(cfg: RunConfig):
    lat = cfg.lattice()
    tilt = make_tilt(cfg.r, cfg.q, cfg.F, lat)
    kappas = kappa_grid(tilt, cfg.kappa_points)
    curve = dispersion_numeric(lat, tilt, kappas, band_ref_energy=0.0,
                               J=default_site_range(lat, tilt))
    return curve, f"band {curve.band_label}: width {curve.width:.6g}"


def _run_scan_width(cfg: RunConfig):
    scan = run_scan_width(cfg)
    bad = sum(not row.converged for row in scan.rows)
    if bad > 0.2 * len(scan.rows):
        raise WidthConvergenceError(
            [row.width_numeric for row in scan.rows if not row.converged],
            [row.J_used for row in scan.rows if not row.converged],
        )
    return scan, f"{len(scan.rows)} rows, {bad} unconverged"


def _run_collapse(cfg: RunConfig):
    scan_cfg = RunConfig.from_dict({**cfg.to_dict(), "mode": "scan-width"})
    scan = run_scan_width(scan_cfg)
    found = find_collapses(scan, cfg.threshold_ratio)
    lat = cfg.lattice()
    tilt = make_tilt(cfg.r, cfg.q, cfg.F, lat)
    try:
        predicted = collapse_predict(lat, tilt, cfg.k_max, cfg.max_order,
                                     f_window=(cfg.f_min, cfg.f_max))
    except (DegenerateOrientationError, NoDispersiveTermError):
        predicted = []
    rows = [(F, w) for F, w in found]
    note = (f"{len(found)} collapse(s); analytic prediction(s): "
            + (", ".join(f"{F:.4f}" for F in predicted) if predicted else "none"))
    return Table(["F_star", "width_min"], rows), note


def _run_analytic(cfg: RunConfig):
    lat = cfg.lattice()
    tilt = make_tilt(cfg.r, cfg.q, cfg.F, lat)
    kappas = kappa_grid(tilt, cfg.kappa_points)
    disp = dispersion_analytic(lat, tilt, kappas, cfg.max_order)
    return disp, f"{disp.branch_kind} branch, width {disp.width:.6g}"


def _run_propagate(cfg: RunConfig):
    lat = cfg.lattice()
    tilt = make_tilt(cfg.r, cfg.q, cfg.F, lat)
    patch = build_lattice(lat, tilt, cfg.patch, cfg.patch)
    kappa0 = cfg.kappa0 if cfg.kappa0 is not None else math.pi / (10.0 * tilt.d)
    if cfg.packet == "gaussian":
        state = initial_packet(patch, "gaussian", sigma=cfg.sigma * lat.a,
                               kappa0=kappa0)
    else:
        state = initial_packet(patch, "single_site")
    traj = propagate(state, patch, cfg.T, cfg.dt)
    tag = "" if traj.velocity_reliable else " (unreliable, R^2 < 0.99)"
    note = (f"velocity {traj.ballistic_velocity:.6g}{tag}, "
            f"norm drift {traj.norm_drift:.2e}")
    return traj, note


def _run_bessel(cfg: RunConfig):
    rows = [(n, k, bessel_root(n, k))
            for n in range(0, cfg.max_order + 1)
            for k in range(1, cfg.k_max + 1)]
    return Table(["n", "k", "root"], rows), f"{len(rows)} roots"


_RUNNERS = {
    "spectrum": _run_spectrum,
    "scan-width": _run_scan_width,
    "collapse": _run_collapse,
    "analytic": _run_analytic,
    "propagate": _run_propagate,
    "bessel": _run_bessel,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = cfg.out or f"{cfg.mode}.csv"
    t0 = time.perf_counter()
    try:
        artifact, note = _RUNNERS[cfg.mode](cfg)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DegenerateOrientationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        emit(artifact, out, config=cfg, wall_time=time.perf_counter() - t0)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{cfg.mode}: {note}; wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
