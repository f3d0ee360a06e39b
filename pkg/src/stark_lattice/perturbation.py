"""Analytic dispersion relations from the Bessel-series perturbation theory.

For a generic tilt direction the first-order correction is a sum over the
integer solutions (n, m) of (r-q)*m = -(r+q)*(1+n),

    <X> = sum  -i (t3-t2) J_m(z1) J_n(z2) sin(K kappa d)   (n+m even)
               -  (t3-t2) J_m(z1) J_n(z2) cos(K kappa d)   (n+m odd)

with K = (r^2+q^2)(1+n)/(r-q) and arguments

    z1 = 8 t1 / (F d (r-q)),   z2 = 4 (t2+t3) / (F d (r+q)),

each term scaling as (1/F)^(|n|+|m|) at large F.  The second-order mean
<-i X' X*> is assembled from the Fourier components of X, a four-Bessel
sum over pairs of index tuples sharing an oscillation frequency.

Band corrections come in +- pairs.  When r+q is odd, every series term has
odd n+m, <X> is real, the second order vanishes identically by a parity
pairing, and the physical bands follow the smooth signed series +-<X>.
When r and q are both odd the branches are +-sqrt(|<X>|^2 + (A/F)^2).
The tilt directions (1, 1) and (1, -1) are degenerate for the constraint
and use closed forms instead (with two misprints in the published
expressions corrected against exact diagonalization: the Bessel argument
of the (1, 1) form is 2(t2+t3)/Fd, and the (1, -1) form carries
(t2+t3)^2 cos^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j, bessel_root
from .model import LatticeSpec, Orientation, TiltSpec, classify_orientation
from .spectrum import flat_ladder_spacing

__all__ = [
    "PerturbTerm",
    "AnalyticDispersion",
    "DegenerateOrientationError",
    "NoDispersiveTermError",
    "flat_ladder",
    "enumerate_terms",
    "mean_X",
    "second_order_mean",
    "dispersion_analytic",
    "width_analytic",
    "collapse_predict",
]

DEFAULT_MAX_ORDER = 7  # next Bogoliubov order contributes no term above (1/F)^8


class DegenerateOrientationError(ValueError):
    """Generic-series operation called for a (1,1) or (1,-1) tilt."""


class NoDispersiveTermError(RuntimeError):
    """No kappa-dependent term exists at the available series order."""


def _reduction_sign(k: int) -> int:
    # J_{-k} = (-1)^k J_k
    return -1 if (k < 0 and k % 2) else 1


@dataclass(frozen=True)
class PerturbTerm:
    """One (n, m) solution of the first-order constraint."""

    n: int
    m: int
    bessel_m_index: int   # |m|, order of the z1 Bessel factor
    bessel_n_index: int   # |n|, order of the z2 Bessel factor
    harmonic: int         # K, multiplier of kappa*d inside cos/sin
    parity: str           # "even" or "odd" n+m
    order: int            # |n| + |m|, power of 1/F of the leading asymptotics
    amplitude_sign: int   # sign of the term written as +-(t3-t2) J_|m| J_|n| trig(|K| kappa d)


@dataclass
class AnalyticDispersion:
    kappas: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    order_used: int
    branch_kind: str  # "generic" | "diagonal_a2" | "antidiagonal_a3"

    @property
    def width(self) -> float:
        return float(self.e_plus.max() - self.e_plus.min())


def flat_ladder(tilt: TiltSpec, p: int) -> float:
    """Energy of rung p of the flat ladder of the simple square lattice."""
    return flat_ladder_spacing(tilt) * p


def _require_generic(tilt: TiltSpec) -> None:
    if classify_orientation(tilt) is not Orientation.GENERIC:
        raise DegenerateOrientationError(
            f"(r,q)=({tilt.r},{tilt.q}) is degenerate; use the closed-form dispersion"
        )


def enumerate_terms(tilt: TiltSpec, max_order: int) -> list[PerturbTerm]:
    """All constraint solutions with |n|+|m| <= max_order, sorted by order then |K|."""
    _require_generic(tilt)
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    r, q = tilt.r, tilt.q
    terms = []
    for n in range(-max_order - 1, max_order + 2):
        num = -(r + q) * (1 + n)
        if num % (r - q):
            continue
        m = num // (r - q)
        if abs(n) + abs(m) > max_order:
            continue
        knum = (r * r + q * q) * (1 + n)
        assert knum % (r - q) == 0
        K = knum // (r - q)
        parity = "even" if (n + m) % 2 == 0 else "odd"
        sign = -_reduction_sign(m) * _reduction_sign(n)
        if parity == "even":
            sign *= 1 if K >= 0 else -1
        terms.append(PerturbTerm(n=n, m=m, bessel_m_index=abs(m), bessel_n_index=abs(n),
                                 harmonic=K, parity=parity, order=abs(n) + abs(m),
                                 amplitude_sign=sign))
    terms.sort(key=lambda t: (t.order, abs(t.harmonic)))
    return terms


def _series_args(lat: LatticeSpec, tilt: TiltSpec):
    r, q, F, d = tilt.r, tilt.q, tilt.F, tilt.d
    z1 = 8.0 * lat.t1 / (F * d * (r - q))
    z2 = 4.0 * (lat.t2 + lat.t3) / (F * d * (r + q))
    return z1, z2


def _eval_terms(terms, lat: LatticeSpec, tilt: TiltSpec, kappa):
    z1, z2 = _series_args(lat, tilt)
    d = tilt.d
    g = lat.t3 - lat.t2
    kappa = np.asarray(kappa, dtype=float)
    out = np.zeros(kappa.shape, dtype=complex)
    for t in terms:
        jj = bessel_j(t.m, z1) * bessel_j(t.n, z2)
        if t.parity == "even":
            out += -1j * g * jj * np.sin(t.harmonic * kappa * d)
        else:
            out += -g * jj * np.cos(t.harmonic * kappa * d)
    return out if out.ndim else complex(out)


def mean_X(lat: LatticeSpec, tilt: TiltSpec, kappa, max_order: int = DEFAULT_MAX_ORDER):
    """First-order mean <X>(kappa); scalar or array kappa."""
    return _eval_terms(enumerate_terms(tilt, max_order), lat, tilt, kappa)


def second_order_mean(lat: LatticeSpec, tilt: TiltSpec, kappa,
                      max_order: int = DEFAULT_MAX_ORDER):
    """Second-order mean <-i X' X*>(kappa), a real four-Bessel sum.

    X carries Fourier components at half-integer multiples w/2 of the chain
    frequency, indexed by w = nu+-(m, n) = m(r-q) + (n +- 1)(r+q).  The mean
    couples pairs of tuples with equal w != 0:

        A = -(t3-t2)^2/(2d) * sum_w (1/w) * s s' J_m J_n J_m' J_n'
                                  * cos[(mu - mu') kappa d / 2]

    with mu+-(m, n) = (n +- 1)(r-q) - m(r+q), s = +1 for the nu_+ family and
    -1 for nu_-, and quadruples truncated by |n|+|m|+|n'|+|m'| <= max_order.
    Vanishes identically when r+q is odd (the two families then cancel in
    pairs) and for t3 = t2.
    """
    _require_generic(tilt)
    r, q, d = tilt.r, tilt.q, tilt.d
    z1, z2 = _series_args(lat, tilt)
    g = lat.t3 - lat.t2
    kappa = np.asarray(kappa, dtype=float)

    groups: dict[int, list[tuple[int, float, int, int]]] = {}
    for n in range(-max_order, max_order + 1):
        for m in range(-max_order + abs(n), max_order - abs(n) + 1):
            jj = bessel_j(m, z1) * bessel_j(n, z2)
            for s in (+1, -1):
                w = m * (r - q) + (n + s) * (r + q)
                if w == 0:
                    continue
                mu = (n + s) * (r - q) - m * (r + q)
                groups.setdefault(w, []).append((abs(n) + abs(m), jj, mu, s))

    harmonics: dict[int, float] = {}
    for w, entries in groups.items():
        for o1, jj1, mu1, s1 in entries:
            for o2, jj2, mu2, s2 in entries:
                if o1 + o2 > max_order:
                    continue
                coef = -(g * g) / (2.0 * d * w) * s1 * s2 * jj1 * jj2
                dmu = abs(mu1 - mu2)
                harmonics[dmu] = harmonics.get(dmu, 0.0) + coef
    out = np.zeros(kappa.shape, dtype=float)
    for dmu, coef in harmonics.items():
        out += coef * np.cos(dmu * kappa * d / 2.0)
    return out if out.ndim else float(out)


def dispersion_analytic(lat: LatticeSpec, tilt: TiltSpec, kappas,
                        max_order: int = DEFAULT_MAX_ORDER,
                        n_terms: int | None = None) -> AnalyticDispersion:
    """Analytic +-branches of the band correction about the ladder center.

    n_terms optionally truncates the generic series to its first n_terms
    terms in order of increasing 1/F power (e.g. n_terms=2 keeps the
    constant and the leading harmonic for (2,1)).
    """
    kappas = np.asarray(kappas, dtype=float)
    orient = classify_orientation(tilt)
    F, d = tilt.F, tilt.d
    t1, t2, t3 = lat.t1, lat.t2, lat.t3
    if orient is Orientation.DIAGONAL:
        z = 2.0 * (t2 + t3) / (F * d)
        e = np.sqrt((t2 - t3) ** 2 * bessel_j(1, z) ** 2
                    + 4.0 * t1 ** 2 * np.cos(kappas * d) ** 2)
        kind = "diagonal_a2"
    elif orient is Orientation.ANTIDIAGONAL:
        z = 4.0 * t1 / (F * d)
        e = np.sqrt((t2 - t3) ** 2 * bessel_j(0, z) ** 2 * np.sin(kappas * d) ** 2
                    + (t2 + t3) ** 2 * np.cos(kappas * d) ** 2)
        kind = "antidiagonal_a3"
    else:
        terms = enumerate_terms(tilt, max_order)
        if n_terms is not None:
            terms = terms[:n_terms]
        X = _eval_terms(terms, lat, tilt, kappas)
        if (tilt.r + tilt.q) % 2:
            # odd r+q: real cosine series, second order vanishes, bands are
            # the smooth signed continuation of the series
            e = X.real
        else:
            A = second_order_mean(lat, tilt, kappas, max_order)
            e = np.sqrt(np.abs(X) ** 2 + (A / F) ** 2)
        kind = "generic"
    return AnalyticDispersion(kappas=kappas, e_plus=e, e_minus=-e,
                              order_used=max_order, branch_kind=kind)


def width_analytic(disp: AnalyticDispersion) -> float:
    """Width of one branch, max over kappa minus min over kappa."""
    return disp.width


def collapse_predict(lat: LatticeSpec, tilt: TiltSpec, k_max: int,
                     max_order: int = DEFAULT_MAX_ORDER,
                     f_window: tuple[float, float] = (0.5, 20.0),
                     n_grid: int = 400) -> list[float]:
    """Force values where the analytic band width collapses.

    For the pi-flux case t3 = -t2 only the n = 0 series terms survive
    (z2 = 0) and the lowest kappa-dependent term is J_{m*}(z1) with
    m* = |(r+q)/(r-q)|, giving the closed form

        F_k = 8 t1 / (j_{m*, k} d |r-q|).

    Outside that regime the collapses are located by bracketing minima of
    the analytic width on a force grid over f_window.
    """
    from .model import make_tilt

    _require_generic(tilt)
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if k_max == 0:
        return []
    terms = enumerate_terms(tilt, max_order)
    if not any(t.harmonic for t in terms):
        raise NoDispersiveTermError(
            f"no kappa-dependent term up to order {max_order} for (r,q)=({tilt.r},{tilt.q})"
        )
    r, q = tilt.r, tilt.q
    pi_flux = lat.t3 == -lat.t2 and (r + q) % (r - q) == 0
    if pi_flux:
        m_star = abs((r + q) // (r - q))
        return [8.0 * abs(lat.t1) / (bessel_root(m_star, k) * tilt.d * abs(r - q))
                for k in range(1, k_max + 1)]
    # numeric fallback: minima of the analytic width over F
    n_kap = 16 * (r * r + q * q)
    fs = np.linspace(f_window[0], f_window[1], n_grid)

    def w_of(F):
        t = make_tilt(r, q, F, lat)
        kaps = np.arange(n_kap) * (2.0 * np.pi / t.d) / n_kap
        return width_analytic(dispersion_analytic(lat, t, kaps, max_order))

    ws = np.array([w_of(F) for F in fs])
    found = []
    from scipy import optimize
    for i in range(1, len(fs) - 1):
        if ws[i] < ws[i - 1] and ws[i] < ws[i + 1]:
            res = optimize.minimize_scalar(w_of, bracket=(fs[i - 1], fs[i], fs[i + 1]),
                                           method="golden", options={"xtol": 1e-6})
            found.append(float(res.x))
    # order like the closed form: k = 1 is the largest collapse force
    found.sort(reverse=True)
    return found[:k_max]
