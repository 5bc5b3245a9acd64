"""Transition rates at the avoided crossing.

Three levels of treatment, all returning RateResult:

  * golden_rule_single: one boson carries the full splitting,
    rate = 2 pi J(splitting); a stimulated-emission factor (1 + N) is
    available behind a flag as an extension of the zero-temperature form;
  * golden_rule_two: a pair of bosons shares the splitting, integrating
    (2 pi / E^2) J(w) J(split - w) with stimulated factors over the split;
  * incoherent_rate: the full dressed-tunneling rate
    rate = (delta / 2)^2 int dt exp(i eps t - W(t))
    with the displacement correlator exponent
    W(t) = 4 int dw J/w^2 [(1 - cos wt) coth(w/2T) + i sin wt].

W is sampled on a geometric time grid, splined, and the oscillatory time
integral is then taken by Simpson with at least forty points per period. The
window doubles until the correlator weight has decayed below decay_floor; if
it plateaus instead the rate is not incoherent and ConvergenceError says so.

rate_scaling_sweep ties the three to the search problem through the
minimum-gap law splitting(N) = E0 / sqrt(N - 1) and fits the size scaling:
slope -eta/2 for one boson, -(2 eta + 1)/2 for two, -1 for the incoherent
channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, simpson
from scipy.interpolate import CubicSpline
from scipy.special import roots_jacobi

from .bath import BathSpec, CutoffForm, _support_ceiling, occupation, spectral_density
from .critical import ExponentFit, power_law_fit
from .errors import ConvergenceError

POINTS_PER_PERIOD = 40


class RateMethod(Enum):
    GOLDEN_SINGLE = "golden-single"
    GOLDEN_TWO = "golden-two"
    INCOHERENT_POLARON = "incoherent-polaron"


@dataclass(frozen=True)
class RateResult:
    """A rate with the method that produced it and coarse quality indicators.

    window is the integration span (frequency for golden-rule, time for the
    polaron route); truncation_error is an estimate of what the quadrature
    left out, not a strict bound.
    """

    gamma: float
    method: RateMethod
    window: float
    truncation_error: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"rate must be >= 0, got {self.gamma}")


def golden_rule_single(
    delta_tilde: float, bath: BathSpec, stimulated: bool = False
) -> RateResult:
    """One-boson emission rate 2 pi J(splitting).

    stimulated=True multiplies by (1 + N(splitting)), extending the
    zero-temperature form to a thermally occupied mode.
    """
    if delta_tilde <= 0:
        raise ValueError("delta_tilde must be positive")
    gamma = 2.0 * np.pi * float(spectral_density(bath, delta_tilde))
    if stimulated and bath.T > 0.0:
        gamma *= 1.0 + float(occupation(bath, delta_tilde))
    return RateResult(gamma, RateMethod.GOLDEN_SINGLE, delta_tilde, 0.0)


def golden_rule_two(delta_tilde: float, bath: BathSpec, n_nodes: int = 64) -> RateResult:
    """Two-boson emission rate, the pair sharing the splitting.

    rate = (2 pi / E^2) int_0^split J(w) J(split - w) (1 + N(w)) (1 + N') dw.
    The endpoint power laws w^eta are absorbed into a Gauss-Jacobi rule, so
    for a pure power law the Beta-function closed form
    (2 pi / E^2) alpha^2 split^(2 eta + 1) B(eta + 1, eta + 1) is reproduced
    to quadrature precision.
    """
    if delta_tilde <= 0:
        raise ValueError("delta_tilde must be positive")
    if n_nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    coarse = _two_boson_inner(delta_tilde, bath, n_nodes // 2)
    fine = _two_boson_inner(delta_tilde, bath, n_nodes)
    pref = 2.0 * np.pi / bath.E**2 * bath.alpha**2 * delta_tilde ** (2.0 * bath.eta + 1.0)
    return RateResult(
        pref * fine, RateMethod.GOLDEN_TWO, delta_tilde, pref * abs(fine - coarse)
    )


def _two_boson_inner(d: float, bath: BathSpec, n_nodes: int) -> float:
    """Dimensionless convolution integral with the alpha^2 d^(2 eta + 1) scaled out."""
    eta = bath.eta
    if bath.cutoff is CutoffForm.HARD and d > bath.omega_c:
        if d >= 2.0 * bath.omega_c:
            return 0.0
        # both bosons must fit under the cutoff; no endpoint weight remains
        t_lo, t_hi = 1.0 - bath.omega_c / d, bath.omega_c / d
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        t = 0.5 * (t_lo + t_hi) + 0.5 * (t_hi - t_lo) * x
        core = t**eta * (1.0 - t) ** eta * _stim(bath, d * t) * _stim(bath, d * (1.0 - t))
        return 0.5 * (t_hi - t_lo) * float(np.sum(w * core))
    x, w = roots_jacobi(n_nodes, eta, eta)
    t = 0.5 * (1.0 + x)
    cc = _cut(bath, d * t) * _cut(bath, d * (1.0 - t))
    core = cc * _stim(bath, d * t) * _stim(bath, d * (1.0 - t))
    return 2.0 ** (-2.0 * eta - 1.0) * float(np.sum(w * core))


def _cut(bath, w):
    if bath.cutoff is CutoffForm.EXPONENTIAL:
        return np.exp(-np.asarray(w) / bath.omega_c)
    return np.where(np.asarray(w) <= bath.omega_c, 1.0, 0.0)


def _stim(bath, w):
    if bath.T == 0.0:
        return np.ones_like(np.asarray(w, dtype=float))
    with np.errstate(over="ignore"):
        return 1.0 + 1.0 / np.expm1(np.asarray(w, dtype=float) / bath.T)


def polaron_correlator_exponent(bath: BathSpec, t: float) -> complex:
    """W(t) = 4 int dw J/w^2 [(1 - cos wt) coth(w/2T) + i sin wt].

    The infrared is tamed by keeping 1 - cos explicit below the first
    oscillation; beyond it the oscillatory parts go through QUADPACK's
    cos/sin weights and the smooth remainder through a log-substituted quad.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0 or bath.alpha == 0.0:
        return 0.0 + 0.0j
    hi = _support_ceiling(bath)
    a = min(0.5 / t, hi)

    def coth_half(w):
        if bath.T == 0.0:
            return 1.0
        return 1.0 / np.tanh(0.5 * w / bath.T)

    def head_re(w):
        return 4.0 * spectral_density(bath, w) / w**2 * (1.0 - np.cos(w * t)) * coth_half(w)

    def head_im(w):
        return 4.0 * spectral_density(bath, w) / w**2 * np.sin(w * t)

    re, _ = quad(head_re, 0.0, a, epsabs=1e-13, epsrel=1e-10, limit=300)
    im, _ = quad(head_im, 0.0, a, epsabs=1e-13, epsrel=1e-10, limit=300)
    if a < hi:
        smooth, _ = quad(
            lambda y: 4.0
            * spectral_density(bath, np.exp(y))
            * coth_half(np.exp(y))
            / np.exp(y),
            np.log(a),
            np.log(hi),
            epsabs=1e-13,
            epsrel=1e-10,
            limit=300,
        )
        osc_re, _ = quad(
            lambda w: 4.0 * spectral_density(bath, w) / w**2 * coth_half(w),
            a,
            hi,
            weight="cos",
            wvar=t,
            epsabs=1e-13,
            epsrel=1e-10,
            limit=300,
        )
        osc_im, _ = quad(
            lambda w: 4.0 * spectral_density(bath, w) / w**2,
            a,
            hi,
            weight="sin",
            wvar=t,
            epsabs=1e-13,
            epsrel=1e-10,
            limit=300,
        )
        re += smooth - osc_re
        im += osc_im
    return complex(re, im)


class _CorrelatorProfile:
    """Splined W(t) over [0, t_max], built once per bath and extended on demand."""

    def __init__(self, bath: BathSpec):
        self.bath = bath
        self.t_max = 0.0
        self._ts = [0.0]
        self._re = [0.0]
        self._im = [0.0]
        self._re_spline = None
        self._im_spline = None

    def extend_to(self, t_max: float):
        if t_max <= self.t_max:
            return
        t_lo = max(self._ts[-1], 1e-4 / _support_ceiling(self.bath))
        fresh = np.geomspace(t_lo, t_max, 1 + int(np.ceil(24 * np.log10(t_max / t_lo))))
        fresh = fresh[fresh > self._ts[-1]]
        for t in fresh:
            w = polaron_correlator_exponent(self.bath, float(t))
            self._ts.append(float(t))
            self._re.append(w.real)
            self._im.append(w.imag)
        self.t_max = self._ts[-1]
        self._re_spline = CubicSpline(self._ts, self._re)
        self._im_spline = CubicSpline(self._ts, self._im)

    def re(self, t):
        return self._re_spline(t)

    def im(self, t):
        return self._im_spline(t)


@lru_cache(maxsize=32)
def _profile(bath: BathSpec) -> _CorrelatorProfile:
    return _CorrelatorProfile(bath)


def incoherent_rate(
    delta: float,
    epsilon: float,
    bath: BathSpec,
    decay_floor: float = 1e-12,
    max_windows: int = 24,
) -> RateResult:
    """Dressed-tunneling decay rate at bias epsilon.

    Positive epsilon releases energy to the bath. Raises ConvergenceError if
    the displacement correlator stops growing before its weight exp(-Re W)
    has fallen below decay_floor, since then a coherent fraction survives and
    no rate exists.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not 0.0 < decay_floor < 1.0:
        raise ValueError("decay_floor must be in (0, 1)")
    target = -np.log(decay_floor)
    prof = _profile(bath)
    t_max = 10.0 / max(abs(epsilon), 1e-3 * bath.E0)
    for _ in range(max_windows):
        prof.extend_to(t_max)
        w_end = prof.re(prof.t_max)
        if w_end >= target:
            break
        if w_end - prof.re(0.5 * prof.t_max) < 0.05:
            raise ConvergenceError(
                "correlator exponent plateaued before decay; the coherent "
                "fraction survives and no incoherent rate exists"
            )
        t_max = 2.0 * prof.t_max
    else:
        raise ConvergenceError("correlator still undecayed after window doubling")
    # locate where decay is reached, then integrate only that far
    ts = np.asarray(prof._ts)
    reached = np.asarray(prof._re) >= target
    t_end = float(ts[int(np.argmax(reached))]) if reached.any() else float(ts[-1])
    n = int(np.ceil(POINTS_PER_PERIOD * t_end * abs(epsilon) / (2.0 * np.pi)))
    n = max(n, 2001)
    n += n % 2  # Simpson wants an even interval count
    t = np.linspace(0.0, t_end, n + 1)
    integrand = np.exp(-prof.re(t)) * np.cos(epsilon * t - prof.im(t))
    val = simpson(integrand, x=t)
    gamma = float(0.5 * delta**2 * val)
    # tail beyond t_end oscillates under an envelope already below decay_floor
    leftover = 0.5 * delta**2 * decay_floor * min(t_end, 2.0 / max(abs(epsilon), 1e-12))
    return RateResult(gamma, RateMethod.INCOHERENT_POLARON, t_end, float(leftover))


def splitting_from_size(n_sites: float, e0: float = 1.0) -> float:
    """Minimum-gap law: the crossing splitting is E0 / sqrt(N - 1)."""
    if n_sites <= 1:
        raise ValueError("need n_sites > 1")
    return e0 / np.sqrt(n_sites - 1.0)


def rate_scaling_sweep(
    n_list,
    bath: BathSpec,
    method: RateMethod,
    epsilon: float = 0.0,
    stimulated: bool = False,
) -> ExponentFit:
    """Fit the size scaling of the selected rate with splitting(N) = E0/sqrt(N-1).

    The incoherent channel carries its splitting squared out front, so its
    fitted slope is -1 regardless of bath; the golden-rule channels scale as
    -eta/2 (one boson) and -(2 eta + 1)/2 (two bosons).
    """
    sizes = np.asarray(n_list, dtype=float)
    gammas = []
    for n in sizes:
        d = splitting_from_size(n, bath.E0)
        if method is RateMethod.GOLDEN_SINGLE:
            r = golden_rule_single(d, bath, stimulated=stimulated)
        elif method is RateMethod.GOLDEN_TWO:
            r = golden_rule_two(d, bath)
        elif method is RateMethod.INCOHERENT_POLARON:
            r = incoherent_rate(d, epsilon, bath)
        else:
            raise ValueError(f"unknown rate method {method!r}")
        gammas.append(r.gamma)
    return power_law_fit(sizes, np.asarray(gammas))
