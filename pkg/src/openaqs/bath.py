"""Bosonic environments: power-law spectral densities and their discretizations.

A bath is J(w) = alpha * w**eta with an exponential or hard cutoff at omega_c,
held at temperature T. E0 is the energy scale of the system block the bath
couples to; E is the virtual-level scale entering two-boson processes
(default E0/2). All quantities are in absolute energy units with hbar = kB = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.integrate import quad

from .errors import ValidityError


class CutoffForm(Enum):
    EXPONENTIAL = "exponential"
    HARD = "hard"


@dataclass(frozen=True)
class BathSpec:
    """Immutable bath parameters.

    alpha   coupling strength (dimension energy**(1-eta))
    eta     spectral exponent, > 0 (sub-ohmic < 1, ohmic = 1, super-ohmic > 1)
    omega_c cutoff frequency
    cutoff  exponential e**(-w/omega_c) or hard step at omega_c
    T       temperature (0 allowed)
    E0      system energy scale
    E       virtual-level scale for two-boson processes, defaults to E0/2
    """

    alpha: float
    eta: float
    omega_c: float
    cutoff: CutoffForm = CutoffForm.EXPONENTIAL
    T: float = 0.0
    E0: float = 1.0
    E: float | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.E0 <= 0:
            raise ValueError(f"E0 must be positive, got {self.E0}")
        if self.E is None:
            object.__setattr__(self, "E", 0.5 * self.E0)
        elif self.E <= 0:
            raise ValueError(f"E must be positive, got {self.E}")

    def with_temperature(self, T: float) -> "BathSpec":
        return replace(self, T=T)

    def with_alpha(self, alpha: float) -> "BathSpec":
        return replace(self, alpha=alpha)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "eta": self.eta,
            "omega_c": self.omega_c,
            "cutoff": self.cutoff.value,
            "T": self.T,
            "E0": self.E0,
            "E": self.E,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BathSpec":
        d = dict(d)
        if "cutoff" in d:
            d["cutoff"] = CutoffForm(d["cutoff"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class DiscretizedBath:
    """Finite mode set (omegas, couplings g_k) sampling a BathSpec.

    Normalization: g_k**2 = J(omega_k) * dw_k, so mode sums converge to the
    corresponding J integrals.
    """

    omegas: np.ndarray
    couplings: np.ndarray
    spec: BathSpec


@dataclass(frozen=True, eq=False)
class DressedModeParams:
    """Perturbatively dressed mode parameters after eliminating the far level."""

    omegas_tilde: np.ndarray
    couplings_tilde: np.ndarray
    E_tilde: float
    a: float
    induced_bias: float


class Scheme(Enum):
    LINEAR = "linear"
    LOGARITHMIC = "logarithmic"


def spectral_density(spec: BathSpec, omega):
    """J(w) = alpha w**eta with the chosen cutoff; zero for w <= 0."""
    w = np.asarray(omega, dtype=float)
    with np.errstate(invalid="ignore"):
        body = spec.alpha * np.power(np.clip(w, 0.0, None), spec.eta)
    if spec.cutoff is CutoffForm.EXPONENTIAL:
        body = body * np.exp(-np.clip(w, 0.0, None) / spec.omega_c)
    else:
        body = np.where(w <= spec.omega_c, body, 0.0)
    out = np.where(w > 0.0, body, 0.0)
    return float(out) if out.ndim == 0 else out


def occupation(spec: BathSpec, omega):
    """Bose-Einstein occupation 1/(exp(w/T) - 1); exactly zero at T = 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("occupation requires omega > 0")
    if spec.T == 0.0:
        out = np.zeros_like(w)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(w / spec.T)
    return float(out) if out.ndim == 0 else out


def _support_ceiling(spec: BathSpec) -> float:
    """Frequency above which the spectral weight is numerically negligible."""
    if spec.cutoff is CutoffForm.HARD:
        return spec.omega_c
    return (50.0 + 12.0 * spec.eta) * max(spec.omega_c, spec.T)


def _quad(f, a, b, points=None):
    val, _ = quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200, points=points)
    return val


def _j_over_omega_integral(spec: BathSpec) -> float:
    """Integral of J(w)/w over all w, endpoint-safe for eta < 1.

    Substituting w = omega_c * t**(1/eta) removes the w**(eta-1) endpoint, so
    plain adaptive quadrature sees a smooth integrand on [0, 1].
    """
    al, eta, wc = spec.alpha, spec.eta, spec.omega_c
    if spec.cutoff is CutoffForm.HARD:
        return al * wc**eta / eta

    def head(t):
        return np.exp(-(t ** (1.0 / eta)))

    core = (al * wc**eta / eta) * _quad(head, 0.0, 1.0)
    tail = _quad(lambda w: al * w ** (eta - 1.0) * np.exp(-w / wc), wc, np.inf)
    return core + tail


def backaction_a(spec: BathSpec, prefactor: float) -> float:
    """Dimensionless backaction prefactor * integral of J(w)/w.

    The prefactor is supplied by the caller because different eliminations
    weight the same integral differently (1/E0 for the far-level dressing,
    4/E for the two-boson channel).
    """
    return prefactor * _j_over_omega_integral(spec)


def induced_bias(spec: BathSpec) -> float:
    """Bath-induced bias shift (E0/4) a (3a - 2) / (1 - a)^2 with a = (1/E0) int J/w.

    Vanishes at a = 0 and a = 2/3, negative in between. Singular as a -> 1.
    """
    a = backaction_a(spec, 1.0 / spec.E0)
    if a >= 1.0:
        raise ValidityError(f"backaction a = {a:.3f} >= 1, dressing diverges")
    return 0.25 * spec.E0 * a * (3.0 * a - 2.0) / (1.0 - a) ** 2


@dataclass(frozen=True)
class ValidityReport:
    """Weak-coupling diagnostics; ratios should stay well below 1."""

    max_j_over_e0: float
    max_j_occ_over_e: float
    alpha_t_over_e: float
    threshold: float
    passed: bool


def validity_check(spec: BathSpec, threshold: float = 0.1) -> ValidityReport:
    """Scan J/E0 and J(1+N)/E over frequency and compare against threshold.

    For eta < 1 at T > 0 the product J(w)(1+N(w)) diverges as w -> 0 and the
    report carries inf; for eta = 1 the w -> 0 limit is alpha*T.
    """
    w_hi = spec.omega_c * (60.0 if spec.cutoff is CutoffForm.EXPONENTIAL else 1.0)
    w_hi = max(w_hi, 60.0 * spec.T) if spec.T > 0 else w_hi
    w = np.geomspace(1e-12 * spec.omega_c, w_hi, 4001)
    j = spectral_density(spec, w)
    max_j = float(np.max(j)) / spec.E0
    occ = occupation(spec, w) if spec.T > 0 else np.zeros_like(w)
    jn = j * (1.0 + occ)
    max_jn = float(np.max(jn))
    if spec.T > 0:
        if spec.eta < 1.0:
            max_jn = np.inf
        elif spec.eta == 1.0:
            max_jn = max(max_jn, spec.alpha * spec.T)
    max_jn /= spec.E
    ratio_at = spec.alpha * spec.T / spec.E
    passed = bool(max_j <= threshold and max_jn <= threshold)
    return ValidityReport(
        max_j_over_e0=max_j,
        max_j_occ_over_e=max_jn,
        alpha_t_over_e=ratio_at,
        threshold=threshold,
        passed=passed,
    )


def discretize(
    spec: BathSpec,
    n_modes: int,
    scheme: Scheme = Scheme.LOGARITHMIC,
    omega_min: float | None = None,
    omega_max: float | None = None,
) -> DiscretizedBath:
    """Sample the bath on a linear or logarithmic frequency grid.

    Defaults: omega_max = 20 max(T, omega_c) (exactly omega_c for a hard
    cutoff) and, for the log grid, omega_min spanning six decades below
    omega_max with the first mode sitting at omega_min itself.
    """
    if n_modes < 2:
        raise ValueError("need at least 2 modes")
    if omega_max is None:
        if spec.cutoff is CutoffForm.HARD:
            omega_max = spec.omega_c
        else:
            omega_max = 20.0 * max(spec.T, spec.omega_c)
    if scheme is Scheme.LINEAR:
        dw = omega_max / n_modes
        w = (np.arange(n_modes) + 0.5) * dw
        widths = np.full(n_modes, dw)
    else:
        if omega_min is None:
            omega_min = 1e-6 * omega_max
        if not 0.0 < omega_min < omega_max:
            raise ValueError("need 0 < omega_min < omega_max")
        w = np.geomspace(omega_min, omega_max, n_modes)
        r = (omega_max / omega_min) ** (1.0 / (n_modes - 1))
        widths = w * (np.sqrt(r) - 1.0 / np.sqrt(r))
    g = np.sqrt(spectral_density(spec, w) * widths)
    return DiscretizedBath(omegas=w, couplings=g, spec=spec)


def dressed_mode_params(bath: DiscretizedBath) -> DressedModeParams:
    """Mode frequencies and couplings after integrating out the far level.

    Implements, to second order in g_k/E0:

        a        = (1/E0) sum_k g_k^2 / w_k
        w~_k     = w_k - g_k^2 / (2 E0)
        g~_k     = ((1-2a)/(1-a)) (1 - (g_k/2E0) S-_k + (g_k/2E0) S+_k) g_k/2
        E~       = ((1-a)/(1-2a))^2 E0
        bias     = (E0/4) a (3a-2)/(1-a)^2

    with S-_k = sum_{l != k} g_l/(w_k - w_l) and S+_k = sum_l g_l/(w_k + w_l).
    Requires a < 1/2; beyond that the dressed level E~ has already diverged.
    """
    w, g = bath.omegas, bath.couplings
    E0 = bath.spec.E0
    a = float(np.sum(g * g / w)) / E0
    if a >= 0.5:
        raise ValidityError(f"backaction a = {a:.3f} >= 1/2, dressed level diverges")
    diff = w[:, None] - w[None, :]
    np.fill_diagonal(diff, np.inf)  # exclude l = k from the difference sum
    s_minus = np.sum(g[None, :] / diff, axis=1)
    s_plus = np.sum(g[None, :] / (w[:, None] + w[None, :]), axis=1)
    shrink = (1.0 - 2.0 * a) / (1.0 - a)
    g_tilde = shrink * (1.0 - g / (2.0 * E0) * s_minus + g / (2.0 * E0) * s_plus) * g / 2.0
    w_tilde = w - g * g / (2.0 * E0)
    e_tilde = E0 / shrink**2
    bias = 0.25 * E0 * a * (3.0 * a - 2.0) / (1.0 - a) ** 2
    return DressedModeParams(
        omegas_tilde=w_tilde,
        couplings_tilde=g_tilde,
        E_tilde=e_tilde,
        a=a,
        induced_bias=bias,
    )


def perturbation_validity(bath: DiscretizedBath) -> np.ndarray:
    """Per-mode size of the second-order eigenvector correction.

    Returns (g_k^2/4E0^2) [sum_{l != k} g_l^2/(w_k-w_l)^2 + sum_l g_l^2/(w_k+w_l)^2],
    whose continuum limit is of order J(w_k)^2/E0^2. Values must stay small for
    the dressed-mode construction to make sense.
    """
    w, g = bath.omegas, bath.couplings
    E0 = bath.spec.E0
    diff = w[:, None] - w[None, :]
    np.fill_diagonal(diff, np.inf)
    g2 = g * g
    s = np.sum(g2[None, :] / diff**2, axis=1)
    s += np.sum(g2[None, :] / (w[:, None] + w[None, :]) ** 2, axis=1)
    return g2 / (4.0 * E0 * E0) * s
