"""Phase boundaries of the dressed tunneling in coupling and temperature.

Warming a bath only ever suppresses the dressed splitting, so along the
temperature axis the Coherent/Incoherent classification changes at most once
and the threshold is found by bisection. The module also fits power laws to
threshold curves and locates the bath exponent where the one-boson and
two-boson thresholds scale identically with the bare splitting.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec
from .renorm import Process, Regime, classify


@dataclass(frozen=True)
class PhasePoint:
    alpha: float
    T: float
    regime: Regime


@dataclass(frozen=True)
class CriticalCurve:
    """Threshold temperature per coupling; inf marks no transition in range."""

    alphas: tuple
    temps: tuple


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares power law y = prefactor * x^exponent in log-log space."""

    exponent: float
    prefactor: float
    stderr: float
    r_squared: float


def power_law_fit(x, y) -> ExponentFit:
    """Fit a power law by ordinary least squares on the logs.

    Requires at least four samples spanning at least two decades in x, so the
    returned exponent is a scaling statement rather than a secant slope.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.size < 4:
        raise ValueError(f"need at least 4 samples for a power-law fit, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs strictly positive samples")
    if x.max() / x.min() < 100.0:
        raise ValueError("samples must span at least two decades in x")
    lx, ly = np.log(x), np.log(y)
    n = x.size
    mx = lx.mean()
    sxx = np.sum((lx - mx) ** 2)
    slope = np.sum((lx - mx) * (ly - ly.mean())) / sxx
    intercept = ly.mean() - slope * mx
    resid = ly - (intercept + slope * lx)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    stderr = np.sqrt(ss_res / (n - 2) / sxx)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(float(slope), float(np.exp(intercept)), float(stderr), float(r2))


def critical_temperature(
    delta: float,
    bath: BathSpec,
    p: float = 10.0,
    process: Process = Process.SINGLE,
    t_floor: float | None = None,
    t_ceil: float | None = None,
    rel_width: float = 1e-3,
) -> float:
    """Lowest temperature at which the dressed splitting collapses.

    The bath argument supplies coupling and spectrum; its own temperature is
    ignored. Returns inf when the pair stays Coherent all the way to t_ceil
    (default E0) and 0.0, with a warning, when it is already Incoherent at
    t_floor. Log-bisection down to relative width rel_width otherwise.
    """
    if t_floor is None:
        t_floor = 1e-9 * bath.E0
    if t_ceil is None:
        t_ceil = bath.E0
    if not 0 < t_floor < t_ceil:
        raise ValueError("need 0 < t_floor < t_ceil")

    def regime_at(T: float) -> Regime:
        return classify(delta, bath.with_temperature(T), p=p, process=process).regime

    if regime_at(t_ceil) is Regime.COHERENT:
        return np.inf
    if regime_at(t_floor) is Regime.INCOHERENT:
        warnings.warn(
            "already incoherent at the temperature floor; threshold is below it",
            stacklevel=2,
        )
        return 0.0
    lo, hi = t_floor, t_ceil
    while (hi - lo) > rel_width * lo:
        mid = np.sqrt(lo * hi)
        if regime_at(mid) is Regime.INCOHERENT:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def critical_curve(
    delta: float,
    bath: BathSpec,
    alphas,
    p: float = 10.0,
    process: Process = Process.SINGLE,
    **kwargs,
) -> CriticalCurve:
    """Threshold temperature for each coupling in alphas."""
    temps = tuple(
        critical_temperature(delta, bath.with_alpha(a), p=p, process=process, **kwargs)
        for a in alphas
    )
    return CriticalCurve(tuple(float(a) for a in alphas), temps)


@dataclass(frozen=True)
class PhaseDiagram:
    alphas: tuple
    temps: tuple
    coherent: tuple  # row i: coupling alphas[i]; column j: temperature temps[j]

    def points(self):
        for i, a in enumerate(self.alphas):
            for j, t in enumerate(self.temps):
                reg = Regime.COHERENT if self.coherent[i][j] else Regime.INCOHERENT
                yield PhasePoint(a, t, reg)

    def boundary_temperatures(self) -> np.ndarray:
        """Per coupling, the geometric midpoint bracketing the regime flip.

        nan where the row never flips (all coherent), and the lowest grid
        temperature where the row starts incoherent already.
        """
        out = np.empty(len(self.alphas))
        for i, row in enumerate(self.coherent):
            row = np.asarray(row, dtype=bool)
            if row.all():
                out[i] = np.nan
            elif not row[0]:
                out[i] = self.temps[0]
            else:
                j = int(np.argmin(row))  # first False
                out[i] = np.sqrt(self.temps[j - 1] * self.temps[j])
        return out


def phase_diagram(
    delta: float,
    bath: BathSpec,
    alphas,
    temps,
    p: float = 10.0,
    process: Process = Process.SINGLE,
) -> PhaseDiagram:
    """Classify every (coupling, temperature) grid point."""
    coherent = tuple(
        tuple(
            classify(delta, bath.with_alpha(a).with_temperature(t), p=p, process=process).regime
            is Regime.COHERENT
            for t in temps
        )
        for a in alphas
    )
    return PhaseDiagram(
        tuple(float(a) for a in alphas), tuple(float(t) for t in temps), coherent
    )


def threshold_scaling_exponent(
    bath: BathSpec,
    deltas,
    p: float = 10.0,
    process: Process = Process.SINGLE,
    **kwargs,
) -> ExponentFit:
    """Power-law exponent of the threshold temperature versus bare splitting."""
    deltas = np.asarray(deltas, dtype=float)
    temps = np.array(
        [critical_temperature(d, bath, p=p, process=process, **kwargs) for d in deltas]
    )
    if not np.all(np.isfinite(temps) & (temps > 0)):
        raise ValueError("threshold temperature not finite over the requested range")
    return power_law_fit(deltas, temps)


ETA_CROSSOVER = 0.25 * (3.0 + np.sqrt(17.0))


def eta_crossover(
    bath: BathSpec,
    deltas,
    eta_lo: float = 1.3,
    eta_hi: float = 2.0,
    tol: float = 0.02,
    p: float = 10.0,
) -> float:
    """Bath exponent where one- and two-boson thresholds scale alike.

    For softer baths the one-boson threshold falls faster with the bare
    splitting; for stiffer ones the two-boson threshold does. The analytic
    location of the swap is ETA_CROSSOVER; this routine measures it by
    bisecting on the difference of fitted exponents.
    """

    def gap(eta: float) -> float:
        b = dataclasses.replace(bath, eta=eta)
        single = threshold_scaling_exponent(b, deltas, p=p, process=Process.SINGLE)
        two = threshold_scaling_exponent(b, deltas, p=p, process=Process.TWO)
        return single.exponent - two.exponent

    lo, hi = eta_lo, eta_hi
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo <= 0 or g_hi >= 0:
        raise ValueError(
            "crossover not bracketed: the one-boson exponent must exceed the "
            "two-boson one at eta_lo and fall below it at eta_hi"
        )
    while (hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
