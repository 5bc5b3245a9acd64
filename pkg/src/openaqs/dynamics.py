"""Sweep dynamics for the reduced two-level crossing.

Closed evolution integrates the Schrodinger equation with a fourth-order
Magnus stepper specialized to 2x2 Hamiltonians: each step is an exact
rotation exp(-i v.tau), so the state norm is conserved by construction and
the step error tracks how fast the Hamiltonian varies, not how fast the
phase winds. Away from the crossing the stepper therefore takes strides that
are limited only by the schedule, which is what makes the runtime sweeps
over large search spaces affordable.

Dephasing evolution propagates the Bloch vector r = (x, y, z) under

    dx/dt =  eps(t) y - gamma_phi x
    dy/dt = -eps(t) x + delta(t) z - gamma_phi y
    dz/dt = -delta(t) y

with the same Magnus construction on the 3x3 generator. The density-matrix
trace is carried implicitly (r has no trace component), so trace
preservation is exact; the Bloch length contracts monotonically for
gamma_phi >= 0.

The local schedule integrates ds/dt = eps_adiab * gap(s)^2 / E0. For this
model gap^2 is a quadratic in s, so time-of-passage and its inverse come in
closed form; the schedule is still tabulated on a dense grid per contract,
with nodes crowding near the crossing where s(t) bends.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import expm

from .critical import ExponentFit, power_law_fit
from .errors import ConvergenceError
from .model import SearchInstance, _eps_delta_units

GAUSS_OFFSETS = (0.5 - np.sqrt(3.0) / 6.0, 0.5 + np.sqrt(3.0) / 6.0)
STEP_SHRINK_FLOOR = 0.2
STEP_GROW_CEIL = 5.0


class ScheduleKind(Enum):
    LINEAR = "linear"
    LOCAL_ADIABATIC = "local-adiabatic"


@dataclass(eq=False)
class Schedule:
    """Tabulated monotone map t -> s with s(0) = 0 and s(total_time) = 1."""

    kind: ScheduleKind
    total_time: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise ValueError("times and values must be matching 1-d arrays")
        if self.times.size < 2:
            raise ValueError("need at least two schedule nodes")
        if self.times[0] != 0.0 or abs(self.times[-1] - self.total_time) > 1e-12 * self.total_time:
            raise ValueError("times must run from 0 to total_time")
        if self.values[0] != 0.0 or abs(self.values[-1] - 1.0) > 1e-12:
            raise ValueError("schedule must start at s=0 and end at s=1")
        if np.any(np.diff(self.times) <= 0) or np.any(np.diff(self.values) < 0):
            raise ValueError("schedule nodes must be monotone")
        self._interp = PchipInterpolator(self.times, self.values)

    def value(self, t):
        """s at time t, clamped to the sweep interval."""
        return self._interp(np.clip(t, 0.0, self.total_time))

    def with_total_time(self, total_time: float) -> Schedule:
        """Same s-path traversed in a different total time."""
        if total_time <= 0:
            raise ValueError("total_time must be positive")
        scale = total_time / self.total_time
        return Schedule(self.kind, total_time, self.times * scale, self.values.copy())


def make_linear_schedule(total_time: float, n_nodes: int = 17) -> Schedule:
    """s = t / total_time."""
    if total_time <= 0:
        raise ValueError("total_time must be positive")
    grid = np.linspace(0.0, 1.0, n_nodes)
    return Schedule(ScheduleKind.LINEAR, total_time, total_time * grid, grid)


def local_total_time(instance: SearchInstance, adiabaticity_eps: float) -> float:
    """Closed-form duration of the local schedule, O(sqrt(N)) for large N."""
    if adiabaticity_eps <= 0:
        raise ValueError("adiabaticity_eps must be positive")
    root = np.sqrt(instance.N - 1.0)
    return float(
        instance.N / (root * adiabaticity_eps * instance.E0) * np.arctan(root)
    )


def make_local_schedule(
    instance: SearchInstance, adiabaticity_eps: float, n_nodes: int = 2001
) -> Schedule:
    """Schedule obeying ds/dt = adiabaticity_eps * gap(s)^2 / E0.

    gap(s)^2 / E0^2 = A s^2 - A s + 1 with A = 4(N-1)/N, so the passage time
    is an arctan in s and inverts exactly; the tabulation below evaluates the
    inverse on a uniform time grid, which crowds nodes in s near the
    crossing automatically.
    """
    if adiabaticity_eps <= 0:
        raise ValueError("adiabaticity_eps must be positive")
    if n_nodes < 1001:
        raise ValueError("tabulation needs at least 1001 nodes")
    root = np.sqrt(instance.N - 1.0)
    theta0 = np.arctan(root)
    total = local_total_time(instance, adiabaticity_eps)
    theta = np.linspace(-theta0, theta0, n_nodes)
    times = (theta + theta0) / (2.0 * theta0) * total
    s = 0.5 * (1.0 + np.tan(theta) / root)
    s[0], s[-1] = 0.0, 1.0
    return Schedule(ScheduleKind.LOCAL_ADIABATIC, total, times, s)


def make_schedule(
    instance: SearchInstance, kind: ScheduleKind, total_time: float
) -> Schedule:
    """Schedule of the given kind with the given duration."""
    if kind is ScheduleKind.LINEAR:
        return make_linear_schedule(total_time)
    return make_local_schedule(instance, 1.0).with_total_time(total_time)


@dataclass(frozen=True)
class DephasingParams:
    """Pure dephasing rate along tau_z, in energy units (hbar = 1)."""

    gamma_phi: float

    def __post_init__(self):
        if self.gamma_phi < 0:
            raise ValueError("gamma_phi must be >= 0")


def dephasing_rate_from_bath(bath) -> DephasingParams:
    """Convention: gamma_phi = 2 pi alpha T, the high-temperature pure-dephasing
    rate of an ohmic bath. A rough bridge for qualitative sweeps, nothing more."""
    return DephasingParams(2.0 * np.pi * bath.alpha * bath.T)


@dataclass(eq=False)
class EvolutionResult:
    """Outcome of one sweep: marked-state population at s = 1 plus diagnostics.

    trajectory, when sampling was requested, holds rows (t, x, y, z) of the
    Bloch vector; norm_drift is the accumulated deviation of the state norm
    (closed) or an upper Bloch-length excess (dephasing), both ~0.
    """

    success_prob: float
    total_time: float
    trajectory: np.ndarray | None
    norm_drift: float
    steps: int

    def __post_init__(self):
        if not -1e-9 <= self.success_prob <= 1.0 + 1e-9:
            raise ValueError(f"success_prob out of range: {self.success_prob}")
        self.success_prob = float(np.clip(self.success_prob, 0.0, 1.0))


def _initial_state(instance: SearchInstance) -> np.ndarray:
    """Ground state at s = 0: the uniform superposition in the {m, m_perp} basis."""
    n = float(instance.N)
    return np.array([np.sqrt(1.0 / n), np.sqrt((n - 1.0) / n)], dtype=complex)


def _h_coeffs(instance: SearchInstance, schedule: Schedule, t0: float, dt: float):
    """(hx, hz) of H = hx tau_x + hz tau_z at the two Gauss nodes of [t0, t0+dt]."""
    ts = t0 + dt * np.asarray(GAUSS_OFFSETS)
    s = schedule.value(ts)
    eps, delta = _eps_delta_units(instance.N, s)
    e0 = instance.E0
    return -0.5 * e0 * delta, -0.5 * e0 * eps


def _su2_apply(psi, vx, vy, vz):
    """exp(-i v.tau) psi, exactly unitary."""
    a = np.sqrt(vx * vx + vy * vy + vz * vz)
    f = np.sinc(a / np.pi)  # sin(a)/a, stable at a = 0
    c = np.cos(a)
    top = c * psi[0] - 1j * f * (vz * psi[0] + (vx - 1j * vy) * psi[1])
    bot = c * psi[1] - 1j * f * ((vx + 1j * vy) * psi[0] - vz * psi[1])
    return np.array([top, bot])


def _magnus_su2(instance, schedule, psi, t0, dt):
    hx, hz = _h_coeffs(instance, schedule, t0, dt)
    vx = 0.5 * dt * (hx[0] + hx[1])
    vz = 0.5 * dt * (hz[0] + hz[1])
    vy = np.sqrt(3.0) / 6.0 * dt * dt * (hz[1] * hx[0] - hx[1] * hz[0])
    return _su2_apply(psi, vx, vy, vz)


def _bloch_generator(instance, schedule, gamma, t0, dt):
    hx, hz = _h_coeffs(instance, schedule, t0, dt)
    eps, delta = -2.0 * hz, -2.0 * hx
    mats = []
    for i in (0, 1):
        mats.append(
            np.array(
                [
                    [-gamma, eps[i], 0.0],
                    [-eps[i], -gamma, delta[i]],
                    [0.0, -delta[i], 0.0],
                ]
            )
        )
    return mats


def _magnus_bloch(instance, schedule, gamma, r, t0, dt):
    a1, a2 = _bloch_generator(instance, schedule, gamma, t0, dt)
    omega = 0.5 * dt * (a1 + a2) + np.sqrt(3.0) / 12.0 * dt * dt * (a2 @ a1 - a1 @ a2)
    return expm(omega) @ r


def _adaptive_sweep(step_fn, state0, total_time, rtol, sample_times, project):
    """Generic doubling-controlled Magnus driver shared by both pictures.

    step_fn(state, t, dt) -> state; project(state) -> Bloch row for sampling.
    Returns (state, trajectory or None, accepted step count).
    """
    state = state0
    t = 0.0
    dt = max(total_time * 1e-3, 1e-12)
    rows = []
    sample_iter = iter(sample_times) if sample_times is not None else None
    next_sample = next(sample_iter, None) if sample_iter else None
    if next_sample == 0.0:
        rows.append((0.0, *project(state)))
        next_sample = next(sample_iter, None)
    steps = 0
    max_steps = 2_000_000
    while t < total_time:
        clipped = False
        h = min(dt, total_time - t)
        if next_sample is not None and t + h > next_sample:
            h = next_sample - t
            clipped = True
        full = step_fn(state, t, h)
        mid = step_fn(state, t, 0.5 * h)
        halves = step_fn(mid, t + 0.5 * h, 0.5 * h)
        err = np.linalg.norm(full - halves) / 15.0
        factor = 0.9 * (rtol / max(err, 1e-300)) ** 0.2
        if err <= rtol or h <= 1e-14 * total_time:
            state = halves
            t += h
            steps += 1
            if next_sample is not None and t >= next_sample - 1e-15 * total_time:
                rows.append((t, *project(state)))
                next_sample = next(sample_iter, None)
            if not clipped:
                dt = h * min(max(factor, STEP_SHRINK_FLOOR), STEP_GROW_CEIL)
        else:
            # shrink whether or not the step was clipped, so retries make progress
            dt = h * max(factor, STEP_SHRINK_FLOOR)
        if steps > max_steps:
            raise ConvergenceError(
                f"step budget exhausted at t={t:.3g} of {total_time:.3g} "
                f"(last step {h:.3g})"
            )
    traj = np.array(rows) if rows else None
    return state, traj, steps


def _bloch_of_psi(psi):
    x = 2.0 * (psi[0].conjugate() * psi[1]).real
    y = 2.0 * (psi[0].conjugate() * psi[1]).imag
    z = float(abs(psi[0]) ** 2 - abs(psi[1]) ** 2)
    return (float(x), float(-y), z)


def evolve_closed(
    instance: SearchInstance,
    schedule: Schedule,
    rtol: float = 1e-10,
    n_samples: int = 0,
) -> EvolutionResult:
    """Integrate the closed two-level sweep; success is the final |m> weight."""
    psi0 = _initial_state(instance)
    samples = (
        np.linspace(0.0, schedule.total_time, n_samples) if n_samples > 0 else None
    )

    def step(psi, t, dt):
        return _magnus_su2(instance, schedule, psi, t, dt)

    psi, traj, steps = _adaptive_sweep(
        step, psi0, schedule.total_time, rtol, samples, _bloch_of_psi
    )
    norm = float(np.sqrt(abs(psi[0]) ** 2 + abs(psi[1]) ** 2))
    return EvolutionResult(
        success_prob=float(abs(psi[0]) ** 2) / norm**2,
        total_time=schedule.total_time,
        trajectory=traj,
        norm_drift=abs(norm - 1.0),
        steps=steps,
    )


def evolve_dephasing(
    instance: SearchInstance,
    schedule: Schedule,
    params: DephasingParams,
    rtol: float = 1e-10,
    n_samples: int = 0,
) -> EvolutionResult:
    """Integrate the dephasing-damped sweep in the Bloch picture."""
    psi0 = _initial_state(instance)
    r0 = np.array(_bloch_of_psi(psi0))
    samples = (
        np.linspace(0.0, schedule.total_time, n_samples) if n_samples > 0 else None
    )

    def step(r, t, dt):
        return _magnus_bloch(instance, schedule, params.gamma_phi, r, t, dt)

    r, traj, steps = _adaptive_sweep(
        step, r0, schedule.total_time, rtol, samples, lambda v: tuple(v)
    )
    length = float(np.linalg.norm(r))
    return EvolutionResult(
        success_prob=0.5 * (1.0 + float(r[2])),
        total_time=schedule.total_time,
        trajectory=traj,
        norm_drift=max(length - 1.0, 0.0),
        steps=steps,
    )


class DampingClass(Enum):
    UNDERDAMPED = "underdamped"
    OVERDAMPED = "overdamped"


@dataclass(eq=False)
class RabiClassification:
    """Spectrum of the static master-equation generator at zero bias.

    Underdamped when a nonreal eigenvalue pair survives, i.e. population
    still oscillates at frequency ~delta; the collapse happens at
    gamma_phi = 2 delta, the discriminant root of the (y, z) Bloch block.
    """

    regime: DampingClass
    eigenvalues: np.ndarray
    gamma_phi: float
    delta: float


def rabi_coherence(delta: float, gamma_phi: float) -> RabiClassification:
    """Classify static (eps = 0) dephasing dynamics by the 4x4 generator spectrum."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if gamma_phi < 0:
        raise ValueError("gamma_phi must be >= 0")
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    h = -0.5 * delta * sx
    lind = -1j * (np.kron(eye, h) - np.kron(h.T, eye)) + 0.5 * gamma_phi * (
        np.kron(sz, sz) - np.kron(eye, eye)
    )
    lam = np.linalg.eigvals(lind)
    nonreal = np.abs(lam.imag) > 1e-9 * max(delta, gamma_phi)
    regime = DampingClass.UNDERDAMPED if np.any(nonreal) else DampingClass.OVERDAMPED
    return RabiClassification(regime, lam, gamma_phi, delta)


def thermalization_protocol(
    instance: SearchInstance,
    gamma_up: float,
    gamma_down: float,
    wait_time: float,
    repetitions: int = 1,
) -> float:
    """Success probability of repeated prepare-wait-measure rounds.

    Each round starts from the sudden-quench population 1/N in the marked
    state and relaxes toward gamma_down / (gamma_up + gamma_down) at total
    rate gamma_up + gamma_down; rounds are independent, so r repetitions
    give 1 - (1 - p)^r.
    """
    if gamma_up < 0 or gamma_down < 0:
        raise ValueError("rates must be >= 0")
    if wait_time < 0:
        raise ValueError("wait_time must be >= 0")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    p0 = 1.0 / instance.N
    total = gamma_up + gamma_down
    if total == 0.0:
        p = p0
    else:
        p_eq = gamma_down / total
        p = p_eq + (p0 - p_eq) * np.exp(-total * wait_time)
    return float(1.0 - (1.0 - p) ** repetitions)


def _success_at(instance, kind, total_time, gamma_phi, rtol):
    sched = make_schedule(instance, kind, total_time)
    if gamma_phi > 0.0:
        return evolve_dephasing(instance, sched, DephasingParams(gamma_phi), rtol).success_prob
    return evolve_closed(instance, sched, rtol).success_prob


def time_to_target(
    instance: SearchInstance,
    target_success: float,
    kind: ScheduleKind,
    gamma_phi: float = 0.0,
    rtol: float = 1e-8,
    time_resolution: float = 0.02,
) -> float:
    """Shortest sweep duration reaching the target success, by bisection.

    Bracketing doubles the duration until the target is crossed;
    time_resolution is the relative duration uncertainty kept after
    bisection. Success against duration can ripple slightly for fast linear
    sweeps, so the returned time means "first crossing on the sampled
    bracket", which is what the scaling fits need.
    """
    if not 1.0 / instance.N < target_success < 1.0:
        raise ValueError("target_success must lie between 1/N and 1")
    t_hi = 1.0 / instance.E0
    for _ in range(80):
        if _success_at(instance, kind, t_hi, gamma_phi, rtol) >= target_success:
            break
        t_hi *= 2.0
    else:
        raise ConvergenceError("target success not reached within the duration budget")
    t_lo = 0.5 * t_hi
    while t_hi / t_lo > 1.0 + time_resolution:
        t_mid = np.sqrt(t_lo * t_hi)
        if _success_at(instance, kind, t_mid, gamma_phi, rtol) >= target_success:
            t_hi = t_mid
        else:
            t_lo = t_mid
    return float(t_hi)


def runtime_scaling(
    n_list,
    target_success: float,
    kind: ScheduleKind,
    gamma_phi: float = 0.0,
    rtol: float = 1e-8,
    e0: float = 1.0,
) -> ExponentFit:
    """Fit how the time-to-target grows with search-space size."""
    sizes = np.asarray(list(n_list), dtype=float)
    times = np.array(
        [
            time_to_target(SearchInstance(N=int(n), E0=e0), target_success, kind, gamma_phi, rtol)
            for n in sizes
        ]
    )
    return power_law_fit(sizes, times)
