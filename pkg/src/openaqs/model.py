"""Two-level reduction of the unstructured-search avoided crossing.

The interpolating Hamiltonian H(s) = (1-s) E0 (1 - |u><u|) + s E0 (1 - |m><m|),
with |u> the uniform superposition over N basis states and |m> the marked state,
conserves span{|m>, |u>}. In the orthonormal basis {|m>, |m_perp>} the active
block is

    H2(s) = (E0/2) I - (1/2) (eps(s) tau_z + delta(s) tau_x),

so the physics near the crossing is a bias eps(s), a tunneling delta(s), and a
spectral gap sqrt(eps^2 + delta^2). The remaining N-2 states sit inert at E0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SearchInstance:
    """Problem instance: search-space size N (optionally N = 2**L) and energy scale E0."""

    N: int
    E0: float = 1.0
    L: int | None = None

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.E0 <= 0:
            raise ValueError(f"E0 must be positive, got {self.E0}")
        if self.L is not None and 2 ** self.L != self.N:
            raise ValueError(f"L={self.L} inconsistent with N={self.N}")


@dataclass(frozen=True)
class TwoLevelPoint:
    """Reduced couplings at one schedule point, in absolute energy units."""

    s: float
    epsilon: float
    delta: float


@dataclass(frozen=True, eq=False)
class ProjectedPauli:
    """A single-bit Pauli projected into the {|m>, |m_perp>} block.

    axis is 'x', 'y' or 'z'; sj = +-1 is the value of that bit in the marked
    string. m is the 2x2 Hermitian block.
    """

    axis: str
    sj: int
    m: np.ndarray


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("schedule parameter s must lie in [0, 1]")
    return s


def _eps_delta_units(N, s):
    """eps(s) and delta(s) in units of E0, vectorized over s."""
    N = float(N)
    eps = 2.0 * s - 1.0 + 2.0 * (1.0 - s) / N
    delta = 2.0 * np.sqrt(N - 1.0) / N * (1.0 - s)
    return eps, delta


def two_level_params(instance: SearchInstance, s: float) -> TwoLevelPoint:
    """Bias and tunneling of the reduced two-level block at schedule point s.

    eps(s) = E0 (2s - 1 + 2(1-s)/N) crosses zero at s* = (N-2)/(2(N-1));
    delta(s) = E0 * 2 sqrt(N-1)/N * (1-s) stays positive until s = 1.
    """
    s = float(_check_s(s))
    eps, delta = _eps_delta_units(instance.N, s)
    return TwoLevelPoint(s=s, epsilon=instance.E0 * eps, delta=instance.E0 * delta)


def gap(instance: SearchInstance, s) -> float | np.ndarray:
    """Spectral gap sqrt(eps(s)^2 + delta(s)^2) of the active block. Accepts array s."""
    s = _check_s(s)
    eps, delta = _eps_delta_units(instance.N, s)
    out = instance.E0 * np.hypot(eps, delta)
    return float(out) if out.ndim == 0 else out


def crossing_point(instance: SearchInstance) -> float:
    """Schedule point s* where the bias vanishes: (N-2)/(2(N-1))."""
    N = float(instance.N)
    return (N - 2.0) / (2.0 * (N - 1.0))


def min_gap(instance: SearchInstance) -> tuple[float, float]:
    """Locate the gap minimum: coarse scan then golden-section refinement.

    Returns (s_min, gap_min). The scan uses 1024 points; golden section then
    narrows the bracketing interval below 1e-12 in s. The minimum of the
    quadratic eps^2 + delta^2 is unique, so the refinement is safe.
    """
    N = float(instance.N)
    grid = np.linspace(0.0, 1.0, 1024)
    eps, delta = _eps_delta_units(N, grid)
    g2 = eps * eps + delta * delta
    k = int(np.argmin(g2))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]

    def f(s):
        e, d = _eps_delta_units(N, s)
        return e * e + d * d

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d_ = a + invphi * (b - a)
    fc, fd = f(c), f(d_)
    while b - a > 1e-12:
        if fc < fd:
            b, d_, fd = d_, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d_, fd
            d_ = a + invphi * (b - a)
            fd = f(d_)
    s_min = 0.5 * (a + b)
    return s_min, instance.E0 * float(np.sqrt(f(s_min)))


_PAULI_AXES = ("x", "y", "z")


def projected_pauli(instance: SearchInstance, axis: str, sj: int = 1) -> ProjectedPauli:
    """Single-bit Pauli operator projected into the active two-level block.

    In the {|m>, |m_perp>} basis:

        x: 1/(N-1) * [[0, sqrt(N-1)], [sqrt(N-1), N-2]]
        y: sj/sqrt(N-1) * [[0, -i], [i, 0]]
        z: sj/(N-1) * [[N-1, 0], [0, -1]]

    Off-diagonal weight is 1/sqrt(N-1) for x and y, zero for z, which is why
    a large search space suppresses projected transverse noise but not
    longitudinal (dephasing) noise.
    """
    if axis not in _PAULI_AXES:
        raise ValueError(f"axis must be one of {_PAULI_AXES}, got {axis!r}")
    if sj not in (-1, 1):
        raise ValueError(f"sj must be +1 or -1, got {sj}")
    N = float(instance.N)
    r = np.sqrt(N - 1.0)
    if axis == "x":
        m = np.array([[0.0, r], [r, N - 2.0]], dtype=complex) / (N - 1.0)
    elif axis == "y":
        m = sj / r * np.array([[0.0, -1j], [1j, 0.0]])
    else:
        m = sj / (N - 1.0) * np.array([[N - 1.0, 0.0], [0.0, -1.0]], dtype=complex)
    return ProjectedPauli(axis=axis, sj=sj, m=m)
