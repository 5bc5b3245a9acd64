"""Canonical diagonalization of quadratic boson Hamiltonians.

Conventions, fixed once and used everywhere:

  * mode vector beta = (b_1 .. b_n, b_1^dag .. b_n^dag), H = beta^dag M beta
    with M Hermitian and particle-hole symmetric (swapping the blocks and
    conjugating returns M), so H = sum omega b^dag b corresponds to
    M = (1/2) diag(omega, omega) and constant offsets are dropped;
  * mu = diag(I, -I) carries the commutation metric; a transform T with
    T mu T^dag = mu ("para-unitary") preserves it;
  * diagonalize returns T row-blocks A, B with T = [[A, B], [B*, A*]],
    T^{-1} = mu T^dag mu, and T (mu M) T^{-1} = (1/2) diag(lambda, -lambda);
    the lambda are the positive normal-mode energies, ascending.

Positive definite M guarantees a real, nonzero, paired spectrum of mu M;
anything else raises InstabilityError (dynamical instability or zero mode)
rather than wading into Krein special cases. The truncated-Fock oracle gives
an independent check: level spacings of the dense matrix converge to integer
combinations of lambda.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .errors import BranchError, InstabilityError

HERMITICITY_TOL = 1e-12
DEGENERACY_TOL = 1e-9


def mu_metric(n: int) -> np.ndarray:
    """Commutation metric diag(I_n, -I_n)."""
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """H = beta^dag M beta with beta = (b_1..b_n, b_1^dag..b_n^dag)."""

    n: int
    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        object.__setattr__(self, "m", m)
        if m.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"M must be {2 * self.n}x{2 * self.n}, got {m.shape}")
        scale = max(float(np.abs(m).max()), 1e-300)
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL * scale:
            raise ValueError("M must be Hermitian")
        swapped = np.block(
            [
                [m[self.n :, self.n :], m[self.n :, : self.n]],
                [m[: self.n, self.n :], m[: self.n, : self.n]],
            ]
        ).conj()
        if np.abs(swapped - m).max() > HERMITICITY_TOL * scale:
            raise ValueError("M must be particle-hole symmetric")


def from_normal_anomalous(h, phi=None) -> QuadraticHamiltonian:
    """Build M from H = sum h_ij b_i^dag b_j + (1/2) sum (phi_ij b_i^dag b_j^dag + h.c.).

    h must be Hermitian, phi symmetric.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    if phi is None:
        phi = np.zeros_like(h)
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != h.shape:
        raise ValueError("h and phi must have matching shapes")
    if np.abs(phi - phi.T).max() > HERMITICITY_TOL * max(np.abs(phi).max(), 1e-300):
        raise ValueError("phi must be symmetric")
    m = 0.5 * np.block([[h, phi], [phi.conj(), h.conj()]])
    return QuadraticHamiltonian(n=n, m=m)


def from_mode_frequencies(omegas) -> QuadraticHamiltonian:
    """Decoupled modes: H = sum omega_k b_k^dag b_k."""
    return from_normal_anomalous(np.diag(np.asarray(omegas, dtype=float)))


def single_mode_squeezing(omega: float, g: float) -> QuadraticHamiltonian:
    """H = omega b^dag b + g (bb + b^dag b^dag); stable for omega > 2|g|."""
    return from_normal_anomalous(np.array([[omega]]), np.array([[2.0 * g]]))


def beamsplitter(omega: float, g: float) -> QuadraticHamiltonian:
    """H = omega (n_1 + n_2) + g (b_1^dag b_2 + b_2^dag b_1)."""
    return from_normal_anomalous(np.array([[omega, g], [g, omega]]))


def two_mode_squeezing(omega: float, g: float) -> QuadraticHamiltonian:
    """H = omega (n_1 + n_2) + g (b_1 b_2 + b_1^dag b_2^dag)."""
    h = omega * np.eye(2)
    phi = np.array([[0.0, g], [g, 0.0]])
    return from_normal_anomalous(h, phi)


@dataclass(frozen=True, eq=False)
class BogoliubovTransform:
    """Blocks of T = [[A, B], [B*, A*]] and the normal-mode energies."""

    n: int
    a: np.ndarray
    b: np.ndarray
    lambdas: np.ndarray

    def t_matrix(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.b.conj(), self.a.conj()]])

    def inverse(self) -> np.ndarray:
        """T^{-1} = mu T^dag mu, no linear solve needed."""
        mu = mu_metric(self.n)
        return mu @ self.t_matrix().conj().T @ mu


def diagonalize(ham: QuadraticHamiltonian, tol: float = 1e-10) -> BogoliubovTransform:
    """Para-unitary eigendecomposition of mu M.

    Eigenvectors are normalized in the mu metric (v^dag mu v = +1 on the
    positive branch), degenerate clusters are orthonormalized with a Cholesky
    of their mu-Gram matrix, and each mode's phase is fixed by making its
    largest particle-block entry real positive. The negative branch is then
    the exact particle-hole mirror, which makes the block structure and the
    canonical constraint hold by construction.
    """
    n = ham.n
    scale = max(float(np.abs(ham.m).max()), 1e-300)
    min_eig = float(np.linalg.eigvalsh(ham.m).min())
    if min_eig <= tol * scale:
        raise InstabilityError(
            f"M is not positive definite (min eigenvalue {min_eig:.3e}); "
            "dynamical instability or zero mode"
        )
    mu = mu_metric(n)
    x, vecs = np.linalg.eig(mu @ ham.m)
    if np.abs(x.imag).max() > tol * scale:
        raise InstabilityError(
            f"mu M has complex eigenvalues (max imag {np.abs(x.imag).max():.3e})"
        )
    x = x.real
    pos = np.flatnonzero(x > 0.0)
    if pos.size != n:
        raise InstabilityError(
            f"expected {n} positive eigenvalues of mu M, found {pos.size}"
        )
    order = pos[np.argsort(x[pos])]
    xs = x[order]
    v = vecs[:, order].astype(complex)
    # mu-orthonormalize, clustering degenerate eigenvalues
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and xs[stop] - xs[stop - 1] <= DEGENERACY_TOL * max(xs[stop], 1.0):
            stop += 1
        block = v[:, start:stop]
        gram = block.conj().T @ mu @ block
        if float(np.linalg.eigvalsh(gram).min()) <= 0.0:
            raise InstabilityError("positive branch carries non-positive mu norm")
        chol = np.linalg.cholesky(gram)
        v[:, start:stop] = block @ np.linalg.inv(chol).conj().T
        start = stop
    # phase gauge: largest particle-block entry of each mode real positive
    for k in range(n):
        top = v[:n, k]
        j = int(np.argmax(np.abs(top)))
        phase = top[j] / abs(top[j])
        v[:, k] *= phase.conjugate()
    a0, b0 = v[:n, :], v[n:, :]
    return BogoliubovTransform(n=n, a=a0.conj().T, b=-b0.conj().T, lambdas=2.0 * xs)


@dataclass(frozen=True)
class CanonicalResiduals:
    """Frobenius norms of the two forms of the commutation constraint."""

    para_unitarity: float
    block_identity: float


def verify_canonical(t: BogoliubovTransform) -> CanonicalResiduals:
    """||T mu T^dag mu - I||_F and ||A A^dag - B B^dag - I||_F."""
    mu = mu_metric(t.n)
    tm = t.t_matrix()
    eye = np.eye(2 * t.n)
    r1 = float(np.linalg.norm(tm @ mu @ tm.conj().T @ mu - eye))
    r2 = float(
        np.linalg.norm(t.a @ t.a.conj().T - t.b @ t.b.conj().T - np.eye(t.n))
    )
    return CanonicalResiduals(para_unitarity=r1, block_identity=r2)


def fock_oracle(
    ham: QuadraticHamiltonian,
    truncation: int,
    n_levels: int = 8,
    drift_tol: float = 1e-8,
) -> np.ndarray:
    """Lowest eigenvalues of H in a truncated Fock basis, smallest first.

    Dense and exponential in the mode count, so n <= 3. Spacings between
    returned levels converge to integer combinations of the lambdas as the
    truncation grows; the result at truncation-4 is compared to flag
    unconverged spacings with a warning.
    """
    if ham.n > 3:
        raise ValueError("Fock oracle limited to n <= 3 modes")
    if truncation < 8:
        raise ValueError("truncation must be at least 8")
    levels = _fock_levels(ham, truncation, n_levels)
    check = _fock_levels(ham, truncation - 4, n_levels)
    spacing = np.diff(levels)
    spacing_check = np.diff(check)
    scale = max(float(np.abs(spacing).max()), 1e-300)
    drift = float(np.abs(spacing - spacing_check).max()) / scale
    if drift > drift_tol:
        warnings.warn(
            f"Fock spacings moved by {drift:.2e} (rel) between truncations; "
            "increase the truncation",
            UserWarning,
            stacklevel=2,
        )
    return levels


def _fock_levels(ham: QuadraticHamiltonian, truncation: int, n_levels: int) -> np.ndarray:
    n = ham.n
    lower = np.diag(np.sqrt(np.arange(1, truncation)), k=1)  # annihilation
    eye = np.eye(truncation)

    def mode_op(op, k):
        mats = [eye] * n
        mats[k] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    betas = [mode_op(lower, k) for k in range(n)]
    betas += [op.conj().T for op in betas]
    dim = truncation**n
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(2 * n):
        for j in range(2 * n):
            if ham.m[i, j] != 0.0:
                h += ham.m[i, j] * (betas[i].conj().T @ betas[j])
    return np.linalg.eigvalsh(h)[:n_levels]


def generator_K(t: BogoliubovTransform, tol: float = 1e-8) -> np.ndarray:
    """Hermitian K with T = exp(-i mu K), from the principal matrix logarithm.

    Valid when T sits in the principal-branch neighborhood of the identity;
    an eigenvalue of T on (or hugging) the negative real axis has no
    preferred logarithm and raises BranchError.
    """
    tm = t.t_matrix()
    eigs = np.linalg.eigvals(tm)
    if np.any((eigs.real < 0.0) & (np.abs(eigs.imag) <= 1e-12 * np.abs(eigs.real))):
        raise BranchError("eigenvalue of T on the negative real axis")
    log_t = logm(tm)
    k = 1j * mu_metric(t.n) @ log_t
    herm_defect = float(np.abs(k - k.conj().T).max())
    if herm_defect > tol * max(float(np.abs(k).max()), 1.0):
        raise BranchError(
            f"extracted generator is not Hermitian (defect {herm_defect:.2e}); "
            "transform lies outside the principal branch"
        )
    k = 0.5 * (k + k.conj().T)
    round_trip = expm(-1j * mu_metric(t.n) @ k)
    if float(np.abs(round_trip - tm).max()) > tol * max(float(np.abs(tm).max()), 1.0):
        raise BranchError("exp(-i mu K) does not reproduce T")
    return k


def perturbative_transform(omegas, couplings, e_level: float) -> tuple[np.ndarray, np.ndarray]:
    """First-order mode-mixing blocks for level-mediated coupling.

    Eliminating a far level at energy e_level dresses the modes with the
    pair kernel c_kl = g_k g_l / (4 e_level) on (b + b^dag)(b + b^dag). To
    first order in c the transform blocks are

        A_km = delta_km + 2 c_km / (omega_k - omega_m)   (k != m)
        B_km = 2 c_km / (omega_k + omega_m)

    which full diagonalization must reproduce up to O(c^2).
    """
    w = np.asarray(omegas, dtype=float)
    g = np.asarray(couplings, dtype=float)
    c = np.outer(g, g) / (4.0 * e_level)
    diff = w[:, None] - w[None, :]
    np.fill_diagonal(diff, np.inf)
    a1 = np.eye(w.size) + 2.0 * c / diff
    b1 = 2.0 * c / (w[:, None] + w[None, :])
    return a1, b1


def level_mediated_hamiltonian(omegas, couplings, e_level: float) -> QuadraticHamiltonian:
    """Modes plus the level-mediated pair interaction used by perturbative_transform."""
    w = np.asarray(omegas, dtype=float)
    g = np.asarray(couplings, dtype=float)
    c = np.outer(g, g) / (4.0 * e_level)
    return from_normal_anomalous(np.diag(w) + 2.0 * c, 2.0 * c)
