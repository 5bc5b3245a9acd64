"""Canonical-transform oracles.

Closed forms used below:

  * single-mode squeezing H = w b^dag b + g (bb + b^dag b^dag) has normal
    frequency sqrt(w^2 - 4 g^2), generator magnitude artanh(2g/w)/2, and
    goes unstable at w = 2g;
  * a beamsplitter coupling is number conserving, so its frequencies are
    the eigenvalues {w - g, w + g} of the 2x2 normal block;
  * two-mode squeezing gives the degenerate pair sqrt(w^2 - g^2);
  * a truncated-Fock diagonalization provides level spacings that must
    match the lambdas without knowing the transform at all.

The level-mediated-coupling check ties this module to the dressed-bath
construction: the first-order mixing kernels carry 1/(w_k - w_l) and
1/(w_k + w_l) denominators, and the full diagonalization must agree with
them up to a residual quartic in the coupling scale.
"""

import numpy as np
import pytest

from openaqs.bath import BathSpec, Scheme, discretize
from openaqs.bogoliubov import (
    BogoliubovTransform,
    QuadraticHamiltonian,
    beamsplitter,
    diagonalize,
    fock_oracle,
    from_mode_frequencies,
    from_normal_anomalous,
    generator_K,
    level_mediated_hamiltonian,
    mu_metric,
    perturbative_transform,
    single_mode_squeezing,
    two_mode_squeezing,
    verify_canonical,
)
from openaqs.errors import BranchError, InstabilityError


def random_stable_hamiltonian(rng, n):
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (h + h.conj().T)
    phi = 0.2 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    phi = 0.5 * (phi + phi.T)
    m = 0.5 * np.block([[h, phi], [phi.conj(), h.conj()]])
    shift = 2.0 * abs(float(np.linalg.eigvalsh(m).min())) + 0.5
    return from_normal_anomalous(h + shift * np.eye(n), phi)


class TestConstruction:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            QuadraticHamiltonian(n=1, m=np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_block_asymmetry(self):
        with pytest.raises(ValueError):
            QuadraticHamiltonian(n=1, m=np.diag([1.0, 2.0]))

    def test_rejects_asymmetric_pairing(self):
        with pytest.raises(ValueError):
            from_normal_anomalous(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))

    def test_mode_frequencies_layout(self):
        ham = from_mode_frequencies([1.0, 3.0])
        np.testing.assert_allclose(ham.m, 0.5 * np.diag([1.0, 3.0, 1.0, 3.0]))


class TestDiagonalize:
    def test_already_diagonal(self):
        t = diagonalize(from_mode_frequencies([0.5, 1.0, 2.0]))
        np.testing.assert_allclose(t.lambdas, [0.5, 1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(t.a, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(t.b, 0.0, atol=1e-12)

    def test_single_mode_squeezing_frequency(self):
        t = diagonalize(single_mode_squeezing(1.0, 0.2))
        assert t.lambdas[0] == pytest.approx(np.sqrt(1.0 - 0.16), rel=1e-12)

    def test_beamsplitter_frequencies(self):
        t = diagonalize(beamsplitter(1.0, 0.3))
        np.testing.assert_allclose(t.lambdas, [0.7, 1.3], atol=1e-12)
        assert np.abs(t.b).max() < 1e-12

    def test_two_mode_squeezing_degenerate_pair(self):
        t = diagonalize(two_mode_squeezing(1.0, 0.4))
        want = np.sqrt(1.0 - 0.16)
        np.testing.assert_allclose(t.lambdas, [want, want], rtol=1e-12)

    def test_block_diagonal_form(self):
        ham = single_mode_squeezing(1.0, 0.2)
        t = diagonalize(ham)
        d = t.t_matrix() @ mu_metric(1) @ ham.m @ t.inverse()
        lam = t.lambdas[0]
        np.testing.assert_allclose(d, 0.5 * np.diag([lam, -lam]), atol=1e-12)

    def test_instability_raised_at_threshold(self):
        with pytest.raises(InstabilityError):
            diagonalize(single_mode_squeezing(1.0, 0.5))
        with pytest.raises(InstabilityError):
            diagonalize(single_mode_squeezing(1.0, 0.8))

    def test_random_instances_satisfy_constraints(self):
        rng = np.random.default_rng(11)
        for n in (2, 3, 5, 8, 16):
            ham = random_stable_hamiltonian(rng, n)
            t = diagonalize(ham)
            assert np.all(t.lambdas > 0)
            assert np.all(np.diff(t.lambdas) >= 0)
            res = verify_canonical(t)
            assert res.para_unitarity < 1e-10
            assert res.block_identity < 1e-10
            d = t.t_matrix() @ mu_metric(n) @ ham.m @ t.inverse()
            want = 0.5 * np.diag(np.concatenate([t.lambdas, -t.lambdas]))
            assert np.abs(d - want).max() < 1e-8


class TestVerifyCanonical:
    def test_identity_transform(self):
        t = BogoliubovTransform(n=2, a=np.eye(2), b=np.zeros((2, 2)), lambdas=np.ones(2))
        res = verify_canonical(t)
        assert res.para_unitarity == 0.0
        assert res.block_identity == 0.0

    def test_perturbed_blocks_show_first_order_residual(self):
        t = diagonalize(single_mode_squeezing(1.0, 0.2))
        bumped = BogoliubovTransform(n=1, a=t.a + 1e-3, b=t.b, lambdas=t.lambdas)
        res = verify_canonical(bumped)
        assert res.block_identity == pytest.approx(2e-3 * float(t.a[0, 0].real), rel=0.05)


class TestFockOracle:
    def test_harmonic_spacings(self):
        levels = fock_oracle(from_mode_frequencies([0.7]), 50, n_levels=6)
        np.testing.assert_allclose(np.diff(levels), 0.7, atol=1e-12)

    def test_squeezed_spacing_matches_lambda(self):
        lam = diagonalize(single_mode_squeezing(1.0, 0.2)).lambdas[0]
        levels = fock_oracle(single_mode_squeezing(1.0, 0.2), 200, n_levels=3)
        assert levels[1] - levels[0] == pytest.approx(lam, abs=1e-8)

    def test_two_mode_squeezing_cross_check(self):
        lam = diagonalize(two_mode_squeezing(1.0, 0.4)).lambdas[0]
        levels = fock_oracle(two_mode_squeezing(1.0, 0.4), 24, n_levels=4)
        spacings = np.diff(levels)
        assert spacings[0] == pytest.approx(lam, abs=1e-6)
        assert spacings[2] == pytest.approx(lam, abs=1e-6)

    def test_warns_when_truncation_too_small(self):
        with pytest.warns(UserWarning):
            fock_oracle(single_mode_squeezing(1.0, 0.45), 10, n_levels=6)

    def test_validation(self):
        with pytest.raises(ValueError):
            fock_oracle(from_mode_frequencies([1.0] * 4), 10)
        with pytest.raises(ValueError):
            fock_oracle(from_mode_frequencies([1.0]), 4)


class TestGeneratorK:
    def test_identity_gives_zero(self):
        t = BogoliubovTransform(n=2, a=np.eye(2), b=np.zeros((2, 2)), lambdas=np.ones(2))
        assert np.abs(generator_K(t)).max() < 1e-14

    def test_squeezing_generator_magnitude(self):
        t = diagonalize(single_mode_squeezing(1.0, 0.2))
        k = generator_K(t)
        assert abs(k[0, 1]) == pytest.approx(0.5 * np.arctanh(0.4), rel=1e-10)

    def test_small_squeezing_linearizes_to_b_block(self):
        t = diagonalize(single_mode_squeezing(1.0, 0.02))
        k = generator_K(t)
        assert abs(k[0, 1] - 1j * t.b[0, 0]) < 1e-3 * abs(t.b[0, 0])

    def test_round_trip_on_random_instances(self):
        from scipy.linalg import expm

        rng = np.random.default_rng(3)
        for n in (2, 4):
            t = diagonalize(random_stable_hamiltonian(rng, n))
            k = generator_K(t)
            assert np.abs(k - k.conj().T).max() < 1e-12
            back = expm(-1j * mu_metric(n) @ k)
            assert np.abs(back - t.t_matrix()).max() < 1e-8

    def test_branch_error_on_negative_axis(self):
        flipped = BogoliubovTransform(
            n=1, a=-np.eye(1), b=np.zeros((1, 1)), lambdas=np.ones(1)
        )
        with pytest.raises(BranchError):
            generator_K(flipped)


class TestLevelMediatedCoupling:
    def test_first_order_kernels_then_quartic_residual(self):
        bath = BathSpec(alpha=0.05, eta=1.0, omega_c=1.0, T=0.0)
        d = discretize(bath, 4, scheme=Scheme.LINEAR)
        diffs, scales = [], []
        for s in (1.0, 0.5, 0.25, 0.125, 0.0625):
            g = s * d.couplings
            t = diagonalize(level_mediated_hamiltonian(d.omegas, g, bath.E))
            a1, b1 = perturbative_transform(d.omegas, g, bath.E)
            diffs.append(np.linalg.norm(t.a - a1) + np.linalg.norm(t.b - b1))
            scales.append(s)
        slope = np.polyfit(np.log(scales), np.log(diffs), 1)[0]
        assert slope == pytest.approx(4.0, abs=0.15)
