"""Para-unitary diagonalization of small quadratic boson problems.

Squeezed single mode, beamsplitter pair, and a two-mode squeezing
interaction, each checked against the exact mode frequencies and against a
truncated ladder-basis diagonalization. Also prints the generator entries
for the squeezed mode, which have a closed form in arctanh.
"""

import numpy as np

from openaqs.bogoliubov import (
    beamsplitter,
    diagonalize,
    fock_oracle,
    generator_K,
    single_mode_squeezing,
    two_mode_squeezing,
    verify_canonical,
)

omega = 1.0

print("single-mode squeezing, lambda = sqrt(omega**2 - 4 g**2)")
print(f"{'g':>6} {'lambda':>12} {'exact':>12} {'residuals':>11}")
for g in (0.1, 0.2, 0.3, 0.4, 0.45, 0.49):
    t = diagonalize(single_mode_squeezing(omega, g))
    res = verify_canonical(t)
    exact = np.sqrt(omega**2 - 4.0 * g**2)
    print(
        f"{g:>6.2f} {t.lambdas[0]:>12.8f} {exact:>12.8f} "
        f"{max(res.para_unitarity, res.block_identity):>11.1e}"
    )

print("\nbeamsplitter at g = 0.3 mixes without squeezing:")
t = diagonalize(beamsplitter(omega, 0.3))
print(f"  lambdas {t.lambdas}, max |B| = {np.abs(t.b).max():.1e}")

print("\ntwo-mode squeezing at g = 0.4, degenerate pair:")
t = diagonalize(two_mode_squeezing(omega, 0.4))
print(f"  lambdas {t.lambdas} (exact {np.sqrt(omega**2 - 0.4**2):.8f})")

# ladder-basis cross-check: the lowest excitation spacings of the truncated
# number representation reproduce the mode frequency
ham = single_mode_squeezing(omega, 0.3)
lam = diagonalize(ham).lambdas[0]
levels = fock_oracle(ham, truncation=160, n_levels=4)
print(f"\ntruncated ladder basis, g = 0.3:")
print(f"  spacings {np.diff(levels)}")
print(f"  mode frequency {lam:.10f}")

# the generating Hermitian K reproduces the transform through exp(-i mu K);
# for one squeezed mode its off-diagonal entry is arctanh(2g/omega)/2
g = 0.2
k = generator_K(diagonalize(single_mode_squeezing(omega, g)))
print(f"\ngenerator off-diagonal at g = {g}: |K01| = {abs(k[0, 1]):.10f}, "
      f"arctanh(2g/omega)/2 = {0.5 * np.arctanh(2.0 * g / omega):.10f}")
