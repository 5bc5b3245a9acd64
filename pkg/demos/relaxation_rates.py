"""
relaxation_rates.py

Relaxation at the avoided crossing, three ways: golden-rule emission of one
boson, the two-boson channel that takes over for stiff baths, and the
incoherent hopping rate from the dressed-correlator overlap once the
crossing has collapsed.
"""

import numpy as np

from openaqs.bath import BathSpec, CutoffForm
from openaqs.rates import (
    RateMethod,
    golden_rule_single,
    golden_rule_two,
    incoherent_rate,
    rate_scaling_sweep,
    splitting_from_size,
)

ns = [2**k for k in range(8, 21, 2)]

print("golden-rule rate versus size, gamma ~ N**(-eta/2)")
for eta in (1.5, 3.0):
    bath = BathSpec(alpha=0.1, eta=eta, omega_c=2.0)
    fit = rate_scaling_sweep(ns, bath, RateMethod.GOLDEN_SINGLE)
    print(f"  eta = {eta}: slope {fit.exponent:+.4f} (expected {-eta / 2.0:+.4f})")

# one concrete point, both channels side by side
bath = BathSpec(alpha=0.1, eta=1.5, omega_c=2.0, E=0.5)
d = splitting_from_size(2**12)
r1 = golden_rule_single(d, bath)
r2 = golden_rule_two(d, bath)
print(f"\nN = 2**12, splitting {d:.4e}:")
print(f"  one-boson  {r1.gamma:.6e}")
print(f"  two-boson  {r2.gamma:.6e}  (truncation error {r2.truncation_error:.1e})")

# hard-cutoff two-boson rate has a closed form through the Beta function,
# handy as a cross-check on the quadrature
hard = BathSpec(alpha=0.2, eta=1.5, omega_c=1.0, cutoff=CutoffForm.HARD, E=0.5)
from scipy.special import beta as beta_fn

dd = 0.4
got = golden_rule_two(dd, hard).gamma
ref = (
    2.0 * np.pi / hard.E**2 * hard.alpha**2
    * dd ** (2.0 * hard.eta + 1.0)
    * beta_fn(hard.eta + 1.0, hard.eta + 1.0)
)
print(f"\nhard cutoff check: quadrature {got:.12e}, closed form {ref:.12e}")

# once incoherent, the unbiased hopping rate scales like the squared
# tunneling, i.e. 1/N, and a bias detunes it
hot = BathSpec(alpha=0.3, eta=1.0, omega_c=2.0, T=0.5)
fit = rate_scaling_sweep(ns[:5], hot, RateMethod.INCOHERENT_POLARON, epsilon=0.5)
print(f"\nincoherent hopping slope {fit.exponent:+.4f} (expected -1)")
res = incoherent_rate(splitting_from_size(2**10), 0.5, hot)
print(f"N = 2**10 biased hop: {res.gamma:.6e} over window {res.window:.3e}")
