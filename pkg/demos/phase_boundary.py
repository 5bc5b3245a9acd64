"""
phase_boundary.py

Coherent/incoherent threshold temperature versus search size, split by the
dressing mechanism. One-boson dressing dominates for soft baths and dies out
at eta = 2; the two-boson channel survives to arbitrary eta with a weaker
size dependence. Where the two curves cross sets the crossover exponent.
"""

import numpy as np

from openaqs.bath import BathSpec
from openaqs.critical import ETA_CROSSOVER, critical_temperature, eta_crossover, power_law_fit
from openaqs.rates import splitting_from_size
from openaqs.renorm import Process

alpha = 0.3
sizes = [2**k for k in range(28, 49, 5)]

for eta in (1.5, 2.5):
    bath = BathSpec(alpha=alpha, eta=eta, omega_c=1.0, E=0.5)
    print(f"\neta = {eta}")
    print(f"{'N':>16} {'T* one-boson':>14} {'T* two-boson':>14} {'T* combined':>14}")
    singles, twos = [], []
    for n in sizes:
        d = splitting_from_size(n)
        t1 = critical_temperature(d, bath, process=Process.SINGLE)
        t2 = critical_temperature(d, bath, process=Process.TWO)
        tc = critical_temperature(d, bath, process=Process.COMBINED)
        singles.append(t1)
        twos.append(t2)
        print(f"{n:>16} {t1:>14.6e} {t2:>14.6e} {tc:>14.6e}")
    if all(np.isfinite(singles)):
        f1 = power_law_fit(sizes, singles)
        print(f"  one-boson slope {f1.exponent:+.4f} (expected {(eta - 2.0) / 2.0:+.4f})")
    f2 = power_law_fit(sizes, twos)
    print(f"  two-boson slope {f2.exponent:+.4f} (expected {-1.0 / (4.0 * eta + 2.0):+.4f})")

# locating where the mechanisms trade places
bath = BathSpec(alpha=0.35, eta=1.5, omega_c=1.0, E=0.5)
located = eta_crossover(bath, np.geomspace(1e-6, 1e-3, 4), tol=0.04)
print(f"\ncrossover bath exponent: {located:.4f} (analytic {ETA_CROSSOVER:.4f})")
