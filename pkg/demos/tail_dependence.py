"""Conditional tail dependence of a latent trawl exceedance model.

Run with ``python3 demos/tail_dependence.py``.  Prints the model curve
P(U_h > u | U_0 > u) for a few lags and compares lag 1 against an empirical
estimate from a long simulated path.
"""

import numpy as np

from trawlex import ModelParams, cond_tail_dep, cond_tail_dep_limit, empirical_chi, simulate_exceedances

params = ModelParams.original(6.33, 20.12, rho=0.27, kappa=12.18)
u = np.array([0.5, 0.7, 0.9, 0.95, 0.99, 0.999])

print("u      " + "  ".join(f"lag {h:<4d}" for h in (1, 2, 5)))
for ui in u:
    row = [cond_tail_dep(params, h, ui, ui) for h in (1, 2, 5)]
    print(f"{ui:<6} " + "  ".join(f"{v:8.5f}" for v in row))

rep = cond_tail_dep_limit(params, 1.0)
print(f"\nlimit as u -> 1 at lag 1: {rep.limit} (asymptotically independent)")

x = simulate_exceedances(params, np.arange(300_000.0), rng=7).values
chi = empirical_chi(x, u[:3], lag=1, conditional=True)
print("\nlag 1, among positive pairs: empirical vs model")
for ui, c, s in zip(u[:3], chi.chi, chi.se):
    print(f"  u={ui}: {c:.4f} +/- {s:.4f}   model {cond_tail_dep(params, 1.0, ui, ui):.4f}")
