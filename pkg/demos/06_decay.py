# %% [markdown]
# Stable network over a long horizon: the decay curve
#
# On the time scale N t the lost fraction follows psi(t).

# %%
import numpy as np

from dupnet import ModelParams, local_equilibrium, psi_curve, replica_seeds, run_replicas, simulate_on_grid, t_of_delta

n = 500
p = ModelParams.from_beta(4.0, 1.0, n, 1.0)
t = np.linspace(0.0, 3.0, 7)
runs = run_replicas(lambda s: simulate_on_grid(p, n * t, seed=s), replica_seeds(8, 10))
frac = np.mean([r.x0 for r in runs], axis=0) / n
curve = psi_curve(p.beta, p.rho, p.mu, 3.0, 0.5)
for row in zip(t, frac, curve.values):
    print("t=%.1f  simulated %.4f  psi %.4f" % row)

# %%
print("half the files are gone around N *", t_of_delta(p.beta, p.rho, p.mu, 0.5))
for s in (0.0, 1.0, 3.0):
    print("single-copy law at N *", s, "is geometric with ratio %.4f" % local_equilibrium(p.beta, p.rho, p.mu, s).ratio)
