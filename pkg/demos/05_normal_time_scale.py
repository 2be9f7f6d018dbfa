# %% [markdown]
# Stable network: rare losses
#
# With lam = 4, mu = 1 and beta = 1 the duplication capacity wins.  The
# single-copy count sits near a geometric law and files are lost at about
# one per unit of time.

# %%
import numpy as np

from dupnet import (EmpiricalDist, GeometricLaw, ModelParams, chi_square_geometric, loss_rate,
                    poisson_loss_check, psi, replica_seeds, run_replicas, simulate, simulate_on_grid)

p = ModelParams.from_beta(4.0, 1.0, 2000, 1.0)
law = GeometricLaw(2 * p.beta / p.rho)
runs = run_replicas(lambda s: simulate_on_grid(p, [5.0], seed=s), replica_seeds(5, 1000))
d = EmpiricalDist.from_values([r.x1[0] for r in runs])
print("k   observed  geometric")
for k in range(6):
    print(k, "%8.3f  %8.3f" % (d.counts.get(k, 0) / d.total, law.pmf(k)))
print(chi_square_geometric(d, law.ratio))

# %%
tr = simulate(p, horizon=200.0, seed=6)
print("limit rate", p.loss_rate, "observed", loss_rate(tr, (2.0, 200.0)))

# 200 time units is already 0.1 on the slow scale, where the rate has started to fall
expected = p.n * (psi(p.beta, p.rho, p.mu, 200.0 / p.n) - psi(p.beta, p.rho, p.mu, 2.0 / p.n)) / 198.0
print("rate predicted by the decay curve over the window: %.3f" % expected)
for line in poisson_loss_check(tr, (2.0, 200.0)).lines():
    print(line)
