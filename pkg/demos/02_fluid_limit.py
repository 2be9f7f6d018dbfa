# %% [markdown]
# Overloaded network: X / N follows a deterministic curve
#
# With lam = mu = 1 and as many files as the scale N, the duplication
# capacity is too small and a fraction 1/2 of the files is lost.

# %%
import numpy as np

from dupnet import ModelParams, fluid_closed_form, fluid_gsp, replica_seeds, run_replicas, simulate_on_grid

n = 5000
p = ModelParams(1.0, 1.0, n, n)
grid = np.linspace(0.0, 6.0, 13)
runs = run_replicas(lambda s: simulate_on_grid(p, grid, seed=s), replica_seeds(7, 20))
mc0 = np.mean([r.x0 for r in runs], axis=0) / n
mc1 = np.mean([r.x1 for r in runs], axis=0) / n
x0, x1 = fluid_closed_form(p.beta, p.rho, p.mu, grid)

print("   t   x0 sim  x0 limit  x1 sim  x1 limit")
for row in zip(grid, mc0, x0, mc1, x1):
    print("%4.1f  %7.4f  %7.4f  %7.4f  %7.4f" % row)

# %%
# the same curve obtained by solving the reflected integral equation
curve = fluid_gsp(1.0, 1.0, 1.0, 6.0, 1e-3)
print("max |gsp - closed form| =", np.max(np.abs(curve.x1 - fluid_closed_form(1.0, 1.0, 1.0, curve.times)[1])))
