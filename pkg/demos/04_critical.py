# %% [markdown]
# Critical network: fluctuations of order sqrt(N)
#
# On the line lam = 2 mu beta the fluid curve is flat at 0 and the
# rescaled counts follow a reflected diffusion with memory.

# %%
import math

import numpy as np

from dupnet import (CriticalParams, ModelParams, ensemble_moments, replica_seeds, run_replicas,
                    simulate_on_grid)

n = 10_000
p = ModelParams.critical(mu=1.0, n=n, f_n=n)
runs = run_replicas(lambda s: simulate_on_grid(p, [1.0], seed=s), replica_seeds(3, 300))
y_mc = np.array([r.x1[0] for r in runs]) / math.sqrt(n)
x0_mc = np.array([r.x0[0] for r in runs]) / math.sqrt(n)

mom = ensemble_moments(CriticalParams.from_model(p), 1.0, 1e-3, 3000, seed=4).at(1.0)
print("X1/sqrt(N) at t=1: chain %.3f +- %.3f, diffusion %.3f +- %.3f"
      % (y_mc.mean(), y_mc.std() / math.sqrt(y_mc.size), mom["mean_y"], mom["se_y"]))
print("X0/sqrt(N) at t=1: chain %.3f +- %.3f, diffusion %.3f +- %.3f"
      % (x0_mc.mean(), x0_mc.std() / math.sqrt(x0_mc.size), mom["mean_x0"], mom["se_x0"]))
