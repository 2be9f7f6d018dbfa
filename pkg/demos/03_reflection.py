# %% [markdown]
# Reflection at zero and its generalized version

# %%
import numpy as np

from dupnet import GridPath, PathFunctional, complementarity_defect, cumtrapz, gsp_solve, reflect

rng = np.random.default_rng(1)
z = GridPath(0.01, np.concatenate([[0.3], 0.3 + np.cumsum(rng.normal(-0.01, 0.1, 400))]))
x, r = reflect(z)
print("min z = %.3f, min x = %.3f, total push = %.3f" % (z.values.min(), x.values.min(), r.values[-1]))
print("x dr =", complementarity_defect(x, r))

# %%
# a path-dependent drive: G(x)(t) = 1 - 2t + int_0^t x
G = PathFunctional(lambda v, h: 1.0 - 2.0 * h * np.arange(v.shape[0]) + cumtrapz(v, h),
                   lipschitz=lambda T: 1.0)
sol = gsp_solve(G, 4.0, 1e-3)
print(sol.iterations, "sweeps, residual", sol.residual)
print("hits zero at t =", sol.x.times[np.argmax(sol.x.values == 0)])
