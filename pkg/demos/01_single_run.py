# %% [markdown]
# A single run of the storage network
#
# 200 files, each held on two servers.  Copies fail at rate 1 and a shared
# bandwidth of 3 * 100 duplicates files that are down to one copy.

# %%
import numpy as np

from dupnet import ModelParams, sample_at, simulate

p = ModelParams(lam=3.0, mu=1.0, n=100, f_n=200)
print(p, p.regime())

# %%
tr = simulate(p, horizon=5.0, seed=2024)
print(len(tr), "jumps,", len(tr.loss_times()), "files lost")
for t in (0.5, 1.0, 2.0, 5.0):
    s = sample_at(tr, t)
    print(f"t={t:4.1f}  lost={s.x0:4d}  single copy={s.x1:4d}  two copies={s.x2(p):4d}")

# %%
# kinds of events, in counts
labels, counts = np.unique(tr.kinds, return_counts=True)
print(dict(zip(labels.tolist(), counts.tolist())))
print(tr.to_csv().splitlines()[:4])
