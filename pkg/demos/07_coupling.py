# %% [markdown]
# Bounding the single-copy count by a queue
#
# The network and an M/M/1 queue share their event streams; the queue is
# fed as if there were a little more work, so it always stays on top.

# %%
from dupnet import ModelParams, simulate_coupled_domination

p = ModelParams.from_beta(4.0, 1.0, 200, 1.0)
run = simulate_coupled_domination(p, beta0=1.1, horizon=5.0, seed=9)
print(len(run.gaps), "events, violations:", run.violations)
print("largest single-copy count %d, largest queue %d" % (run.trajectory.x1.max(), run.queue.values.max()))
print("closest approach (x1 - L):", run.gaps.max())
