"""
Simulating a hybrid network
===========================

Five agents share one weighted network: three averagers, one copier and one
voter. We run a single trajectory and watch the voter flip between 0 and 1
while the averagers drift toward a common value.
"""

# %%
import numpy as np

from hman import AgentRoster, Hman, diagnose, simulate, validate
from hman.model import consensus_time

# row i lists the weights agent i puts on its neighbours (itself included)
G = validate([
    [0.4, 0.2, 0.2, 0.0, 0.2],
    [0.2, 0.4, 0.2, 0.2, 0.0],
    [0.2, 0.2, 0.4, 0.2, 0.0],
    [0.0, 0.2, 0.2, 0.6, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.8],
])
print(diagnose(G))

# %%
model = Hman(G, AgentRoster.from_blocks(averagers=3, copiers=1, voters=1))
x0 = np.array([0.2, 0.9, 0.35, 0.6, 0.05])
traj = simulate(model, x0, horizon=30, seed=7)

np.set_printoptions(precision=3, suppress=True)
print(traj.states[:8])

# %%
# The voter column only ever holds 0 or 1, and the copier always repeats
# one of its neighbours' previous opinions.
print("voter values:", np.unique(traj.states[1:, 4]))

# %%
# Run long enough and everyone agrees. The common value is random because
# the voter keeps injecting noise until the whole network is pinned at 0 or 1.
long = simulate(model, x0, horizon=5000, seed=7)
k = consensus_time(long)
print("consensus at step", k, "value", long.states[k].mean())
