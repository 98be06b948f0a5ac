"""
Exact second moments versus Monte Carlo
=======================================

Although the update rule is random and nonlinear, the expected pairwise
products E(x_i x_j) follow a closed linear recursion. Here we iterate that
recursion and compare it with a Monte Carlo estimate.
"""

# %%
import numpy as np

from hman import AgentRoster, Hman, validate
from hman.cli import standardized_discrepancy
from hman.model import monte_carlo_msd
from hman.moments import build_extended_recursion, iterate_eov

G = validate([
    [0.4, 0.2, 0.2, 0.0, 0.2],
    [0.2, 0.4, 0.2, 0.2, 0.0],
    [0.2, 0.2, 0.4, 0.2, 0.0],
    [0.0, 0.2, 0.2, 0.6, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.8],
])
model = Hman(G, AgentRoster.from_blocks(3, 1, 1))
x0 = [0.2, 0.9, 0.35, 0.6, 0.05]

# %%
rec = build_extended_recursion(model)
print("G2 is", rec.g2.shape, "with", rec.g2.nnz, "nonzeros")
exact = iterate_eov(rec, x0, horizon=50)

# %%
est = monte_carlo_msd(model, x0, trials=20000, horizon=50, seed=2024)
for i, name in [(1, "averager"), (3, "copier"), (4, "voter")]:
    z = standardized_discrepancy(est.msd[:, i], exact.msd(i, 0), est.stderr[:, i])
    print(f"{name:9s} msd[50] exact {exact.msd(i, 0)[50]:.5f}  mc {est.msd[50, i]:.5f}  "
          f"worst z {z.max():.2f}")

# %%
# The averager stays closest to agent 0 and the voter stays furthest away.
for k in (0, 10, 25, 50):
    print(k, [round(float(exact.msd(i, 0)[k]), 5) for i in (1, 3, 4)])
