"""
How tight is the closed-form time bound?
========================================

With voters and averagers on a symmetric network, the mean consensus time is
at least n^2/m_v - 1. We measure the true time on random Erdos-Renyi
networks and look at the ratio to the bound as n grows.
"""

# %%
from hman.plotting import line_plot
from hman.spectral import bound_sweep, consensus_time_bound

print(consensus_time_bound(20, 1))

# %%
result = bound_sweep([10, 20, 40, 60], p=0.2, m_v=1, seeds=range(5))
print(result.to_csv())

# %%
# The ratio stays above 1 everywhere and creeps toward 1 on larger networks.
ns = sorted(result.by_n())
svg = line_plot({"ratio": (ns, [result.mean_ratio(n) for n in ns])},
                "time / bound", "n", "ratio")
with open("bound_ratio.svg", "w") as fh:
    fh.write(svg)
