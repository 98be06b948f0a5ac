"""
Consensus rates from the spectrum
=================================

The subdominant eigenvalue of the moment recursion sets how fast mean-square
consensus happens. On symmetric networks no roster beats the all-averager
rate, and no roster containing a voter beats the all-voter rate.
"""

# %%
from hman import AgentRoster, Hman, validate
from hman.spectral import rate_ordering_report, spectral_report

G = validate([
    [0.4, 0.2, 0.2, 0.0, 0.2],
    [0.2, 0.4, 0.2, 0.2, 0.0],
    [0.2, 0.2, 0.4, 0.2, 0.0],
    [0.0, 0.2, 0.2, 0.6, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.8],
])

# %%
print(spectral_report(Hman(G, AgentRoster.from_blocks(3, 1, 1))).to_text())

# %%
rosters = [
    AgentRoster.uniform(5, "averager"),
    AgentRoster.uniform(5, "copier"),
    AgentRoster.uniform(5, "voter"),
    AgentRoster.from_blocks(4, 0, 1),
    AgentRoster.from_blocks(3, 1, 1),
]
report = rate_ordering_report(G, rosters)
print(report.to_csv())
print("ordering holds:", report.ok)
