"""
Three independent answers
=========================

The root formula is checked against three computations that share none of
its machinery:

* exact evolution of the bankroll distribution, with a rigorous bracket,
* Monte Carlo simulation with a confidence interval,
* a two-barrier linear system pushed far enough out to have converged.
"""

from gamblers_ruin import build_distribution, cross_check, dp_ruin, finite_w_ruin, mc_ruin, ruin_probability

d = build_distribution({-2: 0.2, -1: 0.15, 0: 0.05, 1: 0.3, 3: 0.3})
M = 6
f = ruin_probability(d, M).p_ruin
print(d)
print(f"formula          {f:.12f}")

###############################################################################
# Exact evolution.  ``lower`` and ``lower + bound_gap`` bracket the answer.

dp = dp_ruin(d, M, eps=1e-12)
print(f"evolution        [{dp.lower:.12f}, {dp.upper:.12f}] after {dp.t} rounds")

###############################################################################
# Two barriers: play stops once the bankroll exceeds W.  The answer climbs
# toward the one-barrier value as W grows.

for W in (20, 40, 80, 160):
    print(f"two barriers W={W:<4d}{finite_w_ruin(d, M, W):.12f}")

###############################################################################
# Simulation, reproducible from the seed.

mc = mc_ruin(d, M, n_paths=200_000, seed=42)
print(f"simulation       {mc.estimate:.6f} +/- {mc.ci_halfwidth:.6f}")

###############################################################################
# ``cross_check`` runs all of them and records a verdict for each.

report = cross_check(d, M, mc_paths=200_000, seed=42)
print("verdicts:", report.verdicts, " ok:", report.ok)
