"""
Where does ruin leave you?
==========================

With a maximal loss of ``nu > 1`` chips, the player is ruined once the
bankroll drops below ``nu``, but the leftover amount varies.  The
coefficients of the polynomial ``Q(z)`` give the probability of each final
fortune ``0 .. nu-1``; they sum to the ruin probability.
"""

import numpy as np

from gamblers_ruin import build_distribution, final_fortune_distribution, two_point
from gamblers_ruin.oracles import dp_evolve

###############################################################################
# Lose two chips with probability 0.3, win one with probability 0.7.

d = build_distribution(two_point(2, 1, 0.3))
q = final_fortune_distribution(d, 4)
print("final fortune 0:", q[0])
print("final fortune 1:", q[1])
print("total          :", q.sum())

###############################################################################
# Check against brute force: evolve the exact law of the bankroll and read
# off the mass sitting in the absorbing states after many rounds.

w = dp_evolve(d, 4, steps=10000, k_cap=3000)
print("evolved absorbed masses:", w.absorbed, " max difference", np.abs(w.absorbed - q).max())

###############################################################################
# Richer players are ruined less often, and the mix of final fortunes settles
# down to a fixed ratio set by the dominant root.

for M in (2, 4, 8, 16, 32):
    q = final_fortune_distribution(d, M)
    print(f"  M = {M:3d}   q = {np.round(q, 6)}   share ending at 0: {q[0] / q.sum():.4f}")
