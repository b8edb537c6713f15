"""
Ruin with a small edge
======================

A player pays ``nu`` chips per round and wins a Poisson number of chips with
mean ``nu + epsilon``.  The game is favorable, but only barely, so ruin is
likely unless the starting bankroll is large.

The ruin probability is a combination of powers of the ``nu`` roots of
``p(z) = 1`` inside the unit disk.
"""

import numpy as np

from gamblers_ruin import (
    build_distribution,
    find_disk_roots,
    poisson_prize,
    ruin_probabilities,
)

###############################################################################
# Build the payoff law.  The Poisson tail is cut once the dropped mass is
# below ``tail_tol``; the bound is carried along.

d = build_distribution(poisson_prize(3, 0.01), tail_tol=1e-14)
print(d)
print("mean payoff per round:", round(d.mean, 12))

###############################################################################
# The three roots in the disk.  One is real and close to 1; it dominates the
# decay of the ruin probability.

roots = find_disk_roots(d)
for eta, res in zip(roots.roots, roots.residuals):
    print(f"  eta = {eta.real:+.6f} {eta.imag:+.6f}i   |eta| = {abs(eta):.6f}   residual {res:.1e}")

###############################################################################
# Ruin probabilities for a range of bankrolls.

Ms = [3, 10, 50, 100, 200, 500]
for r in ruin_probabilities(d, Ms, roots=roots):
    print(f"  M = {r.M:4d}   P_ruin = {r.p_ruin:.6f}   ({r.method})")

###############################################################################
# Far out, successive ratios approach the largest root.

p = [r.p_ruin for r in ruin_probabilities(d, [1000, 1001], roots=roots)]
print("P(1001)/P(1000) =", p[1] / p[0], " vs  max |eta| =", roots.max_abs)

###############################################################################
# A bankroll that makes ruin less likely than 1%:

Ms = np.arange(3, 2000)
p = np.array([r.p_ruin for r in ruin_probabilities(d, Ms, roots=roots)])
print("smallest M with P_ruin < 0.01:", int(Ms[np.argmax(p < 0.01)]))
