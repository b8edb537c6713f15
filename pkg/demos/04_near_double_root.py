"""
Nearly repeated roots
=====================

The Lagrange form of the ruin formula divides by differences of roots, so it
loses accuracy when two roots almost coincide.  The Newton form, built from
complete symmetric polynomials, has no such division.  The root finder flags
close pairs and ``ruin_probability`` switches forms automatically.
"""

import numpy as np
from scipy import optimize

from gamblers_ruin import build_distribution, find_disk_roots, ruin_probability, ruin_probability_newton
from gamblers_ruin.oracles import dp_ruin

###############################################################################
# In the family {-3: 0.09, -2: b, +2: 0.91 - b} two negative roots merge as
# b passes about 0.37.  Locate the merge point by watching the imaginary
# part of the pair vanish.


def pair_imag(b):
    c = np.array([0.09, b, 0.0, -1.0, 0.0, 0.91 - b])  # h(z) - z^3, ascending
    r = np.roots(c[::-1])
    neg = r[(np.abs(r) < 0.99) & (r.real < 0)]
    return np.abs(neg.imag).max() - 1e-9


b = optimize.brentq(pair_imag, 0.36, 0.37, xtol=1e-15)
d = build_distribution({-3: 0.09, -2: b, 2: 0.91 - b})
roots = find_disk_roots(d)
print("roots:", np.round(roots.roots, 10))
print("closest pair distance:", roots.min_separation)
print("cluster flags:", roots.cluster_flags)

###############################################################################
# The dispatcher uses the Newton form here, and the exact evolution agrees.

for M in (3, 10, 40):
    r = ruin_probability(d, M, roots=roots)
    lower, gap = dp_ruin(d, M, eps=1e-12)
    print(f"  M = {M:3d}   {r.method:12s} {r.p_ruin:.15f}   evolution [{lower:.15f}, {lower + gap:.15f}]")

###############################################################################
# Why not Lagrange?  Its terms are huge and cancel: a relative error of
# 1e-16 in one term is already an absolute error around 1e-11 in the sum.
# The Newton form never builds these terms.

eta = roots.roots
terms = [eta[j] ** 3 * np.prod([(1 - e) / (eta[j] - e) for e in np.delete(eta, j)]) for j in range(3)]
print("Lagrange terms at M=3:", ", ".join(f"{abs(t):.3e}" for t in terms))
print("their sum            :", sum(terms).real)
print("Newton form          :", ruin_probability_newton(eta, 3).p_ruin)
