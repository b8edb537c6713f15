"""Roots of ``p(z) = 1`` inside the unit disk.

Equivalently the zeros of ``z**nu - h(z)``.  There are exactly ``nu`` of them
(with multiplicity), all inside ``|z| <= z*`` where ``z*`` is the positive
real root below one.  All roots of the truncated polynomial are located by
Aberth-Ehrlich simultaneous iteration, the in-disk ones are kept and polished
by Newton's method against the series ``p(z) - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import NoInteriorRoot, ResidualTooLarge, RootCountMismatch
from .payoff import PayoffDistribution, h_coefficients, p_derivative, p_minus_one

__all__ = [
    "DiskRoots",
    "find_z_star",
    "find_disk_roots",
    "aberth",
    "winding_number",
    "count_roots_in_disk",
    "sort_roots",
    "residual_floor",
]

RESIDUAL_TOL = 1e-9
CLUSTER_TOL = 1e-6
REAL_TOL = 1e-10
# roots closer than this are re-solved together from a local Taylor model
REFINE_RADIUS = 1e-4


@dataclass(frozen=True, eq=False)
class DiskRoots:
    """The ``nu`` solutions of ``p(z) = 1`` with ``|z| < 1``.

    ``roots`` is sorted by decreasing modulus, ties broken by increasing
    argument.  ``cluster_flags[j]`` is set when root ``j`` lies within
    ``cluster_tol`` of another root.  ``residual_floors[j]`` is the smallest
    residual double precision can certify at that root (see
    :func:`residual_floor`).
    """

    roots: np.ndarray
    z_star: float
    residuals: np.ndarray
    cluster_flags: np.ndarray
    degree: int
    residual_floors: np.ndarray | None = None

    @property
    def nu(self) -> int:
        return len(self.roots)

    @property
    def distinct(self) -> bool:
        return not self.cluster_flags.any()

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.roots).max())

    @property
    def min_separation(self) -> float:
        if len(self.roots) < 2:
            return np.inf
        diff = np.abs(self.roots[:, None] - self.roots[None, :])
        np.fill_diagonal(diff, np.inf)
        return float(diff.min())


def find_z_star(d: PayoffDistribution) -> float:
    """Unique root of ``p(z) = 1`` in ``(0, 1)`` for a favorable game.

    ``p`` is convex on ``(0, 1]`` with ``p(0+) = inf`` and ``p'(1) = E X > 0``,
    so ``p - 1`` changes sign exactly once below one.
    """
    if not d.favorable:
        raise NoInteriorRoot(f"mean payoff {d.mean:.3g} is not positive")

    def f(x):
        return p_minus_one(d, x).real

    # walk towards 1 until p drops below 1
    hi = 0.5
    while f(hi) >= 0.0:
        hi = 0.5 * (1.0 + hi)
        if 1.0 - hi < 1e-15:
            raise NoInteriorRoot("p(z) >= 1 on (0, 1) up to rounding; drift too small")
    lo = hi
    while f(lo) <= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise NoInteriorRoot("could not bracket z* from below")
    z = optimize.brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    # one Newton step cleans up the last ulp or two
    step = f(z) / p_derivative(d, z).real
    if abs(step) < 1e-12:
        z -= step
    return float(z)


def _newton_ratio(coeffs, z):
    """``f(z)/f'(z)`` for a polynomial with descending ``coeffs``.

    Outside the unit circle the reversed polynomial is used, which keeps
    ``z**n`` from overflowing for large degrees.
    """
    n = len(coeffs) - 1
    out = np.empty_like(z)
    inside = np.abs(z) <= 1
    zi = z[inside]
    out[inside] = np.polyval(coeffs, zi) / np.polyval(np.polyder(coeffs), zi)
    w = 1.0 / z[~inside]
    rev = coeffs[::-1]
    q = np.polyval(rev, w)
    dq = np.polyval(np.polyder(rev), w)
    out[~inside] = z[~inside] / (n - w * dq / q)
    return out


def aberth(coeffs, z0, tol=1e-12, max_iter=500):
    """Aberth-Ehrlich iteration for all roots of a polynomial.

    Parameters
    ----------
    coeffs : array_like
        Polynomial coefficients, highest degree first (``numpy.polyval``
        order), nonzero leading coefficient.
    z0 : array_like
        Starting points, one per root; must be pairwise distinct.

    Returns
    -------
    z : ndarray
        Approximate roots.
    converged : bool
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.array(z0, dtype=complex)
    n = len(z)
    if n != len(coeffs) - 1:
        raise ValueError("need one starting point per root")
    for _ in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = _newton_ratio(coeffs, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
        # an exact hit leaves a nan ratio; that point is done
        step[~np.isfinite(step)] = 0.0
        z -= step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            return z, True
    return z, False


def sort_roots(roots) -> np.ndarray:
    """Descending modulus, ties by ascending argument."""
    roots = np.asarray(roots, dtype=complex)
    mod = np.round(np.abs(roots), 12)
    order = np.lexsort((np.angle(roots), -mod))
    return roots[order]


def _polish(d, z, others, iters=30):
    """Newton on ``p(z) - 1``; refuse steps that head for a neighbouring root."""
    best, best_res = z, abs(p_minus_one(d, z))
    if best_res == 0.0:
        return best
    guard = 0.5 * np.min(np.abs(others - z)) if len(others) else np.inf
    for _ in range(iters):
        step = p_minus_one(d, z) / p_derivative(d, z)
        z = z - step
        if abs(z - best) > guard:
            break
        res = abs(p_minus_one(d, z))
        if res < best_res:
            best, best_res = z, res
        if abs(step) <= 2 * np.finfo(float).eps * abs(z) or res == 0.0:
            break
    return best


def _conjugate_close(d, roots):
    """Snap near-real roots to the axis and pair the rest as exact conjugates."""
    real = [r for r in roots if abs(r.imag) <= REAL_TOL * max(1.0, abs(r))]
    upper = [r for r in roots if r.imag > REAL_TOL * max(1.0, abs(r))]
    lower = [r for r in roots if r.imag < -REAL_TOL * max(1.0, abs(r))]
    out = []
    for r in real:
        x = r.real
        f = p_minus_one(d, x).real
        df = p_derivative(d, x).real
        if df != 0.0:
            x1 = x - f / df
            if abs(p_minus_one(d, x1).real) < abs(f):
                x = x1
        out.append(complex(x, 0.0))
    if len(upper) != len(lower):
        raise RootCountMismatch(
            f"in-disk roots are not closed under conjugation: {len(upper)} above, {len(lower)} below the axis"
        )
    lower = list(lower)
    for r in upper:
        j = int(np.argmin([abs(r - np.conj(s)) for s in lower]))
        s = lower.pop(j)
        m = 0.5 * (r + np.conj(s))
        out.extend([m, np.conj(m)])
    return np.array(out, dtype=complex)


def _taylor(d, c, order):
    """Taylor coefficients of ``p(z) - 1`` about ``c``, ascending."""
    k = d.offsets
    nz = d.coeffs > 0
    k, pk = k[nz], d.coeffs[nz]
    a = [p_minus_one(d, c)]
    binom = np.ones(len(k))  # generalized binomial C(k, j), valid for negative k
    for j in range(1, order + 1):
        binom = binom * (k - j + 1) / j
        a.append(np.sum(pk * binom * complex(c) ** (k - j)))
    return np.array(a)


def _clusters(roots, radius):
    """Index groups of roots linked by distance < radius."""
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) < radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def _refine_clusters(d, roots, radius=REFINE_RADIUS, iters=8):
    """Re-solve each tight cluster from the Taylor polynomial about its centre.

    Individually polished roots of a near-multiple cluster are only accurate
    to about the square root of machine precision, and the error shifts the
    whole cluster.  The centre and the local polynomial are well conditioned,
    so the cluster's symmetric functions come out to full accuracy.
    """
    roots = roots.copy()
    done = set()
    for group in _clusters(roots, radius):
        if done & set(group):
            continue
        c = roots[group].mean()
        on_axis = abs(c.imag) < radius
        if not on_axis and c.imag < 0:
            continue  # mirrored from the upper cluster below
        if on_axis:
            c = complex(c.real, 0.0)
        k = len(group)
        for _ in range(iters):
            a = _taylor(d, c.real if on_axis else c, k)
            if on_axis:
                a = a.real
            u = np.roots(a[::-1])
            shift = u.mean()
            c = c + (shift.real if on_axis else shift)
            if abs(shift) <= 4 * np.finfo(float).eps * max(abs(c), 1e-300):
                break
        a = _taylor(d, c.real if on_axis else c, k)
        u = np.roots((a.real if on_axis else a)[::-1])
        roots[group] = c + u
        done |= set(group)
        if not on_axis:
            mirror = [int(np.argmin(np.abs(roots - np.conj(r)))) for r in roots[group]]
            roots[mirror] = np.conj(roots[group])
            done |= set(mirror)
    return roots


def residual_floor(d: PayoffDistribution, z) -> np.ndarray:
    """Rounding floor for ``|p(z) - 1|`` at a double-precision root.

    Near the pole at 0 the terms of ``p`` are large and ``p'`` is steep, so
    even the double nearest the exact root can have a residual above a fixed
    tolerance.  The floor adds the error bound for summing the ``D + 1``
    terms ``p_k z**k`` (each formed as ``exp(k log z)``, so with relative
    error about ``u |k log z|``) to the effect of rounding ``z`` itself,
    ``u |z p'(z)|``, with ``u`` the machine epsilon.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    u = np.finfo(float).eps
    k = d.offsets.astype(float)
    n = len(d.coeffs)
    out = np.empty(len(z))
    for i, x in enumerate(z):
        terms = d.coeffs * np.abs(x) ** k
        out[i] = u * np.sum(terms * (2 * n + np.abs(k * np.log(x))))
    return out + u * np.abs(z * p_derivative(d, z))


def find_disk_roots(
    d: PayoffDistribution,
    degree: int | None = None,
    *,
    residual_tol: float = RESIDUAL_TOL,
    cluster_tol: float = CLUSTER_TOL,
    max_iter: int = 500,
) -> DiskRoots:
    """All ``nu`` roots of ``p(z) = 1`` in the open unit disk.

    Parameters
    ----------
    d : PayoffDistribution
        A favorable payoff law.
    degree : int, optional
        Truncation degree of ``h``; defaults to the realized degree.
    residual_tol : float
        Every returned root must satisfy ``|p(eta) - 1| <= residual_tol``,
        or sit at the rounding floor where that cannot be certified.
    cluster_tol : float
        Roots closer than this are flagged as a possible multiple root.

    Raises
    ------
    NoInteriorRoot
        For non-favorable games.
    RootCountMismatch
        If the number of roots found in the disk differs from ``nu``.
    ResidualTooLarge
    """
    nu = d.nu
    z_star = find_z_star(d)
    h = h_coefficients(d, degree)
    D = len(h) - 1
    g = h.astype(complex)
    g[nu] -= 1.0
    g = np.trim_zeros(g, "b")
    n = len(g) - 1

    # start on the circle |z| = z*, which already contains every in-disk root
    theta = 2 * np.pi * (np.arange(n) + 0.25) / n
    z0 = z_star * np.exp(1j * theta)
    z, converged = aberth(g[::-1], z0, max_iter=max_iter)
    if not converged:
        # rerun from a wider circle before giving up
        radius = 1.0 + np.max(np.abs(g[:-1] / g[-1]))
        z, converged = aberth(g[::-1], radius * np.exp(1j * theta), max_iter=4 * max_iter)

    cut = 0.5 * (1.0 + z_star)
    cand = z[np.abs(z) < cut]
    if len(cand) != nu:
        raise RootCountMismatch(
            f"found {len(cand)} roots with |z| < {cut:.6f}, expected nu = {nu} "
            f"(degree {D}, aberth converged={converged})"
        )
    polished = np.array(
        [_polish(d, r, np.delete(cand, i)) for i, r in enumerate(cand)], dtype=complex
    )
    roots = sort_roots(_refine_clusters(d, _conjugate_close(d, polished)))

    if np.any(np.abs(roots) > z_star + 1e-9):
        raise RootCountMismatch(
            f"root of modulus {np.abs(roots).max():.12f} exceeds z* = {z_star:.12f}"
        )
    residuals = np.abs(p_minus_one(d, roots))
    floors = residual_floor(d, roots)
    bad = residuals > np.maximum(residual_tol, floors)
    if np.any(bad):
        j = int(np.argmax(np.where(bad, residuals, -1.0)))
        raise ResidualTooLarge(
            f"residual {residuals[j]:.3g} at eta = {roots[j]:.6g} exceeds tolerance {residual_tol:.3g} "
            f"(rounding floor {floors[j]:.3g})"
        )

    flags = np.zeros(nu, dtype=bool)
    if nu > 1:
        diff = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(diff, np.inf)
        flags = diff.min(axis=1) < cluster_tol
    residuals.flags.writeable = False
    floors.flags.writeable = False
    roots.flags.writeable = False
    flags.flags.writeable = False
    return DiskRoots(roots=roots, z_star=z_star, residuals=residuals, cluster_flags=flags, degree=D,
                     residual_floors=floors)


def winding_number(coeffs, center=0.0, radius=1.0, n_points=1024, max_points=2**22) -> int:
    """Winding number of a polynomial's image of the circle ``|z - center| = radius``.

    By the argument principle this is the number of zeros (with
    multiplicity) inside the circle.  ``coeffs`` are ascending.  The sampling
    is refined until no two consecutive samples differ in phase by more than
    a quarter turn.
    """
    c = np.asarray(coeffs, dtype=complex)[::-1]
    n = n_points
    while True:
        t = 2 * np.pi * np.arange(n + 1) / n
        w = np.polyval(c, center + radius * np.exp(1j * t))
        if np.any(w == 0):
            raise ValueError("polynomial vanishes on the contour")
        jumps = np.angle(w[1:] / w[:-1])
        if np.max(np.abs(jumps)) < np.pi / 2 or n >= max_points:
            break
        n *= 4
    return int(round(jumps.sum() / (2 * np.pi)))


def count_roots_in_disk(d: PayoffDistribution, radius: float | None = None, degree: int | None = None) -> int:
    """Zeros of ``z**nu - h(z)`` inside ``|z| < radius`` by the argument principle.

    The default radius ``(1 + z*)/2`` separates the in-disk roots from the
    root at ``z = 1``.
    """
    if radius is None:
        radius = 0.5 * (1.0 + find_z_star(d))
    g = -h_coefficients(d, degree)
    g[d.nu] += 1.0
    return winding_number(g, radius=radius)
