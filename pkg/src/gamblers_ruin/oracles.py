"""Independent ruin-probability computations used to cross-check the formula.

* :func:`dp_ruin` evolves the exact law of the stopped wealth process.
* :func:`mc_ruin` simulates paths.
* :func:`finite_w_ruin` solves the two-barrier problem (play also stops above
  ``W``) as a banded linear system; it increases to the answer as ``W`` grows.

The dynamic program brackets the answer with the exponential martingale
``z***S_t`` (``E z***X = p(z*) = 1``): from a live state ``k`` the ruin
probability lies in ``[z***k, z***(k-nu+1)]``.  Both ends are monotone in
``t``, so the bracket width is an honest error bar at any stopping time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import linalg

from .errors import NotConverged, SingularSystem, ValidationError
from .payoff import PayoffDistribution
from .rootfinder import find_z_star
from .ruin import ruin_probability

__all__ = [
    "WealthDistribution",
    "DPResult",
    "MCResult",
    "OracleReport",
    "point_mass",
    "dp_step",
    "dp_evolve",
    "dp_ruin",
    "mc_ruin",
    "finite_w_ruin",
    "default_w",
    "cross_check",
]


@dataclass(frozen=True, eq=False)
class WealthDistribution:
    """Law of ``S_t`` on states ``0..K_cap``.

    ``mass[k] = P(S_t = k)``; the first ``nu`` entries form the absorbing
    band.  Mass pushed above ``K_cap`` is accumulated in ``spill_mass``.
    """

    t: int
    mass: np.ndarray
    nu: int
    spill_mass: float = 0.0

    @property
    def k_cap(self) -> int:
        return len(self.mass) - 1

    @property
    def absorbed(self) -> np.ndarray:
        return self.mass[: self.nu]

    @property
    def live(self) -> np.ndarray:
        return self.mass[self.nu :]

    @property
    def total(self) -> float:
        return math.fsum(self.mass) + self.spill_mass


def point_mass(M: int, nu: int, k_cap: int) -> WealthDistribution:
    if not 0 <= M <= k_cap:
        raise ValidationError(f"need 0 <= M <= K_cap, got M={M}, K_cap={k_cap}")
    mass = np.zeros(k_cap + 1)
    mass[M] = 1.0
    return WealthDistribution(t=0, mass=mass, nu=nu)


def _advance(mass, coeffs, nu, hi):
    """One step in place on the live window ``nu..hi``; returns (spill, new hi)."""
    k_cap = len(mass) - 1
    if hi < nu:
        return 0.0, hi
    live = mass[nu : hi + 1].copy()
    mass[nu : hi + 1] = 0.0
    # live index i sits at state nu+i and payoff index j is payoff j-nu,
    # so conv[s] lands on state s
    conv = np.convolve(live, coeffs)
    top = min(len(conv) - 1, k_cap)
    mass[: top + 1] += conv[: top + 1]
    spill = math.fsum(conv[top + 1 :]) if len(conv) - 1 > k_cap else 0.0
    return spill, top


def dp_step(w: WealthDistribution, d: PayoffDistribution) -> WealthDistribution:
    """Exact one-step update of the stopped wealth law.

    Live states ``k >= nu`` are convolved with the payoff law; states below
    ``nu`` keep their mass (absorbing).
    """
    if w.nu != d.nu:
        raise ValidationError("wealth distribution and payoff law disagree on nu")
    mass = w.mass.copy()
    nz = np.flatnonzero(mass)
    hi = int(nz[-1]) if len(nz) else -1
    spill, _ = _advance(mass, d.coeffs, d.nu, hi)
    return WealthDistribution(t=w.t + 1, mass=mass, nu=w.nu, spill_mass=w.spill_mass + spill)


def dp_evolve(d: PayoffDistribution, M: int, steps: int, k_cap: int | None = None) -> WealthDistribution:
    """Law of ``S_steps`` started from ``S_0 = M``."""
    if k_cap is None:
        k_cap = M + steps * max(d.degree - d.nu, 1)
    w = point_mass(M, d.nu, k_cap)
    mass = w.mass.copy()
    hi, spill = M, 0.0
    for _ in range(steps):
        s, hi = _advance(mass, d.coeffs, d.nu, hi)
        spill += s
    return WealthDistribution(t=steps, mass=mass, nu=d.nu, spill_mass=spill)


@dataclass
class DPResult:
    lower: float
    bound_gap: float
    absorbed: np.ndarray
    t: int
    k_cap: int
    spill_mass: float
    z_star: float

    @property
    def upper(self) -> float:
        return self.lower + self.bound_gap

    @property
    def estimate(self) -> float:
        return self.lower + 0.5 * self.bound_gap

    def __iter__(self):
        return iter((self.lower, self.bound_gap))


def dp_ruin(
    d: PayoffDistribution,
    M: int,
    eps: float = 1e-10,
    t_max: int = 1_000_000,
    k_cap: int | None = None,
) -> DPResult:
    """Ruin probability by evolving the exact wealth law until the bracket closes.

    Returns a :class:`DPResult`; unpacking gives ``(lower, bound_gap)`` with
    ``lower <= P_ruin <= lower + bound_gap``.  ``lower`` counts absorbed mass
    plus ``z***k`` for each live state; the gap covers the remaining
    uncertainty of live mass and any spill above ``k_cap``.

    Raises
    ------
    NotConverged
        If ``t_max`` steps pass with ``bound_gap > eps``; the partial result
        is attached as ``exc.partial``.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    nu = d.nu
    if M < nu or not d.favorable:
        absorbed = np.zeros(nu)
        if M < nu:
            absorbed[M] = 1.0
        # non-favorable M >= nu: ruin is certain but the final fortune is not computed
        return DPResult(1.0, 0.0, absorbed, 0, M, 0.0, 1.0)
    z = find_z_star(d)
    log_z = math.log(z)
    if k_cap is None:
        # spill above k_cap can still be ruined with probability <= z***(k_cap-nu+2)
        k_cap = M + max(50 * nu, math.ceil(math.log(1e-3 * eps) / log_z) + nu)
    mass = np.zeros(k_cap + 1)
    mass[M] = 1.0
    states = np.arange(k_cap + 1)
    low_w = z**states
    low_w[:nu] = 1.0
    high_w = z ** (states - nu + 1.0)
    high_w[:nu] = 1.0
    spill_w = z ** (k_cap - nu + 2.0)

    hi, spill, t = M, 0.0, 0
    lower = gap = None
    while True:
        if t % 16 == 0 or t == t_max:
            lower = float(mass @ low_w)
            gap = float(mass[nu:] @ (high_w[nu:] - low_w[nu:])) + spill * spill_w
            if gap <= eps:
                break
            if t >= t_max:
                partial = DPResult(lower, gap, mass[:nu].copy(), t, k_cap, spill, z)
                raise NotConverged(f"bracket {gap:.3g} > eps {eps:.3g} after {t} steps", partial)
        s, hi = _advance(mass, d.coeffs, nu, hi)
        spill += s
        t += 1
    return DPResult(lower, gap, mass[:nu].copy(), t, k_cap, spill, z)


@dataclass
class MCResult:
    """Monte Carlo ruin estimate.

    ``censored_fraction`` is the share of paths still in play at ``t_cap``.
    Paths that climb to ``escape_level`` are stopped and counted as
    survivors; ``escape_bias_bound`` bounds the ruin probability thereby
    ignored.  ``estimate`` is a lower bound whenever either is nonzero.
    """

    estimate: float
    ci_halfwidth: float
    censored_fraction: float
    n_paths: int
    escape_level: int
    escape_bias_bound: float
    seed: int

    def __iter__(self):
        return iter((self.estimate, self.ci_halfwidth, self.censored_fraction))


MC_CHUNK = 1 << 16


@njit(cache=True)
def _simulate_chunk(rng, n, M, nu, values, cdf, escape, t_cap):
    """Ruined and censored counts for ``n`` paths drawn from one generator."""
    ruined = 0
    censored = 0
    m = len(cdf)
    for _ in range(n):
        s = M
        t = 0
        while t < t_cap:
            u = rng.random()
            j = 0
            while j < m - 1 and u >= cdf[j]:
                j += 1
            s += values[j]
            t += 1
            if s < nu:
                ruined += 1
                break
            if s >= escape:
                break
        else:
            censored += 1
    return ruined, censored


def mc_ruin(
    d: PayoffDistribution,
    M: int,
    n_paths: int = 100_000,
    seed: int = 0,
    t_cap: int = 10_000_000,
    escape_level: int | None = None,
) -> MCResult:
    """Monte Carlo estimate of the ruin probability with a 95% normal CI.

    Paths are simulated in fixed chunks of 65536, each with its own
    generator spawned from ``seed``, so results do not depend on how the
    work is scheduled.  The escape level defaults to the height above which
    ruin has probability at most ``1e-5``.
    """
    if n_paths < 1:
        raise ValidationError("n_paths must be at least 1")
    nu = d.nu
    if M < nu:
        return MCResult(1.0, 0.0, 0.0, n_paths, M, 0.0, seed)
    if escape_level is None:
        if d.favorable:
            z = find_z_star(d)
            escape_level = nu - 1 + math.ceil(math.log(1e-5) / math.log(z))
            escape_level = max(escape_level, M + 1)
        else:
            escape_level = np.iinfo(np.int64).max // 2
    escape_bias = 0.0
    if d.favorable:
        escape_bias = find_z_star(d) ** (escape_level - nu + 1)

    nz = d.coeffs > 0
    values = d.offsets[nz].astype(np.int64)
    cdf = np.cumsum(d.coeffs[nz])
    cdf /= cdf[-1]

    sizes = [MC_CHUNK] * (n_paths // MC_CHUNK)
    if n_paths % MC_CHUNK:
        sizes.append(n_paths % MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    ruined = censored = 0
    escaped_frac = 0.0
    for size, child in zip(sizes, children):
        r, c = _simulate_chunk(
            np.random.default_rng(child), size, M, nu, values, cdf, int(escape_level), int(t_cap)
        )
        ruined += r
        censored += c
    p = ruined / n_paths
    escaped_frac = 1.0 - p - censored / n_paths
    ci = 1.959963984540054 * math.sqrt(p * (1 - p) / n_paths)
    return MCResult(
        estimate=p,
        ci_halfwidth=ci,
        censored_fraction=censored / n_paths,
        n_paths=n_paths,
        escape_level=int(escape_level),
        escape_bias_bound=escaped_frac * escape_bias,
        seed=seed,
    )


def finite_w_ruin(d: PayoffDistribution, M: int, W: int) -> float:
    """Ruin probability when play also stops once wealth exceeds ``W``.

    Solves ``u(m) = sum_l p_l u(m + l)`` for ``nu <= m <= W`` with
    ``u = 1`` below ``nu`` and ``u = 0`` above ``W``.  The system is banded
    with ``nu`` sub- and ``mu`` super-diagonals.
    """
    if not d.finite_support:
        raise ValidationError("finite_w_ruin needs a payoff law with finite support")
    nu, mu = d.nu, d.mu
    if not nu <= M <= W:
        raise ValidationError(f"need nu <= M <= W, got nu={nu}, M={M}, W={W}")
    n = W - nu + 1
    p = d.coeffs  # p[l + nu] = p_l for l in -nu..mu
    ab = np.zeros((nu + mu + 1, n))
    rhs = np.zeros(n)
    for l in range(-nu, mu + 1):
        pl = p[l + nu]
        if pl == 0.0 and l != 0:
            continue
        row = mu - l
        # entry A[i, i+l] lives at ab[mu - l, i + l]
        lo, hi = max(0, -l), min(n, n - l)
        ab[row, lo + l : hi + l] = (1.0 if l == 0 else 0.0) - pl
        if l < 0:
            # unknown index i + l < 0 means m + l < nu: ruined, value 1
            rhs[: min(-l, n)] += pl
    try:
        u = linalg.solve_banded((nu, mu), ab, rhs)
    except linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(u)):
        raise SingularSystem("non-finite solution")
    return float(u[M - nu])


def default_w(d: PayoffDistribution, M: int) -> int:
    """Upper barrier far enough out that the two-barrier answer has converged."""
    return M + math.ceil(400.0 / d.mean)


@dataclass
class OracleReport:
    """Formula value against the three oracles, with pass/fail verdicts."""

    M: int
    formula: float
    dp: DPResult | None = None
    mc: MCResult | None = None
    finite_w: dict[int, float] = field(default_factory=dict)
    finite_w_extrapolated: float | None = None
    tolerance: float = 1e-6
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def as_dict(self) -> dict:
        out = {"M": self.M, "formula": self.formula, "verdicts": dict(self.verdicts), "ok": self.ok}
        if self.dp is not None:
            out["dp"] = {
                "lower": self.dp.lower,
                "bound_gap": self.dp.bound_gap,
                "steps": self.dp.t,
                "k_cap": self.dp.k_cap,
                "spill_mass": self.dp.spill_mass,
            }
        if self.mc is not None:
            out["mc"] = {
                "estimate": self.mc.estimate,
                "ci_halfwidth": self.mc.ci_halfwidth,
                "censored_fraction": self.mc.censored_fraction,
                "escape_bias_bound": self.mc.escape_bias_bound,
                "n_paths": self.mc.n_paths,
                "seed": self.mc.seed,
            }
        if self.finite_w:
            out["finite_w"] = {str(w): v for w, v in self.finite_w.items()}
            out["finite_w_extrapolated"] = self.finite_w_extrapolated
        return out


def _aitken(a, b, c):
    den = (c - b) - (b - a)
    if den == 0.0 or not math.isfinite(den):
        return c
    return c - (c - b) ** 2 / den


def cross_check(
    d: PayoffDistribution,
    M: int,
    *,
    roots=None,
    dp_eps: float = 1e-10,
    dp_t_max: int = 1_000_000,
    mc_paths: int = 100_000,
    seed: int = 0,
    w_values=None,
    tolerance: float = 1e-6,
    run_mc: bool = True,
) -> OracleReport:
    """Run every applicable oracle against the formula at one ``M``.

    ``finite_w`` is only attempted for finite-support laws; by default at
    ``W0, 2 W0, 4 W0`` offsets above ``M`` with ``W0 = 100/mean``.
    """
    formula = ruin_probability(d, M, roots=roots).p_ruin
    rep = OracleReport(M=M, formula=formula, tolerance=tolerance)

    try:
        rep.dp = dp_ruin(d, M, eps=dp_eps, t_max=dp_t_max)
        rep.verdicts["dp"] = abs(formula - rep.dp.lower) <= rep.dp.bound_gap + tolerance
    except NotConverged as exc:
        rep.dp = exc.partial
        rep.verdicts["dp"] = abs(formula - rep.dp.lower) <= rep.dp.bound_gap + tolerance
        rep.verdicts["dp_converged"] = False

    if run_mc:
        rep.mc = mc_ruin(d, M, n_paths=mc_paths, seed=seed)
        slack = 3 * rep.mc.ci_halfwidth + rep.mc.censored_fraction + rep.mc.escape_bias_bound
        # with a zero-width CI a handful of paths cannot resolve tiny probabilities
        slack = max(slack, 3.0 / rep.mc.n_paths)
        rep.verdicts["mc"] = abs(formula - rep.mc.estimate) <= slack

    if d.finite_support and d.favorable and M >= d.nu:
        if w_values is None:
            base = default_w(d, M) - M
            w_values = [M + base // 4, M + base // 2, M + base]
        w_values = sorted(int(w) for w in w_values)
        rep.finite_w = {w: finite_w_ruin(d, M, w) for w in w_values}
        vals = list(rep.finite_w.values())
        rep.finite_w_extrapolated = _aitken(*vals[-3:]) if len(vals) >= 3 else vals[-1]
        increasing = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        rep.verdicts["finite_w"] = increasing and abs(formula - vals[-1]) <= tolerance
    return rep
