"""Integer-valued payoff distributions and their generating functions.

A payoff law is stored densely as the coefficient vector of
``h(z) = z**nu * p(z)``, i.e. ``coeffs[i] = P(X = i - nu)``.  Infinite-support
families (the Poisson prize) are truncated at the smallest degree whose
dropped tail mass is below a requested tolerance; the bound on the dropped
mass travels with the distribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy import stats

from .errors import (
    DegreeTooSmall,
    MassNotOne,
    NegativeProbability,
    SpecFormatError,
    TailNotAchievable,
    ValidationError,
    ZeroArgument,
    ZeroFloorMass,
)

__all__ = [
    "AnalyticFamily",
    "PayoffDistribution",
    "build_distribution",
    "h_coefficients",
    "evaluate_p",
    "p_minus_one",
    "p_derivative",
    "parse_spec",
    "load_spec",
    "table",
    "poisson_prize",
    "two_point",
]

MASS_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-14
MAX_TAIL_TOL = 1e-6
MAX_COEFFICIENTS = 100_000
# means at or below this are treated as non-favorable (rounding noise on fair games)
FAVORABLE_MEAN_TOL = 1e-12


@dataclass(frozen=True)
class AnalyticFamily:
    """A named payoff family with its parameters.

    ``kind`` is one of ``"table"``, ``"poisson_prize"`` or ``"two_point"``.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)


def table(entries: Mapping[int, float]) -> AnalyticFamily:
    return AnalyticFamily("table", {"entries": {int(k): float(v) for k, v in entries.items()}})


def poisson_prize(nu: int, epsilon: float) -> AnalyticFamily:
    """Pay ``nu`` to play, win a Poisson prize with mean ``nu + epsilon``."""
    return AnalyticFamily("poisson_prize", {"nu": int(nu), "epsilon": float(epsilon)})


def two_point(nu: int, mu: int, p_loss: float) -> AnalyticFamily:
    """Lose ``nu`` with probability ``p_loss``, otherwise win ``mu``."""
    return AnalyticFamily("two_point", {"nu": int(nu), "mu": int(mu), "p_loss": float(p_loss)})


@dataclass(frozen=True, eq=False)
class PayoffDistribution:
    """Realized payoff law ``P(X = k) = coeffs[k + nu]`` for ``k >= -nu``.

    Attributes
    ----------
    nu : int
        Maximal loss; ``P(X = -nu) > 0``.
    coeffs : ndarray
        Read-only coefficients of ``h(z) = z**nu p(z)``.
    tail_mass_bound : float
        Upper bound on probability mass dropped by truncation (0 when the
        support is finite and fully stored).
    mu : int or None
        Largest payoff with positive probability, when the support is finite.
    family : AnalyticFamily or None
        What the distribution was realized from.
    """

    nu: int
    coeffs: np.ndarray
    tail_mass_bound: float = 0.0
    mu: int | None = None
    family: AnalyticFamily | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(len(self.coeffs)) - self.nu

    @property
    def probs(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.offsets, self.coeffs) if p > 0}

    @property
    def degree(self) -> int:
        """Degree of the stored (truncated) ``h`` polynomial."""
        return len(self.coeffs) - 1

    @property
    def finite_support(self) -> bool:
        return self.mu is not None

    @property
    def mean(self) -> float:
        return _cached(self, "_mean", lambda: math.fsum(self.offsets * self.coeffs))

    @property
    def variance(self) -> float:
        m = self.mean
        return _cached(self, "_var", lambda: math.fsum((self.offsets - m) ** 2 * self.coeffs))

    @property
    def favorable(self) -> bool:
        return self.mean > FAVORABLE_MEAN_TOL

    def __repr__(self):
        tail = f", tail<={self.tail_mass_bound:.1e}" if self.tail_mass_bound else ""
        return f"PayoffDistribution(nu={self.nu}, degree={self.degree}, mean={self.mean:.6g}{tail})"


def _cached(obj, name, fn):
    try:
        return obj.__dict__[name]
    except KeyError:
        value = fn()
        object.__setattr__(obj, name, value)
        return value


def build_distribution(spec, tail_tol: float = DEFAULT_TAIL_TOL) -> PayoffDistribution:
    """Realize a payoff family (or an explicit ``{k: p_k}`` table).

    Parameters
    ----------
    spec : AnalyticFamily or mapping
        A family, or a plain mapping from integer payoff to probability.
    tail_tol : float
        Largest acceptable dropped tail mass, in ``[0, 1e-6]``.  Only
        infinite-support families are affected.

    Raises
    ------
    NegativeProbability, MassNotOne, ZeroFloorMass, TailNotAchievable
    """
    if not 0.0 <= tail_tol <= MAX_TAIL_TOL:
        raise ValidationError(f"tail_tol must lie in [0, {MAX_TAIL_TOL}], got {tail_tol}")
    if not isinstance(spec, AnalyticFamily):
        spec = table(spec)

    if spec.kind == "table":
        return _from_table(spec.params["entries"], spec)
    if spec.kind == "two_point":
        nu, mu, p_loss = spec.params["nu"], spec.params["mu"], spec.params["p_loss"]
        if nu < 1 or mu < 0:
            raise ValidationError(f"two_point needs nu >= 1 and mu >= 0, got nu={nu}, mu={mu}")
        if not 0.0 < p_loss <= 1.0:
            raise ValidationError(f"p_loss must lie in (0, 1], got {p_loss}")
        entries = {-nu: p_loss}
        if p_loss < 1.0:
            entries[mu] = 1.0 - p_loss
        return _from_table(entries, spec)
    if spec.kind == "poisson_prize":
        return _poisson_prize(spec, tail_tol)
    raise ValidationError(f"unknown payoff family {spec.kind!r}")


def _from_table(entries: Mapping[int, float], family: AnalyticFamily) -> PayoffDistribution:
    if not entries:
        raise ValidationError("empty payoff table")
    entries = {int(k): float(v) for k, v in entries.items()}
    for k, v in entries.items():
        if not v >= 0.0:
            raise NegativeProbability(f"p_{k} = {v} is negative")
    total = math.fsum(entries.values())
    if abs(total - 1.0) > MASS_TOL:
        raise MassNotOne(f"probabilities sum to {total!r}, not 1")
    low = min(entries)
    if low >= 0 or entries[low] == 0.0:
        raise ZeroFloorMass(f"no positive probability on a loss; lowest payoff is {low}")
    nu = -low
    positive = [k for k, v in entries.items() if v > 0]
    mu = max(positive)
    coeffs = np.zeros(mu + nu + 1)
    for k, v in entries.items():
        if k <= mu:
            coeffs[k + nu] = v
    return PayoffDistribution(nu=nu, coeffs=coeffs, tail_mass_bound=0.0, mu=mu, family=family)


def _poisson_prize(family: AnalyticFamily, tail_tol: float) -> PayoffDistribution:
    nu, eps = family.params["nu"], family.params["epsilon"]
    lam = nu + eps
    if nu < 1:
        raise ValidationError(f"poisson_prize needs nu >= 1, got {nu}")
    if not lam > 0:
        raise ValidationError(f"prize mean nu + epsilon must be positive, got {lam}")
    if tail_tol <= 0:
        raise TailNotAchievable("an infinite-support family cannot be truncated with zero tail mass")
    degree = int(stats.poisson.isf(tail_tol, lam))
    while degree > 0 and stats.poisson.sf(degree - 1, lam) <= tail_tol:
        degree -= 1
    while stats.poisson.sf(degree, lam) > tail_tol:
        degree += 1
    if degree + 1 > MAX_COEFFICIENTS:
        raise TailNotAchievable(f"tail {tail_tol} needs {degree + 1} coefficients")
    coeffs = stats.poisson.pmf(np.arange(degree + 1), lam)
    if coeffs[0] == 0.0:
        raise ZeroFloorMass(f"P(X = -{nu}) = exp(-{lam}) underflows")
    dropped = float(stats.poisson.sf(degree, lam))
    return PayoffDistribution(nu=nu, coeffs=coeffs, tail_mass_bound=dropped, mu=None, family=family)


def h_coefficients(d: PayoffDistribution, degree: int | None = None) -> np.ndarray:
    """Coefficients ``c[k] = p_{k-nu}`` of ``h(z) = z**nu p(z)``, ascending.

    Requesting more coefficients than were realized pads with zeros; asking for
    fewer raises :class:`DegreeTooSmall` once the discarded mass would exceed
    ``d.tail_mass_bound``.
    """
    if degree is None:
        degree = d.degree
    if degree < d.nu:
        raise DegreeTooSmall(f"degree {degree} < nu = {d.nu}")
    c = np.zeros(degree + 1)
    keep = min(degree, d.degree) + 1
    c[:keep] = d.coeffs[:keep]
    dropped = math.fsum(d.coeffs[keep:])
    if dropped > d.tail_mass_bound:
        raise DegreeTooSmall(
            f"degree {degree} drops mass {dropped:.3g} > tail bound {d.tail_mass_bound:.3g}"
        )
    return c


def _check_z(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroArgument("p(z) has a pole of order nu at z = 0")
    return z


def evaluate_p(d: PayoffDistribution, z):
    """Truncated ``p(z) = sum_k p_k z**k``.

    For ``|z| <= 1`` the dropped terms contribute at most ``d.tail_mass_bound``.
    Accepts scalars or arrays.
    """
    z = _check_z(z)
    # Horner on h, highest degree first
    hz = np.polyval(d.coeffs[::-1], z)
    out = hz / z**d.nu
    return out.item() if out.ndim == 0 else out


def p_minus_one(d: PayoffDistribution, z):
    """``p(z) - 1`` written as ``sum_k p_k (z**k - 1)``.

    The ``expm1`` form keeps full relative accuracy near ``z = 1``, where the
    direct difference cancels.  The stored coefficients are treated as summing
    to one; the discrepancy is below ``d.tail_mass_bound + 1e-12``.
    """
    z = _check_z(z)
    k = d.offsets
    nz = d.coeffs > 0
    logz = np.log(z)[..., None]
    out = np.expm1(logz * k[nz]) @ d.coeffs[nz]
    return out.item() if out.ndim == 0 else out


def p_derivative(d: PayoffDistribution, z):
    """``p'(z) = sum_k k p_k z**(k-1)``."""
    z = _check_z(z)
    k = d.offsets
    dh = np.polyval((k * d.coeffs)[::-1], z)  # sum_k k p_k z^(k+nu)
    out = dh / z ** (d.nu + 1)
    return out.item() if out.ndim == 0 else out


# -- distribution spec files --------------------------------------------------

def parse_spec(obj: Mapping[str, Any]) -> AnalyticFamily:
    """Turn a decoded spec document into an :class:`AnalyticFamily`.

    Accepted shapes::

        {"type": "table", "entries": {"-1": 0.4, "1": 0.6}}
        {"type": "poisson_prize", "nu": 3, "epsilon": 0.01}
        {"type": "two_point", "nu": 2, "mu": 3, "p_loss": 0.5}
    """
    if not isinstance(obj, Mapping) or "type" not in obj:
        raise SpecFormatError("spec must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "table":
            entries = obj["entries"]
            if not isinstance(entries, Mapping):
                raise SpecFormatError("'entries' must be an object")
            return table({_int_key(k): _number(v, f"entries[{k!r}]") for k, v in entries.items()})
        if kind == "poisson_prize":
            return poisson_prize(_integer(obj["nu"], "nu"), _number(obj["epsilon"], "epsilon"))
        if kind == "two_point":
            return two_point(
                _integer(obj["nu"], "nu"), _integer(obj["mu"], "mu"), _number(obj["p_loss"], "p_loss")
            )
    except KeyError as exc:
        raise SpecFormatError(f"{kind} spec is missing field {exc.args[0]!r}") from None
    raise SpecFormatError(f"unknown spec type {kind!r}")


def _int_key(k) -> int:
    try:
        return int(str(k).strip())
    except ValueError:
        raise SpecFormatError(f"payoff key {k!r} is not an integer") from None


def _integer(v, name) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecFormatError(f"{name} must be an integer, got {v!r}")
    return v


def _number(v, name) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecFormatError(f"{name} must be a number, got {v!r}")
    return float(v)


def load_spec(path) -> AnalyticFamily:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise SpecFormatError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}"
        ) from None
    return parse_spec(obj)
