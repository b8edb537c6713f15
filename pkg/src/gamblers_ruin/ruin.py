"""Ruin probability from the in-disk roots of ``p(z) = 1``.

Two equivalent evaluations are provided.  The Newton (divided-difference)
form

    P(M) = sum_{n=1}^{nu} Phi_{n, M-n+1}(eta_1..eta_n) * prod_{j<n} (1 - eta_j)

uses complete homogeneous symmetric polynomials ``Phi`` and is valid for
repeated roots.  The Lagrange form

    P(M) = sum_j eta_j**M * prod_{i != j} (1 - eta_i) / (eta_j - eta_i)

needs distinct roots.  Replacing ``1`` by ``z`` in either gives the
final-fortune polynomial ``Q(z)``, whose ``z**k`` coefficient is the
probability of being ruined with exactly ``k`` left.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import signal

from .errors import ImaginaryResidue, NumericalError, PhiOverflow, RootsNotDistinct, ValidationError
from .payoff import PayoffDistribution
from .rootfinder import DiskRoots, find_disk_roots

__all__ = [
    "RuinResult",
    "phi",
    "phi_table",
    "ruin_probability_newton",
    "ruin_probability_lagrange",
    "ruin_probability",
    "ruin_probabilities",
    "final_fortune_distribution",
]

IMAG_TOL = 1e-6
PROB_SLACK = 1e-9
Q_FLOOR = 1e-12
PHI_LIMIT = 1e15


@dataclass
class RuinResult:
    """Ruin probability for one initial wealth.

    ``q_coeffs[k]`` is the probability that ruin happens with final fortune
    ``k`` (``0 <= k < nu``).  It is ``None`` when the game is not favorable
    and ``nu > 1``, since the root formula does not apply there.
    """

    M: int
    p_ruin: float
    q_coeffs: np.ndarray | None
    method: str
    diagnostics: dict = field(default_factory=dict)


def _as_roots(roots) -> np.ndarray:
    if isinstance(roots, DiskRoots):
        return roots.roots
    return np.atleast_1d(np.asarray(roots, dtype=complex))


def phi_table(roots, r_max: int) -> np.ndarray:
    """``Phi_{n,r}(z_1..z_n)`` for ``1 <= n <= len(roots)``, ``0 <= r <= r_max``.

    Row ``n-1`` holds ``Phi_n``.  Uses ``Phi_{n,r} = Phi_{n-1,r} + z_n Phi_{n,r-1}``,
    i.e. each row is the previous one passed through the one-pole filter
    ``1 / (1 - z_n x)``.
    """
    roots = _as_roots(roots)
    layer = np.zeros(r_max + 1, dtype=complex)
    layer[0] = 1.0
    out = np.empty((len(roots), r_max + 1), dtype=complex)
    for n, z in enumerate(roots):
        layer = signal.lfilter([1.0], [1.0, -z], layer)
        out[n] = layer
    return out


def phi(roots, r: int) -> complex:
    """Complete homogeneous symmetric polynomial of degree ``r`` in ``roots``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    roots = _as_roots(roots)
    if len(roots) == 0:
        raise ValueError("need at least one variable")
    return complex(phi_table(roots, r)[-1, r])


def _finish(M, value, q, method, nu, extra=None):
    """Check imaginary residue, clamp, floor tiny Q coefficients."""
    q = np.asarray(q, dtype=complex)
    imag = max(abs(value.imag), float(np.abs(q.imag).max()))
    if imag > IMAG_TOL:
        raise ImaginaryResidue(f"imaginary residue {imag:.3g} at M={M}; root set not conjugate-closed?")
    p = value.real
    if not -PROB_SLACK <= p <= 1 + PROB_SLACK:
        raise NumericalError(f"ruin probability {p!r} outside [0, 1] at M={M}")
    qr = q.real.copy()
    if np.any(qr < -PROB_SLACK):
        raise NumericalError(f"negative final-fortune mass {qr.min():.3g} at M={M}")
    qr[np.abs(qr) < Q_FLOOR] = 0.0
    qr[qr < 0] = 0.0
    diagnostics = {"imag_residue": imag, "q_sum_gap": abs(q.real.sum() - p)}
    if extra:
        diagnostics.update(extra)
    return RuinResult(M=M, p_ruin=float(min(max(p, 0.0), 1.0)), q_coeffs=qr, method=method, diagnostics=diagnostics)


def _newton_from_table(roots, table, M):
    nu = len(roots)
    value = 0j
    q = np.zeros(nu, dtype=complex)
    prod_at_one = 1.0 + 0j
    basis = np.array([1.0 + 0j])  # prod_{j<n} (z - eta_j), ascending
    for n in range(1, nu + 1):
        c = table[n - 1, M - n + 1]
        value += c * prod_at_one
        q[: len(basis)] += c * basis
        prod_at_one *= 1.0 - roots[n - 1]
        basis = P.polymul(basis, [-roots[n - 1], 1.0])
    return value, q


def ruin_probability_newton(roots, M: int) -> RuinResult:
    """Ruin probability via complete symmetric polynomials.

    Valid for any root multiplicities.  ``M`` must be at least ``nu``.
    """
    roots = _as_roots(roots)
    nu = len(roots)
    if M < nu:
        raise ValidationError(f"M = {M} < nu = {nu}; ruin is immediate")
    table = phi_table(roots, M)
    peak = float(np.abs(table).max())
    if peak > PHI_LIMIT:
        raise PhiOverflow(f"|Phi| reached {peak:.3g}")
    value, q = _newton_from_table(roots, table, M)
    return _finish(M, value, q, "newton_form", nu, {"max_abs_phi": peak})


def _lagrange(roots, M):
    nu = len(roots)
    value = 0j
    q = np.zeros(nu, dtype=complex)
    for j in range(nu):
        others = np.delete(roots, j)
        denom = np.prod(roots[j] - others)
        w = roots[j] ** M / denom
        value += w * np.prod(1.0 - others)
        q += w * P.polyfromroots(others) if nu > 1 else w
    return value, q


def ruin_probability_lagrange(roots, M: int) -> RuinResult:
    """Ruin probability via the Lagrange interpolation form.

    Raises :class:`RootsNotDistinct` if any roots are flagged as clustered.
    """
    if isinstance(roots, DiskRoots) and not roots.distinct:
        raise RootsNotDistinct(f"roots closer than cluster tolerance (min gap {roots.min_separation:.3g})")
    roots = _as_roots(roots)
    nu = len(roots)
    if M < nu:
        raise ValidationError(f"M = {M} < nu = {nu}; ruin is immediate")
    if nu > 1:
        gap = np.abs(roots[:, None] - roots[None, :])[~np.eye(nu, dtype=bool)].min()
        if gap == 0.0:
            raise RootsNotDistinct("repeated root")
    value, q = _lagrange(roots, M)
    return _finish(M, value, q, "lagrange_form", nu)


def _trivial(d: PayoffDistribution, M: int) -> RuinResult:
    nu = d.nu
    if M < nu:
        q = np.zeros(nu)
        q[M] = 1.0
        why = "initial wealth below nu"
    else:
        q = np.ones(1) if nu == 1 else None
        why = "non-positive mean payoff"
    return RuinResult(M=M, p_ruin=1.0, q_coeffs=q, method="trivial", diagnostics={"reason": why})


def ruin_probability(
    d: PayoffDistribution,
    M: int,
    *,
    roots: DiskRoots | None = None,
    form: str = "auto",
    diagnostics: bool = False,
) -> RuinResult:
    """Probability that a gambler starting with ``M`` is ever ruined.

    Parameters
    ----------
    d : PayoffDistribution
    M : int
        Initial wealth, ``M >= 0``.
    roots : DiskRoots, optional
        Precomputed roots (saves the root search when evaluating many ``M``).
    form : {"auto", "newton", "lagrange"}
        ``auto`` uses the Lagrange form for well-separated roots and the
        Newton form otherwise.
    diagnostics : bool
        Evaluate both forms and record their discrepancy.
    """
    if M < 0:
        raise ValidationError(f"initial wealth must be nonnegative, got {M}")
    if M < d.nu or not d.favorable:
        return _trivial(d, M)
    if roots is None:
        roots = find_disk_roots(d)
    if form == "auto":
        form = "lagrange" if roots.distinct else "newton"
    if form == "lagrange":
        result = ruin_probability_lagrange(roots, M)
    elif form == "newton":
        result = ruin_probability_newton(roots, M)
    else:
        raise ValueError(f"unknown form {form!r}")
    result.diagnostics["max_root_abs"] = roots.max_abs
    if diagnostics and roots.distinct:
        other = (ruin_probability_newton if form == "lagrange" else ruin_probability_lagrange)(roots, M)
        result.diagnostics["form_discrepancy"] = abs(other.p_ruin - result.p_ruin)
    return result


def ruin_probabilities(d: PayoffDistribution, Ms, **kwargs) -> list[RuinResult]:
    """:func:`ruin_probability` over several initial wealths, sharing one root search."""
    Ms = [int(m) for m in Ms]
    roots = kwargs.pop("roots", None)
    if roots is None and d.favorable and any(m >= d.nu for m in Ms):
        roots = find_disk_roots(d)
    return [ruin_probability(d, m, roots=roots, **kwargs) for m in Ms]


def final_fortune_distribution(d: PayoffDistribution, M: int, **kwargs) -> np.ndarray | None:
    """Coefficients of ``Q(z)``: probability of ruin ending with fortune ``k``."""
    return ruin_probability(d, M, **kwargs).q_coeffs
