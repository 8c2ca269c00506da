"""Closed-form SIR probabilities for a Poisson field of interferers.

Interferers form a PPP of intensity ``lam`` on the plane, the desired
transmitter sits at distance ``r`` from an ``n``-antenna receiver, all links
see iid Rayleigh fading, and the path loss exponent is ``alpha > 2``.  With
``delta = 2/alpha`` every result depends on (lam, r) only through

    Delta = lam * pi * r**2 * Gamma(1 + delta) * Gamma(1 - delta),

so the functions below take :class:`NormalizedParams` (or a
:class:`ModelParams`, which is converted on the fly).

Thresholds are plain floats.  ``theta == 0`` is accepted everywhere and gives
success probability one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import mpmath

from .specfun import DomainError, diversity_poly, log_diversity_poly, log_gamma

__all__ = [
    "ModelParams",
    "NormalizedParams",
    "PrecisionExhaustedError",
    "MAX_SELECTION_ORDER",
    "contention",
    "single_success_prob",
    "joint_success_prob",
    "independent_joint_prob",
    "joint_prob_bounds",
    "diversity_loss",
    "conditional_success_prob",
    "indicator_correlation",
    "selection_combining_prob",
    "selection_combining_curve",
    "selection_outage_curve",
    "independent_selection_prob",
    "independent_selection_outage",
    "joint_two_antenna_success",
    "joint_two_antenna_cdf",
    "independent_two_antenna_success",
]

MAX_SELECTION_ORDER = 4096
_GUARD_BITS = 64
_DIAGONAL_RTOL = 1e-9


class PrecisionExhaustedError(ArithmeticError):
    """The alternating selection-combining sum needs more precision than allowed."""


def _gamma_product(delta: float) -> float:
    # Gamma(1 + delta) * Gamma(1 - delta)
    return math.exp(log_gamma(1.0 + delta) + log_gamma(1.0 - delta))


@dataclass(frozen=True)
class ModelParams:
    """Physical network parameters.

    Attributes
    ----------
    lam : float
        Interferer intensity (points per unit area).
    r : float
        Distance from the desired transmitter to the receiver.
    alpha : float
        Path loss exponent; must exceed 2 for the interference to be finite.
    """

    lam: float
    r: float
    alpha: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"intensity must be positive, got {self.lam!r}")
        if not self.r > 0:
            raise DomainError(f"link distance must be positive, got {self.r!r}")
        if not self.alpha > 2 or math.isinf(self.alpha):
            raise DomainError(f"path loss exponent must exceed 2, got {self.alpha!r}")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def Delta(self) -> float:
        return self.lam * math.pi * self.r ** 2 * _gamma_product(self.delta)

    def normalized(self) -> "NormalizedParams":
        return NormalizedParams(self.Delta, self.delta)


@dataclass(frozen=True)
class NormalizedParams:
    """The pair (Delta, delta) that the closed forms actually depend on."""

    Delta: float
    delta: float

    def __post_init__(self):
        if not self.Delta > 0 or math.isinf(self.Delta):
            raise DomainError(f"Delta must be positive and finite, got {self.Delta!r}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta!r}")

    @property
    def alpha(self) -> float:
        return 2.0 / self.delta

    def to_model(self, r: float = 1.0) -> ModelParams:
        """Canonical physical parameters with the given link distance."""
        lam = self.Delta / (math.pi * r ** 2 * _gamma_product(self.delta))
        return ModelParams(lam=lam, r=r, alpha=self.alpha)


Params = Union[ModelParams, NormalizedParams]


def _norm(p: Params) -> NormalizedParams:
    if isinstance(p, NormalizedParams):
        return p
    if isinstance(p, ModelParams):
        return p.normalized()
    raise TypeError(f"expected NormalizedParams or ModelParams, got {type(p).__name__}")


def _theta(theta) -> float:
    theta = float(theta)
    if not theta >= 0.0 or math.isinf(theta):
        raise DomainError(f"threshold must be finite and nonnegative, got {theta!r}")
    return theta


def _order(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"antenna count must be a positive integer, got {n!r}")
    return int(n)


def contention(p: Params, theta: float) -> float:
    """The recurring exponent Delta * theta**delta."""
    p = _norm(p)
    return p.Delta * _theta(theta) ** p.delta


def single_success_prob(p: Params, theta: float) -> float:
    """P(SIR > theta) at a single antenna: exp(-Delta theta^delta)."""
    return math.exp(-contention(p, theta))


def joint_success_prob(p: Params, n: int, theta: float) -> float:
    """Probability that the SIR exceeds ``theta`` at all ``n`` antennas."""
    p = _norm(p)
    n = _order(n)
    return math.exp(-contention(p, theta) * diversity_poly(n, p.delta))


def independent_joint_prob(p: Params, n: int, theta: float) -> float:
    """Joint success if the interference were independent across antennas."""
    n = _order(n)
    return math.exp(-contention(p, theta) * n)


def joint_prob_bounds(p: Params, n: int, theta: float) -> tuple[float, float]:
    """Lower and upper bounds on the joint success probability.

    Returns ``(exp(-a n^d / Gamma(1+d)), exp(-a n^d))`` with ``a = Delta
    theta^d``.  Both are strict for ``n >= 2``.
    """
    p = _norm(p)
    n = _order(n)
    a = contention(p, theta)
    nd = float(n) ** p.delta
    lower = math.exp(-a * nd * math.exp(-log_gamma(1.0 + p.delta)))
    upper = math.exp(-a * nd)
    return lower, upper


def diversity_loss(n: int, delta: float) -> float:
    """log of independent over log of correlated joint success, n / D_n(delta)."""
    n = _order(n)
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return n * math.exp(-log_diversity_poly(n, delta))


def conditional_success_prob(p: Params, k: int, theta: float) -> float:
    """P(antenna k+1 succeeds | antennas 1..k all succeed)."""
    p = _norm(p)
    k = _order(k)
    a = contention(p, theta)
    return math.exp(-a * diversity_poly(k, p.delta) * p.delta / k)


def indicator_correlation(p: Params, theta: float) -> float:
    """Pearson correlation of the success indicators at two distinct antennas.

    At ``theta == 0`` the expression is 0/0; the limit ``1 - delta`` is
    returned there.
    """
    p = _norm(p)
    a = contention(p, theta)
    d = p.delta
    if a == 0.0:
        return 1.0 - d
    return math.exp(-a * d) * math.expm1(-a * (1.0 - d)) / math.expm1(-a)


def _check_selection_order(n: int) -> int:
    n = _order(n)
    if n > MAX_SELECTION_ORDER:
        raise PrecisionExhaustedError(
            f"selection combining is evaluated exactly only for n <= "
            f"{MAX_SELECTION_ORDER}; use the Monte Carlo estimator for n = {n}"
        )
    return n


def _joint_probs_mp(p: NormalizedParams, theta: float, n_max: int) -> list:
    """P_1..P_{n_max} as mpf at the current working precision."""
    a = mpmath.mpf(p.Delta) * mpmath.power(mpmath.mpf(theta), mpmath.mpf(p.delta))
    d = mpmath.mpf(p.delta)
    out = []
    dn = mpmath.mpf(1)
    for k in range(1, n_max + 1):
        if k > 1:
            dn *= 1 + d / (k - 1)
        out.append(mpmath.exp(-a * dn))
    return out


def _alternating_sum(probs, n: int):
    total = mpmath.mpf(0)
    c = 1  # C(n, k), exact
    for k in range(1, n + 1):
        c = c * (n - k + 1) // k
        term = c * probs[k - 1]
        total = total + term if k % 2 else total - term
    return total


def selection_combining_prob(p: Params, n: int, theta: float) -> float:
    """Probability that at least one of ``n`` antennas has SIR above ``theta``.

    The inclusion-exclusion sum has binomial weights up to ~2^n with
    alternating signs, so it is evaluated with n + 64 bits of mantissa and
    exact integer binomials.

    Raises
    ------
    PrecisionExhaustedError
        For ``n`` above :data:`MAX_SELECTION_ORDER`.
    """
    p = _norm(p)
    n = _check_selection_order(n)
    theta = _theta(theta)
    if theta == 0.0:
        return 1.0
    with mpmath.workprec(n + _GUARD_BITS):
        probs = _joint_probs_mp(p, theta, n)
        return float(_alternating_sum(probs, n))


def selection_combining_curve(p: Params, n_max: int, theta: float) -> list[float]:
    """``[p_1, ..., p_{n_max}]`` sharing one set of extended-precision terms."""
    p = _norm(p)
    n_max = _check_selection_order(n_max)
    theta = _theta(theta)
    if theta == 0.0:
        return [1.0] * n_max
    with mpmath.workprec(n_max + _GUARD_BITS):
        probs = _joint_probs_mp(p, theta, n_max)
        return [float(_alternating_sum(probs, n)) for n in range(1, n_max + 1)]


def selection_outage_curve(p: Params, n_max: int, theta: float) -> list[float]:
    """``[1 - p_1, ..., 1 - p_{n_max}]`` with the subtraction done in extended precision.

    Keeps full relative accuracy where the outage is tiny, which
    ``1 - selection_combining_prob(...)`` in double precision does not.
    """
    p = _norm(p)
    n_max = _check_selection_order(n_max)
    theta = _theta(theta)
    if theta == 0.0:
        return [0.0] * n_max
    with mpmath.workprec(n_max + _GUARD_BITS):
        probs = _joint_probs_mp(p, theta, n_max)
        return [float(1 - _alternating_sum(probs, n)) for n in range(1, n_max + 1)]


def independent_selection_outage(p: Params, n: int, theta: float) -> float:
    """(1 - e^{-a})^n, the outage of n antennas with independent interference."""
    n = _order(n)
    a = contention(p, theta)
    if a == 0.0:
        return 0.0
    return math.exp(n * math.log1p(-math.exp(-a)))


def independent_selection_prob(p: Params, n: int, theta: float) -> float:
    """Selection-combining success if the interference were independent."""
    n = _order(n)
    a = contention(p, theta)
    if a == 0.0:
        return 1.0
    # 1 - (1 - e^{-a})^n
    return -math.expm1(n * math.log1p(-math.exp(-a)))


def _two_antenna_exponent(p: NormalizedParams, theta1: float, theta2: float) -> float:
    # Delta * (t1^{1+d} - t2^{1+d}) / (t1 - t2), symmetric, with the diagonal limit.
    d = p.delta
    hi, lo = max(theta1, theta2), min(theta1, theta2)
    if hi == 0.0:
        return 0.0
    if lo == 0.0:
        return p.Delta * hi ** d
    if hi - lo <= _DIAGONAL_RTOL * max(hi, 1.0):
        mid = math.sqrt(hi * lo)
        return p.Delta * (1.0 + d) * mid ** d
    # hi^d * (1 - t^{-1-d}) / (1 - t^{-1}) with t = hi/lo, bounded for any ratio
    u = math.log(hi / lo)
    return p.Delta * hi ** d * math.expm1(-(1.0 + d) * u) / math.expm1(-u)


def joint_two_antenna_success(p: Params, theta1: float, theta2: float) -> float:
    """P(SIR_1 > theta1, SIR_2 > theta2) for a two-antenna receiver."""
    p = _norm(p)
    return math.exp(-_two_antenna_exponent(p, _theta(theta1), _theta(theta2)))


def joint_two_antenna_cdf(p: Params, theta1: float, theta2: float) -> float:
    """Joint SIR distribution function P(SIR_1 < theta1, SIR_2 < theta2)."""
    p = _norm(p)
    theta1, theta2 = _theta(theta1), _theta(theta2)
    a1 = p.Delta * theta1 ** p.delta
    a2 = p.Delta * theta2 ** p.delta
    aj = _two_antenna_exponent(p, theta1, theta2)
    # 1 - e^{-a1} - e^{-a2} + e^{-aj}, arranged to avoid cancellation
    val = -math.expm1(-a1) + math.exp(-a2) * math.expm1(a2 - aj)
    return min(1.0, max(0.0, val))


def independent_two_antenna_success(p: Params, theta1: float, theta2: float) -> float:
    p = _norm(p)
    theta1, theta2 = _theta(theta1), _theta(theta2)
    return math.exp(-p.Delta * (theta1 ** p.delta + theta2 ** p.delta))
