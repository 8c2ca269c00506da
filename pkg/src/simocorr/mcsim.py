"""Monte Carlo simulation of SIR at a multi-antenna receiver in a Poisson field.

Interferers are drawn as a homogeneous PPP on a disk of radius ``R`` around
the receiver; every interferer-antenna link and the desired link to each
antenna get iid unit-mean exponential power fading.

Two estimator families are offered for every probability:

``naive``
    Draw the fading too and average success indicators.
``conditioned``
    Average the success probability given the point pattern.  Given the
    interferer distances, the per-antenna success events are independent with
    probability ``q = prod_x 1 / (1 + theta_r |x|^-alpha)``, so e.g. the joint
    success of ``n`` antennas is ``E[q^n]``.  Fading is integrated out
    exactly, which removes its contribution to the variance.

Outside the disk the interference is replaced by its mean (``far_field="mean"``,
the default) or ignored (``far_field="drop"``).  The radius is chosen so that
the resulting bias stays below ``truncation_bias_budget``.

Reproducibility: realizations are grouped in fixed blocks of
:data:`BLOCK_SIZE`; block ``b`` draws from a Philox stream keyed by
``(seed, b)``.  Results do not depend on how many worker threads are used.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import integrate

from .analytic import ModelParams, NormalizedParams
from .specfun import DomainError

__all__ = [
    "BLOCK_SIZE",
    "BOOTSTRAP_RESAMPLES",
    "MAX_MEAN_POINTS",
    "Estimate",
    "SimConfig",
    "Realization",
    "InsufficientAntennasError",
    "DegenerateVarianceError",
    "required_disk_radius",
    "compensated_disk_radius",
    "far_field_interference_mean",
    "far_field_log_mean",
    "sample_realization",
    "iter_realizations",
    "sir_at_antennas",
    "conditional_success",
    "sample_conditional",
    "sample_success",
    "estimate_joint_success",
    "estimate_selection_combining",
    "estimate_indicator_correlation",
    "estimate_two_antenna_joint",
    "estimate_first_success_tail",
    "dump_realizations",
]

log = logging.getLogger(__name__)

BLOCK_SIZE = 512
BOOTSTRAP_RESAMPLES = 200
# expected interferers per realization above which sampling is refused
MAX_MEAN_POINTS = 20_000.0
_BOOTSTRAP_KEY = 2 ** 64 - 1
_MIN_RADIUS_FACTOR = 10.0
_METHODS = ("conditioned", "naive")


class InsufficientAntennasError(ValueError):
    """The naive estimator was asked for more antennas than are simulated."""


class DegenerateVarianceError(ArithmeticError):
    """A correlation estimate has no variance to normalize by."""


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    count: int

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            raise ValueError("cannot estimate from an empty sample")
        se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(np.mean(values)), se, n)

    def z_score(self, reference: float) -> float:
        """(mean - reference) / std_error; 0 for an exact match with no spread."""
        diff = self.mean - reference
        if self.std_error == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def required_disk_radius(model: ModelParams, bias_budget: float, theta_r: float) -> float:
    """Disk radius for plain truncation.

    The interference ignored outside radius ``R`` has mean
    ``2 pi lam R^(2-alpha) / (alpha - 2)``; multiplied by ``theta_r`` this is a
    first-order bound on the shift of a single-antenna success probability.
    The radius returned keeps that product within ``bias_budget`` and is never
    below ``10 r``.
    """
    if not bias_budget > 0:
        raise DomainError(f"bias budget must be positive, got {bias_budget!r}")
    floor = _MIN_RADIUS_FACTOR * model.r
    if math.isinf(bias_budget) or theta_r <= 0:
        return floor
    a = model.alpha
    radius = (2.0 * math.pi * model.lam * theta_r / ((a - 2.0) * bias_budget)) ** (1.0 / (a - 2.0))
    return max(floor, radius)


def compensated_disk_radius(model: ModelParams, bias_budget: float, theta_r: float,
                            n: int = 1) -> float:
    """Disk radius when the far field is replaced by its mean.

    What is left is the fluctuation of the far-field interference, whose
    variance is at most ``2 lam theta_r^2 pi R^(2-2 alpha) / (alpha - 1)``
    (the factor 2 is the second moment of the fading).  A smooth functional of
    ``n`` antennas moves by at most ``n^2/2`` times that.  The radius keeps the
    product within ``log1p(bias_budget)`` and is never below ``10 r``.
    """
    if not bias_budget > 0:
        raise DomainError(f"bias budget must be positive, got {bias_budget!r}")
    floor = _MIN_RADIUS_FACTOR * model.r
    if math.isinf(bias_budget) or theta_r <= 0:
        return floor
    a = model.alpha
    num = n * n * theta_r * theta_r * model.lam * math.pi
    radius = (num / ((a - 1.0) * math.log1p(bias_budget))) ** (1.0 / (2.0 * a - 2.0))
    return max(floor, radius)


def far_field_interference_mean(model: ModelParams, radius: float) -> float:
    """Mean interference from all interferers beyond ``radius``."""
    a = model.alpha
    return 2.0 * math.pi * model.lam * radius ** (2.0 - a) / (a - 2.0)


def far_field_log_mean(model: ModelParams, radius: float, theta_r: float) -> float:
    """``lam * integral_{|x|>R} log(1 + theta_r |x|^-alpha) dx``.

    ``exp`` of minus this is the mean-field factor that multiplies the
    per-antenna conditional success probability.
    """
    if theta_r <= 0:
        return 0.0
    a = model.alpha
    z = theta_r * radius ** (-a)
    scale = 2.0 * math.pi * model.lam * radius * radius
    if z <= 0.5:
        total = 0.0
        zj = z
        j = 1
        while True:
            term = zj / (j * (j * a - 2.0))
            total += term if j % 2 else -term
            if term <= 1e-17 * abs(total) or j > 200:
                break
            j += 1
            zj *= z
        return scale * total
    val, _ = integrate.quad(lambda rho: math.log1p(theta_r * rho ** (-a)) * rho,
                            radius, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * math.pi * model.lam * val


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a simulation run.

    ``disk_radius=None`` derives the radius from the bias budget, the largest
    threshold and ``n_antennas``.  ``far_field`` is ``"mean"`` or ``"drop"``.
    """

    model: ModelParams
    n_antennas: int = 1
    thresholds: tuple = (1.0,)
    num_realizations: int = 100_000
    seed: int = 42
    truncation_bias_budget: float = 1e-4
    disk_radius: float | None = None
    far_field: str = "mean"

    def __post_init__(self):
        if not isinstance(self.model, ModelParams):
            raise TypeError("model must be ModelParams")
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise DomainError(f"n_antennas must be a positive integer, got {self.n_antennas!r}")
        ths = tuple(float(t) for t in self.thresholds)
        if not ths or any(not (t > 0) or math.isinf(t) for t in ths):
            raise DomainError(f"thresholds must be a nonempty list of positive reals, got {ths!r}")
        object.__setattr__(self, "thresholds", ths)
        if int(self.num_realizations) != self.num_realizations or self.num_realizations < 1:
            raise DomainError(f"num_realizations must be >= 1, got {self.num_realizations!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not self.truncation_bias_budget > 0:
            raise DomainError("truncation_bias_budget must be positive")
        if self.far_field not in ("mean", "drop"):
            raise DomainError(f"far_field must be 'mean' or 'drop', got {self.far_field!r}")
        if self.disk_radius is not None and not self.disk_radius > self.model.r:
            raise DomainError("disk_radius must exceed the link distance")

    @classmethod
    def from_normalized(cls, params: NormalizedParams, **kwargs) -> "SimConfig":
        """Config for the canonical model with unit link distance."""
        return cls(model=params.to_model(), **kwargs)

    def theta_r(self, theta: float) -> float:
        return float(theta) * self.model.r ** self.model.alpha

    @property
    def radius(self) -> float:
        if self.disk_radius is not None:
            return float(self.disk_radius)
        theta_r = self.theta_r(max(self.thresholds))
        if self.far_field == "drop":
            # the joint exponent of n antennas is n times the per-antenna shift
            return required_disk_radius(self.model, self.truncation_bias_budget / self.n_antennas,
                                        theta_r)
        return compensated_disk_radius(self.model, self.truncation_bias_budget, theta_r,
                                       self.n_antennas)

    @property
    def mean_points(self) -> float:
        return self.model.lam * math.pi * self.radius ** 2

    def far_interference(self) -> float:
        if self.far_field == "drop":
            return 0.0
        return far_field_interference_mean(self.model, self.radius)

    def far_log(self, theta: float) -> float:
        if self.far_field == "drop":
            return 0.0
        return far_field_log_mean(self.model, self.radius, self.theta_r(theta))

    @property
    def num_blocks(self) -> int:
        return -(-self.num_realizations // BLOCK_SIZE)


@dataclass
class Realization:
    """One interferer pattern with its fading draws.

    ``points`` is ``(k, 2)``, ``fading`` is ``(k, n_antennas)`` (interferer to
    antenna), ``desired_fading`` is ``(n_antennas,)``.
    """

    points: np.ndarray
    fading: np.ndarray
    desired_fading: np.ndarray
    disk_radius: float
    far_field: str = "drop"

    @property
    def distances(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    @property
    def n_antennas(self) -> int:
        return self.desired_fading.shape[0]


@dataclass
class _Block:
    counts: np.ndarray
    dist: np.ndarray
    owner: np.ndarray
    desired: np.ndarray | None = None
    fading: np.ndarray | None = None
    angles: np.ndarray | None = None


def _block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _draw(cfg: SimConfig, rng: np.random.Generator, size: int, *, fading: bool = False,
          angles: bool = False) -> _Block:
    # Draw order is fixed: counts, radii, desired fading, interferer fading, angles.
    # Consumers that stop early still see the same point pattern.
    radius = cfg.radius
    if cfg.mean_points > MAX_MEAN_POINTS:
        raise DomainError(
            f"disk radius {radius:.6g} means {cfg.mean_points:.3g} interferers per realization "
            f"(limit {MAX_MEAN_POINTS:g}); use far_field='mean', a larger bias budget or an "
            "explicit disk_radius")
    counts = rng.poisson(cfg.mean_points, size)
    total = int(counts.sum())
    dist = radius * np.sqrt(rng.random(total))
    owner = np.repeat(np.arange(size), counts)
    blk = _Block(counts, dist, owner)
    if fading or angles:
        blk.desired = rng.standard_exponential((size, cfg.n_antennas), method="inv")
        blk.fading = rng.standard_exponential((total, cfg.n_antennas), method="inv")
    if angles:
        blk.angles = 2.0 * np.pi * rng.random(total)
    return blk


def _block_draw(cfg: SimConfig, index: int, **kw) -> _Block:
    size = min(BLOCK_SIZE, cfg.num_realizations - index * BLOCK_SIZE)
    return _draw(cfg, _block_rng(cfg.seed, index), size, **kw)


def _path_gain(dist: np.ndarray, alpha: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return dist ** (-alpha)


def _map_blocks(fn, cfg: SimConfig, workers: int) -> list:
    blocks = range(cfg.num_blocks)
    if workers <= 1 or cfg.num_blocks == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def _check_method(method: str) -> str:
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")
    return method


def _log_conditional(cfg: SimConfig, thetas: Sequence[float], workers: int) -> np.ndarray:
    """Per-realization ``-log q`` for each threshold, shape ``(N, len(thetas))``."""
    thetas = [float(t) for t in thetas]
    theta_rs = [cfg.theta_r(t) for t in thetas]
    far = [cfg.far_log(t) if t > 0 else 0.0 for t in thetas]
    alpha = cfg.model.alpha

    def run(b):
        blk = _block_draw(cfg, b)
        size = blk.counts.size
        g = _path_gain(blk.dist, alpha)
        out = np.empty((size, len(thetas)))
        for j, tr in enumerate(theta_rs):
            if tr == 0.0:
                out[:, j] = 0.0
                continue
            out[:, j] = np.bincount(blk.owner, weights=np.log1p(tr * g), minlength=size) + far[j]
        return out

    return np.concatenate(_map_blocks(run, cfg, workers), axis=0)


def sample_conditional(cfg: SimConfig, thetas: Sequence[float] | None = None,
                       workers: int = 1) -> np.ndarray:
    """Conditional per-antenna success probabilities ``q``, shape ``(N, len(thetas))``."""
    thetas = cfg.thresholds if thetas is None else thetas
    return np.exp(-_log_conditional(cfg, thetas, workers))


def _success_block(cfg: SimConfig, blk: _Block, theta_rs, far_i: float) -> np.ndarray:
    size = blk.counts.size
    g = _path_gain(blk.dist, cfg.model.alpha)
    interference = np.empty((size, cfg.n_antennas))
    for k in range(cfg.n_antennas):
        interference[:, k] = np.bincount(blk.owner, weights=blk.fading[:, k] * g, minlength=size)
    interference += far_i
    out = np.empty((size, len(theta_rs), cfg.n_antennas), dtype=bool)
    for j, tr in enumerate(theta_rs):
        out[:, j, :] = (blk.desired > tr * interference) | (interference == 0.0)
    return out


def sample_success(cfg: SimConfig, thetas: Sequence[float] | None = None,
                   workers: int = 1) -> np.ndarray:
    """Per-antenna success indicators, shape ``(N, len(thetas), n_antennas)``."""
    thetas = cfg.thresholds if thetas is None else thetas
    theta_rs = [cfg.theta_r(t) for t in thetas]
    far_i = cfg.far_interference()

    def run(b):
        return _success_block(cfg, _block_draw(cfg, b, fading=True), theta_rs, far_i)

    return np.concatenate(_map_blocks(run, cfg, workers), axis=0)


def sample_realization(cfg: SimConfig, rng: np.random.Generator) -> Realization:
    """Draw one realization from ``rng``."""
    blk = _draw(cfg, rng, 1, fading=True, angles=True)
    return _realization(cfg, blk, 0, 0, blk.dist.size)


def _realization(cfg: SimConfig, blk: _Block, i: int, lo: int, hi: int) -> Realization:
    d = blk.dist[lo:hi]
    ang = blk.angles[lo:hi]
    pts = np.column_stack((d * np.cos(ang), d * np.sin(ang)))
    return Realization(points=pts, fading=blk.fading[lo:hi], desired_fading=blk.desired[i],
                       disk_radius=cfg.radius, far_field=cfg.far_field)


def iter_realizations(cfg: SimConfig) -> Iterator[Realization]:
    """The realizations behind the estimators, in order, with the same draws."""
    for b in range(cfg.num_blocks):
        blk = _block_draw(cfg, b, fading=True, angles=True)
        ends = np.cumsum(blk.counts)
        starts = ends - blk.counts
        for i in range(blk.counts.size):
            yield _realization(cfg, blk, i, starts[i], ends[i])


def sir_at_antennas(real: Realization, model: ModelParams) -> np.ndarray:
    """SIR at each antenna; ``inf`` where there is no interference."""
    g = _path_gain(real.distances, model.alpha)
    interference = real.fading.T @ g if g.size else np.zeros(real.n_antennas)
    if real.far_field == "mean":
        interference = interference + far_field_interference_mean(model, real.disk_radius)
    signal = real.desired_fading * model.r ** (-model.alpha)
    with np.errstate(divide="ignore"):
        return np.where(interference > 0, signal / np.where(interference > 0, interference, 1.0),
                        np.inf)


def conditional_success(real: Realization, model: ModelParams, theta: float) -> float:
    """Per-antenna success probability given the point pattern.

    ``q = prod_x 1/(1 + theta_r |x|^-alpha)``, computed as the exponential of a
    sum of logs.  The fading draws stored in ``real`` play no part.
    """
    theta_r = float(theta) * model.r ** model.alpha
    if theta_r == 0.0:
        return 1.0
    s = math.fsum(np.log1p(theta_r * _path_gain(real.distances, model.alpha)))
    if real.far_field == "mean":
        s += far_field_log_mean(model, real.disk_radius, theta_r)
    return math.exp(-s)


def _warn_order(cfg: SimConfig, n: int):
    if n > cfg.n_antennas and cfg.disk_radius is None:
        log.warning("n=%d exceeds n_antennas=%d; disk radius was sized for fewer antennas",
                    n, cfg.n_antennas)


def _one_minus_q(s: np.ndarray) -> np.ndarray:
    return -np.expm1(-s)


def estimate_joint_success(cfg: SimConfig, n: int, theta: float, method: str = "conditioned",
                           workers: int = 1) -> Estimate:
    """Estimate the probability that all ``n`` antennas see SIR above ``theta``."""
    _check_method(method)
    if method == "naive":
        if n > cfg.n_antennas:
            raise InsufficientAntennasError(
                f"naive estimator needs n <= n_antennas ({cfg.n_antennas}), got {n}")
        ok = sample_success(cfg, (theta,), workers)[:, 0, :n]
        return Estimate.from_samples(ok.all(axis=1))
    _warn_order(cfg, n)
    s = _log_conditional(cfg, (theta,), workers)[:, 0]
    return Estimate.from_samples(np.exp(-n * s))


def estimate_selection_combining(cfg: SimConfig, n: int, theta: float,
                                 method: str = "conditioned", workers: int = 1) -> Estimate:
    """Estimate the probability that at least one of ``n`` antennas succeeds."""
    _check_method(method)
    if method == "naive":
        if n > cfg.n_antennas:
            raise InsufficientAntennasError(
                f"naive estimator needs n <= n_antennas ({cfg.n_antennas}), got {n}")
        ok = sample_success(cfg, (theta,), workers)[:, 0, :n]
        return Estimate.from_samples(ok.any(axis=1))
    _warn_order(cfg, n)
    s = _log_conditional(cfg, (theta,), workers)[:, 0]
    return Estimate.from_samples(1.0 - _one_minus_q(s) ** n)


def _zeta_conditioned(q: np.ndarray) -> float:
    m1 = q.mean()
    m2 = np.mean(q * q)
    denom = m1 * (1.0 - m1)
    if not denom > 0.0:
        raise DegenerateVarianceError(f"mean conditional success is {m1!r}; correlation undefined")
    return float((m2 - m1 * m1) / denom)


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a.astype(float)
    b = b.astype(float)
    va = a.var()
    vb = b.var()
    if not (va > 0.0 and vb > 0.0):
        raise DegenerateVarianceError("an indicator has zero sample variance")
    return float(np.mean((a - a.mean()) * (b - b.mean())) / math.sqrt(va * vb))


def _bootstrap(stat, columns: Sequence[np.ndarray], seed: int, resamples: int) -> float:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, _BOOTSTRAP_KEY],
                                                            dtype=np.uint64)))
    n = columns[0].size
    reps = np.empty(resamples)
    for i in range(resamples):
        idx = rng.integers(0, n, n)
        try:
            reps[i] = stat(*(c[idx] for c in columns))
        except DegenerateVarianceError:
            reps[i] = np.nan
    reps = reps[np.isfinite(reps)]
    return float(np.std(reps, ddof=1)) if reps.size > 1 else math.inf


def estimate_indicator_correlation(cfg: SimConfig, theta: float, method: str = "conditioned",
                                   workers: int = 1,
                                   resamples: int = BOOTSTRAP_RESAMPLES) -> Estimate:
    """Estimate Pearson's correlation between two antennas' success indicators.

    The conditioned estimator uses ``(E[q^2] - E[q]^2) / (E[q] (1 - E[q]))``;
    the naive one correlates sampled indicator pairs.  The standard error is a
    nonparametric bootstrap over realizations.

    Raises
    ------
    DegenerateVarianceError
        When the sample has no outage variance (e.g. an almost empty network).
    """
    _check_method(method)
    if method == "naive":
        if cfg.n_antennas < 2:
            raise InsufficientAntennasError("naive correlation needs n_antennas >= 2")
        ok = sample_success(cfg, (theta,), workers)[:, 0, :2]
        a, b = ok[:, 0], ok[:, 1]
        value = _pearson(a, b)
        se = _bootstrap(_pearson, (a, b), cfg.seed, resamples)
        return Estimate(value, se, a.size)
    q = sample_conditional(cfg, (theta,), workers)[:, 0]
    value = _zeta_conditioned(q)
    se = _bootstrap(_zeta_conditioned, (q,), cfg.seed, resamples)
    return Estimate(value, se, q.size)


def estimate_two_antenna_joint(cfg: SimConfig, theta1: float, theta2: float,
                               method: str = "conditioned", workers: int = 1) -> Estimate:
    """Estimate P(SIR_1 > theta1, SIR_2 > theta2)."""
    _check_method(method)
    if method == "naive":
        if cfg.n_antennas < 2:
            raise InsufficientAntennasError("naive two-antenna estimate needs n_antennas >= 2")
        ok = sample_success(cfg, (theta1, theta2), workers)
        return Estimate.from_samples(ok[:, 0, 0] & ok[:, 1, 1])
    s = _log_conditional(cfg, (theta1, theta2), workers)
    return Estimate.from_samples(np.exp(-s[:, 0]) * np.exp(-s[:, 1]))


def estimate_first_success_tail(cfg: SimConfig, theta: float, k_max: int,
                                workers: int = 1) -> list[Estimate]:
    """Estimates of P(N > k), k = 0..k_max, with N the first succeeding antenna.

    Given the point pattern the antennas succeed independently, so
    ``P(N > k) = E[(1 - q)^k]``.
    """
    if int(k_max) != k_max or k_max < 1:
        raise DomainError(f"k_max must be a positive integer, got {k_max!r}")
    miss = _one_minus_q(_log_conditional(cfg, (theta,), workers)[:, 0])
    out = []
    power = np.ones_like(miss)
    for _ in range(int(k_max) + 1):
        out.append(Estimate.from_samples(power))
        power = power * miss
    return out


def dump_realizations(cfg: SimConfig, fh, limit: int | None = None) -> int:
    """Write one CSV row per realization: point count, q per threshold, success bits.

    Returns the number of rows written.
    """
    writer = csv.writer(fh, lineterminator="\n")
    header = ["index", "num_points"]
    header += [f"q_theta{j}" for j in range(len(cfg.thresholds))]
    header += [f"success_theta{j}_ant{k}" for j in range(len(cfg.thresholds))
               for k in range(cfg.n_antennas)]
    writer.writerow(header)
    theta_rs = [cfg.theta_r(t) for t in cfg.thresholds]
    far_log = [cfg.far_log(t) for t in cfg.thresholds]
    far_i = cfg.far_interference()
    total = cfg.num_realizations if limit is None else min(limit, cfg.num_realizations)
    written = 0
    for b in range(cfg.num_blocks):
        if written >= total:
            break
        blk = _block_draw(cfg, b, fading=True)
        size = blk.counts.size
        g = _path_gain(blk.dist, cfg.model.alpha)
        q = np.column_stack([
            np.exp(-(np.bincount(blk.owner, weights=np.log1p(tr * g), minlength=size) + fl))
            for tr, fl in zip(theta_rs, far_log)
        ])
        ok = _success_block(cfg, blk, theta_rs, far_i).reshape(size, -1)
        for i in range(min(size, total - written)):
            row = [b * BLOCK_SIZE + i, int(blk.counts[i])]
            row += [repr(float(v)) for v in q[i]]
            row += [int(v) for v in ok[i]]
            writer.writerow(row)
            written += 1
    return written
