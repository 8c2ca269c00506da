import csv
import io
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from simocorr import analytic as an
from simocorr.analytic import ModelParams, NormalizedParams
from simocorr.mcsim import (
    BLOCK_SIZE,
    DegenerateVarianceError,
    Estimate,
    InsufficientAntennasError,
    MAX_MEAN_POINTS,
    Realization,
    SimConfig,
    compensated_disk_radius,
    conditional_success,
    dump_realizations,
    estimate_first_success_tail,
    estimate_indicator_correlation,
    estimate_joint_success,
    estimate_selection_combining,
    estimate_two_antenna_joint,
    far_field_interference_mean,
    far_field_log_mean,
    iter_realizations,
    required_disk_radius,
    sample_conditional,
    sample_realization,
    sample_success,
    sir_at_antennas,
)
from simocorr.specfun import DomainError

P_QUARTER = NormalizedParams(0.25, 0.5)
P_HALF = NormalizedParams(0.5, 0.5)
P_ONE = NormalizedParams(1.0, 0.5)


def cfg_for(p, **kw):
    kw.setdefault("num_realizations", 20_000)
    kw.setdefault("seed", 7)
    return SimConfig.from_normalized(p, **kw)


def combined_z(a: Estimate, b: Estimate) -> float:
    return (a.mean - b.mean) / math.hypot(a.std_error, b.std_error)


# ------------------------------------------------------------------ radius

def test_required_radius_example():
    m = ModelParams(lam=1.0, r=1.0, alpha=4.0)
    R = required_disk_radius(m, 1e-4, 1.0)
    assert R == pytest.approx(math.sqrt(math.pi * 1e4), rel=1e-14)
    assert round(R, 1) == 177.2
    # the bound is met with equality
    assert far_field_interference_mean(m, R) * 1.0 == pytest.approx(1e-4, rel=1e-12)


def test_required_radius_floor_and_scaling():
    m = ModelParams(lam=1.0, r=2.0, alpha=4.0)
    assert required_disk_radius(m, math.inf, 1.0) == 20.0
    assert required_disk_radius(m, 1e3, 1.0) == 20.0
    for alpha in (3.0, 4.0, 6.0):
        m1 = ModelParams(lam=1.0, r=1.0, alpha=alpha)
        m2 = ModelParams(lam=2.0, r=1.0, alpha=alpha)
        r1 = required_disk_radius(m1, 1e-4, 1.0)
        r2 = required_disk_radius(m2, 1e-4, 1.0)
        assert r2 / r1 == pytest.approx(2.0 ** (1.0 / (alpha - 2.0)), rel=1e-12)
    with pytest.raises(DomainError):
        required_disk_radius(m, 0.0, 1.0)


def test_compensated_radius():
    m = ModelParams(lam=1.0, r=1.0, alpha=4.0)
    assert compensated_disk_radius(m, math.inf, 1.0) == 10.0
    R1 = compensated_disk_radius(m, 1e-6, 1.0, 1)
    R4 = compensated_disk_radius(m, 1e-6, 1.0, 4)
    assert R4 > R1 >= 10.0
    # the residual variance bound times n^2/2 equals log1p(budget)
    var = 2 * m.lam * math.pi * R4 ** (2 - 2 * m.alpha) / (m.alpha - 1)
    assert 16 * var / 2 == pytest.approx(math.log1p(1e-6), rel=1e-10)


@pytest.mark.parametrize("alpha", [2.5, 4.0, 7.0])
@pytest.mark.parametrize("z", [1e-6, 0.3, 0.5, 2.0, 50.0])
def test_far_field_log_mean_oracle(alpha, z):
    m = ModelParams(lam=0.7, r=1.0, alpha=alpha)
    R = 3.0
    theta_r = z * R ** alpha
    with mpmath.workdps(30):
        ref = 2 * mpmath.pi * 0.7 * mpmath.quad(
            lambda t: mpmath.log1p(theta_r * t ** (-alpha)) * t, [R, 10 * R, mpmath.inf])
    assert far_field_log_mean(m, R, theta_r) == pytest.approx(float(ref), rel=1e-10)
    assert far_field_log_mean(m, R, 0.0) == 0.0


def test_far_field_interference_mean_oracle():
    m = ModelParams(lam=0.3, r=1.0, alpha=3.5)
    val, _ = integrate.quad(lambda t: 2 * math.pi * 0.3 * t ** (1 - 3.5), 12.0, math.inf,
                            epsabs=0.0, epsrel=1e-13)
    assert far_field_interference_mean(m, 12.0) == pytest.approx(val, rel=1e-10)


# ---------------------------------------------------------------- config

def test_config_validation():
    m = ModelParams(1.0, 1.0, 4.0)
    for kw in (dict(n_antennas=0), dict(thresholds=()), dict(thresholds=(0.0,)),
               dict(num_realizations=0), dict(seed=-1), dict(seed=2 ** 64),
               dict(truncation_bias_budget=0.0), dict(far_field="none"), dict(disk_radius=0.5)):
        with pytest.raises(DomainError):
            SimConfig(m, **kw)
    with pytest.raises(TypeError):
        SimConfig(P_QUARTER)


def test_config_radius_modes():
    m = ModelParams(1.0, 1.0, 4.0)
    drop = SimConfig(m, n_antennas=2, far_field="drop")
    assert drop.radius == pytest.approx(required_disk_radius(m, 0.5e-4, 1.0), rel=1e-15)
    assert drop.far_interference() == 0.0
    mean = SimConfig(m, n_antennas=2)
    assert mean.radius == pytest.approx(compensated_disk_radius(m, 1e-4, 1.0, 2), rel=1e-15)
    assert SimConfig(m, disk_radius=33.0).radius == 33.0
    assert SimConfig(m, num_realizations=BLOCK_SIZE + 1).num_blocks == 2


# ---------------------------------------------------------- realizations

def test_realization_statistics():
    m = ModelParams(lam=0.1, r=1.0, alpha=4.0)
    cfg = SimConfig(m, n_antennas=3, num_realizations=10_000, disk_radius=10.0, seed=3)
    counts = []
    fad = []
    for real in iter_realizations(cfg):
        counts.append(real.points.shape[0])
        assert real.fading.shape == (real.points.shape[0], 3)
        assert np.all(real.fading > 0) and np.all(real.desired_fading > 0)
        assert np.all(real.distances <= 10.0)
        fad.append(real.fading.ravel())
        fad.append(real.desired_fading)
    counts = np.array(counts)
    lam_area = cfg.mean_points
    assert abs(counts.mean() - lam_area) <= 3 * math.sqrt(lam_area / counts.size)
    assert abs(counts.var(ddof=1) / lam_area - 1) < 0.05
    fad = np.concatenate(fad)
    assert abs(fad.mean() - 1.0) <= 3 / math.sqrt(fad.size)


def test_sample_realization_uses_given_stream():
    cfg = cfg_for(P_QUARTER, n_antennas=2)
    a = sample_realization(cfg, np.random.default_rng(5))
    b = sample_realization(cfg, np.random.default_rng(5))
    assert np.array_equal(a.points, b.points) and np.array_equal(a.fading, b.fading)
    assert a.n_antennas == 2


def test_empty_network_realization():
    cfg = SimConfig(ModelParams(1e-30, 1.0, 4.0), n_antennas=2)
    real = sample_realization(cfg, np.random.default_rng(0))
    assert real.points.shape == (0, 2)
    real.far_field = "drop"
    assert np.all(np.isinf(sir_at_antennas(real, cfg.model)))
    assert conditional_success(real, cfg.model, 1.0) == 1.0


def _single(d, g, h):
    return Realization(points=np.array([[d, 0.0]]), fading=np.array([[g, 2 * g]]),
                       desired_fading=np.array([h, h]), disk_radius=100.0)


def test_sir_single_interferer():
    m = ModelParams(1.0, 1.5, 3.0)
    real = _single(4.0, 0.7, 1.3)
    sir = sir_at_antennas(real, m)
    assert sir[0] == pytest.approx(1.3 * 1.5 ** -3 / (0.7 * 4.0 ** -3), rel=1e-14)
    assert sir[1] == pytest.approx(sir[0] / 2, rel=1e-14)


def test_sir_distance_scaling():
    m = ModelParams(1.0, 1.0, 3.7)
    rng = np.random.default_rng(11)
    pts = rng.uniform(-5, 5, (6, 2))
    real = Realization(pts, rng.exponential(size=(6, 2)), rng.exponential(size=2), 100.0)
    s = 1.9
    scaled = Realization(pts * s, real.fading, real.desired_fading, 100.0)
    ratio = sir_at_antennas(scaled, m) / sir_at_antennas(real, m)
    assert ratio == pytest.approx(np.full(2, s ** 3.7), rel=1e-12)


def test_conditional_success_examples():
    m = ModelParams(1.0, 1.0, 4.0)
    assert conditional_success(_single(1.0, 5.0, 0.1), m, 1.0) == pytest.approx(0.5, rel=1e-15)
    two = Realization(np.array([[1.0, 0.0], [0.0, -1.0]]), np.ones((2, 2)), np.ones(2), 50.0)
    assert conditional_success(two, m, 1.0) == pytest.approx(0.25, rel=1e-15)
    # fading plays no part
    other = Realization(two.points, np.full((2, 2), 9.0), np.full(2, 1e-3), 50.0)
    assert conditional_success(other, m, 1.0) == conditional_success(two, m, 1.0)
    # theta_r = theta r^alpha
    m2 = ModelParams(1.0, 2.0 ** 0.25, 4.0)
    assert conditional_success(_single(1.0, 1.0, 1.0), m2, 0.5) == pytest.approx(0.5, rel=1e-14)


def test_iter_realizations_matches_vectorized_q():
    cfg = cfg_for(P_QUARTER, num_realizations=1200, n_antennas=2)
    q_vec = sample_conditional(cfg)[:, 0]
    q_iter = np.array([conditional_success(r, cfg.model, 1.0) for r in iter_realizations(cfg)])
    assert q_iter == pytest.approx(q_vec, rel=1e-12)
    ok_vec = sample_success(cfg)[:, 0, :]
    ok_iter = np.array([sir_at_antennas(r, cfg.model) > 1.0 for r in iter_realizations(cfg)])
    assert np.array_equal(ok_vec, ok_iter)


# -------------------------------------------------------------- estimators

def test_estimate_from_samples():
    e = Estimate.from_samples([0.0, 1.0, 1.0, 0.0])
    assert e.mean == 0.5 and e.count == 4
    assert e.std_error == pytest.approx(np.std([0, 1, 1, 0], ddof=1) / 2, rel=1e-15)
    assert Estimate.from_samples([0.3]).std_error == 0.0
    assert Estimate(0.5, 0.0, 3).z_score(0.5) == 0.0
    assert Estimate(0.6, 0.0, 3).z_score(0.5) == math.inf
    with pytest.raises(ValueError):
        Estimate.from_samples([])


def test_joint_success_example():
    cfg = cfg_for(P_QUARTER, n_antennas=2, num_realizations=100_000, seed=42)
    e = estimate_joint_success(cfg, 2, 1.0)
    assert abs(e.z_score(0.6872892787909722)) <= 3
    assert 0 <= e.mean <= 1


def test_empty_network_estimates_exact():
    cfg = SimConfig(ModelParams(1e-30, 1.0, 4.0), n_antennas=2, num_realizations=2000)
    for method in ("conditioned", "naive"):
        assert estimate_joint_success(cfg, 2, 1.0, method).mean == 1.0
        assert estimate_selection_combining(cfg, 2, 1.0, method).mean == 1.0
    with pytest.raises(DegenerateVarianceError):
        estimate_indicator_correlation(cfg, 1.0)
    with pytest.raises(DegenerateVarianceError):
        estimate_indicator_correlation(cfg, 1.0, method="naive")


def test_naive_vs_conditioned():
    cfg = cfg_for(P_HALF, n_antennas=3, num_realizations=40_000)
    for fn in (estimate_joint_success, estimate_selection_combining):
        for n in (1, 3):
            a = fn(cfg, n, 1.0, "naive")
            b = fn(cfg, n, 1.0, "conditioned")
            assert abs(combined_z(a, b)) <= 3
            assert b.std_error < a.std_error
    a = estimate_two_antenna_joint(cfg, 2.0, 1.0, "naive")
    b = estimate_two_antenna_joint(cfg, 2.0, 1.0)
    assert abs(combined_z(a, b)) <= 3
    a = estimate_indicator_correlation(cfg, 1.0, "naive")
    b = estimate_indicator_correlation(cfg, 1.0)
    assert abs(combined_z(a, b)) <= 3


def test_rao_blackwell_over_repeated_runs():
    naive, cond = [], []
    for seed in range(24):
        cfg = cfg_for(P_QUARTER, n_antennas=2, num_realizations=2000, seed=seed)
        naive.append(estimate_joint_success(cfg, 2, 1.0, "naive").mean)
        cond.append(estimate_joint_success(cfg, 2, 1.0, "conditioned").mean)
    assert np.var(cond, ddof=1) < np.var(naive, ddof=1)


def test_insufficient_antennas():
    cfg = cfg_for(P_QUARTER, n_antennas=2, num_realizations=100)
    with pytest.raises(InsufficientAntennasError):
        estimate_joint_success(cfg, 3, 1.0, "naive")
    with pytest.raises(InsufficientAntennasError):
        estimate_selection_combining(cfg, 3, 1.0, "naive")
    one = cfg_for(P_QUARTER, num_realizations=100)
    with pytest.raises(InsufficientAntennasError):
        estimate_indicator_correlation(one, 1.0, "naive")
    with pytest.raises(InsufficientAntennasError):
        estimate_two_antenna_joint(one, 1.0, 2.0, "naive")
    # conditioned estimators take any order
    assert 0 < estimate_joint_success(one, 5, 1.0).mean < 1
    with pytest.raises(ValueError):
        estimate_joint_success(one, 1, 1.0, method="exact")


def test_selection_n1_equals_joint_n1():
    cfg = cfg_for(P_HALF, n_antennas=2)
    for method in ("conditioned", "naive"):
        a = estimate_selection_combining(cfg, 1, 1.0, method)
        b = estimate_joint_success(cfg, 1, 1.0, method)
        assert a.mean == pytest.approx(b.mean, rel=1e-14, abs=1e-15)


def test_selection_example():
    cfg = cfg_for(P_HALF, n_antennas=2, num_realizations=100_000, seed=42)
    assert abs(estimate_selection_combining(cfg, 2, 1.0).z_score(0.7406947666842521)) <= 3


def test_correlation_example():
    cfg = cfg_for(P_ONE, n_antennas=2, num_realizations=100_000, seed=42)
    e = estimate_indicator_correlation(cfg, 1.0)
    assert e.std_error > 0
    assert abs(e.z_score(0.37754066879814544)) <= 3


def test_correlation_decreases_with_delta():
    vals = [estimate_indicator_correlation(cfg_for(NormalizedParams(1.0, d), n_antennas=2,
                                                   num_realizations=20_000), 1.0).mean
            for d in (0.2, 0.5, 0.8)]
    assert vals[0] > vals[1] > vals[2]


def test_two_antenna_pathwise_reductions():
    cfg = cfg_for(P_ONE, n_antennas=2, num_realizations=5000)
    diag = estimate_two_antenna_joint(cfg, 1.3, 1.3)
    joint = estimate_joint_success(cfg, 2, 1.3)
    assert diag.mean == pytest.approx(joint.mean, rel=1e-13)
    q = sample_conditional(cfg, (1.3, 0.0))
    assert np.all(q[:, 1] == 1.0)
    e = estimate_two_antenna_joint(cfg, 2.0, 1.0, "conditioned")
    assert abs(e.z_score(an.joint_two_antenna_success(P_ONE, 2.0, 1.0))) <= 4


def test_first_success_tail():
    cfg = cfg_for(P_HALF, n_antennas=8, num_realizations=30_000)
    tail = estimate_first_success_tail(cfg, 1.0, 8)
    assert len(tail) == 9
    assert tail[0].mean == 1.0 and tail[0].std_error == 0.0
    assert abs(tail[1].z_score(1 - an.single_success_prob(P_HALF, 1.0))) <= 3
    means = [t.mean for t in tail]
    assert all(b <= a for a, b in zip(means, means[1:]))
    assert all(m > 0 for m in means)
    sel = estimate_selection_combining(cfg, 5, 1.0)
    assert 1 - tail[5].mean == pytest.approx(sel.mean, rel=1e-12)
    with pytest.raises(DomainError):
        estimate_first_success_tail(cfg, 1.0, 0)


def test_pathwise_all_le_any():
    cfg = cfg_for(P_HALF, n_antennas=4, num_realizations=5000)
    ok = sample_success(cfg)[:, 0, :]
    assert np.all(ok.all(axis=1) <= ok.any(axis=1))
    for method in ("conditioned", "naive"):
        for n in (1, 2, 4):
            assert (estimate_joint_success(cfg, n, 1.0, method).mean
                    <= estimate_selection_combining(cfg, n, 1.0, method).mean)


# ----------------------------------------------------------- determinism

def test_worker_count_does_not_change_results():
    cfg = cfg_for(P_HALF, n_antennas=2, num_realizations=5 * BLOCK_SIZE + 17)
    for w in (2, 3, 8):
        assert np.array_equal(sample_conditional(cfg, workers=1), sample_conditional(cfg, workers=w))
        assert np.array_equal(sample_success(cfg, workers=1), sample_success(cfg, workers=w))
        assert (estimate_indicator_correlation(cfg, 1.0, workers=w)
                == estimate_indicator_correlation(cfg, 1.0, workers=1))
        assert (estimate_joint_success(cfg, 2, 1.0, "naive", workers=w)
                == estimate_joint_success(cfg, 2, 1.0, "naive", workers=1))


def test_seed_changes_and_prefix_stability():
    a = sample_conditional(cfg_for(P_HALF, num_realizations=2000, seed=1))
    b = sample_conditional(cfg_for(P_HALF, num_realizations=2000, seed=2))
    assert not np.array_equal(a, b)
    # a longer run extends a shorter one block by block
    c = sample_conditional(cfg_for(P_HALF, num_realizations=4 * BLOCK_SIZE, seed=1))
    assert np.array_equal(a[:3 * BLOCK_SIZE], c[:3 * BLOCK_SIZE])


# -------------------------------------------------------- truncation bias

@pytest.mark.parametrize("far_field,delta", [("mean", 2 / 3), ("mean", 0.5), ("drop", 0.5)])
def test_doubling_radius(far_field, delta):
    m = NormalizedParams(0.5, delta).to_model()
    base = SimConfig(m, n_antennas=2, num_realizations=20_000, seed=5, far_field=far_field,
                     truncation_bias_budget=1e-3)
    wide = SimConfig(m, n_antennas=2, num_realizations=20_000, seed=6, far_field=far_field,
                     truncation_bias_budget=1e-3, disk_radius=2 * base.radius)
    for fn in (estimate_joint_success, estimate_selection_combining):
        a = fn(base, 2, 1.0)
        b = fn(wide, 2, 1.0)
        assert abs(a.mean - b.mean) < 1e-3 + 3 * math.hypot(a.std_error, b.std_error)


def test_oversized_disk_is_refused():
    # plain truncation at alpha = 3 would need ~1e5 points per realization
    m = NormalizedParams(0.5, 2 / 3).to_model()
    cfg = SimConfig(m, n_antennas=2, num_realizations=1000, far_field="drop",
                    truncation_bias_budget=1e-3)
    assert cfg.mean_points > MAX_MEAN_POINTS
    with pytest.raises(DomainError, match="far_field"):
        estimate_joint_success(cfg, 2, 1.0)
    with pytest.raises(DomainError):
        sample_realization(cfg, np.random.default_rng(0))


def test_mean_field_removes_first_order_bias():
    # on a deliberately small disk, dropping the far field is visibly biased
    m = NormalizedParams(1.0, 0.5).to_model()
    exact = an.single_success_prob(m, 1.0)
    kw = dict(num_realizations=50_000, seed=9, disk_radius=3.0)
    drop = estimate_joint_success(SimConfig(m, far_field="drop", **kw), 1, 1.0)
    mean = estimate_joint_success(SimConfig(m, far_field="mean", **kw), 1, 1.0)
    assert drop.z_score(exact) > 6
    assert abs(mean.z_score(exact)) < abs(drop.z_score(exact)) / 3


# ------------------------------------------------------------------ dump

def test_dump_realizations():
    cfg = cfg_for(P_HALF, n_antennas=2, thresholds=(1.0, 2.0), num_realizations=BLOCK_SIZE + 10)
    buf = io.StringIO()
    assert dump_realizations(cfg, buf) == cfg.num_realizations
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["index", "num_points", "q_theta0", "q_theta1", "success_theta0_ant0",
                       "success_theta0_ant1", "success_theta1_ant0", "success_theta1_ant1"]
    body = rows[1:]
    assert [int(r[0]) for r in body] == list(range(cfg.num_realizations))
    q = sample_conditional(cfg)
    assert np.array_equal(np.array([[float(r[2]), float(r[3])] for r in body]), q)
    ok = sample_success(cfg).reshape(cfg.num_realizations, -1)
    assert np.array_equal(np.array([[int(v) for v in r[4:]] for r in body]), ok.astype(int))
    short = io.StringIO()
    assert dump_realizations(cfg, short, limit=5) == 5
    assert short.getvalue().splitlines() == buf.getvalue().splitlines()[:6]
