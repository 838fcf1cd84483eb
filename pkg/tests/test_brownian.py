"""Brownian engines: annulus laws, exit times, sausage and torus covers."""

import math

import numpy as np
import pytest
from scipy import stats

from coverlab import brownian
from coverlab.scales import phi, wp

SEED = 550123


def test_annulus_hit_prob_formula():
    assert brownian.annulus_hit_prob_formula(1.0, math.e, math.e ** 2) == \
        pytest.approx(0.5, rel=1e-12)
    assert brownian.annulus_hit_prob_formula(2, 5, 50) == \
        pytest.approx(math.log(10) / math.log(25), rel=1e-12)
    assert brownian.annulus_hit_prob_formula(1.0, 1.0 + 1e-9, 10.0) == \
        pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        brownian.annulus_hit_prob_formula(5, 2, 50)


def test_exterior_circle_hit_poisson_kernel():
    # the exact hit law on a circle of radius rho seen from z is the
    # wrapped Cauchy with parameter rho/|z|; check its mean resultant
    z, rho = (4.0, 0.0), 1.0
    us = (np.arange(20_000) + 0.5) / 20_000
    pts = np.array([brownian.exterior_circle_hit(z, rho, u) for u in us])
    assert np.allclose(np.hypot(pts[:, 0], pts[:, 1]), rho, atol=1e-9)
    angles = np.arctan2(pts[:, 1], pts[:, 0])
    assert np.cos(angles).mean() == pytest.approx(rho / 4.0, abs=1e-3)
    assert np.sin(angles).mean() == pytest.approx(0.0, abs=1e-3)


def test_sample_annulus_side_frequencies():
    n = 3000
    inner = sum(brownian.sample_annulus_side((5.0, 0.0), 2.0, 50.0, SEED,
                                             run_index=i).side == "inner"
                for i in range(n))
    p = brownian.annulus_hit_prob_formula(2, 5, 50)
    se = math.sqrt(p * (1 - p) / n)
    assert abs(inner / n - p) <= 3 * se


def test_sample_annulus_side_exit_points_on_circles():
    for i in range(50):
        s = brownian.sample_annulus_side((math.e, 0.0), 1.0, math.e ** 2,
                                         SEED + 1, run_index=i)
        rad = math.hypot(*s.exit_point)
        want = 1.0 if s.side == "inner" else math.e ** 2
        assert rad == pytest.approx(want, rel=1e-2)
        assert s.hops >= 1


def test_sample_annulus_side_tolerance_validation():
    with pytest.raises(ValueError):
        brownian.sample_annulus_side((5.0, 0.0), 2.0, 50.0, SEED, tol=1.0)


def test_exit_angle_uniform():
    # with the start position rotated uniformly the exit angle is exactly
    # uniform on the circle, whatever the annulus geometry
    rng = np.random.Generator(np.random.Philox(key=SEED + 2))
    angles = []
    for i in range(400):
        theta = rng.uniform(-math.pi, math.pi)
        pos = (5.0 * math.cos(theta), 5.0 * math.sin(theta))
        s = brownian.sample_annulus_side(pos, 2.0, 50.0, SEED + 2, run_index=i)
        angles.append(math.atan2(s.exit_point[1], s.exit_point[0]))
    ks = stats.kstest((np.asarray(angles) + math.pi) / (2 * math.pi), "uniform")
    assert ks.pvalue > 0.01


def test_brownian_exit_stats_mean():
    s = brownian.brownian_exit_stats(1.0, 800, SEED + 3, dt=5e-4)
    assert abs(s.mean - 0.5) <= max(3 * s.std_error, 0.01 * 0.5 + 3 * s.std_error)
    assert s.tail_fraction <= 1.0
    assert len(s.times) == 800


def test_brownian_exit_scaling():
    # exit time of D(0,2r) is 4x that of D(0,r) in law
    a = brownian.brownian_exit_stats(2.0, 500, SEED + 4, dt=1e-3)
    b = brownian.brownian_exit_stats(4.0, 500, SEED + 5, dt=4e-3)
    se = math.sqrt((4 * a.std_error) ** 2 + b.std_error ** 2)
    assert abs(4 * a.mean - b.mean) <= 3 * se


def test_exit_time_dt_refinement_is_coupled():
    fine, coarse = brownian.exit_time_dt_refinement(3.0, 200, SEED + 14, 4e-3)
    # shared driving path: per-sample differences are far below the
    # between-sample spread, and the mean shift is a fraction of a percent
    diff = fine - coarse
    assert np.abs(diff).mean() < 0.2 * coarse.std()
    assert abs(diff.mean()) / coarse.mean() < 0.01
    assert coarse.mean() == pytest.approx(4.5, rel=0.15)


def test_sausage_cover_run_basic():
    res = brownian.sausage_cover_run(8, 0.15, 0.01, 0.2, SEED + 6,
                                     engine="excursion")
    assert res.cover_time > 8.0          # coverage takes time growing with r
    assert res.excursion_count == res.ledger.excursion_count
    assert res.synthetic_time
    kinds = res.ledger.kinds
    assert kinds[0] == 0 and (kinds[1:] != kinds[:-1]).all()


def test_sausage_cover_run_validation():
    with pytest.raises(ValueError):
        brownian.sausage_cover_run(4, 0.15, 0.01, 0.2, SEED)
    with pytest.raises(ValueError):
        brownian.sausage_cover_run(8, 0.01, 0.01, 0.2, SEED)   # outer < 2r
    with pytest.raises(ValueError):
        brownian.sausage_cover_run(8, 0.15, 0.5, 0.2, SEED)    # dt too big
    with pytest.raises(ValueError):
        brownian.sausage_cover_run(8, 0.15, 0.01, 0.5, SEED)   # h too big


def test_sausage_replay_determinism():
    a = brownian.sausage_cover_run(8, 0.15, 0.01, 0.2, SEED + 7,
                                   engine="excursion")
    b = brownian.sausage_cover_run(8, 0.15, 0.01, 0.2, SEED + 7,
                                   engine="excursion")
    assert a.cover_time == b.cover_time
    assert a.excursion_count == b.excursion_count
    assert np.array_equal(a.ledger.times, b.ledger.times)


def test_sausage_dt_self_convergence():
    # the excursion-count law is stable under halving dt
    runs = 30
    n1 = np.array([brownian.sausage_cover_run(
        8, 0.15, 0.01, 0.2, SEED + 8, run_index=i,
        engine="excursion").excursion_count for i in range(runs)], dtype=float)
    n2 = np.array([brownian.sausage_cover_run(
        8, 0.15, 0.005, 0.2, SEED + 9, run_index=i,
        engine="excursion").excursion_count for i in range(runs)], dtype=float)
    gap = abs(n1.mean() - n2.mean())
    se = math.sqrt(n1.var(ddof=1) / runs + n2.var(ddof=1) / runs)
    assert gap <= 3 * se


def test_sausage_brownian_scaling_transfer():
    # scaling space by 2 and time by 4 leaves the excursion-count law
    # unchanged: r 8 -> 16, sausage radius 1 -> 2, h 0.1 -> 0.2, dt x4,
    # R adjusted so the outer circle scales exactly
    runs = 20
    base = np.array([brownian.sausage_cover_run(
        8, 0.15, 0.0025, 0.1, SEED + 10, run_index=i,
        engine="excursion").excursion_count for i in range(runs)], dtype=float)
    r2 = 2.0 * 0.15 * wp(8) / wp(16)
    scaled = np.array([brownian.sausage_cover_run(
        16, r2, 0.01, 0.2, SEED + 11, run_index=i, engine="excursion",
        sausage_radius=2.0).excursion_count for i in range(runs)], dtype=float)
    gap = abs(base.mean() - scaled.mean())
    se = math.sqrt(base.var(ddof=1) / runs + scaled.var(ddof=1) / runs)
    assert gap <= 3 * se


def test_torus_cover_time_basic():
    res = brownian.torus_cover_time(0.05, 1e-4, SEED + 12)
    assert res.cover_time > 0
    assert res.targets == math.ceil(4 / 0.05) ** 2
    assert 0.05 < res.lil_ratio() < 3.0
    again = brownian.torus_cover_time(0.05, 1e-4, SEED + 12)
    assert again.cover_time == res.cover_time


def test_torus_cover_time_validation():
    with pytest.raises(ValueError):
        brownian.torus_cover_time(0.2, 1e-4, SEED)
    with pytest.raises(ValueError):
        brownian.torus_cover_time(0.05, 1e-3, SEED)  # dt > eps^2/25


def test_increment_variance_self_test():
    # the driving increments have variance dt per coordinate
    from coverlab.rng import stream

    feed = brownian._NormalFeed(stream(SEED + 13), 1e-3)
    x = np.concatenate([feed.next().ravel() for _ in range(8)])
    var = x.var()
    se = math.sqrt(2.0 / len(x)) * 1e-3
    assert abs(var - 1e-3) <= 3 * se
