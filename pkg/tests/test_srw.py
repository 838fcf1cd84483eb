"""Simple-random-walk engine: hitting times, cover runs, excursion ledgers."""

import math

import numpy as np
import pytest

from coverlab import annulus, srw
from coverlab.lattice import boundary_points, disk_points
from coverlab.scales import phi

SEED = 90210


def test_run_until_hit_first_step():
    for i in range(20):
        point, zeta = srw.run_until_hit(0.5, SEED, run_index=i)
        assert zeta == 1
        assert point in {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_run_until_hit_lands_on_ring():
    ring = boundary_points(7)
    for i in range(10):
        point, zeta = srw.run_until_hit(7, SEED + 1, run_index=i)
        assert point in ring
        assert zeta >= 7


def test_exit_time_martingale():
    # |S_n|^2 - n is a martingale, so E zeta(r) = E |S_zeta|^2
    zetas, norms = srw.exit_time_samples(20, 400, SEED + 2)
    diffs = norms.astype(float) - zetas.astype(float)
    se = diffs.std(ddof=1) / math.sqrt(len(diffs))
    assert abs(diffs.mean()) <= 3 * se
    assert (norms > 400).all()          # exit point is outside D_20
    assert (norms <= 21 ** 2 + 41).all()  # and within one step of the ring


def test_simulate_cover_covers_the_disk():
    res = srw.simulate_cover(8, SEED + 3, engine="excursion")
    assert res.cover_time >= len(disk_points(8)) == 197
    assert res.excursion_count == res.ledger.excursion_count
    assert res.synthetic_time
    # completed-excursion convention: hits after the cover time belong to
    # the excursion in progress and are excluded from the count
    kinds, times = res.ledger.kinds, res.ledger.times
    outer_hits = times[kinds == 0]
    assert res.excursion_count == int((outer_hits[1:] <= res.cover_time).sum())


def test_ledger_alternation_enforced():
    res = srw.simulate_cover(10, SEED + 4, engine="excursion")
    kinds = res.ledger.kinds
    assert kinds[0] == 0
    assert (kinds[1:] != kinds[:-1]).all()
    assert (np.diff(res.ledger.times) > 0).all()
    with pytest.raises(ValueError):
        srw.ExcursionLedger(16.0, 100.0, np.array([0, 0]), np.array([1, 2]))


def test_simulate_cover_rejects_small_radius():
    with pytest.raises(ValueError):
        srw.simulate_cover(4, SEED)


def test_replay_determinism():
    a = srw.simulate_cover(9, SEED + 5, engine="excursion", checkpoints=(500, 5000))
    b = srw.simulate_cover(9, SEED + 5, engine="excursion", checkpoints=(500, 5000))
    assert a.cover_time == b.cover_time
    assert a.excursion_count == b.excursion_count
    assert a.checkpoints == b.checkpoints
    assert np.array_equal(a.ledger.times, b.ledger.times)
    c = srw.simulate_cover(9, SEED + 5, run_index=1, engine="excursion")
    assert (c.cover_time != a.cover_time
            or not np.array_equal(c.ledger.times, a.ledger.times))


def test_hitting_prob_symmetric_instance():
    est = srw.hitting_prob_estimate(8, 40, 200, 2000, SEED + 6)
    assert abs(est.estimate - 0.5) <= max(3 * est.std_error, 0.04)


def test_hitting_prob_near_degenerate():
    # start adjacent to the inner ring, far outer ring: almost sure inner hit
    est = srw.hitting_prob_estimate(9, 10, 10_000, 500, SEED + 7)
    assert est.estimate > 0.8


def test_hit_origin_before_lower_bound():
    est = srw.hit_origin_before(100, 10, 3000, SEED + 8)
    bound = (1.0 / 16.0) * (math.log(100) - math.log(10)) / math.log(100)
    assert est.estimate >= bound - 3 * est.std_error


def test_excursion_engine_reentry_law_gate():
    # replacing the far-field return legs by the worst biased re-entry law
    # must leave the excursion-count statistics unchanged at 3 sigma; the
    # default harmonic-measure law deviates from any actual return law by
    # strictly less than this worst case
    runs = 40
    worst = annulus.worst_start_law(8)
    n_default = np.array([
        srw.simulate_cover(8, SEED + 9, run_index=i, engine="excursion")
        .excursion_count for i in range(runs)], dtype=float)
    n_worst = np.array([
        srw.simulate_cover(8, SEED + 9, run_index=runs + i, engine="excursion",
                           reentry_law=worst)
        .excursion_count for i in range(runs)], dtype=float)
    gap = abs(n_default.mean() - n_worst.mean())
    se = math.sqrt(n_default.var(ddof=1) / runs + n_worst.var(ddof=1) / runs)
    assert gap <= 3 * se
    assert n_default.mean() / phi(8) > 0  # counts are nontrivial
