"""Acceptance gate: one test per numbered criterion.

Each test delegates to the corresponding criterion function so that the
command-line `coverlab verify all` and this suite are the same contract.
Seeds match `verify all` defaults; the reduced (non --full) variants run
here.
"""

from coverlab import acceptance

SEED = 20260823


def _run(num):
    fn = {n: f for n, _, f in acceptance.CRITERIA}[num]
    ok, detail = fn(SEED + num, full=False)
    return ok, detail


def test_criterion_01_hitting_law_accuracy():
    ok, detail = _run(1)
    assert ok, detail


def test_criterion_02_monte_carlo_vs_exact():
    ok, detail = _run(2)
    assert ok, detail


def test_criterion_03_exit_time_sandwich():
    ok, detail = _run(3)
    assert ok, detail


def test_criterion_04_excursion_count_law():
    ok, detail = _run(4)
    assert ok, detail


def test_criterion_05_iid_covering_threshold():
    ok, detail = _run(5)
    assert ok, detail


def test_criterion_06_coupling_arithmetic_and_tails():
    ok, detail = _run(6)
    assert ok, detail


def test_criterion_07_brownian_annulus_law():
    ok, detail = _run(7)
    assert ok, detail


def test_criterion_08_brownian_exit_time():
    ok, detail = _run(8)
    assert ok, detail


def test_criterion_09_torus_cover_scale():
    ok, detail = _run(9)
    assert ok, detail


def test_criterion_10_sausage_excursions():
    ok, detail = _run(10)
    assert ok, detail


def test_criterion_11_series_threshold():
    ok, detail = _run(11)
    assert ok, detail


def test_criterion_12_determinism():
    ok, detail = _run(12)
    assert ok, detail
