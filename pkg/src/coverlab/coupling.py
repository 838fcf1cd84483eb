"""Covering by i.i.d. excursion sets and the coupled construction.

An excursion set is the trace in D_r of a walk launched from a point of
the 2r ring and stopped on the wp(r) ring.  Unions of independent such
sets cover D_r after about (2/3) phi_r draws.  The coupled construction
is reproduced in diagnostic form: the first set is realized through the
m^E mechanism (first E-set containing the origin), rare xi-marked draws
take a biased start in place of the intractable conditional start law,
and the second discrepancy triggers the m^F point-visit search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .annulus import BoundaryDistribution, harmonic_measure
from .lattice import boundary_points, boundary_start, disk_threshold
from .rng import stream
from .scales import a_threshold, wp
from .srw import DEFAULT_BUDGET, BudgetExceeded, _WordFeed

__all__ = [
    "ExcursionSet", "CouplingTrace", "harmonic_start_surrogate",
    "sample_excursion_set", "run_union_process", "coupled_cover_run",
    "xi_tail_prob", "a_threshold", "default_c1",
]

# exact solver start laws are affordable up to this disk radius
_EXACT_START_MAX_R = 16.0
_START_CACHE: dict[float, BoundaryDistribution] = {}
_C1_CACHE: dict[float, float] = {}


def harmonic_start_surrogate(r: float) -> BoundaryDistribution:
    """Start law on the 2r ring for excursion sets.

    Exact harmonic measure (solver table) for small r; for larger r the
    table's outer absorber would be prohibitive, so ring points are
    weighted by their angular gaps, which matches harmonic measure to
    the lattice-effect level O(1/r).
    """
    key = float(r)
    if key in _START_CACHE:
        return _START_CACHE[key]
    if r <= _EXACT_START_MAX_R:
        # the far-field absorber sits at 48r; allow the larger table
        law = harmonic_measure(2.0 * r, [16.0 * r, 24.0 * r], cap=2_500_000)
    else:
        pts = np.array(sorted(boundary_points(2.0 * r)), dtype=np.int64)
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        order = np.argsort(ang)
        pts, ang = pts[order], ang[order]
        gaps = np.empty_like(ang)
        gaps[1:-1] = (ang[2:] - ang[:-2]) / 2.0
        gaps[0] = (ang[1] - (ang[-1] - 2 * math.pi)) / 2.0
        gaps[-1] = ((ang[0] + 2 * math.pi) - ang[-2]) / 2.0
        law = BoundaryDistribution(pts, gaps / gaps.sum())
    _START_CACHE[key] = law
    return law


@dataclass
class ExcursionSet:
    """Visited subset of D_r of one excursion from the 2r ring to wp(r)."""

    r: float
    start_point: tuple[int, int]
    kind: str
    mask: np.ndarray = field(repr=False)   # flat int8 over the D_r box
    half: int
    steps: int
    target_time: int = -1                  # first visit of the tracked point

    @property
    def covered(self) -> frozenset:
        n = 2 * self.half + 1
        idx = np.flatnonzero(self.mask == 1)
        return frozenset(zip((idx // n - self.half).tolist(),
                             (idx % n - self.half).tolist()))

    def contains(self, pt) -> bool:
        x, y = int(pt[0]), int(pt[1])
        if abs(x) > self.half or abs(y) > self.half:
            return False
        return self.mask[(x + self.half) * (2 * self.half + 1) + (y + self.half)] == 1

    @property
    def covered_count(self) -> int:
        return int((self.mask == 1).sum())


def _disk_box(r: float):
    t = disk_threshold(r)
    half = math.isqrt(t)
    n = 2 * half + 1
    xs = np.arange(-half, half + 1)
    n2 = xs[:, None] ** 2 + xs[None, :] ** 2
    inside = (n2 <= t).ravel()
    return half, n, inside, t


def _run_excursion(feed: _WordFeed, grid: np.ndarray, half: int, disk_sq: int,
                   outer_sq: float, start_pt, target=(1 << 40, 0),
                   mark_after_target: int = 0, budget: int = DEFAULT_BUDGET):
    """One excursion from start_pt to the wp ring, marking grid in place."""
    state = np.zeros(8, dtype=np.int64)
    state[K.SX], state[K.SY] = int(start_pt[0]), int(start_pt[1])
    state[K.STARGT] = -1
    while True:
        status = K.srw_excursion_step(feed.next(), state, grid, half,
                                      float(disk_sq), outer_sq,
                                      int(target[0]), int(target[1]),
                                      mark_after_target, budget)
        if status == K.STATUS_DONE:
            return int(state[K.ST]), int(state[K.STARGT])
        if status == K.STATUS_BUDGET:
            raise BudgetExceeded("excursion exceeded step budget", int(state[K.ST]))


def sample_excursion_set(r: float, start: BoundaryDistribution | None = None,
                         seed: int = 0, run_index: int = 0, kind: str = "C",
                         budget: int = DEFAULT_BUDGET) -> ExcursionSet:
    """Draw one excursion set with a start sampled from the given law."""
    if r < 8:
        raise ValueError("excursion sets require r >= 8")
    if start is None:
        start = harmonic_start_surrogate(r)
    rng = stream(seed, run_index)
    sp = tuple(int(v) for v in start.sample(rng))
    half, n, inside, t = _disk_box(r)
    grid = np.zeros(n * n, dtype=np.int8)
    outer = wp(r)
    feed = _WordFeed(rng)
    steps, targ = _run_excursion(feed, grid, half, t, outer * outer, sp,
                                 target=(0, 0), budget=budget)
    grid[~inside] = 0  # corners of the box are not part of D_r
    return ExcursionSet(r=float(r), start_point=sp, kind=kind, mask=grid,
                        half=half, steps=steps, target_time=targ)


def run_union_process(r: float, k: int, kind: str = "C", seed: int = 0,
                      run_index: int = 0, start: BoundaryDistribution | None = None,
                      budget: int = DEFAULT_BUDGET):
    """Union of k+1 i.i.d. excursion sets; returns (is_covered, uncovered)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if r < 8:
        raise ValueError("requires r >= 8")
    if start is None:
        start = harmonic_start_surrogate(r)
    rng = stream(seed, run_index)
    half, n, inside, t = _disk_box(r)
    grid = np.zeros(n * n, dtype=np.int8)
    grid[~inside] = 2
    outer_sq = wp(r) ** 2
    feed = _WordFeed(rng)
    total = 0
    for _ in range(k + 1):
        sp = tuple(int(v) for v in start.sample(rng))
        feed.reset()
        steps, _ = _run_excursion(feed, grid, half, t, outer_sq, sp,
                                  budget=budget - total)
        total += steps
    uncovered = int((grid == 0).sum())
    return uncovered == 0, uncovered


def default_c1(r: float) -> float:
    """Fitted constant of the biased-start deviation bound.

    The deviation solve needs an absorber at 2 wp(r), so the fit is done
    at min(r, 16) and the constant (deviation times (log fit_r)^2) is
    reused for larger radii.
    """
    fit_r = min(float(r), _EXACT_START_MAX_R)
    if fit_r not in _C1_CACHE:
        from .annulus import biased_start_deviation

        dev = biased_start_deviation(fit_r, cap=2_500_000)
        _C1_CACHE[fit_r] = dev * math.log(fit_r) ** 2
    return _C1_CACHE[fit_r]


def _sample_biased_start(r: float, rng, feed: _WordFeed,
                         budget: int = DEFAULT_BUDGET) -> tuple[int, int]:
    """Worst-start surrogate for the conditional start law.

    Walks from the worst point of the wp(r) ring until it hits the 2r
    ring, restarting whenever it escapes past 2 wp(r) (the same
    conditioning as the truncated solver law used for the c1 fit).
    """
    from . import _kernels as KK

    inner_sq = float(disk_threshold(2.0 * r))
    outer_sq = float(disk_threshold(2.0 * wp(r)))
    start = boundary_start(wp(r))
    while True:
        state = np.zeros(8, dtype=np.int64)
        state[KK.SX], state[KK.SY] = start
        state[KK.SPHASE] = -1
        feed.reset()
        while True:
            status = KK.srw_absorb_step(feed.next(), state, inner_sq, outer_sq, budget)
            if status == KK.STATUS_DONE:
                break
            if status == KK.STATUS_BUDGET:
                raise BudgetExceeded("biased-start walk exceeded budget",
                                     int(state[KK.ST]))
        if state[KK.SPHASE] == 1:
            return int(state[KK.SX]), int(state[KK.SY])


@dataclass
class CouplingTrace:
    r: float
    xi_draws: list
    discrepancy_indices: list
    m_e: int
    m_f: int | None
    a_threshold: float
    c1: float
    sets_used: int
    covered: bool

    @property
    def m_e_within_threshold(self) -> bool:
        return self.m_e <= self.a_threshold

    @property
    def m_f_within_threshold(self) -> bool | None:
        return None if self.m_f is None else self.m_f <= self.a_threshold


def coupled_cover_run(r: float, seed: int, run_index: int = 0,
                      c1: float | None = None, max_sets: int | None = None,
                      budget: int = DEFAULT_BUDGET,
                      force_xi_zero: bool = False) -> CouplingTrace:
    """Run the coupled union process until D_r is covered.

    The first set A(0) is E(m^E): E-sets are drawn until one contains the
    origin.  Each later draw flips xi ~ Bernoulli(c1/(log r)^2); the first
    xi = 1 replaces the harmonic start by the biased worst-start surrogate
    and launches the m^F search (first fresh excursion visiting that
    biased start point).  Later xi = 1 draws are recorded but, as in the
    construction, only the first one produces a discrepancy.
    """
    if r < 8:
        raise ValueError("requires r >= 8")
    if c1 is None:
        c1 = default_c1(r)
    alpha = 0.0 if force_xi_zero else c1 / math.log(r) ** 2
    if not 0.0 <= alpha < 1.0:
        raise ValueError("xi probability out of range; lower c1")
    start_law = harmonic_start_surrogate(r)
    rng = stream(seed, run_index)
    half, n, inside, t = _disk_box(r)
    grid = np.zeros(n * n, dtype=np.int8)
    grid[~inside] = 2
    outer_sq = wp(r) ** 2
    feed = _WordFeed(rng)
    if max_sets is None:
        max_sets = 64 + 8 * math.ceil(a_threshold(r))
    total = 0

    # A(0) through the m^E mechanism: scratch sets until 0 is covered
    m_e = 0
    while True:
        m_e += 1
        if m_e > max_sets:
            raise BudgetExceeded(f"m^E search exceeded {max_sets} sets", total)
        sp = tuple(int(v) for v in start_law.sample(rng))
        scratch = np.zeros(n * n, dtype=np.int8)
        feed.reset()
        steps, targ = _run_excursion(feed, scratch, half, t, outer_sq, sp,
                                     target=(0, 0), budget=budget - total)
        total += steps
        if targ >= 0:
            grid[(scratch == 1) & (grid == 0)] = 1
            break

    xi_draws: list[int] = []
    discrepancies = [0]
    m_f: int | None = None
    sets_used = 1
    covered = int((grid == 0).sum()) == 0
    while not covered and sets_used < max_sets:
        xi = int(rng.random() < alpha)
        xi_draws.append(xi)
        if xi == 1 and len(discrepancies) == 1:
            discrepancies.append(sets_used)
            sp = _sample_biased_start(r, rng, feed, budget=budget - total)
            # m^F: first fresh excursion whose path visits the biased start
            m_f = 0
            while True:
                m_f += 1
                if m_f > max_sets:
                    raise BudgetExceeded(f"m^F search exceeded {max_sets} sets", total)
                fp = tuple(int(v) for v in start_law.sample(rng))
                scratch = np.zeros(n * n, dtype=np.int8)
                feed.reset()
                steps, targ = _run_excursion(feed, scratch, half, t, outer_sq,
                                             fp, target=sp,
                                             budget=budget - total)
                total += steps
                if targ >= 0:
                    break
        else:
            sp = tuple(int(v) for v in start_law.sample(rng))
        feed.reset()
        steps, _ = _run_excursion(feed, grid, half, t, outer_sq, sp,
                                  budget=budget - total)
        total += steps
        sets_used += 1
        covered = int((grid == 0).sum()) == 0

    return CouplingTrace(
        r=float(r), xi_draws=xi_draws, discrepancy_indices=discrepancies,
        m_e=m_e, m_f=m_f, a_threshold=a_threshold(r), c1=float(c1),
        sets_used=sets_used, covered=covered,
    )


def sample_m_e(r: float, seed: int, run_index: int = 0,
               max_sets: int | None = None,
               budget: int = DEFAULT_BUDGET) -> int:
    """First index of an i.i.d. excursion-set stream containing the origin."""
    if r < 8:
        raise ValueError("requires r >= 8")
    start_law = harmonic_start_surrogate(r)
    rng = stream(seed, run_index)
    half, n, inside, t = _disk_box(r)
    outer_sq = wp(r) ** 2
    feed = _WordFeed(rng)
    if max_sets is None:
        max_sets = 64 + 8 * math.ceil(a_threshold(r))
    scratch = np.zeros(n * n, dtype=np.int8)
    total = 0
    for j in range(1, max_sets + 1):
        sp = tuple(int(v) for v in start_law.sample(rng))
        feed.reset()
        steps, targ = _run_excursion(feed, scratch, half, t, outer_sq, sp,
                                     target=(0, 0), budget=budget - total)
        total += steps
        if targ >= 0:
            return j
    raise BudgetExceeded(f"m^E search exceeded {max_sets} sets", total)


def xi_tail_prob(m: int, alpha: float) -> float:
    """Exact P{Binomial(m, alpha) > 1} = 1 - (1-a)^m - m a (1-a)^(m-1)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if m <= 1:
        return 0.0  # a single draw can never exceed 1
    q = 1.0 - alpha
    return 1.0 - q ** m - m * alpha * q ** (m - 1)
