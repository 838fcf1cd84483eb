"""Simple random walk engine: hitting times, cover runs, excursion counts.

Runs are resumable numba kernels fed with chunks of Philox output; a run is
fully determined by (master seed, run index) and a step budget.  Excursions
are counted between the rings of radius 2r and wp(r) = r (ln r)^3 with the
convention of the alternating hit ledger: s(0) is the first outer hit, and
the completed-excursion count N_r is the number of later outer hits that
occur at or before the cover time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .lattice import disk_threshold
from .rng import stream
from .scales import wp

DEFAULT_BUDGET = 10**10
_MIN_WORDS = 64
_MAX_WORDS = 1 << 16


class BudgetExceeded(RuntimeError):
    """A run hit its step budget before finishing."""

    def __init__(self, message: str, steps: int):
        super().__init__(message)
        self.steps = steps


def min_excursion_radius() -> float:
    return 8.0


@dataclass
class ExcursionLedger:
    inner_radius: float
    outer_radius: float
    kinds: np.ndarray   # 0 outer, 1 inner
    times: np.ndarray

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        k, t = self.kinds, self.times
        if len(k) != len(t):
            raise ValueError("kinds/times length mismatch")
        if len(k) == 0:
            return
        if k[0] != 0:
            raise ValueError("ledger must open with the outer hit s(0)")
        if not (np.diff(t) > 0).all():
            raise ValueError("hit times must strictly increase")
        if not (k[1:] != k[:-1]).all():
            raise ValueError("hit kinds must alternate")

    @property
    def excursion_count(self) -> int:
        """Completed excursions: outer hits after s(0)."""
        return int((self.kinds == 0).sum()) - 1 if len(self.kinds) else 0


@dataclass
class CoverRunResult:
    r: float
    cover_time: int
    excursion_count: int
    wall_steps: int
    seed: int
    run_index: int
    ledger: ExcursionLedger
    checkpoints: list = field(default_factory=list)  # (step, cover_radius, saturated)
    engine: str = "direct"
    synthetic_time: bool = False


class _WordFeed:
    """Adaptive-size chunks of uint64 step words from one Philox stream."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.size = _MIN_WORDS

    def next(self) -> np.ndarray:
        w = self.rng.integers(0, 1 << 64, size=self.size, dtype=np.uint64)
        if self.size < _MAX_WORDS:
            self.size *= 4
        return w

    def reset(self) -> None:
        self.size = _MIN_WORDS


def _disk_arrays(r: float):
    """Flattened occupancy grid plus per-norm unvisited counters for D_r."""
    t = disk_threshold(r)
    half = math.isqrt(t)
    xs = np.arange(-half, half + 1)
    n2 = xs[:, None] ** 2 + xs[None, :] ** 2
    inside = n2 <= t
    grid = np.where(inside, 0, 2).astype(np.int8).ravel()
    norms = np.unique(n2[inside])
    norm_idx = np.searchsorted(norms, n2).astype(np.int64).ravel()
    counts = np.zeros(len(norms), dtype=np.int64)
    np.add.at(counts, norm_idx[grid == 0], 1)
    return half, grid, norm_idx, counts, norms


# re-entry samplers for the excursion engine, cached per radius
_REENTRY_CACHE: dict = {}

# exact solver tables are used while the truncated far-field problem
# (outer absorber at 48r) stays within the interior-point budget
_REENTRY_EXACT_MAX_R = 16.0


def _reentry_sampler(r: float):
    """Sampler for the hit point on the 2r ring of a walk from far away.

    For small r the law is the solver's harmonic-measure table
    (truncation + extrapolation).  For larger r the table would need an
    outer absorber of radius 48r, so the law is replaced by a uniform
    angle mapped to the nearest ring point; the angular bias of discrete
    harmonic measure on a ring of radius >= 32 is far below the
    O(1/(log r)^2) tolerance of the leg replacement itself.
    """
    key = float(r)
    if key in _REENTRY_CACHE:
        return _REENTRY_CACHE[key]
    if r <= _REENTRY_EXACT_MAX_R:
        from .annulus import harmonic_measure

        law = harmonic_measure(2.0 * r, [16.0 * r, 24.0 * r], cap=2_500_000)

        def sampler(rng, pts=law.points, w=law.weights):
            i = rng.choice(len(pts), p=w)
            return int(pts[i, 0]), int(pts[i, 1])
    else:
        from .lattice import boundary_points

        pts = np.array(sorted(boundary_points(2.0 * r)), dtype=np.int64)
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        order = np.argsort(ang)
        pts, ang = pts[order], ang[order]

        def sampler(rng, pts=pts, ang=ang):
            theta = rng.uniform(-math.pi, math.pi)
            i = np.searchsorted(ang, theta)
            if i == len(ang):
                i = 0
            return int(pts[i, 0]), int(pts[i, 1])

    _REENTRY_CACHE[key] = sampler
    return sampler


def simulate_cover(r: float, seed: int, run_index: int = 0,
                   budget: int = DEFAULT_BUDGET,
                   checkpoints=(), engine: str = "direct",
                   reentry_law=None, allow_partial: bool = False) -> CoverRunResult:
    """Run from the origin until D_r is covered, with the excursion ledger.

    checkpoints: increasing step counts at which the current cover radius
    is recorded (for the LIL trend statistic).

    engine "direct" simulates every step; it is exact, but the return
    legs (stretches outside D_2r after a wp(r)-ring hit) have log-heavy
    time tails, so it is only practical for r <~ 10.  engine "excursion"
    simulates the initial segment and every excursion between the rings
    of 2r and wp(r) step-by-step, but replaces each return leg - during
    which no point of D_r can be visited - by a draw from the
    precomputed far-field hit law on the 2r ring, which is within
    O(1/(log r)^2) of the leg's own law.  Excursion counts keep their
    law to that accuracy; recorded times are then synthetic (each leg is
    charged a flat wp(r)^2 steps) and the result is flagged accordingly.

    reentry_law overrides the re-entry draw with a given boundary
    distribution on the 2r ring (sensitivity analysis of the leg
    replacement; excursion engine only).
    """
    if r < min_excursion_radius():
        raise ValueError("cover runs require r >= 8 so that wp(r) > 2r")
    if engine not in ("direct", "excursion"):
        raise ValueError("engine must be 'direct' or 'excursion'")
    inner_sq = float(disk_threshold(2.0 * r))
    outer = wp(r)
    outer_sq = outer * outer
    half, grid, norm_idx, counts, norms = _disk_arrays(r)
    n = 2 * half + 1
    # origin is visited at time 0
    gi0 = half * n + half
    grid[gi0] = 1
    counts[norm_idx[gi0]] -= 1

    state = np.zeros(8, dtype=np.int64)
    state[K.SUNCOV] = int((grid == 0).sum())
    state[K.SCOVT] = -1
    maxhits = 4096
    hit_kinds = np.empty(maxhits, dtype=np.int8)
    hit_times = np.empty(maxhits, dtype=np.int64)

    cps = sorted(int(c) for c in checkpoints)
    cp_out = []
    cp_i = 0
    ptr = 0  # smallest possibly-unvisited norm index

    def current_radius():
        nonlocal ptr
        while ptr < len(counts) and counts[ptr] == 0:
            ptr += 1
        if ptr == len(counts):
            return float(r), True
        return math.sqrt(float(norms[ptr])), False

    rng = stream(seed, run_index)
    feed = _WordFeed(rng)
    halt = 1 if engine == "excursion" else 0
    if halt:
        if reentry_law is not None:
            def reentry(rng, law=reentry_law):
                return tuple(int(v) for v in law.sample(rng))
        else:
            reentry = _reentry_sampler(r)
        leg_time = max(1, int(outer_sq))
    while True:
        stop_at = cps[cp_i] if cp_i < len(cps) else -1
        status = K.srw_cover_step(feed.next(), state, grid, norm_idx, counts,
                                  half, inner_sq, outer_sq,
                                  hit_kinds, hit_times, stop_at, budget, halt)
        if status == K.STATUS_DONE:
            break
        if status == K.STATUS_STOP_AT:
            rad, sat = current_radius()
            cp_out.append((cps[cp_i], rad, sat))
            cp_i += 1
        elif status == K.STATUS_OUTER_HALT:
            # replace the return leg by a far-field re-entry draw
            hx, hy = reentry(rng)
            nh = int(state[K.SNHITS])
            if nh >= maxhits:
                hit_kinds = np.concatenate([hit_kinds, np.empty(maxhits, dtype=np.int8)])
                hit_times = np.concatenate([hit_times, np.empty(maxhits, dtype=np.int64)])
                maxhits = len(hit_kinds)
            state[K.SX], state[K.SY] = hx, hy
            state[K.ST] += leg_time
            hit_kinds[nh] = 1
            hit_times[nh] = state[K.ST]
            state[K.SNHITS] = nh + 1
            state[K.SPHASE] = K.PHASE_WAIT_OUTER
            feed.reset()
        elif status == K.STATUS_LEDGER_FULL:
            hit_kinds = np.concatenate([hit_kinds, np.empty(maxhits, dtype=np.int8)])
            hit_times = np.concatenate([hit_times, np.empty(maxhits, dtype=np.int64)])
            maxhits = len(hit_kinds)
        elif status == K.STATUS_BUDGET:
            if allow_partial:
                # cover_time stays -1; ledger and checkpoints are kept
                break
            raise BudgetExceeded(f"cover run r={r} exceeded {budget} steps",
                                 int(state[K.ST]))

    nh = int(state[K.SNHITS])
    cover_time = int(state[K.SCOVT])
    ledger = ExcursionLedger(2.0 * r, outer, hit_kinds[:nh].copy(), hit_times[:nh].copy())
    return CoverRunResult(
        r=float(r), cover_time=cover_time,
        excursion_count=ledger.excursion_count,
        wall_steps=int(state[K.ST]), seed=int(seed), run_index=int(run_index),
        ledger=ledger, checkpoints=cp_out,
        engine=engine, synthetic_time=(engine == "excursion"),
    )


def _absorb(rng_feed: _WordFeed, start, inner_sq: float, outer_sq: float,
            budget: int):
    """Walk from start until a ring is hit; returns (side, x, y, steps)."""
    state = np.zeros(8, dtype=np.int64)
    state[K.SX], state[K.SY] = int(start[0]), int(start[1])
    state[K.SPHASE] = -1
    while True:
        status = K.srw_absorb_step(rng_feed.next(), state, inner_sq, outer_sq, budget)
        if status == K.STATUS_DONE:
            return (int(state[K.SPHASE]), int(state[K.SX]), int(state[K.SY]),
                    int(state[K.ST]))
        if status == K.STATUS_BUDGET:
            raise BudgetExceeded("hitting run exceeded step budget", int(state[K.ST]))


def run_until_hit(r: float, seed: int, start=(0, 0), run_index: int = 0,
                  budget: int = DEFAULT_BUDGET):
    """First entry into the boundary ring of D_r; returns (point, zeta)."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    feed = _WordFeed(stream(seed, run_index))
    _, x, y, t = _absorb(feed, start, float(disk_threshold(r)), -1.0, budget)
    return (x, y), t


@dataclass
class HittingEstimate:
    estimate: float
    std_error: float
    successes: int
    samples: int


def default_start(r: float) -> tuple[int, int]:
    return (math.isqrt(disk_threshold(r)) + 1, 0)


def hitting_prob_estimate(rho: float, r: float, P: float, samples: int,
                          seed: int, start=None, run_index: int = 0,
                          budget: int = DEFAULT_BUDGET) -> HittingEstimate:
    """Monte Carlo estimate of P^x{zeta(rho) < zeta(P)} from x on the ring of r."""
    if not (rho < r < P):
        raise ValueError("need rho < r < P")
    if samples <= 0:
        raise ValueError("samples must be positive")
    if start is None:
        start = default_start(r)
    inner_sq = float(disk_threshold(rho))
    outer_sq = float(disk_threshold(P))
    rng = stream(seed, run_index)
    feed = _WordFeed(rng)
    wins = 0
    for _ in range(samples):
        feed.reset()
        side, _, _, _ = _absorb(feed, start, inner_sq, outer_sq, budget)
        wins += side
    p = wins / samples
    se = math.sqrt(max(p * (1.0 - p), 1.0 / samples) / samples)
    return HittingEstimate(p, se, wins, samples)


def hit_origin_before(P: float, r: float, samples: int, seed: int,
                      start=None, budget: int = DEFAULT_BUDGET) -> HittingEstimate:
    """Estimate of P^x{zeta(0) < zeta(P)} from x on the ring of r."""
    if not 0 < r < P:
        raise ValueError("need 0 < r < P")
    return hitting_prob_estimate(0.0, r, P, samples, seed,
                                 start=start or default_start(r), budget=budget)


def exit_time_samples(r: float, samples: int, seed: int, run_index: int = 0,
                      budget: int = DEFAULT_BUDGET):
    """(zeta(r), |S_zeta|^2) for walks from the origin; optional-stopping checks."""
    inner_sq = float(disk_threshold(r))
    rng = stream(seed, run_index)
    feed = _WordFeed(rng)
    zetas = np.empty(samples, dtype=np.int64)
    norms = np.empty(samples, dtype=np.int64)
    for i in range(samples):
        feed.reset()
        _, x, y, t = _absorb(feed, (0, 0), inner_sq, -1.0, budget)
        zetas[i] = t
        norms[i] = x * x + y * y
    return zetas, norms
