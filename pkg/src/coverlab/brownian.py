"""Planar Brownian motion: annulus laws, Wiener sausage coverage, torus cover.

Two path engines are used, per what each statistic needs.  Hitting laws
use sphere-stepping (repeated exact uniform exits from maximal inscribed
disks), which is exact in law and has no time resolution.  Cover times
and the sausage use fixed-dt Gaussian stepping, where elapsed time is
dt times the step count.  The sausage cover run can replace its return
legs (outside the outer excursion circle, where nothing is covered) by
an exact draw from the exterior Poisson kernel on the inner circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .rng import stream
from .scales import phi, wp
from .srw import BudgetExceeded, ExcursionLedger

DEFAULT_STEP_BUDGET = 10**10


def annulus_hit_prob_formula(r1: float, r2: float, r3: float) -> float:
    """P{Brownian motion from radius r2 hits radius r1 before r3}."""
    if not 0 < r1 < r2 < r3:
        raise ValueError("need 0 < r1 < r2 < r3")
    return (math.log(r3) - math.log(r2)) / (math.log(r3) - math.log(r1))


def exterior_circle_hit(z: tuple[float, float], rho: float, u: float):
    """Exact hit point on the circle of radius rho from an exterior point.

    The hit angle, relative to the direction of z, follows the Poisson
    kernel of the disk at the inverted point rho^2 z/|z|^2 (a wrapped
    Cauchy law); u is a uniform(0,1) variate.
    """
    d = math.hypot(z[0], z[1]) / rho
    if d <= 1.0:
        raise ValueError("point must lie outside the circle")
    a = 1.0 / d
    theta = 2.0 * math.atan((1.0 - a) / (1.0 + a) * math.tan(math.pi * (u - 0.5)))
    base = math.atan2(z[1], z[0])
    return (rho * math.cos(base + theta), rho * math.sin(base + theta))


@dataclass
class AnnulusSample:
    side: str                 # "inner" or "outer"
    exit_point: tuple[float, float]
    hops: int


def sample_annulus_side(pos, r1: float, r3: float, seed: int,
                        run_index: int = 0, tol: float | None = None) -> AnnulusSample:
    """Which boundary of the annulus r1 < |z| < r3 is hit first, by
    sphere-stepping; the exit point is projected onto the hit circle."""
    x, y = float(pos[0]), float(pos[1])
    d = math.hypot(x, y)
    if not r1 < d < r3:
        raise ValueError("position must lie strictly inside the annulus")
    if tol is None:
        tol = (r3 - r1) / 1000.0
    if not 0 < tol < (r3 - r1) / 100.0:
        raise ValueError("tolerance must be positive and < (r3-r1)/100")
    rng = stream(seed, run_index)
    hops = 0
    while True:
        d = math.hypot(x, y)
        gap_in, gap_out = d - r1, r3 - d
        if gap_in <= tol:
            s = r1 / d
            return AnnulusSample("inner", (x * s, y * s), hops)
        if gap_out <= tol:
            s = r3 / d
            return AnnulusSample("outer", (x * s, y * s), hops)
        step = min(gap_in, gap_out)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        x += step * math.cos(ang)
        y += step * math.sin(ang)
        hops += 1


class _NormalFeed:
    """Adaptive chunks of dt-scaled Gaussian planar increments."""

    _MIN = 1 << 8
    _MAX = 1 << 18

    def __init__(self, rng: np.random.Generator, dt: float):
        self.rng = rng
        self.scale = math.sqrt(dt)
        self.size = self._MIN

    def next(self) -> np.ndarray:
        out = self.rng.standard_normal(size=(self.size, 2)) * self.scale
        if self.size < self._MAX:
            self.size *= 4
        return out

    def reset(self) -> None:
        self.size = self._MIN


@dataclass
class ExitStats:
    r: float
    dt: float
    mean: float
    std_error: float
    times: np.ndarray
    tail_fraction: float       # fraction outside (r^{2-eps}, r^{2+eps})
    tail_eps: float


def brownian_exit_stats(r: float, samples: int, seed: int, dt: float = 1e-3,
                        tail_eps: float = 0.25, run_index: int = 0,
                        budget: int = DEFAULT_STEP_BUDGET) -> ExitStats:
    """Exit times of D(0, r) from the origin; mean should be r^2/2."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if samples <= 0:
        raise ValueError("samples must be positive")
    rsq = r * r
    times = np.empty(samples)
    rng = stream(seed, run_index)
    feed = _NormalFeed(rng, dt)
    state = np.zeros(3)
    for i in range(samples):
        feed.reset()
        state[:] = 0.0
        while True:
            status = K.bm_exit_step(feed.next(), state, rsq, budget)
            if status == K.STATUS_DONE:
                break
            if status == K.STATUS_BUDGET:
                raise BudgetExceeded("exit run exceeded step budget", int(state[K.BT]))
        times[i] = state[K.BT] * dt
    lo, hi = r ** (2.0 - tail_eps), r ** (2.0 + tail_eps)
    tail = float(((times < lo) | (times > hi)).mean())
    return ExitStats(r=float(r), dt=float(dt), mean=float(times.mean()),
                     std_error=float(times.std(ddof=1) / math.sqrt(samples)),
                     times=times, tail_fraction=tail, tail_eps=tail_eps)


def exit_time_dt_refinement(r: float, samples: int, seed: int, dt: float,
                            run_index: int = 0,
                            budget: int = DEFAULT_STEP_BUDGET):
    """Paired exit times of D(0, r) at steps dt and dt/2 on a shared path.

    Each coarse increment is the sum of two consecutive fine increments,
    so both discretizations follow the same Brownian path and the mean
    difference isolates the time-discretization effect from Monte Carlo
    noise.  Returns (fine_times, coarse_times).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if samples <= 0:
        raise ValueError("samples must be positive")
    rsq = r * r
    rng = stream(seed, run_index)
    scale = math.sqrt(dt / 2.0)
    fine_times = np.empty(samples)
    coarse_times = np.empty(samples)
    state_f = np.zeros(3)
    state_c = np.zeros(3)
    for i in range(samples):
        state_f[:] = 0.0
        state_c[:] = 0.0
        done_f = done_c = False
        block = 1 << 8
        while not (done_f and done_c):
            inc = rng.standard_normal(size=(block, 2)) * scale
            if not done_f:
                status = K.bm_exit_step(inc, state_f, rsq, budget)
                if status == K.STATUS_BUDGET:
                    raise BudgetExceeded("exit run exceeded step budget",
                                         int(state_f[K.BT]))
                done_f = status == K.STATUS_DONE
            if not done_c:
                status = K.bm_exit_step(inc[0::2] + inc[1::2], state_c, rsq,
                                        budget)
                if status == K.STATUS_BUDGET:
                    raise BudgetExceeded("exit run exceeded step budget",
                                         int(state_c[K.BT]))
                done_c = status == K.STATUS_DONE
            if block < (1 << 16):
                block *= 4
        fine_times[i] = state_f[K.BT] * (dt / 2.0)
        coarse_times[i] = state_c[K.BT] * dt
    return fine_times, coarse_times


@dataclass
class SausageRunResult:
    r: float
    R: float
    dt: float
    h: float
    cover_time: float
    excursion_count: int
    steps: int
    ledger: ExcursionLedger
    engine: str
    synthetic_time: bool
    sausage_radius: float


def _sausage_grid(r: float, h: float, sausage_radius: float):
    half = int(math.floor(r / h))
    xs = np.arange(-half, half + 1)
    c2 = (xs[:, None] * h) ** 2 + (xs[None, :] * h) ** 2
    grid = np.where(c2 <= r * r + 1e-12, 0, 2).astype(np.int8).ravel()
    safe = sausage_radius - h / math.sqrt(2.0)
    if safe <= 0:
        raise ValueError("cell size too coarse for the sausage radius")
    reach = int(math.ceil(safe / h)) + 1
    off = np.arange(-reach, reach + 1)
    o2 = off[:, None] ** 2 + off[None, :] ** 2
    sel = o2 <= (safe / h + 1.5) ** 2
    stencil = np.column_stack(np.nonzero(sel)).astype(np.int64) - reach
    return half, grid, stencil, safe * safe


def sausage_cover_run(r: float, R: float, dt: float, h: float, seed: int,
                      run_index: int = 0, engine: str = "direct",
                      sausage_radius: float = 1.0,
                      budget: int = DEFAULT_STEP_BUDGET) -> SausageRunResult:
    """Run Brownian motion until the radius-1 sausage covers D(0, r).

    Coverage is conservative: a cell of spacing h is marked only when its
    center comes within sausage_radius - h/sqrt(2) of a sample point, so
    discretization never overstates coverage.  Excursions are counted
    between the circles of 2r and 2R*wp(r).  engine "excursion" replaces
    each return leg by an exact exterior-Poisson-kernel draw on the 2r
    circle (the hit law of the continuous path); times are then synthetic,
    with each leg charged (2R*wp(r))^2 time.
    """
    if r < 8:
        raise ValueError("r must be >= 8")
    if R * math.log(r) ** 3 <= 1:
        raise ValueError("need R (log r)^3 > 1 so the outer circle clears 2r")
    if not 0 < dt <= 0.01:
        raise ValueError("dt must lie in (0, 0.01]")
    if not 0 < h <= 0.2:
        raise ValueError("h must lie in (0, 0.2]")
    if engine not in ("direct", "excursion"):
        raise ValueError("engine must be 'direct' or 'excursion'")
    inner_r = 2.0 * r
    outer_r = 2.0 * R * wp(r)
    half, grid, stencil, safe_rsq = _sausage_grid(r, h, sausage_radius)
    fstate = np.zeros(4)
    istate = np.zeros(6, dtype=np.int64)
    istate[2] = int((grid == 0).sum())
    istate[3] = istate[4] = 1 << 60   # force marking at the first step
    maxhits = 4096
    hit_kinds = np.empty(maxhits, dtype=np.int8)
    hit_times = np.empty(maxhits, dtype=np.int64)
    # mark the starting point's neighborhood (time zero)
    mark_rsq = (r + sausage_radius) ** 2
    rng = stream(seed, run_index)
    feed = _NormalFeed(rng, dt)
    halt = 1 if engine == "excursion" else 0
    leg_time_steps = max(1.0, outer_r * outer_r / dt)
    while True:
        status = K.sausage_cover_step(
            feed.next(), fstate, istate, grid, stencil, safe_rsq, half,
            float(h), mark_rsq, inner_r * inner_r, outer_r * outer_r,
            hit_kinds, hit_times, budget, halt)
        if status == K.STATUS_DONE:
            break
        if status == K.STATUS_OUTER_HALT:
            hx, hy = exterior_circle_hit((fstate[0], fstate[1]), inner_r,
                                         rng.random())
            nh = int(istate[1])
            if nh >= maxhits:
                hit_kinds = np.concatenate([hit_kinds, np.empty(maxhits, dtype=np.int8)])
                hit_times = np.concatenate([hit_times, np.empty(maxhits, dtype=np.int64)])
                maxhits = len(hit_kinds)
            fstate[0], fstate[1] = hx, hy
            fstate[2] += leg_time_steps
            hit_kinds[nh] = 1
            hit_times[nh] = np.int64(fstate[2])
            istate[1] = nh + 1
            istate[0] = K.PHASE_WAIT_OUTER
            istate[3] = istate[4] = 1 << 60
            feed.reset()
        elif status == K.STATUS_LEDGER_FULL:
            hit_kinds = np.concatenate([hit_kinds, np.empty(maxhits, dtype=np.int8)])
            hit_times = np.concatenate([hit_times, np.empty(maxhits, dtype=np.int64)])
            maxhits = len(hit_kinds)
        elif status == K.STATUS_BUDGET:
            raise BudgetExceeded(f"sausage run r={r} exceeded {budget} steps",
                                 int(fstate[2]))
    nh = int(istate[1])
    ledger = ExcursionLedger(inner_r, outer_r, hit_kinds[:nh].copy(),
                             hit_times[:nh].copy())
    return SausageRunResult(
        r=float(r), R=float(R), dt=float(dt), h=float(h),
        cover_time=float(fstate[3]) * dt,
        excursion_count=ledger.excursion_count,
        steps=int(fstate[2]), ledger=ledger, engine=engine,
        synthetic_time=(engine == "excursion"),
        sausage_radius=float(sausage_radius),
    )


@dataclass
class TorusCoverResult:
    epsilon: float
    dt: float
    cover_time: float
    steps: int
    targets: int

    def lil_ratio(self) -> float:
        """Cover time over (log eps)^2; tends to 2/pi as eps -> 0."""
        return self.cover_time / math.log(self.epsilon) ** 2


def torus_cover_time(epsilon: float, dt: float, seed: int, run_index: int = 0,
                     budget: int = DEFAULT_STEP_BUDGET) -> TorusCoverResult:
    """Time for wrapped Brownian motion to come within eps of every point.

    Target points form a grid of spacing <= eps/4 over the unit torus;
    the cover time is the last first-entry time within eps of a target.
    """
    if not 0 < epsilon <= 0.05:
        raise ValueError("epsilon must lie in (0, 0.05]")
    if not 0 < dt <= epsilon * epsilon / 25.0:
        raise ValueError("dt must be <= eps^2/25 (step length <= eps/5)")
    side = int(math.ceil(4.0 / epsilon))
    cell = 1.0 / side
    grid = np.zeros(side * side, dtype=np.int8)
    reach = int(math.ceil(epsilon / cell)) + 1
    off = np.arange(-reach, reach + 1)
    sel = off[:, None] ** 2 + off[None, :] ** 2 <= (epsilon / cell + 1.5) ** 2
    stencil = np.column_stack(np.nonzero(sel)).astype(np.int64) - reach
    fstate = np.zeros(4)
    istate = np.zeros(4, dtype=np.int64)
    istate[0] = side * side
    istate[1] = istate[2] = 1 << 60
    rng = stream(seed, run_index)
    feed = _NormalFeed(rng, dt)
    while True:
        status = K.torus_cover_step(feed.next(), fstate, istate, grid, stencil,
                                    side, cell, epsilon * epsilon, budget)
        if status == K.STATUS_DONE:
            break
        if status == K.STATUS_BUDGET:
            raise BudgetExceeded("torus cover exceeded step budget", int(fstate[2]))
    return TorusCoverResult(epsilon=float(epsilon), dt=float(dt),
                            cover_time=float(fstate[3]) * dt,
                            steps=int(fstate[2]), targets=side * side)


def sausage_n_over_phi(result: SausageRunResult) -> float:
    return result.excursion_count / phi(result.r)
