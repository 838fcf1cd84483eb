"""Numba inner loops for the walk and Brownian simulations.

Kernels consume pre-generated random chunks (uint64 words holding 32
two-bit steps, or standard-normal increments) and carry all mutable run
state in small int64/float64 arrays, so a run can be resumed chunk after
chunk with exact replay.  Squared radii are passed in; membership in a
boundary ring d D_rho is the exact test

    n2 > rho^2  and  n2 - 2*max(|x|,|y|) + 1 <= rho^2.

Status codes returned by the steppers:
    0  chunk exhausted, keep feeding
    1  run finished (covered / absorbed / target reached)
    2  ledger arrays full
    3  stop_at step count reached
    4  step budget exhausted
"""

from __future__ import annotations

import numpy as np
from numba import njit

# state vector layout for the lattice walkers
SX, SY, ST, SPHASE, SNHITS, SUNCOV, SCOVT, STARGT = range(8)

STATUS_MORE = 0
STATUS_DONE = 1
STATUS_LEDGER_FULL = 2
STATUS_STOP_AT = 3
STATUS_BUDGET = 4
STATUS_OUTER_HALT = 5

PHASE_FIRST_OUT = 0   # before s(0): waiting for the outer ring
PHASE_WAIT_INNER = 1  # waiting for the inner ring (k(i))
PHASE_WAIT_OUTER = 2  # excursion in progress, waiting for the outer ring


@njit(cache=True)
def _on_ring(x, y, n2, rsq):
    ax = x if x >= 0 else -x
    ay = y if y >= 0 else -y
    m = ax if ax >= ay else ay
    return n2 > rsq and n2 - 2 * m + 1 <= rsq


@njit(cache=True)
def srw_cover_step(words, state, grid, norm_idx, counts, half,
                   inner_sq, outer_sq, hit_kinds, hit_times,
                   stop_at, budget, halt_on_outer):
    """Advance a cover run by up to 32*len(words) steps.

    grid: int8, 0 unvisited disk cell / 1 visited / 2 outside disk.
    counts: unvisited-cell count per distinct squared norm (for R_n
    checkpoints).  hit_kinds: 0 outer ring, 1 inner ring.  With
    halt_on_outer nonzero the kernel returns after recording each outer
    hit, so a driver can splice in a sampled return leg.
    """
    x = state[SX]
    y = state[SY]
    t = state[ST]
    phase = state[SPHASE]
    nh = state[SNHITS]
    unc = state[SUNCOV]
    maxhits = hit_kinds.shape[0]
    n = 2 * half + 1
    status = STATUS_MORE
    for w in range(words.shape[0]):
        word = words[w]
        for j in range(32):
            if t == stop_at:
                status = STATUS_STOP_AT
                break
            if t >= budget:
                status = STATUS_BUDGET
                break
            s = (word >> (2 * j)) & np.uint64(3)
            if s == np.uint64(0):
                x += 1
            elif s == np.uint64(1):
                x -= 1
            elif s == np.uint64(2):
                y += 1
            else:
                y -= 1
            t += 1
            if unc > 0 and -half <= x <= half and -half <= y <= half:
                gi = (x + half) * n + (y + half)
                if grid[gi] == 0:
                    grid[gi] = 1
                    counts[norm_idx[gi]] -= 1
                    unc -= 1
                    if unc == 0:
                        state[SCOVT] = t
                        status = STATUS_DONE
                        break
            n2 = x * x + y * y
            if phase == PHASE_WAIT_INNER:
                if _on_ring(x, y, n2, inner_sq):
                    if nh >= maxhits:
                        status = STATUS_LEDGER_FULL
                        break
                    hit_kinds[nh] = 1
                    hit_times[nh] = t
                    nh += 1
                    phase = PHASE_WAIT_OUTER
            else:
                if _on_ring(x, y, n2, outer_sq):
                    if nh >= maxhits:
                        status = STATUS_LEDGER_FULL
                        break
                    hit_kinds[nh] = 0
                    hit_times[nh] = t
                    nh += 1
                    phase = PHASE_WAIT_INNER
                    if halt_on_outer != 0:
                        status = STATUS_OUTER_HALT
                        break
        if status != STATUS_MORE:
            break
    state[SX] = x
    state[SY] = y
    state[ST] = t
    state[SPHASE] = phase
    state[SNHITS] = nh
    state[SUNCOV] = unc
    return status


@njit(cache=True)
def srw_absorb_step(words, state, inner_sq, outer_sq, budget):
    """Walk until hitting the ring of inner_sq or of outer_sq.

    outer_sq < 0 disables the outer absorber.  On STATUS_DONE the hit side
    is left in state[SPHASE]: 1 inner, 0 outer.
    """
    x = state[SX]
    y = state[SY]
    t = state[ST]
    status = STATUS_MORE
    for w in range(words.shape[0]):
        word = words[w]
        for j in range(32):
            if t >= budget:
                status = STATUS_BUDGET
                break
            s = (word >> (2 * j)) & np.uint64(3)
            if s == np.uint64(0):
                x += 1
            elif s == np.uint64(1):
                x -= 1
            elif s == np.uint64(2):
                y += 1
            else:
                y -= 1
            t += 1
            n2 = x * x + y * y
            if _on_ring(x, y, n2, inner_sq):
                state[SPHASE] = 1
                status = STATUS_DONE
                break
            if outer_sq >= 0 and _on_ring(x, y, n2, outer_sq):
                state[SPHASE] = 0
                status = STATUS_DONE
                break
        if status != STATUS_MORE:
            break
    state[SX] = x
    state[SY] = y
    state[ST] = t
    return status


@njit(cache=True)
def srw_excursion_step(words, state, grid, half, disk_sq, outer_sq,
                       tx, ty, mark_after_target, budget):
    """Walk until the outer ring, marking visits to D_r in grid.

    Tracks the first visit time of the target point (tx, ty) in
    state[STARGT] (-1 while unvisited).  With mark_after_target nonzero,
    marking only starts once the target has been visited; this realizes
    the trimmed sets S[t_i, t_f] used for the coupling discrepancies.
    """
    x = state[SX]
    y = state[SY]
    t = state[ST]
    targ_t = state[STARGT]
    n = 2 * half + 1
    status = STATUS_MORE
    # the start point itself may need marking / target checking
    if t == 0:
        if x == tx and y == ty and targ_t < 0:
            targ_t = 0
        if (targ_t >= 0 or mark_after_target == 0) and -half <= x <= half and -half <= y <= half:
            if x * x + y * y <= disk_sq:
                grid[(x + half) * n + (y + half)] = 1
    for w in range(words.shape[0]):
        word = words[w]
        for j in range(32):
            if t >= budget:
                status = STATUS_BUDGET
                break
            s = (word >> (2 * j)) & np.uint64(3)
            if s == np.uint64(0):
                x += 1
            elif s == np.uint64(1):
                x -= 1
            elif s == np.uint64(2):
                y += 1
            else:
                y -= 1
            t += 1
            if x == tx and y == ty and targ_t < 0:
                targ_t = t
            if (targ_t >= 0 or mark_after_target == 0) and -half <= x <= half and -half <= y <= half:
                n2s = x * x + y * y
                if n2s <= disk_sq:
                    grid[(x + half) * n + (y + half)] = 1
            n2 = x * x + y * y
            if _on_ring(x, y, n2, outer_sq):
                status = STATUS_DONE
                break
        if status != STATUS_MORE:
            break
    state[SX] = x
    state[SY] = y
    state[ST] = t
    state[STARGT] = targ_t
    return status


# ---------------------------------------------------------------------------
# Brownian kernels.  State layout: [x, y, t_steps] with float positions kept
# separately; we pass float64 state arrays.
BX, BY, BT = 0, 1, 2


@njit(cache=True)
def bm_exit_step(incs, state, rsq, budget):
    """Fixed-dt Brownian stepping until |B| >= r.  incs are dt-scaled."""
    x = state[BX]
    y = state[BY]
    t = state[BT]
    status = STATUS_MORE
    for i in range(incs.shape[0]):
        if t >= budget:
            status = STATUS_BUDGET
            break
        x += incs[i, 0]
        y += incs[i, 1]
        t += 1.0
        if x * x + y * y >= rsq:
            status = STATUS_DONE
            break
    state[BX] = x
    state[BY] = y
    state[BT] = t
    return status


@njit(cache=True)
def bm_annulus_step(incs, state, r1sq, r3sq, budget):
    """Fixed-dt stepping until |B| <= r1 (side 1) or |B| >= r3 (side 0)."""
    x = state[BX]
    y = state[BY]
    t = state[BT]
    side = -1.0
    status = STATUS_MORE
    for i in range(incs.shape[0]):
        if t >= budget:
            status = STATUS_BUDGET
            break
        x += incs[i, 0]
        y += incs[i, 1]
        t += 1.0
        n2 = x * x + y * y
        if n2 <= r1sq:
            side = 1.0
            status = STATUS_DONE
            break
        if n2 >= r3sq:
            side = 0.0
            status = STATUS_DONE
            break
    state[BX] = x
    state[BY] = y
    state[BT] = t
    return status, side


@njit(cache=True)
def sausage_cover_step(incs, fstate, istate, grid, stencil, safe_rsq, half,
                       cell, mark_rsq, inner_sq, outer_sq,
                       hit_kinds, hit_times, budget, halt_on_outer):
    """Wiener sausage cover run.

    grid: int8 over cell centers of D(0, r); a cell is marked when its
    center lies within the safety-margin radius of the current point.
    stencil: (m, 2) int64 cell offsets covering that radius; marking is
    re-done only when the occupied cell changes.  Excursions against the
    circles of inner_sq / outer_sq with the same phase machine as the walk.
    With halt_on_outer nonzero the kernel returns after each outer hit so
    the driver can splice in a sampled return leg.
    istate: [phase, nhits, uncovered, last_cx, last_cy, covered_flag].
    fstate: [x, y, steps, cover_time].
    """
    x = fstate[0]
    y = fstate[1]
    t = fstate[2]
    phase = istate[0]
    nh = istate[1]
    unc = istate[2]
    last_cx = istate[3]
    last_cy = istate[4]
    maxhits = hit_kinds.shape[0]
    n = 2 * half + 1
    status = STATUS_MORE
    for i in range(incs.shape[0]):
        if t >= budget:
            status = STATUS_BUDGET
            break
        x += incs[i, 0]
        y += incs[i, 1]
        t += 1.0
        n2 = x * x + y * y
        if unc > 0 and n2 <= mark_rsq:
            cx = np.int64(np.floor(x / cell + 0.5))
            cy = np.int64(np.floor(y / cell + 0.5))
            if cx != last_cx or cy != last_cy:
                last_cx = cx
                last_cy = cy
                for k in range(stencil.shape[0]):
                    gx = cx + stencil[k, 0]
                    gy = cy + stencil[k, 1]
                    if -half <= gx <= half and -half <= gy <= half:
                        gi = (gx + half) * n + (gy + half)
                        if grid[gi] == 0:
                            dx = gx * cell - x
                            dy = gy * cell - y
                            if dx * dx + dy * dy <= safe_rsq:
                                grid[gi] = 1
                                unc -= 1
                if unc == 0:
                    fstate[3] = t
                    istate[5] = 1
                    status = STATUS_DONE
        if phase == PHASE_WAIT_INNER:
            if n2 <= inner_sq:
                if nh >= maxhits:
                    status = STATUS_LEDGER_FULL
                else:
                    hit_kinds[nh] = 1
                    hit_times[nh] = np.int64(t)
                    nh += 1
                    phase = PHASE_WAIT_OUTER
        else:
            if n2 >= outer_sq:
                if nh >= maxhits:
                    status = STATUS_LEDGER_FULL
                else:
                    hit_kinds[nh] = 0
                    hit_times[nh] = np.int64(t)
                    nh += 1
                    phase = PHASE_WAIT_INNER
                    if halt_on_outer != 0:
                        status = STATUS_OUTER_HALT
        if status != STATUS_MORE:
            break
    fstate[0] = x
    fstate[1] = y
    fstate[2] = t
    istate[0] = phase
    istate[1] = nh
    istate[2] = unc
    istate[3] = last_cx
    istate[4] = last_cy
    return status


@njit(cache=True)
def torus_cover_step(incs, fstate, istate, grid, stencil, side_cells,
                     cell, eps_sq, budget):
    """Brownian motion on the unit torus until all target points are hit.

    Targets sit on a side_cells x side_cells grid of spacing `cell` over
    (-1/2, 1/2]^2; a target is hit when the path comes within eps of it.
    fstate: [x, y, steps, cover_time]; istate: [uncovered, last_cx, last_cy,
    covered_flag].
    """
    x = fstate[0]
    y = fstate[1]
    t = fstate[2]
    unc = istate[0]
    last_cx = istate[1]
    last_cy = istate[2]
    status = STATUS_MORE
    for i in range(incs.shape[0]):
        if t >= budget:
            status = STATUS_BUDGET
            break
        x += incs[i, 0]
        y += incs[i, 1]
        # wrap into (-1/2, 1/2]
        while x > 0.5:
            x -= 1.0
        while x <= -0.5:
            x += 1.0
        while y > 0.5:
            y -= 1.0
        while y <= -0.5:
            y += 1.0
        t += 1.0
        cx = np.int64(np.floor(x / cell + 0.5))
        cy = np.int64(np.floor(y / cell + 0.5))
        if cx != last_cx or cy != last_cy:
            last_cx = cx
            last_cy = cy
            for k in range(stencil.shape[0]):
                gx = cx + stencil[k, 0]
                gy = cy + stencil[k, 1]
                # wrap the target index
                while gx >= side_cells:
                    gx -= side_cells
                while gx < 0:
                    gx += side_cells
                while gy >= side_cells:
                    gy -= side_cells
                while gy < 0:
                    gy += side_cells
                gi = gx * side_cells + gy
                if grid[gi] == 0:
                    tx = (cx + stencil[k, 0]) * cell
                    ty = (cy + stencil[k, 1]) * cell
                    dx = tx - x
                    dy = ty - y
                    if dx * dx + dy * dy <= eps_sq:
                        grid[gi] = 1
                        unc -= 1
            if unc == 0:
                fstate[3] = t
                istate[3] = 1
                status = STATUS_DONE
        if status != STATUS_MORE:
            break
    fstate[0] = x
    fstate[1] = y
    fstate[2] = t
    istate[0] = unc
    istate[1] = last_cx
    istate[2] = last_cy
    return status
