"""Exact discrete potential theory on finite lattice regions.

Absorption problems are solved through the discrete mean-value system
(value at an interior point = average of its 4 neighbors, indicator data
on the absorbing set).  The symmetric positive definite system
(4I - Adj) is solved by an algebraic-multigrid-preconditioned conjugate
gradient sweep with a fixed lexicographic point ordering, so golden
values reproduce across runs.  Used as the oracle for the Monte Carlo
hitting estimates and as the source of harmonic-measure start laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pyamg
import scipy.sparse as sp

from .lattice import disk_threshold
from .scales import wp

DEFAULT_CAP = 1_000_000
_NBRS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)

# residual target for the mean-value property at every interior point
MEAN_VALUE_TOL = 1e-10


class SizeCapExceeded(RuntimeError):
    pass


def _ring_mask(pts: np.ndarray, threshold: int) -> np.ndarray:
    n2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    m = np.maximum(np.abs(pts[:, 0]), np.abs(pts[:, 1]))
    return (n2 > threshold) & (n2 - 2 * m + 1 <= threshold)


@dataclass
class AbsorbingProblem:
    """Interior/absorbing point sets with a lexicographic index map."""

    interior: np.ndarray     # (N, 2) int
    absorbing: np.ndarray    # (M, 2) int
    start: tuple[int, int] | None = None
    labels: np.ndarray | None = None  # per-absorbing-point label ids

    n_interior: int = field(init=False)

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=np.int64).reshape(-1, 2)
        self.absorbing = np.asarray(self.absorbing, dtype=np.int64).reshape(-1, 2)
        if len(self.absorbing) == 0:
            raise ValueError("absorbing set must be nonempty")
        order = np.lexsort((self.interior[:, 1], self.interior[:, 0]))
        self.interior = self.interior[order]
        order_a = np.lexsort((self.absorbing[:, 1], self.absorbing[:, 0]))
        self.absorbing = self.absorbing[order_a]
        if self.labels is not None:
            self.labels = np.asarray(self.labels)[order_a]
        self.n_interior = len(self.interior)
        self._build_index()

    def _build_index(self):
        allpts = np.vstack([self.interior, self.absorbing])
        lo = allpts.min(axis=0) - 1
        hi = allpts.max(axis=0) + 1
        self._lo = lo
        shape = (hi[0] - lo[0] + 1, hi[1] - lo[1] + 1)
        idx = np.full(shape, -1, dtype=np.int64)
        idx[self.interior[:, 0] - lo[0], self.interior[:, 1] - lo[1]] = \
            np.arange(self.n_interior)
        idx[self.absorbing[:, 0] - lo[0], self.absorbing[:, 1] - lo[1]] = \
            self.n_interior + np.arange(len(self.absorbing))
        self._idx = idx
        # closure: each interior neighbor must be interior or absorbing
        for d in _NBRS:
            nb = self.interior + d
            j = idx[nb[:, 0] - lo[0], nb[:, 1] - lo[1]]
            if (j < 0).any():
                raise ValueError("interior point with a neighbor outside the problem")
        if self.start is not None and self.index_of(self.start) < 0:
            raise ValueError("start point not in the problem")

    def index_of(self, pt) -> int:
        x, y = int(pt[0]), int(pt[1])
        lo = self._lo
        if not (0 <= x - lo[0] < self._idx.shape[0] and 0 <= y - lo[1] < self._idx.shape[1]):
            return -1
        return int(self._idx[x - lo[0], y - lo[1]])

    def neighbor_indices(self) -> np.ndarray:
        """(N, 4) global indices of the 4 neighbors of each interior point."""
        out = np.empty((self.n_interior, 4), dtype=np.int64)
        lo = self._lo
        for k, d in enumerate(_NBRS):
            nb = self.interior + d
            out[:, k] = self._idx[nb[:, 0] - lo[0], nb[:, 1] - lo[1]]
        return out


def annulus_problem(inner: float, outer: float, start=None,
                    cap: int = DEFAULT_CAP) -> AbsorbingProblem:
    """Absorbing rings of D_inner and D_outer; interior in between.

    inner < 0 means no inner absorber (a plain disk with outer ring).
    """
    t_out = disk_threshold(outer)
    t_in = disk_threshold(inner) if inner >= 0 else -1
    half = math.isqrt(t_out)
    xs = np.arange(-half - 1, half + 2)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    n2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    if inner >= 0:
        ring_in = _ring_mask(pts, t_in)
    else:
        ring_in = np.zeros(len(pts), dtype=bool)
    ring_out = _ring_mask(pts, t_out)
    interior = (n2 <= t_out) & (n2 > t_in) & ~ring_in
    if interior.sum() > cap:
        raise SizeCapExceeded(f"{int(interior.sum())} interior points exceed cap {cap}")
    absorbing = ring_in | ring_out
    labels = np.where(ring_in[absorbing], 0, 1)  # 0 inner, 1 outer
    return AbsorbingProblem(pts[interior], pts[absorbing], start=start, labels=labels)


def _system(problem: AbsorbingProblem):
    """A4 = 4I - Adj over interior, and the interior->absorbing coupling."""
    nbr = problem.neighbor_indices()
    n = problem.n_interior
    rows, cols = np.nonzero(nbr < n)
    a = sp.coo_matrix((-np.ones(len(rows)), (rows, nbr[rows, cols])),
                      shape=(n, n)).tocsr()
    a = a + sp.eye(n, format="csr") * 4.0
    return a, nbr


_solver_cache: dict[int, object] = {}


def _solve(a: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    """AMG-preconditioned CG to an inf-norm residual of MEAN_VALUE_TOL/4."""
    ml = pyamg.ruge_stuben_solver(a, max_coarse=64)
    target = MEAN_VALUE_TOL * 0.25 * max(1.0, float(np.abs(b).max()))
    x = np.zeros_like(b, dtype=np.float64)
    for _ in range(60):
        x = ml.solve(b, x0=x, tol=1e-14, maxiter=50, accel="cg")
        resid = b - a @ x
        if np.abs(resid).max() <= target:
            return x
    raise RuntimeError("linear solve failed to reach residual target")


def solve_values(problem: AbsorbingProblem, boundary_data: np.ndarray) -> np.ndarray:
    """Harmonic extension: values at interior points for given absorbing data."""
    a, nbr = _system(problem)
    n = problem.n_interior
    b = np.zeros(n)
    mask = nbr >= n
    rows, cols = np.nonzero(mask)
    np.add.at(b, rows, boundary_data[nbr[rows, cols] - n])
    return _solve(a, b)


def mean_value_residual(problem: AbsorbingProblem, values: np.ndarray,
                        boundary_data: np.ndarray) -> float:
    """Max |u(x) - mean of neighbors| over interior points."""
    nbr = problem.neighbor_indices()
    n = problem.n_interior
    full = np.concatenate([values, boundary_data])
    return float(np.abs(values - full[nbr].mean(axis=1)).max())


@dataclass
class BoundaryDistribution:
    points: np.ndarray    # (M, 2) int
    weights: np.ndarray   # (M,) nonnegative, sums to 1
    diagnostic: float = 0.0

    def __post_init__(self):
        s = float(self.weights.sum())
        if not math.isclose(s, 1.0, abs_tol=1e-8):
            raise ValueError(f"weights sum to {s}, not 1")
        if (self.weights < -1e-15).any():
            raise ValueError("negative weight")

    def weight_at(self, pt) -> float:
        m = (self.points[:, 0] == pt[0]) & (self.points[:, 1] == pt[1])
        return float(self.weights[m].sum())

    def sample(self, rng: np.random.Generator, size: int | None = None):
        i = rng.choice(len(self.points), size=size, p=self.weights)
        return self.points[i]


def exact_hitting_distribution(problem: AbsorbingProblem) -> BoundaryDistribution:
    """Absorption law from the start point, by one adjoint solve."""
    if problem.start is None:
        raise ValueError("problem needs a start point")
    si = problem.index_of(problem.start)
    n = problem.n_interior
    m = len(problem.absorbing)
    if si >= n:  # start already absorbed
        w = np.zeros(m)
        w[si - n] = 1.0
        return BoundaryDistribution(problem.absorbing.copy(), w)
    a, nbr = _system(problem)
    b = np.zeros(n)
    b[si] = 1.0
    w4 = _solve(a, b)
    weights = np.zeros(m)
    mask = nbr >= n
    rows, cols = np.nonzero(mask)
    np.add.at(weights, nbr[rows, cols] - n, w4[rows])
    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    return BoundaryDistribution(problem.absorbing.copy(), weights)


def exact_hit_prob(rho: float, r: float, P: float, start,
                   cap: int = DEFAULT_CAP) -> float:
    """Exact P^start{hit the rho ring before the P ring}."""
    if not (rho < r < P):
        raise ValueError("need rho < r < P")
    prob = annulus_problem(rho, P, start=start, cap=cap)
    data = np.where(prob.labels == 0, 1.0, 0.0)
    si = prob.index_of(start)
    if si >= prob.n_interior:
        return float(data[si - prob.n_interior])
    u = solve_values(prob, data)
    return float(u[si])


def log_ratio_leading_term(rho: float, r: float, P: float) -> float:
    return (math.log(P) - math.log(r)) / (math.log(P) - math.log(rho))


def _symmetrize(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Average a boundary law over the 8 lattice symmetries."""
    key = {(int(x), int(y)): i for i, (x, y) in enumerate(points)}
    out = np.zeros_like(weights)
    for sx in (1, -1):
        for sy in (1, -1):
            for swap in (False, True):
                w = np.empty_like(weights)
                for i, (x, y) in enumerate(points):
                    xx, yy = sx * int(x), sy * int(y)
                    if swap:
                        xx, yy = yy, xx
                    w[i] = weights[key[(xx, yy)]]
                out += w
    return out / 8.0


def _inner_law_from_far(r: float, M: float, cap: int) -> BoundaryDistribution:
    """Hitting law on the r ring from a uniform start on the M ring,
    conditioned on absorbing at the inner ring before the 2M ring."""
    prob = annulus_problem(r, 2.0 * M, cap=cap)
    a, nbr = _system(prob)
    n = prob.n_interior
    t_m = disk_threshold(M)
    start_mask = _ring_mask(prob.interior, t_m)
    if not start_mask.any():
        raise ValueError("no start points on the truncation ring")
    b = np.zeros(n)
    b[start_mask] = 1.0 / start_mask.sum()
    w4 = _solve(a, b)
    m = len(prob.absorbing)
    weights = np.zeros(m)
    mask = nbr >= n
    rows, cols = np.nonzero(mask)
    np.add.at(weights, nbr[rows, cols] - n, w4[rows])
    inner = prob.labels == 0
    w = np.clip(weights[inner], 0.0, None)
    w /= w.sum()
    pts = prob.absorbing[inner]
    w = _symmetrize(pts, w)
    return BoundaryDistribution(pts, w)


def harmonic_measure(r: float, truncation_radii, cap: int = DEFAULT_CAP) -> BoundaryDistribution:
    """Hitting law of the r ring from infinity, by truncation in M.

    Solves the far-field problem at each truncation M (start uniform on the
    M ring, outer absorber at 2M), symmetrizes over the dihedral group, and
    extrapolates linearly in 1/log M from the two largest truncations.  The
    diagnostic is the total-variation gap between those two laws.
    """
    ms = sorted(float(m) for m in truncation_radii)
    if len(ms) < 2:
        raise ValueError("need at least two truncation radii")
    if ms[0] < 8.0 * max(r, 0.5):
        raise ValueError("smallest truncation must be >= 8r")
    laws = [_inner_law_from_far(r, m, cap) for m in ms]
    w1, w2 = laws[-2].weights, laws[-1].weights
    tv = 0.5 * float(np.abs(w2 - w1).sum())
    x1, x2 = 1.0 / math.log(ms[-2]), 1.0 / math.log(ms[-1])
    # linear extrapolation to 1/log M -> 0
    w = w2 + (w1 - w2) * (x2 / (x1 - x2)) * -1.0
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    return BoundaryDistribution(laws[-1].points, w, diagnostic=tv)


def worst_start_law(r: float, worst_start=None, cap: int = DEFAULT_CAP) -> BoundaryDistribution:
    """Hit law on the 2r ring from the worst start on the wp(r) ring,
    conditioned on absorbing there before the 2 wp(r) ring."""
    outer = wp(r)
    if worst_start is None:
        worst_start = (math.isqrt(disk_threshold(outer)) + 1, 0)
    prob = annulus_problem(2.0 * r, 2.0 * outer, start=worst_start, cap=cap)
    dist = exact_hitting_distribution(prob)
    inner = prob.labels == 0
    mu = np.clip(dist.weights[inner], 0.0, None)
    return BoundaryDistribution(prob.absorbing[inner], mu / mu.sum())


def biased_start_deviation(r: float, worst_start=None, cap: int = DEFAULT_CAP,
                           truncations=None) -> float:
    """Max relative gap between a worst-start hit law on the 2r ring and
    harmonic measure.

    The worst start sits on the wp(r) ring; its (truncation-conditioned)
    hit law mu is the unconditional stand-in for start laws biased by a
    coverage history.  Returns
    max over ring points of |mu - H| / H; the fitted constant is this
    value times (log r)^2.
    """
    if r < 8:
        raise ValueError("requires r >= 8")
    law = worst_start_law(r, worst_start=worst_start, cap=cap)
    if truncations is None:
        truncations = [16.0 * r, 24.0 * r]
    h = harmonic_measure(2.0 * r, truncations, cap=cap)
    # supports agree: both are the ring of D_2r in lexicographic order
    if not np.array_equal(h.points, law.points):
        raise AssertionError("boundary supports misaligned")
    mu = law.weights
    return float(np.abs(mu - h.weights).max() / h.weights.min()
                 if (h.weights <= 0).any()
                 else np.abs((mu - h.weights) / h.weights).max())
