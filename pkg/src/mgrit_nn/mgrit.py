"""MGRIT with full approximation storage over training steps.

Each level holds ``N + 1`` weight vectors ``w[0..N]`` and a right-hand side
``g``; block row ``i >= 1`` reads ``w[i] - Phi_i(w[i-1]) = g[i]`` and row 0
reads ``w[0] = g[0]``.  On the finest level ``g[0]`` is the initial weight
vector and every other ``g[i]`` is zero, so forward substitution is plain
sequential training.

C-points are the step indices divisible by the coarsening factor ``m``.
Relaxation sweeps work interval by interval; intervals never share rows, so
they can be handed to a thread pool and the result does not depend on the
number of workers.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .network import _direction, init_weights
from .schedules import ConfigError, alpha_at, batch_at

logger = logging.getLogger(__name__)

CYCLES = ("two-level", "v", "f")
RELAXATIONS = ("f", "fcf")
COARSE_MODES = ("rediscretized", "exact_composition")


class Level:
    """One level of the hierarchy: step count, coarsening factor, learning
    rate, training policy and the ``w``/``g`` arrays."""

    def __init__(self, index, n_steps, m, alpha, policy, topology, finer=None, exact=False):
        self.index = index
        self.n_steps = n_steps
        self.m = m
        self.alpha = alpha
        self.policy = policy
        self.topology = topology
        self.finer = finer
        self.exact = exact
        s = topology.weight_count
        self.w = np.zeros((n_steps + 1, s))
        self.g = np.zeros((n_steps + 1, s))
        self.w_injected = None

    @property
    def N(self):
        return self.n_steps

    def c_points(self):
        return np.arange(0, self.n_steps + 1, self.m)

    def phi(self, i, w_in):
        if self.exact:
            # m fine steps m*i .. m*i+m-1, composed in order
            f = self.finer
            for j in range(self.m_finer):
                w_in = f.phi(self.m_finer * i + j, w_in)
            return w_in
        batch = batch_at(self.policy, self.index, i)
        return w_in + self.alpha * _direction(self.topology, w_in, batch)

    @property
    def m_finer(self):
        return self.finer.m

    def __repr__(self):
        return "Level(%d, N=%d, m=%d, alpha=%g%s)" % (
            self.index, self.n_steps, self.m, self.alpha, ", exact" if self.exact else "")


@dataclass
class Hierarchy:
    levels: list
    max_coarse: int
    relaxation: str = "fcf"
    cycle: str = "v"
    coarse_propagator_mode: str = "rediscretized"
    workers: int = 1

    @property
    def topology(self):
        return self.levels[0].topology

    @property
    def sizes(self):
        return [lev.n_steps for lev in self.levels]

    @property
    def n_levels(self):
        return len(self.levels)


@dataclass
class SolverParams:
    tol_coefficient: float = 1e-9
    max_iters: int = 50
    seed: int = 1
    init: str = "uniform"

    def tolerance(self, n0):
        return self.tol_coefficient * math.sqrt(n0)


@dataclass
class ConvergenceReport:
    iterations: int
    residual_norms: list
    rho: object
    converged: bool
    solution: np.ndarray = field(repr=False)
    tolerance: float = 0.0

    @property
    def iters_label(self):
        return str(self.iterations) if self.converged else "%d+" % self.iterations

    @property
    def rho_label(self):
        if not self.converged or self.rho is None:
            return "*"
        return "%.2f" % self.rho


def level_sizes(n0, m, max_coarse, two_level=False):
    if m < 2:
        raise ConfigError("coarsening factor m must be >= 2, got %d" % m)
    if max_coarse < 1:
        raise ConfigError("max_coarse must be >= 1, got %d" % max_coarse)
    if n0 < m:
        raise ConfigError("N0=%d is smaller than the coarsening factor m=%d" % (n0, m))
    sizes = [n0]
    if two_level:
        return [n0, n0 // m]
    while sizes[-1] > max_coarse and sizes[-1] >= m:
        sizes.append(sizes[-1] // m)
    return sizes


def build_hierarchy(topology, policy, n0, m=2, max_coarse=10, alpha_schedule=None,
                    cycle="v", relaxation="fcf", coarse_propagator_mode="rediscretized",
                    workers=1):
    """Levels by repeated floor division of ``n0`` until ``N <= max_coarse``.

    ``cycle="two-level"`` always gives exactly two levels.  In
    ``exact_composition`` mode every coarse step is the ``m``-fold composition
    of the finer propagator, which reproduces the fine solution at C-points.
    """
    if cycle not in CYCLES:
        raise ConfigError("cycle must be one of %s, got %r" % (CYCLES, cycle))
    if relaxation not in RELAXATIONS:
        raise ConfigError("relaxation must be one of %s, got %r" % (RELAXATIONS, relaxation))
    if coarse_propagator_mode not in COARSE_MODES:
        raise ConfigError("coarse propagator mode must be one of %s" % (COARSE_MODES,))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    if alpha_schedule is None:
        raise ConfigError("an alpha schedule is required")
    sizes = level_sizes(n0, m, max_coarse, two_level=(cycle == "two-level"))
    exact = coarse_propagator_mode == "exact_composition"
    levels = []
    for ell, n in enumerate(sizes):
        finer = levels[-1] if levels else None
        levels.append(Level(ell, n, m, alpha_at(alpha_schedule, ell), policy, topology,
                            finer=finer, exact=exact and finer is not None))
    return Hierarchy(levels, max_coarse, relaxation, cycle, coarse_propagator_mode, workers)


def phi_at(level, i, w_in):
    if not 0 <= i < level.n_steps:
        raise IndexError("step %d outside 0..%d" % (i, level.n_steps - 1))
    return level.phi(i, w_in)


def _map(pool, fn, items):
    if pool is None:
        for item in items:
            fn(item)
    else:
        # list() re-raises worker exceptions
        list(pool.map(fn, items))


def f_relax(level, pool=None):
    """Propagate from every C-point across its following F-points."""
    n, m, w, g = level.n_steps, level.m, level.w, level.g

    def sweep(c):
        for i in range(c + 1, min(c + m, n + 1)):
            w[i] = g[i] + level.phi(i - 1, w[i - 1])

    _map(pool, sweep, range(0, n + 1, m))


def c_relax(level, pool=None):
    """Update each C-point (except 0) from the F-point before it."""
    n, m, w, g = level.n_steps, level.m, level.w, level.g

    def update(c):
        w[c] = g[c] + level.phi(c - 1, w[c - 1])

    _map(pool, update, range(m, n + 1, m))


def fcf_relax(level, pool=None):
    f_relax(level, pool)
    c_relax(level, pool)
    f_relax(level, pool)


def relax(level, kind, pool=None):
    t0 = time.perf_counter()
    if kind == "fcf":
        fcf_relax(level, pool)
    else:
        f_relax(level, pool)
    logger.debug("level %d %s-relax %.2f ms", level.index, kind,
                 1e3 * (time.perf_counter() - t0))


def residual_rows(level, rows, pool=None):
    """Residual ``g - A(w)`` restricted to the given row indices."""
    rows = list(rows)
    w, g = level.w, level.g
    r = np.empty((len(rows), w.shape[1]))

    def row(k):
        i = rows[k]
        if i == 0:
            r[k] = g[0] - w[0]
        else:
            r[k] = g[i] - (w[i] - level.phi(i - 1, w[i - 1]))

    _map(pool, row, range(len(rows)))
    return r


def norm(r):
    # np.sum over a fixed-shape C-contiguous array reduces in a fixed order
    r = np.ascontiguousarray(r)
    return math.sqrt(float(np.sum(r * r)))


def residual(level, pool=None):
    """All residual rows and their Euclidean norm."""
    r = residual_rows(level, range(level.n_steps + 1), pool)
    return r, norm(r)


def sequential_solve(level):
    w, g = level.w, level.g
    w[0] = g[0]
    for i in range(1, level.n_steps + 1):
        w[i] = g[i] + level.phi(i - 1, w[i - 1])
    return w


def restrict_fas(fine, coarse, pool=None):
    """Inject C-point values and build the FAS right-hand side on ``coarse``."""
    cidx = fine.m * np.arange(coarse.n_steps + 1)
    r = residual_rows(fine, cidx, pool)
    coarse.w[:] = fine.w[cidx]
    coarse.w_injected = coarse.w.copy()
    wc, gc = coarse.w, coarse.g
    gc[0] = wc[0]

    def rhs(i):
        gc[i] = (wc[i] - coarse.phi(i - 1, wc[i - 1])) + r[i]

    _map(pool, rhs, range(1, coarse.n_steps + 1))
    return r


def coarse_correct(fine, coarse, pool=None):
    """Add the coarse error at C-points, then F-relax (ideal interpolation)."""
    cidx = fine.m * np.arange(coarse.n_steps + 1)
    e = coarse.w - coarse.w_injected
    fine.w[cidx] += e
    f_relax(fine, pool)


def _v_cycle(h, ell, pool):
    lev = h.levels[ell]
    if ell == h.n_levels - 1:
        sequential_solve(lev)
        return
    coarse = h.levels[ell + 1]
    relax(lev, h.relaxation, pool)
    restrict_fas(lev, coarse, pool)
    _v_cycle(h, ell + 1, pool)
    coarse_correct(lev, coarse, pool)


def _f_cycle(h, ell, pool):
    if ell >= h.n_levels - 2:
        _v_cycle(h, ell, pool)
        return
    lev, coarse = h.levels[ell], h.levels[ell + 1]
    relax(lev, h.relaxation, pool)
    restrict_fas(lev, coarse, pool)
    # coarse problem: an F-cycle followed by a V-cycle from the next level down
    _f_cycle(h, ell + 1, pool)
    _v_cycle(h, ell + 1, pool)
    coarse_correct(lev, coarse, pool)


def run_cycle(h, pool=None):
    """One iteration on the finest level (two-level and V share the V path)."""
    if h.cycle == "f":
        _f_cycle(h, 0, pool)
    else:
        _v_cycle(h, 0, pool)


def initialize(h, w0, initial_guess=None):
    fine = h.levels[0]
    fine.g[:] = 0.0
    fine.g[0] = w0
    if initial_guess is None:
        fine.w[:] = 0.0
    else:
        fine.w[:] = initial_guess
    fine.w[0] = w0


def conv_rate(residual_norms):
    """Geometric mean reduction ``(r_k / r_0) ** (1/k)``; None when undefined."""
    k = len(residual_norms) - 1
    if k < 1 or residual_norms[0] <= 0:
        return None
    return (residual_norms[-1] / residual_norms[0]) ** (1.0 / k)


def solve(h, params, w0=None, initial_guess=None):
    """Cycle until ``||r|| <= tol_coefficient * sqrt(N0)`` or ``max_iters``.

    ``residual_norms[0]`` is the residual of the initial guess and entry k
    the residual after k cycles.
    """
    if w0 is None:
        w0 = init_weights(h.topology, params.seed, params.init)
    initialize(h, w0, initial_guess)
    fine = h.levels[0]
    tol = params.tolerance(fine.n_steps)
    pool = ThreadPoolExecutor(h.workers) if h.workers > 1 else None
    try:
        _, rnorm = residual(fine, pool)
        norms = [rnorm]
        logger.info("iter %2d  ||r|| = %.6e", 0, rnorm)
        k = 0
        while rnorm > tol and k < params.max_iters:
            run_cycle(h, pool)
            k += 1
            _, rnorm = residual(fine, pool)
            norms.append(rnorm)
            logger.info("iter %2d  ||r|| = %.6e", k, rnorm)
        # interpolation already F-relaxed; repeat for the halting step
        f_relax(fine, pool)
    finally:
        if pool is not None:
            pool.shutdown()
    converged = rnorm <= tol
    return ConvergenceReport(k, norms, conv_rate(norms), converged, fine.w.copy(), tol)


def dump_checkpoint(w, path):
    """One line per step: index, then every weight with 17 significant digits."""
    with open(path, "w") as f:
        for i, row in enumerate(np.asarray(w)):
            f.write("%d %s\n" % (i, " ".join("%.17g" % v for v in row)))


def load_checkpoint(path):
    rows = []
    with open(path) as f:
        for expect, line in enumerate(f):
            parts = line.split()
            if int(parts[0]) != expect:
                raise ValueError("%s: step %s out of order" % (path, parts[0]))
            rows.append([float(v) for v in parts[1:]])
    return np.array(rows)
