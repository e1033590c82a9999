"""Sequential-cost model for MGRIT cycles and the speedup it allows.

Cost is counted in consecutive propagator applications that no amount of
parallelism can hide: 7 per cycle on the finest level (FCF relaxation plus
the FAS residual), 8 on each intermediate level (one more for interpolation)
and about 10 for the sequential solve on the coarsest level.
"""

import csv
import io
from dataclasses import dataclass


@dataclass(frozen=True)
class CostModelParams:
    level0_cost: int = 7
    coarser_cost: int = 8
    coarsest_cost: int = 10


DEFAULT_COSTS = CostModelParams()


def _check_levels(levels):
    if levels < 2:
        raise ValueError("the cost model needs at least 2 levels, got %d" % levels)


def sigma_v(levels, niter, costs=DEFAULT_COSTS):
    """Sequential applications for ``niter`` V-cycles over ``levels`` levels."""
    _check_levels(levels)
    if niter < 1:
        raise ValueError("niter must be >= 1")
    per_cycle = costs.level0_cost + costs.coarsest_cost + costs.coarser_cost * (levels - 2)
    return niter * per_cycle


def sigma_f(levels, niter, costs=DEFAULT_COSTS):
    """F-cycle cost: one V-cycle from each level above the coarsest pair
    upward, charged once per iteration.  Two levels cost what a V-cycle does."""
    _check_levels(levels)
    if niter < 1:
        raise ValueError("niter must be >= 1")
    if levels == 2:
        return sigma_v(2, niter, costs)
    return niter * sum(sigma_v(j, 1, costs) for j in range(2, levels))


def potential_speedup(n0, sigma):
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return n0 / sigma


def sigma_for(cycle, levels, niter, costs=DEFAULT_COSTS):
    if cycle == "f":
        return sigma_f(levels, niter, costs)
    return sigma_v(levels, niter, costs)


SPEEDUP_COLUMNS = ("N0", "levels", "niter", "cycle", "sigma", "speedup")


def speedup_rows(entries, costs=DEFAULT_COSTS):
    """``entries`` are ``(n0, levels, niter, cycle)``; returns dict rows."""
    rows = []
    for n0, levels, niter, cycle in entries:
        sigma = sigma_for(cycle, levels, niter, costs)
        rows.append({"N0": n0, "levels": levels, "niter": niter, "cycle": cycle,
                     "sigma": sigma, "speedup": potential_speedup(n0, sigma)})
    return rows


def format_speedup_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPEEDUP_COLUMNS)
    for r in rows:
        writer.writerow([r["N0"], r["levels"], r["niter"], r["cycle"], r["sigma"],
                         "%.6f" % r["speedup"]])
    return buf.getvalue()
