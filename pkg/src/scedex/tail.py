"""Pooled order statistics and the tail empirical / tail quantile processes.

All stations are pooled into one sample of size ``n_effective``; thresholds
are order statistics of the pool.  Exceedances are always strict (``>``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyPoolError, RangeError
from .panel import PanelSample


@dataclass(frozen=True)
class PooledOrderStatistics:
    """The pooled sample sorted ascending, with provenance.

    ``day_index[r]`` / ``station_index[r]`` give the (row, column) of the
    r-th smallest pooled value.  Ties sort stably by (day, station).
    """

    values: np.ndarray
    day_index: np.ndarray
    station_index: np.ndarray

    def __post_init__(self):
        for name in ("values", "day_index", "station_index"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.values.ndim != 1 or self.values.size == 0:
            raise EmptyPoolError("pooled sample is empty")
        if self.day_index.shape != self.values.shape or self.station_index.shape != self.values.shape:
            raise RangeError("provenance arrays must match the pooled values in length")

    @property
    def n_effective(self) -> int:
        return int(self.values.size)


def pool(p: PanelSample) -> PooledOrderStatistics:
    """Pool all non-missing observations of the panel and sort ascending."""
    obs = ~p.missing_mask
    if not obs.any():
        raise EmptyPoolError("panel has no non-missing observations")
    day_idx, stat_idx = np.nonzero(obs)
    vals = p.values[day_idx, stat_idx]
    # Primary key value, then day, then station: a deterministic total order.
    order = np.lexsort((stat_idx, day_idx, vals))
    return PooledOrderStatistics(
        values=vals[order], day_index=day_idx[order], station_index=stat_idx[order]
    )


def check_k(k: int, n_effective: int) -> int:
    """Validate an intermediate-sequence value ``k`` (1 <= k < n_effective)."""
    k = int(k)
    if not 1 <= k < n_effective:
        raise RangeError(f"k must satisfy 1 <= k < n_effective={n_effective}, got {k}")
    return k


def global_threshold(o: PooledOrderStatistics, k: int) -> float:
    """The pooled threshold: the (n_effective - k)-th smallest pooled value."""
    k = check_k(k, o.n_effective)
    return float(o.values[o.n_effective - k - 1])


def _threshold_at_level(o: PooledOrderStatistics, ks_floor: int) -> float:
    """Order statistic with ``ks_floor`` pooled points strictly above-or-at it.

    ``ks_floor = 0`` maps to the pooled maximum, matching the convention that
    the tail quantile at levels below one exceedance is the sample maximum.
    """
    n = o.n_effective
    if not 0 <= ks_floor < n:
        raise RangeError(f"floor(k*s) must lie in [0, {n}), got {ks_floor}")
    return float(o.values[n - ks_floor - 1])


def _validate_grid(grid: np.ndarray, name: str) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise RangeError(f"{name} must be a non-empty 1-D grid")
    if np.any(np.diff(grid) < 0):
        raise RangeError(f"{name} must be sorted ascending")
    return grid


def tail_empirical_process(
    p: PanelSample,
    k: int,
    j: int,
    s_grid,
    t_grid,
    pooled: PooledOrderStatistics | None = None,
) -> np.ndarray:
    """Exceedance-frequency surface for station ``j``.

    Entry ``(a, b)`` counts days ``i <= floor(n * t_grid[b])`` on which
    station ``j`` strictly exceeds the pooled order statistic at level
    ``floor(k * s_grid[a])``, divided by ``k``.
    """
    o = pooled if pooled is not None else pool(p)
    k = check_k(k, o.n_effective)
    if not 0 <= j < p.m:
        raise RangeError(f"station index {j} out of range for m={p.m}")
    s_grid = _validate_grid(s_grid, "s_grid")
    t_grid = _validate_grid(t_grid, "t_grid")
    if s_grid[0] <= 0:
        raise RangeError("s_grid must be strictly positive")
    if t_grid[0] < 0 or t_grid[-1] > 1:
        raise RangeError("t_grid must lie in [0, 1]")

    n = p.n
    col = np.where(p.missing_mask[:, j], -np.inf, p.values[:, j])
    # 1e-9 guards floor() against representation error at exact grid points.
    t_cut = np.floor(n * t_grid + 1e-9).astype(int)

    out = np.empty((s_grid.size, t_grid.size), dtype=float)
    for a, s in enumerate(s_grid):
        ks = int(np.floor(k * s + 1e-9))
        if ks >= o.n_effective:
            raise RangeError(
                f"s={s} gives floor(k*s)={ks} >= n_effective={o.n_effective}"
            )
        thr = _threshold_at_level(o, ks)
        cum = np.concatenate(([0], np.cumsum(col > thr)))
        out[a] = cum[t_cut] / k
    return out


def tail_quantile_process(
    p: PanelSample,
    k: int,
    s_grid,
    pooled: PooledOrderStatistics | None = None,
) -> np.ndarray:
    """Pooled tail quantiles relative to the global threshold.

    Returns an array of rows ``(s, X_{N - floor(k s):N} - X_{N-k:N})`` for
    ``s`` in ``s_grid``; admissible levels are ``1/(2k) <= s < n_effective/k``
    (levels below one exceedance hit the pooled maximum).
    """
    o = pooled if pooled is not None else pool(p)
    k = check_k(k, o.n_effective)
    s_grid = _validate_grid(s_grid, "s_grid")
    lo = 1.0 / (2 * k)
    hi = o.n_effective / k
    if s_grid[0] < lo - 1e-12 or s_grid[-1] >= hi:
        raise RangeError(
            f"s_grid must lie in [{lo}, {hi}) = [1/(2k), n_effective/k)"
        )
    base = global_threshold(o, k)
    out = np.empty((s_grid.size, 2), dtype=float)
    for a, s in enumerate(s_grid):
        ks = int(np.floor(k * s + 1e-9))
        out[a, 0] = s
        out[a, 1] = _threshold_at_level(o, ks) - base
    return out
