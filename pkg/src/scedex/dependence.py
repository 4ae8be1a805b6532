"""Cross-station tail dependence: empirical tail-copula integrals.

The central object is the matrix of joint exceedance frequencies at the
pooled threshold, which doubles as the covariance estimate used to
studentise the spatial homogeneity test, plus a gridded version used as a
plug-in when integrating limiting covariances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import RangeError
from .panel import PanelSample
from .tail import PooledOrderStatistics, check_k, global_threshold, pool


@dataclass(frozen=True)
class TailCopulaEstimate:
    """One joint exceedance frequency at levels (s1, s2) up to time t."""

    j1: int
    j2: int
    s1: float
    s2: float
    t: float
    value: float


@dataclass(frozen=True)
class TailDependenceMatrix:
    """Joint exceedance counts at the pooled threshold, divided by ``divisor``.

    The diagonal coincides exactly with the per-station scedasis curve values
    at t = 1; an off-diagonal entry never exceeds the smaller of the two
    diagonals involved.
    """

    entries: np.ndarray
    k: int
    divisor: int
    tie_count: int

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float).copy()
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])


def _exceed_matrix(p: PanelSample, thr: float) -> np.ndarray:
    filled = np.where(p.missing_mask, -np.inf, p.values)
    return filled > thr


def tail_copula_integral(
    p: PanelSample,
    k: int,
    j1: int,
    j2: int,
    s1: float = 1.0,
    s2: float = 1.0,
    t: float = 1.0,
    pooled: PooledOrderStatistics | None = None,
) -> TailCopulaEstimate:
    """Joint exceedance frequency of stations ``j1`` and ``j2``.

    Counts days ``i <= floor(n t)`` on which station ``j1`` strictly exceeds
    the pooled order statistic at level ``floor(k s1)`` while ``j2`` exceeds
    the one at level ``floor(k s2)``, divided by ``k``.
    """
    o = pooled if pooled is not None else pool(p)
    k = check_k(k, o.n_effective)
    for j in (j1, j2):
        if not 0 <= j < p.m:
            raise RangeError(f"station index {j} out of range for m={p.m}")
    if not 0 <= t <= 1:
        raise RangeError(f"t must lie in [0, 1], got {t}")
    n_eff = o.n_effective
    levels = []
    for s in (s1, s2):
        ks = int(np.floor(k * s + 1e-9))
        if not 1 <= ks < n_eff:
            raise RangeError(
                f"s={s} gives floor(k*s)={ks}, need 1 <= floor(k*s) < {n_eff}"
            )
        levels.append(ks)
    thr1 = float(o.values[n_eff - levels[0] - 1])
    thr2 = float(o.values[n_eff - levels[1] - 1])

    cut = int(np.floor(p.n * t + 1e-9))
    col1 = np.where(p.missing_mask[:cut, j1], -np.inf, p.values[:cut, j1])
    col2 = np.where(p.missing_mask[:cut, j2], -np.inf, p.values[:cut, j2])
    count = int(np.count_nonzero((col1 > thr1) & (col2 > thr2)))
    return TailCopulaEstimate(j1=j1, j2=j2, s1=s1, s2=s2, t=t, value=count / k)


def sigma1_matrix(
    p: PanelSample,
    k: int,
    renormalize: bool = False,
    pooled: PooledOrderStatistics | None = None,
) -> TailDependenceMatrix:
    """All pairwise joint exceedance frequencies at the pooled threshold.

    With ``renormalize`` the realised exceedance count replaces ``k`` as the
    divisor, which restores the exact row-sum identity when the threshold is
    tied.
    """
    o = pooled if pooled is not None else pool(p)
    k = check_k(k, o.n_effective)
    thr = global_threshold(o, k)
    E = _exceed_matrix(p, thr).astype(np.float64)
    total = int(o.n_effective - np.searchsorted(o.values, thr, side="right"))
    tie_count = k - total
    divisor = total if renormalize else k
    entries = (E.T @ E) / divisor
    return TailDependenceMatrix(entries=entries, k=k, divisor=divisor, tie_count=tie_count)


# ---------------------------------------------------------------------------
# Gridded tail-copula plug-in (for covariance quadrature)
# ---------------------------------------------------------------------------


class EmpiricalTailDependence:
    """Tail-copula surfaces r(j1, j2; s, t) on a geometric level grid.

    Values are joint exceedance counts at pooled order-statistic thresholds,
    divided by ``k``, on a ``grid_size`` x ``grid_size`` geometric grid over
    [1/k, 1]; queries interpolate bilinearly, decaying linearly to 0 below
    the smallest grid level (the surface vanishes at s = 0 or t = 0).
    """

    def __init__(self, p: PanelSample, k: int, grid_size: int = 64,
                 pooled: PooledOrderStatistics | None = None):
        o = pooled if pooled is not None else pool(p)
        k = check_k(k, o.n_effective)
        self.k = k
        self.m = p.m
        self.grid_size = G = int(grid_size)
        if G < 2:
            raise RangeError("grid_size must be >= 2")

        s_nodes = np.geomspace(1.0 / k, 1.0, G)
        ks = np.clip(np.floor(k * s_nodes + 1e-9).astype(int), 1, o.n_effective - 1)
        thresholds = o.values[o.n_effective - ks - 1]  # non-increasing in the grid index

        # Observation i exceeds grid level a  <=>  value > thresholds[a].
        # With thresholds non-increasing, that set of levels is [e, G) where
        # e = G - #{thresholds < value}.
        thr_asc = thresholds[::-1]
        filled = np.where(p.missing_mask, -np.inf, p.values)
        self._first_level = G - np.searchsorted(thr_asc, filled, side="left")
        self._s_nodes = s_nodes
        self._counts: dict[tuple[int, int], np.ndarray] = {}
        self._interp: dict[tuple[int, int], RegularGridInterpolator] = {}

        self.c1 = _exceed_matrix(p, global_threshold(o, k)).sum(axis=0) / k

    def _pair_grid(self, i: int, j: int) -> np.ndarray:
        """counts[a, b] = (1/k) #{rows exceeding level a at i and level b at j}."""
        key = (min(i, j), max(i, j))
        if key not in self._counts:
            G = self.grid_size
            ei = self._first_level[:, key[0]]
            ej = self._first_level[:, key[1]]
            hist, _, _ = np.histogram2d(ei, ej, bins=[np.arange(G + 2), np.arange(G + 2)])
            cdf = np.cumsum(np.cumsum(hist, axis=0), axis=1)
            # row exceeds (a, b) jointly <=> e_i <= a and e_j <= b
            self._counts[key] = cdf[:G, :G] / self.k
        grid = self._counts[key]
        return grid if (i, j) == key else grid.T

    def r(self, i: int, j: int, s, t):
        """Interpolated tail-copula surface value(s) r_{ij}(s, t)."""
        key = (i, j)
        if key not in self._interp:
            vals = self._pair_grid(i, j)
            nodes = np.concatenate(([0.0], self._s_nodes))
            padded = np.zeros((nodes.size, nodes.size))
            padded[1:, 1:] = vals
            self._interp[key] = RegularGridInterpolator(
                (nodes, nodes), padded, method="linear", bounds_error=False, fill_value=None
            )
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        pts = np.stack(np.broadcast_arrays(s, t), axis=-1)
        scalar = pts.ndim == 1
        out = self._interp[key](pts[None] if scalar else pts)
        return float(out[0]) if scalar else out
