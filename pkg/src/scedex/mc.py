"""Synthetic panels with known tail behaviour, and Monte Carlo harnesses.

The simulator draws each day's station uniforms from a chosen copula
(independent, logistic, or comonotone) and maps them through marginals whose
upper tail is exactly generalized Pareto, modulated by a per-station
frequency function c(u, j):

    P(X_{i,j} > x) = c(i/n, j) * (1 - F0(x))        for x above a threshold,

where 1 - F0(x) = (1 + gamma x)^(-1/gamma) on its top decile and a uniform
filler carries the rest.  Everything about the tail (thresholds, quantiles,
pairwise tail copulas, limiting covariances) is therefore available in
closed form, so the harnesses can separate finite-threshold effects from
estimation error.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import RangeError, ScedexError, SimSpecError
from .gp_mle import fit_gp_pml, sigma_gamma0, fisher_info_inverse
from .panel import PanelSample
from . import trend_tests

TAIL_MASS = 0.1  # marginal mass carried by the exact GP tail

_DEPENDENCES = ("independent", "logistic", "comonotone")


# ---------------------------------------------------------------------------
# Tail copulas
# ---------------------------------------------------------------------------


def logistic_tail_copula(alpha: float) -> Callable:
    """The logistic-family tail copula R(x, y) = x + y - (x^(1/a) + y^(1/a))^a.

    ``alpha = 1`` gives tail independence (R = 0); ``alpha -> 0`` approaches
    complete dependence min(x, y).
    """
    if not 0 < alpha <= 1:
        raise RangeError(f"logistic parameter must lie in (0, 1], got {alpha}")

    def R(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x < 0) or np.any(y < 0):
            raise RangeError("tail copula arguments must be >= 0")
        out = x + y - (x ** (1.0 / alpha) + y ** (1.0 / alpha)) ** alpha
        out = np.maximum(out, 0.0)  # guard float dust at the boundary
        return float(out) if out.ndim == 0 else out

    return R


def _pair_tail_copula(dependence: str, alpha: float | None) -> Callable:
    if dependence == "independent":
        return lambda x, y: np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape) \
            if np.ndim(x) or np.ndim(y) else 0.0
    if dependence == "comonotone":
        return lambda x, y: np.minimum(x, y)
    return logistic_tail_copula(alpha)


# ---------------------------------------------------------------------------
# Simulation specification
# ---------------------------------------------------------------------------


def constant_scedasis(level: float = 1.0) -> Callable:
    return lambda u: np.full_like(np.asarray(u, dtype=float), float(level))


def linear_scedasis(start: float, end: float) -> Callable:
    return lambda u: start + (end - start) * np.asarray(u, dtype=float)


@dataclass(frozen=True)
class SimSpec:
    """Recipe for a synthetic panel.

    ``scedasis`` is one frequency function per station (u in [0, 1] ->
    positive level); None means constant 1 everywhere.  Functions are
    jointly rescaled at construction so their average integral is exactly 1,
    preserving the ratios between stations.
    """

    n: int
    m: int
    gamma: float
    dependence: str = "independent"
    alpha: float | None = None
    scedasis: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise SimSpecError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if self.gamma <= -0.5:
            raise SimSpecError(f"shape must exceed -1/2, got {self.gamma}")
        if self.dependence not in _DEPENDENCES:
            raise SimSpecError(
                f"dependence must be one of {_DEPENDENCES}, got {self.dependence!r}"
            )
        if self.dependence == "logistic":
            if self.alpha is None or not 0 < self.alpha <= 1:
                raise SimSpecError(
                    f"logistic dependence needs alpha in (0, 1], got {self.alpha}"
                )
        funcs = self.scedasis
        if funcs is None:
            funcs = tuple(constant_scedasis(1.0) for _ in range(self.m))
        else:
            funcs = tuple(funcs)
            if len(funcs) != self.m:
                raise SimSpecError(
                    f"expected {self.m} frequency functions, got {len(funcs)}"
                )
        integrals = np.array([quad(f, 0.0, 1.0, limit=200)[0] for f in funcs])
        if np.any(integrals <= 0):
            raise SimSpecError("every frequency function must have positive mass")
        rho = self.m / integrals.sum()

        grid = np.linspace(0.0, 1.0, 2001)
        levels = np.array([rho * np.asarray(f(grid), dtype=float) for f in funcs])
        if np.any(levels <= 0):
            raise SimSpecError("frequency functions must be strictly positive on [0, 1]")
        if levels.max() * TAIL_MASS > 1.0:
            raise SimSpecError(
                f"frequency level {levels.max():.3g} too extreme: the exact-tail "
                f"construction needs max level <= {1.0 / TAIL_MASS:.3g}"
            )
        normalized = tuple(
            (lambda u, _f=f, _r=rho: _r * np.asarray(_f(u), dtype=float)) for f in funcs
        )
        object.__setattr__(self, "scedasis", normalized)
        object.__setattr__(self, "_c1", tuple(rho * integrals / self.m))
        object.__setattr__(self, "_rho", float(rho))

    @property
    def c1(self) -> np.ndarray:
        """Exact per-station integrated frequencies C_j(1) (they sum to 1)."""
        return np.asarray(self._c1)

    # -- exact marginal quantities -----------------------------------------

    def tail_quantile(self, q) -> np.ndarray:
        """The exact marginal tail quantile Q0(q) (valid for q <= TAIL_MASS)."""
        q = np.asarray(q, dtype=float)
        if self.gamma == 0.0:
            return -np.log(q)
        return np.expm1(-self.gamma * np.log(q)) / self.gamma

    def intermediate_quantile(self, y) -> np.ndarray:
        """U0(y) = Q0(1/y): threshold with marginal exceedance mass 1/y."""
        return self.tail_quantile(1.0 / np.asarray(y, dtype=float))

    def scale_norm(self, y) -> float:
        """The exact scale normalisation a0(y) = y^gamma."""
        return float(y) ** self.gamma


def _positive_stable(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    """Positive stable draws with Laplace transform exp(-t^alpha) (Kanter)."""
    theta = rng.uniform(0.0, math.pi, size)
    w = rng.standard_exponential(size)
    a = (
        np.sin(alpha * theta) ** alpha
        * np.sin((1.0 - alpha) * theta) ** (1.0 - alpha)
        / np.sin(theta)
    ) ** (1.0 / (1.0 - alpha))
    return (a / w) ** ((1.0 - alpha) / alpha)


def _draw_uniforms(spec: SimSpec, rng: np.random.Generator) -> np.ndarray:
    """Per-day station uniforms whose lower joint tail realises the chosen
    tail copula."""
    n, m = spec.n, spec.m
    if spec.dependence == "comonotone":
        v = np.repeat(rng.random((n, 1)), m, axis=1)
    elif spec.dependence == "independent" or spec.alpha == 1.0:
        v = rng.random((n, m))
    else:
        s = _positive_stable(rng, spec.alpha, n)
        e = rng.standard_exponential((n, m))
        v = -np.expm1(-((e / s[:, None]) ** spec.alpha))  # 1 - Gumbel-copula uniform
    return np.maximum(v, 1e-300)


def simulate_panel(spec: SimSpec, replication: int = 0) -> PanelSample:
    """Draw one synthetic panel; deterministic given (seed, replication).

    Uses the Philox counter-based generator keyed by (seed, replication), so
    replications form independent substreams that can run in any order.
    """
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence((spec.seed, replication)))
    )
    n, m = spec.n, spec.m
    v = _draw_uniforms(spec, rng)

    u_rows = np.arange(1, n + 1) / n
    c_mat = np.column_stack([spec.scedasis[j](u_rows) for j in range(m)])
    tail_mass = c_mat * TAIL_MASS

    x0 = float(spec.tail_quantile(TAIL_MASS))
    is_tail = v <= tail_mass
    x = np.empty((n, m))
    q = np.where(is_tail, v / c_mat, TAIL_MASS)
    x_tail = spec.tail_quantile(q)
    frac = (v - tail_mass) / (1.0 - tail_mass)
    x = np.where(is_tail, x_tail, x0 * (1.0 - np.clip(frac, 0.0, 1.0)))

    return PanelSample(
        values=x,
        day_labels=np.datetime64("2000-01-01") + np.arange(n),
        station_ids=tuple(f"S{j + 1:02d}" for j in range(m)),
        missing_mask=np.zeros((n, m), dtype=bool),
    )


def analytic_r_lookup(spec: SimSpec, n_nodes: int = 200) -> Callable:
    """Exact pairwise tail-copula surfaces of a simulation spec.

    r(i, j; s, t) = (1/m) int_0^1 R(s c_i(u), t c_j(u)) du with the spec's
    closed-form pair copula (same-station pairs always use min).
    """
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_nodes)
    u = (gl_x + 1.0) / 2.0
    w = gl_w / 2.0
    R_cross = _pair_tail_copula(spec.dependence, spec.alpha)
    levels = [np.asarray(spec.scedasis[j](u), dtype=float) for j in range(spec.m)]

    def r(i: int, j: int, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        R = (lambda x, y: np.minimum(x, y)) if i == j else R_cross
        vals = R(s[..., None] * levels[i], t[..., None] * levels[j])
        out = vals @ w / spec.m
        return float(out) if out.ndim == 0 else out

    return r


def analytic_sigma(spec: SimSpec, j1: int, j2: int, s1: float, s2: float,
                   t1: float, t2: float) -> float:
    """Limiting covariance of the threshold-exceedance counts:
    (1/m) int_0^{t1 ^ t2} R(s1 c_{j1}(u), s2 c_{j2}(u)) du."""
    R = (lambda x, y: np.minimum(x, y)) if j1 == j2 else \
        _pair_tail_copula(spec.dependence, spec.alpha)
    upper = min(t1, t2)
    if upper <= 0:
        return 0.0
    val, _ = quad(
        lambda u: float(R(s1 * float(spec.scedasis[j1](u)),
                          s2 * float(spec.scedasis[j2](u)))) / spec.m,
        0.0, upper, limit=200,
    )
    return float(val)


# ---------------------------------------------------------------------------
# Harnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McReport:
    replications: int
    skipped: int
    rejection_rate: float | None = None
    monte_carlo_se: float | None = None
    summaries: dict = field(default_factory=dict)
    details: list = field(default_factory=list)


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SCEDEX_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _run_replications(fn: Callable, reps: int, threads: int | None) -> list:
    """Evaluate fn(rep) for rep = 0..reps-1; results indexed by rep so the
    aggregation is independent of completion order.  Domain errors yield
    None (counted as skipped)."""

    def guarded(rep: int):
        try:
            return fn(rep)
        except ScedexError:
            return None

    workers = _thread_count(threads)
    if workers == 1:
        return [guarded(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool_:
        return list(pool_.map(guarded, range(reps)))


def mc_test_size(
    spec: SimSpec,
    k: int,
    which: str = "space",
    reps: int = 500,
    level: float = 0.05,
    station: int = 0,
    threads: int | None = None,
) -> McReport:
    """Rejection rate of a trend test on simulated panels.

    Under a homogeneous spec this measures size; under a trending spec,
    power.  The time test is evaluated at ``station``.
    """
    if which not in ("space", "time"):
        raise RangeError(f"which must be 'space' or 'time', got {which!r}")
    if not 0 < level < 1:
        raise RangeError(f"level must lie in (0, 1), got {level}")

    def one(rep: int) -> float:
        panel = simulate_panel(spec, rep)
        if which == "space":
            res = trend_tests.space_test(panel, k)
        else:
            res = trend_tests.time_test(panel, k, station)
        return float(res.p_value < level)

    results = _run_replications(one, reps, threads)
    flags = np.array([r for r in results if r is not None])
    skipped = reps - flags.size
    if flags.size == 0:
        raise ScedexError("every replication failed; nothing to report")
    rate = float(flags.mean())
    se = math.sqrt(rate * (1.0 - rate) / flags.size)
    return McReport(
        replications=int(flags.size),
        skipped=int(skipped),
        rejection_rate=rate,
        monte_carlo_se=se,
        summaries={
            "level": level,
            "which": which,
            "degenerate": bool(rate in (0.0, 1.0)),
        },
    )


def mc_covariance_check(
    spec: SimSpec,
    k: int,
    pairs: Sequence[tuple],
    reps: int = 500,
    threads: int | None = None,
) -> McReport:
    """Empirical vs analytic covariance of tail exceedance counts.

    Each pair is ((j1, s1, t1), (j2, s2, t2)).  Counts use the simulator's
    exact intermediate quantiles as thresholds (the deterministic levels the
    limiting covariance is indexed by), so the scaled counts are compared
    directly against sigma(j1, j2; s1, s2, t1, t2) without the
    self-normalisation that an estimated threshold would introduce.
    """
    pairs = list(pairs)
    if not pairs:
        raise RangeError("need at least one coordinate pair")
    n, m = spec.n, spec.m
    N = n * m
    coords = sorted({cc for pair in pairs for cc in pair})
    for (j, s, t) in coords:
        if not 0 <= j < m:
            raise RangeError(f"station index {j} out of range for m={m}")
        if not 0 < t <= 1:
            raise RangeError(f"time fraction must lie in (0, 1], got {t}")
        if k * s / N > TAIL_MASS + 1e-12:
            raise RangeError(
                f"level s={s} leaves the exact-tail region (k*s/N = {k * s / N:.4g} "
                f"> {TAIL_MASS})"
            )
    thresholds = {cc: float(spec.intermediate_quantile(N / (k * cc[1]))) for cc in coords}

    def one(rep: int) -> np.ndarray:
        panel = simulate_panel(spec, rep)
        out = np.empty(len(coords))
        for a, (j, s, t) in enumerate(coords):
            cut = int(math.floor(n * t + 1e-9))
            out[a] = np.count_nonzero(panel.values[:cut, j] > thresholds[(j, s, t)]) / k
        return out

    results = _run_replications(one, reps, threads)
    vals = np.array([r for r in results if r is not None])
    skipped = reps - vals.shape[0]
    if vals.shape[0] < 3:
        raise ScedexError("too few successful replications for a covariance")
    centered = (vals - vals.mean(axis=0)) * math.sqrt(k)

    details = []
    index = {cc: a for a, cc in enumerate(coords)}
    for (c1, c2) in pairs:
        prod = centered[:, index[c1]] * centered[:, index[c2]]
        emp = float(prod.mean() * vals.shape[0] / (vals.shape[0] - 1))
        se = float(prod.std(ddof=1) / math.sqrt(prod.size))
        ana = analytic_sigma(spec, c1[0], c2[0], c1[1], c2[1], c1[2], c2[2])
        details.append({
            "pair": (c1, c2),
            "empirical": emp,
            "analytic": ana,
            "mc_se": se,
            "z": (emp - ana) / se if se > 0 else math.inf,
        })
    worst = max(abs(d["z"]) for d in details)
    return McReport(
        replications=int(vals.shape[0]),
        skipped=int(skipped),
        summaries={"max_abs_z": float(worst)},
        details=details,
    )


def mc_mle_variance(
    spec: SimSpec,
    k: int,
    reps: int = 300,
    threads: int | None = None,
) -> McReport:
    """Bias and scaled variance of the pooled GP fit against the sandwich
    prediction computed from the spec's exact tail-copula surfaces."""
    N = spec.n * spec.m
    if k / N > TAIL_MASS:
        raise RangeError(
            f"k/N = {k / N:.4g} leaves the exact-tail region (> {TAIL_MASS}); "
            "the fit would see the filler part of the marginal"
        )
    a0 = spec.scale_norm(N / k)

    def one(rep: int) -> np.ndarray:
        panel = simulate_panel(spec, rep)
        fit = fit_gp_pml(panel, k)
        return np.array([fit.gamma_hat, fit.scale_hat])

    results = _run_replications(one, reps, threads)
    vals = np.array([r for r in results if r is not None])
    skipped = reps - vals.shape[0]
    if vals.shape[0] < 3:
        raise ScedexError("too few successful replications to summarise")

    gammas = vals[:, 0]
    rel_scales = vals[:, 1] / a0 - 1.0
    k_var_gamma = float(k * gammas.var(ddof=1))
    k_var_scale = float(k * rel_scales.var(ddof=1))

    r_lookup = analytic_r_lookup(spec) if spec.m > 1 else None
    sigma, _ = sigma_gamma0(spec.gamma, spec.c1, r_lookup)
    inv = fisher_info_inverse(spec.gamma)
    sandwich = inv @ sigma @ inv
    rel_se = math.sqrt(2.0 / (vals.shape[0] - 1))  # relative MC error of a variance

    return McReport(
        replications=int(vals.shape[0]),
        skipped=int(skipped),
        summaries={
            "gamma_true": spec.gamma,
            "mean_gamma": float(gammas.mean()),
            "bias_gamma": float(gammas.mean() - spec.gamma),
            "k_var_gamma": k_var_gamma,
            "k_var_scale_rel": k_var_scale,
            "predicted_k_var_gamma": float(sandwich[0, 0]),
            "predicted_k_var_scale_rel": float(sandwich[1, 1]),
            "mc_rel_se_variance": rel_se,
        },
    )
