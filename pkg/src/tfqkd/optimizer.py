"""Capacity surfaces, the pulse-overlap functional, and width optimization.

The optimization is two-staged by default: the symbol width is chosen to
maximize the secret capacity (whose dependence on the conjugate width is
weak near the optimum), then the conjugate width is chosen to minimize the
overlap deviation between the symbol-pulse comb and the conjugate pulse,
which hardens the protocol against basis-discrimination strategies the
capacity model does not see.  A nested scheme that keeps the
capacity-maximizing conjugate width instead is available for comparison.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .channel import ProtocolParams, make_layout
from .errors import DomainError, NumericFailure
from .infotheory import CapacityReport, capacity
from .pulse_math import DEFAULT_ACCURACY, density_bin_mass

__all__ = [
    "OptimizerConfig",
    "SurfaceGrid",
    "OptimizationResult",
    "SweepEntry",
    "c_surface",
    "u_functional",
    "minimize_beta",
    "optimize_point",
    "sweep",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerConfig:
    """Search box, grid resolution, and scheme switches."""

    alpha_box: tuple[float, float] = (0.05, 1.5)
    beta_box: tuple[float, float] = (0.05, 1.5)
    coarse_step: float = 0.05
    tol: float = 1e-3
    accuracy: float = DEFAULT_ACCURACY
    u_variant: str = "per-term"
    scheme: str = "staged"
    threads: int = 1

    def __post_init__(self):
        if self.scheme not in ("staged", "nested"):
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.u_variant not in ("per-term", "whole-sum"):
            raise DomainError(f"unknown u variant {self.u_variant!r}")
        for name, (lo, hi) in (("alpha_box", self.alpha_box), ("beta_box", self.beta_box)):
            if not (0.0 < lo < hi):
                raise DomainError(f"{name} must satisfy 0 < lo < hi, got ({lo}, {hi})")
        if not self.coarse_step > 0.0 or not self.tol > 0.0:
            raise DomainError("coarse_step and tol must be positive")


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Capacity (and companions) sampled on an (alpha, beta) grid."""

    alpha_axis: np.ndarray
    beta_axis: np.ndarray
    capacity: np.ndarray
    i_ab: np.ndarray
    i_ae: np.ndarray
    qser: np.ndarray
    failures: tuple = ()


@dataclass(frozen=True)
class OptimizationResult:
    """Optimal widths for one (m, epsilon) pair plus the search evidence."""

    m: int
    epsilon: float
    alpha_opt: float
    beta_opt: float
    c_opt: float
    u_min: float
    report: CapacityReport
    scheme: str
    u_variant: str
    stage1_capacity: float
    trace: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class SweepEntry:
    m: int
    epsilon: float
    status: str
    result: OptimizationResult | None = None
    error: str | None = None


# ---------------------------------------------------------------------------
# Capacity surface
# ---------------------------------------------------------------------------

def _check_axis(name: str, axis: np.ndarray):
    if axis.size == 0 or axis[0] <= 0.0 or np.any(np.diff(axis) <= 0.0):
        raise DomainError(f"{name} must be strictly increasing and positive")


def c_surface(m, epsilon, alpha_axis, beta_axis, accuracy: float = DEFAULT_ACCURACY) -> SurfaceGrid:
    """Evaluate the capacity report on the outer product of the two axes."""
    alpha_axis = np.asarray(alpha_axis, dtype=float)
    beta_axis = np.asarray(beta_axis, dtype=float)
    _check_axis("alpha axis", alpha_axis)
    _check_axis("beta axis", beta_axis)
    shape = (alpha_axis.size, beta_axis.size)
    cap = np.full(shape, np.nan)
    ab = np.full(shape, np.nan)
    ae = np.full(shape, np.nan)
    qs = np.full(shape, np.nan)
    failures = []
    for i, alpha in enumerate(alpha_axis):
        for j, beta in enumerate(beta_axis):
            try:
                rep = capacity(ProtocolParams(m, alpha, beta, epsilon), accuracy)
            except NumericFailure as exc:  # recorded, never silently zeroed
                failures.append((i, j, str(exc)))
                continue
            cap[i, j] = rep.capacity
            ab[i, j] = rep.i_ab
            ae[i, j] = rep.i_ae
            qs[i, j] = rep.qser
    return SurfaceGrid(alpha_axis, beta_axis, cap, ab, ae, qs, tuple(failures))


# ---------------------------------------------------------------------------
# Overlap functional
# ---------------------------------------------------------------------------

def _gauss_cdf(t, mu, width):
    # CDF of the unit-mass density with 1/e half-width `width`
    return 0.5 * (1.0 + erf((t - mu) / width))


def _gauss_l1(mu1: float, w1: float, mu2: float, w2: float) -> float:
    """Exact L1 distance between two unit-mass Gaussian densities.

    Densities with unequal widths cross exactly twice, equal widths once;
    between crossings the difference keeps one sign, so the integral reduces
    to CDF differences at the crossings.
    """
    if w1 == w2:
        if mu1 == mu2:
            return 0.0
        tc = 0.5 * (mu1 + mu2)
        return 2.0 * abs(_gauss_cdf(tc, mu1, w1) - _gauss_cdf(tc, mu2, w2))
    # solve log rho1 = log rho2: quadratic in t with the width-ratio offset
    a = 1.0 / (w2 * w2) - 1.0 / (w1 * w1)
    b = 2.0 * (mu1 / (w1 * w1) - mu2 / (w2 * w2))
    c = mu2 * mu2 / (w2 * w2) - mu1 * mu1 / (w1 * w1) - math.log(w1 / w2)
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return 0.0
    r = math.sqrt(disc)
    t1, t2 = sorted(((-b - r) / (2.0 * a), (-b + r) / (2.0 * a)))
    d = (_gauss_cdf(t2, mu1, w1) - _gauss_cdf(t1, mu1, w1)) - (
        _gauss_cdf(t2, mu2, w2) - _gauss_cdf(t1, mu2, w2)
    )
    return 2.0 * abs(d)


def u_functional(
    m: int,
    alpha: float,
    beta: float,
    variant: str = "per-term",
    accuracy: float = 1e-10,
) -> float:
    """Overlap deviation between the symbol-pulse comb and the conjugate pulse.

    ``per-term`` (default) sums the L1 distance of each shifted symbol pulse
    to the centered conjugate pulse; ``whole-sum`` takes the absolute value
    outside the sum and is bounded above by the per-term value.  Both
    reduce to error-function expressions between sign changes of the
    density difference; ``accuracy`` bounds the crossing-location
    refinement.
    """
    params = ProtocolParams(m, alpha, beta)  # validates the inputs
    layout = make_layout(m)
    w_sym = params.symbol_sigma
    w_con = params.conjugate_sigma
    if variant == "per-term":
        return float(sum(_gauss_l1(c, w_sym, 0.0, w_con) for c in layout.centers))
    if variant != "whole-sum":
        raise DomainError(f"unknown u variant {variant!r}")

    centers = layout.centers
    sqrt_pi = math.sqrt(math.pi)

    def diff(t):
        comb = np.exp(-(((t - centers) / w_sym) ** 2)).sum() / (w_sym * sqrt_pi)
        return comb - m * math.exp(-((t / w_con) ** 2)) / (w_con * sqrt_pi)

    # locate every sign change of the difference; the scan step resolves the
    # narrower of the two density widths
    reach = 0.5 * m + 5.4 * max(w_sym, w_con)
    n_pts = int(min(max(4001, 40.0 * reach / min(w_sym, w_con)), 400_001))
    grid = np.linspace(-reach, reach, n_pts)
    comb = np.exp(-(((grid[:, None] - centers[None, :]) / w_sym) ** 2)).sum(axis=1) / (
        w_sym * sqrt_pi
    )
    values = comb - m * np.exp(-((grid / w_con) ** 2)) / (w_con * sqrt_pi)
    flips = np.nonzero(np.diff(np.signbit(values)))[0]
    roots = [
        brentq(diff, grid[i], grid[i + 1], xtol=min(accuracy, 1e-10))
        for i in flips
    ]

    # between crossings the sign is constant, so each piece is an exact
    # difference of cumulative masses
    cuts = [-np.inf] + roots + [np.inf]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        signed = sum(density_bin_mass(w_sym, c, lo, hi) for c in centers)
        signed -= m * density_bin_mass(w_con, 0.0, lo, hi)
        total += abs(signed)
    if not np.isfinite(total):
        raise NumericFailure("overlap functional produced a non-finite value")
    return float(total)


# ---------------------------------------------------------------------------
# Golden-section refinement (deterministic, ties toward smaller argument)
# ---------------------------------------------------------------------------

def _golden_min(fn, lo: float, hi: float, tol: float):
    """Minimize on [lo, hi]; returns the best evaluated point, preferring the
    smaller argument on exact ties."""
    evals: dict[float, float] = {}

    def f(x: float) -> float:
        if x not in evals:
            v = fn(x)
            if not np.isfinite(v):
                raise NumericFailure(f"non-finite objective value at {x}")
            evals[x] = v
        return evals[x]

    a, b = lo, hi
    f(a), f(b)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    while (b - a) > tol:
        if f(c) <= f(d):
            b, d = d, c
            c = b - _INVPHI * (b - a)
        else:
            a, c = c, d
            d = a + _INVPHI * (b - a)
    best = min(sorted(evals), key=lambda x: (evals[x], x))
    return best, evals[best], evals


def _axis(box: tuple[float, float], step: float) -> np.ndarray:
    lo, hi = box
    n = int(math.floor((hi - lo) / step + 0.5))
    axis = lo + step * np.arange(n + 1)
    return axis[axis <= hi + 1e-12]


# ---------------------------------------------------------------------------
# Optimization
# ---------------------------------------------------------------------------

def minimize_beta(
    m: int,
    alpha: float,
    variant: str = "per-term",
    search_box: tuple[float, float] = (0.05, 1.5),
    tol: float = 1e-3,
    coarse_step: float = 0.05,
) -> tuple[float, float]:
    """Conjugate width minimizing the overlap deviation at fixed ``alpha``.

    Coarse grid scan refined by golden section to ``tol``; exact ties break
    toward the smaller width.
    """
    lo, hi = search_box
    if not (0.0 < lo < hi):
        raise DomainError(f"search box must satisfy 0 < lo < hi, got ({lo}, {hi})")
    axis = _axis(search_box, coarse_step)
    values = np.array([u_functional(m, alpha, b, variant) for b in axis])
    if not np.all(np.isfinite(values)):
        raise NumericFailure("overlap functional produced non-finite values")
    k = int(np.argmin(values))  # first minimum = smallest beta on ties
    win_lo = axis[max(k - 1, 0)]
    win_hi = axis[min(k + 1, axis.size - 1)]
    if win_lo == win_hi:
        return float(axis[k]), float(values[k])
    beta_opt, u_min, _ = _golden_min(
        lambda b: u_functional(m, alpha, b, variant), win_lo, win_hi, tol
    )
    if values[k] < u_min or (values[k] == u_min and axis[k] < beta_opt):
        return float(axis[k]), float(values[k])
    return float(beta_opt), float(u_min)


def optimize_point(
    m: int,
    epsilon: float,
    config: OptimizerConfig = OptimizerConfig(),
) -> OptimizationResult:
    """Optimal (alpha, beta) for one (m, epsilon) pair.

    Stage 1 maximizes the capacity over alpha (objective: best capacity over
    the beta grid), coarse grid plus golden-section refinement, ties toward
    smaller alpha.  Stage 2 picks beta: from the overlap functional in the
    ``staged`` scheme, from the capacity itself in the ``nested`` scheme.
    A capacity that is zero over the whole grid short-circuits to the
    smallest alpha of the plateau.
    """
    alpha_axis = _axis(config.alpha_box, config.coarse_step)
    beta_axis = _axis(config.beta_box, config.coarse_step)
    trace: list[tuple[float, float, float]] = []
    cache: dict[tuple[float, float], float] = {}

    def cap_at(alpha: float, beta: float) -> float:
        key = (alpha, beta)
        if key not in cache:
            rep = capacity(ProtocolParams(m, alpha, beta, epsilon), config.accuracy)
            cache[key] = rep.capacity
            trace.append((alpha, beta, rep.capacity))
        return cache[key]

    def row_max(alpha: float) -> float:
        if config.scheme == "nested":
            vals = [cap_at(alpha, b) for b in beta_axis]
            k = int(np.argmax(vals))
            w_lo = beta_axis[max(k - 1, 0)]
            w_hi = beta_axis[min(k + 1, beta_axis.size - 1)]
            if w_lo == w_hi:
                return vals[k]
            _, neg_best, _ = _golden_min(lambda b: -cap_at(alpha, b), w_lo, w_hi, config.tol)
            return max(-neg_best, vals[k])
        return max(cap_at(alpha, b) for b in beta_axis)

    grid_best = np.array([row_max(a) for a in alpha_axis])
    grid_max = float(grid_best.max())

    if grid_max <= 0.0:
        # zero-capacity plateau: report its smallest alpha
        alpha_opt = float(alpha_axis[0])
        stage1_c = 0.0
    else:
        i_hat = int(np.argmax(grid_best))  # first max = smallest alpha on ties
        win_lo = alpha_axis[max(i_hat - 1, 0)]
        win_hi = alpha_axis[min(i_hat + 1, alpha_axis.size - 1)]
        alpha_ref, neg_ref, _ = _golden_min(lambda a: -row_max(a), win_lo, win_hi, config.tol)
        stage1_c = -neg_ref
        alpha_opt = float(alpha_ref)
        if grid_max > stage1_c or (grid_max == stage1_c and alpha_axis[i_hat] < alpha_opt):
            alpha_opt = float(alpha_axis[i_hat])
            stage1_c = grid_max

    if config.scheme == "staged":
        beta_opt, u_min = minimize_beta(
            m, alpha_opt, config.u_variant, config.beta_box, config.tol, config.coarse_step
        )
    else:
        vals = [cap_at(alpha_opt, b) for b in beta_axis]
        k = int(np.argmax(vals))
        w_lo = beta_axis[max(k - 1, 0)]
        w_hi = beta_axis[min(k + 1, beta_axis.size - 1)]
        if w_lo == w_hi:
            beta_opt = float(beta_axis[k])
        else:
            beta_ref, neg_best, _ = _golden_min(
                lambda b: -cap_at(alpha_opt, b), w_lo, w_hi, config.tol
            )
            beta_opt = float(beta_ref)
            if vals[k] > -neg_best or (vals[k] == -neg_best and beta_axis[k] < beta_opt):
                beta_opt = float(beta_axis[k])
        u_min = u_functional(m, alpha_opt, beta_opt, config.u_variant)

    report = capacity(ProtocolParams(m, alpha_opt, beta_opt, epsilon), config.accuracy)
    return OptimizationResult(
        m=int(m),
        epsilon=float(epsilon),
        alpha_opt=alpha_opt,
        beta_opt=float(beta_opt),
        c_opt=report.capacity,
        u_min=float(u_min),
        report=report,
        scheme=config.scheme,
        u_variant=config.u_variant,
        stage1_capacity=float(stage1_c),
        trace=tuple(trace),
    )


def sweep(ms, epsilons, config: OptimizerConfig = OptimizerConfig()) -> list[SweepEntry]:
    """One optimization per (m, epsilon) pair, m outer, epsilon inner.

    Failures are recorded per point and do not stop the sweep.  Points are
    independent, so they may be evaluated by a thread pool; the output order
    is fixed by the input order, never by completion order.
    """
    ms = list(ms)
    epsilons = list(epsilons)
    if not ms or not epsilons:
        raise DomainError("sweep needs at least one m and one epsilon")
    points = [(int(m), float(e)) for m in ms for e in epsilons]

    def run(point):
        m, eps = point
        try:
            return SweepEntry(m, eps, "ok", result=optimize_point(m, eps, config))
        except (DomainError, NumericFailure) as exc:
            return SweepEntry(m, eps, "failed", error=str(exc))

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(run, points))
    return [run(p) for p in points]
