"""Parameter estimation for fractional stable distributions.

Two estimators live here.  The logarithmic-moment estimator is closed form
and serves as the starting point.  The chi-square fit minimizes the
chi-square distance between the sample histogram and a simulated model
histogram with Hooke-Jeeves, behind an exponential penalty wall that keeps
the search inside the admissible domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import zeta

from .errors import DomainError, EstimationError
from .fsd import FsdParams, fsd_from_uniforms
from .gof import Histogram, build_histogram, cell_probabilities, chi2_distance
from .optimize import SearchConfig, SearchTrace, hooke_jeeves, penalized_objective, penalty
from .stable import RngStream, theta_bound, uniform_open_closed

__all__ = [
    "LogMoments",
    "FitResult",
    "log_moments",
    "estimate_moments",
    "project_to_domain",
    "penalty_factor",
    "default_window",
    "ChiSquareObjective",
    "fit_chi2",
]

ZETA3 = float(zeta(3.0))
EULER_GAMMA = 0.5772156649015329

# interior floors used when a point has to be pulled into the open domain
ALPHA_FLOOR = 0.05
BETA_FLOOR = 0.05
LAMBDA_FLOOR = 1e-12


@dataclass(frozen=True)
class LogMoments:
    U: float
    V: float
    M: float
    A: float
    n: int


def log_moments(sample) -> LogMoments:
    z = np.asarray(sample, dtype=float).ravel()
    if z.size == 0:
        raise DomainError("log moments need a nonempty sample")
    zero = np.flatnonzero(z == 0.0)
    if zero.size:
        raise DomainError(f"log moments are undefined for zero values (first at position {zero[0]})")
    lz = np.log(np.abs(z))
    U = float(lz.mean())
    c = lz - U
    V = float(np.mean(c**2))
    M = float(np.mean(c**3))
    A = float(np.cbrt(1.0 + M / (2.0 * ZETA3)))
    return LogMoments(U, V, M, A, int(z.size))


def project_to_domain(point) -> tuple[float, float, float, float]:
    """Coordinate-wise projection of ``(alpha, beta, theta, lam)`` into the admissible domain.

    The theta bound is taken at the projected alpha.  Open boundaries
    (alpha = 0, beta = 0, lam = 0) are replaced by small interior floors.
    """
    a, b, t, lam = (float(v) for v in point)
    a = min(max(a, ALPHA_FLOOR), 2.0)
    b = min(max(b, BETA_FLOOR), 1.0)
    tb = theta_bound(a)
    t = min(max(t, -tb), tb)
    lam = max(lam, LAMBDA_FLOOR)
    return a, b, t, lam


def penalty_factor(point, A: float) -> tuple[bool, float]:
    """Whether ``point`` is admissible, and the product of per-parameter penalties."""
    a, b, t, lam = (float(v) for v in point)
    factor = 1.0
    inside_all = True

    def account(inside, value, bound):
        nonlocal factor, inside_all
        if not inside:
            inside_all = False
            factor *= penalty(value, bound, False, A)

    account(0.0 < a <= 2.0, a, 2.0 if a > 2.0 else 0.0)
    account(0.0 < b <= 1.0, b, 1.0 if b > 1.0 else 0.0)
    tb = theta_bound(min(max(a, ALPHA_FLOOR), 2.0))
    account(abs(t) <= tb, t, math.copysign(tb, t))
    account(lam > 0.0, lam, 0.0)
    return inside_all, min(factor, 1e300)


def estimate_moments(sample, raw: bool = False):
    """Logarithmic-moment estimates of ``(alpha, beta, theta, lam)``.

    ``theta`` comes from the sign balance, ``alpha`` from the log variance,
    ``beta / alpha`` from the third log cumulant and ``lam`` from the log mean.
    The returned :class:`FsdParams` is projected into the admissible domain;
    ``raw=True`` also returns the unprojected tuple.
    """
    z = np.asarray(sample, dtype=float).ravel()
    if z.size < 4:
        raise DomainError(f"moment estimation needs at least 4 observations, got {z.size}")
    lm = log_moments(z)
    theta = 1.0 - 2.0 * np.count_nonzero(z < 0) / z.size
    radicand = 12.0 * lm.V + math.pi**2 * (2.0 * lm.A**2 + 3.0 * theta**2 - 1.0)
    if not radicand > 0.0:
        raise EstimationError(f"negative radicand {radicand:.6g} in the alpha estimate")
    alpha = 2.0 * math.pi / math.sqrt(radicand)
    beta = lm.A * alpha
    # log|Z| has mean (ln lam)/alpha + C (beta/alpha - 1)
    lam = math.exp(alpha * (lm.U - EULER_GAMMA * (lm.A - 1.0)))
    est = FsdParams(*project_to_domain((alpha, beta, theta, lam)))
    if raw:
        return est, (alpha, beta, theta, lam)
    return est


def default_window(sample, upper_quantile: float = 0.99) -> tuple[float, float]:
    """``[smallest positive observation, upper quantile]``."""
    z = np.asarray(sample, dtype=float)
    pos = z[z > 0]
    if pos.size == 0:
        raise DomainError("sample has no positive observations for the default window")
    return float(pos.min()), float(np.quantile(z, upper_quantile))


class ChiSquareObjective:
    """Chi-square distance to a histogram as a deterministic function of the parameters.

    Model cell probabilities come from ``mc_size`` FSD draws produced from a
    fixed block of uniforms (common random numbers), so repeated calls at the
    same point return the same value.  Points outside the domain are evaluated
    at their projection and penalized.
    """

    def __init__(self, hist: Histogram, mc_size: int, rng: RngStream, A: float = 100.0, conditional: bool = True):
        if mc_size < 10_000:
            raise DomainError(f"mc_size must be at least 1e4, got {mc_size}")
        self.hist = hist
        self.mc_size = int(mc_size)
        self.A = A
        self.conditional = conditional
        self.uniforms = uniform_open_closed(rng.generator(), (4, self.mc_size))

    def probabilities(self, p: FsdParams) -> np.ndarray:
        z = fsd_from_uniforms(p, self.uniforms)
        return cell_probabilities(z, self.hist, conditional=self.conditional)

    def distance(self, p: FsdParams) -> float:
        try:
            probs = self.probabilities(p)
        except DomainError:
            # no simulated mass in the window at all
            return math.inf
        n = None if self.conditional else self.hist.sample_size
        return chi2_distance(self.hist, probs, n)

    def __call__(self, point) -> float:
        inside, factor = penalty_factor(point, self.A)
        d = self.distance(FsdParams(*project_to_domain(point)))
        return penalized_objective(d, inside, factor)


@dataclass
class FitResult:
    params: FsdParams
    objective: float
    initial_params: FsdParams
    initial_objective: float
    trace: SearchTrace
    window: tuple[float, float]
    hist: Histogram
    used_fallback_start: bool = False
    notes: list[str] = field(default_factory=list)
    search_point: tuple[float, ...] | None = None


def fit_chi2(
    sample,
    window=None,
    bins: int = 40,
    binning: str = "log",
    mc_size: int = 100_000,
    rng: RngStream = RngStream(0),
    cfg: SearchConfig | None = None,
    start=None,
    conditional: bool = True,
    free=(True, True, True, True),
) -> FitResult:
    """Fit FSD parameters by minimizing the penalized chi-square distance.

    ``start`` may be an :class:`FsdParams`, a raw 4-vector (possibly outside
    the admissible domain) or ``None`` for the moment estimate.  ``free``
    masks which of ``(alpha, beta, theta, lam)`` are searched; the others stay
    at their starting values.

    The search may end at a point marginally outside the domain, where the
    penalty grows only linearly.  Its projection has a distance no larger than
    the penalized value there, so the projection is what gets returned; the
    raw search point is kept in ``search_point``.
    """
    z = np.asarray(sample, dtype=float).ravel()
    if window is None:
        window = default_window(z)
    hist = build_histogram(z, window, bins, binning)
    if hist.total == 0:
        raise DomainError(f"no observations fall inside the window {window}")

    notes = []
    fallback = False
    if start is None:
        try:
            start = estimate_moments(z[z != 0.0])
        except (EstimationError, DomainError) as exc:
            fallback = True
            scale = float(np.median(np.abs(z[z != 0.0]))) if np.any(z != 0.0) else 1.0
            start = FsdParams(1.0, 0.9, 1.0, scale)
            notes.append(f"moment estimator failed ({exc}); started from {start.astuple()}")

    if isinstance(start, FsdParams):
        x0 = np.array(start.astuple(), dtype=float)
    else:
        x0 = np.asarray(start, dtype=float).ravel()
        if x0.shape != (4,) or not np.all(np.isfinite(x0)):
            raise DomainError("start must be four finite numbers (alpha, beta, theta, lam)")
        start = FsdParams(*project_to_domain(x0))

    free = np.asarray(free, dtype=bool)
    if free.shape != (4,) or not free.any():
        raise DomainError("free must mark at least one of the four parameters")
    if cfg is None:
        cfg = SearchConfig(initial_steps=(0.1, 0.1, 0.1, 0.1 * start.lam))
    if len(cfg.initial_steps) == 4 and not free.all():
        cfg = replace(cfg, initial_steps=tuple(np.asarray(cfg.initial_steps)[free]))

    obj = ChiSquareObjective(hist, mc_size, rng, cfg.penalty_A, conditional)

    def reduced(v):
        x = x0.copy()
        x[free] = v
        return obj(x)

    f0 = obj(x0)
    vbest, _, trace = hooke_jeeves(reduced, x0[free], cfg)
    xbest = x0.copy()
    xbest[free] = vbest
    params = FsdParams(*project_to_domain(xbest))
    final = obj.distance(params)
    return FitResult(
        params,
        final,
        start,
        f0,
        trace,
        (float(window[0]), float(window[1])),
        hist,
        fallback,
        notes,
        tuple(float(v) for v in xbest),
    )
