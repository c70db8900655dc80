"""Fractional stable distributions.

A fractional stable variable is ``Z = lam**(1/alpha) * Y * S**(-beta/alpha)``,
where ``Y`` is standard strictly stable with ``(alpha, theta)`` and ``S`` is an
independent positive stable variable with Laplace transform ``exp(-k**beta)``.
At ``beta = 1`` the mixing variable is the constant 1 and ``Z`` is strictly
stable.  The density is the scale mixture

    q(x) = int_0^inf g(x y**(beta/alpha); alpha, theta, lam) g(y; beta, 1, 1) y**(beta/alpha) dy.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError
from .stable import (
    RngStream,
    StableDensity,
    StableParams,
    as_generator,
    one_sided_from_uniforms,
    stable_from_uniforms,
    stable_pdf,
    theta_bound,
    uniform_open_closed,
)

__all__ = [
    "FsdParams",
    "MixingSample",
    "SpecialCase",
    "fsd_from_uniforms",
    "sample_fsd",
    "make_mixing_sample",
    "fsd_pdf",
    "fsd_pdf_mc",
    "special_case_of",
]

DEFAULT_MIXING_SIZE = 100_000


@dataclass(frozen=True)
class FsdParams:
    alpha: float
    beta: float
    theta: float
    lam: float = 1.0

    def __post_init__(self):
        problems = violations(self.alpha, self.beta, self.theta, self.lam)
        if problems:
            raise DomainError("; ".join(problems))

    @property
    def stable(self) -> StableParams:
        return StableParams(self.alpha, self.theta, self.lam)

    def astuple(self):
        return (self.alpha, self.beta, self.theta, self.lam)


def violations(alpha, beta, theta, lam) -> list[str]:
    """Human-readable list of the admissible-domain bounds a point breaks."""
    out = []
    if not (0.0 < alpha <= 2.0):
        out.append(f"alpha must satisfy 0 < alpha <= 2, got {alpha}")
    if not (0.0 < beta <= 1.0):
        out.append(f"beta must satisfy 0 < beta <= 1, got {beta}")
    if 0.0 < alpha <= 2.0:
        bound = theta_bound(alpha)
        if abs(theta) > bound + 1e-12:
            out.append(f"theta must satisfy |theta| <= min(1, 2/alpha - 1) = {bound:.9g}, got {theta}")
    if not lam > 0.0:
        out.append(f"lambda must satisfy lambda > 0, got {lam}")
    return out


@dataclass(frozen=True)
class MixingSample:
    """Fixed draws of the positive stable mixing variable, reused across evaluations."""

    values: np.ndarray = field(repr=False)
    beta: float
    stream: RngStream | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise DomainError("mixing sample is empty")
        if not np.all(v > 0.0):
            raise DomainError("mixing sample values must be positive")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


class SpecialCase(str, enum.Enum):
    GENERAL = "general"
    STRICTLY_STABLE = "strictly-stable"
    GAUSSIAN = "gaussian"
    CAUCHY = "cauchy"
    LEVY_SMIRNOV = "levy-smirnov"


def special_case_of(p: FsdParams) -> SpecialCase:
    if p.beta != 1.0:
        return SpecialCase.GENERAL
    if p.alpha == 2.0 and p.theta == 0.0:
        return SpecialCase.GAUSSIAN
    if p.alpha == 1.0 and p.theta == 0.0:
        return SpecialCase.CAUCHY
    if p.alpha == 0.5 and p.theta == 1.0:
        return SpecialCase.LEVY_SMIRNOV
    return SpecialCase.STRICTLY_STABLE


def fsd_from_uniforms(p: FsdParams, u):
    """Transform a ``(4, n)`` array of uniforms on (0, 1] into FSD variates.

    Rows 0-1 feed the stable factor, rows 2-3 the mixing factor.  Reusing the
    same array for different ``p`` gives common random numbers.
    """
    y = stable_from_uniforms(p.alpha, p.theta, u[0], u[1])
    z = p.lam ** (1.0 / p.alpha) * y
    if p.beta < 1.0:
        s = one_sided_from_uniforms(p.beta, u[2], u[3])
        z = z * s ** (-p.beta / p.alpha)
    return z


def sample_fsd(p: FsdParams, rng, size=None):
    """Draw FSD variates; ``size=None`` returns a single float."""
    gen = as_generator(rng)
    shape = () if size is None else tuple(np.atleast_1d(size))
    z = fsd_from_uniforms(p, uniform_open_closed(gen, (4, *shape)))
    return float(z) if size is None else z


def make_mixing_sample(beta: float, rng, size: int = DEFAULT_MIXING_SIZE) -> MixingSample:
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must satisfy 0 < beta <= 1, got {beta}")
    stream = rng if isinstance(rng, RngStream) else None
    gen = as_generator(rng)
    if beta == 1.0:
        return MixingSample(np.ones(size), beta, stream)
    u = uniform_open_closed(gen, (2, size))
    return MixingSample(one_sided_from_uniforms(beta, u[0], u[1]), beta, stream)


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _density_table(p: StableParams) -> StableDensity:
    return StableDensity(p)


def _mixing_lower_cut(beta: float) -> float:
    # g(y; beta) ~ exp(-c y**(-beta/(1-beta))) as y -> 0; start where the exponent is -60
    c = (1.0 - beta) * beta ** (beta / (1.0 - beta))
    return (c / 60.0) ** ((1.0 - beta) / beta)


def _quadrature_point(x: float, p: FsdParams, g_alpha, g_beta) -> float:
    r = p.beta / p.alpha

    if x == 0.0 and p.alpha <= 1.0:
        # E[S**(beta/alpha)] is infinite unless the stable factor vanishes at 0
        return 0.0 if float(g_alpha(0.0)) == 0.0 else math.inf

    def integrand(u):
        if u > 700.0:
            return 0.0
        y = math.exp(u)
        yr = y**r
        return float(g_alpha(x * yr)) * float(g_beta(y)) * yr * y

    u_lo = math.log(_mixing_lower_cut(p.beta))
    total, err = 0.0, 0.0
    pieces = [(u_lo, 0.0), (0.0, 5.0), (5.0, 40.0), (40.0, math.inf)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in pieces:
            if b <= a:
                continue
            v, e = integrate.quad(integrand, a, b, epsabs=1e-11, epsrel=1e-9, limit=400)
            total += v
            err += e
    if err > 1e-7:
        raise QuadratureError(f"mixture quadrature at x={x:.9g} did not converge (error estimate {err:.3g})", err)
    return total


def fsd_pdf(x, p: FsdParams, method: str = "quadrature", mix: MixingSample | None = None):
    """FSD density.

    ``method="quadrature"`` integrates the mixture over the mixing density;
    ``method="monte-carlo"`` averages ``S**(beta/alpha) g(x S**(beta/alpha))``
    over the fixed draws in ``mix``.  At ``beta = 1`` both reduce exactly to
    the stable density.
    """
    if method not in ("quadrature", "monte-carlo"):
        raise ValueError(f"unknown method {method!r}")
    xs = np.asarray(x, dtype=float)
    if p.beta == 1.0:
        return stable_pdf(xs, p.stable)
    if method == "monte-carlo":
        est, _ = fsd_pdf_mc(xs, p, mix)
        return est
    g_alpha = _density_table(p.stable)
    g_beta = _density_table(StableParams(p.beta, 1.0, 1.0))
    out = np.array([_quadrature_point(float(xi), p, g_alpha, g_beta) for xi in xs.reshape(-1)])
    out = out.reshape(xs.shape)
    return out[()] if out.ndim == 0 else out


def fsd_pdf_mc(x, p: FsdParams, mix: MixingSample | None):
    """Monte Carlo density estimate and its standard error."""
    if mix is None:
        raise DomainError("monte-carlo density requires a mixing sample")
    if len(mix) == 0:
        raise DomainError("mixing sample is empty")
    if not math.isclose(mix.beta, p.beta, rel_tol=0.0, abs_tol=1e-15):
        raise DomainError(f"mixing sample was drawn for beta={mix.beta}, not beta={p.beta}")
    xs = np.asarray(x, dtype=float)
    g_alpha = _density_table(p.stable)
    sr = mix.values ** (p.beta / p.alpha)
    est = np.empty(xs.shape)
    se = np.empty(xs.shape)
    fe, fs = est.reshape(-1), se.reshape(-1)
    m = len(mix)
    for i, xi in enumerate(xs.reshape(-1)):
        terms = sr * g_alpha(xi * sr)
        fe[i] = terms.mean()
        fs[i] = terms.std(ddof=1) / math.sqrt(m) if m > 1 else math.nan
    if est.ndim == 0:
        return est[()], se[()]
    return est, se
