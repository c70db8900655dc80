"""Continuous-time random walk ensembles and their fractional-diffusion limit.

Each walker waits ``T_1, T_2, ...`` and jumps ``X_1, X_2, ...``; its jump
count at time ``t`` is the ``N`` with ``T_1 + ... + T_N < t <= T_1 + ... + T_{N+1}``
and its position is ``X_1 + ... + X_N``.  With Pareto waits of index ``beta``
and Pareto jumps of index ``alpha`` the position scaled by ``t**(-beta/alpha)``
converges to a fractional stable law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError
from .fsd import FsdParams, fsd_pdf
from .stable import RngStream, as_generator, uniform_open_closed

__all__ = [
    "CtrwConfig",
    "WalkerState",
    "EnsembleResult",
    "pareto_from_uniform",
    "sample_pareto",
    "simulate_walker",
    "simulate_ensemble",
    "ctrw_limit_pdf",
]

CHUNK = 10_000


@dataclass(frozen=True)
class CtrwConfig:
    alpha: float
    beta: float
    t: float
    n_walkers: int = 10_000
    x0: float = 1.0
    t0: float = 1.0
    symmetric: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError(f"jump exponent must satisfy 0 < alpha <= 2, got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"wait exponent must satisfy 0 < beta <= 1, got {self.beta}")
        for name in ("x0", "t0", "t"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive")
        if self.n_walkers < 1:
            raise DomainError("ensemble size must be positive")


@dataclass(frozen=True)
class WalkerState:
    position: float
    elapsed: float
    jumps: int


@dataclass(frozen=True)
class EnsembleResult:
    config: CtrwConfig
    positions: np.ndarray
    elapsed: np.ndarray
    jumps: np.ndarray

    @property
    def scaled_positions(self) -> np.ndarray:
        return self.positions * self.config.t ** (-self.config.beta / self.config.alpha)


def pareto_from_uniform(exponent: float, scale: float, u):
    """Inverse-CDF transform ``scale * u**(-1/exponent)`` of uniforms on (0, 1]."""
    if not (exponent > 0.0 and scale > 0.0):
        raise DomainError("Pareto exponent and scale must be positive")
    return scale * np.asarray(u, dtype=float) ** (-1.0 / exponent)


def sample_pareto(exponent: float, scale: float, rng, size=None):
    """Pure Pareto variates ``scale * U**(-1/exponent)``, U uniform on (0, 1]."""
    if not (exponent > 0.0 and scale > 0.0):
        raise DomainError("Pareto exponent and scale must be positive")
    out = pareto_from_uniform(exponent, scale, uniform_open_closed(as_generator(rng), size))
    return out[()] if out.ndim == 0 else out


def simulate_walker(
    cfg: CtrwConfig,
    rng=None,
    waits: Iterable[float] | None = None,
    jumps: Iterable[float] | None = None,
) -> WalkerState:
    """One trajectory up to time ``cfg.t``.

    ``waits`` and ``jumps`` override the random laws with given sequences.
    """
    gen = None if (waits is not None and jumps is not None) else as_generator(rng)

    def wait_iter():
        while True:
            yield float(sample_pareto(cfg.beta, cfg.t0, gen))

    def jump_iter():
        while True:
            x = float(sample_pareto(cfg.alpha, cfg.x0, gen))
            if cfg.symmetric and gen.random() < 0.5:
                x = -x
            yield x

    w = iter(waits) if waits is not None else wait_iter()
    j = iter(jumps) if jumps is not None else jump_iter()
    elapsed, position, n = 0.0, 0.0, 0
    while True:
        nxt = elapsed + next(w)
        if nxt >= cfg.t:
            return WalkerState(position, elapsed, n)
        elapsed = nxt
        position += next(j)
        n += 1


def _simulate_chunk(cfg: CtrwConfig, gen: np.random.Generator, n: int):
    pos = np.zeros(n)
    elapsed = np.zeros(n)
    count = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    while active.size:
        nxt = elapsed[active] + cfg.t0 * uniform_open_closed(gen, active.size) ** (-1.0 / cfg.beta)
        keep = nxt < cfg.t
        active = active[keep]
        if not active.size:
            break
        elapsed[active] = nxt[keep]
        step = cfg.x0 * uniform_open_closed(gen, active.size) ** (-1.0 / cfg.alpha)
        if cfg.symmetric:
            step = np.where(gen.random(active.size) < 0.5, -step, step)
        pos[active] += step
        count[active] += 1
    return pos, elapsed, count


def simulate_ensemble(cfg: CtrwConfig, rng: RngStream) -> EnsembleResult:
    """Simulate ``cfg.n_walkers`` independent walkers.

    Walkers are processed in chunks of 10^4, chunk ``k`` drawing from the
    child stream ``k`` of ``rng``, so results do not depend on how the chunks
    are scheduled.
    """
    parts = []
    for k, start in enumerate(range(0, cfg.n_walkers, CHUNK)):
        n = min(CHUNK, cfg.n_walkers - start)
        parts.append(_simulate_chunk(cfg, rng.generator(k), n))
    pos, elapsed, count = (np.concatenate(arrs) for arrs in zip(*parts))
    return EnsembleResult(cfg, pos, elapsed, count)


def ctrw_limit_pdf(x, t: float, alpha: float, beta: float, D: float = 1.0):
    """Self-similar solution ``(D t**beta)**(-1/alpha) q(|x| (D t**beta)**(-1/alpha); alpha, beta, 0, 1)``."""
    if not (t > 0.0 and D > 0.0):
        raise DomainError("t and D must be positive")
    c = (D * t**beta) ** (-1.0 / alpha)
    return c * fsd_pdf(np.abs(np.asarray(x, dtype=float)) * c, FsdParams(alpha, beta, 0.0, 1.0))
