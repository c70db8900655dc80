"""Hooke-Jeeves pattern search and the exponential penalty wall."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

__all__ = ["SearchConfig", "SearchTrace", "penalty", "penalized_objective", "hooke_jeeves"]


@dataclass(frozen=True)
class SearchConfig:
    initial_steps: tuple[float, ...] = (0.1, 0.1, 0.1, 0.1)
    shrink: float = 0.5
    step_tol: float = 1e-4
    max_evals: int = 20000
    penalty_A: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "initial_steps", tuple(float(h) for h in self.initial_steps))
        if not all(h > 0.0 for h in self.initial_steps):
            raise DomainError("all initial steps must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise DomainError(f"shrink factor must lie in (0, 1), got {self.shrink}")
        if not self.step_tol > 0.0:
            raise DomainError("step tolerance must be positive")
        if int(self.max_evals) < 1:
            raise DomainError("max evaluations must be a positive integer")
        if not self.penalty_A >= 1.0:
            raise DomainError(f"penalty multiplier must satisfy A >= 1, got {self.penalty_A}")


@dataclass
class SearchTrace:
    """Accepted base points in order, with their objective values."""

    points: list[tuple[tuple[float, ...], float]] = field(default_factory=list)
    evaluations: int = 0
    converged: bool = False

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.points]


def penalty(value: float, nearest_bound: float, inside: bool, A: float) -> float:
    """Per-parameter penalty factor: 1 inside the domain, exp(A * distance) outside."""
    if A < 1.0:
        raise DomainError(f"penalty multiplier must satisfy A >= 1, got {A}")
    if inside:
        return 1.0
    return math.exp(A * abs(nearest_bound - value))


def penalized_objective(raw_distance: float, inside: bool, penalty_factor: float) -> float:
    """Extend a distance beyond the admissible domain: ``d`` inside, ``d + f - 1`` outside."""
    if inside:
        return raw_distance
    # grouped so the result never rounds below the raw distance
    return raw_distance + (penalty_factor - 1.0)


class _Budget(Exception):
    pass


def hooke_jeeves(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float],
    cfg: SearchConfig = SearchConfig(),
):
    """Minimize a deterministic function with Hooke-Jeeves direct search.

    Exploratory moves try ``+h_i`` then ``-h_i`` on each coordinate in order,
    keeping any improvement.  After a successful exploration the search makes a
    pattern move to ``2 * new - old`` and explores around it; the pattern is
    kept while it keeps improving on the base point.  A failed exploration
    multiplies every step by ``cfg.shrink``.  The search stops when all steps
    are below ``cfg.step_tol`` (converged) or the evaluation budget runs out.

    Returns ``(argmin, value, trace)`` where ``argmin`` is the best point ever
    evaluated.
    """
    x0 = np.asarray(start, dtype=float).copy()
    if not np.all(np.isfinite(x0)):
        raise DomainError("start point must be finite")
    h = np.array(cfg.initial_steps, dtype=float)
    if h.size != x0.size:
        if len(cfg.initial_steps) == 1:
            h = np.full(x0.size, h[0])
        else:
            raise DomainError(f"{h.size} initial steps given for a {x0.size}-dimensional start")

    trace = SearchTrace()
    best = [x0.copy(), math.inf]

    def f(x):
        if trace.evaluations >= cfg.max_evals:
            raise _Budget
        trace.evaluations += 1
        v = float(objective(x))
        if v < best[1]:
            best[0], best[1] = x.copy(), v
        return v

    def explore(x, fx):
        x = x.copy()
        for i in range(x.size):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sign * h[i]
                ft = f(trial)
                if ft < fx:
                    x, fx = trial, ft
                    break
        return x, fx

    try:
        base = x0
        fbase = f(base)
        trace.points.append((tuple(base), fbase))
        while True:
            x_new, f_new = explore(base, fbase)
            if f_new < fbase:
                while f_new < fbase:
                    prev, base, fbase = base, x_new, f_new
                    trace.points.append((tuple(base), fbase))
                    pattern = 2.0 * base - prev
                    x_new, f_new = explore(pattern, f(pattern))
            else:
                if np.all(h < cfg.step_tol):
                    trace.converged = True
                    break
                h *= cfg.shrink
    except _Budget:
        trace.converged = False

    return best[0], best[1], trace
