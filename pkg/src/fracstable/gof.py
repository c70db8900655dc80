"""Histograms over a fit window and Pearson's chi-square test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Histogram",
    "GofReport",
    "BINNINGS",
    "build_histogram",
    "bin_index",
    "bin_counts",
    "cell_probabilities",
    "chi2_distance",
    "chi2_upper_tail",
    "pearson_test",
    "degrees_of_freedom",
    "two_sample_chi2",
    "cell_probabilities_from_pdf",
]

BINNINGS = ("linear", "log", "equalprob")
_ALIASES = {"logarithmic": "log", "equal-probability": "equalprob", "equal_probability": "equalprob"}


@dataclass(frozen=True)
class Histogram:
    """Counts over bins ``[e0, e1], (e1, e2], ..., (e_{n-1}, e_n]``.

    ``sample_size`` is the size of the whole sample the histogram was built
    from, including observations outside the window.
    """

    edges: np.ndarray
    counts: np.ndarray
    binning: str = "linear"
    sample_size: int | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or edges.size < 3:
            raise DomainError("a histogram needs at least 2 bins")
        if not np.all(np.diff(edges) > 0):
            raise DomainError("bin edges must be strictly increasing")
        if counts.shape != (edges.size - 1,):
            raise DomainError("counts must have one entry per bin")
        if np.any(counts < 0):
            raise DomainError("counts must be nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)
        if self.sample_size is None:
            object.__setattr__(self, "sample_size", int(counts.sum()))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bins(self) -> int:
        return self.counts.size

    @property
    def window(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        if self.binning == "log":
            return np.sqrt(self.edges[1:] * self.edges[:-1])
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def density(self) -> np.ndarray:
        """Counts normalized to a density over the window (integrates to 1)."""
        if self.total == 0:
            return np.zeros(self.n_bins)
        return self.counts / (self.total * self.widths)


def bin_index(values, edges) -> np.ndarray:
    """Bin of each value, -1 outside the window; bins are right-closed, the first also left-closed."""
    values = np.asarray(values, dtype=float)
    idx = np.searchsorted(edges, values, side="left") - 1
    idx[values == edges[0]] = 0
    idx[(values < edges[0]) | (values > edges[-1]) | np.isnan(values)] = -1
    return idx


def bin_counts(values, edges) -> np.ndarray:
    idx = bin_index(values, edges)
    return np.bincount(idx[idx >= 0], minlength=edges.size - 1)


def build_histogram(sample, window, n_bins: int = 40, binning: str = "log") -> Histogram:
    binning = _ALIASES.get(binning, binning)
    if binning not in BINNINGS:
        raise DomainError(f"binning must be one of {BINNINGS}, got {binning!r}")
    a, b = float(window[0]), float(window[1])
    if not a < b:
        raise DomainError(f"window must satisfy a < b, got ({a}, {b})")
    if n_bins < 2:
        raise DomainError(f"need at least 2 bins, got {n_bins}")
    x = np.asarray(sample, dtype=float)

    if binning == "linear":
        edges = np.linspace(a, b, n_bins + 1)
    elif binning == "log":
        if a <= 0.0:
            raise DomainError(f"logarithmic binning requires a > 0, got a = {a}")
        edges = np.geomspace(a, b, n_bins + 1)
    else:
        inside = x[(x >= a) & (x <= b)]
        if np.unique(inside).size < n_bins:
            raise DomainError(f"fewer than {n_bins} distinct values in the window for equal-probability bins")
        inner = np.quantile(inside, np.linspace(0.0, 1.0, n_bins + 1)[1:-1])
        edges = np.concatenate([[a], inner, [b]])
        if not np.all(np.diff(edges) > 0):
            raise DomainError("equal-probability edges collapse; too many tied values")
    edges[0], edges[-1] = a, b
    return Histogram(edges, bin_counts(x, edges), binning, sample_size=int(x.size))


def cell_probabilities(model_sample, hist: Histogram, conditional: bool = True, floor: float | None = None):
    """Cell probabilities of ``hist``'s bins estimated from a model sample.

    With ``conditional=True`` the probabilities are renormalized over the
    window.  Empty cells are raised to ``floor`` (default ``1/(10 M)``).
    """
    z = np.asarray(model_sample, dtype=float)
    m = z.size
    counts = bin_counts(z, hist.edges).astype(float)
    if floor is None:
        floor = 1.0 / (10.0 * m)
    denom = counts.sum() if conditional else m
    if denom == 0:
        raise DomainError("model sample has no mass inside the window")
    p = np.maximum(counts / denom, floor)
    if conditional:
        p = p / p.sum()
    return p


def chi2_distance(hist: Histogram, probs, n: int | None = None) -> float:
    """``sum_i (n p_i - nu_i)**2 / (n p_i)`` with ``n = hist.total`` unless given."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape != hist.counts.shape:
        raise DomainError("one probability per bin is required")
    if np.any(probs <= 0.0):
        raise DomainError("cell probabilities must be strictly positive")
    n = hist.total if n is None else n
    if n <= 0:
        raise DomainError("histogram has no observations")
    expected = n * probs
    return float(np.sum((expected - hist.counts) ** 2 / expected))


def _gamma_series_p(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf_q(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_upper_tail(x: float, dof: int) -> float:
    """Upper tail ``P(chi2_dof > x)``: the regularized upper incomplete gamma ``Q(dof/2, x/2)``."""
    if x < 0 or dof < 1:
        raise DomainError(f"need x >= 0 and dof >= 1, got x={x}, dof={dof}")
    a, t = 0.5 * dof, 0.5 * x
    if t == 0.0:
        return 1.0
    if t < a + 1.0:
        q = 1.0 - _gamma_series_p(a, t)
    else:
        q = _gamma_cf_q(a, t)
    return min(max(q, 0.0), 1.0)


@dataclass(frozen=True)
class GofReport:
    statistic: float
    dof: int
    p_value: float
    level: float = 0.05

    @property
    def decision(self) -> str:
        return "reject" if self.p_value < self.level else "accept"


def degrees_of_freedom(n_bins: int, fitted_params: int) -> int:
    """``n_bins - 1 - fitted_params``, raising :class:`DomainError` unless positive."""
    dof = n_bins - 1 - fitted_params
    if dof <= 0:
        raise DomainError(f"degrees of freedom {n_bins} - 1 - {fitted_params} = {dof} <= 0; use more bins")
    return dof


def pearson_test(hist: Histogram, probs, fitted_params: int = 4, level: float = 0.05) -> GofReport:
    """Pearson chi-square test of window-renormalized cell probabilities."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape != hist.counts.shape:
        raise DomainError("one probability per bin is required")
    if abs(probs.sum() - 1.0) > 1e-6:
        raise DomainError(f"cell probabilities must sum to 1 over the window, got {probs.sum():.9g}")
    dof = degrees_of_freedom(hist.n_bins, fitted_params)
    stat = chi2_distance(hist, probs)
    return GofReport(stat, dof, chi2_upper_tail(stat, dof), level)


def two_sample_chi2(hist_a: Histogram, hist_b: Histogram, level: float = 0.05) -> GofReport:
    """Chi-square homogeneity test of two histograms over the same bins.

    Cells empty in both samples are dropped; ``dof`` is the number of
    remaining cells minus one.
    """
    if hist_a.edges.shape != hist_b.edges.shape or not np.allclose(hist_a.edges, hist_b.edges, rtol=1e-12, atol=0.0):
        raise DomainError("two-sample test needs histograms over identical bins")
    a = hist_a.counts.astype(float)
    b = hist_b.counts.astype(float)
    na, nb = a.sum(), b.sum()
    if na == 0 or nb == 0:
        raise DomainError("both histograms need observations inside the window")
    used = (a + b) > 0
    dof = int(used.sum()) - 1
    if dof <= 0:
        raise DomainError("two-sample test needs at least two occupied cells")
    ka, kb = math.sqrt(nb / na), math.sqrt(na / nb)
    stat = float(np.sum((ka * a[used] - kb * b[used]) ** 2 / (a[used] + b[used])))
    return GofReport(stat, dof, chi2_upper_tail(stat, dof), level)


def cell_probabilities_from_pdf(pdf, hist: Histogram, nodes: int = 8, conditional: bool = True) -> np.ndarray:
    """Cell probabilities of ``hist``'s bins by Gauss-Legendre integration of a density.

    ``pdf`` is a vectorized callable.  With ``conditional=True`` the result is
    renormalized over the window.
    """
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    lo, hi = hist.edges[:-1], hist.edges[1:]
    half = 0.5 * (hi - lo)
    pts = 0.5 * (hi + lo)[:, None] + half[:, None] * gx[None, :]
    vals = np.asarray(pdf(pts.ravel()), dtype=float).reshape(pts.shape)
    p = half * (vals @ gw)
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DomainError("density integration produced invalid cell probabilities")
    if conditional:
        if p.sum() <= 0:
            raise DomainError("density has no mass inside the window")
        p = p / p.sum()
    return p
