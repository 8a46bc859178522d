"""Empirical distributions and goodness-of-fit checks against the exact laws."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import core
from .core import _check_n

__all__ = [
    "EmpiricalDistribution",
    "Histogram",
    "KsResult",
    "ks_critical_1pct",
    "ks_distance",
    "chi_square",
    "scaled_max_variable",
    "unscaled_max_variable",
    "histogram",
    "sup_norm_distance",
    "scaled_max_density",
    "gumbel_density_distance",
    "weibull_cdf_distance",
    "write_curve_csv",
]

KS_COEFF_1PCT = 1.63
MIN_KS_COUNT = 50


class EmpiricalDistribution:
    """Sorted sample set with right-continuous empirical CDF."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        self.samples = s
        self.samples.flags.writeable = False

    @property
    def count(self):
        return self.samples.size

    def cdf(self, x):
        """Fraction of samples ``<= x``."""
        r = np.searchsorted(self.samples, x, side="right") / self.count
        return r[()] if np.ndim(r) == 0 else r

    def cdf_left(self, x):
        """Fraction of samples ``< x``."""
        r = np.searchsorted(self.samples, x, side="left") / self.count
        return r[()] if np.ndim(r) == 0 else r


@dataclass(frozen=True)
class KsResult:
    distance: float
    critical_1pct: float
    count: int

    @property
    def passed(self):
        return self.distance <= self.critical_1pct


def ks_critical_1pct(count):
    """Asymptotic two-sided 1% critical value ``1.63 / sqrt(M)``."""
    return KS_COEFF_1PCT / math.sqrt(count)


def _eval(cdf, x):
    try:
        y = np.asarray(cdf(x), dtype=float)
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([float(cdf(float(v))) for v in x])


def ks_distance(emp, cdf) -> KsResult:
    """One-sample Kolmogorov-Smirnov statistic of ``emp`` against ``cdf``.

    The supremum is taken over both one-sided limits of the empirical CDF at
    every distinct sample value, which handles ties exactly.  ``cdf`` may be
    scalar or vectorized.
    """
    if not isinstance(emp, EmpiricalDistribution):
        emp = EmpiricalDistribution(emp)
    if emp.count < MIN_KS_COUNT:
        raise ValueError(f"KS test needs at least {MIN_KS_COUNT} samples, got {emp.count}")
    x = np.unique(emp.samples)
    f = _eval(cdf, x)
    upper = emp.cdf(x)
    lower = emp.cdf_left(x)
    d = max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f)))
    return KsResult(float(d), ks_critical_1pct(emp.count), emp.count)


def chi_square(emp, cdf, bins=50):
    """Pearson chi-square over equal-count bins of the target law.

    Secondary diagnostic only; returns ``(statistic, dof)``.  Bin edges are
    taken at sample quantiles, expected counts from ``cdf``.
    """
    if not isinstance(emp, EmpiricalDistribution):
        emp = EmpiricalDistribution(emp)
    edges = np.unique(np.quantile(emp.samples, np.linspace(0, 1, bins + 1)))
    observed, _ = np.histogram(emp.samples, bins=edges)
    f = _eval(cdf, edges)
    f[0], f[-1] = 0.0, 1.0
    expected = emp.count * np.diff(f)
    mask = expected > 0
    stat = float(np.sum((observed[mask] - expected[mask]) ** 2 / expected[mask]))
    return stat, int(mask.sum()) - 1


def scaled_max_variable(t, n):
    """Gumbel-scaled maximum ``x = N t - ln N``."""
    n = _check_n(n, 2)
    return n * np.asarray(t, dtype=float)[()] - math.log(n)


def unscaled_max_variable(x, n):
    n = _check_n(n, 2)
    return (np.asarray(x, dtype=float)[()] + math.log(n)) / n


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self):
        return np.diff(self.edges)


def histogram(emp, bins=50) -> Histogram:
    """Density-normalized histogram; uniform bins over the sample range by default."""
    if not isinstance(emp, EmpiricalDistribution):
        emp = EmpiricalDistribution(emp)
    if np.ndim(bins) == 0:
        if bins < 5:
            raise ValueError("need at least 5 bins")
        lo, hi = emp.samples[0], emp.samples[-1]
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.size < 6 or np.any(np.diff(edges) <= 0):
            raise ValueError("explicit edges must be increasing with at least 5 bins")
    counts, _ = np.histogram(emp.samples, bins=edges)
    total = counts.sum()
    density = counts / (total * np.diff(edges)) if total else np.zeros(counts.shape)
    return Histogram(edges, counts, density)


def sup_norm_distance(f, g, interval, grid=1000):
    """``max |f - g|`` on a uniform grid of ``grid`` points over ``interval``."""
    if grid < 1000:
        raise ValueError("grid must have at least 1000 points")
    lo, hi = interval
    x = np.linspace(lo, hi, int(grid))
    return float(np.max(np.abs(_eval(f, x) - _eval(g, x))))


def scaled_max_density(x, n):
    """Exact density of the Gumbel-scaled maximum ``x = N t - ln N``."""
    t = unscaled_max_variable(x, n)
    return core.max_pdf(t, n) / n


def gumbel_density_distance(n, interval=(-5.0, 15.0), grid=4001):
    """Sup-norm gap between the scaled exact maximum density and the Gumbel density."""
    return sup_norm_distance(lambda x: scaled_max_density(x, n), core.gumbel_pdf, interval, grid)


def weibull_cdf_distance(n, grid=4001):
    """Sup-norm gap between the exact minimum CDF and ``1 - exp(-N**2 s)`` on ``[0, 1/N]``."""
    n = _check_n(n)
    return sup_norm_distance(
        lambda s: core.min_cdf(s, n), lambda s: core.weibull_limit_cdf(s, n), (0.0, 1.0 / n), grid
    )


def write_curve_csv(path_or_file, columns, header_lines=()):
    """Write named columns with 17 significant digits.

    ``columns`` is an ordered mapping ``name -> sequence``; integers and
    strings are written verbatim.
    """
    names = list(columns)
    cols = [columns[k] for k in names]

    def fmt(v):
        if isinstance(v, str):
            return v
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return f"{float(v):.17g}"

    def _write(fh):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
