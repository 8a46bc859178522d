"""Exact finite-N extreme-value laws for the intensities of complex random states.

A normalized random state in N complex dimensions has intensities
``|z_i|**2`` distributed uniformly on the standard (N-1)-simplex.  This
module gives the exact distribution of the largest and smallest intensity,
the corresponding densities and moments, and their large-N limits (Gumbel
for the maximum, exponential/Weibull for the minimum).

The maximum CDF is a piecewise polynomial with knots at ``1/k``.  Its
inclusion-exclusion sum alternates in sign with terms as large as
``C(N, m)``, so evaluation in double precision loses everything past
N ~ 100.  Every evaluation therefore carries a rounding-error bound; when
the bound exceeds ``atol`` the sum is redone in exact rational arithmetic
(a float ``t`` is a dyadic rational, so the whole sum is an integer divided
by a power of two) and rounded once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral
from typing import NamedTuple

import numpy as np

__all__ = [
    "PrecisionLossError",
    "PiecewiseCdf",
    "MomentSet",
    "ScalingConstants",
    "PdfValue",
    "harmonic_number",
    "max_cdf",
    "max_cdf_alternating",
    "max_pdf",
    "marginal_tail_integral",
    "inclusion_exclusion_cdf",
    "mean_max",
    "second_moment_max",
    "std_max",
    "moments",
    "scaling_constants",
    "gumbel_cdf",
    "gumbel_pdf",
    "gumbel_limit_cdf",
    "gumbel_limit_pdf",
    "min_cdf",
    "min_pdf",
    "mean_min",
    "weibull_limit_cdf",
    "weibull_limit_pdf",
    "integrate_max_pdf",
]

EPS = np.finfo(float).eps

#: Rounding-error bound above which sums are recomputed exactly.
EXACT_ATOL = 1e-14
#: Bound above which a float-only evaluation is refused.
PRECISION_LIMIT = 1e-8
#: Binomials are exact integers up to this N, log-gamma floats beyond.
EXACT_BINOMIAL_LIMIT = 60
#: Terms are built as sign * exp(log magnitude) beyond this N.
LOG_SPACE_THRESHOLD = 200
#: Largest N accepted by the sign-function form of the maximum CDF.
ALTERNATING_LIMIT = 30


class PrecisionLossError(ArithmeticError):
    """Raised when cancellation makes a float-only sum untrustworthy."""

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


def _check_n(n, minimum=1):
    if isinstance(n, bool) or not isinstance(n, Integral):
        raise TypeError(f"dimension must be an integer, got {n!r}")
    if n < minimum:
        raise ValueError(f"dimension must be >= {minimum}, got {n}")
    return int(n)


def harmonic_number(n: int, k: int) -> float:
    """Generalized harmonic number ``sum(m**-k for m in 1..n)``.

    Terms are added in ascending order through :func:`math.fsum`, so the
    result is the correctly rounded value of the float terms.
    """
    n = _check_n(n)
    if isinstance(k, bool) or not isinstance(k, Integral) or k < 1:
        raise ValueError(f"order must be a positive integer, got {k!r}")
    return math.fsum(float(m) ** -k for m in range(n, 0, -1))


# ---------------------------------------------------------------------------
# alternating binomial sums
# ---------------------------------------------------------------------------

def _weight(n, m, deriv):
    """Exact integer coefficient of ``(1 - m t)**power`` in the CDF/PDF sums."""
    w = math.comb(n, m)
    if deriv:
        return -w * m * (n - 1) if m % 2 == 0 else w * m * (n - 1)
    return w if m % 2 == 0 else -w


def _log_weight(n, m, deriv):
    lw = math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)
    if deriv:
        lw += math.log(m * (n - 1))
    sign = (-1.0) ** (m + 1) if deriv else (-1.0) ** m
    return lw, sign


def _term_count(t, n):
    # m ranges over 0..k with m*t <= 1 (left-interval convention at knots)
    return min(n - 1, int(math.floor(1.0 / t))) if t > 0 else n - 1


def _float_sum(t, n, deriv, kmax):
    """Float evaluation plus an a-priori bound on its rounding error."""
    power = n - 2 if deriv else n - 1
    start = 1 if deriv else 0
    terms = []
    bound = 0.0
    for m in range(start, kmax + 1):
        base = 1.0 - m * t
        rel_base = (m * t / abs(base)) if base != 0.0 else 0.0
        if n <= EXACT_BINOMIAL_LIMIT:
            term = float(_weight(n, m, deriv)) * base**power
            rel = 4.0 + power * (1.0 + rel_base)
        elif n <= LOG_SPACE_THRESHOLD:
            lw, sign = _log_weight(n, m, deriv)
            term = sign * math.exp(lw) * base**power
            rel = 4.0 + abs(lw) + power * (1.0 + rel_base)
        else:
            lw, sign = _log_weight(n, m, deriv)
            if base == 0.0:
                term = sign * math.exp(lw) if power == 0 else 0.0
                rel = 4.0 + abs(lw)
            else:
                sgn = sign * (1.0 if (base > 0 or power % 2 == 0) else -1.0)
                logb = math.log(abs(base))
                term = sgn * math.exp(lw + power * logb)
                rel = 4.0 + abs(lw) + power * (1.0 + abs(logb) + rel_base)
        terms.append(term)
        bound += abs(term) * rel
    return math.fsum(terms), bound * EPS


def _exact_sum(t, n, deriv, kmax):
    """Correctly rounded value of the same sum using integer arithmetic."""
    power = n - 2 if deriv else n - 1
    start = 1 if deriv else 0
    p, q = float(t).as_integer_ratio()
    total = 0
    for m in range(start, kmax + 1):
        total += _weight(n, m, deriv) * (q - m * p) ** power
    return total / q**power


def _signed_sum(t, n, deriv, kmax, atol, exact_fallback):
    value, bound = _float_sum(t, n, deriv, kmax)
    if bound <= atol:
        return value
    if exact_fallback:
        return _exact_sum(t, n, deriv, kmax)
    if bound > PRECISION_LIMIT:
        raise PrecisionLossError(
            f"cancellation error bound {bound:.3g} at t={t!r}, N={n}", bound
        )
    return value


def _scalar_max_cdf(t, n, atol, exact_fallback):
    if t >= 1.0:
        return 1.0
    if t <= 1.0 / n:
        return 0.0
    value = _signed_sum(t, n, False, _term_count(t, n), atol, exact_fallback)
    return min(1.0, max(0.0, value))


def _is_knot(t):
    if t <= 0.0:
        return False
    k = round(1.0 / t)
    return k >= 1 and 1.0 / k == t


def _scalar_max_pdf(t, n, atol, exact_fallback):
    if t > 1.0 or t <= 1.0 / n:
        return 0.0
    value = _signed_sum(t, n, True, _term_count(t, n), atol, exact_fallback)
    return max(0.0, value)


def _array_sum(t, n, deriv, atol, exact_fallback):
    """Vectorized float sums; entries whose bound exceeds ``atol`` are redone."""
    power = n - 2 if deriv else n - 1
    if power == 0:
        # N = 2 density: constant on its support
        return np.full(t.shape, 2.0)
    ks = range(1 if deriv else 0, n)
    m = np.array(ks, dtype=float)
    logw = np.array([math.log(abs(_weight(n, k, deriv))) for k in ks])
    sign = np.array([1.0 if _weight(n, k, deriv) > 0 else -1.0 for k in ks])
    out = np.empty_like(t)
    chunk = max(1, 2**21 // len(m))
    scalar = _scalar_max_pdf if deriv else _scalar_max_cdf
    for lo in range(0, t.size, chunk):
        tc = t[lo:lo + chunk]
        mt = m[:, None] * tc[None, :]
        base = 1.0 - mt
        live = base > 0.0
        safe = np.where(live, base, 1.0)
        logb = np.log(safe)
        terms = np.where(live, sign[:, None] * np.exp(logw[:, None] + power * logb), 0.0)
        rel = 4.0 + len(m) + logw[:, None] + power * (1.0 - logb + mt / safe)
        bound = EPS * np.sum(np.abs(terms) * rel, axis=0)
        vals = np.sum(terms, axis=0)
        for i in np.flatnonzero(bound > atol):
            vals[i] = scalar(float(tc[i]), n, atol, exact_fallback)
        out[lo:lo + chunk] = vals
    return out


def _vectorized(t, n, deriv, atol, exact_fallback):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    flat_t = t.ravel()
    flat = out.ravel()
    if deriv:
        inside = (flat_t > 1.0 / n) & (flat_t <= 1.0)
    else:
        flat[flat_t >= 1.0] = 1.0
        inside = (flat_t > 1.0 / n) & (flat_t < 1.0)
    if inside.any():
        vals = _array_sum(flat_t[inside], n, deriv, atol, exact_fallback)
        flat[inside] = np.clip(vals, 0.0, 1.0) if not deriv else np.maximum(vals, 0.0)
    return flat.reshape(t.shape)


def max_cdf(t, n, *, atol=EXACT_ATOL, exact_fallback=True):
    """Probability that every intensity of a random N-state is at most ``t``.

    Uses the resummed piecewise polynomial
    ``sum_{m=0}^{k} C(N,m) (-1)^m (1 - m t)^(N-1)`` with ``k`` the number
    of components that can simultaneously exceed ``t``.

    Parameters
    ----------
    t : float or array_like
        Intensity threshold(s).
    n : int
        Hilbert-space dimension N >= 1.
    atol : float
        Rounding-error bound tolerated in double precision.  Larger values
        trade accuracy for speed on big arrays.
    exact_fallback : bool
        Recompute in exact arithmetic when the bound exceeds ``atol``.  If
        False, a bound above ``PRECISION_LIMIT`` raises
        :class:`PrecisionLossError`.

    Returns
    -------
    float or ndarray
    """
    n = _check_n(n)
    if np.ndim(t) == 0:
        return _scalar_max_cdf(float(t), n, atol, exact_fallback)
    return _vectorized(t, n, False, atol, exact_fallback)


class PdfValue(NamedTuple):
    value: float
    one_sided: bool


def max_pdf(t, n, *, atol=EXACT_ATOL, exact_fallback=True, with_flag=False):
    """Density of the maximum intensity, the derivative of :func:`max_cdf`.

    At a knot ``t == 1/k`` the left limit is returned; with
    ``with_flag=True`` a scalar call returns a :class:`PdfValue` whose
    ``one_sided`` field marks that case.  Outside ``(1/N, 1]`` the density
    is zero.
    """
    n = _check_n(n, 2)
    if np.ndim(t) == 0:
        t = float(t)
        value = _scalar_max_pdf(t, n, atol, exact_fallback)
        if with_flag:
            return PdfValue(value, _is_knot(t))
        return value
    return _vectorized(t, n, True, atol, exact_fallback)


def max_cdf_alternating(t: float, n: int) -> float:
    """Maximum CDF from the unresummed sign-function series over all N+1 terms.

    Only a cross-check of the resummed form; the alternating sum is not
    evaluated past ``ALTERNATING_LIMIT`` dimensions.
    """
    n = _check_n(n)
    if n > ALTERNATING_LIMIT:
        raise PrecisionLossError(
            f"alternating form refused for N={n} > {ALTERNATING_LIMIT}", math.inf
        )
    t = float(t)
    if n == 1:
        return 1.0 if t >= 1.0 else 0.0
    terms = []
    bound = 0.0
    for m in range(n + 1):
        base = 1.0 - m * t
        if base == 0.0:
            continue
        sign = 1.0 if base > 0 else -1.0
        term = _weight(n, m, False) * base ** (n - 1) * sign
        terms.append(term)
        bound += abs(term) * (4.0 + (n - 1) * (1.0 + m * t / abs(base)))
    if bound * EPS <= EXACT_ATOL:
        return 0.5 * math.fsum(terms)
    # past t ~ 1/2 the m > 1/t terms grow like (m t - 1)**(N-1)
    p, q = t.as_integer_ratio()
    total = 0
    for m in range(n + 1):
        r = q - m * p
        if r:
            total += _weight(n, m, False) * r ** (n - 1) * (1 if r > 0 else -1)
    return total / (2 * q ** (n - 1))


def marginal_tail_integral(m: int, t: float, n: int) -> float:
    """Probability that ``m`` given components all carry intensity >= ``t``.

    For complex states the reduced density of ``m`` components integrates
    in closed form to ``(1 - m t)**(N-1)`` when ``m t < 1``.
    """
    n = _check_n(n)
    if isinstance(m, bool) or not isinstance(m, Integral) or not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= N, got m={m!r}, N={n}")
    if m == 0:
        return 1.0
    base = 1.0 - m * float(t)
    if base <= 0.0:
        return 0.0
    return base ** (n - 1)


def _marginal_tail_exact(m, t, n):
    if m == 0:
        return Fraction(1)
    p, q = float(t).as_integer_ratio()
    if q - m * p <= 0:
        return Fraction(0)
    return Fraction((q - m * p) ** (n - 1), q ** (n - 1))


def inclusion_exclusion_cdf(t: float, n: int, *, atol: float = EXACT_ATOL) -> float:
    """Maximum CDF assembled by inclusion-exclusion over the tail integrals.

    Counts the states with no component above ``t`` by alternating over
    m-tuples of large components.  Algebraically identical to
    :func:`max_cdf`; kept as an independent route through
    :func:`marginal_tail_integral`.
    """
    n = _check_n(n)
    t = float(t)
    if t >= 1.0:
        return 1.0
    if t <= 1.0 / n:
        return 0.0
    terms = []
    for m in range(n + 1):
        tail = marginal_tail_integral(m, t, n)
        if tail == 0.0 and m > 0:
            break
        terms.append((m, math.comb(n, m), tail))
    bound = 0.0
    if n <= 1000:
        floats = [(-1) ** m * float(c) * tail for m, c, tail in terms]
        bound = EPS * sum(
            abs(x) * (4.0 + (n - 1) * (1.0 + m * t / max(1.0 - m * t, EPS)))
            for x, (m, _, _) in zip(floats, terms)
        )
    if n <= 1000 and bound <= atol:
        value = math.fsum(floats)
    else:
        exact = sum(
            (-1) ** m * c * _marginal_tail_exact(m, t, n) for m, c, _ in terms
        )
        value = exact.numerator / exact.denominator
    return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class PiecewiseCdf:
    """The maximum CDF for one dimension, exposed piece by piece.

    ``knots`` lists the boundaries ``1/k`` for ``k = n..1``; on
    ``[1/(k+1), 1/k]`` the CDF is the ``k``-term polynomial.
    """

    n: int

    def __post_init__(self):
        _check_n(self.n)

    @property
    def knots(self):
        return [1.0 / k for k in range(self.n, 0, -1)]

    def term_count(self, t):
        """Index ``k`` of the interval holding ``t`` (left convention at knots)."""
        if t <= 1.0 / self.n or t > 1.0:
            raise ValueError(f"t={t} outside the support (1/{self.n}, 1]")
        return _term_count(float(t), self.n)

    def evaluate_piece(self, t, k):
        """Value at ``t`` of the ``k``-term polynomial, regardless of interval."""
        if not 0 <= k <= self.n:
            raise ValueError(f"piece index must lie in 0..{self.n}")
        return _signed_sum(float(t), self.n, False, k, EXACT_ATOL, True)

    def __call__(self, t):
        return max_cdf(t, self.n)


# ---------------------------------------------------------------------------
# moments and limits
# ---------------------------------------------------------------------------

def mean_max(n: int) -> float:
    """Mean of the maximum intensity, ``H(N,1)/N``."""
    n = _check_n(n)
    return harmonic_number(n, 1) / n


def second_moment_max(n: int) -> float:
    """``E[t**2] = (H(N,1)**2 + H(N,2)) / (N (N+1))``."""
    n = _check_n(n)
    h1 = harmonic_number(n, 1)
    return (h1 * h1 + harmonic_number(n, 2)) / (n * (n + 1))


def std_max(n: int) -> float:
    """Standard deviation of the maximum intensity.

    Uses ``var = (N H(N,2) - H(N,1)**2) / (N**2 (N+1))``, algebraically
    equal to ``E[t**2] - E[t]**2`` but free of the subtraction.  Approaches
    ``pi / (sqrt(6) N)`` for large N.  N = 1 gives 0.
    """
    n = _check_n(n)
    h1 = harmonic_number(n, 1)
    var = (n * harmonic_number(n, 2) - h1 * h1) / (n * n * (n + 1))
    return math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class MomentSet:
    mean: float
    second_moment: float
    std_dev: float


def moments(n: int) -> MomentSet:
    return MomentSet(mean_max(n), second_moment_max(n), std_max(n))


@dataclass(frozen=True)
class ScalingConstants:
    """Gumbel location ``a_n = ln(N)/N`` and scale ``b_n = 1/N``."""

    a_n: float
    b_n: float


def scaling_constants(n: int) -> ScalingConstants:
    n = _check_n(n, 2)
    return ScalingConstants(math.log(n) / n, 1.0 / n)


def gumbel_cdf(x):
    """Standard Gumbel CDF ``exp(-exp(-x))``."""
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))[()]


def gumbel_pdf(x):
    """Standard Gumbel density ``exp(-x - exp(-x))``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return np.exp(-x - np.exp(-x))[()]


def gumbel_limit_cdf(t, n):
    """Large-N law of the maximum, ``exp(-exp(-N (t - ln(N)/N)))``."""
    c = scaling_constants(n)
    return gumbel_cdf((np.asarray(t, dtype=float) - c.a_n) / c.b_n)


def gumbel_limit_pdf(t, n):
    c = scaling_constants(n)
    return gumbel_pdf((np.asarray(t, dtype=float) - c.a_n) / c.b_n) / c.b_n


def min_cdf(s, n):
    """CDF of the minimum intensity: ``1 - (1 - N s)**(N-1)`` on ``[0, 1/N]``.

    The minimum never exceeds ``1/N``, so the CDF is 1 from there on.
    """
    n = _check_n(n)
    s = np.asarray(s, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        core = -np.expm1((n - 1) * np.log1p(-n * np.clip(s, 0.0, 1.0 / n)))
    out = np.where(s >= 1.0 / n, 1.0, np.where(s <= 0.0, 0.0, core))
    return out[()] if out.ndim == 0 else out


def min_pdf(s, n):
    """Density of the minimum intensity, ``N (N-1) (1 - N s)**(N-2)``."""
    n = _check_n(n, 2)
    s = np.asarray(s, dtype=float)
    inside = (s >= 0.0) & (s < 1.0 / n)
    base = np.where(inside, 1.0 - n * s, 0.0)
    out = np.where(inside, n * (n - 1) * base ** (n - 2), 0.0)
    return out[()] if out.ndim == 0 else out


def mean_min(n: int) -> float:
    """Mean of the minimum intensity, exactly ``1/N**2``."""
    n = _check_n(n)
    return 1.0 / (n * n)


def weibull_limit_cdf(s, n):
    """Large-N law of the minimum, ``1 - exp(-N**2 s)``."""
    n = _check_n(n)
    s = np.asarray(s, dtype=float)
    out = np.where(s <= 0.0, 0.0, -np.expm1(-(n * n) * np.maximum(s, 0.0)))
    return out[()] if out.ndim == 0 else out


def weibull_limit_pdf(s, n):
    n = _check_n(n)
    s = np.asarray(s, dtype=float)
    out = np.where(s < 0.0, 0.0, (n * n) * np.exp(-(n * n) * np.maximum(s, 0.0)))
    return out[()] if out.ndim == 0 else out


def integrate_max_pdf(n: int, power: int = 0, *, tol: float = 1e-10) -> float:
    """``E[t**power]`` by adaptive quadrature of the maximum density.

    Integrates knot to knot so no panel straddles a change of polynomial.
    """
    from scipy.integrate import quad

    n = _check_n(n, 2)
    total = []
    for k in range(n - 1, 0, -1):
        lo, hi = 1.0 / (k + 1), 1.0 / k
        val, _ = quad(
            lambda x: x**power * _scalar_max_pdf(x, n, EXACT_ATOL, True),
            lo, hi, epsabs=tol, epsrel=tol, limit=200,
        )
        total.append(val)
    return math.fsum(total)
