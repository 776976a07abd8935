"""Beta-family special functions and the ball intersection-over-union coefficient.

Everything here is a pure function of its value arguments, so the module is
safe to use from any number of threads.  Scalars in, scalar out; numpy arrays
in, arrays out (elementwise, shape preserving).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PrecisionConfig",
    "log_gamma",
    "beta",
    "incomplete_beta",
    "incomplete_beta_series",
    "volume_coefficient",
    "volume_coefficient_derivative",
    "volume_coefficient_bounds",
]

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class PrecisionConfig:
    """Termination control for the continued-fraction / series evaluators.

    rel_tol must lie in (0, 1e-6]; max_iter must be at least 100.
    """

    rel_tol: float = 1e-13
    max_iter: int = 300

    def __post_init__(self) -> None:
        if not (0.0 < self.rel_tol <= 1e-6):
            raise ValueError(f"rel_tol must be in (0, 1e-6], got {self.rel_tol}")
        if self.max_iter < 100:
            raise ValueError(f"max_iter must be >= 100, got {self.max_iter}")


_DEFAULT_PRECISION = PrecisionConfig()


_lgamma_ufunc = np.frompyfunc(math.lgamma, 1, 1)


def _lgamma(x_arr: np.ndarray) -> np.ndarray:
    return np.asarray(_lgamma_ufunc(x_arr), dtype=np.float64)


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr <= 0.0):
        raise ValueError("log_gamma requires x > 0")
    out = _lgamma(x_arr)
    return float(out) if np.isscalar(x) or x_arr.ndim == 0 else out


def beta(a, b):
    """Complete beta function Gamma(a)Gamma(b)/Gamma(a+b), a, b > 0.

    Computed in log space so large arguments stay finite.
    """
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if np.any(a_arr <= 0.0) or np.any(b_arr <= 0.0):
        raise ValueError("beta requires a, b > 0")
    out = np.exp(_lgamma(a_arr) + _lgamma(b_arr) - _lgamma(a_arr + b_arr))
    if np.isscalar(a) and np.isscalar(b):
        return float(out)
    return out


def _betacf(a: float, b: float, x: np.ndarray, precision: PrecisionConfig) -> np.ndarray:
    """Continued fraction for the incomplete beta (modified Lentz).

    Vectorized over x.  Lanes are frozen as soon as their own update factor
    converges, so a value computed inside a large batch is bit-identical to
    the same value computed alone.
    """
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < tiny, tiny, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, precision.max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d_new = 1.0 + aa * d
        d_new = np.where(np.abs(d_new) < tiny, tiny, d_new)
        c_new = 1.0 + aa / c
        c_new = np.where(np.abs(c_new) < tiny, tiny, c_new)
        d_new = 1.0 / d_new
        h_new = h * d_new * c_new
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d2 = 1.0 + aa * d_new
        d2 = np.where(np.abs(d2) < tiny, tiny, d2)
        c2 = 1.0 + aa / c_new
        c2 = np.where(np.abs(c2) < tiny, tiny, c2)
        d2 = 1.0 / d2
        delta = d2 * c2
        c = np.where(done, c, c2)
        d = np.where(done, d, d2)
        h = np.where(done, h, h_new * delta)
        done = done | (np.abs(delta - 1.0) < precision.rel_tol)
        if done.all():
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge in {precision.max_iter} iterations"
    )


def _incomplete_beta_pieces(x, xc, a, b, precision):
    """Return (direct, value_or_tail) for B(x, a, b).

    ``xc`` is the complement 1 - x, passed separately so callers that know it
    exactly avoid the cancellation in computing it from x.  On the direct
    branch the second element is B(x, a, b) itself; on the symmetric branch
    it is the tail t with B(x, a, b) = B(a, b) - t.
    """
    with np.errstate(divide="ignore"):
        log_front = a * np.log(x) + b * np.log(xc)
    direct = x < a / (a + b)
    out = np.empty_like(x)
    if direct.any():
        cf = _betacf(a, b, x[direct], precision)
        out[direct] = np.exp(log_front[direct]) * cf / a
    if (~direct).any():
        cf = _betacf(b, a, xc[~direct], precision)
        out[~direct] = np.exp(log_front[~direct]) * cf / b
    return direct, out


def incomplete_beta(x, a: float, b: float, precision: PrecisionConfig | None = None):
    """Non-regularized incomplete beta B(x, a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt.

    Uses the continued-fraction expansion, switching to the symmetry relation
    B(x, a, b) = B(a, b) - B(1-x, b, a) for x above a/(a+b).
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("incomplete_beta requires a, b > 0")
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("incomplete_beta requires 0 <= x <= 1")
    precision = precision or _DEFAULT_PRECISION
    out = np.empty_like(x_arr)
    boundary_lo = x_arr == 0.0
    boundary_hi = x_arr == 1.0
    interior = ~(boundary_lo | boundary_hi)
    out[boundary_lo] = 0.0
    bab = beta(a, b)
    out[boundary_hi] = bab
    if interior.any():
        xi = x_arr[interior]
        direct, piece = _incomplete_beta_pieces(xi, 1.0 - xi, a, b, precision)
        out[interior] = np.where(direct, piece, bab - piece)
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(out)
    return out


def incomplete_beta_series(x: float, a: float, b: float, precision: PrecisionConfig | None = None) -> float:
    """B(x, a, b) by its power series x^a * sum_n Gamma(1-b+n) x^n / (Gamma(1-b) n! (a+n)).

    Slow near x = 1; kept as an independent cross-check of the
    continued-fraction route.  Scalar only, b non-integer.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("incomplete_beta_series requires a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError("incomplete_beta_series requires 0 <= x <= 1")
    precision = precision or _DEFAULT_PRECISION
    if x == 0.0:
        return 0.0
    total = 0.0
    coeff = 1.0  # Gamma(1-b+n) / (Gamma(1-b) n!) at n = 0
    xn = 1.0
    for n in range(10 * precision.max_iter):
        term = coeff * xn / (a + n)
        total += term
        if abs(term) < precision.rel_tol * abs(total) and n > 2:
            return x**a * total
        coeff *= (n + 1.0 - b) / (n + 1.0)
        xn *= x
    raise ArithmeticError("incomplete beta series did not converge")


def _vol_coeff_arrays(d: int, s: np.ndarray, precision: PrecisionConfig) -> np.ndarray:
    a = (d + 1) / 2.0
    b = 0.5
    bab = beta(a, b)
    out = np.ones_like(s)
    pos = s > 0.0
    if pos.any():
        sp = s[pos]
        xc = sp * sp / 4.0  # complement of x, exact in s
        x = 1.0 - xc
        direct, piece = _incomplete_beta_pieces(x, xc, a, b, precision)
        # q = B(x,a,b) / (2 B(a,b) - B(x,a,b)); on the symmetric branch
        # B(x,a,b) = bab - piece, so q = (bab - piece) / (bab + piece) with
        # no cancellation anywhere.
        q = np.where(direct, piece / (2.0 * bab - piece), (bab - piece) / (bab + piece))
        out[pos] = q
    return out


def _check_d_s(d: int, s, lo_open: bool = False):
    if d < 1 or int(d) != d:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    s_arr = np.asarray(s, dtype=np.float64)
    bad = (s_arr < 0.0) | (s_arr >= 2.0) | ((s_arr <= 0.0) if lo_open else False)
    if np.any(bad):
        raise ValueError("normalized distance must lie in [0, 2)" + (" with s > 0" if lo_open else ""))
    return s_arr


def volume_coefficient(d: int, s, precision: PrecisionConfig | None = None):
    """Intersection-over-union volume ratio of two equal d-balls.

    ``s`` is the center distance divided by the common radius, 0 <= s < 2.
    Equals 1 at s = 0 and decreases strictly to 0 as s -> 2.
    """
    s_arr = _check_d_s(d, s)
    out = _vol_coeff_arrays(int(d), np.atleast_1d(s_arr), precision or _DEFAULT_PRECISION)
    if np.isscalar(s) or s_arr.ndim == 0:
        return float(out[0])
    return out.reshape(s_arr.shape)


def volume_coefficient_derivative(d: int, t, precision: PrecisionConfig | None = None):
    """d/dt of volume_coefficient(d, .) at t, nonpositive on [0, 2).

    Closed form: -2 (1 - t^2/4)^((d-1)/2) B((d+1)/2, 1/2)
    / (2 B((d+1)/2, 1/2) - B(1 - t^2/4, (d+1)/2, 1/2))^2.
    """
    t_arr = _check_d_s(d, t)
    precision = precision or _DEFAULT_PRECISION
    t1 = np.atleast_1d(t_arr)
    a = (d + 1) / 2.0
    b = 0.5
    bab = beta(a, b)
    xc = t1 * t1 / 4.0
    x = 1.0 - xc
    denom = np.full_like(t1, bab)  # 2 B(a,b) - B(x,a,b) at t = 0
    pos = t1 > 0.0
    if pos.any():
        direct, piece = _incomplete_beta_pieces(x[pos], xc[pos], a, b, precision)
        denom[pos] = np.where(direct, 2.0 * bab - piece, bab + piece)
    with np.errstate(divide="ignore"):
        log_front = 0.5 * (d - 1) * np.log1p(-xc)
    out = -2.0 * np.exp(log_front) * bab / (denom * denom)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out[0])
    return out.reshape(t_arr.shape)


def volume_coefficient_bounds(d: int, s):
    """Exponential-decay envelope for the volume coefficient.

    Returns (lower, upper) with lower <= volume_coefficient(d, s) <= upper:

        lower = (1 - s^2/4)^((d+1)/2) / (2 sqrt(d+1) sqrt(pi))
        upper = sqrt(d+1) (1 - s^2/4)^((d+1)/2) / ((s^2/2) sqrt(pi))

    Requires 0 < s < 2; the upper bound degenerates at s = 0.
    """
    s_arr = _check_d_s(d, s, lo_open=True)
    factor = (1.0 - s_arr * s_arr / 4.0) ** ((d + 1) / 2.0)
    lower = factor / (2.0 * math.sqrt(d + 1) * _SQRT_PI)
    upper = math.sqrt(d + 1) * factor / ((s_arr * s_arr / 2.0) * _SQRT_PI)
    if np.isscalar(s) or s_arr.ndim == 0:
        return float(lower), float(upper)
    return lower, upper
