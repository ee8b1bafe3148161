r"""Special functions of real order for the half-line kernels.

Provides :math:`\ln\Gamma(x)`, the Bessel function :math:`J_\nu(z)`, the
exponentially scaled modified Bessel function :math:`e^{-z} I_\nu(z)` and the
generalized Laguerre polynomials :math:`L_n^{(\alpha)}(x)`.

Every Bessel routine exists twice: a scalar implementation compiled with
numba (when available) and looped over arrays, and a vectorized numpy
implementation of the same algorithms.  ``HALFPROP_DISABLE_NUMBA=1`` selects
the numpy path.

Regimes
-------
``bessel_i_scaled``
    ascending series for ``z < max(25, nu**2)``, Hankel asymptotic beyond.
``bessel_j``
    ascending series for ``z <= 5``, Miller backward recurrence normalized
    with the Neumann sum :math:`(z/2)^\mu = \sum_k (\mu+2k)\Gamma(\mu+k)/k!\,
    J_{\mu+2k}(z)` in the middle, Hankel asymptotic for ``z >= max(25, nu**2)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit

EULER_GAMMA = 0.57721566490153286061
_HALF_LOG_2PI = 0.91893853320467274178

# Bernoulli numbers B_2 .. B_16 for the Stirling series.
_BERNOULLI = np.array([1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0,
                       -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0])

_ZETA_TERMS = 48


def _zeta_minus_one_table(kmax):
    """zeta(k) - 1 for k = 0..kmax (entries 0, 1 unused).

    Direct sum over n = 2..N-1 plus an Euler-Maclaurin tail at N = 100.
    """
    table = np.zeros(kmax + 1)
    N = 100.0
    n = np.arange(2.0, N)
    for k in range(2, kmax + 1):
        head = np.sum((n ** (-float(k)))[::-1])
        tail = (N ** (1 - k) / (k - 1) + 0.5 * N ** (-k) + k * N ** (-k - 1) / 12.0
                - k * (k + 1) * (k + 2) * N ** (-k - 3) / 720.0
                + k * (k + 1) * (k + 2) * (k + 3) * (k + 4) * N ** (-k - 5) / 30240.0)
        table[k] = head + tail
    return table


_ZETA_M1 = _zeta_minus_one_table(_ZETA_TERMS)


# ---------------------------------------------------------------- log-gamma

@njit
def _lgamma_1p(eps):
    # ln Gamma(1 + eps) for |eps| <= 0.5; (zeta(k) - 1) ~ 2^-k keeps it short.
    s = -EULER_GAMMA * eps + (eps - math.log1p(eps))
    p = -eps
    for k in range(2, _ZETA_TERMS + 1):
        p = -p * eps
        term = _ZETA_M1[k] * p / k
        s += term
        if abs(term) < 1e-18 * abs(s):
            break
    return s


_LN2 = math.log(2.0)
# 0.5 * z underflows to zero for subnormal z, so halve inside the log instead
_LN2_HI = 6.93147180369123816490e-01  # low 21 bits zero, so e * _LN2_HI is exact
_LN2_LO = 1.90821492927058770002e-10


@njit
def _two_prod(a, b):
    # Dekker: p + err == a * b exactly
    p = a * b
    c = 134217729.0 * a
    ah = c - (c - a)
    al = a - ah
    c = 134217729.0 * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit
def _log_hi_lo(x):
    """``log(x)`` as ``hi + lo`` with ``lo`` carrying the rounding error of ``hi`` (x >= 2)."""
    hi = math.log(x)
    m, e = math.frexp(x)
    if m < 0.7071067811865476:
        m *= 2.0
        e -= 1
    return hi, ((e * _LN2_HI - hi) + e * _LN2_LO) + math.log1p(m - 1.0)


@njit
def _lgamma_scalar(x):
    if x < 0.5:
        return _lgamma_1p(x) - math.log(x)
    if x < 1.5:
        return _lgamma_1p(x - 1.0)
    if x < 2.5:
        eps = x - 2.0
        return math.log1p(eps) + _lgamma_1p(eps)
    if x < 10.0:
        prod = 1.0
        y = x
        while y >= 2.5:
            y -= 1.0
            prod *= y
        eps = y - 2.0
        return math.log(prod) + math.log1p(eps) + _lgamma_1p(eps)
    # Stirling; the leading (x - 1/2) log x - x is kept in double-double so
    # that only the final addition rounds
    inv = 1.0 / x
    inv2 = inv * inv
    p = inv
    series = 0.0
    for j in range(_BERNOULLI.shape[0]):
        k2 = 2 * (j + 1)
        series += _BERNOULLI[j] / (k2 * (k2 - 1)) * p
        p *= inv2
    log_hi, log_lo = _log_hi_lo(x)
    a = x - 0.5
    prod, prod_err = _two_prod(a, log_hi)
    lead, lead_err = _two_sum(prod, -x)
    return lead + (((lead_err + prod_err) + a * log_lo) + (_HALF_LOG_2PI + series))


def gamma_ln(x):
    """Natural log of the gamma function for ``x > 0``.

    Accepts scalars or arrays.  Raises ``ValueError`` on non-positive input.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"gamma_ln requires x > 0, got {x!r}")
    if arr.ndim == 0:
        return float(_lgamma_scalar(float(arr)))
    return np.array([_lgamma_scalar(float(v)) for v in arr.ravel()]).reshape(arr.shape)


# ----------------------------------------------------------------- orders

@dataclass(frozen=True)
class BesselOrder:
    """Non-negative real Bessel order."""

    nu: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError(f"Bessel order must be finite and >= 0, got {self.nu!r}")

    @classmethod
    def from_k(cls, k: float) -> "BesselOrder":
        """Order sqrt(k + 1/4) attached to the inverse-square strength k."""
        if k < -0.25:
            raise ValueError(f"k must satisfy k >= -1/4, got {k!r}")
        return cls(math.sqrt(k + 0.25))


def _order_value(order) -> float:
    if isinstance(order, BesselOrder):
        return order.nu
    return BesselOrder(float(order)).nu


# ------------------------------------------------------ scalar algorithms

@njit
def _ive_series(nu, z):
    q = 0.25 * z * z
    term = 1.0
    s = 1.0
    log_shift = 0.0
    k = 1
    while True:
        term *= q / (k * (nu + k))
        s += term
        if term <= 1e-17 * s:
            break
        if s > 1e280:
            s *= 1e-280
            term *= 1e-280
            log_shift += 280.0 * math.log(10.0)
        k += 1
    return math.exp(nu * (math.log(z) - _LN2) - _lgamma_scalar(nu + 1.0) - z + log_shift) * s


@njit
def _ive_asymptotic(nu, z):
    mu = 4.0 * nu * nu
    s = 1.0
    term = 1.0
    k = 1
    while k < 500:
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        if abs(new) > abs(term):
            break
        s += new
        term = new
        if abs(new) < 1e-17 * abs(s):
            break
        k += 1
    return s / math.sqrt(2.0 * math.pi * z)


@njit
def _ive_scalar(nu, z):
    if z == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if math.isinf(z):
        return 0.0
    if z >= max(25.0, nu * nu):
        return _ive_asymptotic(nu, z)
    return _ive_series(nu, z)


@njit
def _jv_series(nu, z):
    q = -0.25 * z * z
    term = 1.0
    s = 1.0
    k = 1
    while True:
        term *= q / (k * (nu + k))
        s += term
        if abs(term) <= 1e-17 * abs(s) or k > 300:
            break
        k += 1
    return math.exp(nu * (math.log(z) - _LN2) - _lgamma_scalar(nu + 1.0)) * s


@njit
def _jv_hankel(nu, z):
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    k = 1
    while k < 500:
        new = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        if abs(new) > abs(term):
            break
        # (-1)^j on a_{2j} for P and a_{2j+1} for Q
        if k % 2 == 0:
            p += new if (k // 2) % 2 == 0 else -new
        else:
            q += new if ((k - 1) // 2) % 2 == 0 else -new
        term = new
        if abs(new) < 1e-17:
            break
        k += 1
    chi = z - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.cos(chi) - q * math.sin(chi))


@njit
def _miller_start(nu, z):
    top = max(z, nu)
    m = int(top) + 20 + int(4.0 * math.sqrt(top + 1.0))
    return m + (m % 2)


@njit
def _jv_miller(nu, z):
    n = int(math.floor(nu))
    mu = nu - n
    m = _miller_start(nu, z)
    half = m // 2
    # Neumann-sum weights c_k for J_{mu+2k}
    c = np.empty(half + 1)
    g1 = math.exp(_lgamma_scalar(mu + 1.0))
    c[0] = g1
    g = g1
    for k in range(1, half + 1):
        c[k] = (mu + 2.0 * k) * g
        g *= (mu + k) / (k + 1.0)
    f_next = 0.0
    f = 1e-30
    total = c[half] * f
    target = 0.0
    if m == n:
        target = f
    for j in range(m, 0, -1):
        f_prev = 2.0 * (mu + j) / z * f - f_next
        f_next = f
        f = f_prev
        if (j - 1) % 2 == 0:
            total += c[(j - 1) // 2] * f
        if j - 1 == n:
            target = f
        if abs(f) > 1e250:
            f *= 1e-250
            f_next *= 1e-250
            total *= 1e-250
            target *= 1e-250
    return target * (0.5 * z) ** mu / total


@njit
def _jv_scalar(nu, z):
    if z == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if z <= 5.0:
        return _jv_series(nu, z)
    if z >= max(25.0, nu * nu):
        return _jv_hankel(nu, z)
    return _jv_miller(nu, z)


@njit
def _ive_array_numba(nu, z):
    out = np.empty(z.shape[0])
    for i in range(z.shape[0]):
        out[i] = _ive_scalar(nu, z[i])
    return out


@njit
def _jv_array_numba(nu, z):
    out = np.empty(z.shape[0])
    for i in range(z.shape[0]):
        out[i] = _jv_scalar(nu, z[i])
    return out


# ------------------------------------------------------ numpy algorithms

def _ive_series_np(nu, z):
    q = 0.25 * z * z
    term = np.ones_like(z)
    s = np.ones_like(z)
    k = 1
    while True:
        term = term * q / (k * (nu + k))
        s = s + term
        if np.all(term <= 1e-17 * s):
            break
        k += 1
    return np.exp(nu * (np.log(z) - _LN2) - _lgamma_scalar(nu + 1.0) - z) * s


def _asymptotic_terms_np(nu, z, sign):
    """Yield successive Hankel terms a_k / z**k with the truncation mask."""
    mu = 4.0 * nu * nu
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 500):
        new = sign * term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        active &= np.abs(new) <= np.abs(term)
        yield k, np.where(active, new, 0.0)
        term = np.where(active, new, term)
        active &= np.abs(new) >= 1e-17
        if not active.any():
            return


def _ive_asymptotic_np(nu, z):
    s = np.ones_like(z)
    for _, term in _asymptotic_terms_np(nu, z, -1.0):
        s = s + term
    return s / np.sqrt(2.0 * np.pi * z)


def _jv_series_np(nu, z):
    q = -0.25 * z * z
    term = np.ones_like(z)
    s = np.ones_like(z)
    for k in range(1, 301):
        term = term * q / (k * (nu + k))
        s = s + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(s)):
            break
    return np.exp(nu * (np.log(z) - _LN2) - _lgamma_scalar(nu + 1.0)) * s


def _jv_hankel_np(nu, z):
    p = np.ones_like(z)
    q = np.zeros_like(z)
    for k, term in _asymptotic_terms_np(nu, z, 1.0):
        if k % 2 == 0:
            p = p + (term if (k // 2) % 2 == 0 else -term)
        else:
            q = q + (term if ((k - 1) // 2) % 2 == 0 else -term)
    chi = z - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * (p * np.cos(chi) - q * np.sin(chi))


def _jv_miller_np(nu, z):
    n = int(math.floor(nu))
    mu = nu - n
    m = _miller_start(nu, float(z.max()))
    g = math.exp(_lgamma_scalar(mu + 1.0))
    c = [g]
    for k in range(1, m // 2 + 1):
        c.append((mu + 2.0 * k) * g)
        g *= (mu + k) / (k + 1.0)
    f_next = np.zeros_like(z)
    f = np.full_like(z, 1e-30)
    total = c[m // 2] * f
    target = f.copy() if m == n else np.zeros_like(z)
    for j in range(m, 0, -1):
        f, f_next = 2.0 * (mu + j) / z * f - f_next, f
        if (j - 1) % 2 == 0:
            total = total + c[(j - 1) // 2] * f
        if j - 1 == n:
            target = f.copy()
        big = np.abs(f) > 1e250
        if big.any():
            scale = np.where(big, 1e-250, 1.0)
            f, f_next, total, target = f * scale, f_next * scale, total * scale, target * scale
    return target * (0.5 * z) ** mu / total


def _ive_array_numpy(nu, z):
    out = np.empty_like(z)
    out[z == 0.0] = 1.0 if nu == 0.0 else 0.0
    out[np.isinf(z)] = 0.0
    asym = np.isfinite(z) & (z >= max(25.0, nu * nu))
    ser = (z > 0.0) & ~asym & np.isfinite(z)
    if ser.any():
        out[ser] = _ive_series_np(nu, z[ser])
    if asym.any():
        out[asym] = _ive_asymptotic_np(nu, z[asym])
    return out


def _jv_array_numpy(nu, z):
    out = np.empty_like(z)
    out[z == 0.0] = 1.0 if nu == 0.0 else 0.0
    ser = (z > 0.0) & (z <= 5.0)
    hank = z >= max(25.0, nu * nu)
    mid = (z > 5.0) & ~hank
    if ser.any():
        out[ser] = _jv_series_np(nu, z[ser])
    if mid.any():
        out[mid] = _jv_miller_np(nu, z[mid])
    if hank.any():
        out[hank] = _jv_hankel_np(nu, z[hank])
    return out


# ------------------------------------------------------------- public API

def _apply(array_numba, array_numpy, nu, z, allow_inf):
    arr = np.asarray(z, dtype=float)
    bad = np.isnan(arr) | (arr < 0) | (np.isinf(arr) & (not allow_inf))
    if np.any(bad):
        raise ValueError("Bessel argument must be finite and >= 0")
    flat = np.ascontiguousarray(arr.ravel())
    if _accel.HAVE_NUMBA:
        out = array_numba(nu, flat)
    else:
        out = array_numpy(nu, flat)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def bessel_j(order, z):
    """Bessel function of the first kind J_nu(z) for real nu >= 0, z >= 0."""
    nu = _order_value(order)
    return _apply(_jv_array_numba, _jv_array_numpy, nu, z, allow_inf=False)


def bessel_i_scaled(order, z):
    """Scaled modified Bessel function exp(-z) * I_nu(z); never overflows."""
    nu = _order_value(order)
    return _apply(_ive_array_numba, _ive_array_numpy, nu, z, allow_inf=True)


def laguerre(n: int, alpha: float, x):
    """Generalized Laguerre polynomial L_n^(alpha)(x) by upward recurrence."""
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    if not alpha > -1.0:
        raise ValueError(f"alpha must exceed -1, got {alpha!r}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if x.ndim else float(prev)
    cur = 1.0 + alpha - x
    for j in range(1, int(n)):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur if x.ndim else float(cur)
