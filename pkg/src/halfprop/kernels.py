r"""Closed-form propagators on the half-line for the potential k/x^2 + w^2 x^2.

Two operator conventions are supported:

``Convention.UNIT``
    heat ``u_t = u_xx - V u`` and Schrodinger ``i u_t + u_xx = V u``.
``Convention.HALF``
    the same operators with a factor 1/2 on ``u_xx`` and ``V``.

A kernel in the half convention at time ``t`` equals the unit-convention
kernel at time ``t/2``, so every formula below is written once in the unit
time ``tau`` and the convention only rescales ``t``.  In unit time, with
``s = 2 w tau`` and ``nu = sqrt(k + 1/4)``::

    heat, w > 0   c0 sqrt(x)/sinh(s) exp[-w(x^2+xi^2)/(2 tanh s)] I_nu(w xi x/sinh s)
    heat, w = 0   c0 sqrt(x)/(2 tau) exp[-(x^2+xi^2)/(4 tau)] I_nu(xi x/(2 tau))
    schr, w > 0   c0 sqrt(x)/sin(s)  exp[i w(x^2+xi^2)/(2 tan s)] J_nu(w xi x/sin s)
    schr, w = 0   c0 sqrt(x)/(2 tau) exp[i(x^2+xi^2)/(4 tau)]   J_nu(xi x/(2 tau))

with ``c0 = w sqrt(xi)`` (``sqrt(xi)`` when ``w = 0``) for the heat kernels and
the same modulus times ``exp(-i(nu+1) pi/2)`` for the Schrodinger kernels.
Each value is carried as ``(log_magnitude, phase)``; the Gaussian and the
Bessel scaling factor are merged analytically before exponentiation::

    -w(x^2+xi^2) coth(s)/2 + z = -w[(x-xi)^2/(2 sinh s) + (x^2+xi^2) tanh(s/2)/2]

Past each focusing time ``s = m pi`` the Schrodinger kernel picks up the
factor ``exp(-i pi (nu+1))`` (every eigenphase advances by ``pi(2n+nu+1)``).
"""

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import quadrature, specfun

CAUSTIC_GUARD = 1e-8
_TINY = 1e-300


class CausticError(ValueError):
    """Schrodinger kernel evaluated at (or too close to) a focusing time."""


class StencilError(ValueError):
    """Finite-difference stencil leaves the admissible region."""


class NonConvergence(RuntimeError):
    """Extrapolated normalization limits disagree."""


class Convention(Enum):
    HALF = "half"
    UNIT = "unit"

    @property
    def factor(self) -> float:
        return 0.5 if self is Convention.HALF else 1.0

    def internal_time(self, t):
        """Unit-convention time equivalent to ``t``."""
        return t * self.factor


class KernelKind(Enum):
    HEAT_HARMONIC = "heat_harmonic"
    HEAT_FREE = "heat_free"
    SCHRODINGER_HARMONIC = "schrodinger_harmonic"
    SCHRODINGER_FREE = "schrodinger_free"

    @property
    def is_heat(self) -> bool:
        return self in (KernelKind.HEAT_HARMONIC, KernelKind.HEAT_FREE)

    @property
    def is_free(self) -> bool:
        return self in (KernelKind.HEAT_FREE, KernelKind.SCHRODINGER_FREE)

    @classmethod
    def select(cls, equation: str, omega: float) -> "KernelKind":
        equation = equation.lower()
        if equation.startswith("heat"):
            return cls.HEAT_FREE if omega == 0 else cls.HEAT_HARMONIC
        if equation.startswith("schr"):
            return cls.SCHRODINGER_FREE if omega == 0 else cls.SCHRODINGER_HARMONIC
        raise ValueError(f"unknown equation {equation!r}")


@dataclass(frozen=True)
class PotentialParams:
    """Inverse-square strength ``k`` and oscillator frequency ``omega``."""

    k: float
    omega: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k >= -0.25):
            raise ValueError(f"k must satisfy k >= -1/4, got {self.k!r}")
        if not (math.isfinite(self.omega) and self.omega >= 0):
            raise ValueError(f"omega must satisfy omega >= 0, got {self.omega!r}")

    @property
    def nu(self) -> float:
        return math.sqrt(self.k + 0.25)

    @property
    def order(self) -> specfun.BesselOrder:
        return specfun.BesselOrder(self.nu)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        return self.k / (x * x) + self.omega ** 2 * x * x


def nu_index(params: PotentialParams) -> float:
    """Bessel index sqrt(k + 1/4)."""
    if params.k < -0.25:
        raise ValueError("k must satisfy k >= -1/4")
    return math.sqrt(params.k + 0.25)


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    params: PotentialParams
    xi: float
    convention: Convention = Convention.UNIT
    c0: Optional[complex] = None

    def __post_init__(self):
        if self.kind.is_free != (self.params.omega == 0):
            raise ValueError(f"{self.kind.value} is inconsistent with omega={self.params.omega}")
        if not (math.isfinite(self.xi) and self.xi > 0):
            raise ValueError(f"source point xi must be positive, got {self.xi!r}")
        if not self.kind.is_heat and self.params.k < 0.75:
            warnings.warn("Schrodinger kernel with k < 3/4: outside the range where the "
                          "operator is essentially self-adjoint", stacklevel=3)

    @classmethod
    def build(cls, equation: str, k: float, omega: float, xi: float,
              convention=Convention.UNIT, c0=None) -> "KernelSpec":
        params = PotentialParams(k, omega)
        return cls(KernelKind.select(equation, omega), params, xi, Convention(convention), c0)

    def with_source(self, xi: float) -> "KernelSpec":
        c0 = None if self.c0 is None else self.c0 * math.sqrt(xi / self.xi)
        return replace(self, xi=xi, c0=c0)

    @property
    def normalization(self) -> complex:
        return closed_form_c0(self) if self.c0 is None else self.c0


@dataclass(frozen=True)
class NormalizedKernel:
    spec: KernelSpec
    c0: complex


@dataclass(frozen=True)
class KernelValue:
    """Kernel value stored as log-magnitude and phase in (-pi, pi]."""

    log_magnitude: np.ndarray
    phase: np.ndarray

    def magnitude(self):
        return np.exp(self.log_magnitude)

    def value(self):
        return np.exp(self.log_magnitude) * np.exp(1j * np.asarray(self.phase))

    def real(self):
        """Real value; only meaningful for zero-phase (heat) kernels."""
        return np.exp(self.log_magnitude) * np.cos(self.phase)

    @classmethod
    def zero_like(cls, shape=()):
        return cls(np.full(shape, -np.inf), np.zeros(shape))


def closed_form_c0(spec: KernelSpec, xi=None) -> complex:
    """Normalization making the kernel tend to delta(x - xi) as t -> 0+."""
    xi = spec.xi if xi is None else xi
    omega = spec.params.omega
    mod = np.sqrt(xi) * (omega if omega > 0 else 1.0)
    if spec.kind.is_heat:
        return mod
    return mod * np.exp(-0.5j * math.pi * (spec.params.nu + 1.0))


def _wrap(phase):
    wrapped = np.remainder(np.asarray(phase, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def _log_sinh(s):
    return s + np.log(-np.expm1(-2.0 * s)) - math.log(2.0)


def _positive(name, a):
    a = np.asarray(a, dtype=float)
    if np.any(~(a > 0)) or np.any(~np.isfinite(a)):
        raise ValueError(f"{name} must be positive and finite")
    return a


def _log_c0(spec, xi):
    if spec.c0 is None:
        omega = spec.params.omega
        log_mod = 0.5 * np.log(xi) + (math.log(omega) if omega > 0 else 0.0)
        arg = 0.0 if spec.kind.is_heat else -0.5 * math.pi * (spec.params.nu + 1.0)
        return log_mod, arg
    c0 = complex(spec.c0)
    scale = 0.5 * np.log(np.asarray(xi) / spec.xi)
    return math.log(abs(c0)) + scale, math.atan2(c0.imag, c0.real)


def _underflows(omega, tau) -> bool:
    # 2 w tau so small that sinh/sin lose it entirely; use the w -> 0 limit,
    # keeping the 1/w the harmonic prefactor carries.
    return 0 < omega and float(np.max(omega * tau)) < 1e-150


def heat_log(spec: KernelSpec, t, x, xi=None, exponent_scale: float = 1.0):
    """Log of the heat kernel (vectorized in ``t``, ``x`` and the source ``xi``)."""
    xi = spec.xi if xi is None else np.asarray(xi, dtype=float)
    tau = spec.convention.internal_time(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    omega = spec.params.omega
    log_c0, _ = _log_c0(spec, xi)
    sum_sq = x * x + xi * xi
    with np.errstate(over="ignore", divide="ignore"):
        if omega == 0 or _underflows(omega, tau):
            z = xi * x / (2.0 * tau)
            log_pref = -np.log(2.0 * tau) - (math.log(omega) if omega else 0.0)
            expo = -(x - xi) ** 2 / (4.0 * tau)
            extra = sum_sq / (4.0 * tau)
        else:
            s = 2.0 * omega * tau
            sinh_s = np.sinh(s)
            z = omega * xi * x / sinh_s
            log_pref = -_log_sinh(s)
            expo = -omega * ((x - xi) ** 2 / (2.0 * sinh_s) + 0.5 * sum_sq * np.tanh(0.5 * s))
            extra = omega * sum_sq / (2.0 * np.tanh(s))
        if exponent_scale != 1.0:
            expo = expo - (exponent_scale - 1.0) * extra
        ive = specfun.bessel_i_scaled(spec.params.nu, np.broadcast_to(z, np.broadcast(z, x).shape))
        return log_c0 + 0.5 * np.log(x) + log_pref + expo + np.log(ive)


def heat_kernel(spec: KernelSpec, t, x, *, exponent_scale: float = 1.0) -> KernelValue:
    """Heat kernel value at ``(t, x)``; phase is identically zero."""
    if not spec.kind.is_heat:
        raise ValueError("heat_kernel needs a heat kernel spec")
    t = _positive("t", t)
    x = _positive("x", x)
    log_mag = heat_log(spec, t, x, exponent_scale=exponent_scale)
    return KernelValue(log_mag, np.zeros_like(log_mag))


def scaled_phase_time(spec: KernelSpec, t):
    """Angle ``s`` whose sine sets the Schrodinger prefactor (``2 w tau``)."""
    return 2.0 * spec.params.omega * spec.convention.internal_time(np.asarray(t, dtype=float))


def is_caustic(spec: KernelSpec, t, guard: float = CAUSTIC_GUARD):
    """True where the harmonic Schrodinger kernel focuses."""
    t = np.asarray(t, dtype=float)
    if spec.kind is not KernelKind.SCHRODINGER_HARMONIC:
        return np.zeros(t.shape, dtype=bool)
    return _focusing(scaled_phase_time(spec, t), guard)


def _focusing(s, guard):
    # focusing happens at s = m pi with m >= 1; small s is just early time
    return (s > 0.5 * np.pi) & (np.abs(np.sin(s)) < guard)


def schrodinger_kernel(spec: KernelSpec, t, x, *, exponent_scale: float = 1.0,
                       guard: float = CAUSTIC_GUARD) -> KernelValue:
    """Schrodinger kernel as (log magnitude, phase); raises CausticError at focusing times."""
    if spec.kind.is_heat:
        raise ValueError("schrodinger_kernel needs a Schrodinger kernel spec")
    t = _positive("t", t)
    x = _positive("x", x)
    nu = spec.params.nu
    log_c0, arg_c0 = _log_c0(spec, spec.xi)
    xi = spec.xi
    sum_sq = x * x + xi * xi
    tau = spec.convention.internal_time(t)
    if spec.kind is KernelKind.SCHRODINGER_FREE or _underflows(spec.params.omega, tau):
        omega = spec.params.omega
        log_denom = np.log(2.0 * tau) + (math.log(omega) if omega else 0.0)
        chirp = sum_sq / (4.0 * tau)
        z = xi * x / (2.0 * tau)
        maslov = 0.0
    else:
        omega = spec.params.omega
        s = 2.0 * omega * tau
        turns = np.floor(s / np.pi)
        reduced = s - turns * np.pi
        denom = np.sin(reduced)
        if np.any(_focusing(s, guard)):
            raise CausticError(f"t={t!r} is within {guard:g} of a focusing time")
        chirp = omega * sum_sq * np.cos(reduced) / (2.0 * denom)
        z = omega * xi * x / denom
        log_denom = np.log(denom)
        maslov = -turns * np.pi * (nu + 1.0)
    jv = specfun.bessel_j(nu, np.broadcast_to(z, np.broadcast(z, x).shape))
    with np.errstate(divide="ignore"):
        log_mag = log_c0 + 0.5 * np.log(x) - log_denom + np.log(np.abs(jv))
    phase = arg_c0 + maslov + exponent_scale * chirp + np.where(jv < 0, np.pi, 0.0)
    log_mag = np.asarray(log_mag, dtype=float)
    return KernelValue(log_mag, _wrap(np.broadcast_to(phase, log_mag.shape)))


def evaluate(spec: KernelSpec, t, x, **kwargs) -> KernelValue:
    if spec.kind.is_heat:
        return heat_kernel(spec, t, x, **kwargs)
    return schrodinger_kernel(spec, t, x, **kwargs)


def causal_extension(value: KernelValue, t) -> KernelValue:
    """Heaviside extension: the zero kernel for ``t <= 0``, ``value`` otherwise."""
    t = np.asarray(t, dtype=float)
    log_mag = np.asarray(value.log_magnitude, dtype=float)
    shape = np.broadcast(log_mag, t).shape
    off = np.broadcast_to(t <= 0, shape)
    return KernelValue(np.where(off, -np.inf, np.broadcast_to(log_mag, shape)),
                       np.where(off, 0.0, np.broadcast_to(value.phase, shape)))


# ---------------------------------------------------------------- residuals

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFSETS = np.arange(-2, 3)


def pde_residual(spec: KernelSpec, t: float, x: float, h: float = 1e-3, *,
                 exponent_scale: float = 1.0) -> float:
    """Relative residual of the governing equation applied to the kernel.

    Fourth-order central differences in ``t`` and ``x``; the result is
    ``|residual| / (|E| + 1e-300)``.
    """
    if x - 2 * h <= 0 or t - 2 * h <= 0:
        raise StencilError("stencil crosses t <= 0 or x <= 0")
    ts = t + h * _OFFSETS
    xs = x + h * _OFFSETS
    if spec.kind is KernelKind.SCHRODINGER_HARMONIC:
        s = scaled_phase_time(spec, ts)
        if np.any(np.abs(np.sin(s)) < CAUSTIC_GUARD) or len(set(np.floor(s / np.pi))) > 1:
            raise StencilError("stencil crosses a focusing time")
    along_t = evaluate(spec, ts, np.full(5, x), exponent_scale=exponent_scale).value()
    along_x = evaluate(spec, np.full(5, t), xs, exponent_scale=exponent_scale).value()
    u = along_x[2]
    u_t = _D1 @ along_t / h
    u_xx = _D2 @ along_x / (h * h)
    f = spec.convention.factor
    spatial = f * (u_xx - spec.params.potential(x) * u)
    if spec.kind.is_heat:
        res = u_t - spatial
    else:
        res = 1j * u_t + spatial
    return float(abs(res) / (abs(u) + _TINY))


# ------------------------------------------------------------ normalization

@dataclass(frozen=True)
class NormalizationResult:
    c0: float
    limit: float
    masses: tuple
    t_sequence: tuple
    extrapolation_residual: float


def _neville_at_zero(ts, values):
    """Polynomial extrapolation of ``values(ts)`` to t = 0."""
    p = list(values)
    n = len(ts)
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            p[i] = (ts[j] * p[i] - ts[i] * p[i + 1]) / (ts[j] - ts[i])
    return p[0]


DEFAULT_T_SEQUENCE = tuple(10.0 ** -np.arange(1, 6))


def kernel_mass(spec: KernelSpec, t: float, tol: float = 1e-13) -> float:
    """Integral of the heat kernel over x in (0, inf) at time ``t``."""
    tau = spec.convention.internal_time(t)

    def f(x):
        return np.exp(heat_log(spec, t, x))

    value, _ = quadrature.integrate_half_line(f, tol=tol, rel_tol=tol,
                                              decay_hint=(spec.xi, math.sqrt(2.0 * tau)))
    return float(value)


def normalization_study(spec: KernelSpec, t_sequence: Optional[Sequence[float]] = None,
                        tol: float = 1e-6) -> NormalizationResult:
    if not spec.kind.is_heat:
        raise ValueError("normalization_constant is defined for heat kernels only")
    ts = tuple(sorted(DEFAULT_T_SEQUENCE if t_sequence is None else t_sequence, reverse=True))
    if len(ts) < 3 or ts[-1] <= 0:
        raise ValueError("t_sequence needs at least three positive times")
    bare = replace(spec, c0=1.0)
    masses = tuple(kernel_mass(bare, t) for t in ts)
    limit = _neville_at_zero(ts, masses)
    coarse = _neville_at_zero(ts[1:], masses[1:])
    residual = abs(limit - coarse)
    if residual > tol * abs(limit):
        raise NonConvergence(f"extrapolated limits {limit!r} and {coarse!r} disagree")
    return NormalizationResult(1.0 / limit, limit, masses, ts, residual)


def normalization_constant(spec: KernelSpec, t_sequence: Optional[Sequence[float]] = None,
                           tol: float = 1e-6) -> float:
    """c0 making the small-time mass limit of the heat kernel equal to one."""
    return normalization_study(spec, t_sequence, tol).c0


def normalize(spec: KernelSpec, **kwargs) -> NormalizedKernel:
    c0 = normalization_constant(spec, **kwargs)
    return NormalizedKernel(replace(spec, c0=c0), c0)
