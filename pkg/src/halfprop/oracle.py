"""Reference solutions that do not use the closed-form kernels.

Two engines live here.  The spectral oracle sums the eigenfunction
expansion of ``-d^2/dx^2 + k/x^2 + w^2 x^2`` on the half-line; its
eigenpairs are checked independently by orthonormality and by Rayleigh
quotients on the finite-difference operator.  The Crank-Nicolson evolver
steps either equation on a uniform grid with Dirichlet ends.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import _accel, kernels
from .kernels import Convention, PotentialParams
from .quadrature import Integrand, integrate_half_line
from .specfun import gamma_ln, laguerre

HEAT = "heat"
SCHRODINGER = "schrodinger"


class TailTooLarge(RuntimeError):
    def __init__(self, value, tail_bound, tol):
        super().__init__(f"spectral tail bound {tail_bound:.3e} exceeds {tol:.3e}; add terms")
        self.value = value
        self.tail_bound = tail_bound


def _equation(kind) -> str:
    name = str(getattr(kind, "value", kind)).lower()
    if name.startswith("heat"):
        return HEAT
    if name.startswith("schr"):
        return SCHRODINGER
    raise ValueError(f"unknown equation kind {kind!r}")


# ---------------------------------------------------------------- spectrum

def eigenvalue(params: PotentialParams, n: int, convention=Convention.UNIT) -> float:
    """``E_n = w (4n + 2 nu + 2)``, halved under the half convention."""
    if not params.omega > 0:
        raise ValueError("the spectrum is discrete only for omega > 0")
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    return Convention(convention).factor * params.omega * (4 * n + 2 * params.nu + 2)


def _log_norm(params: PotentialParams, n: int) -> float:
    nu, w = params.nu, params.omega
    return 0.5 * (math.log(2.0) + (nu + 1) * math.log(w) + gamma_ln(n + 1.0) - gamma_ln(n + nu + 1.0))


def eigenfunction(params: PotentialParams, n: int, x) -> np.ndarray:
    """Normalized ``N_n x^(nu+1/2) exp(-w x^2/2) L_n^nu(w x^2)``."""
    if not params.omega > 0:
        raise ValueError("eigenfunctions need omega > 0")
    x = np.asarray(x, dtype=float)
    nu, w = params.nu, params.omega
    with np.errstate(divide="ignore"):
        envelope = np.exp(_log_norm(params, n) + (nu + 0.5) * np.log(x) - 0.5 * w * x * x)
    return envelope * laguerre(n, nu, w * x * x)


@dataclass(frozen=True)
class SpectralBasis:
    params: PotentialParams
    convention: Convention = Convention.UNIT
    n_terms: int = 100
    log_norms: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.params.omega > 0:
            raise ValueError("SpectralBasis needs omega > 0")
        if self.n_terms < 1:
            raise ValueError("n_terms must be >= 1")
        object.__setattr__(self, "convention", Convention(self.convention))
        logs = np.array([_log_norm(self.params, n) for n in range(self.n_terms)])
        logs.setflags(write=False)
        object.__setattr__(self, "log_norms", logs)

    def energies(self) -> np.ndarray:
        n = np.arange(self.n_terms)
        w, nu = self.params.omega, self.params.nu
        return self.convention.factor * w * (4 * n + 2 * nu + 2)

    def extended(self, extra: int) -> "SpectralBasis":
        return SpectralBasis(self.params, self.convention, self.n_terms + extra)


@_accel.njit
def _laguerre_column(y, nu, n_terms):
    """``L_n^nu(y)`` for ``n < n_terms``, by the same recurrence as the x-side sums."""
    out = np.empty(n_terms)
    prev, cur = 0.0, 1.0
    for n in range(n_terms):
        out[n] = cur
        prev, cur = cur, ((2 * n + 1 + nu - y) * cur - (n + nu) * prev) / (n + 1)
    return out


# Both sums multiply c_n * (L_n(w x^2) L_n(w xi^2)) and use an exponent that
# is symmetric in x and xi, so swapping source and target is bit-for-bit exact.

@_accel.njit
def _spectral_sum_numba(x, xi, t, omega, nu, log_norms, energies):
    n_terms = log_norms.shape[0]
    coef = np.exp(2.0 * log_norms - energies * t)
    lag_xi = _laguerre_column(omega * xi * xi, nu, n_terms)
    m = x.shape[0]
    y1 = np.empty(m)
    for i in range(m):
        y1[i] = omega * x[i] * x[i]
    a_prev = np.zeros(m)
    a = np.ones(m)
    acc = np.zeros(m)
    for n in range(n_terms):
        c, b = coef[n], lag_xi[n]
        for i in range(m):
            acc[i] += c * (a[i] * b)
            nxt = ((2 * n + 1 + nu - y1[i]) * a[i] - (n + nu) * a_prev[i]) / (n + 1)
            a_prev[i] = a[i]
            a[i] = nxt
    y2 = omega * xi * xi
    for i in range(m):
        acc[i] *= math.exp((nu + 0.5) * (math.log(x[i]) + math.log(xi)) - 0.5 * (y1[i] + y2))
    return acc


def _spectral_sum_numpy(x, xi, t, omega, nu, log_norms, energies):
    coef = np.exp(2.0 * log_norms - energies * t)
    lag_xi = _laguerre_column(omega * xi * xi, nu, log_norms.shape[0])
    y1 = omega * x * x
    a_prev, a = np.zeros_like(x), np.ones_like(x)
    acc = np.zeros_like(x)
    for n in range(log_norms.shape[0]):
        acc += coef[n] * (a * lag_xi[n])
        a_prev, a = a, ((2 * n + 1 + nu - y1) * a - (n + nu) * a_prev) / (n + 1)
    return acc * np.exp((nu + 0.5) * (np.log(x) + math.log(xi)) - 0.5 * (y1 + omega * xi * xi))


def spectral_tail_bound(basis: SpectralBasis, xi: float, t: float, x) -> np.ndarray:
    """Bound on the omitted terms ``n >= n_terms`` of the expansion.

    Uses ``|L_n^a(y)| <= C(n) exp(y/2)`` with ``C(n) = Gamma(n+a+1)/(n! Gamma(a+1))``.
    The bounded terms have ratio ``(n+1+nu)/(n+1) exp(-dE t)``, which decreases
    in ``n``, so everything past the first ratio below one sums geometrically.
    """
    x = np.asarray(x, dtype=float)
    p = basis.params
    nu = p.nu
    gap = basis.convention.factor * 4 * p.omega * t
    n = basis.n_terms
    log_c = gamma_ln(n + nu + 1.0) - gamma_ln(n + 1.0) - gamma_ln(nu + 1.0)
    log_term = (2 * _log_norm(p, n) - eigenvalue(p, n, basis.convention) * t + 2 * log_c)
    total = 0.0
    while True:
        ratio = (n + 1 + nu) / (n + 1) * math.exp(-gap)
        if ratio < 1.0:
            total += math.exp(log_term) / (1.0 - ratio)
            break
        total += math.exp(log_term)
        log_term += math.log(ratio)
        n += 1
    return total * np.exp((nu + 0.5) * (np.log(x) + math.log(xi)))


@dataclass(frozen=True)
class SpectralValue:
    value: np.ndarray
    tail_bound: np.ndarray


def spectral_heat_kernel(basis: SpectralBasis, xi: float, t: float, x, tol: Optional[float] = 1e-10):
    """Truncated expansion ``sum_n exp(-E_n t) psi_n(x) psi_n(xi)``.

    Raises ``TailTooLarge`` when the tail bound exceeds ``tol`` times the value
    anywhere; ``tol=None`` skips the check.
    """
    if not (xi > 0 and t > 0):
        raise ValueError("xi and t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    p = basis.params
    args = (x, float(xi), float(t), p.omega, p.nu, basis.log_norms, basis.energies())
    if _accel.HAVE_NUMBA:
        value = _spectral_sum_numba(*args)
    else:
        value = _spectral_sum_numpy(*args)
    tail = spectral_tail_bound(basis, xi, t, x)
    if tol is not None and np.any(tail > tol * np.abs(value)):
        raise TailTooLarge(value, float(np.max(tail / np.abs(value))), tol)
    return SpectralValue(value, tail)


# ------------------------------------------------------------ Crank-Nicolson

@dataclass(frozen=True)
class GridState:
    """Interior nodes ``x_j = j h``, ``j = 1 .. n``; both ends are Dirichlet zeros."""

    x: np.ndarray
    values: np.ndarray
    time: float
    h: float
    x_max: float
    mass_drift: float = 0.0

    @classmethod
    def uniform(cls, x_max: float, n_intervals: int, values=None, time: float = 0.0):
        h = x_max / n_intervals
        x = h * np.arange(1, n_intervals)
        if values is None:
            values = np.zeros_like(x)
        elif callable(values):
            values = values(x)
        values = np.asarray(values)
        if values.shape != x.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {x.shape}")
        return cls(x, values, float(time), h, float(x_max))

    def mass(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.h)


def _operator_diagonal(params: PotentialParams, state: GridState):
    return 2.0 / state.h ** 2 + params.potential(state.x), -1.0 / state.h ** 2


@_accel.njit
def _cn_numba(u, diag, off, c, steps, track_mass):
    n = u.shape[0]
    # factor (I + cA) once: forward-elimination multipliers and pivots
    piv = np.empty(n, dtype=u.dtype)
    mult = np.empty(n, dtype=u.dtype)
    lo = c * off
    piv[0] = 1.0 + c * diag[0]
    for j in range(1, n):
        mult[j] = lo / piv[j - 1]
        piv[j] = 1.0 + c * diag[j] - mult[j] * lo
    rhs = np.empty(n, dtype=u.dtype)
    drift = 0.0
    mass = 0.0
    if track_mass:
        for j in range(n):
            mass += abs(u[j]) ** 2
    for _ in range(steps):
        for j in range(n):
            acc = (1.0 - c * diag[j]) * u[j]
            if j > 0:
                acc -= lo * u[j - 1]
            if j < n - 1:
                acc -= lo * u[j + 1]
            rhs[j] = acc
        for j in range(1, n):
            rhs[j] -= mult[j] * rhs[j - 1]
        u[n - 1] = rhs[n - 1] / piv[n - 1]
        for j in range(n - 2, -1, -1):
            u[j] = (rhs[j] - lo * u[j + 1]) / piv[j]
        if track_mass:
            new_mass = 0.0
            for j in range(n):
                new_mass += abs(u[j]) ** 2
            if mass > 0:
                drift = max(drift, abs(new_mass - mass) / mass)
            mass = new_mass
    return drift


def _cn_numpy(u, diag, off, c, steps, track_mass):
    n = u.shape[0]
    a = sp.diags([np.full(n - 1, off), diag, np.full(n - 1, off)], [-1, 0, 1], format="csc")
    eye = sp.identity(n, format="csc")
    lhs = splu((eye + c * a).tocsc())
    rhs_op = (eye - c * a).tocsr()
    drift = 0.0
    mass = float(np.sum(np.abs(u) ** 2))
    for _ in range(steps):
        u[:] = lhs.solve(rhs_op @ u)
        if track_mass:
            new_mass = float(np.sum(np.abs(u) ** 2))
            if mass > 0:
                drift = max(drift, abs(new_mass - mass) / mass)
            mass = new_mass
    return drift


def cn_evolve(kind, params: PotentialParams, state: GridState, t_final: float, dt: float,
              convention=Convention.UNIT) -> GridState:
    """Crank-Nicolson from ``state.time`` to ``t_final``.

    The step count is rounded up so the last step lands exactly on
    ``t_final``.  For the Schrodinger equation the step is the Cayley
    transform and the returned ``mass_drift`` is the largest relative change
    of ``sum |u|^2 h`` over any single step.
    """
    eq = _equation(kind)
    if not dt > 0:
        raise ValueError("dt must be positive")
    span = t_final - state.time
    if span < 0:
        raise ValueError("t_final precedes the state time")
    steps = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
    if steps == 0:
        return state
    step = span / steps
    factor = Convention(convention).factor
    diag, off = _operator_diagonal(params, state)
    if eq == HEAT:
        u = np.array(state.values, dtype=complex if np.iscomplexobj(state.values) else float)
        c = 0.5 * step * factor
        if np.iscomplexobj(u):
            c = complex(c)
    else:
        u = np.array(state.values, dtype=complex)
        c = 0.5j * step * factor
    track = eq == SCHRODINGER
    if _accel.HAVE_NUMBA:
        drift = _cn_numba(u, diag, off, c, steps, track)
    else:
        drift = _cn_numpy(u, diag, off, c, steps, track)
    return replace(state, values=u, time=float(t_final), mass_drift=float(drift))


def rayleigh_quotient(params: PotentialParams, n: int, x_max: float, n_intervals: int,
                      convention=Convention.UNIT) -> float:
    """Discrete ``<psi_n, A psi_n> / <psi_n, psi_n>`` for the grid operator used by CN."""
    state = GridState.uniform(x_max, n_intervals, lambda x: eigenfunction(params, n, x))
    diag, off = _operator_diagonal(params, state)
    u = state.values
    au = diag * u
    au[1:] += off * u[:-1]
    au[:-1] += off * u[1:]
    return Convention(convention).factor * float(np.dot(u, au) / np.dot(u, u))


@dataclass(frozen=True)
class CNComparison:
    rel_l2: float
    mass_drift: float
    nyquist_ratio: float
    state: GridState = field(repr=False)


def _local_wavenumber(spec, t, x):
    """Largest phase gradient of the kernel over ``x`` (zero for heat kernels)."""
    if spec.kind.is_heat:
        return 0.0
    tau = spec.convention.internal_time(t)
    if spec.kind.is_free:
        return float((np.max(x) + spec.xi) / (2 * tau))
    w = spec.params.omega
    s = abs(math.sin(2 * w * tau))
    return float((np.max(x) + spec.xi) * w / s)


def cn_kernel_check(spec, t0: float, duration: float, x_max: float, n_intervals: int,
                    dt: float) -> CNComparison:
    """Evolve the closed-form kernel at ``t0`` by CN and compare at ``t0 + duration``.

    ``nyquist_ratio`` is the kernel's largest local wavenumber at ``t0`` over
    the grid Nyquist wavenumber ``pi/h``; above one the initial data is aliased.
    """
    eq = HEAT if spec.kind.is_heat else SCHRODINGER
    start = GridState.uniform(x_max, n_intervals, lambda x: kernels.evaluate(spec, t0, x).value(),
                              time=t0)
    end = cn_evolve(eq, spec.params, start, t0 + duration, dt, spec.convention)
    exact = kernels.evaluate(spec, t0 + duration, end.x).value()
    rel = float(np.linalg.norm(end.values - exact) / np.linalg.norm(exact))
    ratio = _local_wavenumber(spec, t0, start.x) * start.h / math.pi
    return CNComparison(rel, end.mass_drift, ratio, end)


def propagate_by_kernel(spec, f, t: float, x, tol: float = 1e-11) -> np.ndarray:
    """``u(t, x) = int E_y(t, x) f(y) dy`` by quadrature over the source.

    The kernels are symmetric in source and target, so each target ``x``
    becomes the source of a kernel integrated over its spatial argument.
    ``f`` must be an ``Integrand`` with a decay hint.
    """
    if not isinstance(f, Integrand) or f.decay_hint is None:
        raise ValueError("f must be an Integrand with a decay hint")
    out = []
    for xj in np.atleast_1d(x):
        local = spec.with_source(float(xj))
        value, _ = integrate_half_line(lambda y, s=local: kernels.evaluate(s, t, y).value() * f.evaluate(y),
                                       tol=tol, decay_hint=f.decay_hint, limit=20000)
        out.append(value)
    return np.array(out)


def cn_packet_check(spec, packet: Integrand, duration: float, x_max: float, n_intervals: int,
                    dt: float, n_probe: int = 64) -> CNComparison:
    """CN evolution of a smooth packet against kernel propagation of the same packet.

    ``spec`` supplies the equation, potential and convention; its source is
    ignored.  The comparison uses ``n_probe`` evenly spaced grid nodes.
    """
    eq = HEAT if spec.kind.is_heat else SCHRODINGER
    start = GridState.uniform(x_max, n_intervals, packet.evaluate)
    end = cn_evolve(eq, spec.params, start, duration, dt, spec.convention)
    idx = np.linspace(0, len(end.x) - 1, n_probe + 2).round().astype(int)[1:-1]
    exact = propagate_by_kernel(spec, packet, duration, end.x[idx])
    rel = float(np.linalg.norm(end.values[idx] - exact) / np.linalg.norm(exact))
    return CNComparison(rel, end.mass_drift, 0.0, end)


# -------------------------------------------------------------- delta limit

def delta_limit_test(spec, f, t: float, tol: float = 1e-12) -> float:
    """``|int_0^inf E_xi(t, x) f(x) dx - f(xi)|``.

    ``f`` is a vectorized callable or an ``Integrand``; for Schrodinger kernels
    it should be windowed, and its decay hint (when given) places the panels.
    """
    hint = None
    if isinstance(f, Integrand):
        hint = f.decay_hint
        f = f.evaluate
    xi = spec.xi
    if spec.kind.is_heat:
        tau = spec.convention.internal_time(t)
        width = math.sqrt(2.0 * tau)
        if hint is not None:
            width = max(width, hint[1])
        hint = (xi, width)

        def integrand(x):
            return np.exp(kernels.heat_log(spec, t, x)) * f(x)
    else:
        if hint is None:
            raise ValueError("Schrodinger delta test needs a windowed f with a decay hint")

        def integrand(x):
            return kernels.evaluate(spec, t, x).value() * f(x)
    value, _ = integrate_half_line(integrand, tol=tol, decay_hint=hint, limit=20000)
    return abs(value - f(np.array([xi]))[0])
