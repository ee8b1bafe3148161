import math

import numpy as np
import pytest

from halfprop import _accel, kernels, oracle
from halfprop.kernels import Convention, KernelSpec, PotentialParams
from halfprop.oracle import (GridState, SpectralBasis, TailTooLarge, cn_evolve, delta_limit_test,
                             eigenfunction, eigenvalue, rayleigh_quotient, spectral_heat_kernel)
from halfprop.quadrature import Integrand, integrate_half_line
from halfprop.verify import gaussian_packet

P1 = PotentialParams(1.0, 1.0)


# ------------------------------------------------------------------ spectrum

@pytest.mark.parametrize("k, expected", [(0.0, 3.0), (0.75, 4.0)])
def test_ground_energy(k, expected):
    params = PotentialParams(k, 1.0)
    assert eigenvalue(params, 0) == pytest.approx(expected, rel=1e-15)
    assert eigenvalue(params, 0, Convention.HALF) == pytest.approx(expected / 2, rel=1e-15)
    # the grid operator agrees, which is what makes the formula trustworthy
    assert rayleigh_quotient(params, 0, 15.0, 8192) == pytest.approx(expected, rel=1e-5)


@pytest.mark.parametrize("omega", [0.5, 1.0, 1.7])
def test_equal_spacing(omega):
    params = PotentialParams(2.25, omega)
    levels = [eigenvalue(params, n) for n in range(6)]
    np.testing.assert_allclose(np.diff(levels), 4 * omega, rtol=1e-14)
    for n in (1, 2):
        assert rayleigh_quotient(params, n, 12.0 / math.sqrt(omega) + 3, 8192) == pytest.approx(levels[n], rel=1e-4)


def test_eigenfunctions_vanish_at_origin():
    x = np.array([1e-3, 1e-6, 1e-9])
    for k in (-0.25, 0.0, 2.0):
        vals = np.abs(eigenfunction(PotentialParams(k, 1.0), 3, x))
        assert np.all(np.diff(vals) < 0) and vals[-1] < 1e-4


def test_orthonormality():
    params = P1
    n_max = 20
    gram = np.empty((n_max + 1, n_max + 1))
    for m in range(n_max + 1):
        for n in range(m, n_max + 1):
            value, _ = integrate_half_line(
                lambda x, m=m, n=n: eigenfunction(params, m, x) * eigenfunction(params, n, x),
                tol=1e-13, decay_hint=(0.0, 8.0))
            gram[m, n] = gram[n, m] = value
    assert np.max(np.abs(gram - np.eye(n_max + 1))) <= 1e-10


# ---------------------------------------------------------------- expansion

def test_spectral_matches_closed_form():
    spec = KernelSpec.build("heat", 1.0, 1.0, 1.0, Convention.UNIT)
    basis = SpectralBasis(P1)
    ref = spectral_heat_kernel(basis, 1.0, 0.5, np.array([1.5])).value
    assert kernels.heat_kernel(spec, 0.5, 1.5).real() == pytest.approx(ref[0], rel=1e-9)


def test_tail_bound_is_honest():
    x = np.linspace(0.3, 3.0, 7)
    for t in (0.05, 0.2, 1.0):
        basis = SpectralBasis(P1, n_terms=40)
        short = spectral_heat_kernel(basis, 1.2, t, x, tol=None)
        long = spectral_heat_kernel(basis.extended(20), 1.2, t, x, tol=None)
        assert np.all(np.abs(long.value - short.value) <= short.tail_bound)


def test_tail_too_large():
    with pytest.raises(TailTooLarge):
        spectral_heat_kernel(SpectralBasis(P1, n_terms=5), 1.0, 0.01, np.array([1.0]))


def test_large_time_ground_state_dominates():
    basis = SpectralBasis(P1)
    x, xi = np.array([0.7, 1.4]), 1.1
    for t in (1.0, 2.0, 3.0):
        full = spectral_heat_kernel(basis, xi, t, x).value
        ground = math.exp(-eigenvalue(P1, 0) * t) * eigenfunction(P1, 0, x) * eigenfunction(P1, 0, np.array([xi]))
        assert np.max(np.abs(full / ground - 1)) <= 3 * math.exp(-4 * P1.omega * t)


def test_spectral_symmetric():
    basis = SpectralBasis(PotentialParams(2.25, 0.5))
    a = spectral_heat_kernel(basis, 0.6, 0.4, np.array([2.1])).value
    b = spectral_heat_kernel(basis, 2.1, 0.4, np.array([0.6])).value
    assert a[0] == b[0]


# ------------------------------------------------------------ Crank-Nicolson

def test_zero_state_stays_zero():
    state = GridState.uniform(10.0, 256)
    end = cn_evolve("heat", P1, state, 0.5, 1e-2)
    assert np.all(end.values == 0) and end.time == 0.5


def test_grid_state_validation():
    with pytest.raises(ValueError):
        GridState.uniform(10.0, 8, np.zeros(3))
    with pytest.raises(ValueError):
        cn_evolve("heat", P1, GridState.uniform(1.0, 8), 1.0, 0.0)


def test_schrodinger_mass_is_conserved():
    state = GridState.uniform(15.0, 2048, gaussian_packet(2.0, 0.4).evaluate)
    end = cn_evolve("schrodinger", P1, state, 0.2, 1e-3)
    assert end.mass_drift <= 1e-12
    assert end.mass() == pytest.approx(state.mass(), rel=1e-11)


def test_heat_ground_state_decays_at_ground_energy():
    h, T = 1 / 512, 0.5
    state = GridState.uniform(15.0, 15 * 512, lambda x: eigenfunction(P1, 0, x))
    assert state.h == h
    end = cn_evolve("heat", P1, state, T, 1e-4)
    expected = math.exp(-eigenvalue(P1, 0) * T) * state.values
    assert np.max(np.abs(end.values - expected)) <= 1e-6


def test_heat_cn_is_second_order():
    spec = KernelSpec.build("heat", 1.0, 1.0, 1.0, Convention.HALF)
    errors = [oracle.cn_kernel_check(spec, 0.05, 0.2, 10.0, n, dt).rel_l2
              for n, dt in [(500, 2e-3), (1000, 1e-3), (2000, 5e-4)]]
    rates = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all((3.5 <= rates) & (rates <= 4.5)), (errors, rates)


def test_schrodinger_packet_agrees_with_kernel_propagation():
    spec = KernelSpec.build("schrodinger", 1.0, 1.0, 1.0)
    result = oracle.cn_packet_check(spec, gaussian_packet(1.5, 0.3), 0.3, 20.0, 4096, 1e-4, n_probe=24)
    assert result.rel_l2 <= 5e-3
    assert result.mass_drift <= 1e-10


def test_kernel_initial_data_is_aliased_on_the_prescribed_grid():
    spec = KernelSpec.build("schrodinger", 1.0, 1.0, 1.0)
    result = oracle.cn_kernel_check(spec, 1e-3, 0.3, 20.0, 4096, 1e-4)
    assert result.nyquist_ratio > 10
    assert result.rel_l2 > 1


# --------------------------------------------------------------- delta limit

def test_heat_delta_limit_converges_linearly():
    spec = kernels.normalize(KernelSpec.build("heat", 1.0, 1.0, 1.0, Convention.HALF)).spec
    errors = [delta_limit_test(spec, lambda x: np.exp(-x), t) for t in (1e-2, 1e-3, 1e-4)]
    ratios = np.array(errors[:-1]) / np.array(errors[1:])
    assert np.all((7 <= ratios) & (ratios <= 13)), errors
    assert errors[-1] <= 1e-4


def test_heat_delta_limit_off_unit_source():
    spec = kernels.normalize(KernelSpec.build("heat", 1.0, 1.0, 2.0, Convention.HALF)).spec
    f = Integrand(lambda x: np.sin(x) * np.exp(-(x - 2) ** 2), (2.0, 1.0))
    errors = [delta_limit_test(spec, f, t) for t in (1e-3, 1e-4)]
    assert errors[1] < errors[0] and errors[1] <= 1e-3 * abs(math.sin(2.0))


def test_schrodinger_delta_limit():
    spec = KernelSpec.build("schrodinger", 1.0, 1.0, 1.5)
    f = Integrand(lambda x: np.exp(-((x - 1.5) / 0.4) ** 2), (1.5, 0.4))
    ts = np.array([1e-2, 3e-3, 1e-3])
    errors = np.array([delta_limit_test(spec, f, t, tol=1e-11) for t in ts])
    # first order in t with slope |f''(xi) - V(xi) f(xi)|
    slope = 2 / 0.4 ** 2 + spec.params.potential(1.5)
    np.testing.assert_allclose(errors / ts, slope, rtol=2e-2)
    with pytest.raises(ValueError):
        delta_limit_test(spec, f.evaluate, 1e-3)


# -------------------------------------------------------------- backends

@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba disabled")
def test_numba_and_numpy_kernels_agree():
    basis = SpectralBasis(PotentialParams(2.25, 0.5))
    args = (np.linspace(0.3, 3.0, 9), 1.1, 0.3, 0.5, basis.params.nu, basis.log_norms, basis.energies())
    np.testing.assert_allclose(oracle._spectral_sum_numba(*args), oracle._spectral_sum_numpy(*args),
                               rtol=1e-13)
    state = GridState.uniform(15.0, 1024, gaussian_packet(2.0, 0.4).evaluate)
    diag, off = oracle._operator_diagonal(P1, state)
    for dtype, c in ((float, 0.5e-3), (complex, 0.5e-3j)):
        a = np.array(state.values, dtype=dtype)
        b = a.copy()
        drift_a = oracle._cn_numba(a, diag, off, c, 50, dtype is complex)
        drift_b = oracle._cn_numpy(b, diag, off, c, 50, dtype is complex)
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-14)
        assert abs(drift_a - drift_b) <= 1e-13
