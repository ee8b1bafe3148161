import math

import numpy as np
import pytest

from halfprop import kernels
from halfprop.kernels import Convention, KernelSpec
from halfprop.quadrature import (Integrand, ToleranceNotMet, _gk15, integrate_half_line,
                                 semigroup_defect)


def test_exponential():
    value, err = integrate_half_line(lambda x: np.exp(-x), 1e-12)
    assert abs(value - 1.0) <= 1e-12 and err <= 1e-12


def test_gaussian_moment():
    value, _ = integrate_half_line(lambda x: x * np.exp(-x * x), 1e-12)
    assert abs(value - 0.5) <= 1e-12


def test_complex_integrand_componentwise():
    value, _ = integrate_half_line(lambda x: np.exp((-1 + 1j) * x), 1e-12)
    assert abs(value - (0.5 + 0.5j)) <= 1e-12


def test_integrand_wrapper_uses_hint():
    f = Integrand(lambda x: np.exp(-0.5 * ((x - 40.0) / 0.01) ** 2), (40.0, 0.01))
    value, _ = integrate_half_line(f, 1e-12)
    assert value == pytest.approx(0.01 * math.sqrt(2 * math.pi), rel=1e-10)


def test_rejects_tiny_tolerance():
    with pytest.raises(ValueError):
        integrate_half_line(lambda x: np.exp(-x), 1e-15)


def test_tolerance_not_met_carries_best_value():
    with pytest.raises(ToleranceNotMet) as info:
        integrate_half_line(lambda x: np.exp(-x) * np.sin(50 * x) ** 2, 1e-13, limit=12)
    assert math.isfinite(info.value.value) and info.value.error_estimate > 0


@pytest.mark.xfail(strict=True, reason="the propagator loses mass t*V(xi)/2 = 1e-2 at t = 0.01; "
                   "a 2e-3 band is below the first-order deficit")
def test_heat_kernel_mass_at_small_time():
    spec = KernelSpec.build("heat", 1.0, 1.0, 1.0, Convention.HALF)
    tau = spec.convention.internal_time(0.01)
    value, _ = integrate_half_line(lambda x: kernels.heat_kernel(spec, 0.01, x).real(), 1e-12,
                                   decay_hint=(1.0, math.sqrt(2 * tau)))
    assert abs(value - 1.0) <= 2e-3


@pytest.mark.parametrize("k, omega, xi", [(1.0, 1.0, 1.0), (1.0, 0.5, 0.5), (0.0, 1.0, 2.0), (1.0, 0.0, 1.0)])
def test_small_time_mass_deficit_is_first_order_in_potential(k, omega, xi):
    # the semigroup generated by (d^2 - V)/2 drains mass at rate V/2 near the source
    spec = KernelSpec.build("heat", k, omega, xi, Convention.HALF)
    t = 1e-4
    slope = (1.0 - kernels.kernel_mass(spec, t)) / t
    assert slope == pytest.approx(0.5 * spec.params.potential(xi), rel=1e-3)


KNOWN = [
    (lambda x: np.exp(-x), 1.0),
    (lambda x: np.exp(-2 * x), 0.5),
    (lambda x: x * np.exp(-x), 1.0),
    (lambda x: x ** 2 * np.exp(-x), 2.0),
    (lambda x: np.exp(-x * x), math.sqrt(math.pi) / 2),
    (lambda x: x * np.exp(-x * x), 0.5),
    (lambda x: x ** 2 * np.exp(-x * x), math.sqrt(math.pi) / 4),
    (lambda x: 1 / (1 + x * x) ** 2, math.pi / 4),
    (lambda x: 1 / (1 + x) ** 3, 0.5),
    (lambda x: np.exp(-x) * np.cos(x), 0.5),
    (lambda x: np.exp(-x) * np.sin(x), 0.5),
    (lambda x: np.exp(-x) * np.sin(3 * x), 0.3),
    (lambda x: np.sqrt(x) * np.exp(-x), math.sqrt(math.pi) / 2),
    (lambda x: np.exp(-x) / np.sqrt(x), math.sqrt(math.pi)),
    (lambda x: np.log1p(x) * np.exp(-x), 0.5963473623231940),
    (lambda x: np.exp(-(x - 3) ** 2), math.sqrt(math.pi) / 2 * (1 + math.erf(3))),
    (lambda x: 1 / np.cosh(x), math.pi / 2),
    (lambda x: 1 / np.cosh(x) ** 2, 1.0),
    (lambda x: x / np.sinh(x), math.pi ** 2 / 4),
    (lambda x: x ** 3 * np.exp(-x * x), 0.5),
]


@pytest.mark.parametrize("index", range(len(KNOWN)))
def test_error_estimate_is_honest(index):
    f, exact = KNOWN[index]
    value, err = integrate_half_line(f, 1e-10)
    assert abs(value - exact) <= 10 * err


def test_deterministic():
    spec = KernelSpec.build("heat", 2.0, 0.7, 1.3, Convention.HALF)
    f = lambda x: kernels.heat_kernel(spec, 0.05, x).real()
    a = integrate_half_line(f, 1e-12, decay_hint=(1.3, 0.3))
    b = integrate_half_line(f, 1e-12, decay_hint=(1.3, 0.3))
    assert a == b


@pytest.mark.parametrize("t", [1e-3, 0.1, 1.0])
def test_truncation_tail_is_negligible(t):
    spec = KernelSpec.build("heat", 1.0, 1.0, 2.0, Convention.HALF)
    width = math.sqrt(2 * spec.convention.internal_time(t))
    x_max = max(2.0 + 12 * width, 10.0)
    edges = np.linspace(x_max, 2 * x_max, 65)
    vals, _ = _gk15(lambda x: kernels.heat_kernel(spec, t, x).real(), edges[:-1], edges[1:])
    assert abs(vals.sum()) < 1e-13


def test_semigroup_free_image_charge():
    spec = KernelSpec.build("heat", 0.0, 0.0, 1.0, Convention.HALF)
    assert semigroup_defect(spec, 0.5, 0.5, 1.2) <= 1e-8


def test_semigroup_harmonic():
    spec = KernelSpec.build("heat", 1.0, 1.0, 1.0, Convention.HALF)
    assert semigroup_defect(spec, 0.3, 0.7, 0.8) <= 1e-6


def test_semigroup_defect_vanishes_as_first_step_shrinks():
    spec = KernelSpec.build("heat", 1.0, 1.0, 1.0, Convention.HALF)
    defects = [semigroup_defect(spec, t1, 0.5, 0.9) for t1 in (1e-1, 1e-2, 1e-3)]
    assert max(defects) <= 1e-9


def test_semigroup_rejects_schrodinger():
    spec = KernelSpec.build("schrodinger", 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        semigroup_defect(spec, 0.1, 0.2, 1.0)
