"""Acceptance criteria for the package, one test per criterion.

Every test records a ``criterion N: PASS|FAIL`` line; the lines are printed
as a block at the end of the pytest run, or directly when this file is run
as ``python3 -m tests.test_acceptance``.

Two criteria cannot be met as stated and are marked ``xfail(strict=True)``
around the unmodified assertion, each paired with a test of what does hold:

* 3(a): the kernel's mass at t = 1e-3 falls short of one by t V(xi)/2 to
  first order, which exceeds 2e-3 wherever V(xi) > 4.
* 8: the kernel at t0 = 1e-3 oscillates far faster than a grid with
  4096 intervals on [0, 20] can represent, so Crank-Nicolson evolves
  aliased data.  A smooth packet evolved both ways agrees.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from halfprop import kernels, oracle, specfun, symmetry
from halfprop.kernels import Convention, KernelKind, KernelSpec, PotentialParams
from halfprop.quadrature import semigroup_defect
from halfprop.verify import gaussian_packet, pde_sample_points

RESULTS = {}


def record(criterion, passed, detail):
    line = f"criterion {criterion:>4}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS[criterion] = line
    print(line)
    return passed


def _spec(kind, k, omega, xi, convention):
    return KernelSpec(KernelKind.select(kind, omega), PotentialParams(k, omega), xi, convention)


# ---------------------------------------------------------------- criterion 1

def check_1():
    start = time.perf_counter()
    worst = 0.0
    x = np.linspace(0.3, 3.0, 5)
    for k, w in itertools.product((0.0, 1.0, 2.25), (0.5, 1.0)):
        basis = oracle.SpectralBasis(PotentialParams(k, w), Convention.UNIT, 100)
        for xi, t in itertools.product((0.5, 1.0, 2.0), (0.2, 0.5, 1.0)):
            ref = oracle.spectral_heat_kernel(basis, xi, t, x).value
            got = kernels.heat_kernel(_spec("heat", k, w, xi, Convention.UNIT), t, x).real()
            worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
    elapsed = time.perf_counter() - start
    return record("1", worst <= 1e-9 and elapsed <= 5.0,
                  f"closed form vs 100-term expansion: max rel diff {worst:.2e} (<= 1e-9), {elapsed:.2f} s (<= 5 s)")


def test_criterion_1_spectral_agreement():
    assert check_1()


# ---------------------------------------------------------------- criterion 2

def check_2():
    worst, detector = 0.0, math.inf
    for kind, w in itertools.product(("heat", "schrodinger"), (1.0, 0.0)):
        kk = KernelKind.select(kind, w)
        conv = Convention.HALF if kk.is_heat else Convention.UNIT
        spec = _spec(kind, 1.0, w, 1.0, conv)
        t, x = pde_sample_points(kk, w)
        worst = max(worst, max(kernels.pde_residual(spec, a, b) for a, b in zip(t, x)))
        detector = min(detector, kernels.pde_residual(spec, 0.5, 1.2, exponent_scale=1.01))
    return record("2", worst <= 1e-6 and detector >= 1e-2,
                  f"PDE residual at 50 Halton points x 4 kernels: {worst:.2e} (<= 1e-6); "
                  f"perturbed exponent {detector:.2e} (>= 1e-2)")


def test_criterion_2_pde_residuals():
    assert check_2()


# ---------------------------------------------------------------- criterion 3

COMBOS = list(itertools.product((0.0, 1.0), (0.5, 1.0), (0.5, 1.0, 2.0)))


def _normalized(k, w, xi):
    return kernels.normalize(_spec("heat", k, w, xi, Convention.HALF)).spec


def check_3a():
    devs = {c: abs(kernels.kernel_mass(_normalized(*c), 1e-3) - 1) for c in COMBOS}
    bad = [c for c, d in devs.items() if d > 2e-3]
    return record("3a", not bad, f"mass at t=1e-3 within 2e-3 of 1: worst {max(devs.values()):.2e}, "
                                 f"{len(bad)}/{len(COMBOS)} combos over (k, w, xi) = {bad}")


@pytest.mark.xfail(strict=True, reason="mass deficit at t=1e-3 is t V(xi)/2 to first order, "
                                       "above 2e-3 when V(xi) > 4")
def test_criterion_3a_mass_at_small_time():
    assert check_3a()


def test_criterion_3a_deficit_follows_first_order_law():
    for k, w, xi in COMBOS:
        spec = _normalized(k, w, xi)
        deficit = 1 - kernels.kernel_mass(spec, 1e-3)
        assert deficit / (1e-3 * spec.params.potential(xi) / 2) == pytest.approx(1.0, abs=1e-2), (k, w, xi)


def check_3b():
    worst = 0.0
    for c in COMBOS:
        spec = _spec("heat", *c, Convention.HALF)
        study = kernels.normalization_study(spec)
        worst = max(worst, abs(study.limit * kernels.closed_form_c0(spec).real - 1))
    return record("3b", worst <= 1e-6, f"extrapolated small-time mass limit: |limit - 1| = {worst:.2e} (<= 1e-6)")


def test_criterion_3b_extrapolated_limit():
    assert check_3b()


def check_3c():
    spread = 0.0
    for k, w in itertools.product((0.0, 1.0), (0.0, 0.5, 1.0)):
        ratios = [kernels.normalization_constant(_spec("heat", k, w, xi, Convention.HALF)) / math.sqrt(xi)
                  for xi in (0.5, 1.0, 2.0)]
        spread = max(spread, max(ratios) / min(ratios) - 1)
    return record("3c", spread <= 1e-6, f"c0(xi)/sqrt(xi) spread over xi: {spread:.2e} (<= 1e-6)")


def test_criterion_3c_source_scaling():
    assert check_3c()


# ---------------------------------------------------------------- criterion 4

def check_4():
    xi = 1.0
    t, x = (a.ravel() for a in np.meshgrid(np.linspace(0.1, 2.0, 10), np.linspace(0.2, 3.0, 10)))
    heat = kernels.heat_kernel(_spec("heat", 0.0, 0.0, xi, Convention.HALF), t, x).real()
    images = (2 * np.pi * t) ** -0.5 * np.exp(-(x - xi) ** 2 / (2 * t)) * -np.expm1(-2 * x * xi / t)
    heat_err = float(np.max(np.abs(heat - images) / images))
    schr = kernels.schrodinger_kernel(_spec("schrodinger", 0.0, 0.0, xi, Convention.UNIT), t, x).value()
    odd = (4j * np.pi * t) ** -0.5 * (np.exp(1j * (x - xi) ** 2 / (4 * t)) - np.exp(1j * (x + xi) ** 2 / (4 * t)))
    schr_err = float(np.max(np.abs(schr - odd) / np.abs(odd)))
    return record("4", heat_err <= 1e-12 and schr_err <= 1e-10,
                  f"nu=1/2 collapse: heat {heat_err:.2e} (<= 1e-12), Schrodinger {schr_err:.2e} (<= 1e-10)")


def test_criterion_4_half_integer_collapse():
    assert check_4()


# ---------------------------------------------------------------- criterion 5

def check_5():
    start = time.perf_counter()
    worst = 0.0
    for k, w in itertools.product((0.0, 1.0), (0.0, 1.0)):
        spec = _spec("heat", k, w, 1.0, Convention.HALF)
        for t1, t2 in ((0.3, 0.7), (0.5, 0.5), (0.1, 0.2)):
            worst = max(worst, semigroup_defect(spec, t1, t2, 0.8))
    elapsed = time.perf_counter() - start
    return record("5", worst <= 1e-6 and elapsed <= 10.0,
                  f"semigroup defect {worst:.2e} (<= 1e-6), {elapsed:.2f} s (<= 10 s)")


def test_criterion_5_semigroup():
    assert check_5()


# ---------------------------------------------------------------- criterion 6

def check_6():
    t, x = symmetry.halton_points(100)
    det = 0.0
    exact = True
    consts = 0.0
    notices = []
    for w, xi in itertools.product((0.5, 1.0), (0.5, 1.0, 2.0)):
        p = PotentialParams(1.0, w)
        heat, schr = symmetry.heat_symmetry_basis(p), symmetry.schrodinger_symmetry_basis(p)
        for eq, basis in (("heat", heat), ("schrodinger", schr)):
            for v in basis:
                det = max(det, float(np.max(symmetry.determining_residual(v, p, eq, t, x))))
        expected = np.zeros((4, 4, 4))
        for i, j, m in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            expected[i, j, m], expected[j, i, m] = 4 * w, -4 * w
        consts = max(consts, float(np.max(np.abs(symmetry.structure_constants(heat).c - expected))))
        fw, fx = Fraction(w), Fraction(xi)
        exact &= symmetry.ic_constrained_field(schr, xi).coefficients == (1, 4 * fw, 0, 0, -2 * fw * fw * fx * fx)
        exact &= symmetry.ic_constrained_field(heat, xi).coefficients == (-1, 1, 0, 2 * fw * fw * fx * fx)
        notices.extend(symmetry.arbitration_notices(p, xi))
    proj = symmetry.projective_field(1.0)
    det = max(det, float(np.max(symmetry.determining_residual(proj, PotentialParams(0.75, 0.0), "schrodinger", t, x))))
    ok = det <= 1e-10 and consts <= 1e-8 and exact and notices
    return record("6", ok, f"determining residual {det:.2e} (<= 1e-10); structure constants off by {consts:.2e} "
                           f"(<= 1e-8); constrained coefficients exact: {exact}; {len(notices)} notices logged")


def test_criterion_6_symmetry_suite():
    assert check_6()


# ---------------------------------------------------------------- criterion 7

def check_7():
    eta = np.linspace(0.25, 4.0, 30)
    worst, swap = 0.0, math.inf
    for eq, w, right, wrong in (("heat", 1.0, "I", "J"), ("schrodinger", 1.0, "J", "I"), ("schrodinger", 0.0, "J", "I")):
        p = PotentialParams(1.0, w)
        worst = max(worst, float(np.max(symmetry.reduced_ode_residual(eq, p, 1.0, eta, bessel=right))))
        swap = min(swap, float(np.max(symmetry.reduced_ode_residual(eq, p, 1.0, eta, bessel=wrong))))
    return record("7", worst <= 1e-8 and swap > 1e-1,
                  f"reduced ODE residual {worst:.2e} (<= 1e-8); swapped Bessel family {swap:.2e} (> 1e-1)")


def test_criterion_7_reduction_suite():
    assert check_7()


# ---------------------------------------------------------------- criterion 8

SCHR = dict(kind="schrodinger", k=1.0, omega=1.0, xi=1.0, convention=Convention.UNIT)


def check_8():
    start = time.perf_counter()
    result = oracle.cn_kernel_check(_spec(**SCHR), 1e-3, 0.3, 20.0, 4096, 1e-4)
    elapsed = time.perf_counter() - start
    ok = result.rel_l2 <= 5e-3 and result.mass_drift <= 1e-10 and elapsed <= 60
    return record("8", ok, f"CN from kernel at t0=1e-3: L2 rel error {result.rel_l2:.3g} (<= 5e-3), "
                           f"mass drift {result.mass_drift:.1e}/step (<= 1e-10), initial data at "
                           f"{result.nyquist_ratio:.1f}x grid Nyquist, {elapsed:.1f} s")


@pytest.mark.xfail(strict=True, reason="kernel at t0=1e-3 is under-resolved by a factor ~16 on the "
                                       "prescribed grid; the aliased data cannot converge")
def test_criterion_8_cn_cross_check():
    assert check_8()


def check_8_packet():
    start = time.perf_counter()
    result = oracle.cn_packet_check(_spec(**SCHR), gaussian_packet(1.5, 0.3), 0.3, 20.0, 4096, 1e-4)
    elapsed = time.perf_counter() - start
    ok = result.rel_l2 <= 5e-3 and result.mass_drift <= 1e-10 and elapsed <= 60
    return record("8p", ok, f"CN vs kernel propagation of a resolved packet: L2 rel error {result.rel_l2:.2e} "
                            f"(<= 5e-3), mass drift {result.mass_drift:.1e}/step (<= 1e-10), {elapsed:.1f} s")


def test_criterion_8_cn_cross_check_on_resolved_data():
    assert check_8_packet()


# ---------------------------------------------------------------- criterion 9

def check_9():
    t, x = (a.ravel() for a in np.meshgrid(np.linspace(0.1, 2.0, 10), np.linspace(0.2, 3.0, 10)))
    worst = 0.0
    for kind, conv in (("heat", Convention.HALF), ("schrodinger", Convention.UNIT)):
        for k in (0.0, 1.0, 2.25):
            a = kernels.evaluate(_spec(kind, k, 1e-6, 1.0, conv), t, x).value()
            b = kernels.evaluate(_spec(kind, k, 0.0, 1.0, conv), t, x).value()
            worst = max(worst, float(np.max(np.abs(a - b) / np.abs(b))))
    return record("9", worst <= 1e-6, f"w=1e-6 vs w=0 kernels: max rel diff {worst:.2e} (<= 1e-6)")


def test_criterion_9_frequency_seam():
    assert check_9()


# --------------------------------------------------------------- criterion 10

def check_10():
    rng = np.random.default_rng(20240611)
    rec = 0.0
    for nu, z in zip(rng.uniform(1, 5, 500), rng.uniform(0.1, 30, 500)):
        J, I = specfun.bessel_j, specfun.bessel_i_scaled
        rec = max(rec, abs(J(nu - 1, z) + J(nu + 1, z) - 2 * nu / z * J(nu, z)) / max(1.0, abs(J(nu, z))),
                  abs(I(nu - 1, z) - I(nu + 1, z) - 2 * nu / z * I(nu, z)) / max(1.0, I(nu, z)))
    zz = np.linspace(0.1, 50, 400)
    env = np.sqrt(2 / (np.pi * zz))
    half_j = np.max(np.abs(specfun.bessel_j(0.5, zz) - env * np.sin(zz)) / env)
    i_ref = env * -np.expm1(-2 * zz) / 2
    half_i = np.max(np.abs(specfun.bessel_i_scaled(0.5, zz) - i_ref) / i_ref)
    bounded = np.array([specfun.bessel_i_scaled(nu, z)
                        for nu, z in zip(rng.uniform(0, 20, 500), 10 ** rng.uniform(-3, 4, 500))])
    xs = rng.uniform(0.5, 100, 500)
    gamma = np.max(np.abs(specfun.gamma_ln(xs + 1) - specfun.gamma_ln(xs) - np.log(xs)))
    ok = rec <= 1e-10 and max(half_j, half_i) <= 1e-13 and np.all((bounded > 0) & (bounded <= 1)) and gamma <= 1e-13
    return record("10", bool(ok), f"recurrences {rec:.1e} (<= 1e-10); half-integer forms {max(half_j, half_i):.1e} "
                                  f"(<= 1e-13); scaled I in (0, 1]; gamma_ln functional eq {gamma:.1e} (<= 1e-13)")


def test_criterion_10_special_functions():
    assert check_10()


if __name__ == "__main__":
    import re

    checks = [(name, fn) for name, fn in globals().items() if name.startswith("check_")]
    for _, fn in sorted(checks, key=lambda item: [int(p) if p.isdigit() else p
                                                  for p in re.split(r"(\d+)", item[0])]):
        fn()
