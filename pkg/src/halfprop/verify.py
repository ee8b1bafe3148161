"""Verification suites: each returns a report of named numeric checks."""

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from . import _accel, kernels, oracle, quadrature, symmetry
from .kernels import Convention, KernelKind, KernelSpec, PotentialParams
from .quadrature import Integrand

SCHEMA_VERSION = 1
SUITES = ("symmetry", "reduction", "pde", "normalization", "semigroup", "oracle")

#: convention each kernel family is evaluated in unless the caller overrides it
ARBITRATED = {True: Convention.HALF, False: Convention.UNIT}


def arbitrated_convention(kind: KernelKind) -> Convention:
    return ARBITRATED[kind.is_heat]


@dataclass(frozen=True)
class Record:
    name: str
    anchor: str
    value: float
    tolerance: float
    comparison: str = "<="

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.comparison == "<=":
            return self.value <= self.tolerance
        return self.value >= self.tolerance

    def as_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


@dataclass
class VerificationReport:
    suite: str
    params: Dict[str, float]
    records: List[Record] = field(default_factory=list)
    notices: List[str] = field(default_factory=list)
    extras: Dict[str, object] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failing(self) -> List[Record]:
        return [r for r in self.records if not r.passed]

    def add(self, name, anchor, value, tolerance, comparison="<="):
        self.records.append(Record(name, anchor, float(value), float(tolerance), comparison))

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "params": self.params,
            "backend": _accel.backend(),
            "pass": self.passed,
            "records": [r.as_dict() for r in self.records],
            "notices": list(self.notices),
            **self.extras,
            "timing": {"wall_time_s": self.wall_time},
        }


def _guarded(report: VerificationReport, name: str, anchor: str, tolerance: float,
             fn: Callable[[], float], comparison: str = "<="):
    """Record ``fn()``; an exception becomes a failing record with value nan."""
    try:
        value = fn()
    except Exception as exc:  # noqa: BLE001 - any failure is a failed check
        report.notices.append(f"{name}: {type(exc).__name__}: {exc}")
        value = float("nan")
    report.add(name, anchor, value, tolerance, comparison)


# ----------------------------------------------------------------- suites

def _symmetry(report, p: PotentialParams, xi: float, tol: Optional[float]):
    det_tol = tol or 1e-10
    t, x = symmetry.halton_points(100)
    if p.omega > 0:
        w = p.omega
        heat = symmetry.heat_symmetry_basis(p)
        schr = symmetry.schrodinger_symmetry_basis(p)
        for eq, basis in (("heat", heat), ("schrodinger", schr)):
            for v in basis:
                _guarded(report, f"determining/{eq}/{v.label}", "determining equation", det_tol,
                         lambda v=v, eq=eq: float(np.max(symmetry.determining_residual(v, p, eq, t, x))))
        tensor = symmetry.structure_constants(heat)
        expected = np.zeros((4, 4, 4))
        for i, j, m in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            expected[i, j, m] = 4 * w
            expected[j, i, m] = -4 * w
        report.add("structure/heat/constants", "heat commutation relations",
                   np.max(np.abs(tensor.c - expected)), 1e-8)
        report.add("structure/heat/fit", "heat commutation relations", tensor.residual, 1e-8)
        schr_tensor = symmetry.structure_constants(schr)
        report.add("structure/schrodinger/closure", "Schrodinger algebra closure",
                   schr_tensor.residual, 1e-8)
        report.extras["structure_constants"] = {
            "heat": tensor.c.tolist(), "schrodinger": schr_tensor.c.tolist()}
        for eq, basis, inv in (("heat", heat, symmetry.heat_invariants(p, xi)),
                               ("schrodinger", schr, symmetry.schrodinger_invariants(p, xi))):
            field_ = symmetry.ic_constrained_field(basis, xi)
            report.add(f"constraint/{eq}", "source constraints",
                       max(abs(c) for c in symmetry.ic_constraint_values(field_, xi)), 1e-12)
            tt, xx = symmetry.halton_points(50, t_range=(0.05, min(1.0, 0.7 / w)))
            report.add(f"invariant/{eq}", "similarity variable", np.max(symmetry.invariant_action(field_, inv, tt, xx)), 1e-9)
            report.add(f"multiplier/{eq}", "similarity ansatz",
                       np.max(symmetry.multiplier_defect(field_, inv, np.cos, tt, xx)), 1e-6)
        schr_field = symmetry.ic_constrained_field(schr, xi)
        target = _schrodinger_target(w, xi)
        report.add("constraint/schrodinger/exact", "constrained Schrodinger field",
                   0.0 if tuple(schr_field.coefficients) == target else 1.0, 0.0)
        report.extras["constrained_coefficients"] = {
            "heat": [str(c) for c in symmetry.ic_constrained_field(heat, xi).coefficients],
            "schrodinger": [str(c) for c in schr_field.coefficients]}
        report.notices.extend(symmetry.arbitration_notices(p, xi))
    proj = symmetry.projective_field(xi, p)
    free = PotentialParams(p.k, 0.0)
    report.add("determining/schrodinger/projective", "projective field", np.max(
        symmetry.determining_residual(proj, free, "schrodinger", t, x)), det_tol)
    report.add("invariant/projective", "projective similarity variable", np.max(
        symmetry.invariant_action(proj, symmetry.projective_invariants(xi), t, x)), 1e-12)


def _schrodinger_target(w: float, xi: float):
    w, xi = Fraction(w), Fraction(xi)
    # tau = 2 sin^2(2wt) = 1 - cos(4wt), and v2 carries tau = -cos(4wt)/(4w)
    return (Fraction(1), 4 * w, Fraction(0), Fraction(0), -2 * w * w * xi * xi)


def _reduction(report, p, xi, tol):
    eta = np.linspace(0.25, 4.0, 30)
    ode_tol = tol or 1e-8
    cases = [("schrodinger-free", "schrodinger", PotentialParams(p.k, 0.0), "J")]
    if p.omega > 0:
        cases = [("heat", "heat", p, "I"), ("schrodinger", "schrodinger", p, "J")] + cases
    for name, eq, params, right in cases:
        wrong = "J" if right == "I" else "I"
        report.add(f"reduced/{name}", "reduced Bessel equation",
                   np.max(symmetry.reduced_ode_residual(eq, params, xi, eta)), ode_tol)
        report.add(f"reduced/{name}/swap", "wrong Bessel family rejected",
                   np.max(symmetry.reduced_ode_residual(eq, params, xi, eta, bessel=wrong)), 1e-1, ">=")


def pde_sample_points(kind: KernelKind, omega: float, n: int = 50):
    """Halton points where h = 1e-3 differences resolve the kernel.

    Heat kernels are sampled for t >= 0.3, where the time log-derivative of
    the Gaussian stays moderate; Schrodinger kernels stay below three quarters
    of the first focusing time.
    """
    if kind.is_heat:
        return symmetry.halton_points(n, t_range=(0.3, 1.5), x_range=(0.2, 3.0))
    t_max = 1.2
    if kind is KernelKind.SCHRODINGER_HARMONIC:
        t_max = min(t_max, 0.75 * math.pi / (2 * omega))
    return symmetry.halton_points(n, t_range=(0.4 * t_max / 1.2, t_max), x_range=(0.3, 2.5))


def _kinds(p: PotentialParams):
    free = PotentialParams(p.k, 0.0)
    out = [(KernelKind.HEAT_FREE, free), (KernelKind.SCHRODINGER_FREE, free)]
    if p.omega > 0:
        out = [(KernelKind.HEAT_HARMONIC, p), (KernelKind.SCHRODINGER_HARMONIC, p)] + out
    return out


def _quiet_spec(kind, params, xi, convention=None):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return KernelSpec(kind, params, xi, convention or arbitrated_convention(kind))


def _pde(report, p, xi, tol):
    res_tol = tol or 1e-6
    for kind, params in _kinds(p):
        spec = _quiet_spec(kind, params, xi)
        t, x = pde_sample_points(kind, params.omega)
        _guarded(report, f"pde/{kind.value}", f"{kind.value} equation", res_tol,
                 lambda spec=spec, t=t, x=x: max(kernels.pde_residual(spec, a, b) for a, b in zip(t, x)))
        _guarded(report, f"pde/{kind.value}/perturbed", "residual detector", 1e-2,
                 lambda spec=spec: kernels.pde_residual(spec, 0.5, 1.2, exponent_scale=1.01), ">=")
    report.notices.append("heat kernels use the half convention u_t = u_xx/2 - V u/2; "
                          "Schrodinger kernels use the unit convention i u_t + u_xx = V u")


def _normalization(report, p, xi, tol):
    kinds = [KernelKind.HEAT_HARMONIC] if p.omega > 0 else [KernelKind.HEAT_FREE]
    for kind in kinds:
        spec = _quiet_spec(kind, p, xi)
        name = kind.value

        def limit(spec=spec):
            study = kernels.normalization_study(spec)
            return abs(study.limit * kernels.closed_form_c0(spec).real - 1)

        def xi_scaling(spec=spec):
            a = kernels.normalization_constant(spec) / math.sqrt(spec.xi)
            b = kernels.normalization_constant(spec.with_source(2 * spec.xi)) / math.sqrt(2 * spec.xi)
            return abs(a / b - 1)

        _guarded(report, f"normalization/{name}/limit", "delta initial condition", 1e-6, limit)
        _guarded(report, f"normalization/{name}/source-scaling", "c0 proportional to sqrt(xi)", 1e-6, xi_scaling)
        _guarded(report, f"normalization/{name}/mass-t=1e-3", "small-time mass", tol or 2e-3,
                 lambda spec=spec: abs(kernels.kernel_mass(spec, 1e-3) - 1))


def _semigroup(report, p, xi, tol):
    for kind, params in _kinds(p):
        if not kind.is_heat:
            continue
        spec = _quiet_spec(kind, params, xi)
        for t1, t2 in ((0.3, 0.7), (0.5, 0.5), (0.1, 0.2)):
            _guarded(report, f"semigroup/{kind.value}/{t1}+{t2}", "composition law", tol or 1e-6,
                     lambda spec=spec, t1=t1, t2=t2: quadrature.semigroup_defect(spec, t1, t2, 0.8))


def _oracle(report, p, xi, tol):
    if p.omega > 0:
        basis = oracle.SpectralBasis(p, Convention.UNIT, 100)

        def spectral():
            worst = 0.0
            x = np.linspace(0.3, 3.0, 5)
            for source in (0.5, 1.0, 2.0):
                spec = KernelSpec(KernelKind.HEAT_HARMONIC, p, source, Convention.UNIT)
                for t in (0.2, 0.5, 1.0):
                    ref = oracle.spectral_heat_kernel(basis, source, t, x).value
                    got = kernels.heat_kernel(spec, t, x).real()
                    worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
            return worst

        _guarded(report, "oracle/spectral", "heat kernel against eigenfunction expansion",
                 tol or 1e-9, spectral)
        heat = KernelSpec(KernelKind.HEAT_HARMONIC, p, xi, Convention.HALF)
        _guarded(report, "oracle/cn-heat-kernel", "heat kernel against Crank-Nicolson", 1e-3,
                 lambda: oracle.cn_kernel_check(heat, 1e-3, 0.3, 20.0, 4096, 1e-4).rel_l2)
        schr = _quiet_spec(KernelKind.SCHRODINGER_HARMONIC, p, xi)
        packet = gaussian_packet(max(xi, 1.5), 0.3)
        _guarded(report, "oracle/cn-schrodinger-packet", "Schrodinger kernel against Crank-Nicolson",
                 5e-3, lambda: oracle.cn_packet_check(schr, packet, 0.3, 20.0, 4096, 1e-4).rel_l2)
    else:
        report.notices.append("spectral and Crank-Nicolson oracles need omega > 0; skipped")


def gaussian_packet(center: float, width: float, wavenumber: float = 1.5) -> Integrand:
    def f(y):
        y = np.asarray(y, dtype=float)
        return np.exp(-0.5 * ((y - center) / width) ** 2) * np.cos(wavenumber * y)
    return Integrand(f, (center, width))


_RUNNERS = {
    "symmetry": _symmetry,
    "reduction": _reduction,
    "pde": _pde,
    "normalization": _normalization,
    "semigroup": _semigroup,
    "oracle": _oracle,
}


def run_suite(suite: str, params: PotentialParams, xi: float = 1.0,
              tol: Optional[float] = None) -> VerificationReport:
    """Run one suite (or ``"all"``) and return its report."""
    names = SUITES if suite == "all" else (suite,)
    for name in names:
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {suite!r}")
    report = VerificationReport(suite, {"k": params.k, "omega": params.omega, "xi": xi})
    start = time.perf_counter()
    for name in names:
        try:
            _RUNNERS[name](report, params, xi, tol)
        except Exception as exc:  # noqa: BLE001 - a crashed suite is a failed check
            report.add(f"{name}/completed", "suite ran to completion", float("nan"), 0.0)
            report.notices.append(f"{name}: {type(exc).__name__}: {exc}")
    report.wall_time = time.perf_counter() - start
    return report
