"""Acceptance suite: one summary line per criterion is printed after the run.

Tolerances are pinned here and nowhere else.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from abqed.checks import kspace_agreement, longitudinal_ratio, preset_sources, random_probes
from abqed.constants import ELEMENTARY_CHARGE, REDUCED, SI, default_particle
from abqed.errors import SelfEnergyDivergent
from abqed.gauge import random_gauge_family
from abqed.interferometer import (InterferometerScenario, ParticlePath, build_electric_preset,
                                  build_electrodynamic_preset, build_magnetic_preset, phase_difference,
                                  time_derivative_integral)
from abqed.modespace import ground_energy_constant
from abqed.potentials import (QuadratureSettings, electrostatic_energy, kernel_identity_check,
                              magnetostatic_energy)
from abqed.sources import (CurrentLoop, GaussianChargeBall, InfiniteSolenoid, PointCharge, PolylineCurrent,
                           SourceConfiguration)

MAGNETIC_REL_TOL = 1e-9
FINITE_SOLENOID_REL_TOL = 1e-3
FINITE_SOLENOID_MAX_SECONDS = 120.0
ELECTRIC_REL_TOL = 1e-6
ELECTRODYNAMIC_ABS_TOL = 1e-6
GAUGE_SHIFT_TOL = 1e-9
GAUGE_SPREAD_MIN = 1e-3
GAUGE_COUNT = 20
CALCULATOR_IDENTITY_TOL = 1e-9
KSPACE_REL_TOL = 1e-3
KSPACE_PROBES = 20
LAMBDA3_TOL = 1e-10
ENERGY_REL_TOL = 1e-3
KERNEL_REL_TOL = 1e-3

H_OVER_E = 2 * math.pi * SI.hbar / ELEMENTARY_CHARGE  # flux quantum h/e in webers
EXAMPLE_FLUX = SI.mu0 * 1e5 * 1.0 * math.pi * 0.01**2  # n = 1e5 /m, I = 1 A, a = 1 cm


def solenoid_A(flux):
    """Analytic vector potential outside an ideal solenoid on the z axis."""
    def A(x, y):
        rho2 = x * x + y * y
        return flux / (2 * math.pi * rho2) * np.array([-y, x, 0.0])
    return A


def line_integral(A, vertices):
    """Sum over straight legs of int A . dl with scipy's adaptive quad."""
    total = 0.0
    for p, q in zip(vertices[:-1], vertices[1:]):
        p, q = np.asarray(p, float), np.asarray(q, float)
        d = q - p
        total += quad(lambda s: A(*(p + s * d)[:2]) @ d, 0.0, 1.0, epsabs=0.0, epsrel=1e-13)[0]
    return total


def gauge_family(scenario, seed, count=GAUGE_COUNT, time_dependent=False):
    pts = np.concatenate([p.position(np.linspace(p.t0, p.tf, 128)) for p in (scenario.path_a, scenario.path_b)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    size = float(np.max(hi - lo))
    amplitude = scenario.sources.constants.hbar / abs(scenario.charge)
    return random_gauge_family(seed, count, size / 10, 0.5 * (lo + hi), 0.5 * size, amplitude,
                               time_drift=1.0 / (scenario.path_a.tf - scenario.path_a.t0),
                               time_dependent=time_dependent)


def invariance_presets():
    """Presets with O(1) phase differences, where 1e-9 rad is above double-precision resolution."""
    return [
        ("magnetic-reduced", build_magnetic_preset(1.3, constants=REDUCED)),
        ("electric-reduced", build_electric_preset(2.0e-4, -0.5e-4, constants=REDUCED)),
        ("electrodynamic-reduced", build_electrodynamic_preset(1.1, constants=REDUCED)),
        ("magnetic-si", build_magnetic_preset(2 * H_OVER_E)),
        ("electric-si", build_electric_preset(3e-10, 1e-10)),
        ("electrodynamic-si", build_electrodynamic_preset(2 * H_OVER_E)),
    ]


# ---------------------------------------------------------------------------

@pytest.mark.criterion(1, "magnetic AB phase")
class TestMagnetic:
    @pytest.mark.parametrize("flux", [EXAMPLE_FLUX, 3.9478e-6, H_OVER_E])
    @pytest.mark.parametrize("geometry", [(None, None), (0.015, 0.04), (0.05, 0.02)])
    def test_infinite_solenoid_preset(self, flux, geometry, record):
        w, h = geometry
        sc = build_magnetic_preset(flux, half_width=w, half_height=h)
        expected = sc.charge * flux / SI.hbar
        pair = phase_difference(sc)
        rel = max(abs(pair.hamiltonian.delta / expected - 1), abs(pair.energy.delta / expected - 1))
        record("infinite rel err", rel)
        assert rel <= MAGNETIC_REL_TOL

    def test_irregular_paths(self):
        q, m = default_particle("si")
        cfg = SourceConfiguration((InfiniteSolenoid(radius=0.01, turns_per_meter=1e5, current=1.0),), SI)
        a = [(-0.04, 0.003, 0.0), (-0.01, -0.03, 0.01), (0.02, -0.025, -0.005), (0.035, 0.0, 0.0)]
        b = [(-0.04, 0.003, 0.0), (-0.03, 0.02, 0.0), (0.0, 0.045, 0.02), (0.03, 0.02, 0.0), (0.035, 0.0, 0.0)]
        sc = InterferometerScenario(ParticlePath.from_waypoints(a, 0, 1e-5, q, m, name="a"),
                                    ParticlePath.from_waypoints(b, 0, 1e-5, q, m, name="b"), cfg)
        expected = q * EXAMPLE_FLUX / SI.hbar
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(expected, rel=MAGNETIC_REL_TOL)

    def test_finite_solenoid(self, record):
        start = time.perf_counter()
        sc = build_magnetic_preset(EXAMPLE_FLUX, solenoid="finite", half_width=0.015, half_height=0.015)
        pair = phase_difference(sc)
        elapsed = time.perf_counter() - start
        rel = abs(pair.hamiltonian.delta / sc.metadata["expected_delta"] - 1)
        record("finite rel err", rel)
        record("finite seconds", elapsed)
        assert sc.sources.elements[0].length / sc.sources.elements[0].radius == 100
        assert rel <= FINITE_SOLENOID_REL_TOL
        assert elapsed <= FINITE_SOLENOID_MAX_SECONDS


@pytest.mark.criterion(2, "electric AB phase")
class TestElectric:
    @pytest.mark.parametrize("units,V_a,V_b", [("si", 1.0, 0.0), ("si", -2.5, 0.7), ("si", 3e-10, 1e-10),
                                              ("reduced", 1.0, 0.0), ("reduced", 0.3, -1.2)])
    def test_dwell_phase(self, units, V_a, V_b, record):
        constants = SI if units == "si" else REDUCED
        sc = build_electric_preset(V_a, V_b, constants=constants)
        T = sc.metadata["pulse"]
        expected = -sc.charge * (V_a - V_b) * T / constants.hbar
        pair = phase_difference(sc)
        rel = max(abs(pair.hamiltonian.delta / expected - 1), abs(pair.energy.delta / expected - 1))
        record("rel err", rel)
        assert rel <= ELECTRIC_REL_TOL

    def test_other_pulse_window(self):
        sc = build_electric_preset(2.0, 1.0, pulse_start=4e3, pulse_end=5e3, ramp_time=50.0, constants=REDUCED)
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(-1.0 * 1e3, rel=ELECTRIC_REL_TOL)


@pytest.mark.criterion(3, "electrodynamic AB phase")
class TestElectrodynamic:
    @pytest.mark.parametrize("units,flux,w,h,kind,ramp", [
        ("si", 2 * H_OVER_E, None, None, "smoothstep_ramp", None),
        ("si", 3 * H_OVER_E, 0.05, 0.02, "linear_ramp", (3.5e-6, 6.0e-6)),
        ("reduced", 1.0, None, None, "smoothstep_ramp", None),
        ("reduced", 2.0, 0.4, 1.0, "linear_ramp", (3.2e3, 3.9e3)),
    ])
    def test_ramp_during_dwell(self, units, flux, w, h, kind, ramp, record):
        constants = SI if units == "si" else REDUCED
        kw = {} if ramp is None else {"ramp_start": ramp[0], "ramp_end": ramp[1]}
        sc = build_electrodynamic_preset(flux, half_width=w, half_height=h, schedule_kind=kind,
                                         constants=constants, **kw)
        A = solenoid_A(flux)
        oracle = sc.charge / constants.hbar * (line_integral(A, sc.metadata["entry_a"])
                                               - line_integral(A, sc.metadata["entry_b"]))
        pair = phase_difference(sc)
        err = max(abs(pair.hamiltonian.delta - oracle), abs(pair.energy.delta - oracle))
        record("abs err rad", err)
        assert err <= ELECTRODYNAMIC_ABS_TOL

    @pytest.mark.parametrize("units,flux", [("si", EXAMPLE_FLUX), ("si", 2 * H_OVER_E), ("reduced", 1.0)])
    def test_ramp_after_exit(self, units, flux):
        constants = SI if units == "si" else REDUCED
        duration = 1e-5 if units == "si" else 1e4
        sc = build_electrodynamic_preset(flux, ramp_start=1.5 * duration, ramp_end=2 * duration,
                                         constants=constants)
        static = build_magnetic_preset(flux, constants=constants)
        expected = sc.charge * flux / constants.hbar
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(expected, rel=MAGNETIC_REL_TOL)
        assert phase_difference(static).hamiltonian.delta == pytest.approx(expected, rel=MAGNETIC_REL_TOL)


@pytest.mark.criterion(4, "closed-loop gauge invariance")
class TestGaugeInvariance:
    @pytest.mark.parametrize("index", range(6))
    def test_direct_delta_shift(self, index, record):
        name, sc = invariance_presets()[index]
        base = phase_difference(sc)
        worst, per_path = 0.0, {"a": [], "b": []}
        for g in gauge_family(sc, seed=100 + index):
            pair = phase_difference(sc.with_gauge(g))
            for res, ref in ((pair.hamiltonian, base.hamiltonian), (pair.energy, base.energy)):
                worst = max(worst, abs(res.delta - ref.delta))
                per_path["a"].append(res.phi_a)
                per_path["b"].append(res.phi_b)
        spread = max(max(v) - min(v) for v in per_path.values())
        record("max shift rad", worst)
        record("min per-path spread rad", spread, lowest=True)
        assert worst <= GAUGE_SHIFT_TOL, name
        assert spread > GAUGE_SPREAD_MIN, name

    @pytest.mark.parametrize("builder", [lambda: build_magnetic_preset(EXAMPLE_FLUX),
                                         lambda: build_electric_preset(1.0, 0.0),
                                         lambda: build_electrodynamic_preset(EXAMPLE_FLUX)])
    def test_gauge_contribution_large_si_phases(self, builder):
        """With deltas near 1e10 rad the gauge part is compared on its own."""
        sc = builder()
        for g in gauge_family(sc, seed=7):
            pair = phase_difference(sc.with_gauge(g))
            assert abs(pair.hamiltonian.gauge_delta) <= GAUGE_SHIFT_TOL
            assert abs(pair.energy.gauge_delta) <= GAUGE_SHIFT_TOL


def _identity_errors(sign):
    worst = 0.0
    for index, (_, sc) in enumerate(invariance_presets()):
        for g in gauge_family(sc, seed=300 + index, time_dependent=True):
            pair = phase_difference(sc.with_gauge(g), strict=False)
            for key, path in (("a", sc.path_a), ("b", sc.path_b)):
                ham = getattr(pair.hamiltonian, key).phi
                en = getattr(pair.energy, key).phi
                integral, _ = time_derivative_integral(path, g, sc.sources.constants, sc.phase_settings)
                worst = max(worst, abs((ham - en) - sign * integral))
    return worst


@pytest.mark.criterion(5, "calculator identity with the stated sign")
def test_calculator_identity_as_stated(record):
    """phi_ham - phi_energy = -(q/hbar) int dF/dt dt, checked literally."""
    worst = _identity_errors(-1.0)
    record("max deviation rad", worst)
    assert worst <= CALCULATOR_IDENTITY_TOL


def test_calculator_identity_derived_sign():
    """phi_ham - phi_energy = +(q/hbar) int dF/dt dt follows from H' - E' = -q dF/dt."""
    assert _identity_errors(+1.0) <= CALCULATOR_IDENTITY_TOL


@pytest.mark.criterion(6, "mode-space consistency")
class TestModeSpace:
    @pytest.mark.parametrize("index", range(5))
    def test_kspace_matches_real_space(self, index, record):
        name, config, center, size = preset_sources()[index]
        probes = random_probes(np.random.default_rng(40 + index), center, size, KSPACE_PROBES)
        v, a = kspace_agreement(config, probes)
        record("max rel diff", max(v, a))
        assert max(v, a) <= KSPACE_REL_TOL

    @pytest.mark.parametrize("config", [
        preset_sources()[3][1], preset_sources()[4][1],
        SourceConfiguration((PolylineCurrent(vertices=[[0, 0, 0], [1, 0, 0.3], [1, 1, 0], [0, 1, -0.2], [0, 0, 0]],
                                             current=1.5),), REDUCED)])
    def test_longitudinal_amplitude(self, config, record):
        ratio = longitudinal_ratio(config, n=256)
        record("lambda3 ratio", ratio)
        assert ratio <= LAMBDA3_TOL


@pytest.mark.criterion(7, "ground-energy constant")
class TestEnergyConstant:
    def test_gaussian_ball(self, record):
        q, s = 1.5, 0.3
        cfg = SourceConfiguration((GaussianChargeBall(center=[0.0, 0.2, 0.0], charge=q, width=s),), REDUCED)
        C = ground_energy_constant(cfg, 0.0, 80.0)
        quadrature = electrostatic_energy(cfg, 0.0)
        closed_form = q**2 / (8 * math.pi**1.5 * s)
        rel = abs(C.value / quadrature - 1)
        record("ball rel", rel)
        assert rel <= ENERGY_REL_TOL
        assert abs(C.value / closed_form - 1) <= ENERGY_REL_TOL

    @pytest.mark.parametrize("radius,tube,k_max", [(0.5, 0.02, 400.0), (0.1, 0.005, 1600.0)])
    def test_current_loop(self, radius, tube, k_max, record):
        cfg = SourceConfiguration((CurrentLoop(radius=radius, current=1.0),), REDUCED)
        C = ground_energy_constant(cfg, 0.0, k_max, QuadratureSettings(kernel_regularization=tube))
        oracle = -magnetostatic_energy(cfg, 0.0, tube).value
        rel = abs(C.value / oracle - 1)
        record("loop rel", rel)
        assert rel <= ENERGY_REL_TOL

    def test_point_charge_divergent(self):
        with pytest.raises(SelfEnergyDivergent):
            ground_energy_constant(SourceConfiguration((PointCharge(charge=1.0),), REDUCED), 0.0, 10.0)


@pytest.mark.criterion(8, "kernel identity")
@pytest.mark.parametrize("r", [0.1, 0.3, 1.0, 3.0, 10.0])
def test_kernel_identity(r, record):
    res = kernel_identity_check(r, 200.0, levels=3)
    rel = abs(res.kspace / res.exact - 1)
    record("rel err", rel)
    assert rel <= KERNEL_REL_TOL
