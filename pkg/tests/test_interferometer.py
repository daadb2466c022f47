import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abqed.constants import REDUCED
from abqed.errors import BadScenarioParameters, CalculatorMismatchOnClosedLoop
from abqed.gauge import (LORENZ, GaugedPotentials, GaussianBumpGauge, LinearGauge, SinusoidalGauge,
                         TimeModulatedProductGauge, random_gauge_family)
from abqed.interferometer import (InterferometerScenario, ParticlePath,
                                  accumulate_phase_energy, accumulate_phase_hamiltonian,
                                  build_electric_preset, build_electrodynamic_preset, build_magnetic_preset,
                                  gauge_phase, gauge_sweep, lorenz_phase, open_path_report, phase_difference,
                                  time_derivative_integral)
from abqed.sources import InfiniteSolenoid, PointCharge, SourceConfiguration


def polygon_scenario(vertices_a, vertices_b, config, gauge=LORENZ, duration=100.0, **kw):
    pa = ParticlePath.from_waypoints(vertices_a, 0.0, duration, 1.0, 1.0, name="a")
    pb = ParticlePath.from_waypoints(vertices_b, 0.0, duration, 1.0, 1.0, name="b")
    return InterferometerScenario(pa, pb, config, gauge, **kw)


SOLENOID = SourceConfiguration((InfiniteSolenoid(radius=0.2, turns_per_meter=10.0, current=0.1),), REDUCED)
FLUX = REDUCED.mu0 * 10.0 * 0.1 * math.pi * 0.04


class TestParticlePath:
    def test_waypoints_hit_knots(self):
        p = ParticlePath.from_waypoints([(0, 0, 0), (1, 0, 0), (1, 2, 0)], 0.0, 3.0, 1.0, 1.0)
        np.testing.assert_allclose(p.position(1.0), [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(p.velocity(1.0), 0.0, atol=1e-15)
        assert p.length() == pytest.approx(3.0, rel=1e-12)

    def test_dwell_is_stationary(self):
        p = ParticlePath.from_waypoints([(0, 0, 0), (1, 0, 0), (2, 0, 0)], 0.0, 4.0, 1.0, 1.0, dwell={1: 2.0})
        np.testing.assert_allclose(p.position(np.linspace(1.0, 3.0, 7)), [[1, 0, 0]] * 7, atol=1e-15)

    def test_from_samples_default_velocities(self):
        p = ParticlePath.from_samples([0, 1, 2], [(0, 0, 0), (1, 1, 0), (2, 0, 0)], 1.0, 1.0)
        np.testing.assert_allclose(p.velocity(1.0), [1, 0, 0])
        np.testing.assert_allclose(p.velocity(0.0), 0.0)

    def test_rejects_unsorted_times(self):
        with pytest.raises(BadScenarioParameters):
            ParticlePath.from_samples([0, 2, 1], [(0, 0, 0)] * 3, 1.0, 1.0)

    def test_rejects_nonpositive_mass(self):
        with pytest.raises(BadScenarioParameters):
            ParticlePath.from_samples([0, 1], [(0, 0, 0), (1, 0, 0)], 1.0, 0.0)


class TestScenario:
    def test_mismatched_endpoints(self):
        with pytest.raises(BadScenarioParameters):
            polygon_scenario([(0, 0, 0), (1, 0, 0)], [(0, 0, 0), (1, 1, 0)], SOLENOID)

    def test_open_mode_allows_mismatch(self):
        sc = polygon_scenario([(0, 0, 0), (1, 0, 0)], [(0, 0, 0), (1, 1, 0)], SOLENOID, open_mode=True)
        assert not sc.closed

    def test_superluminal_rejected(self):
        with pytest.raises(BadScenarioParameters):
            polygon_scenario([(-1, 0, 0), (-1, -1, 0), (1, -1, 0)], [(-1, 0, 0), (-1, 1, 0), (1, 1, 0)],
                             SOLENOID, duration=1.0)

    def test_different_particles_rejected(self):
        pa = ParticlePath.from_waypoints([(0, 0, 0), (1, 0, 0)], 0, 10, 1.0, 1.0)
        pb = ParticlePath.from_waypoints([(0, 0, 0), (1, 0, 0)], 0, 10, -1.0, 1.0)
        with pytest.raises(BadScenarioParameters):
            InterferometerScenario(pa, pb, SOLENOID)


class TestPhases:
    def test_empty_sources_zero_phase(self):
        sc = polygon_scenario([(0, 0, 0), (1, 0, 0)], [(0, 0, 0), (0, 1, 0), (1, 0, 0)],
                              SourceConfiguration((), REDUCED))
        assert phase_difference(sc).hamiltonian.delta == 0.0

    def test_static_point_charge(self):
        """A particle at rest next to a static charge picks up -(q/hbar) V T."""
        cfg = SourceConfiguration((PointCharge(position=[0, 0, 1.0], charge=2.0),), REDUCED)
        p = ParticlePath.from_samples([0.0, 5.0], [(0, 0, 0), (0, 0, 0)], 1.0, 1.0)
        s, v, _ = lorenz_phase(p, cfg)
        assert s == pytest.approx(-2.0 / (4 * math.pi) * 5.0, rel=1e-13)
        assert v == 0.0

    @pytest.mark.parametrize("shape", [
        ([(-1, 0, 0), (-1, -1, 0), (1, -1, 0), (1, 0, 0)], [(-1, 0, 0), (-1, 1, 0), (1, 1, 0), (1, 0, 0)]),
        ([(-2, 0.1, 0), (0.3, -1.5, 0.2), (2, 0, 0)], [(-2, 0.1, 0), (-0.5, 2.2, -0.3), (1.1, 1.9, 0), (2, 0, 0)]),
    ])
    def test_enclosed_flux(self, shape):
        sc = polygon_scenario(*shape, SOLENOID)
        pair = phase_difference(sc)
        assert pair.hamiltonian.delta == pytest.approx(FLUX, rel=1e-10)
        assert pair.energy.delta == pytest.approx(FLUX, rel=1e-10)

    def test_not_enclosing(self):
        a = [(1, 0, 0), (1, -1, 0), (3, -1, 0), (3, 0, 0)]
        b = [(1, 0, 0), (1, 1, 0), (3, 1, 0), (3, 0, 0)]
        assert abs(phase_difference(polygon_scenario(a, b, SOLENOID)).hamiltonian.delta) < 1e-10 * FLUX

    def test_gauge_terms_with_linear_gauge(self):
        """grad F = kappa contributes (q/hbar) kappa . (end - start); dF/dt contributes alpha T."""
        p = ParticlePath.from_waypoints([(0, 0, 0), (2, 1, 0)], 0.0, 10.0, 1.0, 1.0)
        g = LinearGauge((0.5, -1.0, 0.0), alpha=0.3)
        s, v, _ = gauge_phase(p, g, "hamiltonian", REDUCED)
        assert v == pytest.approx(0.5 * 2 - 1.0, abs=1e-14)
        assert s == pytest.approx(0.3 * 10.0, rel=1e-14)
        s_e, v_e, _ = gauge_phase(p, g, "energy", REDUCED)
        assert s_e == 0.0 and v_e == pytest.approx(v)

    def test_calculators_share_lorenz_part(self):
        p = ParticlePath.from_waypoints([(-1, 0, 0), (-1, -1, 0), (1, -1, 0)], 0.0, 50.0, 1.0, 1.0)
        gp = GaugedPotentials(SOLENOID, GaussianBumpGauge(0.3, (0, -1, 0), 0.5))
        h = accumulate_phase_hamiltonian(p, gp)
        e = accumulate_phase_energy(p, gp)
        assert h.lorenz == e.lorenz
        assert h.gauge_vector == e.gauge_vector

    @settings(max_examples=15)
    @given(st.integers(0, 10_000))
    def test_hamiltonian_minus_energy_is_time_derivative_integral(self, seed):
        g = random_gauge_family(seed, 1, 0.5, amplitude=1.0, time_drift=0.05, time_dependent=True)[0]
        p = ParticlePath.from_waypoints([(-1, 0, 0), (-1, -1, 0), (1, -1, 0), (1, 0, 0)], 0.0, 40.0, 1.0, 1.0)
        gp = GaugedPotentials(SOLENOID, g)
        diff = accumulate_phase_hamiltonian(p, gp).phi - accumulate_phase_energy(p, gp).phi
        integral, _ = time_derivative_integral(p, g, REDUCED)
        assert diff == pytest.approx(integral, abs=1e-9)


class TestGaugeSweep:
    def scenario(self):
        return polygon_scenario([(-1, 0, 0), (-1, -1, 0), (1, -1, 0), (1, 0, 0)],
                                [(-1, 0, 0), (-1, 1, 0), (1, 1, 0), (1, 0, 0)], SOLENOID)

    @settings(max_examples=10)
    @given(st.integers(0, 2**31 - 1))
    def test_closed_loop_invariance(self, seed):
        sc = self.scenario()
        fam = random_gauge_family(seed, 3, 0.3, extent=1.0, amplitude=2.0, time_drift=0.02)
        summary = gauge_sweep(sc, fam)
        assert summary.max_delta_shift <= 1e-9

    def test_non_separable_gauge_breaks_energy_calculator(self):
        sc = self.scenario()
        g = TimeModulatedProductGauge(GaussianBumpGauge(1.0, (0, -1, 0), 0.5), 1.0, 0.8, 0.2)
        pair = phase_difference(sc.with_gauge(g))
        assert abs(pair.hamiltonian.delta - FLUX) < 1e-9
        assert abs(pair.energy.delta - FLUX) > 1e-3

    def test_mismatch_raised_when_invariance_broken(self, monkeypatch):
        """A separable gauge whose calculators disagree on a closed loop is reported."""
        sc = self.scenario()
        g = TimeModulatedProductGauge(GaussianBumpGauge(1.0, (0, -1, 0), 0.5), 1.0, 0.8, 0.2)
        monkeypatch.setattr(TimeModulatedProductGauge, "time_separable", property(lambda self: True))
        with pytest.raises(CalculatorMismatchOnClosedLoop):
            phase_difference(sc.with_gauge(g))

    def test_open_report(self):
        sc = polygon_scenario([(0, 0, 0), (1, -1, 0)], [(0, 0, 0), (1, 1, 0)], SOLENOID, open_mode=True)
        rows = open_path_report(sc, [LORENZ, SinusoidalGauge(1.0, (1.0, 0.0, 0.0))])
        assert len(rows) == 8
        by = {(r.gauge_index, r.path, r.calculator): r.phi for r in rows}
        assert by[(1, "a", "hamiltonian")] != by[(0, "a", "hamiltonian")]

    def test_open_report_requires_open_mode(self):
        with pytest.raises(BadScenarioParameters):
            open_path_report(self.scenario(), [LORENZ])


class TestPresets:
    def test_magnetic_windings(self):
        sc = build_magnetic_preset(1.0, constants=REDUCED, windings=3)
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(3.0, rel=1e-10)

    def test_magnetic_rejects_path_inside_solenoid(self):
        with pytest.raises(BadScenarioParameters):
            build_magnetic_preset(1.0, radius=0.2, half_width=0.1, constants=REDUCED)

    def test_electric_reduced(self):
        sc = build_electric_preset(2.0, 0.5, constants=REDUCED)
        pair = phase_difference(sc)
        assert pair.hamiltonian.delta == pytest.approx(sc.metadata["expected_delta"], rel=1e-9)

    def test_electric_pulse_outside_dwell(self):
        with pytest.raises(BadScenarioParameters):
            build_electric_preset(1.0, 0.0, pulse_start=0.1, pulse_end=0.5, constants=REDUCED)

    def test_electrodynamic_ramp_validation(self):
        with pytest.raises(BadScenarioParameters):
            build_electrodynamic_preset(1.0, ramp_start=0.1e4, ramp_end=0.2e4, constants=REDUCED)

    def test_electrodynamic_after_exit_matches_static(self):
        sc = build_electrodynamic_preset(1.0, ramp_start=2e4, ramp_end=3e4, constants=REDUCED)
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(1.0, rel=1e-10)

    def test_electrodynamic_during_dwell_is_half(self):
        """Symmetric entry legs each enclose half of the flux."""
        sc = build_electrodynamic_preset(1.0, constants=REDUCED)
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(0.5, rel=1e-9)

    def test_si_magnetic_default(self):
        sc = build_magnetic_preset(3.9478e-5)
        assert phase_difference(sc).hamiltonian.delta == pytest.approx(sc.metadata["expected_delta"], rel=1e-12)
