import numpy as np
import pytest
from hypothesis import given, strategies as st

from abqed.constants import REDUCED
from abqed.gauge import (GAUGE_KINDS, LORENZ, ConstantGauge, GaugedPotentials, GaugeSum, GaussianBumpGauge,
                         LinearGauge, SinusoidalGauge, TimeModulatedProductGauge, random_gauge_family)
from abqed.sources import CurrentLoop, PointCharge, SourceConfiguration, TimeSchedule

coord = st.floats(-2, 2, allow_nan=False)
points = st.tuples(coord, coord, coord)
times = st.floats(-3, 3, allow_nan=False)
seeds = st.integers(0, 2**31 - 1)

CONFIG = SourceConfiguration((PointCharge(position=[0, 0, 3.0], charge=1.0,
                                          schedule=TimeSchedule("linear_ramp", -5.0, 5.0, 0.0, 1.0)),
                              CurrentLoop(center=[0, 0, -3.0], radius=0.5, current=2.0,
                                          schedule=TimeSchedule("smoothstep_ramp", -4.0, 4.0, 1.0, 0.2))),
                             REDUCED)


def fd_gradient(g, r, t, h=1e-5):
    out = np.zeros(3)
    for c in range(3):
        dr = np.zeros(3)
        dr[c] = h
        out[c] = (g.value(r + dr, t) - g.value(r - dr, t)) / (2 * h)
    return out


def sample_gauge(seed):
    return random_gauge_family(seed, 1, 0.5, extent=1.0, amplitude=1.0, time_drift=0.3, time_dependent=True)[0]


class TestGaugeFunctions:
    def test_lorenz_is_zero(self):
        r = np.array([0.1, 0.2, 0.3])
        assert LORENZ.value(r, 1.0) == 0.0
        np.testing.assert_array_equal(LORENZ.gradient(r, 1.0), 0.0)

    def test_constant_gauge_has_no_derivatives(self):
        g = ConstantGauge(3.0)
        assert g.value([1, 2, 3], 0.0) == 3.0 and g.time_derivative([1, 2, 3], 5.0) == 0.0

    def test_linear(self):
        g = LinearGauge((1.0, -2.0, 0.5), alpha=0.3, offset=1.0)
        assert g.value([1, 1, 2], 2.0) == pytest.approx(1 - 2 + 1 + 0.6 + 1)
        assert not g.static and g.time_separable

    def test_vectorised_shapes(self):
        g = SinusoidalGauge(1.0, (1.0, 0.0, 0.0), 0.5)
        pts = np.zeros((5, 3))
        assert g.value(pts, 0.0).shape == (5,)
        assert g.gradient(pts, 0.0).shape == (5, 3)

    def test_separability_flags(self):
        assert SinusoidalGauge(1.0, (1, 0, 0), 0.0).time_separable
        assert not SinusoidalGauge(1.0, (1, 0, 0), 2.0).time_separable
        assert not TimeModulatedProductGauge(GaussianBumpGauge(), 1.0, 0.5, 1.0).time_separable
        assert TimeModulatedProductGauge(GaussianBumpGauge(), 1.0, 0.0, 1.0).time_separable
        assert not (GaussianBumpGauge() + SinusoidalGauge(1.0, (1, 0, 0), 1.0)).time_separable

    def test_registered_kinds(self):
        assert set(GAUGE_KINDS) == {"constant", "linear", "gaussian_bump", "sinusoidal", "time_modulated_product"}

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            GaussianBumpGauge(1.0, (0, 0, 0), 0.0)

    @given(seeds, points, times)
    def test_gradient_matches_finite_difference(self, seed, r, t):
        g = sample_gauge(seed)
        r = np.array(r)
        np.testing.assert_allclose(g.gradient(r, t), fd_gradient(g, r, t), rtol=1e-6, atol=1e-8)

    @given(seeds, points, times)
    def test_time_derivative_matches_finite_difference(self, seed, r, t):
        g = sample_gauge(seed)
        r = np.array(r)
        h = 1e-5
        fd = (g.value(r, t + h) - g.value(r, t - h)) / (2 * h)
        assert g.time_derivative(r, t) == pytest.approx(fd, rel=1e-6, abs=1e-8)

    @given(seeds)
    def test_family_is_reproducible(self, seed):
        a = random_gauge_family(seed, 3, 0.5, time_drift=1.0)
        b = random_gauge_family(seed, 3, 0.5, time_drift=1.0)
        r = np.array([0.3, -0.2, 0.1])
        assert [g.value(r, 0.7) for g in a] == [g.value(r, 0.7) for g in b]

    def test_default_family_is_separable(self):
        fam = random_gauge_family(7, 25, 0.3, time_drift=1.0)
        assert len(fam) == 25
        assert all(g.time_separable for g in fam)
        assert any(not g.static for g in fam)


class TestGaugedPotentials:
    @given(seeds, points, times)
    def test_hamiltonian_minus_energy(self, seed, r, t):
        g = sample_gauge(seed)
        gp = GaugedPotentials(CONFIG, g)
        r = np.array(r)
        p = np.array([1e-3, 2e-3, -1e-3])
        diff = gp.hamiltonian_density(r, t, 1.0, p, 1.0) - gp.energy_shift(r, t, 1.0, p, 1.0)
        assert diff == pytest.approx(-g.time_derivative(r, t), rel=1e-12, abs=1e-14)

    @given(seeds, points, times)
    def test_electric_field_invariant(self, seed, r, t):
        """E = -grad V' - dA'/dt is unchanged by the gauge."""
        g = sample_gauge(seed)
        lor, gau = GaugedPotentials(CONFIG), GaugedPotentials(CONFIG, g)
        r = np.array(r)
        h = 1e-4

        def efield(gp):
            e = np.zeros(3)
            for c in range(3):
                dr = np.zeros(3)
                dr[c] = h
                e[c] = -(gp.gauged_scalar(r + dr, t) - gp.gauged_scalar(r - dr, t)) / (2 * h)
            e -= (gp.gauged_vector(r, t + h) - gp.gauged_vector(r, t - h)) / (2 * h)
            return e

        np.testing.assert_allclose(efield(gau), efield(lor), atol=1e-6)

    @given(seeds, points, times)
    def test_magnetic_field_invariant(self, seed, r, t):
        g = sample_gauge(seed)
        r = np.array(r)
        h = 1e-4
        jac = np.zeros((3, 3))
        for c in range(3):
            dr = np.zeros(3)
            dr[c] = h
            jac[:, c] = (g.gradient(r + dr, t) - g.gradient(r - dr, t)) / (2 * h)
        curl = np.array([jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]])
        assert np.max(np.abs(curl)) < 1e-6

    def test_lorenz_identity(self):
        gp = GaugedPotentials(CONFIG)
        r = np.array([0.5, 0.1, 0.2])
        V, A = gp.base(r, 0.3)
        assert gp.gauged_scalar(r, 0.3) == V
        np.testing.assert_array_equal(gp.gauged_vector(r, 0.3), A)

    def test_relativistic_warning(self):
        gp = GaugedPotentials(CONFIG)
        with pytest.warns(RuntimeWarning):
            gp.hamiltonian_density([1.0, 0, 0], 0.0, 1.0, [0.5, 0, 0], 1.0)

    def test_gauge_sum_addition(self):
        a, b = GaussianBumpGauge(1.0), LinearGauge((1, 0, 0))
        s = a + b
        assert isinstance(s, GaugeSum)
        r = np.array([0.2, 0.0, 0.1])
        assert s.value(r, 0.0) == pytest.approx(a.value(r, 0.0) + b.value(r, 0.0))
