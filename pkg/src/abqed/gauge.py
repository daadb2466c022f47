"""Gauge transformations of the effective potentials.

A gauge function F(r, t) shifts the Lorenz-gauge potentials as
V' = V - dF/dt and A' = A + grad F.  Two per-point energies follow:

* ``hamiltonian_density``: q V' - (q/m) p . A'
* ``energy_shift``:        q V  - (q/m) p . A'

Their difference is -q dF/dt.  The ground state (and hence the base
potentials) is the Lorenz-gauge one whatever gauge is chosen; only the
classical shift by F differs.

All gauge functions accept ``r`` of shape ``(3,)`` or ``(n, 3)`` and ``t``
scalar or ``(n,)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np

from .potentials import DEFAULT_SETTINGS, QuadratureSettings, scalar_potential_array, vector_potential_array


def _rt(r, t):
    r = np.asarray(r, dtype=float)
    single = r.ndim == 1
    pts = np.atleast_2d(r)
    ts = np.broadcast_to(np.asarray(t, dtype=float), (pts.shape[0],))
    return pts, ts, single


def _out(x, single):
    return x[0] if single else x


class GaugeFunction:
    """Classical effective gauge field with analytic derivatives."""

    kind = "abstract"

    def value(self, r, t):
        pts, ts, single = _rt(r, t)
        return _out(self._value(pts, ts), single)

    def gradient(self, r, t):
        pts, ts, single = _rt(r, t)
        return _out(self._gradient(pts, ts), single)

    def time_derivative(self, r, t):
        pts, ts, single = _rt(r, t)
        return _out(self._time_derivative(pts, ts), single)

    @property
    def time_separable(self):
        """True when dF/dt is spatially uniform, so closed-loop energy phases are gauge invariant."""
        return True

    @property
    def static(self):
        return False

    def __add__(self, other):
        return GaugeSum((self, other))


@dataclass(frozen=True)
class ConstantGauge(GaugeFunction):
    offset: float = 0.0
    kind = "constant"

    def _value(self, pts, ts):
        return np.full(pts.shape[0], float(self.offset))

    def _gradient(self, pts, ts):
        return np.zeros_like(pts)

    def _time_derivative(self, pts, ts):
        return np.zeros(pts.shape[0])

    @property
    def static(self):
        return True


LORENZ = ConstantGauge()


@dataclass(frozen=True)
class LinearGauge(GaugeFunction):
    """F = kappa . r + alpha t + offset."""

    kappa: tuple = (0.0, 0.0, 0.0)
    alpha: float = 0.0
    offset: float = 0.0
    kind = "linear"

    def _value(self, pts, ts):
        return pts @ np.asarray(self.kappa, dtype=float) + self.alpha * ts + self.offset

    def _gradient(self, pts, ts):
        return np.broadcast_to(np.asarray(self.kappa, dtype=float), pts.shape).copy()

    def _time_derivative(self, pts, ts):
        return np.full(pts.shape[0], float(self.alpha))

    @property
    def static(self):
        return self.alpha == 0


@dataclass(frozen=True)
class GaussianBumpGauge(GaugeFunction):
    """F = amplitude * exp(-|r - center|^2 / (2 width^2))."""

    amplitude: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)
    width: float = 1.0
    kind = "gaussian_bump"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def _value(self, pts, ts):
        d = pts - np.asarray(self.center, dtype=float)
        return self.amplitude * np.exp(-0.5 * np.sum(d * d, axis=1) / self.width**2)

    def _gradient(self, pts, ts):
        d = pts - np.asarray(self.center, dtype=float)
        return -(self._value(pts, ts) / self.width**2)[:, None] * d

    def _time_derivative(self, pts, ts):
        return np.zeros(pts.shape[0])

    @property
    def static(self):
        return True


@dataclass(frozen=True)
class SinusoidalGauge(GaugeFunction):
    """F = amplitude * sin(k . r - omega t + phase)."""

    amplitude: float = 1.0
    wavevector: tuple = (1.0, 0.0, 0.0)
    omega: float = 0.0
    phase: float = 0.0
    kind = "sinusoidal"

    def _arg(self, pts, ts):
        return pts @ np.asarray(self.wavevector, dtype=float) - self.omega * ts + self.phase

    def _value(self, pts, ts):
        return self.amplitude * np.sin(self._arg(pts, ts))

    def _gradient(self, pts, ts):
        c = self.amplitude * np.cos(self._arg(pts, ts))
        return c[:, None] * np.asarray(self.wavevector, dtype=float)

    def _time_derivative(self, pts, ts):
        return -self.omega * self.amplitude * np.cos(self._arg(pts, ts))

    @property
    def time_separable(self):
        return self.omega == 0 or not np.any(self.wavevector)

    @property
    def static(self):
        return self.omega == 0


@dataclass(frozen=True)
class TimeModulatedProductGauge(GaugeFunction):
    """F = g(r) h(t) with h(t) = offset + modulation * sin(frequency t + phase)."""

    spatial: GaugeFunction = field(default_factory=lambda: GaussianBumpGauge())
    offset: float = 1.0
    modulation: float = 0.5
    frequency: float = 1.0
    phase: float = 0.0
    kind = "time_modulated_product"

    def h(self, t):
        return self.offset + self.modulation * np.sin(self.frequency * t + self.phase)

    def dh(self, t):
        return self.modulation * self.frequency * np.cos(self.frequency * t + self.phase)

    def _value(self, pts, ts):
        return self.spatial._value(pts, ts) * self.h(ts)

    def _gradient(self, pts, ts):
        return self.spatial._gradient(pts, ts) * self.h(ts)[:, None]

    def _time_derivative(self, pts, ts):
        return self.spatial._value(pts, ts) * self.dh(ts)

    @property
    def time_separable(self):
        return self.modulation == 0 or self.frequency == 0 or self.spatial.kind == "constant"


@dataclass(frozen=True)
class GaugeSum(GaugeFunction):
    terms: tuple = ()
    kind = "sum"

    def _value(self, pts, ts):
        return sum((g._value(pts, ts) for g in self.terms), np.zeros(pts.shape[0]))

    def _gradient(self, pts, ts):
        return sum((g._gradient(pts, ts) for g in self.terms), np.zeros_like(pts))

    def _time_derivative(self, pts, ts):
        return sum((g._time_derivative(pts, ts) for g in self.terms), np.zeros(pts.shape[0]))

    @property
    def time_separable(self):
        # sums of separable terms stay separable
        return all(g.time_separable for g in self.terms)

    @property
    def static(self):
        return all(g.static for g in self.terms)


class ModeGauge(GaugeFunction):
    """Gauge field synthesised from mode functions f_sigma(k, t) and the coherent amplitudes.

    Every evaluation is a k-space cubature; results are memoised per point.
    """

    kind = "from_modes"

    def __init__(self, modes, config, k_max, levels=3, settings=DEFAULT_SETTINGS):
        self.modes = modes
        self.config = config
        self.k_max = k_max
        self.levels = levels
        self.settings = settings
        self._sample = lru_cache(maxsize=4096)(self._compute)

    def _compute(self, key):
        from .modespace import effective_gauge_from_modes
        r = np.array(key[:3])
        return effective_gauge_from_modes(self.modes, self.config, r, key[3], self.k_max,
                                          self.settings, levels=self.levels)

    def sample(self, r, t):
        r = np.asarray(r, dtype=float)
        return self._sample((float(r[0]), float(r[1]), float(r[2]), float(t)))

    def _value(self, pts, ts):
        return np.array([self.sample(p, t).value for p, t in zip(pts, ts)])

    def _gradient(self, pts, ts):
        return np.array([self.sample(p, t).gradient for p, t in zip(pts, ts)]).reshape(-1, 3)

    def _time_derivative(self, pts, ts):
        return np.array([self.sample(p, t).time_derivative for p, t in zip(pts, ts)])

    @property
    def time_separable(self):
        return self.modes.static

    @property
    def static(self):
        return self.modes.static


GAUGE_KINDS = {
    "constant": ConstantGauge,
    "linear": LinearGauge,
    "gaussian_bump": GaussianBumpGauge,
    "sinusoidal": SinusoidalGauge,
    "time_modulated_product": TimeModulatedProductGauge,
}


# ---------------------------------------------------------------------------
# gauged potentials

def _check_nonrelativistic(p, m, c):
    v = np.linalg.norm(np.atleast_2d(p), axis=1) / m
    if np.any(v > 0.1 * c):
        warnings.warn("particle speed exceeds 0.1 c; nonrelativistic phase formula is inaccurate",
                      RuntimeWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class GaugedPotentials:
    """Lorenz-gauge effective potentials of ``config`` shifted by ``gauge``."""

    config: object
    gauge: GaugeFunction = LORENZ
    settings: QuadratureSettings = DEFAULT_SETTINGS

    def base(self, r, t):
        """Lorenz-gauge (V, A) at points r; vectorised like the gauge functions."""
        pts, ts, single = _rt(r, t)
        V, _ = scalar_potential_array(self.config, pts, ts, self.settings)
        A, _ = vector_potential_array(self.config, pts, ts, self.settings)
        return _out(V, single), _out(A, single)

    def gauged_scalar(self, r, t):
        V, _ = self.base(r, t)
        return V - self.gauge.time_derivative(r, t)

    def gauged_vector(self, r, t):
        _, A = self.base(r, t)
        return A + self.gauge.gradient(r, t)

    def hamiltonian_density(self, r, t, q, p, m):
        """q V' - (q/m) p . A'."""
        _check_nonrelativistic(p, m, self.config.constants.c)
        V, A = self.base(r, t)
        Vp = V - self.gauge.time_derivative(r, t)
        Ap = A + self.gauge.gradient(r, t)
        return q * Vp - (q / m) * np.sum(np.asarray(p) * Ap, axis=-1)

    def energy_shift(self, r, t, q, p, m):
        """q V - (q/m) p . A' (the dF/dt term is absent from the energy)."""
        _check_nonrelativistic(p, m, self.config.constants.c)
        V, A = self.base(r, t)
        Ap = A + self.gauge.gradient(r, t)
        return q * V - (q / m) * np.sum(np.asarray(p) * Ap, axis=-1)


# ---------------------------------------------------------------------------
# seeded random family

def random_gauge_family(seed, count, length_scale, center=(0.0, 0.0, 0.0), extent=1.0,
                        amplitude=1.0, time_drift=None, time_dependent=False):
    """Seeded list of smooth random gauge functions.

    Each member sums 1-3 ``gaussian_bump`` / static ``sinusoidal`` terms with
    amplitudes up to ``amplitude`` and length scales at least ``length_scale``,
    placed within ``extent`` of ``center``.  ``time_drift`` (a rate scale)
    adds a uniform ``alpha t`` term.  With ``time_dependent=True`` members may
    also include ``time_modulated_product`` terms, whose closed-loop energy
    phases are not gauge invariant.
    """
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    family = []
    for _ in range(count):
        terms = []
        for _ in range(int(rng.integers(1, 4))):
            amp = amplitude * rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0])
            scale = length_scale * rng.uniform(1.0, 4.0)
            pos = center + extent * rng.uniform(-1.0, 1.0, 3)
            choice = rng.integers(0, 3 if time_dependent else 2)
            if choice == 0:
                terms.append(GaussianBumpGauge(amp, tuple(pos), scale))
            elif choice == 1:
                direction = rng.normal(size=3)
                direction /= np.linalg.norm(direction)
                terms.append(SinusoidalGauge(amp, tuple(direction / scale), 0.0, rng.uniform(0, 2 * math.pi)))
            else:
                rate = time_drift if time_drift else 1.0
                terms.append(TimeModulatedProductGauge(GaussianBumpGauge(amp, tuple(pos), scale),
                                                       1.0, rng.uniform(0.2, 1.0), rate * rng.uniform(0.5, 2.0),
                                                       rng.uniform(0, 2 * math.pi)))
        if time_drift:
            terms.append(LinearGauge((0.0, 0.0, 0.0), amplitude * time_drift * rng.uniform(-1.0, 1.0)))
        family.append(GaugeSum(tuple(terms)))
    return family
