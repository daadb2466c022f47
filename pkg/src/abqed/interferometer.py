"""Two-path interferometer scenarios and phase accumulation.

A path phase is -(1/hbar) times the time integral of a per-point energy
evaluated at the packet centre r(t) with momentum m v(t).  Two calculators are
provided:

* hamiltonian: integrand q V' - q v . A'  (gauged potentials)
* energy:      integrand q V  - q v . A'

Each phase is split into a Lorenz part (base potentials, relative tolerance)
and a gauge part (terms in F, absolute tolerance).  In SI units the Lorenz
part of a magnetic scenario is ~1e10 rad, so differences between gauges are
formed from the gauge parts to keep them above rounding noise.
"""

from dataclasses import dataclass, field, replace
import math
from typing import NamedTuple
import warnings

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .constants import SI, default_particle
from .errors import (BadScenarioParameters, CalculatorMismatchOnClosedLoop, PhaseNotConverged,
                     QuadratureNotConverged)
from .gauge import LORENZ, GaugeFunction, GaugedPotentials
from .potentials import DEFAULT_SETTINGS, QuadratureSettings, scalar_potential_array, vector_potential_array
from .quadrature import integrate_adaptive
from .sources import (ChargedShell, FiniteSolenoid, InfiniteSolenoid, SourceConfiguration,
                      TimeSchedule)

ENDPOINT_TOL = 1e-12
CALCULATORS = ("hamiltonian", "energy")


# ---------------------------------------------------------------------------
# paths

@dataclass(frozen=True, eq=False)
class ParticlePath:
    """Packet-centre worldline: cubic Hermite through (t, r, v) knots.

    Velocity is continuous; a knot pair with equal positions and zero
    velocities is an exact dwell (v = 0).
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    charge: float
    mass: float
    name: str = "path"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        r = np.asarray(self.positions, dtype=float)
        v = np.asarray(self.velocities, dtype=float)
        if t.ndim != 1 or t.size < 2 or r.shape != (t.size, 3) or v.shape != r.shape:
            raise BadScenarioParameters("path needs >= 2 knots with matching (n, 3) positions and velocities")
        if np.any(np.diff(t) <= 0):
            raise BadScenarioParameters("path timestamps must be strictly increasing")
        if not self.mass > 0:
            raise BadScenarioParameters("particle mass must be positive")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", r)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "_spline", CubicHermiteSpline(t, r, v, axis=0))

    @classmethod
    def from_samples(cls, times, positions, charge, mass, velocities=None, name="path"):
        """Hermite path through samples; velocities default to finite differences,
        zero at the ends and on dwell knots."""
        t = np.asarray(times, dtype=float)
        r = np.asarray(positions, dtype=float)
        if velocities is None:
            v = np.zeros_like(r)
            for i in range(1, len(t) - 1):
                if np.any(r[i] != r[i - 1]) and np.any(r[i] != r[i + 1]):
                    v[i] = (r[i + 1] - r[i - 1]) / (t[i + 1] - t[i - 1])
        else:
            v = np.asarray(velocities, dtype=float)
        return cls(t, r, v, charge, mass, name)

    @classmethod
    def from_waypoints(cls, waypoints, t0, tf, charge, mass, dwell=None, name="path"):
        """Straight legs between waypoints with zero velocity at every waypoint.

        Leg durations are proportional to leg length.  ``dwell`` maps a
        waypoint index to a stay duration at that waypoint.
        """
        wp = np.asarray(waypoints, dtype=float)
        dwell = dict(dwell or {})
        total_dwell = sum(dwell.values())
        lengths = np.linalg.norm(np.diff(wp, axis=0), axis=1)
        travel = tf - t0 - total_dwell
        if travel <= 0 or lengths.sum() <= 0:
            raise BadScenarioParameters("no time left for travel between waypoints")
        times, pts = [t0], [wp[0]]
        t = t0
        if 0 in dwell:
            t += dwell[0]
            times.append(t)
            pts.append(wp[0])
        for i, length in enumerate(lengths):
            t += travel * length / lengths.sum()
            times.append(t)
            pts.append(wp[i + 1])
            if i + 1 in dwell:
                t += dwell[i + 1]
                times.append(t)
                pts.append(wp[i + 1])
        times[-1] = tf
        pts = np.array(pts)
        return cls(np.array(times), pts, np.zeros_like(pts), charge, mass, name)

    @property
    def t0(self):
        return float(self.times[0])

    @property
    def tf(self):
        return float(self.times[-1])

    @property
    def start(self):
        return self.positions[0]

    @property
    def end(self):
        return self.positions[-1]

    def position(self, t):
        return self._spline(t)

    def velocity(self, t):
        return self._spline(t, 1)

    def max_speed(self, n=64):
        """Maximum |v| sampled on every knot interval."""
        ts = np.concatenate([np.linspace(a, b, n) for a, b in zip(self.times[:-1], self.times[1:])])
        return float(np.max(np.linalg.norm(self.velocity(ts), axis=1)))

    def length(self, n=64):
        ts = np.concatenate([np.linspace(a, b, n) for a, b in zip(self.times[:-1], self.times[1:])])
        return float(np.sum(np.linalg.norm(np.diff(self.position(ts), axis=0), axis=1)))


# ---------------------------------------------------------------------------
# scenario and results

@dataclass(frozen=True)
class PhaseSettings:
    """Phase convergence: error <= max(phase_tol, phase_rel_tol * |phase|)."""

    phase_tol: float = 1e-9
    phase_rel_tol: float = 1e-13
    max_depth: int = 40
    max_intervals: int = 200_000

    def __post_init__(self):
        if not (self.phase_tol > 0 and 0 <= self.phase_rel_tol < 1):
            raise ValueError("phase tolerances must be positive")


@dataclass(frozen=True, eq=False)
class InterferometerScenario:
    path_a: ParticlePath
    path_b: ParticlePath
    sources: SourceConfiguration
    gauge: GaugeFunction = LORENZ
    settings: QuadratureSettings = DEFAULT_SETTINGS
    phase_settings: PhaseSettings = PhaseSettings()
    open_mode: bool = False
    name: str = "custom"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        a, b = self.path_a, self.path_b
        if (a.charge, a.mass) != (b.charge, b.mass):
            raise BadScenarioParameters("both paths must carry the same particle")
        c = self.sources.constants.c
        for p in (a, b):
            if p.max_speed() >= c:
                raise BadScenarioParameters(f"{p.name}: speed reaches c")
        if not self.open_mode and not self.closed:
            raise BadScenarioParameters("paths must share start and end events (set open_mode to relax)")

    @property
    def closed(self):
        a, b = self.path_a, self.path_b
        return (a.t0 == b.t0 and a.tf == b.tf
                and np.linalg.norm(a.start - b.start) <= ENDPOINT_TOL
                and np.linalg.norm(a.end - b.end) <= ENDPOINT_TOL)

    @property
    def charge(self):
        return self.path_a.charge

    @property
    def mass(self):
        return self.path_a.mass

    def with_gauge(self, gauge):
        return replace(self, gauge=gauge)

    def potentials(self):
        return GaugedPotentials(self.sources, self.gauge, self.settings)


class PathPhase(NamedTuple):
    """Phase of one path; ``phi = lorenz_scalar + lorenz_vector + gauge_scalar + gauge_vector``."""

    calculator: str
    lorenz_scalar: float
    lorenz_vector: float
    gauge_scalar: float
    gauge_vector: float
    error: float

    @property
    def lorenz(self):
        return self.lorenz_scalar + self.lorenz_vector

    @property
    def gauge(self):
        return self.gauge_scalar + self.gauge_vector

    @property
    def phi(self):
        return self.lorenz + self.gauge

    @property
    def scalar_term(self):
        return self.lorenz_scalar + self.gauge_scalar

    @property
    def vector_term(self):
        return self.lorenz_vector + self.gauge_vector


@dataclass(frozen=True)
class PhaseResult:
    calculator: str
    a: PathPhase
    b: PathPhase

    @property
    def phi_a(self):
        return self.a.phi

    @property
    def phi_b(self):
        return self.b.phi

    @property
    def delta(self):
        return self.phi_a - self.phi_b

    @property
    def gauge_delta(self):
        """Contribution of the gauge field to delta, formed without the Lorenz parts."""
        return self.a.gauge - self.b.gauge

    @property
    def lorenz_delta(self):
        return self.a.lorenz - self.b.lorenz

    @property
    def est_error(self):
        return self.a.error + self.b.error

    @property
    def breakdown(self):
        return {"scalar_a": self.a.scalar_term, "vector_a": self.a.vector_term,
                "scalar_b": self.b.scalar_term, "vector_b": self.b.vector_term}


class PhasePair(NamedTuple):
    hamiltonian: PhaseResult
    energy: PhaseResult
    calculator_mismatch: float


# ---------------------------------------------------------------------------
# phase integrals

def _breakpoints(path, config):
    bp = [t for t in config.breakpoints() if path.t0 < t < path.tf]
    return np.unique(np.concatenate([path.times, bp]))


def _integrate(f, bp, abs_tol, rel_tol, ps, what):
    try:
        val, err = integrate_adaptive(f, bp, abs_tol=abs_tol, rel_tol=rel_tol,
                                      max_depth=ps.max_depth, max_intervals=ps.max_intervals)
    except QuadratureNotConverged as exc:
        raise PhaseNotConverged(f"{what}: {exc}", exc.value, exc.error) from exc
    return np.atleast_1d(val), err


def lorenz_phase(path, config, settings=DEFAULT_SETTINGS, phase_settings=PhaseSettings()):
    """(scalar, vector, error) of -(q/hbar) int V dt + (q/hbar) int A . v dt."""
    qh = path.charge / config.constants.hbar
    has_v = bool(config.charges())
    has_a = bool(config.currents())
    if not (has_v or has_a):
        return 0.0, 0.0, 0.0

    def f(t):
        out = np.zeros((t.size, 2))
        r = path.position(t)
        if has_v:
            out[:, 0] = -qh * scalar_potential_array(config, r, t, settings)[0]
        if has_a:
            A = vector_potential_array(config, r, t, settings)[0]
            out[:, 1] = qh * np.sum(A * path.velocity(t), axis=1)
        return out

    ps = phase_settings
    val, err = _integrate(f, _breakpoints(path, config), 0.25 * ps.phase_tol, ps.phase_rel_tol, ps,
                          f"Lorenz phase of {path.name}")
    return float(val[0]), float(val[1]), err


def gauge_phase(path, gauge, calculator, constants, phase_settings=PhaseSettings(), breakpoints=()):
    """(scalar, vector, error) of the gauge terms.

    hamiltonian: (q/hbar) int dF/dt dt + (q/hbar) int grad F . v dt;
    energy: the dF/dt term is absent.
    """
    if calculator not in CALCULATORS:
        raise ValueError(f"unknown calculator {calculator!r}")
    if gauge.kind == "constant":
        return 0.0, 0.0, 0.0
    qh = path.charge / constants.hbar
    with_t = calculator == "hamiltonian" and not gauge.static

    def f(t):
        r = path.position(t)
        out = np.zeros((t.size, 2))
        if with_t:
            out[:, 0] = qh * gauge.time_derivative(r, t)
        out[:, 1] = qh * np.sum(gauge.gradient(r, t) * path.velocity(t), axis=1)
        return out

    bp = np.unique(np.concatenate([path.times, [b for b in breakpoints if path.t0 < b < path.tf]]))
    ps = phase_settings
    val, err = _integrate(f, bp, 0.05 * ps.phase_tol, 0.0, ps, f"gauge phase of {path.name}")
    return float(val[0]), float(val[1]), err


def _path_phase(path, gp, calculator, phase_settings, lorenz=None):
    if lorenz is None:
        lorenz = lorenz_phase(path, gp.config, gp.settings, phase_settings)
    gs, gv, ge = gauge_phase(path, gp.gauge, calculator, gp.config.constants, phase_settings,
                             gp.config.breakpoints())
    return PathPhase(calculator, lorenz[0], lorenz[1], gs, gv, lorenz[2] + ge)


def accumulate_phase_hamiltonian(path, gauged_potentials, phase_settings=PhaseSettings()):
    """-(1/hbar) int [q V' - q v . A'] dt along the path."""
    return _path_phase(path, gauged_potentials, "hamiltonian", phase_settings)


def accumulate_phase_energy(path, gauged_potentials, phase_settings=PhaseSettings()):
    """-(1/hbar) int [q V - q v . A'] dt along the path."""
    return _path_phase(path, gauged_potentials, "energy", phase_settings)


def time_derivative_integral(path, gauge, constants, phase_settings=PhaseSettings()):
    """(q/hbar) int dF/dt dt along the worldline, evaluated independently."""
    qh = path.charge / constants.hbar
    f = lambda t: qh * gauge.time_derivative(path.position(t), t)
    val, err = _integrate(f, path.times, 0.05 * phase_settings.phase_tol, 0.0, phase_settings,
                          "dF/dt integral")
    return float(val[0]), err


def phase_difference(scenario, lorenz_cache=None, strict=True):
    """Both calculators on both paths.

    For closed scenarios with a time-separable gauge the two deltas must agree
    within 2 * phase_tol, otherwise :class:`CalculatorMismatchOnClosedLoop` is
    raised (``strict``).  The Lorenz parts are computed once per path and may
    be shared across gauges through ``lorenz_cache``.
    """
    gp = scenario.potentials()
    ps = scenario.phase_settings
    if lorenz_cache is None:
        lorenz_cache = {}
    lorenz = {}
    for key, path in (("a", scenario.path_a), ("b", scenario.path_b)):
        if key not in lorenz_cache:
            lorenz_cache[key] = lorenz_phase(path, scenario.sources, scenario.settings, ps)
        lorenz[key] = lorenz_cache[key]
    results = {}
    for calc in CALCULATORS:
        pa = _path_phase(scenario.path_a, gp, calc, ps, lorenz["a"])
        pb = _path_phase(scenario.path_b, gp, calc, ps, lorenz["b"])
        results[calc] = PhaseResult(calc, pa, pb)
    mismatch = abs(results["hamiltonian"].gauge_delta - results["energy"].gauge_delta)
    if strict and scenario.closed and not scenario.open_mode and scenario.gauge.time_separable:
        if mismatch > 2 * ps.phase_tol:
            raise CalculatorMismatchOnClosedLoop(
                f"calculator deltas differ by {mismatch:.3e} rad on a closed loop")
    return PhasePair(results["hamiltonian"], results["energy"], mismatch)


class SweepRow(NamedTuple):
    gauge_index: int
    calculator: str
    path: str
    phi: float
    gauge_part: float
    delta: float
    delta_shift: float
    est_error: float


class SweepSummary(NamedTuple):
    rows: list
    lorenz: PhasePair
    max_delta_shift: float
    per_path_spread: float
    max_calculator_mismatch: float


def gauge_sweep(scenario, gauges, strict=True):
    """Phase differences over a gauge list; shifts are measured against the Lorenz gauge."""
    cache = {}
    base = phase_difference(scenario.with_gauge(LORENZ), cache, strict)
    rows = []
    max_shift = 0.0
    max_mismatch = 0.0
    per_path = {"a": [], "b": []}
    for i, g in enumerate(gauges):
        pair = phase_difference(scenario.with_gauge(g), cache, strict)
        max_mismatch = max(max_mismatch, pair.calculator_mismatch)
        for res in (pair.hamiltonian, pair.energy):
            shift = res.gauge_delta
            max_shift = max(max_shift, abs(shift))
            for key, pp in (("a", res.a), ("b", res.b)):
                rows.append(SweepRow(i, res.calculator, key, pp.phi, pp.gauge, res.delta, shift,
                                     res.est_error))
                per_path[key].append(pp.gauge)
    spread = max((max(v) - min(v)) for v in per_path.values()) if gauges else 0.0
    return SweepSummary(rows, base, max_shift, spread, max_mismatch)


class OpenPathRow(NamedTuple):
    gauge_index: int
    path: str
    calculator: str
    phi: float
    gauge_part: float
    est_error: float


def open_path_report(scenario, gauges):
    """Per-gauge, per-path phases of both calculators for an open-mode scenario.

    No invariance is asserted; the table shows how open-path phases and the
    calculator disagreement depend on the gauge.
    """
    if not scenario.open_mode:
        raise BadScenarioParameters("open_path_report requires a scenario flagged open_mode")
    cache = {}
    rows = []
    for i, g in enumerate(gauges):
        pair = phase_difference(scenario.with_gauge(g), cache, strict=False)
        for res in (pair.hamiltonian, pair.energy):
            for key, pp in (("a", res.a), ("b", res.b)):
                rows.append(OpenPathRow(i, key, res.calculator, pp.phi, pp.gauge, pp.error))
    return rows


# ---------------------------------------------------------------------------
# presets

def _particle(constants, charge, mass):
    units = "si" if constants == SI else "reduced"
    q0, m0 = default_particle(units)
    return (q0 if charge is None else charge), (m0 if mass is None else mass)


def _positive(**kw):
    for k, v in kw.items():
        if not (v is not None and v > 0):
            raise BadScenarioParameters(f"{k} must be positive")


def _solenoid(kind, flux, radius, turns_per_meter, length, constants, schedule, n_loops, n_segments):
    current = flux / (constants.mu0 * turns_per_meter * math.pi * radius**2)
    if kind == "infinite":
        return InfiniteSolenoid(position=np.zeros(3), axis=[0, 0, 1], radius=radius,
                                turns_per_meter=turns_per_meter, current=current, schedule=schedule)
    if kind == "finite":
        return FiniteSolenoid(center=np.zeros(3), axis=[0, 0, 1], radius=radius, length=length,
                              turns_per_meter=turns_per_meter, current=current, n_loops=n_loops,
                              n_segments=n_segments, schedule=schedule)
    raise BadScenarioParameters(f"unknown solenoid kind {kind!r}")


def build_magnetic_preset(flux, radius=None, half_width=None, half_height=None, duration=None,
                          solenoid="infinite", length=None, turns_per_meter=None, windings=1,
                          n_loops=200, n_segments=256, constants=SI, charge=None, mass=None,
                          gauge=LORENZ, settings=DEFAULT_SETTINGS, phase_settings=PhaseSettings()):
    """Rectangle around a solenoid on the z axis; path a passes below (y < 0), path b above.

    a - b circulates counterclockwise about +z, so delta = q flux / hbar per
    extra winding of path a.
    """
    si = constants == SI
    radius = radius if radius is not None else (0.01 if si else 0.2)
    half_width = half_width if half_width is not None else 3 * radius
    half_height = half_height if half_height is not None else 3 * radius
    duration = duration if duration is not None else (1e-5 if si else 1e4)
    length = length if length is not None else 100 * radius
    turns_per_meter = turns_per_meter if turns_per_meter is not None else (1e5 if si else 10.0)
    _positive(flux=abs(flux) if flux != 0 else 1.0, radius=radius, half_width=half_width,
              half_height=half_height, duration=duration, length=length, turns_per_meter=turns_per_meter)
    if windings < 1 or int(windings) != windings:
        raise BadScenarioParameters("windings must be a positive integer")
    if min(half_width, half_height) <= radius:
        raise BadScenarioParameters("paths must pass outside the solenoid")
    q, m = _particle(constants, charge, mass)
    w, h = half_width, half_height
    sol = _solenoid(solenoid, flux, radius, turns_per_meter, length, constants, TimeSchedule(),
                    n_loops, n_segments)
    loop = [(-w, 0, 0), (-w, -h, 0), (w, -h, 0), (w, h, 0), (-w, h, 0), (-w, 0, 0)]
    route_a = [(-w, 0, 0), (-w, -h, 0), (w, -h, 0), (w, 0, 0)]
    wp_a = loop * (windings - 1) + route_a
    # drop repeated consecutive points introduced by concatenation
    wp_a = [p for i, p in enumerate(wp_a) if i == 0 or p != wp_a[i - 1]]
    wp_b = [(-w, 0, 0), (-w, h, 0), (w, h, 0), (w, 0, 0)]
    pa = ParticlePath.from_waypoints(wp_a, 0.0, duration, q, m, name="a")
    pb = ParticlePath.from_waypoints(wp_b, 0.0, duration, q, m, name="b")
    config = SourceConfiguration((sol,), constants)
    meta = {"flux": flux, "windings": windings, "solenoid": solenoid, "expected_delta": windings * q * flux / constants.hbar}
    return InterferometerScenario(pa, pb, config, gauge, settings, phase_settings, name="magnetic", metadata=meta)


def _cage_shell_charges(V_a, V_b, cage_radius, separation, constants):
    """Shell charges giving potentials V_a, V_b at the two cage centres."""
    k = 1.0 / (4 * math.pi * constants.eps0)
    M = k * np.array([[1 / cage_radius, 1 / separation], [1 / separation, 1 / cage_radius]])
    return np.linalg.solve(M, np.array([V_a, V_b], dtype=float))


def _pulse_element(center, charge, t_on, t_off, ramp, radius):
    """Shell charged by a trapezoid whose time integral is exactly t_off - t_on."""
    pulse = TimeSchedule("linear_pulse", t_on - 0.5 * ramp, t_off + 0.5 * ramp, 0.0, 1.0, ramp)
    return ChargedShell(center=center, radius=radius, charge=charge, schedule=pulse)


def build_electric_preset(V_a, V_b, pulse_start=None, pulse_end=None, ramp_time=None, cage_radius=None,
                          cage_offset=None, half_width=None, duration=None, constants=SI, charge=None,
                          mass=None, gauge=LORENZ, settings=DEFAULT_SETTINGS, phase_settings=PhaseSettings()):
    """Each path dwells at the centre of a spherical cage (charged shell) while the cage
    potential is pulsed; delta = -(q/hbar)(V_a - V_b)(pulse_end - pulse_start).

    The cages are charged only inside the dwell, so the particle crosses
    uncharged walls on the way in and out.
    """
    si = constants == SI
    duration = duration if duration is not None else (1e-5 if si else 1e4)
    cage_radius = cage_radius if cage_radius is not None else (0.01 if si else 0.2)
    cage_offset = cage_offset if cage_offset is not None else 3 * cage_radius
    half_width = half_width if half_width is not None else 3 * cage_radius
    pulse_start = pulse_start if pulse_start is not None else 0.3 * duration
    pulse_end = pulse_end if pulse_end is not None else 0.7 * duration
    ramp_time = ramp_time if ramp_time is not None else 0.02 * duration
    _positive(duration=duration, cage_radius=cage_radius, cage_offset=cage_offset, half_width=half_width,
              ramp_time=ramp_time)
    if cage_offset <= cage_radius:
        raise BadScenarioParameters("cages would overlap")
    t_in = 0.25 * duration
    t_out = 0.75 * duration
    if not (t_in < pulse_start - 0.5 * ramp_time and pulse_start + ramp_time <= pulse_end
            and pulse_end + 0.5 * ramp_time < t_out):
        raise BadScenarioParameters("pulse (with ramps) must lie strictly inside the dwell window "
                                    f"({t_in:g}, {t_out:g})")
    q, m = _particle(constants, charge, mass)
    h, w = cage_offset, half_width
    ca, cb = np.array([0.0, -h, 0.0]), np.array([0.0, h, 0.0])
    Qa, Qb = _cage_shell_charges(V_a, V_b, cage_radius, 2 * h, constants)
    elements = (_pulse_element(ca, Qa, pulse_start, pulse_end, ramp_time, cage_radius),
                _pulse_element(cb, Qb, pulse_start, pulse_end, ramp_time, cage_radius))
    pa = _dwell_path([(-w, 0, 0), tuple(ca), (w, 0, 0)], t_in, t_out, duration, q, m, "a")
    pb = _dwell_path([(-w, 0, 0), tuple(cb), (w, 0, 0)], t_in, t_out, duration, q, m, "b")
    config = SourceConfiguration(elements, constants)
    T = pulse_end - pulse_start
    meta = {"V_a": V_a, "V_b": V_b, "pulse": T, "dwell": (t_in, t_out),
            "expected_delta": -q * (V_a - V_b) * T / constants.hbar}
    return InterferometerScenario(pa, pb, config, gauge, settings, phase_settings, name="electric", metadata=meta)


def _dwell_path(waypoints, t_in, t_out, duration, q, m, name, dwell_index=None):
    """Waypoints with a dwell at ``waypoints[dwell_index]`` (default: middle) over [t_in, t_out]."""
    wp = np.asarray(waypoints, dtype=float)
    i = len(wp) // 2 if dwell_index is None else dwell_index
    before = ParticlePath.from_waypoints(wp[: i + 1], 0.0, t_in, q, m)
    after = ParticlePath.from_waypoints(wp[i:], t_out, duration, q, m)
    times = np.concatenate([before.times, after.times])
    pos = np.concatenate([before.positions, after.positions])
    return ParticlePath(times, pos, np.zeros_like(pos), q, m, name)


def build_electrodynamic_preset(flux, ramp_start=None, ramp_end=None, radius=None, half_width=None,
                                half_height=None, duration=None, turns_per_meter=None, cage_charge=0.0,
                                cage_radius=None, constants=SI, charge=None, mass=None, gauge=LORENZ,
                                settings=DEFAULT_SETTINGS, phase_settings=PhaseSettings(),
                                schedule_kind="smoothstep_ramp"):
    """Paths enter cages at (0, -h) and (0, +h), dwell, then leave; the solenoid flux is
    ramped to zero over [ramp_start, ramp_end].

    The ramp must lie strictly inside the dwell window or start after the
    particle exits.  ``cage_charge`` adds equal constant charged shells around
    both dwell points (induced-charge model; zero by default).
    """
    si = constants == SI
    radius = radius if radius is not None else (0.01 if si else 0.2)
    half_width = half_width if half_width is not None else 3 * radius
    half_height = half_height if half_height is not None else 3 * radius
    duration = duration if duration is not None else (1e-5 if si else 1e4)
    turns_per_meter = turns_per_meter if turns_per_meter is not None else (1e5 if si else 10.0)
    cage_radius = cage_radius if cage_radius is not None else 0.5 * radius
    t_in, t_out = 0.3 * duration, 0.7 * duration
    ramp_start = ramp_start if ramp_start is not None else 0.4 * duration
    ramp_end = ramp_end if ramp_end is not None else 0.6 * duration
    _positive(radius=radius, half_width=half_width, half_height=half_height, duration=duration,
              turns_per_meter=turns_per_meter, cage_radius=cage_radius)
    if not ramp_end > ramp_start:
        raise BadScenarioParameters("ramp_end must exceed ramp_start")
    inside = t_in < ramp_start and ramp_end < t_out
    after = ramp_start >= duration
    if not (inside or after):
        raise BadScenarioParameters(f"ramp window must lie strictly inside the dwell ({t_in:g}, {t_out:g}) "
                                    f"or start after the particle exits at {duration:g}")
    if min(half_width, half_height) <= radius or half_height - cage_radius <= radius:
        raise BadScenarioParameters("paths and cages must stay outside the solenoid")
    q, m = _particle(constants, charge, mass)
    w, h = half_width, half_height
    sched = TimeSchedule(schedule_kind, ramp_start, ramp_end, 1.0, 0.0)
    sol = _solenoid("infinite", flux, radius, turns_per_meter, None, constants, sched, 0, 0)
    elements = [sol]
    if cage_charge:
        elements += [ChargedShell(center=[0, -h, 0], radius=cage_radius, charge=cage_charge),
                     ChargedShell(center=[0, h, 0], radius=cage_radius, charge=cage_charge)]
        warnings.warn("charged cages: paths cross the cage walls while charged", RuntimeWarning)
    pa = _dwell_path([(-w, 0, 0), (-w, -h, 0), (0, -h, 0), (w, -h, 0), (w, 0, 0)], t_in, t_out, duration,
                     q, m, "a", 2)
    pb = _dwell_path([(-w, 0, 0), (-w, h, 0), (0, h, 0), (w, h, 0), (w, 0, 0)], t_in, t_out, duration,
                     q, m, "b", 2)
    config = SourceConfiguration(tuple(elements), constants)
    meta = {"flux": flux, "ramp": (ramp_start, ramp_end), "dwell": (t_in, t_out),
            "ramp_during_dwell": inside,
            "entry_a": [(-w, 0, 0), (-w, -h, 0), (0, -h, 0)],
            "entry_b": [(-w, 0, 0), (-w, h, 0), (0, h, 0)]}
    if after:
        meta["expected_delta"] = q * flux / constants.hbar
    return InterferometerScenario(pa, pb, config, gauge, settings, phase_settings, name="electrodynamic",
                                  metadata=meta)


PRESETS = {
    "magnetic": build_magnetic_preset,
    "electric": build_electric_preset,
    "electrodynamic": build_electrodynamic_preset,
}
