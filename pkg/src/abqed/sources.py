"""Classical charge and current sources with adiabatic time schedules.

Singular sources (point charges, charged shells, current filaments, solenoid
surface currents) are never sampled as densities; they are described by
:class:`Measure` objects that the quadrature layer consumes directly.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math
from typing import NamedTuple, Optional

import numpy as np

from .constants import SI, PhysicalConstants
from .errors import EvaluationInsideSource, InvalidGeometry, WrongElementKind
from .quadrature import gk15_panels

EXCLUSION_RADIUS = 1e-9
CLOSURE_TOL = 1e-12


def _vec(x, name="vector"):
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise InvalidGeometry(f"{name} must have 3 components")
    if not np.all(np.isfinite(arr)):
        raise InvalidGeometry(f"{name} must be finite")
    return arr


def _unit(x, name="axis"):
    v = _vec(x, name)
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidGeometry(f"{name} must be non-zero")
    return v / n


def _positive(value, name):
    if not (value > 0 and math.isfinite(value)):
        raise InvalidGeometry(f"{name} must be strictly positive, got {value!r}")
    return float(value)


def perpendicular_frame(axis):
    """Unit vectors (e1, e2) with e1 x e2 = axis."""
    a = _unit(axis)
    trial = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - a * (trial @ a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return e1, e2


# ---------------------------------------------------------------------------
# schedules

@dataclass(frozen=True)
class TimeSchedule:
    """Dimensionless strength multiplier s(t).

    ``linear_ramp`` and ``smoothstep_ramp`` go from ``amplitude_initial`` (for
    t <= t_start) to ``amplitude_final`` (for t >= t_end); ``constant`` returns
    ``amplitude_initial`` at all times.  ``linear_pulse`` is a trapezoid: it
    rises from ``amplitude_initial`` to ``amplitude_final`` over
    ``[t_start, t_start + ramp_time]`` and falls back over
    ``[t_end - ramp_time, t_end]``.
    """

    kind: str = "constant"
    t_start: float = 0.0
    t_end: float = 0.0
    amplitude_initial: float = 1.0
    amplitude_final: float = 1.0
    ramp_time: float = 0.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise InvalidGeometry(f"unknown schedule kind {self.kind!r}")
        if self.kind != "constant" and not self.t_end > self.t_start:
            raise InvalidGeometry("ramp schedules need t_end > t_start")
        if self.kind == "linear_pulse" and not 0 < 2 * self.ramp_time <= self.t_end - self.t_start:
            raise InvalidGeometry("pulse ramps must be positive and fit inside the pulse")

    def _fraction(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "linear_pulse":
            up = np.clip((t - self.t_start) / self.ramp_time, 0.0, 1.0)
            down = np.clip((self.t_end - t) / self.ramp_time, 0.0, 1.0)
            return np.minimum(up, down)
        tau = np.clip((t - self.t_start) / (self.t_end - self.t_start), 0.0, 1.0)
        if self.kind == "smoothstep_ramp":
            return tau * tau * (3.0 - 2.0 * tau)
        return tau

    def value(self, t):
        if self.kind == "constant":
            return np.full(np.shape(t), self.amplitude_initial, dtype=float) if np.ndim(t) else self.amplitude_initial
        out = self.amplitude_initial + (self.amplitude_final - self.amplitude_initial) * self._fraction(t)
        return out if np.ndim(t) else float(out)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(t)
        width = self.t_end - self.t_start
        if self.kind == "linear_pulse":
            r = self.ramp_time
            d = (np.where((t > self.t_start) & (t < self.t_start + r), 1.0 / r, 0.0)
                 - np.where((t > self.t_end - r) & (t < self.t_end), 1.0 / r, 0.0))
        elif self.kind == "linear_ramp":
            inside = (t > self.t_start) & (t < self.t_end)
            d = np.where(inside, 1.0 / width, 0.0)
        else:
            tau = np.clip((t - self.t_start) / width, 0.0, 1.0)
            d = 6.0 * tau * (1.0 - tau) / width
        return (self.amplitude_final - self.amplitude_initial) * d

    @property
    def bound(self):
        return max(abs(self.amplitude_initial), abs(self.amplitude_final))

    def breakpoints(self):
        if self.kind == "constant":
            return ()
        if self.kind == "linear_pulse":
            return (self.t_start, self.t_start + self.ramp_time, self.t_end - self.ramp_time, self.t_end)
        return (self.t_start, self.t_end)


SCHEDULE_KINDS = ("constant", "linear_ramp", "smoothstep_ramp", "linear_pulse")
CONSTANT = TimeSchedule()


# ---------------------------------------------------------------------------
# filaments

class Filament:
    """Parametrised space curve x(u), u in [0, u_max], split into quadrature segments."""

    u_max: float
    closed: bool

    def position(self, u):
        raise NotImplementedError

    def derivative(self, u):
        raise NotImplementedError

    def segment_edges(self):
        raise NotImplementedError

    def distance(self, points):
        raise NotImplementedError

    def closure_gap(self):
        return float(np.linalg.norm(self.position(np.array([self.u_max]))[0]
                                    - self.position(np.array([0.0]))[0]))

    def gk_nodes(self):
        """GK15 nodes on every segment: positions, dx/du and both weight sets."""
        edges = self.segment_edges()
        u, wk, wg = gk15_panels(edges[:-1], edges[1:])
        u = u.ravel()
        return self.position(u), self.derivative(u), wk.ravel(), wg.ravel()


@dataclass(frozen=True, eq=False)
class CircleFilament(Filament):
    center: np.ndarray
    axis: np.ndarray
    radius: float
    n_segments: int = 256
    closed: bool = field(default=True, init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "axis", _unit(self.axis))
        _positive(self.radius, "radius")
        if self.n_segments < 1:
            raise InvalidGeometry("n_segments must be >= 1")

    @property
    def u_max(self):
        return 2.0 * math.pi

    @cached_property
    def frame(self):
        return perpendicular_frame(self.axis)

    def position(self, u):
        e1, e2 = self.frame
        u = np.asarray(u, dtype=float)[..., None]
        return self.center + self.radius * (np.cos(u) * e1 + np.sin(u) * e2)

    def derivative(self, u):
        e1, e2 = self.frame
        u = np.asarray(u, dtype=float)[..., None]
        return self.radius * (-np.sin(u) * e1 + np.cos(u) * e2)

    def segment_edges(self):
        return np.linspace(0.0, self.u_max, self.n_segments + 1)

    def closure_gap(self):
        # The parametrisation is periodic; evaluate the endpoint numerically anyway.
        return super().closure_gap()

    def distance(self, points):
        p = np.atleast_2d(points) - self.center
        z = p @ self.axis
        rho = np.linalg.norm(p - z[:, None] * self.axis, axis=1)
        return np.hypot(rho - self.radius, z)


@dataclass(frozen=True, eq=False)
class PolylineFilament(Filament):
    vertices: np.ndarray
    closed: bool = True
    subdivisions: int = 1

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 2:
            raise InvalidGeometry("polyline needs at least two 3-D vertices")
        object.__setattr__(self, "vertices", v)
        if self.closed and np.linalg.norm(v[-1] - v[0]) > CLOSURE_TOL:
            raise InvalidGeometry("closed polyline must end where it starts")

    @property
    def u_max(self):
        return float(self.vertices.shape[0] - 1)

    def _split(self, u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, self.u_max)
        i = np.minimum(np.floor(u).astype(int), self.vertices.shape[0] - 2)
        return i, u - i

    def position(self, u):
        i, s = self._split(u)
        v = self.vertices
        return v[i] + s[..., None] * (v[i + 1] - v[i])

    def derivative(self, u):
        i, _ = self._split(u)
        return self.vertices[i + 1] - self.vertices[i]

    def segment_edges(self):
        n = self.vertices.shape[0] - 1
        return np.linspace(0.0, n, n * self.subdivisions + 1)

    def distance(self, points):
        p = np.atleast_2d(points)
        a = self.vertices[:-1]
        d = self.vertices[1:] - a
        rel = p[:, None, :] - a[None, :, :]
        s = np.clip(np.einsum("pij,ij->pi", rel, d) / np.maximum(np.einsum("ij,ij->i", d, d), 1e-300), 0, 1)
        closest = a[None] + s[..., None] * d[None]
        return np.min(np.linalg.norm(p[:, None, :] - closest, axis=2), axis=1)


# ---------------------------------------------------------------------------
# measures and densities

@dataclass(frozen=True, eq=False)
class Measure:
    """Singular part of a density: a weighted point, surface or line.

    ``weight`` is the total charge (point, surface) or the filament current
    (line), already multiplied by the schedule value.
    """

    kind: str
    location: np.ndarray
    weight: float
    radius: Optional[float] = None
    filament: Optional[Filament] = None
    axis: Optional[np.ndarray] = None


class DensitySample(NamedTuple):
    value: object
    measures: tuple


# ---------------------------------------------------------------------------
# source elements

@dataclass(frozen=True, eq=False)
class SourceElement:
    schedule: TimeSchedule = CONSTANT

    kind = "abstract"
    carries_charge = False
    carries_current = False
    singular = True

    def amplitude(self, t):
        return self.schedule.value(t)

    def exclusion_distance(self, points):
        """Distance from each point to the singular support (inf if none)."""
        return np.full(np.atleast_2d(points).shape[0], np.inf)

    def check_outside(self, points):
        d = self.exclusion_distance(points)
        if np.any(d < EXCLUSION_RADIUS):
            raise EvaluationInsideSource(
                f"field point within {EXCLUSION_RADIUS:g} m of {self.kind} source")

    def filaments(self):
        """``[(filament, current)]`` at unit schedule amplitude."""
        return []


@dataclass(frozen=True, eq=False)
class PointCharge(SourceElement):
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    charge: float = 0.0
    kind = "point_charge"
    carries_charge = True

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position, "position"))

    def exclusion_distance(self, points):
        return np.linalg.norm(np.atleast_2d(points) - self.position, axis=1)


@dataclass(frozen=True, eq=False)
class GaussianChargeBall(SourceElement):
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    charge: float = 0.0
    width: float = 1.0
    kind = "gaussian_charge_ball"
    carries_charge = True
    singular = False

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        _positive(self.width, "width")

    def density(self, points):
        d2 = np.sum((np.atleast_2d(points) - self.center) ** 2, axis=1)
        s = self.width
        return self.charge * np.exp(-0.5 * d2 / s**2) / ((2 * math.pi) ** 1.5 * s**3)


@dataclass(frozen=True, eq=False)
class ChargedShell(SourceElement):
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0
    charge: float = 0.0
    kind = "charged_shell"
    carries_charge = True

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        _positive(self.radius, "radius")

    def exclusion_distance(self, points):
        return np.abs(np.linalg.norm(np.atleast_2d(points) - self.center, axis=1) - self.radius)


@dataclass(frozen=True, eq=False)
class CurrentLoop(SourceElement):
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    radius: float = 1.0
    current: float = 0.0
    n_segments: int = 256
    kind = "current_loop"
    carries_current = True

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "axis", _unit(self.axis))
        _positive(self.radius, "radius")

    @cached_property
    def filament(self):
        return CircleFilament(self.center, self.axis, self.radius, self.n_segments)

    def filaments(self):
        return [(self.filament, self.current)]

    def exclusion_distance(self, points):
        return self.filament.distance(points)


@dataclass(frozen=True, eq=False)
class FiniteSolenoid(SourceElement):
    """Solenoid of length L discretised into ``n_loops`` stacked circular filaments.

    Each filament carries ``n * I * L / n_loops`` so the stack reproduces the
    surface current density ``n I``.
    """

    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    radius: float = 1.0
    length: float = 1.0
    turns_per_meter: float = 1.0
    current: float = 0.0
    n_loops: int = 200
    n_segments: int = 256
    kind = "finite_solenoid"
    carries_current = True

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "axis", _unit(self.axis))
        for name in ("radius", "length", "turns_per_meter"):
            _positive(getattr(self, name), name)
        if self.n_loops < 1 or self.n_segments < 1:
            raise InvalidGeometry("n_loops and n_segments must be >= 1")

    @cached_property
    def loop_offsets(self):
        L = self.length
        return -0.5 * L + (np.arange(self.n_loops) + 0.5) * L / self.n_loops

    @property
    def loop_current(self):
        return self.turns_per_meter * self.current * self.length / self.n_loops

    @cached_property
    def _filaments(self):
        return [CircleFilament(self.center + z * self.axis, self.axis, self.radius, self.n_segments)
                for z in self.loop_offsets]

    def filaments(self):
        return [(f, self.loop_current) for f in self._filaments]

    def exclusion_distance(self, points):
        p = np.atleast_2d(points) - self.center
        z = p @ self.axis
        rho = np.linalg.norm(p - z[:, None] * self.axis, axis=1)
        dz = np.min(np.abs(z[:, None] - self.loop_offsets[None, :]), axis=1)
        return np.hypot(rho - self.radius, dz)


@dataclass(frozen=True, eq=False)
class InfiniteSolenoid(SourceElement):
    """Ideal infinite solenoid; only analytic potentials are available."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    radius: float = 1.0
    turns_per_meter: float = 1.0
    current: float = 0.0
    kind = "infinite_solenoid_analytic"
    carries_current = True

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position, "position"))
        object.__setattr__(self, "axis", _unit(self.axis))
        _positive(self.radius, "radius")
        _positive(self.turns_per_meter, "turns_per_meter")

    def cylindrical(self, points):
        """(rho, phi_hat) of each point relative to the solenoid axis."""
        p = np.atleast_2d(points) - self.position
        perp = p - (p @ self.axis)[:, None] * self.axis
        rho = np.linalg.norm(perp, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            phi_hat = np.cross(self.axis, perp) / rho[:, None]
        phi_hat[rho == 0] = 0.0
        return rho, phi_hat

    def exclusion_distance(self, points):
        return np.abs(self.cylindrical(points)[0] - self.radius)


@dataclass(frozen=True, eq=False)
class PolylineCurrent(SourceElement):
    """Current along an arbitrary polyline filament.

    Open filaments violate charge conservation and are only accepted with
    ``allow_open=True`` (diagnostic fixtures).
    """

    vertices: np.ndarray = field(default_factory=lambda: np.zeros((2, 3)))
    current: float = 0.0
    subdivisions: int = 8
    allow_open: bool = False
    kind = "polyline_current"
    carries_current = True

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        closed = v.shape[0] > 2 and np.linalg.norm(v[-1] - v[0]) <= CLOSURE_TOL
        if not closed and not self.allow_open:
            raise InvalidGeometry("current filament is not closed")
        object.__setattr__(self, "vertices", v)

    @cached_property
    def filament(self):
        v = self.vertices
        closed = v.shape[0] > 2 and np.linalg.norm(v[-1] - v[0]) <= CLOSURE_TOL
        return PolylineFilament(v, closed=closed, subdivisions=self.subdivisions)

    def filaments(self):
        return [(self.filament, self.current)]

    def exclusion_distance(self, points):
        return self.filament.distance(points)


ELEMENT_KINDS = {
    cls.kind: cls
    for cls in (PointCharge, GaussianChargeBall, ChargedShell, CurrentLoop,
                FiniteSolenoid, InfiniteSolenoid, PolylineCurrent)
}


@dataclass(frozen=True, eq=False)
class SourceConfiguration:
    elements: tuple = ()
    constants: PhysicalConstants = SI

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def union(self, other):
        if other.constants != self.constants:
            raise ValueError("cannot merge configurations with different constants")
        return SourceConfiguration(self.elements + other.elements, self.constants)

    __add__ = union

    def charges(self):
        return [e for e in self.elements if e.carries_charge]

    def currents(self):
        return [e for e in self.elements if e.carries_current]

    def breakpoints(self):
        return sorted({b for e in self.elements for b in e.schedule.breakpoints()})


# ---------------------------------------------------------------------------
# operations

def _point(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise InvalidGeometry("r must be a single 3-D point")
    return r


def charge_density(config, r, t):
    """Smooth charge density at ``r`` plus measure descriptors of singular charges."""
    r = _point(r)
    value = 0.0
    measures = []
    for e in config.charges():
        s = e.amplitude(t)
        if e.singular:
            e.check_outside(r)
        if isinstance(e, GaussianChargeBall):
            value += s * e.density(r)[0]
        elif isinstance(e, PointCharge):
            measures.append(Measure("point", e.position, s * e.charge))
        elif isinstance(e, ChargedShell):
            measures.append(Measure("surface", e.center, s * e.charge, radius=e.radius))
    return DensitySample(value, tuple(measures))


def current_density(config, r, t):
    """Smooth current density (always zero here) plus line/surface measure descriptors."""
    r = _point(r)
    measures = []
    for e in config.currents():
        s = e.amplitude(t)
        e.check_outside(r)
        if isinstance(e, InfiniteSolenoid):
            measures.append(Measure("surface_current", e.position, s * e.turns_per_meter * e.current,
                                    radius=e.radius, axis=e.axis))
        else:
            for fil, current in e.filaments():
                loc = getattr(fil, "center", None)
                if loc is None:
                    loc = fil.vertices[0]
                measures.append(Measure("line", loc, s * current, filament=fil))
    return DensitySample(np.zeros(3), tuple(measures))


class SolenoidFlux(NamedTuple):
    value: float
    exact: bool


def solenoid_flux(element, t, constants=SI):
    """mu0 n I(t) pi a^2.  ``exact`` is False for finite solenoids, where the
    value is only the ideal reference flux."""
    if not isinstance(element, (InfiniteSolenoid, FiniteSolenoid)):
        raise WrongElementKind(f"solenoid_flux needs a solenoid, got {element.kind}")
    current = element.current * element.amplitude(t)
    flux = constants.mu0 * element.turns_per_meter * current * math.pi * element.radius**2
    return SolenoidFlux(float(flux), isinstance(element, InfiniteSolenoid))


def smeared_current(config, points, t, tube_radius):
    """Current density of all filaments convolved with a 3-D Gaussian of width ``tube_radius``."""
    pts = np.atleast_2d(points)
    out = np.zeros_like(pts)
    norm = 1.0 / ((2 * math.pi) ** 1.5 * tube_radius**3)
    for e in config.currents():
        if isinstance(e, InfiniteSolenoid):
            continue
        s = e.amplitude(t)
        for fil, current in e.filaments():
            x, dx, wk, _ = fil.gk_nodes()
            d2 = np.zeros((pts.shape[0], x.shape[0]))
            for c in range(3):
                d2 += (pts[:, c, None] - x[None, :, c]) ** 2
            g = norm * np.exp(-0.5 * d2 / tube_radius**2)
            out += s * current * (g * wk[None, :]) @ dx
    return out


class DivergenceReport(NamedTuple):
    max_divergence: float
    reference_scale: float
    passed: bool


def divergence_J_check(config, t, sample_points, tube_radius, step=None, threshold=1e-6):
    """Finite-difference divergence of the tube-smeared current field.

    Central differences at ``h`` and ``h/2`` are combined (Richardson) into a
    fourth-order stencil.  ``reference_scale`` is max|J| / tube_radius over
    the samples; the check passes when ``max_divergence <= threshold * reference_scale``.
    """
    pts = np.atleast_2d(np.asarray(sample_points, dtype=float))
    h = step if step is not None else tube_radius / 20.0

    def central(hh):
        div = np.zeros(pts.shape[0])
        for c in range(3):
            dp = np.zeros(3)
            dp[c] = hh
            div += (smeared_current(config, pts + dp, t, tube_radius)[:, c]
                    - smeared_current(config, pts - dp, t, tube_radius)[:, c]) / (2 * hh)
        return div

    div = (4.0 * central(0.5 * h) - central(h)) / 3.0
    jmax = np.max(np.linalg.norm(smeared_current(config, pts, t, tube_radius), axis=1))
    scale = jmax / tube_radius
    max_div = float(np.max(np.abs(div)))
    return DivergenceReport(max_div, float(scale), bool(max_div <= threshold * max(scale, 1e-300)))
