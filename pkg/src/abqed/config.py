"""Run-configuration schema (TOML) and conversion to library objects.

Every table rejects unknown keys.  Validation happens before any
computation; problems surface as :class:`ConfigParseError` carrying the key
path (and the line/column for TOML syntax errors).
"""

from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
import tomli

from .constants import constants_for, default_particle
from .errors import ConfigParseError
from .gauge import (ConstantGauge, GaussianBumpGauge, GaugeSum, LinearGauge, SinusoidalGauge,
                    TimeModulatedProductGauge)
from .interferometer import PRESETS, InterferometerScenario, ParticlePath, PhaseSettings
from .potentials import QuadratureSettings
from .sources import (ChargedShell, CurrentLoop, FiniteSolenoid, GaussianChargeBall, InfiniteSolenoid,
                      PointCharge, PolylineCurrent, SourceConfiguration, TimeSchedule)

Vec3 = Tuple[float, float, float]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ScheduleSpec(_Strict):
    kind: Literal["constant", "linear_ramp", "smoothstep_ramp", "linear_pulse"] = "constant"
    t_start: float = 0.0
    t_end: float = 0.0
    amplitude_initial: float = 1.0
    amplitude_final: float = 1.0
    ramp_time: float = 0.0

    def build(self):
        return TimeSchedule(self.kind, self.t_start, self.t_end, self.amplitude_initial,
                            self.amplitude_final, self.ramp_time)


class _SourceBase(_Strict):
    strength: float
    schedule: ScheduleSpec = ScheduleSpec()


class PointChargeSpec(_SourceBase):
    kind: Literal["point_charge"]
    position: Vec3 = (0.0, 0.0, 0.0)

    def build(self):
        return PointCharge(position=self.position, charge=self.strength, schedule=self.schedule.build())


class GaussianBallSpec(_SourceBase):
    kind: Literal["gaussian_charge_ball"]
    center: Vec3 = (0.0, 0.0, 0.0)
    width: float

    def build(self):
        return GaussianChargeBall(center=self.center, charge=self.strength, width=self.width,
                                  schedule=self.schedule.build())


class ShellSpec(_SourceBase):
    kind: Literal["charged_shell"]
    center: Vec3 = (0.0, 0.0, 0.0)
    radius: float

    def build(self):
        return ChargedShell(center=self.center, radius=self.radius, charge=self.strength,
                            schedule=self.schedule.build())


class LoopSpec(_SourceBase):
    kind: Literal["current_loop"]
    center: Vec3 = (0.0, 0.0, 0.0)
    axis: Vec3 = (0.0, 0.0, 1.0)
    radius: float
    n_segments: int = 256

    def build(self):
        return CurrentLoop(center=self.center, axis=self.axis, radius=self.radius, current=self.strength,
                           n_segments=self.n_segments, schedule=self.schedule.build())


class FiniteSolenoidSpec(_SourceBase):
    kind: Literal["finite_solenoid"]
    center: Vec3 = (0.0, 0.0, 0.0)
    axis: Vec3 = (0.0, 0.0, 1.0)
    radius: float
    length: float
    turns_per_meter: float
    n_loops: int = 200
    n_segments: int = 256

    def build(self):
        return FiniteSolenoid(center=self.center, axis=self.axis, radius=self.radius, length=self.length,
                              turns_per_meter=self.turns_per_meter, current=self.strength,
                              n_loops=self.n_loops, n_segments=self.n_segments, schedule=self.schedule.build())


class InfiniteSolenoidSpec(_SourceBase):
    kind: Literal["infinite_solenoid_analytic"]
    position: Vec3 = (0.0, 0.0, 0.0)
    axis: Vec3 = (0.0, 0.0, 1.0)
    radius: float
    turns_per_meter: float

    def build(self):
        return InfiniteSolenoid(position=self.position, axis=self.axis, radius=self.radius,
                                turns_per_meter=self.turns_per_meter, current=self.strength,
                                schedule=self.schedule.build())


class PolylineSpec(_SourceBase):
    kind: Literal["polyline_current"]
    vertices: List[Vec3]
    subdivisions: int = 8

    def build(self):
        return PolylineCurrent(vertices=np.array(self.vertices), current=self.strength,
                               subdivisions=self.subdivisions, schedule=self.schedule.build())


SourceSpec = Annotated[Union[PointChargeSpec, GaussianBallSpec, ShellSpec, LoopSpec, FiniteSolenoidSpec,
                             InfiniteSolenoidSpec, PolylineSpec], Field(discriminator="kind")]


class GaugeTerm(_Strict):
    kind: Literal["constant", "linear", "gaussian_bump", "sinusoidal", "time_modulated_product"]
    offset: float = 0.0
    kappa: Vec3 = (0.0, 0.0, 0.0)
    alpha: float = 0.0
    amplitude: float = 0.0
    center: Vec3 = (0.0, 0.0, 0.0)
    width: float = 1.0
    wavevector: Vec3 = (1.0, 0.0, 0.0)
    omega: float = 0.0
    phase: float = 0.0
    modulation: float = 0.0
    frequency: float = 0.0

    def build(self):
        if self.kind == "constant":
            return ConstantGauge(self.offset)
        if self.kind == "linear":
            return LinearGauge(self.kappa, self.alpha, self.offset)
        if self.kind == "gaussian_bump":
            return GaussianBumpGauge(self.amplitude, self.center, self.width)
        if self.kind == "sinusoidal":
            return SinusoidalGauge(self.amplitude, self.wavevector, self.omega, self.phase)
        return TimeModulatedProductGauge(GaussianBumpGauge(self.amplitude, self.center, self.width),
                                         1.0 if self.offset == 0 else self.offset, self.modulation,
                                         self.frequency, self.phase)


class GaugeSpec(_Strict):
    terms: List[GaugeTerm] = []

    def build(self):
        if not self.terms:
            return ConstantGauge()
        return GaugeSum(tuple(t.build() for t in self.terms))


class PathSpec(_Strict):
    times: List[float]
    positions: List[Vec3]
    velocities: Optional[List[Vec3]] = None


class ScenarioSpec(_Strict):
    preset: Optional[Literal["magnetic", "electric", "electrodynamic"]] = None
    params: dict = {}
    path_a: Optional[PathSpec] = None
    path_b: Optional[PathSpec] = None
    open_mode: bool = False

    @field_validator("params")
    @classmethod
    def _numeric(cls, v):
        for key, val in v.items():
            if not isinstance(val, (int, float, str)):
                raise ValueError(f"parameter {key!r} must be a number or string")
        return v


class NumericsSpec(_Strict):
    rel_tol: float = Field(1e-10, gt=0, lt=1)
    max_subdivision_depth: int = Field(30, ge=1)
    kernel_regularization: float = Field(0.0, ge=0)
    force_quadrature: bool = False
    phase_tol: float = Field(1e-9, gt=0)
    phase_rel_tol: float = Field(1e-13, ge=0, lt=1)
    k_max: Optional[float] = Field(None, gt=0)
    levels: int = Field(3, ge=2)

    def quadrature(self):
        return QuadratureSettings(self.max_subdivision_depth, self.rel_tol, self.kernel_regularization,
                                  self.force_quadrature)

    def phases(self):
        return PhaseSettings(self.phase_tol, self.phase_rel_tol)


class SweepSpec(_Strict):
    seed: int = 7
    count: int = Field(20, ge=1)
    amplitude: float = Field(1.0, gt=0)
    length_scale: Optional[float] = Field(None, gt=0)


class ParticleSpec(_Strict):
    charge: Optional[float] = None
    mass: Optional[float] = Field(None, gt=0)


class ProbeSpec(_Strict):
    points: List[Vec3] = []
    times: List[float] = [0.0]


class OutputSpec(_Strict):
    dir: str = "abqed-out"


class RunConfiguration(_Strict):
    units: Literal["si", "reduced"] = "si"
    particle: ParticleSpec = ParticleSpec()
    sources: List[SourceSpec] = []
    gauge: GaugeSpec = GaugeSpec()
    scenario: Optional[ScenarioSpec] = None
    numerics: NumericsSpec = NumericsSpec()
    sweep: SweepSpec = SweepSpec()
    probe: ProbeSpec = ProbeSpec()
    output: OutputSpec = OutputSpec()

    @property
    def constants(self):
        return constants_for(self.units)

    def source_configuration(self):
        return SourceConfiguration(tuple(s.build() for s in self.sources), self.constants)

    def particle_values(self):
        q, m = default_particle(self.units)
        return (q if self.particle.charge is None else self.particle.charge,
                m if self.particle.mass is None else self.particle.mass)

    def build_scenario(self):
        """Preset or custom two-path scenario with the configured gauge and numerics."""
        spec = self.scenario
        if spec is None:
            raise ConfigParseError("scenario: table missing")
        gauge = self.gauge.build()
        q, m = self.particle_values()
        common = dict(constants=self.constants, charge=q, mass=m, gauge=gauge,
                      settings=self.numerics.quadrature(), phase_settings=self.numerics.phases())
        if spec.preset is not None:
            if spec.path_a or spec.path_b or self.sources:
                raise ConfigParseError("scenario.preset excludes explicit paths and sources")
            try:
                return PRESETS[spec.preset](**spec.params, **common)
            except TypeError as exc:
                raise ConfigParseError(f"scenario.params: {exc}") from None
        if spec.path_a is None or spec.path_b is None:
            raise ConfigParseError("scenario: either preset or both path_a and path_b are required")
        paths = [ParticlePath.from_samples(p.times, p.positions, q, m, p.velocities, name)
                 for p, name in ((spec.path_a, "a"), (spec.path_b, "b"))]
        return InterferometerScenario(paths[0], paths[1], self.source_configuration(), gauge,
                                      common["settings"], common["phase_settings"], spec.open_mode)


def _format_errors(exc):
    lines = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"])
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text, source="<config>"):
    """Parse and validate TOML text into a :class:`RunConfiguration`."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigParseError(f"{source}: {exc}") from None
    try:
        return RunConfiguration.model_validate(data)
    except ValidationError as exc:
        raise ConfigParseError(f"{source}: {_format_errors(exc)}") from None


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))
