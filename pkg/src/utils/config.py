"""
Run configuration: YAML documents validated by pydantic models.

One document per run with sections medium, solver, output and one section per
command. Every field can be overridden from the command line with
`--set section.key=value`; the value is parsed with yaml.safe_load so lists
and numbers keep their types.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.cell.endpoint import check_t_list
from src.medium.direction import Direction
from src.medium.fields import SineProfile
from src.medium.medium import (
    PeriodicMedium,
    load_custom_medium,
    make_bump_lattice,
    make_constant,
    make_laminar,
)
from src.shapes.geometry import make_polygon, regular_polygon, square
from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_T_LIST = [2.0, 4.0, 8.0, 16.0]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _lattice_vector(value: Sequence[int]) -> Tuple[int, int]:
    if len(value) != 2 or (value[0] == 0 and value[1] == 0):
        raise ValueError(f"lattice vector must be a nonzero integer pair, got {value}")
    return int(value[0]), int(value[1])


class MediumSection(_Section):
    kind: Literal["constant", "laminar", "bump_lattice", "custom"] = "constant"
    value: float = Field(1.0, gt=0)
    mean: float = 1.0
    amplitude: float = 0.5
    phase: float = 0.0
    axis: Tuple[int, int] = (1, 0)
    A: float = Field(0.5, ge=0)
    delta: float = 0.5
    path: Optional[str] = None

    @field_validator("delta")
    @classmethod
    def _delta_range(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {v}")
        return v

    @field_validator("axis")
    @classmethod
    def _axis(cls, v) -> Tuple[int, int]:
        return _lattice_vector(v)

    @model_validator(mode="after")
    def _custom_file(self) -> "MediumSection":
        if self.kind == "custom":
            if not self.path:
                raise ValueError("custom medium needs a path")
            if not Path(self.path).is_file():
                raise ValueError(f"medium file not found: {self.path}")
        if self.kind == "laminar" and abs(self.amplitude) >= self.mean:
            raise ValueError(f"laminar profile must stay positive: |amplitude| < mean, got {self.amplitude}")
        return self

    def build(self) -> PeriodicMedium:
        if self.kind == "constant":
            return make_constant(self.value)
        if self.kind == "laminar":
            profile = SineProfile(self.mean, self.amplitude, self.phase)
            return make_laminar(profile, Direction.from_lattice(self.axis))
        if self.kind == "bump_lattice":
            return make_bump_lattice(self.A, self.delta)
        return load_custom_medium(self.path)


class SolverSection(_Section):
    h: float = Field(0.05, gt=0, le=0.1)
    tol: float = Field(1e-3, gt=0)
    damping: float = Field(0.5, gt=0, le=1)
    max_iterations: int = Field(5000, ge=1)
    jobs: int = Field(1, ge=1)


class OutputSection(_Section):
    out_dir: str = "results"
    dump_field: bool = False
    plots: bool = True


class SweepSection(_Section):
    xi_max: int = Field(3, ge=2)
    t_list: List[float] = Field(default_factory=lambda: list(DEFAULT_T_LIST))

    @field_validator("t_list")
    @classmethod
    def _t_list(cls, v: List[float]) -> List[float]:
        return check_t_list(v)


class IntervalSection(_Section):
    xi: Tuple[int, int] = (1, 0)
    t_list: List[float] = Field(default_factory=lambda: list(DEFAULT_T_LIST))

    @field_validator("t_list")
    @classmethod
    def _t_list(cls, v: List[float]) -> List[float]:
        return check_t_list(v)

    @field_validator("xi")
    @classmethod
    def _xi(cls, v) -> Tuple[int, int]:
        return _lattice_vector(v)


class ShapeSection(_Section):
    obstacle: Literal["square", "regular", "vertices"] = "square"
    side: float = Field(1.0, gt=0)
    sides: int = Field(64, ge=3)
    radius: float = Field(0.5, gt=0)
    vertices: Optional[List[Tuple[float, float]]] = None
    epsilons: List[float] = Field(default_factory=lambda: [0.5])
    box: float = Field(4.0, gt=0)
    data: float = Field(1.0, gt=0)
    n_theta: int = Field(360, ge=16)
    modes: List[Literal["min_supersolution", "max_subsolution"]] = Field(
        default_factory=lambda: ["min_supersolution", "max_subsolution"]
    )
    facet_angle_tol: float = Field(2.0, gt=0)
    facet_min_len: float = Field(0.0, ge=0)

    @field_validator("epsilons")
    @classmethod
    def _epsilons(cls, v: List[float]) -> List[float]:
        if not v or any(e <= 0 for e in v):
            raise ValueError(f"epsilons must be a nonempty list of positive values, got {v}")
        return v

    @model_validator(mode="after")
    def _vertices(self) -> "ShapeSection":
        if self.obstacle == "vertices":
            if not self.vertices or len(self.vertices) < 3:
                raise ValueError("obstacle 'vertices' needs at least 3 vertices")
            try:
                make_polygon(self.vertices)
            except ConfigurationError as exc:
                raise ValueError(str(exc)) from exc
        return self

    def build_obstacle(self):
        if self.obstacle == "square":
            return square(self.side)
        if self.obstacle == "regular":
            return regular_polygon(self.sides, self.radius)
        return make_polygon(self.vertices)


class BendDemoSection(_Section):
    xi: Tuple[int, int] = (1, 0)
    t: float = Field(2.0, gt=0)
    M: float = Field(1.0, ge=1)
    r: float = Field(10.0, gt=0)
    eps_amp: float = Field(0.02, gt=0)
    lift_rows: int = Field(5, ge=1)
    mode: Literal["min_supersolution", "max_subsolution"] = "min_supersolution"

    @field_validator("xi")
    @classmethod
    def _xi(cls, v) -> Tuple[int, int]:
        return _lattice_vector(v)

    @model_validator(mode="after")
    def _radius(self) -> "BendDemoSection":
        if self.r < 10.0 * self.M:
            raise ValueError(f"bending radius r must be at least 10*M = {10.0 * self.M}, got {self.r}")
        return self


class EnvelopeSection(_Section):
    input: Optional[str] = None
    column: str = "q_upper"
    continuous_input: Optional[str] = None
    m: float = Field(20.0, gt=0)
    n_lip: Optional[float] = Field(None, gt=0)
    n_samples: int = Field(3600, ge=16)
    side: Literal["lower", "upper"] = "upper"
    metric: Literal["chord", "arc"] = "chord"

    @model_validator(mode="after")
    def _inputs(self) -> "EnvelopeSection":
        for path in (self.input, self.continuous_input):
            if path is not None and not Path(path).is_file():
                raise ValueError(f"envelope input not found: {path}")
        return self


class ValidateSection(_Section):
    quick: bool = False
    suites: Optional[List[str]] = None


class RunConfig(_Section):
    """Validated run configuration."""

    seed: int = 0
    medium: MediumSection = Field(default_factory=MediumSection)
    solver: SolverSection = Field(default_factory=SolverSection)
    output: OutputSection = Field(default_factory=OutputSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    interval: IntervalSection = Field(default_factory=IntervalSection)
    shape: ShapeSection = Field(default_factory=ShapeSection)
    bend_demo: BendDemoSection = Field(default_factory=BendDemoSection)
    envelope: EnvelopeSection = Field(default_factory=EnvelopeSection)
    validate_: ValidateSection = Field(default_factory=ValidateSection, alias="validate")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _shape_resolution(self) -> "RunConfig":
        smallest = min(self.shape.epsilons)
        if self.solver.h > smallest / 10.0 + 1e-15:
            logger.debug("h=%.4g exceeds epsilon/10 for the smallest shape epsilon %.4g", self.solver.h, smallest)
        return self

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply `section.key=value` overrides to a raw config mapping.

    Raises:
        ConfigurationError: If an override is malformed.
    """
    data = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"Override must look like section.key=value, got {item!r}")
        key, text = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigurationError(f"Override has an empty key: {item!r}")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"Override value for {key} is not valid YAML: {exc}") from exc
        node = data
        for part in parts[:-1]:
            child = node.get(part)
            child = dict(child) if isinstance(child, dict) else {}
            node[part] = child
            node = child
        node[parts[-1]] = value
    return data


def parse_config(raw: Optional[Dict[str, Any]], overrides: Sequence[str] = ()) -> RunConfig:
    """Validate a raw mapping (plus overrides) into a RunConfig."""
    data = apply_overrides(raw or {}, overrides)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid configuration:\n{exc}") from exc


def load_config(path: Optional[Union[str, Path]], overrides: Sequence[str] = ()) -> RunConfig:
    """
    Load a YAML run configuration.

    Args:
        path: YAML file, or None for all defaults.
        overrides: `section.key=value` strings applied after loading.

    Raises:
        ConfigurationError: Missing file, malformed YAML or invalid values.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}")
        with open(path, "r") as f:
            try:
                raw = yaml.safe_load(f) or {}
            except yaml.YAMLError as exc:
                raise ConfigurationError(f"Config file {path} is not valid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError(f"Config file {path} must hold a mapping at top level")
    config = parse_config(raw, overrides)
    logger.debug("Loaded config from %s with %d overrides", path, len(overrides))
    return config
