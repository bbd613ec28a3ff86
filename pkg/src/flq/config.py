"""Run configuration: a versioned TOML file validated before any computation.

Layout (all sections optional except ``model``)::

    schema_version = 1
    seed = 0

    [model]
    preset = "tls_cosine"            # or give period/modes/couplings explicitly
    params = { omega0 = 0.5, Omega = 2.0, lam = 0.01 }

    [[baths]]                        # replaces the preset baths when present
    labels = ["x"]
    kind = "ohmic-cubed-thermal"     # vacuum-cutoff | flat | tabulated
    amplitude = 1.0
    beta = 2.0

    [numerics]
    n_steps = 4096

    [evolve]
    t_end = 10.0
    n_times = 101
    initial = "ground"
    observables = ["sx", "sz"]

    [steady]
    n_samples = 16

    [sweep]
    command = "decompose"
    axes = [{ path = "model.params.Omega", values = [1.5, 2.0, 2.5] }]

    [output]
    directory = "out"
    formats = ["json", "csv"]

Matrices are lists of rows whose entries are real numbers or ``[re, im]`` pairs.
"""

from __future__ import annotations

import copy
import sys
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from flq.bath import BathSet, Flat, OhmicCubedThermal, Tabulated, VacuumCutoff, read_table
from flq.errors import InvalidArgumentError
from flq.hamiltonian import PeriodicHamiltonian
from flq.models import PRESETS, ModelSpec
from flq.pipeline import Numerics
from flq.propagator import PropagatorConfig

SCHEMA_VERSION = 1

Entry = Union[float, list[float]]
Matrix = list[list[Entry]]


def to_matrix(rows, what="matrix") -> np.ndarray:
    """Nested rows of reals or ``[re, im]`` pairs to a complex array."""
    try:
        out = np.array(
            [[complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in rows]
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise InvalidArgumentError(f"{what}: entries must be numbers or [re, im] pairs") from exc
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise InvalidArgumentError(f"{what}: expected a square matrix, got shape {out.shape}")
    return out


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Strict):
    preset: Optional[str] = None
    params: dict[str, float] = Field(default_factory=dict)
    period: Optional[float] = None
    modes: dict[str, Matrix] = Field(default_factory=dict)
    couplings: dict[str, Matrix] = Field(default_factory=dict)
    coupling: float = 1.0

    @model_validator(mode="after")
    def _one_source(self):
        explicit = self.period is not None or self.modes or self.couplings
        if self.preset is None and not explicit:
            raise ValueError("give either a preset or explicit period/modes/couplings")
        if self.preset is not None and explicit:
            raise ValueError("preset and explicit modes are mutually exclusive")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.preset is None and (self.period is None or not self.modes or not self.couplings):
            raise ValueError("explicit models need period, modes and couplings")
        return self


class BathSection(_Strict):
    labels: list[str]
    kind: Literal["ohmic-cubed-thermal", "vacuum-cutoff", "flat", "tabulated"]
    amplitude: Optional[float] = None
    beta: Optional[float] = None
    gamma0: Optional[float] = None
    table: Optional[str] = None
    x: Optional[list[float]] = None
    values: Optional[list[float]] = None

    def build(self, base: Path):
        if self.kind == "ohmic-cubed-thermal":
            return OhmicCubedThermal(_need(self.amplitude, "amplitude"), _need(self.beta, "beta"))
        if self.kind == "vacuum-cutoff":
            return VacuumCutoff(_need(self.amplitude, "amplitude"))
        if self.kind == "flat":
            return Flat(_need(self.gamma0, "gamma0"))
        if self.table is not None:
            path = Path(self.table)
            return read_table(path if path.is_absolute() else base / path)
        return Tabulated(np.array(_need(self.x, "x")), np.array(_need(self.values, "values")))


def _need(value, name):
    if value is None:
        raise InvalidArgumentError(f"bath parameter {name!r} is required for this kind")
    return value


class NumericsSection(_Strict):
    method: Literal["magnus4", "midpoint"] = "magnus4"
    n_steps: int = Field(4096, ge=16)
    t0: float = 0.0
    q_max: int = Field(8, ge=0)
    q_cap: int = Field(64, ge=1)
    tail_tol: float = Field(1e-8, gt=0)
    freq_tol: Optional[float] = Field(None, gt=0)
    lamb_method: Literal["zero", "principal-value"] = "zero"
    lamb_cutoff: Optional[float] = Field(None, gt=0)
    pv_tol: float = Field(1e-9, gt=0)

    def build(self) -> Numerics:
        prop = PropagatorConfig(method=self.method, n_steps=self.n_steps)
        return Numerics(prop, self.t0, self.q_max, self.q_cap, self.tail_tol, self.freq_tol, self.lamb_method, self.lamb_cutoff, self.pv_tol)


class EvolveSection(_Strict):
    times: Optional[list[float]] = None
    t_end: Optional[float] = Field(None, gt=0)
    n_times: int = Field(101, ge=2)
    initial: Union[Literal["ground", "maximally-mixed"], Matrix] = "ground"
    observables: Union[list[str], dict[str, Matrix]] = Field(default_factory=list)

    @field_validator("times")
    @classmethod
    def _sorted(cls, v):
        if v is not None and (not v or any(b < a for a, b in zip(v, v[1:]))):
            raise ValueError("times must be a non-empty sorted list")
        return v


class SteadySection(_Strict):
    n_samples: int = Field(16, ge=1)


class Axis(_Strict):
    path: str
    values: list


class SweepSection(_Strict):
    command: Literal["decompose", "evolve", "steady", "verify"] = "decompose"
    axes: list[Axis] = Field(default_factory=list)
    workers: Optional[int] = Field(None, ge=1)


class OutputSection(_Strict):
    directory: str = "out"
    formats: list[Literal["json", "csv"]] = Field(default_factory=lambda: ["json", "csv"])


class RunConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    seed: int = Field(0, ge=0, lt=2**64)
    model: ModelSection
    baths: list[BathSection] = Field(default_factory=list)
    numerics: NumericsSection = Field(default_factory=NumericsSection)
    evolve: EvolveSection = Field(default_factory=EvolveSection)
    steady: SteadySection = Field(default_factory=SteadySection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _axes_resolve(self):
        raw = self.model_dump()
        for axis in self.sweep.axes:
            if not axis.values:
                raise ValueError(f"sweep axis {axis.path} has no values")
            if not _resolves(raw, axis.path):
                raise ValueError(f"sweep axis path {axis.path!r} does not resolve in the base config")
        return self


def _resolves(raw: dict, path: str) -> bool:
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            return False
        node = node[k]
    # preset parameters may be left at their defaults and still be swept
    return isinstance(node, dict) and (keys[-1] in node or keys[:-1] == ["model", "params"])


def parse_value(text: str):
    """A ``--set`` value: any TOML value, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def set_path(raw: dict, path: str, value):
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise InvalidArgumentError(f"cannot set {path}: {k} is not a section")
    node[keys[-1]] = value


def load_raw(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from exc


def with_overrides(raw: dict, overrides) -> dict:
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise InvalidArgumentError(f"--set expects key=value, got {item!r}")
        key, text = item.split("=", 1)
        set_path(raw, key.strip(), parse_value(text.strip()))
    return raw


def build_model(cfg: RunConfig, base: Path = Path(".")) -> ModelSpec:
    m = cfg.model
    if m.preset is not None:
        params = dict(m.params)
        if m.preset == "driven_oscillator" and "n_trunc" in params:
            params["n_trunc"] = int(params["n_trunc"])
        try:
            spec = PRESETS[m.preset](coupling=m.coupling, **params)
        except TypeError as exc:
            raise InvalidArgumentError(f"model.params: {exc}") from exc
        if not cfg.baths:
            return spec
        return ModelSpec(spec.name, spec.hamiltonian, spec.couplings, _baths(cfg, base), m.coupling, spec.metadata)
    modes = {int(q): to_matrix(v, f"model.modes.{q}") for q, v in m.modes.items()}
    h = PeriodicHamiltonian(m.period, modes)
    couplings = tuple((lab, to_matrix(v, f"model.couplings.{lab}")) for lab, v in m.couplings.items())
    return ModelSpec("explicit", h, couplings, _baths(cfg, base), m.coupling)


def _baths(cfg: RunConfig, base: Path) -> BathSet:
    return BathSet(tuple((tuple(b.labels), b.build(base)) for b in cfg.baths))
