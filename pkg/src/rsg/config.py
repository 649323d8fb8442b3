"""JSON configuration loading with strict schema validation.

Configs are plain JSON objects.  Validation is strict: unknown keys are
rejected, and every error message is anchored to the offending key path (or
to the line and column for JSON syntax errors) so users can find the problem
in the file directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .gait import Gait, default_forward_gait, default_turning_gait
from .geometry import EuclideanField, SphereField
from .solvers import Limits, SolverSettings, TransitionProblem, Variant
from .swimmer import DragMetricField, MassMetricField, SwimmerParams


class ConfigError(ValueError):
    """Raised for unreadable, malformed, or schema-violating configs."""


_METRIC_KINDS = ("drag", "mass", "euclidean", "sphere")

_SWIMMER_KEYS = {
    "link_length": float,
    "link_width": float,
    "drag_coeff": float,
    "drag_ratio": float,
    "fluid_density": float,
    "link_density": float,
}

_SOLVER_KEYS = {
    "residual_weight": float,
    "cost_weight": float,
    "tolerance": float,
    "steps": int,
    "search_steps": int,
    "oracle_refine": int,
    "time_bounds": tuple,
    "grid_size": int,
    "nm_starts": int,
    "nm_maxiter": int,
    "polish_max_nfev": int,
    "fixed_T": float,
    "fixed_tf": float,
}

_TOP_KEYS = ("metric", "variant", "source_gait", "target_gait", "phase",
             "limits", "solver", "sweep", "scenario", "output_dir")


def _reject_unknown(obj: dict, allowed, where: str):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key '{key}'")


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    return obj


def _coerce(value, kind, where: str):
    try:
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError
            return int(value)
        if kind is tuple:
            lo, hi = (float(v) for v in value)
            return (lo, hi)
    except (TypeError, ValueError):
        pass
    raise ConfigError(f"{where}: expected {kind.__name__}, got {value!r}")


@dataclass
class Config:
    """Validated run configuration; builders produce the solver objects."""

    metric_kind: str = "drag"
    swimmer: SwimmerParams = field(default_factory=SwimmerParams)
    variant: Variant = Variant.PATH
    source_gait: Gait = field(default_factory=default_forward_gait)
    target_gait: Gait = field(default_factory=default_turning_gait)
    phase: float = 0.0
    limits: Limits = field(default_factory=Limits)
    settings: SolverSettings = field(default_factory=SolverSettings)
    phase_count: int = 12
    samples_per_period: int = 200
    output_dir: str = "out"

    def build_metric(self):
        if self.metric_kind == "drag":
            return DragMetricField(self.swimmer)
        if self.metric_kind == "mass":
            return MassMetricField(self.swimmer)
        if self.metric_kind == "euclidean":
            return EuclideanField(self.source_gait.dim)
        return SphereField()

    def body_field(self):
        """Swimmer field providing the local connection, or None."""
        if self.metric_kind in ("drag", "mass"):
            return self.build_metric()
        return None

    def build_problem(self, variant: Variant | None = None,
                      phase: float | None = None) -> TransitionProblem:
        return TransitionProblem(
            variant=variant if variant is not None else self.variant,
            metric=self.build_metric(),
            source=self.source_gait,
            target=self.target_gait,
            t0=self.phase if phase is None else float(phase),
            limits=self.limits,
            settings=self.settings,
        )


def _parse_gait(value, where: str, fallback: Gait) -> Gait:
    if value is None:
        return fallback
    if isinstance(value, str):
        if value == "forward":
            return default_forward_gait()
        if value == "turning":
            return default_turning_gait()
        raise ConfigError(f"{where}: unknown named gait '{value}'")
    value = _require_mapping(value, where)
    _reject_unknown(value, ("label", "period", "joints"), where)
    if "period" not in value or "joints" not in value:
        raise ConfigError(f"{where}: a gait object needs 'period' and 'joints'")
    try:
        return Gait.from_dict(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_config(data: dict) -> Config:
    """Validate a decoded JSON object and build a Config."""
    data = _require_mapping(data, "config")
    _reject_unknown(data, _TOP_KEYS, "config")
    cfg = Config()

    if "metric" in data:
        m = _require_mapping(data["metric"], "metric")
        _reject_unknown(m, ("kind", "params"), "metric")
        kind = m.get("kind", "drag")
        if kind not in _METRIC_KINDS:
            raise ConfigError(
                f"metric.kind: '{kind}' is not one of {', '.join(_METRIC_KINDS)}")
        cfg.metric_kind = kind
        if "params" in m:
            p = _require_mapping(m["params"], "metric.params")
            _reject_unknown(p, _SWIMMER_KEYS, "metric.params")
            kwargs = {k: _coerce(v, _SWIMMER_KEYS[k], f"metric.params.{k}")
                      for k, v in p.items()}
            try:
                cfg.swimmer = SwimmerParams(**kwargs)
            except ValueError as exc:
                raise ConfigError(f"metric.params: {exc}") from exc

    if "variant" in data:
        try:
            cfg.variant = Variant(data["variant"])
        except ValueError:
            raise ConfigError(
                f"variant: '{data['variant']}' is not one of path, accel, torque")

    cfg.source_gait = _parse_gait(data.get("source_gait"), "source_gait",
                                  cfg.source_gait)
    cfg.target_gait = _parse_gait(data.get("target_gait"), "target_gait",
                                  cfg.target_gait)

    if "phase" in data:
        cfg.phase = _coerce(data["phase"], float, "phase")

    if "limits" in data:
        lim = data["limits"]
        if lim is None:
            cfg.limits = Limits(None, None)
        else:
            lim = _require_mapping(lim, "limits")
            _reject_unknown(lim, ("joint", "acceleration"), "limits")
            joint = lim.get("joint", Limits.joint)
            acc = lim.get("acceleration", Limits.acceleration)
            cfg.limits = Limits(
                None if joint is None else _coerce(joint, float, "limits.joint"),
                None if acc is None else _coerce(acc, float, "limits.acceleration"))

    if "solver" in data:
        s = _require_mapping(data["solver"], "solver")
        _reject_unknown(s, _SOLVER_KEYS, "solver")
        kwargs = {}
        for k, v in s.items():
            if v is None and k in ("fixed_T", "fixed_tf"):
                kwargs[k] = None
            else:
                kwargs[k] = _coerce(v, _SOLVER_KEYS[k], f"solver.{k}")
        cfg.settings = SolverSettings(**kwargs)

    if "sweep" in data:
        sw = _require_mapping(data["sweep"], "sweep")
        _reject_unknown(sw, ("phase_count",), "sweep")
        if "phase_count" in sw:
            count = _coerce(sw["phase_count"], int, "sweep.phase_count")
            if count < 1:
                raise ConfigError("sweep.phase_count: must be >= 1")
            cfg.phase_count = count

    if "scenario" in data:
        sc = _require_mapping(data["scenario"], "scenario")
        _reject_unknown(sc, ("samples_per_period",), "scenario")
        if "samples_per_period" in sc:
            spp = _coerce(sc["samples_per_period"], int,
                          "scenario.samples_per_period")
            if spp < 2:
                raise ConfigError("scenario.samples_per_period: must be >= 2")
            cfg.samples_per_period = spp

    if "output_dir" in data:
        if not isinstance(data["output_dir"], str):
            raise ConfigError("output_dir: expected a string path")
        cfg.output_dir = data["output_dir"]

    if cfg.metric_kind in ("drag", "mass"):
        for gait, name in ((cfg.source_gait, "source_gait"),
                           (cfg.target_gait, "target_gait")):
            if gait.dim != 2:
                raise ConfigError(f"{name}: swimmer gaits need exactly 2 joints")
    if cfg.source_gait.dim != cfg.target_gait.dim:
        raise ConfigError("source_gait and target_gait disagree on joint count")
    return cfg


def load_config(path: str) -> Config:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_config(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
