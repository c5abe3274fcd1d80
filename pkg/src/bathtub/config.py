"""YAML scenario files.

A config names the kernel length ``L``, the horizon ``T`` and one
``{kind, params}`` block per model ingredient, plus optional run settings::

    name: example-5.1a
    L: 10.0
    T: 8.0
    velocity: {kind: greenshields, params: {free_flow_speed: 1.0, jam_density: 1.0}}
    inflow: {kind: constant, params: {rate: 0.15}}
    distribution: {kind: uniform, params: {length: 10.0}}
    initial: {kind: zero}
    run: {dt: 0.01, forward_dt: 0.001, sigma: 0.0001, seed: 0}

Unknown keys are rejected with the line and column of the offending node.
Overrides use dotted paths, e.g. ``T=16`` or ``inflow.params.rate=0.2``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import yaml

from bathtub.core import (
    DISTRIBUTION_KINDS,
    INFLOW_KINDS,
    INITIAL_KINDS,
    VELOCITY_KINDS,
    Scenario,
    ValidationReport,
    validate,
)
from bathtub.errors import ConfigurationError

CONFIG_DIR = Path(__file__).parent / "configs"

TOP_KEYS = ("name", "L", "T", "velocity", "inflow", "distribution", "initial", "run")
REQUIRED_KEYS = ("L", "T", "velocity", "inflow", "distribution")
COMPONENT_KEYS = ("kind", "params")
REGISTRIES = {
    "velocity": VELOCITY_KINDS,
    "inflow": INFLOW_KINDS,
    "distribution": DISTRIBUTION_KINDS,
    "initial": INITIAL_KINDS,
}
METHODS = ("explicit", "successive", "uniform-recursion")


@dataclass(frozen=True)
class RunOptions:
    """Mesh and noise settings shared by the CLI pipelines.

    ``dt`` is the inverse mesh, ``forward_dt`` the mesh of the synthetic
    data. ``dx`` defaults to ``v_max dt`` in distribution recovery and to
    ``forward_dt`` in the upwind solver.
    """

    dt: float = 0.01
    dx: Optional[float] = None
    forward_dt: float = 0.001
    sigma: float = 0.0
    seed: int = 0
    method: str = "explicit"

    def __post_init__(self):
        if not self.dt > 0 or not self.forward_dt > 0:
            raise ConfigurationError("run.dt and run.forward_dt must be positive")
        if self.dx is not None and not self.dx > 0:
            raise ConfigurationError("run.dx must be positive")
        if self.sigma < 0:
            raise ConfigurationError("run.sigma must be nonnegative")
        if self.method not in METHODS:
            raise ConfigurationError(f"run.method must be one of {', '.join(METHODS)}")


RUN_KEYS = tuple(f.name for f in dataclasses.fields(RunOptions))


@dataclass(frozen=True)
class ParsedConfig:
    scenario: Scenario
    run: RunOptions
    report: ValidationReport
    name: str = ""


def _marks(node, path=()) -> dict:
    """Map every key path in the YAML tree to its ``(line, column)``, 1-based."""
    out = {path: (node.start_mark.line + 1, node.start_mark.column + 1)}
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            sub = path + (key.value,)
            out[sub] = (key.start_mark.line + 1, key.start_mark.column + 1)
            for p, m in _marks(value, sub).items():
                if p != sub:
                    out[p] = m
    return out


class _Context:
    def __init__(self, marks: dict, source: str):
        self.marks = marks
        self.source = source

    def error(self, message: str, path: tuple) -> ConfigurationError:
        where = self.marks.get(path)
        if where is None:
            return ConfigurationError(f"{self.source}: {message} (from an override)")
        return ConfigurationError(f"{self.source}: {message}", line=where[0], column=where[1])


def _number(value, ctx: _Context, path: tuple, integer: bool = False):
    if isinstance(value, bool):
        raise ctx.error(f"{'.'.join(path)} must be a number, got {value!r}", path)
    try:
        num = float(value)
    except (TypeError, ValueError):
        raise ctx.error(f"{'.'.join(path)} must be a number, got {value!r}", path) from None
    if integer:
        if num != int(num):
            raise ctx.error(f"{'.'.join(path)} must be an integer, got {value!r}", path)
        return int(num)
    return num


def _coerce(value, ctx: _Context, path: tuple):
    """Numbers, or (nested) lists of numbers; YAML 1.1 reads ``1e-4`` as a string."""
    if isinstance(value, list):
        return [_coerce(v, ctx, path) for v in value]
    return _number(value, ctx, path)


def _component(section: str, raw, ctx: _Context):
    path = (section,)
    if not isinstance(raw, dict):
        raise ctx.error(f"{section} must be a mapping with keys kind and params", path)
    for key in raw:
        if key not in COMPONENT_KEYS:
            raise ctx.error(f"unknown key {section}.{key}", path + (key,))
    registry = REGISTRIES[section]
    kind = raw.get("kind")
    if kind not in registry:
        raise ctx.error(f"{section}.kind must be one of {', '.join(sorted(registry))}, got {kind!r}", path + ("kind",))
    cls = registry[kind]
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        raise ctx.error(f"{section}.params must be a mapping", path + ("params",))
    allowed = [f.name for f in dataclasses.fields(cls)]
    kwargs = {}
    for key, value in params.items():
        p = path + ("params", key)
        if key not in allowed:
            raise ctx.error(f"unknown parameter {section}.params.{key} for kind {kind}", p)
        kwargs[key] = _coerce(value, ctx, p)
    try:
        return cls(**kwargs)
    except ConfigurationError as exc:
        raise ctx.error(str(exc), path) from None
    except (TypeError, ValueError) as exc:
        raise ctx.error(f"{section}: {exc}", path) from None


def _run_options(raw, ctx: _Context) -> RunOptions:
    if raw is None:
        return RunOptions()
    if not isinstance(raw, dict):
        raise ctx.error("run must be a mapping", ("run",))
    kwargs = {}
    for key, value in raw.items():
        p = ("run", key)
        if key not in RUN_KEYS:
            raise ctx.error(f"unknown key run.{key}", p)
        if key == "method":
            kwargs[key] = str(value)
        elif key == "seed":
            kwargs[key] = _number(value, ctx, p, integer=True)
        elif value is None and key == "dx":
            kwargs[key] = None
        else:
            kwargs[key] = _number(value, ctx, p)
    try:
        return RunOptions(**kwargs)
    except ConfigurationError as exc:
        raise ctx.error(str(exc), ("run",)) from None


def apply_overrides(data: dict, overrides: Iterable[str]) -> dict:
    """Apply ``a.b.c=value`` assignments; values are parsed as YAML scalars."""
    data = _deep_copy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigurationError(f"override {item!r} has an empty key")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"override {item!r}: {exc}") from None
        node = data
        for p in parts[:-1]:
            nxt = node.get(p)
            if nxt is None:
                nxt = node[p] = {}
            if not isinstance(nxt, dict):
                raise ConfigurationError(f"override {item!r}: {p} is not a mapping")
            node = nxt
        node[parts[-1]] = value
    return data


def _deep_copy(value):
    if isinstance(value, dict):
        return {k: _deep_copy(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_deep_copy(v) for v in value]
    return value


def load_data(text: str, source: str = "<config>") -> tuple[dict, dict]:
    """Parse YAML text into plain data plus a path -> (line, column) map."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line, col = (mark.line + 1, mark.column + 1) if mark else (None, None)
        raise ConfigurationError(f"{source}: {exc.problem or exc}", line=line, column=col) from None
    if node is None:
        raise ConfigurationError(f"{source}: empty configuration", line=1, column=1)
    if not isinstance(node, yaml.MappingNode):
        raise ConfigurationError(
            f"{source}: top level must be a mapping", line=node.start_mark.line + 1, column=node.start_mark.column + 1
        )
    data = yaml.safe_load(text)
    return data, _marks(node)


def build(data: dict, marks: Optional[dict] = None, source: str = "<config>") -> ParsedConfig:
    ctx = _Context(marks or {}, source)
    if not isinstance(data, dict):
        raise ctx.error("top level must be a mapping", ())
    for key in data:
        if key not in TOP_KEYS:
            raise ctx.error(f"unknown key {key}", (key,))
    for key in REQUIRED_KEYS:
        if key not in data:
            raise ctx.error(f"missing required key {key}", ())
    length = _number(data["L"], ctx, ("L",))
    horizon = _number(data["T"], ctx, ("T",))
    velocity = _component("velocity", data["velocity"], ctx)
    inflow = _component("inflow", data["inflow"], ctx)
    distribution = _component("distribution", data["distribution"], ctx)
    initial = _component("initial", data["initial"], ctx) if data.get("initial") is not None else INITIAL_KINDS["zero"]()
    run = _run_options(data.get("run"), ctx)
    try:
        scenario = Scenario(velocity, length, inflow, distribution, initial, horizon)
    except ConfigurationError as exc:
        raise ctx.error(str(exc), ()) from None
    report = validate(scenario)
    required = [c for c in report.checks if c.severity == "required" and not c.passed]
    if required:
        names = ", ".join(f"{c.name} ({c.detail})" for c in required)
        raise ConfigurationError(f"{source}: scenario fails required checks: {names}")
    return ParsedConfig(scenario, run, report, str(data.get("name") or ""))


def parse_text(text: str, overrides: Iterable[str] = (), source: str = "<config>") -> ParsedConfig:
    data, marks = load_data(text, source)
    if overrides:
        data = apply_overrides(data, overrides)
    return build(data, marks, source)


def parse_config(path, overrides: Iterable[str] = ()) -> ParsedConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_text(path.read_text(), overrides, str(path))


def scenario_data(s: Scenario) -> dict:
    def block(obj):
        return {"kind": obj.kind, "params": obj.params()}

    return {
        "L": float(s.length),
        "T": float(s.horizon),
        "velocity": block(s.velocity),
        "inflow": block(s.inflow),
        "distribution": block(s.distribution),
        "initial": block(s.initial),
    }


def config_data(s: Scenario, run: Optional[RunOptions] = None, name: str = "") -> dict:
    data = {"name": name} if name else {}
    data.update(scenario_data(s))
    if run is not None:
        data["run"] = dataclasses.asdict(run)
    return data


def emit_config(s: Scenario, run: Optional[RunOptions] = None, name: str = "") -> str:
    """YAML text that parses back to an equal scenario and run options."""
    return yaml.safe_dump(config_data(s, run, name), sort_keys=False, default_flow_style=None)


def shipped_configs() -> dict[str, Path]:
    return {p.stem: p for p in sorted(CONFIG_DIR.glob("*.yaml"))}


__all__ = [
    "RunOptions",
    "ParsedConfig",
    "parse_config",
    "parse_text",
    "apply_overrides",
    "build",
    "emit_config",
    "config_data",
    "scenario_data",
    "shipped_configs",
    "CONFIG_DIR",
]
