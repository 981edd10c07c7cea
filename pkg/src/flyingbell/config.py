"""YAML scenario configs.

Annotated example (all numbers SI: rates in 1/s, times in s, speeds in m/s)::

    protocol:
      transit_time: 1.0e-4        # canonical couplings pi/4 and pi/2 over this time
      # lambda1/lambda2/tA/tB may be given instead; non-canonical pulse areas
      # need allow_noncanonical: true
    channel:
      gamma: 200.0
      gamma_p: 0.0
      t_flight: 5.0e-3
      mode: numeric-noisy         # ideal | analytic-noisy | numeric-noisy
      coherence: lindblad         # lindblad | additive (analytic-noisy only)
      dt: null                    # RK4 step, default t_flight/2000
    full_model:                   # only read by `validate`
      matched: {g_fly: 1.0, delta_over_g: 20, eta: 0.05, nu_over_delta: 10}
      # or explicit g_ion, g_fly, delta, nu, eta
      n_field_max: 10
      n_vib_max: 2
      field_states:
        - {kind: fock, parameter: 0}
        - {kind: thermal, parameter: 0.5}
    sweep:
      axes:
        - {name: t_flight, start: 0, stop: 1.0e-2, points: 50, scale: linear}
    output: {format: json, path: null}
    oracle: {enabled: true, samples: 2000, seed: 0}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .dynamics import COHERENCE_MODELS, MODES, ChannelSpec
from .linalg import ValidationError
from .model import EffectiveParams, FieldStateSpec, FullModelParams

SWEEPABLE = {
    "gamma": ("channel", "gamma"),
    "gamma_p": ("channel", "gamma_p"),
    "t_flight": ("channel", "t_flight"),
    "lambda1": ("protocol", "lambda1"),
    "lambda2": ("protocol", "lambda2"),
    "tA": ("protocol", "tA"),
    "tB": ("protocol", "tB"),
}


class ConfigError(ValueError):
    """Malformed or inconsistent scenario config; the message names the key."""


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: EffectiveParams
    channel: ChannelSpec
    mode: str = "numeric-noisy"
    coherence: str = "lindblad"
    dt: float | None = None
    allow_noncanonical: bool = False
    full_model: FullModelParams | None = None
    field_states: tuple[FieldStateSpec, ...] = ()
    omega_qubit: float | None = None
    sweep: tuple[SweepAxis, ...] = ()
    output_format: str = "json"
    output_path: str | None = None
    oracle_enabled: bool = True
    oracle_samples: int = 2000
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _section(doc: dict, key: str, required: bool = False) -> dict:
    value = doc.get(key)
    if value is None:
        if required:
            raise ConfigError(f"missing required section '{key}'")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be a mapping")
    return value


def _number(section: dict, path: str, key: str, default: Any = ..., minimum: float | None = 0.0) -> float:
    if key not in section or section[key] is None:
        if default is ...:
            raise ConfigError(f"missing required key '{path}.{key}'")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}.{key}' must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or (minimum is not None and value < minimum):
        raise ConfigError(f"'{path}.{key}' must be finite and >= {minimum}, got {value}")
    return value


def _choice(section: dict, path: str, key: str, options, default: str) -> str:
    value = section.get(key, default)
    if value not in options:
        raise ConfigError(f"'{path}.{key}' must be one of {list(options)}, got {value!r}")
    return value


def _unknown(section: dict, path: str, allowed: set[str]) -> None:
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"unknown key '{path}.{extra[0]}'")


def _protocol(sec: dict) -> tuple[EffectiveParams, bool]:
    _unknown(sec, "protocol", {"transit_time", "lambda1", "lambda2", "tA", "tB", "allow_noncanonical"})
    allow = bool(sec.get("allow_noncanonical", False))
    explicit = [k for k in ("lambda1", "lambda2", "tA", "tB") if k in sec]
    if explicit:
        missing = {"lambda1", "lambda2", "tA", "tB"} - set(explicit)
        if missing:
            raise ConfigError(f"missing required key 'protocol.{sorted(missing)[0]}'")
        eff = EffectiveParams(*(_number(sec, "protocol", k) for k in ("lambda1", "lambda2", "tA", "tB")))
        if not allow and not eff.is_canonical(1e-9):
            raise ConfigError("'protocol' pulse areas are not (pi/4, pi/2); set protocol.allow_noncanonical: true")
        return eff, allow
    transit = _number(sec, "protocol", "transit_time", 1.0)
    if transit <= 0:
        raise ConfigError("'protocol.transit_time' must be positive")
    return EffectiveParams.canonical(transit), allow


def _full_model(sec: dict) -> tuple[FullModelParams | None, tuple[FieldStateSpec, ...], float | None]:
    if not sec:
        return None, (), None
    path = "full_model"
    _unknown(sec, path, {"matched", "g_ion", "g_fly", "delta", "nu", "eta", "n_field_max", "n_vib_max", "field_states", "omega_qubit"})
    n_field = int(_number(sec, path, "n_field_max", 10))
    n_vib = int(_number(sec, path, "n_vib_max", 2))
    if "matched" in sec:
        m = sec["matched"]
        if not isinstance(m, dict):
            raise ConfigError("'full_model.matched' must be a mapping")
        mp = f"{path}.matched"
        _unknown(m, mp, {"g_fly", "delta_over_g", "eta", "nu_over_delta"})
        p = FullModelParams.matched(
            _number(m, mp, "g_fly"),
            _number(m, mp, "delta_over_g"),
            _number(m, mp, "eta"),
            _number(m, mp, "nu_over_delta", 10.0),
            n_field_max=n_field,
            n_vib_max=n_vib,
        )
    else:
        p = FullModelParams(
            _number(sec, path, "g_ion"),
            _number(sec, path, "g_fly"),
            _number(sec, path, "delta", minimum=None),
            _number(sec, path, "nu"),
            _number(sec, path, "eta"),
            n_field,
            n_vib,
        )
        if p.delta == 0:
            raise ConfigError("'full_model.delta' must be nonzero")
    fields = []
    for i, f in enumerate(sec.get("field_states") or [{"kind": "fock", "parameter": 0}]):
        fp = f"{path}.field_states[{i}]"
        if not isinstance(f, dict):
            raise ConfigError(f"'{fp}' must be a mapping")
        _unknown(f, fp, {"kind", "parameter"})
        kind = _choice(f, fp, "kind", ("fock", "thermal", "coherent"), "fock")
        fields.append(FieldStateSpec(kind, _number(f, fp, "parameter", 0.0, minimum=None), n_field))
    omega = _number(sec, path, "omega_qubit", None, minimum=None)
    return p, tuple(fields), omega


def _sweep(sec: dict, allow_noncanonical: bool) -> tuple[SweepAxis, ...]:
    if not sec:
        return ()
    _unknown(sec, "sweep", {"axes"})
    axes = sec.get("axes")
    if not isinstance(axes, list) or not axes:
        raise ConfigError("'sweep.axes' must be a nonempty list")
    out = []
    for i, a in enumerate(axes):
        ap = f"sweep.axes[{i}]"
        if not isinstance(a, dict):
            raise ConfigError(f"'{ap}' must be a mapping")
        _unknown(a, ap, {"name", "start", "stop", "points", "scale"})
        name = a.get("name")
        if name not in SWEEPABLE:
            raise ConfigError(f"'{ap}.name' must be one of {sorted(SWEEPABLE)}, got {name!r}")
        if SWEEPABLE[name][0] == "protocol" and not allow_noncanonical:
            raise ConfigError(f"'{ap}.name' sweeps a pulse parameter; set protocol.allow_noncanonical: true")
        points = a.get("points", 1)
        if isinstance(points, bool) or not isinstance(points, int) or points < 1:
            raise ConfigError(f"'{ap}.points' must be a positive integer")
        scale = _choice(a, ap, "scale", ("linear", "log"), "linear")
        start = _number(a, ap, "start")
        stop = _number(a, ap, "stop", start)
        if scale == "log" and (start <= 0 or stop <= 0):
            raise ConfigError(f"'{ap}' log scale needs positive start and stop")
        out.append(SweepAxis(name, start, stop, points, scale))
    names = [a.name for a in out]
    if len(set(names)) != len(names):
        raise ConfigError("'sweep.axes' repeats a parameter name")
    return tuple(out)


def parse_config(doc: Any) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    _unknown(doc, "config", {"protocol", "channel", "full_model", "sweep", "output", "oracle"})
    eff, allow = _protocol(_section(doc, "protocol"))
    ch = _section(doc, "channel")
    _unknown(ch, "channel", {"gamma", "gamma_p", "t_flight", "mode", "coherence", "dt"})
    channel = ChannelSpec(_number(ch, "channel", "gamma", 0.0), _number(ch, "channel", "gamma_p", 0.0), _number(ch, "channel", "t_flight", 0.0))
    mode = _choice(ch, "channel", "mode", MODES, "numeric-noisy")
    coherence = _choice(ch, "channel", "coherence", COHERENCE_MODELS, "lindblad")
    dt = _number(ch, "channel", "dt", None)
    if dt is not None and dt <= 0:
        raise ConfigError("'channel.dt' must be positive")
    full, fields, omega = _full_model(_section(doc, "full_model"))
    out = _section(doc, "output")
    _unknown(out, "output", {"format", "path"})
    orc = _section(doc, "oracle")
    _unknown(orc, "oracle", {"enabled", "samples", "seed"})
    samples = orc.get("samples", 2000)
    seed = orc.get("seed", 0)
    if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1000:
        raise ConfigError("'oracle.samples' must be an integer >= 1000")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("'oracle.seed' must be an integer")
    try:
        return ScenarioConfig(
            protocol=eff,
            channel=channel,
            mode=mode,
            coherence=coherence,
            dt=dt,
            allow_noncanonical=allow,
            full_model=full,
            field_states=fields,
            omega_qubit=omega,
            sweep=_sweep(_section(doc, "sweep"), allow),
            output_format=_choice(out, "output", "format", ("json", "csv"), "json"),
            output_path=out.get("path"),
            oracle_enabled=bool(orc.get("enabled", True)),
            oracle_samples=samples,
            seed=seed,
            raw=doc,
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    try:
        return parse_config(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def with_values(cfg: ScenarioConfig, values: dict[str, float]) -> ScenarioConfig:
    """Copy of ``cfg`` with swept parameters substituted."""
    proto = {k: getattr(cfg.protocol, k) for k in ("lambda1", "lambda2", "tA", "tB")}
    chan = {k: getattr(cfg.channel, k) for k in ("gamma", "gamma_p", "t_flight")}
    for name, value in values.items():
        section, key = SWEEPABLE[name]
        (proto if section == "protocol" else chan)[key] = float(value)
    return replace(cfg, protocol=EffectiveParams(**proto), channel=ChannelSpec(**chan))
