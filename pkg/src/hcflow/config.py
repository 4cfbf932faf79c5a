"""Run configuration, JSON (de)serialisation and the named experiment presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .model import Circle, Dumbbell, Ellipse, FlowParams, PerturbedCircle, curve_from_dict

STOP_FIELDS = ("k_cap", "length_floor", "min_q_ratio")


@dataclass(frozen=True)
class RunConfig:
    curve: object
    V0: float = 0.0
    beta: float = 0.0
    J: int = 256
    dt: float = 1e-4
    T: float = 1.0
    snapshot_stride: int = 1000
    output_dir: str = "out"
    stop: dict = field(default_factory=dict)
    qualitative: bool = False

    def __post_init__(self):
        unknown = set(self.stop) - set(STOP_FIELDS)
        if unknown:
            raise ConfigError(f"unknown stop threshold(s): {sorted(unknown)}")
        self.params()  # validates the numeric fields

    def params(self) -> FlowParams:
        return FlowParams(
            beta=self.beta, V0=self.V0, J=self.J, dt=self.dt, T=self.T,
            snapshot_stride=self.snapshot_stride, **self.stop,
        )

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["curve"] = self.curve.to_dict()
        d["stop"] = dict(self.stop)
        return d

    def with_output(self, output_dir) -> RunConfig:
        return replace(self, output_dir=str(output_dir))


_NUMERIC = {"V0": float, "beta": float, "J": int, "dt": float, "T": float, "snapshot_stride": int}


def config_from_dict(d: dict) -> RunConfig:
    allowed = {f.name for f in fields(RunConfig)}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    if "curve" not in d:
        raise ConfigError("config needs a 'curve' entry")
    kw = dict(d)
    kw["curve"] = curve_from_dict(d["curve"])
    for name, typ in _NUMERIC.items():
        if name in kw:
            try:
                val = typ(kw[name])
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be {typ.__name__}") from None
            if typ is int and val != kw[name]:
                raise ConfigError(f"{name} must be an integer")
            kw[name] = val
    if "stop" in kw:
        if not isinstance(kw["stop"], dict):
            raise ConfigError("stop must be an object")
        kw["stop"] = {k: float(v) for k, v in kw["stop"].items()}
    if "qualitative" in kw:
        kw["qualitative"] = bool(kw["qualitative"])
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


_ELLIPSE = Ellipse(a=1.5, b=1.0)
_DUMBBELL = Dumbbell()

# Horizons sit past the expected trip times; runs normally end on a stopping threshold.
PRESETS: dict[str, RunConfig] = {
    "circle-v0": RunConfig(Circle(1.0), V0=0.0, T=1.3),
    "circle-v+1": RunConfig(Circle(1.0), V0=1.0, T=3.6),
    "circle-v-1": RunConfig(Circle(1.0), V0=-1.0, T=0.7, snapshot_stride=500),
    "ellipse-v0": RunConfig(_ELLIPSE, V0=0.0, T=1.6),
    "ellipse-v1": RunConfig(_ELLIPSE, V0=1.0, T=4.5, snapshot_stride=3000),
    "ellipse-v0-beta2": RunConfig(_ELLIPSE, V0=0.0, beta=2.0, T=2.6, snapshot_stride=2000),
    "ellipse-v1-beta01": RunConfig(_ELLIPSE, V0=1.0, beta=0.1, T=4.4, snapshot_stride=3000),
    "dumbbell-v0": RunConfig(_DUMBBELL, V0=0.0, T=0.4, snapshot_stride=500, qualitative=True),
    "dumbbell-v1": RunConfig(_DUMBBELL, V0=1.0, T=2.0, snapshot_stride=1000, qualitative=True),
    "dumbbell-v-1": RunConfig(_DUMBBELL, V0=-1.0, T=0.3, snapshot_stride=300, qualitative=True),
    "table1": RunConfig(PerturbedCircle(1.0, 0.1), V0=0.0, J=32, dt=1 / 32, T=1.0,
                        snapshot_stride=8, stop={"k_cap": 1e300, "length_floor": 0.0,
                                                 "min_q_ratio": 0.0}),
}

TABLE1_LEVELS = (32, 64, 128, 256, 512, 1024, 2048)


def get_preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
