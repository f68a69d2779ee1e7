"""Run configuration: a single JSON document with dotted-path overrides."""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import reference
from .chain import ChainSystem
from .dynamics import TimeGrid, auto_grid
from .optimizer import TrustRegionConfig
from .pmp import CostWeights
from .pulses import GaussianParams
from .robustness import TransmonSetup
from .transmon import TransmonSpec, build_frame, chain_from_transmon, level_spectrum, resonant_frame

__all__ = ["ConfigError", "RunConfig", "load_config", "apply_overrides", "default_config"]


class ConfigError(ValueError):
    pass


def _default_transmon():
    spec = reference.reference_spec()
    return {"charging_energy": spec.charging_energy, "josephson_energy": spec.josephson_energy,
            "level_count": spec.level_count}


@dataclass
class RunConfig:
    transmon: dict | None = None
    chain: dict | None = None
    frame: str | dict = "resonant"
    decay_rates: list | None = None
    weights: dict = field(default_factory=lambda: asdict(reference.WEIGHTS))
    pulses: dict = field(default_factory=lambda: reference.INITIAL_PARAMS.as_dict())
    optimized_pulses: dict | None = None
    grid: dict = field(default_factory=lambda: {"duration": reference.DURATION, "steps": None})
    optimizer: dict = field(default_factory=dict)
    gradient_descent: dict = field(default_factory=lambda: {"eta": 1e-3, "tol": 1e-8, "max_iter": 100})
    scan1d: dict | None = None
    scan2d: dict | None = None
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        # JSON-normalise nested values (tuples -> lists) so configs round-trip exactly
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (dict, list)):
                setattr(self, f.name, json.loads(json.dumps(value)))
        if (self.transmon is None) == (self.chain is None):
            raise ConfigError("exactly one of 'transmon' or 'chain' must be given")
        if self.chain is not None:
            for key in ("detunings", "links"):
                if key not in self.chain:
                    raise ConfigError(f"chain config missing {key!r}")
        try:
            self.initial_params()
            if self.optimized_pulses is not None:
                self.optimized_params()
            self.cost_weights()
            self.trust_region()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not isinstance(self.frame, (str, dict)) or (isinstance(self.frame, str) and self.frame != "resonant"):
            raise ConfigError("frame must be 'resonant' or a mapping of drive frequencies")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**copy.deepcopy(data))

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    def dump(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    # builders -------------------------------------------------------------

    def transmon_spec(self) -> TransmonSpec:
        if self.transmon is None:
            raise ConfigError("this command needs a 'transmon' section")
        try:
            return TransmonSpec(**self.transmon)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid transmon spec: {exc}") from exc

    def frame_spec(self):
        spectrum = level_spectrum(self.transmon_spec())
        if self.frame == "resonant":
            return spectrum, resonant_frame(spectrum)
        try:
            return spectrum, build_frame(spectrum, **self.frame)
        except TypeError as exc:
            raise ConfigError(f"invalid frame: {exc}") from exc

    def _decay(self, n):
        if self.decay_rates is None:
            return None
        if len(self.decay_rates) != n:
            raise ConfigError(f"decay_rates must have {n} entries")
        return np.asarray(self.decay_rates, dtype=float)

    def system(self) -> ChainSystem:
        try:
            if self.chain is not None:
                return ChainSystem(self.chain["detunings"], [tuple(lk) for lk in self.chain["links"]],
                                   [tuple(d) for d in self.chain.get("dissipation", [])])
            spectrum, frame = self.frame_spec()
            return chain_from_transmon(spectrum, frame, self._decay(spectrum.level_count))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def initial_params(self) -> GaussianParams:
        return GaussianParams(**self.pulses)

    def optimized_params(self) -> GaussianParams | None:
        return None if self.optimized_pulses is None else GaussianParams(**self.optimized_pulses)

    def cost_weights(self) -> CostWeights:
        w = dict(self.weights)
        for key in ("penalized", "leakage"):
            if w.get(key) is not None:
                w[key] = tuple(w[key])
        return CostWeights(**w)

    def trust_region(self) -> TrustRegionConfig:
        return TrustRegionConfig(**self.optimizer)

    def time_grid(self, system: ChainSystem | None = None) -> TimeGrid:
        duration = float(self.grid["duration"])
        steps = self.grid.get("steps")
        if steps:
            return TimeGrid(duration, int(steps))
        system = system if system is not None else self.system()
        return auto_grid(system, self.initial_params(), duration)

    def setup(self) -> TransmonSetup:
        spec = self.transmon_spec()
        grid = self.time_grid()
        if self.frame == "resonant":
            return TransmonSetup(spec, grid, self.decay_rates)
        return TransmonSetup(spec, grid, self.decay_rates, self.frame["omega_p"], self.frame["omega_s"],
                             self.frame.get("phi_p", 0.0), self.frame.get("phi_s", 0.0))


def default_config() -> RunConfig:
    """The reference five-level transmon run."""
    return RunConfig(transmon=_default_transmon(), decay_rates=list(reference.decay_rates()))


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key.sub=value`` strings; values are parsed as JSON when possible."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = data
        for part in parts[:-1]:
            if node.get(part) is None:
                node[part] = {}
            node = node[part]
            if not isinstance(node, dict):
                raise ConfigError(f"cannot descend into {part!r} in override {item!r}")
        node[parts[-1]] = _parse_value(raw)
    return data


def load_config(path, overrides=None) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(apply_overrides(data, overrides))
