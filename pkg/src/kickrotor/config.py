"""Scenario configuration: parsing, validation and resolution.

A config has a ``molecule``, an ``ensemble``, one or more pulse-train blocks
(``train`` or ``trains``) and an ``output`` block.  Resolution fills in every
derived value (delta_alpha, explicit per-realization periods and seeds) so
that the echoed config reruns bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .kicks import MAX_PULSES, delta_alpha_from_anchor, off_resonant_periods
from .rotor import RotorSpec

RECIPES = ("periodic", "timing_noise", "amplitude_noise")


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``field.path: message`` strings."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class MoleculeConfig:
    revival_period_ps: float = 8.38
    delta_alpha: float | None = None
    anchor_intensity_w_cm2: float = 2e13
    anchor_fwhm_fs: float = 130.0
    anchor_kick_strength: float = 3.0
    spin_weight_even: float = 2.0
    spin_weight_odd: float = 1.0
    j_max: int = 60


@dataclass
class EnsembleConfig:
    temperature_k: float = 27.0
    mass_cutoff: float = 0.999


@dataclass
class TrainConfig:
    """One arm of a scenario: a family of trains sharing a recipe.

    The period is given either in ps (``period_ps``) or in units of the
    revival period (``period_trev``); ``period_trev: off_resonant`` selects
    the 20-point off-resonant grid.  Realization ``i`` uses
    ``periods[i % len(periods)]`` and seed ``base_seed + i``.
    """

    name: str = "periodic"
    recipe: str = "periodic"
    n_pulses: int = 24
    kick_strength: float = 2.3
    period_ps: float | list[float] | None = None
    period_trev: float | list[float] | str | None = "off_resonant"
    rel_sigma: float = 0.0
    fwhm_fs: float = 0.0
    n_realizations: int = 20
    base_seed: int = 1

    def periods(self, revival_period: float) -> list[float]:
        if self.period_ps is not None:
            values = self.period_ps if isinstance(self.period_ps, list) else [self.period_ps]
            return [float(v) for v in values]
        if self.period_trev == "off_resonant":
            return off_resonant_periods(revival_period).tolist()
        values = self.period_trev if isinstance(self.period_trev, list) else [self.period_trev]
        return [float(v) * revival_period for v in values]

    def realization_periods(self, revival_period: float) -> list[float]:
        p = self.periods(revival_period)
        return [p[i % len(p)] for i in range(self.n_realizations)]

    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.n_realizations)]


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    per_train_tables: bool = True


@dataclass
class ScenarioConfig:
    name: str = "custom"
    molecule: MoleculeConfig = field(default_factory=MoleculeConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    trains: list[TrainConfig] = field(default_factory=lambda: [TrainConfig()])
    output: OutputConfig = field(default_factory=OutputConfig)

    def rotor_spec(self) -> RotorSpec:
        m = self.molecule
        return RotorSpec(m.revival_period_ps, self.delta_alpha(), m.spin_weight_even,
                         m.spin_weight_odd, m.j_max)

    def delta_alpha(self) -> float:
        m = self.molecule
        if m.delta_alpha is not None:
            return m.delta_alpha
        return delta_alpha_from_anchor(m.anchor_intensity_w_cm2, m.anchor_fwhm_fs,
                                       m.anchor_kick_strength)

    def to_dict(self) -> dict:
        return asdict(self)


def _build(cls, data, path, errors):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        errors.append(f"{path}: expected a mapping, got {type(data).__name__}")
        return cls()
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            errors.append(f"{path}.{key}: unknown field")
    return cls(**{k: v for k, v in data.items() if k in known})


def _number(errors, path, value, *, lo=None, hi=None, lo_open=False, hi_open=False,
            integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{path}: expected a number, got {value!r}")
        return
    if integer and int(value) != value:
        errors.append(f"{path}: expected an integer, got {value!r}")
    if lo is not None and (value <= lo if lo_open else value < lo):
        errors.append(f"{path}: must be {'>' if lo_open else '>='} {lo}, got {value}")
    if hi is not None and (value >= hi if hi_open else value > hi):
        errors.append(f"{path}: must be {'<' if hi_open else '<='} {hi}, got {value}")


def validate(config: ScenarioConfig) -> None:
    """Raise :class:`ConfigError` listing every invalid field."""
    errors: list[str] = []
    m = config.molecule
    _number(errors, "molecule.revival_period_ps", m.revival_period_ps, lo=0, lo_open=True)
    _number(errors, "molecule.j_max", m.j_max, lo=4, integer=True)
    _number(errors, "molecule.spin_weight_even", m.spin_weight_even, lo=0)
    _number(errors, "molecule.spin_weight_odd", m.spin_weight_odd, lo=0)
    if m.delta_alpha is not None:
        _number(errors, "molecule.delta_alpha", m.delta_alpha, lo=0, lo_open=True)
    else:
        for name in ("anchor_intensity_w_cm2", "anchor_fwhm_fs", "anchor_kick_strength"):
            _number(errors, f"molecule.{name}", getattr(m, name), lo=0, lo_open=True)
    e = config.ensemble
    _number(errors, "ensemble.temperature_k", e.temperature_k, lo=0)
    _number(errors, "ensemble.mass_cutoff", e.mass_cutoff, lo=0.99, hi=1, hi_open=True)

    if not config.trains:
        errors.append("trains: at least one train block is required")
    names = [t.name for t in config.trains]
    if len(set(names)) != len(names):
        errors.append("trains: train names must be unique")
    for i, t in enumerate(config.trains):
        p = f"trains[{i}]"
        if t.recipe not in RECIPES:
            errors.append(f"{p}.recipe: must be one of {', '.join(RECIPES)}, got {t.recipe!r}")
        _number(errors, f"{p}.n_pulses", t.n_pulses, lo=1, hi=MAX_PULSES, integer=True)
        _number(errors, f"{p}.kick_strength", t.kick_strength, lo=0)
        _number(errors, f"{p}.rel_sigma", t.rel_sigma, lo=0, hi=1, hi_open=True)
        _number(errors, f"{p}.fwhm_fs", t.fwhm_fs, lo=0)
        _number(errors, f"{p}.n_realizations", t.n_realizations, lo=1, integer=True)
        _number(errors, f"{p}.base_seed", t.base_seed, lo=0, hi=2**64 - 1, integer=True)
        if t.recipe == "periodic" and t.rel_sigma not in (0, 0.0):
            errors.append(f"{p}.rel_sigma: periodic trains take no noise")
        if t.period_ps is None and t.period_trev is None:
            errors.append(f"{p}: one of period_ps or period_trev is required")
        elif t.period_ps is not None:
            values = t.period_ps if isinstance(t.period_ps, list) else [t.period_ps]
            for k, v in enumerate(values):
                _number(errors, f"{p}.period_ps[{k}]", v, lo=0, lo_open=True)
        elif t.period_trev != "off_resonant":
            values = t.period_trev if isinstance(t.period_trev, list) else [t.period_trev]
            for k, v in enumerate(values):
                _number(errors, f"{p}.period_trev[{k}]", v, lo=0, lo_open=True)
    if errors:
        raise ConfigError(errors)


def from_dict(data: dict) -> ScenarioConfig:
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError([f"config: expected a mapping, got {type(data).__name__}"])
    allowed = {"name", "molecule", "ensemble", "train", "trains", "output",
               "resolved", "schema_version"}
    for key in data:
        if key not in allowed:
            errors.append(f"{key}: unknown section")
    if "train" in data and "trains" in data:
        errors.append("train/trains: give one or the other")
    raw_trains = data.get("trains")
    if raw_trains is None:
        raw_trains = [data["train"]] if "train" in data else None
    if raw_trains is not None and not isinstance(raw_trains, list):
        errors.append("trains: expected a list of train blocks")
        raw_trains = None
    trains = ([_build(TrainConfig, t, f"trains[{i}]", errors) for i, t in enumerate(raw_trains)]
              if raw_trains is not None else [TrainConfig()])
    config = ScenarioConfig(
        name=str(data.get("name", "custom")),
        molecule=_build(MoleculeConfig, data.get("molecule"), "molecule", errors),
        ensemble=_build(EnsembleConfig, data.get("ensemble"), "ensemble", errors),
        trains=trains,
        output=_build(OutputConfig, data.get("output"), "output", errors),
    )
    try:
        validate(config)
    except ConfigError as exc:
        errors.extend(exc.errors)
    if errors:
        raise ConfigError(errors)
    return config


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a YAML (or JSON) config file."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: not valid YAML/JSON ({exc})"]) from exc
    return from_dict(data or {})


def resolve(config: ScenarioConfig) -> dict:
    """Config as a plain dict with every derived value made explicit."""
    validate(config)
    out = config.to_dict()
    out["molecule"]["delta_alpha"] = config.delta_alpha()
    t_rev = config.molecule.revival_period_ps
    for block, t in zip(out["trains"], config.trains):
        block["period_ps"] = t.realization_periods(t_rev)
        block["period_trev"] = None
    out["resolved"] = {
        "seeds": {t.name: t.seeds() if t.recipe != "periodic" else [] for t in config.trains},
    }
    return out


def dump_yaml(data: dict) -> str:
    return yaml.safe_dump(data, sort_keys=False)


def dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=False)
