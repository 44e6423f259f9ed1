"""Scenario runs, parameter scans and figure presets.

``run_scenario`` simulates every train block of a config and returns the
averaged results together with tidy tables; with an output directory it also
writes them as CSV plus a JSON manifest and the resolved config.
"""

from __future__ import annotations

import copy
import csv
import datetime as _dt
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    EnsembleConfig,
    MoleculeConfig,
    OutputConfig,
    ScenarioConfig,
    TrainConfig,
    dump_json,
    dump_yaml,
    resolve,
    validate,
)
from .ensemble import EnsembleAverage, boltzmann_ensemble, simulate_many
from .kicks import (
    PulseTrain,
    build_amplitude_noise_train,
    build_periodic_train,
    build_timing_noise_train,
)
from .observables import (
    NotLocalizedError,
    classify_shape,
    energy_vs_kick,
    exact_populations,
    fit_localization_length,
    raman_spectrum,
    retrieve_populations,
)
from .oracle import beat_period, brute_force_two_level

SCHEMA_VERSION = 1

RAMAN_COLUMNS = ("train_id", "kick_number", "J", "raman_shift_THz", "intensity_raw",
                 "intensity_maxnorm")
POPULATION_COLUMNS = ("train_id", "kick_number", "J", "p_exact", "p_retrieved")
ENERGY_COLUMNS = ("recipe", "train_id", "kick_number", "energy_THzh")
FIT_COLUMNS = ("scenario", "kick_strength", "xi", "r_squared", "shape_class")
SCAN_COLUMNS = ("axis", "value", "train", "kick_number", "J", "p_exact", "p_retrieved",
                "energy_THzh")
CALIBRATION_COLUMNS = ("kick_strength", "period_ps", "kick_number", "pop_low", "pop_high")
CALIBRATION_FIT_COLUMNS = ("kick_strength", "period_ps", "frequency_per_kick", "contrast")


def build_trains(block: TrainConfig, revival_period: float) -> list[PulseTrain]:
    """The realizations of one train block."""
    fwhm = block.fwhm_fs * 1e-3
    periods = block.realization_periods(revival_period)
    seeds = block.seeds()
    if block.recipe == "periodic":
        return [build_periodic_train(block.n_pulses, t, block.kick_strength, fwhm)
                for t in periods]
    if block.recipe == "timing_noise":
        return [build_timing_noise_train(block.n_pulses, t, block.rel_sigma,
                                         block.kick_strength, s, fwhm)
                for t, s in zip(periods, seeds)]
    return [build_amplitude_noise_train(block.n_pulses, t, block.kick_strength,
                                        block.rel_sigma, s, fwhm)
            for t, s in zip(periods, seeds)]


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# kickrotor schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


@dataclass
class ScenarioOutput:
    config: ScenarioConfig
    arms: dict[str, EnsembleAverage]
    tables: dict[str, Table]
    manifest: dict


def _fit_rows(scenario, kick_strength, dist, spin_weights):
    rows = []
    for label, d in (("exact", dist[0].spin_corrected(spin_weights)), ("retrieved", dist[1])):
        try:
            shape = classify_shape(d).shape
        except ValueError:
            shape = "undetermined"
        try:
            fit = fit_localization_length(d)
            xi, r2 = fit.xi, fit.r_squared
        except NotLocalizedError:
            xi, r2, shape = float("inf"), float("nan"), "not_localized"
        except ValueError:
            xi, r2 = float("nan"), float("nan")
        rows.append((f"{scenario}:{label}", float(kick_strength), float(xi), float(r2), shape))
    return rows


def tabulate_arm(name: str, block: TrainConfig, avg: EnsembleAverage, tables: dict,
                 scenario: str, per_train: bool = True):
    """Append one arm's rows to the raman/populations/energy/fits tables."""
    spec = avg.spec
    n_lines = spec.j_max - 1
    shifts = raman_spectrum(avg, 0).shifts
    sources = [(f"{name}/mean", avg)]
    if per_train:
        sources += [(f"{name}/{i:03d}", r) for i, r in enumerate(avg.results)]
    for train_id, src in sources:
        for k in range(avg.n_kicks + 1):
            spectrum = raman_spectrum(src, k)
            raw = spectrum.intensities
            peak = raw.max()
            norm = raw / peak if peak > 0 else np.zeros_like(raw)
            exact = exact_populations(src, k).populations
            retrieved = (retrieve_populations(spectrum).populations if peak > 0
                         else np.full(exact.size, np.nan))
            for j in range(n_lines):
                tables["raman"].rows.append((train_id, k, j, shifts[j], raw[j], norm[j]))
            for j in range(spec.j_max + 1):
                tables["populations"].rows.append((train_id, k, j, exact[j], retrieved[j]))
    curve = energy_vs_kick(avg)
    for k in curve.kicks:
        tables["energy"].rows.append((block.recipe, f"{name}/mean", int(k), curve.mean[k]))
    for i in range(curve.per_train.shape[0]):
        for k in curve.kicks:
            tables["energy"].rows.append((block.recipe, f"{name}/{i:03d}", int(k),
                                          curve.per_train[i, k]))
    final = avg.n_kicks
    spectrum = raman_spectrum(avg, final)
    dists = (exact_populations(avg, final),
             retrieve_populations(spectrum) if spectrum.intensities.max() > 0 else None)
    if dists[1] is not None:
        tables["fits"].rows.extend(
            _fit_rows(f"{scenario}/{name}", block.kick_strength, dists, spec.spin_weights()))


def _empty_tables():
    return {
        "raman": Table(RAMAN_COLUMNS),
        "populations": Table(POPULATION_COLUMNS),
        "energy": Table(ENERGY_COLUMNS),
        "fits": Table(FIT_COLUMNS),
    }


def simulate_config(config: ScenarioConfig, threads: int = 1) -> dict[str, EnsembleAverage]:
    validate(config)
    spec = config.rotor_spec()
    ensemble = boltzmann_ensemble(spec, config.ensemble.temperature_k,
                                  config.ensemble.mass_cutoff)
    arms = {}
    for block in config.trains:
        trains = build_trains(block, spec.revival_period)
        arms[block.name] = simulate_many(spec, ensemble, trains, threads=threads,
                                         keep_amplitudes=False)
    return arms


def _manifest(config, arms, wall_time, threads, extra=None):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "software": {"name": "kickrotor", "version": __version__},
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "wall_time_s": wall_time,
        "threads": threads,
        "config": resolve(config),
        "seeds": {name: [r.train.seed for r in avg.results] for name, avg in arms.items()},
        "trains": {name: [r.train.describe() for r in avg.results] for name, avg in arms.items()},
        "truncation": {
            name: {"max_tail_norm": max(r.tail_norm for r in avg.results),
                   "j_max": avg.spec.j_max}
            for name, avg in arms.items()
        },
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_outputs(out_dir: str | Path, tables: dict[str, Table], manifest: dict,
                  resolved: dict, formats=("csv", "json")):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in formats:
        for name, table in tables.items():
            (out / f"{name}.csv").write_text(table.to_csv())
    if "json" in formats:
        (out / "manifest.json").write_text(dump_json(manifest))
    (out / "config.resolved.yaml").write_text(dump_yaml(resolved))


def run_scenario(config: ScenarioConfig, out_dir: str | Path | None = None,
                 threads: int = 1) -> ScenarioOutput:
    """Simulate every train block and build (and optionally write) all tables."""
    start = time.perf_counter()
    arms = simulate_config(config, threads)
    tables = _empty_tables()
    for block in config.trains:
        tabulate_arm(block.name, block, arms[block.name], tables, config.name,
                     config.output.per_train_tables)
    manifest = _manifest(config, arms, time.perf_counter() - start, threads)
    if out_dir is not None:
        write_outputs(out_dir, tables, manifest, resolve(config), config.output.formats)
    return ScenarioOutput(config, arms, tables, manifest)


SCAN_AXES = ("kick_strength", "period", "temperature", "n_pulses")


def _with_axis(config: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    cfg = copy.deepcopy(config)
    if axis == "kick_strength":
        for t in cfg.trains:
            t.kick_strength = float(value)
    elif axis == "period":
        for t in cfg.trains:
            t.period_ps, t.period_trev = None, float(value)
    elif axis == "temperature":
        cfg.ensemble.temperature_k = float(value)
    elif axis == "n_pulses":
        for t in cfg.trains:
            t.n_pulses = int(value)
    else:
        raise ValueError(f"unknown scan axis {axis!r}; choose from {', '.join(SCAN_AXES)}")
    return cfg


def scan(config: ScenarioConfig, axis: str, values, out_dir: str | Path | None = None,
         threads: int = 1) -> ScenarioOutput:
    """One scenario per axis value (seeds shared), collected into long tables.

    ``period`` values are in units of the revival period.
    """
    if axis not in SCAN_AXES:
        raise ValueError(f"unknown scan axis {axis!r}; choose from {', '.join(SCAN_AXES)}")
    start = time.perf_counter()
    configs = [_with_axis(config, axis, v) for v in values]
    for c in configs:
        validate(c)
    tables = {"scan": Table(SCAN_COLUMNS), "fits": Table(FIT_COLUMNS)}
    arms = {}
    for value, cfg in zip(values, configs):
        results = simulate_config(cfg, threads)
        for block in cfg.trains:
            avg = results[block.name]
            arms[f"{axis}={value}/{block.name}"] = avg
            curve = energy_vs_kick(avg)
            for k in range(avg.n_kicks + 1):
                exact = exact_populations(avg, k).populations
                spectrum = raman_spectrum(avg, k)
                retrieved = (retrieve_populations(spectrum).populations
                             if spectrum.intensities.max() > 0 else np.full(exact.size, np.nan))
                for j in range(exact.size):
                    tables["scan"].rows.append((axis, float(value), block.name, k, j, exact[j],
                                                retrieved[j], curve.mean[k]))
            final = avg.n_kicks
            spectrum = raman_spectrum(avg, final)
            if spectrum.intensities.max() > 0:
                tables["fits"].rows.extend(_fit_rows(
                    f"{config.name}/{axis}={value}/{block.name}", block.kick_strength,
                    (exact_populations(avg, final), retrieve_populations(spectrum)),
                    avg.spec.spin_weights()))
    manifest = _manifest(config, arms, time.perf_counter() - start, threads,
                         {"scan": {"axis": axis, "values": [float(v) for v in values]}})
    if out_dir is not None:
        write_outputs(out_dir, tables, manifest, resolve(config), config.output.formats)
    return ScenarioOutput(config, arms, tables, manifest)


# --- presets ------------------------------------------------------------------

PRESETS = ("fig2", "fig3", "fig4", "calibration", "resonance")


def _base(name, trains, j_max=60, per_train=True):
    return ScenarioConfig(
        name=name,
        molecule=MoleculeConfig(j_max=j_max),
        ensemble=EnsembleConfig(27.0, 0.999),
        trains=trains,
        output=OutputConfig(directory=f"out/{name}", per_train_tables=per_train),
    )


def _periodic(p=2.3, fwhm_fs=0.0, name="periodic"):
    return TrainConfig(name=name, recipe="periodic", n_pulses=24, kick_strength=p,
                       period_trev="off_resonant", fwhm_fs=fwhm_fs, n_realizations=20)


def _timing(p=2.3, n=20, name="timing_noise"):
    return TrainConfig(name=name, recipe="timing_noise", n_pulses=24, kick_strength=p,
                       period_trev=0.85, rel_sigma=0.33, n_realizations=n, base_seed=1)


def _amplitude(p=2.3, n=20, name="amplitude_noise"):
    return TrainConfig(name=name, recipe="amplitude_noise", n_pulses=24, kick_strength=p,
                       period_trev="off_resonant", rel_sigma=0.41, n_realizations=n,
                       base_seed=1)


FIG3_J_MAX = 80

#: Noise realizations in the fig4 preset.  At 20 the Monte Carlo error of
#: the ensemble-mean energy is comparable to the gap between noisy and
#: periodic energies, so more realizations are used.
FIG4_REALIZATIONS = 200


def preset_config(name: str) -> ScenarioConfig:
    """Config for one of the figure presets (calibration has no train config)."""
    if name == "fig2":
        return _base("fig2", [_periodic(), _timing()])
    if name == "fig3":
        # the noisy P = 3 inset spreads past J = 55
        return _base("fig3", [_periodic(), _timing()], j_max=FIG3_J_MAX)
    if name == "fig4":
        return _base("fig4", [_periodic(), _timing(n=FIG4_REALIZATIONS),
                              _amplitude(n=FIG4_REALIZATIONS)], per_train=False)
    if name == "resonance":
        block = TrainConfig(name="periodic", recipe="periodic", n_pulses=24, kick_strength=2.3,
                            period_trev=1.0, n_realizations=1)
        return _base("resonance", [block], j_max=160, per_train=False)
    if name == "calibration":
        return _base("calibration", [], j_max=30)
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


FIG3_KICK_STRENGTHS = (1.0, 2.0, 3.0)
RESONANCE_PERIODS = (0.90, 0.95, 0.98, 1.0, 1.02, 1.05, 1.10)
CALIBRATION_KICK_STRENGTHS = (0.2, 0.5, 1.0)
CALIBRATION_KICKS = 300


def run_calibration(config: ScenarioConfig | None = None, out_dir=None,
                    kick_strengths=CALIBRATION_KICK_STRENGTHS,
                    n_kicks: int = CALIBRATION_KICKS) -> ScenarioOutput:
    """Rabi traces of the J=2 <-> 4 pair for trains tuned to its beat period."""
    config = config or preset_config("calibration")
    start = time.perf_counter()
    spec = config.rotor_spec()
    period = beat_period(spec, 2)
    tables = {"calibration": Table(CALIBRATION_COLUMNS),
              "calibration_fits": Table(CALIBRATION_FIT_COLUMNS)}
    traces = []
    for p in kick_strengths:
        trace = brute_force_two_level(spec, p, period, n_kicks)
        traces.append(trace)
        for k, lo, hi in zip(trace.kicks, trace.pop_low, trace.pop_high):
            tables["calibration"].rows.append((p, period, int(k), lo, hi))
        tables["calibration_fits"].rows.append((p, period, trace.frequency, trace.contrast))
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "software": {"name": "kickrotor", "version": __version__},
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "wall_time_s": time.perf_counter() - start,
        "config": resolve(config) if config.trains else config.to_dict(),
        "calibration": {"period_ps": period, "kick_strengths": list(kick_strengths),
                        "n_kicks": n_kicks},
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, table in tables.items():
            (out / f"{name}.csv").write_text(table.to_csv())
        (out / "manifest.json").write_text(dump_json(manifest))
    out = ScenarioOutput(config, {}, tables, manifest)
    out.traces = traces
    return out


def run_preset(name: str, out_dir=None, threads: int = 1, seed: int | None = None,
               j_max: int | None = None) -> ScenarioOutput:
    """Run a figure preset.

    fig2 / fig4 run their train blocks directly; fig3 adds a kick-strength
    scan (P = 1, 2, 3); resonance scans the period across T_rev.
    """
    if name == "calibration":
        config = preset_config(name)
        if j_max is not None:
            config.molecule.j_max = j_max
        return run_calibration(config, out_dir)
    config = preset_config(name)
    if seed is not None:
        for t in config.trains:
            t.base_seed = seed
    if j_max is not None:
        config.molecule.j_max = j_max
    if name == "resonance":
        return scan(config, "period", RESONANCE_PERIODS, out_dir, threads)
    result = run_scenario(config, out_dir, threads)
    if name == "fig3":
        strength_scan = scan(config, "kick_strength", FIG3_KICK_STRENGTHS,
                             None if out_dir is None else Path(out_dir) / "kick_strength_scan",
                             threads)
        result.arms.update(strength_scan.arms)
        result.tables["scan"] = strength_scan.tables["scan"]
        result.tables["fits"].rows.extend(strength_scan.tables["fits"].rows)
        if out_dir is not None:
            (Path(out_dir) / "fits.csv").write_text(result.tables["fits"].to_csv())
    return result
