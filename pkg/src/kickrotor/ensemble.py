"""Thermal ensembles and ensemble-averaged propagation.

Every member |J', M'> of the initial thermal mixture is propagated
independently through the same pulse train.  Members are grouped by |M'|
(the cos^2 coupling depends on M'^2 only) and the distinct J' of a group are
propagated together as the columns of one matrix.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .kicks import (
    TAIL_TOLERANCE,
    BasisTruncationError,
    PulseTrain,
    _tail_norm,
    propagate_block,
    suggest_j_max,
)
from .rotor import RotorSpec, WavePacket, rotational_energy

#: k_B/h in THz per kelvin.
KB_THZ_PER_K = constants.k / constants.h * 1e-12


@dataclass(frozen=True)
class ThermalEnsemble:
    """Initial states (J', M') with statistical weights summing to one.

    Members are kept in canonical (J', M') order so that every reduction over
    them happens in the same order regardless of how they were supplied.
    """

    temperature: float
    initial_j: np.ndarray
    initial_m: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.initial_j, dtype=int)
        m = np.asarray(self.initial_m, dtype=int)
        w = np.asarray(self.weights, dtype=float)
        if not (j.shape == m.shape == w.shape) or j.size == 0:
            raise ValueError("ensemble needs equal-length, non-empty member arrays")
        if np.any(w <= 0):
            raise ValueError("member weights must be positive")
        if np.any(np.abs(m) > j):
            raise ValueError("each member needs |M'| <= J'")
        order = np.lexsort((m, j))
        w = w[order] / np.sum(w)
        for name, arr in (("initial_j", j[order]), ("initial_m", m[order]), ("weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.weights.size

    @property
    def members(self) -> list[tuple[int, int, float]]:
        return list(zip(self.initial_j.tolist(), self.initial_m.tolist(), self.weights.tolist()))

    @classmethod
    def single(cls, j: int = 0, m: int = 0) -> "ThermalEnsemble":
        return cls(0.0, np.array([j]), np.array([m]), np.array([1.0]))


def boltzmann_weights(spec: RotorSpec, temperature: float) -> np.ndarray:
    """Normalized thermal weight of every J in the basis (all M' together)."""
    g = spec.spin_weights()
    j = spec.j
    if temperature == 0:
        w = np.zeros(j.size)
        w[np.nonzero(g > 0)[0][0]] = 1.0
        return w
    energy = rotational_energy(spec, j)
    with np.errstate(divide="ignore"):
        log_w = np.log(g) + np.log(2 * j + 1) - energy / (KB_THZ_PER_K * temperature)
    log_w -= np.max(log_w)
    w = np.exp(log_w)
    return w / np.sum(w)


def boltzmann_ensemble(spec: RotorSpec, temperature: float,
                       mass_cutoff: float = 0.999) -> ThermalEnsemble:
    """Smallest set of J' levels holding ``mass_cutoff`` of the thermal population.

    Every M' of an included J' is present with equal weight.
    """
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if not 0.99 <= mass_cutoff < 1:
        raise ValueError(f"mass_cutoff must lie in [0.99, 1), got {mass_cutoff}")
    w = boltzmann_weights(spec, temperature)
    order = np.argsort(-w, kind="stable")
    cumulative = np.cumsum(w[order])
    count = int(np.searchsorted(cumulative, mass_cutoff * cumulative[-1])) + 1
    levels = order[: min(count, np.count_nonzero(w))]

    js, ms, ws = [], [], []
    for j in levels:
        for m in range(-j, j + 1):
            js.append(j)
            ms.append(m)
            ws.append(w[j] / (2 * j + 1))
    return ThermalEnsemble(temperature, np.array(js), np.array(ms), np.array(ws))


@dataclass
class EnsembleResult:
    """Snapshots of every ensemble member after each kick.

    ``amplitudes[k, i, J]`` is c_J of member ``i`` after kick ``k``; ``k = 0``
    is the initial state.  After :meth:`compact` only the weighted
    populations and coherences are kept.
    """

    spec: RotorSpec
    ensemble: ThermalEnsemble
    train: PulseTrain
    amplitudes: np.ndarray | None = field(repr=False)
    tail_norm: float = 0.0
    _populations: np.ndarray | None = field(default=None, repr=False)
    _coherences: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_kicks(self) -> int:
        return len(self.train)

    def compact(self) -> "EnsembleResult":
        """Reduce to weighted observables and drop the member amplitudes."""
        self.weighted_populations()
        self.weighted_coherences()
        self.amplitudes = None
        return self

    def _check_kick(self, at_kick):
        if not 0 <= at_kick <= self.n_kicks:
            raise IndexError(f"kick {at_kick} not recorded (0..{self.n_kicks})")

    def packet(self, member: int, at_kick: int) -> WavePacket:
        self._check_kick(at_kick)
        if self.amplitudes is None:
            raise ValueError("amplitudes were dropped by compact()")
        return WavePacket(int(self.ensemble.initial_m[member]), int(self.ensemble.initial_j[member]),
                          self.amplitudes[at_kick, member])

    def weighted_populations(self) -> np.ndarray:
        """sum_members w |c_J|^2, shape (n_kicks+1, j_max+1)."""
        if self._populations is None:
            pops = np.abs(self.amplitudes) ** 2
            self._populations = np.einsum("i,kij->kj", self.ensemble.weights, pops)
        return self._populations

    def weighted_coherences(self) -> np.ndarray:
        """sum_members w |c_J|^2 |c_J+2|^2, shape (n_kicks+1, j_max-1)."""
        if self._coherences is None:
            pops = np.abs(self.amplitudes) ** 2
            self._coherences = np.einsum("i,kij->kj", self.ensemble.weights,
                                         pops[:, :, :-2] * pops[:, :, 2:])
        return self._coherences


def simulate_ensemble(spec: RotorSpec, ensemble: ThermalEnsemble, train: PulseTrain,
                      check_tail: bool = True) -> EnsembleResult:
    """Propagate every member of ``ensemble`` through ``train``."""
    if len(ensemble) == 0:
        raise ValueError("ensemble is empty")
    if np.any(ensemble.initial_j > spec.j_max):
        raise ValueError("ensemble contains J' above j_max")
    n_members = len(ensemble)
    out = np.empty((len(train) + 1, n_members, spec.j_max + 1), dtype=complex)
    abs_m = np.abs(ensemble.initial_m)
    worst_tail = 0.0
    for m in np.unique(abs_m):
        idx = np.nonzero(abs_m == m)[0]
        j_levels = np.unique(ensemble.initial_j[idx])
        start = np.zeros((spec.j_max + 1, j_levels.size), dtype=complex)
        start[j_levels, np.arange(j_levels.size)] = 1.0
        snaps = propagate_block(spec, int(m), start, train, check_tail=False)
        tails = _tail_norm(spec, snaps[-1])
        if check_tail and np.max(tails) > TAIL_TOLERANCE:
            bad = int(np.argmax(tails))
            raise BasisTruncationError(
                f"basis too small for member J'={j_levels[bad]}, |M'|={m}: tail norm "
                f"{tails[bad]:.2e} above J={spec.j_max - 5}; try j_max={suggest_j_max(spec, snaps[-1])}",
                tail_norm=float(tails[bad]),
                suggested_j_max=suggest_j_max(spec, snaps[-1]),
            )
        worst_tail = max(worst_tail, float(np.max(tails)))
        column = np.searchsorted(j_levels, ensemble.initial_j[idx])
        out[:, idx, :] = np.moveaxis(snaps[:, :, column], 1, 2)
    return EnsembleResult(spec, ensemble, train, out, worst_tail)


@dataclass
class EnsembleAverage:
    """Per-train results plus across-train means of the weighted observables.

    ``raman[k, J]`` and ``populations[k, J]`` are means over trains of the raw
    (un-normalized) Raman intensities and exact populations after kick ``k``.
    """

    results: list[EnsembleResult]
    raman: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)

    @property
    def spec(self) -> RotorSpec:
        return self.results[0].spec

    @property
    def n_kicks(self) -> int:
        return self.results[0].n_kicks


def simulate_many(spec: RotorSpec, ensemble: ThermalEnsemble, trains: list[PulseTrain],
                  threads: int = 1, check_tail: bool = True,
                  keep_amplitudes: bool = True) -> EnsembleAverage:
    """Run :func:`simulate_ensemble` for each train and average over trains.

    With ``keep_amplitudes=False`` each result is compacted as soon as it is
    computed, which keeps memory flat for many-realization runs.
    """
    trains = list(trains)
    if not trains:
        raise ValueError("need at least one train")
    if len({len(t) for t in trains}) != 1:
        raise ValueError("all trains must have the same number of pulses")

    def run(train):
        result = simulate_ensemble(spec, ensemble, train, check_tail=check_tail)
        return result if keep_amplitudes else result.compact()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, trains))
    else:
        results = [run(t) for t in trains]
    raman = np.mean(np.stack([r.weighted_coherences() for r in results]), axis=0)
    pops = np.mean(np.stack([r.weighted_populations() for r in results]), axis=0)
    return EnsembleAverage(results, raman, pops)
