"""Pulse trains and their action on rotational wave packets.

A kick of strength P acts on an M block as ``exp(+i P cos^2 theta)``.  The
block is real symmetric and splits into even-J and odd-J halves, so each
half is diagonalized once and reused for every kick strength.  Splitting by
parity also keeps the opposite-parity amplitudes exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import constants
from scipy.linalg import polar

from .rotor import RotorSpec, WavePacket, cos2_matrix, free_phases, rotational_energy

MAX_PULSES = 100_000

#: Tail width (in J) monitored for basis truncation.
TAIL_WIDTH = 5
TAIL_TOLERANCE = 1e-6

#: Intensity anchor: P = 3 at 2e13 W/cm^2 for 130 fs pulses.
ANCHOR_INTENSITY = 2e13
ANCHOR_FWHM_FS = 130.0
ANCHOR_KICK_STRENGTH = 3.0


class BasisTruncationError(RuntimeError):
    """Population reached the top of the J basis."""

    def __init__(self, message, tail_norm=None, suggested_j_max=None):
        super().__init__(message)
        self.tail_norm = tail_norm
        self.suggested_j_max = suggested_j_max


class RefinementError(RuntimeError):
    """Time stepping of a finite-duration pulse did not converge."""


@dataclass(frozen=True)
class Pulse:
    time: float
    kick_strength: float
    fwhm: float = 0.0

    def __post_init__(self):
        if self.kick_strength < 0:
            raise ValueError(f"kick_strength must be >= 0, got {self.kick_strength}")
        if self.fwhm < 0:
            raise ValueError(f"fwhm must be >= 0, got {self.fwhm}")


@dataclass(frozen=True)
class PulseTrain:
    """Ordered pulses plus the recipe and seed that generated them.

    ``recipe`` is one of ``"periodic"``, ``"timing_noise"``,
    ``"amplitude_noise"`` and ``params`` holds the builder arguments, so
    :meth:`regenerate` rebuilds the identical train.
    """

    pulses: tuple[Pulse, ...]
    recipe: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if len(self.pulses) > MAX_PULSES:
            raise ValueError(f"at most {MAX_PULSES} pulses are supported")
        t = self.times
        if np.any(np.diff(t) <= 0):
            raise ValueError("pulse times must be strictly increasing")

    def __len__(self):
        return len(self.pulses)

    @property
    def times(self) -> np.ndarray:
        return np.array([p.time for p in self.pulses])

    @property
    def strengths(self) -> np.ndarray:
        return np.array([p.kick_strength for p in self.pulses])

    @property
    def intervals(self) -> np.ndarray:
        return np.diff(self.times)

    def regenerate(self) -> "PulseTrain":
        builder = _BUILDERS[self.recipe]
        kwargs = dict(self.params)
        if self.recipe != "periodic":
            kwargs["seed"] = self.seed
        return builder(**kwargs)

    def describe(self) -> dict:
        return {
            "recipe": self.recipe,
            "params": dict(self.params),
            "seed": self.seed,
            "times_ps": self.times.tolist(),
            "kick_strengths": self.strengths.tolist(),
        }


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if n > MAX_PULSES:
        raise ValueError(f"n={n} exceeds the maximum of {MAX_PULSES} pulses")


def _from_intervals(intervals, strengths, fwhm, recipe, params, seed):
    times = np.concatenate([[0.0], np.cumsum(intervals)])
    pulses = tuple(Pulse(float(t), float(p), fwhm) for t, p in zip(times, strengths))
    return PulseTrain(pulses, recipe, params, seed)


def build_periodic_train(n: int, period: float, p: float, fwhm: float = 0.0) -> PulseTrain:
    """``n`` kicks of strength ``p`` at t_k = k * period."""
    _check_n(n)
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    if p < 0:
        raise ValueError(f"kick strength must be >= 0, got {p}")
    params = dict(n=n, period=period, p=p, fwhm=fwhm)
    return _from_intervals(np.full(n - 1, float(period)), np.full(n, float(p)), fwhm,
                           "periodic", params, None)


def _truncated_normal(rng, mean, sigma, size, lower):
    """Normal draws; anything <= lower is redrawn, never clipped."""
    out = rng.normal(mean, sigma, size)
    bad = out <= lower
    while np.any(bad):
        out[bad] = rng.normal(mean, sigma, int(bad.sum()))
        bad = out <= lower
    return out


def build_timing_noise_train(n: int, mean_period: float, rel_sigma: float, p: float,
                             seed: int, fwhm: float = 0.0) -> PulseTrain:
    """Kicks with independent normal intervals, redrawn below 0.05*mean_period."""
    _check_n(n)
    if not mean_period > 0:
        raise ValueError(f"mean_period must be positive, got {mean_period}")
    if not 0 <= rel_sigma < 1:
        raise ValueError(f"rel_sigma must lie in [0, 1), got {rel_sigma}")
    params = dict(n=n, mean_period=mean_period, rel_sigma=rel_sigma, p=p, fwhm=fwhm)
    if rel_sigma == 0:
        intervals = np.full(n - 1, float(mean_period))
    else:
        rng = np.random.default_rng(seed)
        intervals = _truncated_normal(rng, mean_period, rel_sigma * mean_period, n - 1,
                                      0.05 * mean_period)
    return _from_intervals(intervals, np.full(n, float(p)), fwhm, "timing_noise", params, seed)


def build_amplitude_noise_train(n: int, period: float, mean_p: float, rel_sigma: float,
                                seed: int, fwhm: float = 0.0) -> PulseTrain:
    """Periodic kicks whose strengths are normal(mean_p, rel_sigma*mean_p), redrawn if <= 0."""
    _check_n(n)
    if not period > 0:
        raise ValueError(f"period must be positive, got {period}")
    if not 0 <= rel_sigma < 1:
        raise ValueError(f"rel_sigma must lie in [0, 1), got {rel_sigma}")
    params = dict(n=n, period=period, mean_p=mean_p, rel_sigma=rel_sigma, fwhm=fwhm)
    if rel_sigma == 0 or mean_p == 0:
        strengths = np.full(n, float(mean_p))
    else:
        rng = np.random.default_rng(seed)
        strengths = _truncated_normal(rng, mean_p, rel_sigma * mean_p, n, 0.0)
    return _from_intervals(np.full(n - 1, float(period)), strengths, fwhm,
                           "amplitude_noise", params, seed)


_BUILDERS = {
    "periodic": build_periodic_train,
    "timing_noise": build_timing_noise_train,
    "amplitude_noise": build_amplitude_noise_train,
}


def off_resonant_periods(revival_period: float, per_interval: int = 10) -> np.ndarray:
    """Evenly spaced interior periods of (10/13, 5/6) and (7/8, 13/14) T_rev.

    Each interval is cut into ``per_interval`` equal cells and the cell
    midpoints are used, which keeps half a cell between every period and the
    resonant interval endpoints.
    """
    cells = (np.arange(per_interval) + 0.5) / per_interval
    grids = [lo + cells * (hi - lo) for lo, hi in ((10 / 13, 5 / 6), (7 / 8, 13 / 14))]
    return np.concatenate(grids) * revival_period


# --- kick operators -----------------------------------------------------------


@dataclass(frozen=True)
class KickOperator:
    """Unitary acting on J = |m|..j_max of one M block."""

    m: int
    unitary: np.ndarray = field(repr=False)

    @property
    def j_min(self) -> int:
        return abs(self.m)


@lru_cache(maxsize=None)
def _parity_eigensystems(j_max: int, m: int):
    """Eigen-decompositions of the even/odd-J halves of the cos^2 block.

    Returns a list of (row indices within the block, eigenvalues, vectors).
    """
    spec = RotorSpec(j_max=j_max)
    c = cos2_matrix(spec, m).entries
    out = []
    for start in (0, 1):
        idx = np.arange(start, c.shape[0], 2)
        if idx.size == 0:
            continue
        lam, vec = np.linalg.eigh(c[np.ix_(idx, idx)])
        lam.setflags(write=False)
        vec.setflags(write=False)
        out.append((idx, lam, vec))
    return out


def _block_size(spec, m):
    return spec.j_max - abs(m) + 1


def _kick_matrix(j_max: int, m: int, p: float) -> np.ndarray:
    n = j_max - abs(m) + 1
    u = np.zeros((n, n), dtype=complex)
    for idx, lam, vec in _parity_eigensystems(j_max, abs(m)):
        u[np.ix_(idx, idx)] = (vec * np.exp(1j * p * lam)) @ vec.T
    return u


def delta_kick_operator(spec: RotorSpec, m: int, p: float) -> KickOperator:
    """exp(i p cos^2 theta) on the M block."""
    if abs(m) > spec.j_max:
        raise ValueError(f"|m|={abs(m)} exceeds j_max={spec.j_max}")
    if p < 0:
        raise ValueError(f"kick strength must be >= 0, got {p}")
    if p == 0:
        return KickOperator(m, np.eye(_block_size(spec, m), dtype=complex))
    return KickOperator(m, _kick_matrix(spec.j_max, m, float(p)))


# --- finite-duration pulses ---------------------------------------------------

_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))
DEFAULT_DT = 0.5e-3  # ps
REFINE_TOL = 1e-8
MAX_HALVINGS = 5


@lru_cache(maxsize=256)
def _finite_pulse_matrix(j_max: int, revival_period: float, m: int, p: float,
                         fwhm: float, dt: float) -> np.ndarray:
    """Interaction-picture propagator of a Gaussian pulse centred at t = 0.

    Integrates over +-3 FWHM with a 4th-order (Yoshida) composition of
    Strang steps, then removes the free evolution of the window so that the
    result replaces a delta kick at the pulse centre.
    """
    spec = RotorSpec(revival_period=revival_period, j_max=j_max)
    j_min = abs(m)
    energy = rotational_energy(spec, spec.j)[j_min:]
    window = 3.0 * fwhm
    n_steps = int(math.ceil(2.0 * window / dt))
    h = 2.0 * window / n_steps
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))

    n = j_max - j_min + 1
    u = np.zeros((n, n), dtype=complex)
    for idx, lam, vec in _parity_eigensystems(j_max, j_min):
        e = energy[idx]
        sub = np.eye(idx.size, dtype=complex)
        t = -window
        for _ in range(n_steps):
            for w in _YOSHIDA:
                hs = w * h
                half = np.exp(-1j * np.pi * e * hs)
                tm = t + 0.5 * hs
                a = p * norm * math.exp(-tm * tm / (2.0 * sigma * sigma)) * hs
                sub = half[:, None] * sub
                sub = vec @ (np.exp(1j * a * lam)[:, None] * (vec.T @ sub))
                sub = half[:, None] * sub
                t += hs
        back = np.exp(2j * np.pi * e * window)
        # roundoff from ~1e4 substeps leaves ~1e-11 non-unitarity; take the polar factor
        sub = polar(sub)[0]
        u[np.ix_(idx, idx)] = back[:, None] * sub * back[None, :]
    u.setflags(write=False)
    return u


def finite_pulse_operator(spec: RotorSpec, m: int, p: float, fwhm: float,
                          probe: np.ndarray | None = None, dt: float = DEFAULT_DT,
                          tol: float = REFINE_TOL) -> KickOperator:
    """Converged propagator of a Gaussian pulse (intensity FWHM ``fwhm`` ps).

    The step is halved until the propagated ``probe`` (block amplitudes,
    one column per state; identity if omitted) changes by at most ``tol``.
    """
    if not fwhm > 0:
        raise ValueError("finite pulses need fwhm > 0; use delta_kick_operator")
    if p == 0:
        return KickOperator(m, np.eye(_block_size(spec, m), dtype=complex))
    args = (spec.j_max, spec.revival_period, abs(int(m)), float(p), float(fwhm))
    if probe is None:
        probe = np.eye(_block_size(spec, m))
    coarse = _finite_pulse_matrix(*args, dt) @ probe
    for _ in range(MAX_HALVINGS):
        dt /= 2
        fine_u = _finite_pulse_matrix(*args, dt)
        fine = fine_u @ probe
        change = np.max(np.abs(fine - coarse))
        if change <= tol:
            return KickOperator(m, fine_u)
        coarse = fine
    raise RefinementError(
        f"finite pulse (P={p}, fwhm={fwhm} ps, m={m}) not converged: change {change:.2e} "
        f"> {tol:.0e} at dt={dt:.2e} ps"
    )


def finite_duration_propagate(spec: RotorSpec, packet: WavePacket, pulse: Pulse,
                              dt: float = DEFAULT_DT) -> WavePacket:
    """Apply one finite-duration pulse, in place of a delta kick at its centre."""
    if not pulse.fwhm > 0:
        raise ValueError("pulse.fwhm must be positive")
    j_min = abs(packet.m)
    block = packet.amplitudes[j_min:]
    op = finite_pulse_operator(spec, packet.m, pulse.kick_strength, pulse.fwhm,
                               probe=block[:, None], dt=dt)
    out = packet.amplitudes.copy()
    out[j_min:] = op.unitary @ block
    return WavePacket(packet.m, packet.initial_j, out)


# --- train propagation --------------------------------------------------------


def _tail_norm(spec, amps):
    return np.sum(np.abs(amps[spec.j_max - TAIL_WIDTH + 1:]) ** 2, axis=0)


def propagate_block(spec: RotorSpec, m: int, amps: np.ndarray, train: PulseTrain,
                    check_tail: bool = True) -> np.ndarray:
    """Propagate several packets of the same M block through ``train``.

    ``amps`` has shape (j_max+1, n_states).  Returns snapshots of shape
    (len(train)+1, j_max+1, n_states); index 0 is the input state and index k
    the state immediately after kick k.
    """
    j_min = abs(m)
    state = np.array(amps, dtype=complex)
    if state.ndim == 1:
        state = state[:, None]
    snaps = np.empty((len(train) + 1,) + state.shape, dtype=complex)
    snaps[0] = state
    probe = state[j_min:].copy()
    intervals = train.intervals
    for k, pulse in enumerate(train.pulses):
        if pulse.fwhm > 0:
            op = finite_pulse_operator(spec, m, pulse.kick_strength, pulse.fwhm, probe=probe)
        else:
            op = delta_kick_operator(spec, m, pulse.kick_strength)
        state[j_min:] = op.unitary @ state[j_min:]
        snaps[k + 1] = state
        if k < len(intervals):
            state *= free_phases(spec, intervals[k])[:, None]
    if check_tail:
        tail = _tail_norm(spec, state)
        worst = float(np.max(tail))
        if worst > TAIL_TOLERANCE:
            raise BasisTruncationError(
                f"basis too small: tail norm {worst:.2e} above J={spec.j_max - TAIL_WIDTH} "
                f"(m={m}); increase j_max",
                tail_norm=worst,
                suggested_j_max=suggest_j_max(spec, state),
            )
    return snaps


def suggest_j_max(spec: RotorSpec, amps: np.ndarray) -> int:
    """A j_max with ample headroom given how far the population has spread."""
    pops = np.abs(amps) ** 2
    if pops.ndim > 1:
        pops = pops.max(axis=1)
    occupied = np.nonzero(pops > 1e-12)[0]
    top = int(occupied[-1]) if occupied.size else 0
    return int(max(2 * spec.j_max, top + 40))


def apply_train(spec: RotorSpec, packet: WavePacket, train: PulseTrain,
                record_after_each_kick: bool = True) -> list[WavePacket]:
    """Kick ``packet`` with every pulse of ``train``, evolving freely in between.

    Returns the state after each kick (k = 1..N), or only the final one if
    ``record_after_each_kick`` is false.
    """
    if len(train) == 0:
        raise ValueError("train must contain at least one pulse")
    snaps = propagate_block(spec, packet.m, packet.amplitudes, train)
    chosen = range(1, len(train) + 1) if record_after_each_kick else [len(train)]
    return [WavePacket(packet.m, packet.initial_j, snaps[k, :, 0]) for k in chosen]


# --- intensity <-> kick strength ---------------------------------------------


def _fluence_factor(peak_intensity, fwhm_fs):
    """Integral of a Gaussian intensity profile in SI (J/m^2)."""
    intensity_si = peak_intensity * 1e4  # W/cm^2 -> W/m^2
    return intensity_si * fwhm_fs * 1e-15 * math.sqrt(math.pi / (4.0 * math.log(2.0)))


def kick_strength_from_intensity(spec: RotorSpec, peak_intensity: float, fwhm: float) -> float:
    """P = delta_alpha/(4 hbar) * integral of E^2 dt for a Gaussian pulse.

    ``peak_intensity`` in W/cm^2, ``fwhm`` (intensity) in fs.  With
    I = c eps0 E^2 / 2 and delta_alpha = 4 pi eps0 * (polarizability volume),
    P = 2 pi alpha_vol F / (hbar c) where F is the pulse fluence.
    """
    if spec.delta_alpha is None:
        raise ValueError("spec.delta_alpha is not set; cannot convert intensity to kick strength")
    if peak_intensity < 0 or fwhm < 0:
        raise ValueError("peak_intensity and fwhm must be non-negative")
    fluence = _fluence_factor(peak_intensity, fwhm)
    return 2.0 * math.pi * spec.delta_alpha * fluence / (constants.hbar * constants.c)


def delta_alpha_from_anchor(peak_intensity: float = ANCHOR_INTENSITY,
                            fwhm: float = ANCHOR_FWHM_FS,
                            kick_strength: float = ANCHOR_KICK_STRENGTH) -> float:
    """Polarizability anisotropy volume (m^3) implied by an intensity/P pair."""
    fluence = _fluence_factor(peak_intensity, fwhm)
    return kick_strength * constants.hbar * constants.c / (2.0 * math.pi * fluence)
