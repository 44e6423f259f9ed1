"""Rigid-rotor basis, molecular constants and field-free evolution.

Units throughout the package: time in picoseconds, energies as E/h in THz,
so a free-evolution phase is 2*pi*(THz)*(ps).  The rotational constant is
never stored on its own; ``Bc`` is derived from the revival period through
``2*B*c = 1/T_rev``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

#: Revival period of 14N2, ps.
N2_REVIVAL_PERIOD = 8.38


@dataclass(frozen=True)
class RotorSpec:
    """Molecular constants and basis truncation.

    Parameters
    ----------
    revival_period : float
        T_rev in ps.
    delta_alpha : float or None
        Polarizability anisotropy as a polarizability volume in m^3.  Only
        needed to convert laser intensity into kick strength.
    spin_weight_even, spin_weight_odd : float
        Nuclear-spin statistical weights of the even and odd J progressions.
    j_max : int
        Highest J kept in the basis.
    """

    revival_period: float = N2_REVIVAL_PERIOD
    delta_alpha: float | None = None
    spin_weight_even: float = 2.0
    spin_weight_odd: float = 1.0
    j_max: int = 60

    def __post_init__(self):
        if not self.revival_period > 0:
            raise ValueError(f"revival_period must be positive, got {self.revival_period}")
        if int(self.j_max) != self.j_max or self.j_max < 4:
            raise ValueError(f"j_max must be an integer >= 4, got {self.j_max}")
        if self.spin_weight_even < 0 or self.spin_weight_odd < 0:
            raise ValueError("spin weights must be non-negative")
        if self.spin_weight_even + self.spin_weight_odd == 0:
            raise ValueError("at least one spin weight must be positive")
        if self.delta_alpha is not None and not self.delta_alpha > 0:
            raise ValueError(f"delta_alpha must be positive, got {self.delta_alpha}")

    @property
    def bc(self) -> float:
        """B*c in THz (half the inverse revival period)."""
        return 0.5 / self.revival_period

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.j_max + 1)

    def spin_weights(self) -> np.ndarray:
        """Spin-statistics weight g_J for every J in the basis."""
        g = np.full(self.j_max + 1, float(self.spin_weight_odd))
        g[::2] = self.spin_weight_even
        return g

    def replace(self, **changes) -> "RotorSpec":
        from dataclasses import replace

        return replace(self, **changes)


def nitrogen(j_max: int = 60, delta_alpha: float | None = None) -> RotorSpec:
    """14N2 with 2:1 even/odd spin statistics.

    If ``delta_alpha`` is not given, it is fixed by the intensity anchor
    (P = 3 at 2e13 W/cm^2 with 130 fs pulses), see
    :func:`kickrotor.kicks.delta_alpha_from_anchor`.
    """
    if delta_alpha is None:
        from .kicks import delta_alpha_from_anchor

        delta_alpha = delta_alpha_from_anchor()
    return RotorSpec(N2_REVIVAL_PERIOD, delta_alpha, 2.0, 1.0, j_max)


@dataclass
class WavePacket:
    """Amplitudes c_J (J = 0..j_max) of one M block.

    ``initial_j``/``initial_m`` tag the thermal state the packet started in;
    M is conserved so ``m == initial_m``.
    """

    m: int
    initial_j: int
    amplitudes: np.ndarray
    initial_m: int | None = None

    def __post_init__(self):
        if self.initial_m is None:
            self.initial_m = self.m
        if self.initial_m != self.m:
            raise ValueError("M is conserved: initial_m must equal m")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if np.any(self.amplitudes[: abs(self.m)] != 0):
            raise ValueError(f"amplitudes below J=|m|={abs(self.m)} must vanish")

    @classmethod
    def basis_state(cls, spec: RotorSpec, j: int, m: int = 0) -> "WavePacket":
        if not abs(m) <= j <= spec.j_max:
            raise ValueError(f"|J={j}, M={m}> is not in the basis (j_max={spec.j_max})")
        c = np.zeros(spec.j_max + 1, dtype=complex)
        c[j] = 1.0
        return cls(m, j, c)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.populations))


@dataclass(frozen=True)
class MBlockMatrix:
    """<J'M|cos^2 theta|JM> on J = |m|..j_max.

    Row/column ``i`` corresponds to ``J = j_min + i``.
    """

    m: int
    entries: np.ndarray = field(repr=False)

    @property
    def j_min(self) -> int:
        return abs(self.m)

    @property
    def j_values(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_min + self.entries.shape[0])


def _check_j(spec: RotorSpec, j, upper: int) -> np.ndarray:
    j_arr = np.asarray(j)
    if np.any(j_arr < 0) or np.any(j_arr > upper) or np.any(j_arr != np.round(j_arr)):
        raise ValueError(f"J must be an integer in [0, {upper}], got {j}")
    return j_arr.astype(np.int64)


def rotational_energy(spec: RotorSpec, j):
    """E_J/h = B*c*J(J+1) in THz.  Accepts scalars or arrays."""
    j_arr = _check_j(spec, j, spec.j_max)
    e = spec.bc * j_arr * (j_arr + 1)
    return float(e) if e.ndim == 0 else e


def raman_shift(spec: RotorSpec, j):
    """Frequency of the J -> J+2 Raman line, 2Bc(2J+3), in THz."""
    j_arr = _check_j(spec, j, spec.j_max - 2)
    # written as a difference so it matches rotational_energy bit for bit
    e = spec.bc * (j_arr + 2) * (j_arr + 3) - spec.bc * j_arr * (j_arr + 1)
    return float(e) if e.ndim == 0 else e


def threej_rank2(j: int, m: int, dj: int) -> float:
    """Wigner 3-j symbol (J+dJ 2 J; -M 0 M) for dJ in {0, 2}.

    Closed forms for the only rank-2 family that a linearly polarized
    two-photon coupling needs.
    """
    if abs(m) > j:
        return 0.0
    sign = -1.0 if (j - m) % 2 else 1.0
    if dj == 0:
        if j == 0:
            return 0.0
        den = (2 * j - 1) * (2 * j) * (2 * j + 1) * (2 * j + 2) * (2 * j + 3)
        return sign * 2.0 * (3 * m * m - j * (j + 1)) / np.sqrt(den)
    if dj == 2:
        num = 6.0 * (j + m + 1) * (j + m + 2) * (j - m + 1) * (j - m + 2)
        den = (2 * j + 1) * (2 * j + 2) * (2 * j + 3) * (2 * j + 4) * (2 * j + 5)
        return sign * np.sqrt(num / den)
    raise ValueError("only dJ = 0 or 2 is supported")


def _p2_element(j: int, m: int, dj: int) -> float:
    """<J+dJ, M| P2(cos theta) |J, M>."""
    jp = j + dj
    phase = -1.0 if m % 2 else 1.0
    return (
        phase
        * np.sqrt((2 * j + 1) * (2 * jp + 1))
        * threej_rank2(j, m, dj)
        * threej_rank2(j, 0, dj)
    )


@lru_cache(maxsize=None)
def _cos2_entries(j_max: int, m: int) -> np.ndarray:
    j_min = abs(m)
    n = j_max - j_min + 1
    a = np.zeros((n, n))
    for i in range(n):
        j = j_min + i
        a[i, i] = 1.0 / 3.0 + 2.0 / 3.0 * _p2_element(j, m, 0)
        if i + 2 < n:
            a[i, i + 2] = a[i + 2, i] = 2.0 / 3.0 * _p2_element(j, m, 2)
    a.setflags(write=False)
    return a


def cos2_matrix(spec: RotorSpec, m: int) -> MBlockMatrix:
    """cos^2 theta in the M block, pentadiagonal (couplings at dJ = 0, +-2).

    Uses cos^2 = 1/3 + (2/3) P2(cos theta) with rank-2 3-j symbols.
    """
    if abs(m) > spec.j_max:
        raise ValueError(f"|m|={abs(m)} exceeds j_max={spec.j_max}")
    return MBlockMatrix(int(m), _cos2_entries(spec.j_max, abs(int(m))))


def free_phases(spec: RotorSpec, tau: float) -> np.ndarray:
    """exp(-2 pi i E_J tau / h) for J = 0..j_max.

    The phase is reduced modulo 2 pi in units of the revival period, so
    ``tau == revival_period`` yields exactly 1 for every J.
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    j = spec.j
    x = tau / spec.revival_period
    # E_J tau = J(J+1) x / 2 cycles; keep J(J+1) integral and reduce mod 2
    turns = np.mod(j * (j + 1) * x, 2.0)
    return np.exp(-1j * np.pi * turns)
