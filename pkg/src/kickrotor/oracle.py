"""Slow, independent reference computations used to check the fast paths.

Nothing here reuses the closed-form 3-j matrix construction or the
eigendecomposition kick operator: matrix elements come from Gauss-Legendre
quadrature over normalized associated Legendre functions, and the kick
unitary from scipy's scaling-and-squaring ``expm``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.optimize import curve_fit

from .kicks import KickOperator
from .rotor import RotorSpec


@dataclass(frozen=True)
class QuadratureConfig:
    j_limit: int
    node_count: int | None = None

    def __post_init__(self):
        if self.node_count is None:
            object.__setattr__(self, "node_count", 2 * self.j_limit + 8)
        if self.node_count < 2 * self.j_limit + 8:
            raise ValueError(
                f"node_count={self.node_count} below 2*j_limit+8={2 * self.j_limit + 8}"
            )


def normalized_legendre(l_max: int, m: int, x: np.ndarray) -> np.ndarray:
    """P~_l^m(x) for l = m..l_max, normalized to unit norm on [-1, 1].

    Returns shape (len(x), l_max - m + 1).  Standard three-term recurrence
    in l with normalized coefficients (stable to high degree).
    """
    m = abs(m)
    x = np.asarray(x, dtype=float)
    out = np.zeros((x.size, l_max - m + 1))
    s = np.sqrt(1.0 - x * x)
    p = np.full(x.size, np.sqrt(0.5))
    for k in range(1, m + 1):
        p = -np.sqrt((2 * k + 1) / (2 * k)) * s * p
    out[:, 0] = p
    if l_max == m:
        return out
    out[:, 1] = x * np.sqrt(2 * m + 3) * p
    for i, l in enumerate(range(m + 2, l_max + 1), start=2):
        a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        out[:, i] = a * (x * out[:, i - 1] - b * out[:, i - 2])
    return out


@lru_cache(maxsize=None)
def _nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def quadrature_cos2_element(j1: int, j2: int, m: int, config: QuadratureConfig) -> float:
    """<j1 m| cos^2 theta |j2 m> by Gauss-Legendre quadrature in cos theta."""
    if not abs(m) <= min(j1, j2) <= config.j_limit or max(j1, j2) > config.j_limit:
        raise ValueError("need |m| <= min(j1, j2) and j1, j2 <= j_limit")
    x, w = _nodes(config.node_count)
    p = normalized_legendre(max(j1, j2), m, x)
    return float(np.sum(w * x * x * p[:, j1 - abs(m)] * p[:, j2 - abs(m)]))


def quadrature_cos2_block(m: int, j_max: int, config: QuadratureConfig | None = None) -> np.ndarray:
    """Full cos^2 block on J = |m|..j_max by quadrature (no sparsity assumed)."""
    config = config or QuadratureConfig(j_max)
    if config.j_limit < j_max:
        raise ValueError("config.j_limit must cover j_max")
    x, w = _nodes(config.node_count)
    p = normalized_legendre(j_max, m, x)
    return p.T @ ((w * x * x)[:, None] * p)


def dense_exponential_oracle(m: int, p: float, big_j_max: int) -> KickOperator:
    """exp(i p cos^2 theta) on an enlarged basis, via Pade scaling-and-squaring.

    Restrict to the production basis with :func:`restrict`.
    """
    block = quadrature_cos2_block(m, big_j_max)
    return KickOperator(m, expm(1j * p * block))


def restrict(op: KickOperator, j_max: int) -> np.ndarray:
    """Rows/columns J = |m|..j_max of an oracle operator."""
    n = j_max - abs(op.m) + 1
    return op.unitary[:n, :n]


# --- two-level Rabi calibration ----------------------------------------------


@dataclass(frozen=True)
class RabiTrace:
    kick_strength: float
    period: float
    kicks: np.ndarray
    pop_low: np.ndarray
    pop_high: np.ndarray
    frequency: float  # population oscillation, cycles per kick
    contrast: float  # peak-to-peak of pop_high


def _fit_frequency(y: np.ndarray) -> float:
    y = y - y.mean()
    if np.allclose(y, 0.0, atol=1e-14):
        return 0.0
    n_pad = 16 * y.size
    spectrum = np.abs(np.fft.rfft(y * np.hanning(y.size), n_pad))
    freqs = np.fft.rfftfreq(n_pad)
    f0 = freqs[1 + np.argmax(spectrum[1:])]
    k = np.arange(y.size, dtype=float)

    def model(k, a, b, c, f):
        return a * np.cos(2 * np.pi * f * k) + b * np.sin(2 * np.pi * f * k) + c

    try:
        popt, _ = curve_fit(model, k, y, p0=[np.std(y), 0.0, 0.0, f0], maxfev=20000)
        return float(abs(popt[3]))
    except RuntimeError:
        return float(f0)


def brute_force_two_level(spec: RotorSpec, p: float, period: float, n: int,
                          j_low: int = 2, m: int = 0) -> RabiTrace:
    """Kick |j_low, m> ``n`` times and follow |c_j_low|^2 and |c_j_low+2|^2.

    With ``period`` a multiple of the J -> J+2 beat period the pair is driven
    resonantly and the populations Rabi-oscillate; the oscillation frequency
    (cycles per kick) is extracted by an FFT estimate refined with a
    sinusoidal least-squares fit.
    """
    j_max = spec.j_max
    block = quadrature_cos2_block(m, j_max)
    kick = expm(1j * p * block)
    j = np.arange(abs(m), j_max + 1)
    phase = np.exp(-2j * np.pi * (0.5 / spec.revival_period) * j * (j + 1) * period)
    c = np.zeros(j.size, dtype=complex)
    c[j_low - abs(m)] = 1.0
    low, high = [], []
    for k in range(n):
        c = kick @ c
        low.append(abs(c[j_low - abs(m)]) ** 2)
        high.append(abs(c[j_low + 2 - abs(m)]) ** 2)
        c = phase * c
    low, high = np.array(low), np.array(high)
    freq = _fit_frequency(high)
    return RabiTrace(p, period, np.arange(1, n + 1), low, high, freq, float(np.ptp(high)))


def beat_period(spec: RotorSpec, j_low: int = 2) -> float:
    """1 / (E_{J+2} - E_J) in ps: the period of the J, J+2 coherence."""
    return spec.revival_period / (2 * j_low + 3)
