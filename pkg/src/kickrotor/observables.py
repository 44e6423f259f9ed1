"""Raman spectra, populations, energies and localization fits.

The Raman line at 2Bc(2J+3) measures the coherence between J and J+2, so
``I_J = sum_members w |c_J|^2 |c_J+2|^2``.  Populations are retrieved from it
as ``P_J = a_J sqrt(I_J)``; here ``a_J`` is a global constant times
``1/sqrt(g_J)``, which removes the even/odd nuclear-spin modulation (the
intensity of each progression is linear in its spin weight).  The retrieved
value is assigned to the lower state J of the pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleAverage, EnsembleResult
from .rotor import RotorSpec, raman_shift, rotational_energy

#: Highest J used in fits by default; the finite pulse duration caps the
#: excitation near J = 15.
FIT_CUTOFF_GUARD = 14
DEFAULT_FIT_RANGE = (4, 14)
#: Exponential fits with R^2 below this are flagged; a Gaussian profile
#: exp(-J^2/50) already scores 0.976 on [4, 14].
POOR_FIT_R2 = 0.98


class RetrievalError(ValueError):
    """Populations cannot be retrieved from an all-zero spectrum."""


class NotLocalizedError(ValueError):
    """ln P_J does not decrease with J over the fit range."""


@dataclass(frozen=True)
class RamanSpectrum:
    """Line intensities I_J for J = 0..j_max-2 (line J couples J and J+2)."""

    intensities: np.ndarray = field(repr=False)
    spin_weights: np.ndarray = field(repr=False)
    max_normalized: bool = False
    shifts: np.ndarray | None = field(default=None, repr=False)

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.intensities.size)

    def normalized(self) -> "RamanSpectrum":
        peak = np.max(self.intensities)
        if peak <= 0:
            raise RetrievalError("cannot normalize an all-zero spectrum")
        return RamanSpectrum(self.intensities / peak, self.spin_weights, True, self.shifts)


@dataclass(frozen=True)
class PopulationDistribution:
    populations: np.ndarray = field(repr=False)
    provenance: str = "exact"

    def __post_init__(self):
        if self.provenance not in ("exact", "retrieved"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.populations.size)

    def spin_corrected(self, spin_weights: np.ndarray) -> "PopulationDistribution":
        """Divide out g_J and renormalize."""
        p = self.populations / spin_weights[: self.populations.size]
        return PopulationDistribution(p / p.sum(), self.provenance)


@dataclass(frozen=True)
class LocalizationFit:
    xi: float
    fit_range: tuple[int, int]
    r_squared: float
    slope: float
    intercept: float

    @property
    def poor(self) -> bool:
        return self.r_squared < POOR_FIT_R2


@dataclass(frozen=True)
class ShapeClassification:
    shape: str  # "exponential", "gaussian" or "indeterminate"
    rss_exponential: float
    rss_gaussian: float
    r2_exponential: float
    r2_gaussian: float


def _raman_values(result, at_kick):
    if isinstance(result, EnsembleAverage):
        return result.spec, result.raman[at_kick]
    result._check_kick(at_kick)
    return result.spec, result.weighted_coherences()[at_kick]


def raman_spectrum(result: EnsembleResult | EnsembleAverage, at_kick: int,
                   normalize: bool = False) -> RamanSpectrum:
    """Thermally averaged Raman intensities after kick ``at_kick``.

    For an :class:`EnsembleAverage` the across-train mean is returned.
    """
    spec, values = _raman_values(result, at_kick)
    lines = np.arange(spec.j_max - 1)
    spectrum = RamanSpectrum(np.array(values), spec.spin_weights()[:-2], False,
                             raman_shift(spec, lines))
    if normalize:
        return spectrum.normalized()
    return spectrum


def retrieve_populations(spectrum: RamanSpectrum) -> PopulationDistribution:
    """P_J proportional to sqrt(I_J / g_J), normalized to unit sum.

    The output covers J = 0..j_max with the two topmost entries zero.
    """
    intensities = np.asarray(spectrum.intensities, dtype=float)
    if not np.any(intensities > 0):
        raise RetrievalError("spectrum has no positive line; retrieval undefined")
    amp = np.sqrt(np.clip(intensities, 0.0, None) / spectrum.spin_weights)
    p = np.zeros(intensities.size + 2)
    p[: intensities.size] = amp / amp.sum()
    return PopulationDistribution(p, "retrieved")


def exact_populations(result: EnsembleResult | EnsembleAverage,
                      at_kick: int) -> PopulationDistribution:
    """Thermally averaged populations sum_members w |c_J|^2."""
    if isinstance(result, EnsembleAverage):
        p = result.populations[at_kick]
    else:
        result._check_kick(at_kick)
        p = result.weighted_populations()[at_kick]
    return PopulationDistribution(p / p.sum(), "exact")


def rotational_energy_total(dist: PopulationDistribution, spec: RotorSpec) -> float:
    """sum_J (E_J/h) P_J in THz."""
    p = dist.populations
    return float(np.dot(rotational_energy(spec, np.arange(p.size)), p))


def _fit_points(dist, j_lo, j_hi, guard):
    if j_hi > guard:
        raise ValueError(f"j_hi={j_hi} is above the fit cutoff guard J={guard}")
    if j_lo >= j_hi:
        raise ValueError("need j_lo < j_hi")
    j = np.arange(j_lo, j_hi + 1)
    p = dist.populations[j_lo: j_hi + 1]
    keep = p > 0
    if np.count_nonzero(keep) < 4:
        raise ValueError("fewer than 4 positive populations in the fit range")
    return j[keep].astype(float), np.log(p[keep])


def _linear_fit(x, y, weights=None):
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    coef = np.polynomial.polynomial.polyfit(x, y, 1, w=np.sqrt(w))
    resid = y - (coef[0] + coef[1] * x)
    rss = float(np.sum(w * resid ** 2))
    ybar = np.sum(w * y) / np.sum(w)
    tss = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return coef[0], coef[1], rss, r2


def fit_localization_length(dist: PopulationDistribution, j_lo: int = DEFAULT_FIT_RANGE[0],
                            j_hi: int = DEFAULT_FIT_RANGE[1], weights=None,
                            guard: int = FIT_CUTOFF_GUARD) -> LocalizationFit:
    """Least-squares fit of ln P_J = a - J/xi over [j_lo, j_hi].

    ``weights`` (one per J in range) default to uniform.  Raises
    :class:`NotLocalizedError` when the slope is not negative.
    """
    x, y = _fit_points(dist, j_lo, j_hi, guard)
    if weights is not None:
        weights = np.asarray(weights)[np.isin(np.arange(j_lo, j_hi + 1), x)]
    a, b, _, r2 = _linear_fit(x, y, weights)
    if b >= 0:
        raise NotLocalizedError(f"ln P_J has slope {b:.3g} >= 0 over J in [{j_lo}, {j_hi}]")
    return LocalizationFit(-1.0 / b, (j_lo, j_hi), r2, b, a)


def _parity_fit(x, odd, y):
    design = np.column_stack([np.ones_like(x), odd, x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rss = float(np.sum((y - design @ coef) ** 2))
    tss = float(np.sum((y - y.mean()) ** 2))
    return coef[2], rss, (1.0 - rss / tss if tss > 0 else 1.0)


def classify_shape(dist: PopulationDistribution, j_lo: int = DEFAULT_FIT_RANGE[0],
                   j_hi: int = DEFAULT_FIT_RANGE[1], margin: float = 1.5,
                   guard: int = FIT_CUTOFF_GUARD) -> ShapeClassification:
    """Exponential (ln P linear in J) versus Gaussian (ln P linear in J^2).

    Both models carry a separate offset for odd J, so a residual even/odd
    staggering does not masquerade as curvature.  The winner's log-scale
    residual sum must beat the other's by ``margin``; otherwise the shape is
    indeterminate.
    """
    x, y = _fit_points(dist, j_lo, j_hi, guard)
    odd = (x.astype(int) % 2).astype(float)
    b_exp, rss_exp, r2_exp = _parity_fit(x, odd, y)
    b_gau, rss_gau, r2_gau = _parity_fit(x * x, odd, y)
    shape = "indeterminate"
    if b_exp < 0 and rss_exp * margin < rss_gau:
        shape = "exponential"
    elif b_gau < 0 and rss_gau * margin < rss_exp:
        shape = "gaussian"
    return ShapeClassification(shape, rss_exp, rss_gau, r2_exp, r2_gau)


@dataclass(frozen=True)
class EnergyCurve:
    """Rotational energy (THz) versus kick number; ``spread`` is the std over trains."""

    kicks: np.ndarray
    mean: np.ndarray
    spread: np.ndarray
    per_train: np.ndarray = field(repr=False)


def energy_vs_kick(results) -> EnergyCurve:
    """E(N) = sum_J E_J P_J(N) for one result, a list of results, or an average."""
    if isinstance(results, EnsembleAverage):
        results = results.results
    elif isinstance(results, EnsembleResult):
        results = [results]
    spec = results[0].spec
    energy = rotational_energy(spec, spec.j)
    per_train = np.stack([r.weighted_populations() @ energy for r in results])
    kicks = np.arange(per_train.shape[1])
    return EnergyCurve(kicks, per_train.mean(axis=0), per_train.std(axis=0), per_train)
