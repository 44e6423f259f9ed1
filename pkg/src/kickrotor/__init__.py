"""Laser-kicked molecular rotors: dynamical localization in angular momentum.

Modules
-------
rotor        rigid-rotor basis, energies, cos^2 theta matrix, free evolution
kicks        pulse trains, kick operators (delta and finite), propagation
ensemble     thermal ensembles and ensemble-averaged propagation
observables  Raman spectra, population retrieval, localization fits, energies
oracle       slow independent references (quadrature, expm, two-level Rabi)
config       scenario configuration files
scenarios    scenario runs, scans, figure presets and CSV/JSON output
"""

__version__ = "0.1.0"

from .rotor import (  # noqa: E402
    N2_REVIVAL_PERIOD,
    RotorSpec,
    WavePacket,
    cos2_matrix,
    free_phases,
    nitrogen,
    raman_shift,
    rotational_energy,
)
from .kicks import (  # noqa: E402
    BasisTruncationError,
    Pulse,
    PulseTrain,
    RefinementError,
    apply_train,
    build_amplitude_noise_train,
    build_periodic_train,
    build_timing_noise_train,
    delta_kick_operator,
    finite_pulse_operator,
    kick_strength_from_intensity,
    off_resonant_periods,
)
from .ensemble import (  # noqa: E402
    EnsembleAverage,
    EnsembleResult,
    ThermalEnsemble,
    boltzmann_ensemble,
    simulate_ensemble,
    simulate_many,
)
from .observables import (  # noqa: E402
    NotLocalizedError,
    PopulationDistribution,
    RamanSpectrum,
    RetrievalError,
    classify_shape,
    energy_vs_kick,
    exact_populations,
    fit_localization_length,
    raman_spectrum,
    retrieve_populations,
)
from .config import ConfigError, ScenarioConfig, load_config  # noqa: E402
from .scenarios import run_preset, run_scenario, scan  # noqa: E402
