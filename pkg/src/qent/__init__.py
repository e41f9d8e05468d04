"""Momentum entanglement of an atom and its spontaneously emitted photon.

A three-level atom with two near-parallel decay channels, driven by a
coupling field, develops a long-lived dressed mode whose small decay rate
sets the width of the joint atom-photon momentum amplitude.  The package
computes that spectrum, the amplitude, its Schmidt number and variance ratio,
the time-domain build-up, and the thermal decay of the correlation.
"""

from __future__ import annotations

from .errors import (
    ConvergenceError,
    DegenerateSpectrum,
    DomainError,
    GridTooCoarse,
    InfiniteEntanglement,
    InfiniteTimescale,
    NotConverged,
    NotSaturatedWarning,
    PoleOnGrid,
    QentError,
    SeedRequired,
    SliceUnderresolved,
    StepTooLarge,
    UnknownPreset,
    ZeroState,
)
from .physics import CONSTANTS, InitialWavepacket, ScenarioParams, thermal_occupation, validate
from .spectrum import build_matrix, eigendecompose, entanglement_time, spectrum_for, theta
from .wavefunction import GridConfig, amplitude_full, amplitude_peak, build_grid, term_masses
from .metrics import entanglement_report, r_analytic, schmidt_number, variances
from .dynamics import accumulate_emission, propagate_internal
from .disentangle import (
    HeatbathScenario,
    disentangling_time,
    entanglement_bound,
    kick_oracle,
    r_of_t,
)

__version__ = "0.1.0"
