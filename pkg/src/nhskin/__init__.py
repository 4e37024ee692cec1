"""Simulation of a lossy resonator chain with dissipative intracell coupling.

Spectra and skin localization, point-gap winding, time-domain
unidirectionality, steady-state scattering and transmission optimization.
"""

__version__ = "0.1.0"

from .errors import (
    BasePointError,
    ConfigError,
    ConvergenceError,
    IllConditionedError,
    NHSkinError,
    NotReducibleError,
    NumericalError,
)
from .model import (
    BlochMatrix,
    Boundary,
    ChainParams,
    ModeIndex,
    Sublattice,
    build_bloch,
    build_real_space,
    build_ssh_equivalent,
    check_anti_pt,
    dissipation_matrix,
    unitary_transform,
)
from .spectral import (
    Localization,
    SpectrumResult,
    WindingResult,
    diagonalize,
    localization_summary,
    pbc_locus,
    sweep_delta,
    winding_number,
)
from .dynamics import Trajectory, dynamical_matrix, evolve, launch_state, snapshot
from .scattering import (
    BWD,
    FWD,
    TransmissionReport,
    nonreciprocity_ratio,
    scattering_matrix,
    sweep_transmission,
    transmission,
)
from .optimize import OptimumRecord, optimize_forward, plateau_check, sweep_n
