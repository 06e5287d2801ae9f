"""Spectra of the quantum Rabi model: exact, rotating-wave and second-order."""

from .approx2 import (
    CubicFamily,
    Family,
    LevelKind,
    SecondOrderLevelLabel,
    det2nd_general,
    first_order_level,
    omega_m,
    resonant_cubic,
    second_order_energy,
    second_order_state,
    series_energy,
    zero_order_level,
)
from .core import (
    DecoupledModelError,
    EnergyLevel,
    ModelParams,
    NumericalError,
    Parity,
    ParityBlockState,
    QRMError,
    Spectrum,
    SpinFockState,
    build_lab_hamiltonian,
    build_parity_block,
    parity_expectation,
    parity_operator,
    rotate_to_lab,
)
from .cubic import CubicSolution, solve_cubic_real
from .emission import (
    InitialKind,
    PeakSet,
    decompose_odd,
    emission_peaks,
    heights_series,
    prepare_initial,
    splitting,
)
from .exact import (
    ConvergenceError,
    ConvergenceReport,
    SolverConfig,
    boundary_value,
    converge_spectrum,
    ed_oracle,
    eig_count_below,
    eigenstate_at,
    find_levels,
    recurrence_coefficients,
)
from .rwa import RwaDoublet, rwa_doublet, rwa_ground

__version__ = "0.1.0"
