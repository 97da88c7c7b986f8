"""Optimal and daemonic quantum work extraction under expected utility."""

from .quantum import (
    BipartiteState,
    DensityMatrix,
    Hamiltonian,
    MeasurementBasis,
    OPT_TOL,
    TOL,
    Unitary,
    conditional_state,
    dephase,
    eig_sorted,
    energy_dephase,
    partial_trace_ancilla,
    partial_trace_system,
    psd_order,
    random_bipartite,
    random_density,
    random_unitary,
    validate_bipartite,
    validate_density,
)
from .utility import (
    UtilityFunction,
    XYZMoments,
    cubic_from_xyz,
    exponential_utility,
    is_incoherent_utility,
    linear_utility,
    parse_utility,
    polynomial_utility,
    risk_aversion,
    xyz_moments,
)
from .quasiprob import (
    WorkQuasiprobability,
    expected_utility,
    mean_work,
    negativity,
    prefer,
    prefer_sets,
    work_quasiprob,
)
from .extraction import (
    OptimizerOptions,
    TildeState,
    UtilityOptimum,
    average_work,
    coherent_contribution,
    energy,
    ergotropy,
    inverse_tilde,
    is_passive,
    optimal_utility,
    optimal_utility_exponential,
    optimal_utility_numeric,
    optimal_utility_qubit,
    small_z_expansion,
    tilde_state,
)
from .daemonic import (
    DaemonicResult,
    MeasurementOptions,
    daemonic_value,
    gain_decomposition,
    gain_ergotropy,
    gain_utility,
    optimize_measurement,
)
from .correlations import (
    binary_entropy,
    binary_entropy_inverse,
    concurrence,
    is_classical_quantum,
    is_separable_2x2,
    quantum_discord,
)
from .zoo import (
    example_state,
    parse_state,
    random_xyz_constrained,
    random_zero_gain_state,
    werner,
    werner_gain_incoherent,
    werner_threshold,
    x_state,
    zero_gain_state,
)

__version__ = "0.1.0"
