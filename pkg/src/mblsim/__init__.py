"""Localization diagnostics for disordered quantum spin chains.

Builds disordered XY and Ising chains, evolves local observables exactly,
and measures commutator decay, transmission times, local integrals of
motion, and propagation bounds on contracted lattices.
"""

__version__ = "0.1.0"

from ._kernels import backend
from .chains import (
    Chain,
    LocalOperator,
    commutator,
    conditional_expectation,
    embed,
    operator_norm,
)
from .dynamics import (
    CommutatorTrace,
    EigenSystem,
    TransmissionTimeResult,
    commutator_trace,
    eigendecompose,
    evolution_unitary,
    heisenberg_evolve,
    interaction_picture_estimator,
    pauli_commutator_estimator,
    quasi_locality_estimator,
    sup_over_time,
    transmission_time,
)
from .errors import (
    ConfigurationError,
    DomainError,
    MblsimError,
    NumericalError,
    ResolutionError,
    ResourceLimitError,
    UnsupportedDimensionError,
)
from .freefermion import (
    LocalizationKernel,
    OneBodyMatrix,
    build_M,
    kernel_rows,
    kernel_to_csv,
    localization_kernel,
    propagator,
    xy_manybody_surrogate_bound,
)
from .harness import (
    ExperimentConfig,
    GapStatistics,
    LocalizationReport,
    ScalingParams,
    ScalingResult,
    build_realization,
    constraint_report,
    constraint_satisfied,
    load_config,
    realize_ising,
    realize_xy,
    run_gap_statistics,
    run_localization_experiment,
    run_transmission_scaling,
    validate_config,
)
from .lioms import (
    DephasedOperator,
    LiomFirstKind,
    build_lioms_second_kind,
    decay_envelope,
    dephase,
    finite_time_average,
    liom_first_kind_decompose,
    phi_of,
    quasi_locality_profile,
    reconstruct_diagonal,
    unitary_quasilocality_profile,
    verify_liom_bound,
)
from .lrbounds import (
    ContractedLattice,
    FFunction,
    contract,
    contracted_interaction,
    f_constants,
    integral_I,
    integrand_value,
    interaction_picture_terms,
    lr_bound_value,
    pair_interaction_norm,
    static_bound_trace,
    static_interaction_strength,
)
from .models import (
    DisorderSpec,
    Interaction,
    IsingParams,
    SparsePerturbation,
    XYParams,
    apply_sparse_perturbation,
    build_ising_hamiltonian,
    build_xy_hamiltonian,
    longest_zero_run,
    make_sparse_perturbation,
    sample_sequence,
    substream_id,
)
