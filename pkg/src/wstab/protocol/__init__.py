"""Protocol construction: jump operators, configurations, Hamiltonians."""

from wstab.protocol.hamiltonian import (
    FAMILIES,
    ConstraintReport,
    HamiltonianConstraintError,
    HamiltonianSpec,
    bilinear_solution_exists,
    build_hamiltonian,
    constraint_matrix,
    hamiltonian_dense,
    hamiltonian_matrix,
    require_valid,
    validate_hamiltonian,
)
from wstab.protocol.hypergraph import (
    BudgetExceeded,
    HypergraphConfig,
    canonical_form,
    enumerate_configs,
    is_connected,
    min_dissipator_count,
    minimal_connected,
    modular_family,
    standard_config,
)
from wstab.protocol.jumps import (
    WIDTH4_COEFFICIENTS,
    JumpOperator,
    JumpOperatorError,
    build_jump_operator,
    default_modular_coefficients,
    global_jump_coefficients,
    modular_jump_coefficients,
    normalize,
)
from wstab.protocol.spec import (
    DEFAULT_LAMBDA,
    PROTOCOL_FAMILIES,
    DecoherenceRates,
    ProtocolSpec,
    build_protocol,
    dissipators_for_config,
    family_dissipators,
    parse_family,
    resource_report,
    two_dissipator_example,
)
