"""Edge-qubit memories in disordered cluster spin chains.

The package simulates a spin chain whose boundary sites host logical qubits,
reconstructs the effective quantum channel acting on those qubits over time,
and aggregates classical/quantum information-retention statistics over
disorder ensembles.
"""

__version__ = "0.1.0"

from edgemem.paulis import (
    PauliString,
    StateVector,
    WeightedPauliSum,
    apply_pauli,
    apply_sum,
    expectation,
    inner,
)
from edgemem.model import (
    DisorderRealization,
    EdgeOperatorSet,
    LogicalPrep,
    ModelParams,
    build_hamiltonian,
    chain_hamiltonian,
    check_edge_commutation,
    check_time_reversal,
    edge_operators,
    prepare_state,
    sample_disorder,
)
from edgemem.evolution import (
    IntegrationError,
    IntegratorConfig,
    SamplingSchedule,
    TimeSeries,
    evolve_and_sample,
    step,
)
from edgemem.tomography import (
    ChannelMatrix,
    ChoiState,
    EdgeState,
    assemble_channel,
    channel_to_choi,
    input_preparations,
    reconstruct_edge_state,
    run_input_set,
    validate_cptp,
)
from edgemem.infometrics import (
    DirectedEncoding,
    RecoveryStats,
    classical_capacity_lower,
    coherent_information,
    directed_encodings,
    directed_integrity,
    directed_integrity_from_outputs,
    distinguish_probability,
    recovery_fraction,
    trace_distance,
    von_neumann_entropy,
)
from edgemem.ensemble import (
    ExperimentConfig,
    analyze,
    run_realization,
    run_sweep,
    run_validation_suite,
)
