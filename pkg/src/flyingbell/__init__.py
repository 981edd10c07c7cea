"""Bell-state generation between two trapped ions through a flying atom.

Dispersive exchange model, noisy flight channel, two-qubit entanglement
measures and teleportation bounds, plus a full cavity-model cross-check.
"""
from .dynamics import (
    ChannelSpec,
    IntegrationError,
    ProtocolResult,
    analytic_channel_output,
    evolve_unitary,
    integrate_master_equation,
    lindblad_superoperator,
    run_protocol,
    two_ion_channel_state,
)
from .linalg import DensityMatrix, SpaceLayout, StateVector, ValidationError, partial_trace
from .metrics import (
    BoundResult,
    MetricsReport,
    analytic_channel_metrics,
    concurrence,
    fef_bruteforce_oracle,
    fully_entangled_fraction,
    max_flight_time,
    metrics_report,
    teleportation_fidelity,
)
from .model import (
    EffectiveParams,
    FieldStateSpec,
    FullModelParams,
    TruncationError,
    bell_state,
    build_initial_state,
    effective_hamiltonian,
    full_hamiltonian,
)
from .validation import ValidationReport, compare_field_states, validate_effective_model

__version__ = "0.1.0"
