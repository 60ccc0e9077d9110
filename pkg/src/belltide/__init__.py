"""belltide: exact nonlocality analysis of teleportation and constrained
remote state preparation over partially entangled qubit pairs."""

from .correlators import (
    CHSH_KINDS,
    I3322_KINDS,
    RSP_BELL_CHSH,
    RSP_BELL_I3322,
    RSP_VN_CHSH,
    RSP_VN_I3322,
    SCENARIO_KINDS,
    TELE_CHSH,
    TELE_I3322,
    TSIRELSON,
    CorrelatorResult,
    Scenario,
    chsh_rsp_bell,
    chsh_rsp_vn,
    chsh_teleport,
    direction,
    i3322_rsp_bell,
    i3322_rsp_vn,
    i3322_teleport,
    joint_prob_minus_minus,
    observable_a1,
    observable_a2,
)
from .optimizer import (
    NoCrossingError,
    OptimizerConfig,
    SweepResult,
    find_crossing,
    maximize,
    sweep,
)
from .protocols import (
    AncillaState,
    Branch,
    ProtocolRun,
    bloch_sphere_grid,
    paired_probabilities,
    resource_state,
    run_rsp_bell,
    run_rsp_vn,
    run_teleport,
    stage_rsp_bell,
    stage_rsp_vn,
    target_state,
    teleport_fidelity_closed,
    teleport_fidelity_numeric,
    transfer_fidelity,
)
from .qcore import (
    DensityMatrix,
    MeasurementBranch,
    Observable,
    StateVector,
    apply_unitary,
    bell_projectors,
    bell_states,
    cnot_ancilla_target,
    expectation,
    fidelity_pure,
    hadamard,
    partial_project,
    partial_trace,
    pauli_direction,
    phase_gate,
    projective_measure,
    state_fidelity,
    tensor,
)

__version__ = "0.1.0"
