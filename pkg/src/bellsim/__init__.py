"""Exact simulation of Bell states, dense coding and teleportation, with a no-signaling auditor."""

from .gates import GATE_NAMES, GateOperator, apply, apply_sequence, standard_gate, tensor_op
from .measurement import MeasurementRecord, RandomSource, measure, outcome_distribution, project
from .nosignal import (
    AuditReport,
    AuditScenario,
    bob_reduced,
    distinguishability_game,
    mode_change_scenario,
    run_audit,
)
from .protocols import (
    ProtocolTranscript,
    bell_state,
    correction_for,
    dense_code,
    dense_decode,
    dense_encode,
    teleport,
    teleport_mixed,
)
from .statecore import (
    DensityMatrix,
    Ensemble,
    InvariantViolation,
    PureState,
    ensemble_density,
    fidelity,
    partial_trace,
    qubit,
    tensor,
    to_density,
    trace_distance,
)

__version__ = "0.1.0"
