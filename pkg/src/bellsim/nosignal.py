"""Auditor showing that Alice's local actions leave Bob's reduced state unchanged.

Conditioned on one of Alice's outcomes, Bob's qubit can be pure (the "mode
change"), yet the outcome-weighted average equals the state he had before
Alice did anything. Reports carry both, so the change and its invisibility
appear side by side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gates import GATE_NAMES, GateOperator, apply, standard_gate
from .measurement import outcome_distribution, project, random_unitary
from .protocols import bell_state
from .statecore import (
    DensityMatrix,
    PureState,
    _check_qubit_indices,
    mixture,
    partial_trace,
    tensor,
    to_density,
    trace_distance,
)


@dataclass(frozen=True, eq=False)
class AuditScenario:
    """Joint pure state split between Alice (``alice_qubits``) and Bob (the rest)."""

    joint_state: PureState
    alice_qubits: tuple[int, ...]
    alice_program: tuple[tuple[GateOperator, tuple[int, ...]], ...] = ()
    alice_measures: bool = False

    def __post_init__(self):
        n = self.joint_state.num_qubits
        alice = tuple(sorted(_check_qubit_indices(self.alice_qubits, n, "alice_qubits")))
        if not alice or len(alice) == n:
            raise ValueError("Alice and Bob must each hold at least one qubit")
        program = tuple((g, tuple(int(t) for t in targets)) for g, targets in self.alice_program)
        object.__setattr__(self, "alice_qubits", alice)
        object.__setattr__(self, "alice_program", program)

    @property
    def bob_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.joint_state.num_qubits) if q not in self.alice_qubits)


@dataclass(frozen=True, eq=False)
class OutcomeEntry:
    outcome: str
    probability: float
    rho_bob: DensityMatrix

    @property
    def purity(self) -> float:
        return self.rho_bob.purity()


@dataclass(frozen=True, eq=False)
class AuditReport:
    rho_before: DensityMatrix
    rho_after: DensityMatrix
    distance: float
    outcomes: list[OutcomeEntry] = field(default_factory=list)

    @property
    def purity_before(self) -> float:
        return self.rho_before.purity()

    @property
    def purity_after(self) -> float:
        return self.rho_after.purity()

    @property
    def signals(self) -> bool:
        return self.distance >= 1e-12


def bob_reduced(joint: PureState, bob_qubits: Iterable[int]) -> DensityMatrix:
    bob_qubits = list(bob_qubits)
    if not bob_qubits:
        raise ValueError("bob_reduced: Bob must hold at least one qubit")
    return partial_trace(to_density(joint), bob_qubits)


def check_local(sc: AuditScenario) -> None:
    for g, targets in sc.alice_program:
        foreign = sorted(set(targets) - set(sc.alice_qubits))
        if foreign:
            raise ValueError(f"{g.name} on {list(targets)} touches Bob's qubit(s) {foreign}; Alice's program must be local")


def run_audit(sc: AuditScenario) -> AuditReport:
    """Compare Bob's state before Alice acts with the outcome-averaged state after.

    When Alice measures, every one of her outcomes is enumerated exactly.
    """
    check_local(sc)
    bob = sc.bob_qubits
    rho_before = bob_reduced(sc.joint_state, bob)
    state = sc.joint_state
    for g, targets in sc.alice_program:
        state = apply(g, state, targets)
    if sc.alice_measures:
        entries = []
        for outcome, _ in outcome_distribution(state, sc.alice_qubits):
            prob, post = project(state, sc.alice_qubits, outcome)
            entries.append(OutcomeEntry(outcome, prob, bob_reduced(post, bob)))
        rho_after = mixture([e.probability for e in entries], [e.rho_bob for e in entries])
    else:
        rho_after = bob_reduced(state, bob)
        entries = [OutcomeEntry("", 1.0, rho_after)]
    return AuditReport(rho_before, rho_after, trace_distance(rho_before, rho_after), entries)


def distinguishability_game(first: AuditScenario, second: AuditScenario) -> float:
    """Bob's best one-shot chance of telling which scenario Alice ran."""
    if first.bob_qubits != second.bob_qubits:
        raise ValueError(f"scenarios give Bob different qubits: {first.bob_qubits} vs {second.bob_qubits}")
    if first.joint_state.dim != second.joint_state.dim or not first.joint_state.allclose(second.joint_state):
        raise ValueError("scenarios must start from the same joint state")
    r1 = run_audit(first)
    r2 = run_audit(second)
    return 0.5 + 0.5 * trace_distance(r1.rho_after, r2.rho_after)


def mode_change_scenario(phi: PureState | None = None, measures: bool = True) -> AuditScenario:
    """Teleportation set-up: phi ⊗ B1; Alice holds qubits 0,1 and runs XOR then H.

    With the default phi = |+⟩, Bob's conditional states are |+⟩ or |−⟩.
    """
    if phi is None:
        phi = PureState(np.array([1, 1]) / np.sqrt(2))
    program = ((standard_gate("XOR"), (0, 1)), (standard_gate("H"), (0,)))
    return AuditScenario(tensor(phi, bell_state(1)), (0, 1), program, measures)


def random_local_program(
    alice_qubits: Sequence[int], rng: np.random.Generator, length: int = 3
) -> tuple[tuple[GateOperator, tuple[int, ...]], ...]:
    """Random mix of Haar-ish unitaries and named gates on Alice's qubits only."""
    alice = list(alice_qubits)
    program = []
    for _ in range(length):
        if len(alice) >= 2 and rng.random() < 0.5:
            targets = tuple(int(q) for q in rng.choice(alice, size=2, replace=False))
            g = GateOperator(random_unitary(4, rng), name="U2") if rng.random() < 0.7 else standard_gate("XOR")
        else:
            targets = (int(rng.choice(alice)),)
            if rng.random() < 0.7:
                g = GateOperator(random_unitary(2, rng), name="U1")
            else:
                g = standard_gate(str(rng.choice([n for n in GATE_NAMES if n != "XOR"])))
        program.append((g, targets))
    return tuple(program)
