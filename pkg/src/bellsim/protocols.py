"""Bell states, dense coding, and teleportation of pure states and ensembles."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np

from .gates import GateOperator, apply, standard_gate
from .kets import format_ket
from .measurement import (
    MeasurementRecord,
    RandomSource,
    RNGLike,
    as_generator,
    measure,
    outcome_distribution,
    project,
    select_outcome,
)
from .statecore import (
    DensityMatrix,
    Ensemble,
    InvariantViolation,
    PureState,
    ensemble_density,
    fidelity,
    mixture,
    tensor,
    to_density,
)

_S = 1 / np.sqrt(2)

_BELL = {
    1: [_S, 0, 0, _S],
    2: [_S, 0, 0, -_S],
    3: [0, _S, _S, 0],
    4: [0, _S, -_S, 0],
}

# message -> operator Alice applies to her half (qubit 0) of B1
_ENCODING = {"00": ("I",), "01": ("A",), "10": ("B",), "11": ("A", "B")}

# Alice's two bits -> Bob's fix-up, in the order of the four-branch regrouping
_CORRECTIONS = {"00": "I", "01": "A", "10": "B", "11": "C"}


@dataclass(frozen=True, eq=False)
class Step:
    """One snapshot in a transcript.

    ``scale`` is the constant the paper-style ket display leaves out, so that
    ``state.amplitudes / scale`` are the printed coefficients.
    """

    label: str
    state: PureState
    scale: float = 1.0
    note: str = ""
    group: int = 0


@dataclass(eq=False)
class ProtocolTranscript:
    protocol: str
    input: str
    steps: list[Step] = field(default_factory=list)
    measurements: list[MeasurementRecord] = field(default_factory=list)
    correction: Optional[str] = None
    final_state: Optional[PureState] = None
    fidelity: Optional[float] = None
    outcome: Optional[str] = None

    def add(self, label: str, state: PureState, scale: float = 1.0, note: str = "", group: int = 0) -> PureState:
        self.steps.append(Step(label, state, scale, note, group))
        return state


def _check_bits(bits: str, what: str) -> str:
    if not isinstance(bits, str) or len(bits) != 2 or set(bits) - {"0", "1"}:
        raise ValueError(f"{what} must be a 2-bit string such as '01', got {bits!r}")
    return bits


def bell_state(k: int) -> PureState:
    """B1..B4 = (|00>+|11>), (|00>-|11>), (|01>+|10>), (|01>-|10>), each over sqrt 2."""
    if k not in _BELL:
        raise ValueError(f"Bell label must be 1, 2, 3 or 4, got {k!r}")
    return PureState(_BELL[k])


def encoding_gate(message: str) -> GateOperator:
    ops = [standard_gate(name) for name in _ENCODING[_check_bits(message, "message")]]
    g = ops[0]
    for op in ops[1:]:
        g = op @ g
    return g


def dense_encode(message: str) -> PureState:
    """Alice's qubit-0 operation on B1: 00->I, 01->A, 10->B, 11->B·A."""
    return apply(encoding_gate(message), bell_state(1), [0])


def dense_decode(s: PureState, rng: RNGLike = RandomSource()) -> tuple[str, ProtocolTranscript]:
    """XOR, read qubit 1, H on qubit 0, read qubit 0.

    Returns (H bit + XOR bit, transcript); for Bell inputs both readings
    have probability exactly 1.
    """
    if s.num_qubits != 2:
        raise ValueError(f"dense_decode expects a 2-qubit state, got {s.num_qubits} qubit(s)")
    gen = as_generator(rng)
    tr = ProtocolTranscript("dense-code", "received pair")
    tr.add("received", s, display_scale(s))
    s = apply(standard_gate("XOR"), s, [0, 1])
    tr.add("after XOR on qubits 0,1", s, display_scale(s))
    m2 = measure(s, [1], gen)
    tr.measurements.append(m2)
    s = tr.add(f"measured qubit 1 -> {m2.outcome}", m2.post_state, display_scale(m2.post_state))
    s = apply(standard_gate("H"), s, [0])
    tr.add("after H on qubit 0", s, display_scale(s))
    m1 = measure(s, [0], gen)
    tr.measurements.append(m1)
    tr.add(f"measured qubit 0 -> {m1.outcome}", m1.post_state)
    bits = m1.outcome + m2.outcome
    tr.outcome = bits
    tr.final_state = m1.post_state
    return bits, tr


def dense_code(message: str, rng: RNGLike = RandomSource()) -> tuple[str, ProtocolTranscript]:
    """Encode ``message`` into B1, then decode it; the transcript covers both halves."""
    g = encoding_gate(message)
    shared = bell_state(1)
    sent = apply(g, shared, [0])
    bits, tr = dense_decode(sent, rng)
    tr.input = f"message {message}"
    tr.steps[:1] = [
        Step("shared B1", shared, _S),
        Step(f"Alice applies {g.name} to qubit 0", sent, display_scale(sent)),
    ]
    return bits, tr


def correction_for(code: str) -> GateOperator:
    return standard_gate(_CORRECTIONS[_check_bits(code, "correction code")])


def display_scale(s: PureState) -> float:
    """Common magnitude of the nonzero amplitudes when they all agree, else 1."""
    mags = np.abs(s.amplitudes)
    nz = mags[mags > 1e-12]
    if nz.size and np.allclose(nz, nz[0], rtol=0, atol=1e-12):
        return float(nz[0])
    return 1.0


def _teleport_circuit(phi: PureState) -> tuple[PureState, PureState, PureState]:
    initial = tensor(phi, bell_state(1))
    after_xor = apply(standard_gate("XOR"), initial, [0, 1])
    after_h = apply(standard_gate("H"), after_xor, [0])
    return initial, after_xor, after_h


def teleport_branch(after_h: PureState, outcome: str) -> tuple[float, PureState, PureState, PureState]:
    """(probability, collapsed state, Bob before fix-up, Bob after fix-up) for one outcome."""
    prob, collapsed = project(after_h, [0, 1], outcome)
    record = MeasurementRecord((0, 1), outcome, prob, collapsed)
    bob = record.residual()
    return prob, collapsed, bob, apply(correction_for(outcome), bob, [0])


def teleport(phi: PureState, rng: RNGLike = RandomSource()) -> ProtocolTranscript:
    """Send ``phi`` through B1: XOR(0,1), H(0), measure qubits 0,1, correct qubit 2."""
    if phi.num_qubits != 1:
        raise ValueError(f"teleport expects a 1-qubit state, got {phi.num_qubits} qubit(s)")
    gen = as_generator(rng)
    tr = ProtocolTranscript("teleport", f"phi = {format_ket(phi)}")
    initial, after_xor, after_h = _teleport_circuit(phi)
    tr.add("initial phi ⊗ B1", initial, _S)
    tr.add("after XOR on qubits 0,1", after_xor, _S)
    tr.add("after H on qubit 0", after_h, 0.5)
    tr.add("regrouped by Alice's qubits", after_h, 0.5, group=2)
    record = measure(after_h, [0, 1], gen)
    tr.measurements.append(record)
    tr.outcome = record.outcome
    tr.add(f"Alice measures qubits 0,1 -> {record.outcome}", record.post_state, group=2)
    bob = record.residual()
    tr.add("Bob's qubit before correction", bob)
    fix = correction_for(record.outcome)
    tr.correction = fix.name
    final = apply(fix, bob, [0])
    tr.add(f"Bob applies {fix.name}", final)
    tr.final_state = final
    tr.fidelity = fidelity(final, phi)
    if tr.fidelity < 1.0 - 1e-12:
        raise InvariantViolation(f"teleportation fidelity {tr.fidelity!r} below 1")
    return tr


T = TypeVar("T")


def run_shots(shot: Callable[[RandomSource], T], shots: int, rng: RandomSource, workers: int = 1) -> list[T]:
    """Run ``shot`` once per stream ``0 .. shots-1`` of ``rng.seed``.

    Results come back in shot order, so any ``workers`` count gives the
    same list as a serial run.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    sources = [RandomSource(rng.seed, i) for i in range(shots)]
    if workers <= 1:
        return [shot(src) for src in sources]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(shot, sources))


@dataclass(frozen=True, eq=False)
class ShotResult:
    pick: int
    outcome: str
    bob_final: PureState
    fidelity: float


@dataclass(eq=False)
class MixedTeleportSummary:
    """Outcome of teleporting members of an ensemble.

    ``uninformed`` is the description Bob holds before Alice says which member
    she sent; ``informed`` lists, per shot (or per member in exact mode), the
    pure state he assigns once told.
    """

    source: Ensemble
    mode: str
    shots: int
    picks: list[int]
    outcomes: list[str]
    fidelities: list[float]
    uninformed: DensityMatrix
    informed: list[PureState]
    expected: DensityMatrix

    @property
    def min_fidelity(self) -> float:
        return min(self.fidelities)


def _mixed_shot(source: Ensemble) -> Callable[[RandomSource], ShotResult]:
    probs = source.probabilities

    def shot(src: RandomSource) -> ShotResult:
        gen = src.generator()
        pick = select_outcome(probs, float(gen.random()))
        phi = source.states[pick]
        tr = teleport(phi, gen)
        return ShotResult(pick, tr.outcome, tr.final_state, tr.fidelity)

    return shot


def teleport_mixed(
    source: Ensemble,
    shots: int = 1,
    rng: RandomSource = RandomSource(),
    exact: bool = False,
    workers: int = 1,
) -> MixedTeleportSummary:
    """Teleport members drawn from ``source``.

    Sampled mode draws a member then runs :func:`teleport` per shot, on
    stream ``shot index``. Exact mode weights every (member, Alice outcome)
    branch by its probability instead of sampling.
    """
    if not isinstance(source, Ensemble):
        raise TypeError("source must be an Ensemble")
    if source.num_qubits != 1:
        raise ValueError("teleport_mixed expects an ensemble of 1-qubit states")
    expected = ensemble_density(source)
    if exact:
        weights, rhos, picks, outcomes, fids = [], [], [], [], []
        for k, (p, phi) in enumerate(source.members):
            _, _, after_h = _teleport_circuit(phi)
            for outcome, q in outcome_distribution(after_h, [0, 1]):
                _, _, _, final = teleport_branch(after_h, outcome)
                weights.append(p * q)
                rhos.append(to_density(final))
                picks.append(k)
                outcomes.append(outcome)
                fids.append(fidelity(final, phi))
        return MixedTeleportSummary(
            source, "exact", 0, picks, outcomes, fids, mixture(weights, rhos), list(source.states), expected
        )
    results = run_shots(_mixed_shot(source), shots, rng, workers)
    dim = 2
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for r in results:
        acc += np.outer(r.bob_final.amplitudes, r.bob_final.amplitudes.conj())
    return MixedTeleportSummary(
        source,
        "sampled",
        shots,
        [r.pick for r in results],
        [r.outcome for r in results],
        [r.fidelity for r in results],
        DensityMatrix(acc / shots),
        [source.states[r.pick] for r in results],
        expected,
    )


def teleport_batch(phi: PureState, shots: int, rng: RandomSource, workers: int = 1) -> list[ProtocolTranscript]:
    return run_shots(lambda src: teleport(phi, src), shots, rng, workers)


def gram_matrix(states: Sequence[PureState]) -> np.ndarray:
    vecs = np.array([s.amplitudes for s in states])
    return vecs.conj() @ vecs.T
