"""Projective computational-basis measurement with seeded randomness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .statecore import ATOL, PureState, _check_qubit_indices, bits_of

# outcomes this unlikely are dropped from distributions
NEGLIGIBLE = 1e-15


@dataclass(frozen=True)
class RandomSource:
    """Counter-style seed: each ``(seed, stream_id)`` names one independent stream.

    Streams are derived with :class:`numpy.random.SeedSequence`, so shot ``i``
    of a batch can be replayed alone with ``RandomSource(seed, i)``.
    """

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for field in ("seed", "stream_id"):
            v = getattr(self, field)
            if not isinstance(v, (int, np.integer)) or not 0 <= v < 1 << 64:
                raise ValueError(f"{field} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))

    def stream(self, stream_id: int) -> "RandomSource":
        return RandomSource(self.seed, stream_id)


RNGLike = Union[RandomSource, np.random.Generator]


def as_generator(rng: RNGLike) -> np.random.Generator:
    if isinstance(rng, RandomSource):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomSource or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    measured_qubits: tuple[int, ...]
    outcome: str
    probability: float
    post_state: PureState

    def residual(self) -> PureState:
        """State of the unmeasured qubits after collapse (a product factor)."""
        n = self.post_state.num_qubits
        rest = [q for q in range(n) if q not in self.measured_qubits]
        if not rest:
            raise ValueError("every qubit was measured; nothing remains")
        amps = self.post_state.amplitudes.reshape((2,) * n)
        index = [slice(None)] * n
        for q, bit in zip(self.measured_qubits, self.outcome):
            index[q] = int(bit)
        return PureState.from_unnormalized(amps[tuple(index)].reshape(-1))

    def as_dict(self) -> dict:
        return {
            "qubits": list(self.measured_qubits),
            "outcome": self.outcome,
            "probability": self.probability,
        }


def _marginal(s: PureState, qubits: list[int]) -> np.ndarray:
    """Probability of every outcome on ``qubits``, indexed by its bit string."""
    n = s.num_qubits
    probs = (np.abs(s.amplitudes) ** 2).reshape((2,) * n)
    others = tuple(q for q in range(n) if q not in qubits)
    marg = probs.sum(axis=others) if others else probs
    # summed array keeps the remaining axes in ascending qubit order
    order = sorted(qubits)
    marg = np.transpose(marg, [order.index(q) for q in qubits])
    return marg.reshape(-1)


def outcome_distribution(s: PureState, qubits: Sequence[int]) -> list[tuple[str, float]]:
    """(bit string, probability) pairs in ascending bit-string order.

    Bits follow the order of ``qubits``. Outcomes below 1e-15 are omitted.
    """
    qubits = _check_qubit_indices(qubits, s.num_qubits, "outcome_distribution")
    if not qubits:
        raise ValueError("outcome_distribution: no qubits given")
    marg = _marginal(s, qubits)
    k = len(qubits)
    return [(bits_of(i, k), min(1.0, float(p))) for i, p in enumerate(marg) if p >= NEGLIGIBLE]


def project(s: PureState, qubits: Sequence[int], outcome: str) -> tuple[float, PureState]:
    """Probability of ``outcome`` and the renormalized collapsed state."""
    n = s.num_qubits
    qubits = _check_qubit_indices(qubits, n, "project")
    if len(outcome) != len(qubits) or set(outcome) - {"0", "1"}:
        raise ValueError(f"outcome {outcome!r} does not match {len(qubits)} measured qubit(s)")
    amps = s.amplitudes.reshape((2,) * n).copy()
    keep = np.zeros_like(amps, dtype=bool)
    index = [slice(None)] * n
    for q, bit in zip(qubits, outcome):
        index[q] = int(bit)
    keep[tuple(index)] = True
    amps[~keep] = 0.0
    flat = amps.reshape(-1)
    prob = float(np.vdot(flat, flat).real)
    if prob < NEGLIGIBLE:
        raise ValueError(f"outcome {outcome} has probability zero")
    return min(1.0, prob), PureState(flat / np.sqrt(prob))


def select_outcome(probabilities: Sequence[float], u: float) -> int:
    """First index whose running sum exceeds ``u``; last index on round-off."""
    acc = 0.0
    for i, p in enumerate(probabilities):
        acc += p
        if acc > u:
            return i
    return len(probabilities) - 1


def measure(s: PureState, qubits: Sequence[int], rng: RNGLike) -> MeasurementRecord:
    """Sample one outcome on ``qubits`` and collapse ``s``.

    A :class:`RandomSource` contributes its first uniform draw; pass a
    numpy Generator to chain several measurements on one stream.
    """
    dist = outcome_distribution(s, qubits)
    u = float(as_generator(rng).random())
    outcome, prob = dist[select_outcome([p for _, p in dist], u)]
    prob, post = project(s, qubits, outcome)
    if abs(prob - 1.0) <= ATOL:
        prob = 1.0
    return MeasurementRecord(tuple(int(q) for q in qubits), outcome, prob, post)


def random_state(num_qubits: int, rng: RNGLike) -> PureState:
    """Normalized complex Gaussian vector."""
    g = as_generator(rng)
    dim = 1 << num_qubits
    return PureState.from_unnormalized(g.normal(size=dim) + 1j * g.normal(size=dim))


def random_unitary(dim: int, rng: RNGLike) -> np.ndarray:
    """Orthonormalized complex Gaussian matrix (QR with the phase of R fixed)."""
    g = as_generator(rng)
    z = (g.normal(size=(dim, dim)) + 1j * g.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
