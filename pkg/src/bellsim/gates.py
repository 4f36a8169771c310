"""The fixed gate set I, A, B, C, H, XOR and their application to registers.

``C`` is the real matrix [[0, 1], [-1, 0]], not Pauli-Y: it maps the
teleportation branch (-b, a) back to (a, b) without a residual phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .statecore import ATOL, InvariantViolation, PureState, _check_qubit_indices, _frozen

_S = 1 / np.sqrt(2)

_MATRICES = {
    "I": [[1, 0], [0, 1]],
    "A": [[0, 1], [1, 0]],
    "B": [[1, 0], [0, -1]],
    "C": [[0, 1], [-1, 0]],
    "H": [[_S, _S], [_S, -_S]],
    # control = first target, flips the second
    "XOR": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
}

GATE_NAMES = tuple(_MATRICES)


@dataclass(frozen=True, eq=False)
class GateOperator:
    matrix: np.ndarray
    name: str = "U"

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantViolation(f"gate {self.name}: matrix must be square, got {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise InvariantViolation(f"gate {self.name}: dimension {dim} is not a power of two")
        if not np.all(np.isfinite(m)):
            raise InvariantViolation(f"gate {self.name}: non-finite entry")
        err = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
        if err > ATOL:
            raise InvariantViolation(f"gate {self.name}: not unitary (max |U'U - I| = {err:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def __matmul__(self, other: "GateOperator") -> "GateOperator":
        """Matrix product; ``(g @ h)`` applies ``h`` first."""
        if self.arity != other.arity:
            raise ValueError(f"cannot compose {self.arity}-qubit and {other.arity}-qubit gates")
        return GateOperator(self.matrix @ other.matrix, name=f"{self.name}{other.name}")

    def dagger(self) -> "GateOperator":
        return GateOperator(self.matrix.conj().T, name=f"{self.name}†")

    def allclose(self, other, atol: float = ATOL) -> bool:
        theirs = other.matrix if isinstance(other, GateOperator) else np.asarray(other)
        return self.matrix.shape == theirs.shape and bool(np.allclose(self.matrix, theirs, rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"GateOperator({self.name}, arity={self.arity})"


def standard_gate(name: str) -> GateOperator:
    try:
        return GateOperator(_MATRICES[name], name=name)
    except KeyError:
        raise ValueError(f"unknown gate {name!r}; expected one of {', '.join(GATE_NAMES)}") from None


def tensor_op(g: GateOperator, h: GateOperator) -> GateOperator:
    """Kronecker product ``g ⊗ h``; ``g`` acts on the leading qubits."""
    return GateOperator(np.kron(g.matrix, h.matrix), name=f"{g.name}⊗{h.name}")


def apply(g: GateOperator, s: PureState, targets: Sequence[int]) -> PureState:
    """Apply ``g`` to the listed qubits of ``s``; identity elsewhere.

    ``targets[0]`` is the gate's most significant qubit, so for XOR it is
    the control.
    """
    n = s.num_qubits
    targets = _check_qubit_indices(targets, n, f"apply {g.name}")
    if len(targets) != g.arity:
        raise ValueError(f"apply {g.name}: gate acts on {g.arity} qubit(s), got targets {targets}")
    # bit weight of qubit q in the MSB-first basis index
    weights = [1 << (n - 1 - q) for q in targets]
    k = len(targets)
    offsets = np.zeros(1 << k, dtype=np.int64)
    for local in range(1 << k):
        for pos, w in enumerate(weights):
            if (local >> (k - 1 - pos)) & 1:
                offsets[local] += w
    mask = sum(weights)
    bases = np.array([i for i in range(1 << n) if not i & mask], dtype=np.int64)
    # rows: one group per setting of the untouched qubits
    groups = bases[:, None] + offsets[None, :]
    amps = s.amplitudes
    out = np.empty_like(amps)
    out[groups] = amps[groups] @ g.matrix.T
    return PureState(out)


def apply_sequence(s: PureState, program: Sequence[tuple[GateOperator, Sequence[int]]]) -> PureState:
    for g, targets in program:
        s = apply(g, s, targets)
    return s
