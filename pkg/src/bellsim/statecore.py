"""Exact complex linear algebra over small Hilbert spaces.

States are stored MSB-first: for ``|q0 q1 q2>`` the basis index is
``q0*4 + q1*2 + q2``. All values are immutable; every constructor checks
its invariants and raises :class:`InvariantViolation` when they fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-12
PSD_FLOOR = -1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class InvariantViolation(ValueError):
    """A state or operator failed one of its defining invariants."""


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=np.complex128)
    out.setflags(write=False)
    return out


def _num_qubits_for(length: int) -> int:
    n = int(length).bit_length() - 1
    if n < 1 or 1 << n != length:
        raise InvariantViolation(f"dimension {length} is not 2**n with n >= 1")
    return n


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm amplitude vector over ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1:
            raise InvariantViolation(f"amplitudes must be a vector, got shape {amps.shape}")
        _num_qubits_for(amps.size)
        if not np.all(np.isfinite(amps)):
            raise InvariantViolation("amplitudes contain NaN or infinity")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > ATOL:
            raise InvariantViolation(f"state norm**2 = {norm2!r}, expected 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0.0:
            raise InvariantViolation("cannot normalize a zero or non-finite vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, bits: str) -> "PureState":
        """Computational basis state from a bit string, e.g. ``"01"``."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"malformed bit string {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.amplitudes.size)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __len__(self) -> int:
        return self.amplitudes.size

    def __getitem__(self, index):
        return self.amplitudes[index]

    def __repr__(self) -> str:
        return f"PureState({np.array2string(self.amplitudes, precision=6)})"

    def allclose(self, other: "PureState", atol: float = ATOL) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, trace-one, positive-semidefinite operator."""

    entries: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvariantViolation(f"density matrix must be square, got shape {rho.shape}")
        _num_qubits_for(rho.shape[0])
        if not np.all(np.isfinite(rho)):
            raise InvariantViolation("density matrix contains NaN or infinity")
        herm_err = np.max(np.abs(rho - rho.conj().T))
        if herm_err > ATOL:
            raise InvariantViolation(f"density matrix not Hermitian (max deviation {herm_err:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > ATOL:
            raise InvariantViolation(f"density matrix trace = {tr!r}, expected 1")
        lowest = min(hermitian_eigenvalues(rho))
        if lowest < PSD_FLOOR:
            raise InvariantViolation(f"density matrix has eigenvalue {lowest:.3e} < 0")
        object.__setattr__(self, "entries", rho)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.entries.shape[0])

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        """trace(rho**2); 1 for pure states, 1/2 for the maximally mixed qubit."""
        return min(1.0, float(np.real(np.trace(self.entries @ self.entries))))

    def eigenvalues(self) -> list[float]:
        return hermitian_eigenvalues(self.entries)

    def allclose(self, other, atol: float = ATOL) -> bool:
        theirs = other.entries if isinstance(other, DensityMatrix) else np.asarray(other)
        return self.entries.shape == theirs.shape and bool(
            np.allclose(self.entries, theirs, rtol=0, atol=atol)
        )

    def __repr__(self) -> str:
        return f"DensityMatrix(\n{np.array2string(self.entries, precision=6)})"


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted list of pure states on a common register."""

    members: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        members = tuple((float(p), s) for p, s in self.members)
        if not members:
            raise InvariantViolation("ensemble has no members")
        widths = {s.num_qubits for _, s in members}
        if len(widths) != 1:
            raise InvariantViolation(f"ensemble members disagree on qubit count: {sorted(widths)}")
        for p, _ in members:
            if not (0.0 <= p <= 1.0):
                raise InvariantViolation(f"ensemble probability {p!r} outside [0, 1]")
        total = sum(p for p, _ in members)
        if abs(total - 1.0) > ATOL:
            raise InvariantViolation(f"ensemble probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "members", members)

    @property
    def num_qubits(self) -> int:
        return self.members[0][1].num_qubits

    @property
    def probabilities(self) -> list[float]:
        return [p for p, _ in self.members]

    @property
    def states(self) -> list[PureState]:
        return [s for _, s in self.members]

    def __len__(self) -> int:
        return len(self.members)


# Frequently used single-qubit states.
KET_0 = PureState([1, 0])
KET_1 = PureState([0, 1])
KET_PLUS = PureState(np.array([1, 1]) / np.sqrt(2))
KET_MINUS = PureState(np.array([1, -1]) / np.sqrt(2))


def qubit(a: complex, b: complex) -> PureState:
    """``a|0> + b|1>``; must already be normalized."""
    return PureState([a, b])


def tensor(a: PureState, b: PureState) -> PureState:
    # np.kron on vectors gives out[i * len(b) + j] = a[i] * b[j]
    return PureState(np.kron(a.amplitudes, b.amplitudes))


def tensor_all(states: Iterable[PureState]) -> PureState:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def inner(a: PureState, b: PureState) -> complex:
    """<a|b>."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def to_density(s: PureState) -> DensityMatrix:
    return DensityMatrix(np.outer(s.amplitudes, s.amplitudes.conj()))


def ensemble_density(e: Ensemble) -> DensityMatrix:
    rho = np.zeros((1 << e.num_qubits,) * 2, dtype=np.complex128)
    for p, s in e.members:
        rho += p * np.outer(s.amplitudes, s.amplitudes.conj())
    return DensityMatrix(rho)


def mixture(weights: Sequence[float], rhos: Sequence[DensityMatrix]) -> DensityMatrix:
    """Convex combination of density matrices of equal size."""
    if len(weights) != len(rhos) or not rhos:
        raise ValueError("need one weight per density matrix")
    acc = np.zeros_like(rhos[0].entries)
    for w, r in zip(weights, rhos):
        if r.dim != rhos[0].dim:
            raise ValueError("density matrices have different dimensions")
        acc = acc + w * r.entries
    return DensityMatrix(acc)


def _check_qubit_indices(indices, num_qubits: int, what: str) -> list[int]:
    idx = list(indices)
    for q in idx:
        if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
            raise ValueError(f"{what}: qubit index {q!r} is not an integer")
        if not 0 <= q < num_qubits:
            raise ValueError(f"{what}: qubit index {q} out of range for {num_qubits} qubits")
    if len(set(idx)) != len(idx):
        raise ValueError(f"{what}: repeated qubit index in {idx}")
    return [int(q) for q in idx]


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    n = rho.num_qubits
    keep = sorted(_check_qubit_indices(keep, n, "partial_trace"))
    if not keep:
        raise ValueError("partial_trace: keep must name at least one qubit")
    traced = [q for q in range(n) if q not in keep]
    tensor_form = rho.entries.reshape((2,) * (2 * n))
    # contract row axis q with column axis n + q for every traced qubit
    letters = "abcdefghijklmnopqrstuvwxyz"
    sub_in = [letters[i] for i in range(2 * n)]
    for q in traced:
        sub_in[n + q] = sub_in[q]
    sub_out = [sub_in[q] for q in keep] + [sub_in[n + q] for q in keep]
    spec = "".join(sub_in) + "->" + "".join(sub_out)
    k = len(keep)
    reduced = np.einsum(spec, tensor_form).reshape(1 << k, 1 << k)
    return DensityMatrix(reduced)


def _eig2(m: np.ndarray) -> list[float]:
    a = m[0, 0].real
    d = m[1, 1].real
    b = abs(m[0, 1])
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), b)
    return [float(mean - radius), float(mean + radius)]


def _off_norm(m: np.ndarray) -> float:
    off = m - np.diag(np.diag(m))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def _jacobi_eigenvalues(m: np.ndarray) -> list[float]:
    a = np.array(m, dtype=np.complex128)
    n = a.shape[0]
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(JACOBI_MAX_SWEEPS):
        if _off_norm(a) < JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-20 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / r
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotation zeroing a[p, q]: phase-align the pair, then a real Givens step
                j = np.eye(n, dtype=np.complex128)
                j[p, p] = c
                j[p, q] = s
                j[q, p] = -s * np.conj(phase)
                j[q, q] = c * np.conj(phase)
                a = j.conj().T @ a @ j
                a[q, p] = np.conj(a[p, q])
    else:
        raise ArithmeticError("Jacobi eigenvalue iteration did not converge")
    return sorted(float(x) for x in np.real(np.diag(a)))


def hermitian_eigenvalues(m) -> list[float]:
    """Ascending eigenvalues of a Hermitian matrix.

    Closed form for 2x2, cyclic Jacobi rotations otherwise.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape == (1, 1):
        return [float(m[0, 0].real)]
    if m.shape == (2, 2):
        return _eig2(m)
    return _jacobi_eigenvalues(m)


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    if r1.dim != r2.dim:
        raise ValueError(f"trace_distance: dimension mismatch {r1.dim} vs {r2.dim}")
    diff = r1.entries - r2.entries
    diff = 0.5 * (diff + diff.conj().T)
    d = 0.5 * sum(abs(x) for x in hermitian_eigenvalues(diff))
    return min(1.0, d)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|**2, insensitive to global phase."""
    if a.dim != b.dim:
        raise ValueError(f"fidelity: dimension mismatch {a.num_qubits} vs {b.num_qubits} qubits")
    return min(1.0, abs(inner(a, b)) ** 2)


def purity(rho: DensityMatrix) -> float:
    return rho.purity()


def bits_of(index: int, width: int) -> str:
    return format(index, f"0{width}b")
