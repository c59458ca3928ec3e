"""State-vector simulation core: gates, states, sampling, density matrices.

Qubit ordering is little-endian throughout: qubit i is bit i of the basis
index, so basis state k assigns qubit i the value (k >> i) & 1. Bitstring
keys are displayed with qubit 0 leftmost. Global phase is never normalized
away; state equality is always judged through overlaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 24

NORM_ATOL = 1e-9          # accepted drift of sum |a|^2 at construction
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10

_SQRT2 = np.sqrt(2.0)

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
}

_TWO_QUBIT = ("CX", "CZ")


@dataclass(frozen=True)
class Gate:
    """A named gate from the fixed set {I, X, Y, Z, H, PHASE, CX, CZ}.

    PHASE carries an angle theta in radians and acts as diag(1, e^{i theta}).
    """

    name: str
    theta: float | None = None

    def __post_init__(self):
        if self.name == "PHASE":
            if self.theta is None:
                raise ValueError("PHASE gate requires theta")
        elif self.name in _MATRICES or self.name in _TWO_QUBIT:
            if self.theta is not None:
                raise ValueError(f"{self.name} takes no angle")
        else:
            raise ValueError(f"unknown gate {self.name!r}")

    @property
    def arity(self) -> int:
        return 2 if self.name in _TWO_QUBIT else 1

    def matrix(self) -> np.ndarray:
        """2x2 matrix for single-qubit gates. Two-qubit gates have no dense
        matrix here; their action is defined directly by the kernels."""
        if self.name == "PHASE":
            return np.array([[1, 0], [0, np.exp(1j * self.theta)]], dtype=complex)
        if self.name in _TWO_QUBIT:
            raise ValueError(f"{self.name} has no single-qubit matrix")
        return _MATRICES[self.name]

    def inverse(self) -> "Gate":
        if self.name == "PHASE":
            return Gate("PHASE", -self.theta)
        return self  # everything else in the set is self-adjoint


I = Gate("I")
X = Gate("X")
Y = Gate("Y")
Z = Gate("Z")
H = Gate("H")
CX = Gate("CX")
CZ = Gate("CZ")


def phase(theta: float) -> Gate:
    return Gate("PHASE", float(theta))


class StateVector:
    """Normalized pure state over num_qubits qubits (complex128 amplitudes)."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes, num_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be one-dimensional")
        n = int(amps.size).bit_length() - 1
        if 1 << n != amps.size:
            raise ValueError("amplitude count must be a power of two")
        if num_qubits is not None and num_qubits != n:
            raise ValueError("num_qubits inconsistent with amplitude count")
        norm = float(np.sum(amps.real**2 + amps.imag**2))
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state not normalized: sum |a|^2 = {norm!r}")
        self.num_qubits = n
        self.amplitudes = amps

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


class DensityMatrix:
    """Hermitian, unit-trace matrix over num_qubits qubits.

    Hermiticity and trace are validated at construction; positivity is the
    caller's responsibility (the tomography projection guarantees it).
    """

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, matrix, num_qubits: int | None = None):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(mat.shape[0]).bit_length() - 1
        if 1 << n != mat.shape[0]:
            raise ValueError("dimension must be a power of two")
        if num_qubits is not None and num_qubits != n:
            raise ValueError("num_qubits inconsistent with dimension")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_ATOL:
            raise ValueError("matrix is not Hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace must be 1, got {tr!r}")
        self.num_qubits = n
        self.matrix = mat

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def __repr__(self):
        return f"DensityMatrix(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class Histogram:
    """Measurement counts keyed by bitstring (qubit 0 leftmost)."""

    num_qubits: int
    shots: int
    counts: dict

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        total = 0
        for key, cnt in self.counts.items():
            if len(key) != self.num_qubits or set(key) - {"0", "1"}:
                raise ValueError(f"bad histogram key {key!r}")
            if cnt < 0:
                raise ValueError("negative count")
            total += cnt
        if total != self.shots:
            raise ValueError("counts must sum to shots")

    def probabilities(self) -> dict:
        return {k: v / self.shots for k, v in self.counts.items()}

    def plurality(self) -> str:
        """Most frequent key; ties broken toward the lexicographically
        smallest so the result is deterministic."""
        return min(self.counts, key=lambda k: (-self.counts[k], k))


def index_to_key(index: int, num_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(num_qubits))


def key_to_index(key: str) -> int:
    return sum(1 << q for q, bit in enumerate(key) if bit == "1")


def new_zero_state(num_qubits: int) -> StateVector:
    """|0...0> on num_qubits qubits. Width is capped at MAX_QUBITS."""
    if not isinstance(num_qubits, (int, np.integer)) or isinstance(num_qubits, bool):
        raise ValueError("qubit count must be an integer")
    if num_qubits < 1 or num_qubits > MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {num_qubits}")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps)


# In-place kernels. These walk amplitude strides instead of building any
# embedded operator matrix; the dense construction lives only in the test
# oracle. All of them assume a C-contiguous complex128 array they own.

def _apply_1q(amps: np.ndarray, qubit: int, matrix: np.ndarray) -> None:
    view = amps.reshape(-1, 2, 1 << qubit)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    view[:, 1, :] = matrix[1, 0] * a0 + matrix[1, 1] * a1


def _pair_view(amps: np.ndarray, qa: int, qb: int) -> np.ndarray:
    # axes: (high, bit qa, mid, bit qb, low) with qa > qb
    return amps.reshape(-1, 2, 1 << (qa - qb - 1), 2, 1 << qb)


def _apply_cx(amps: np.ndarray, control: int, target: int) -> None:
    if control > target:
        v = _pair_view(amps, control, target)
        tmp = v[:, 1, :, 0, :].copy()
        v[:, 1, :, 0, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp
    else:
        v = _pair_view(amps, target, control)
        tmp = v[:, 0, :, 1, :].copy()
        v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = tmp


def _apply_cz(amps: np.ndarray, control: int, target: int) -> None:
    qa, qb = max(control, target), min(control, target)
    v = _pair_view(amps, qa, qb)
    v[:, 1, :, 1, :] *= -1.0


def _apply_gate_inplace(amps: np.ndarray, gate: Gate, qubits) -> None:
    if gate.name == "CX":
        _apply_cx(amps, qubits[0], qubits[1])
    elif gate.name == "CZ":
        _apply_cz(amps, qubits[0], qubits[1])
    elif gate.name == "I":
        pass
    else:
        _apply_1q(amps, qubits[0], gate.matrix())


def _check_targets(num_qubits: int, gate: Gate, qubits) -> tuple:
    qs = tuple(int(q) for q in qubits)
    if len(qs) != gate.arity:
        raise ValueError(f"{gate.name} expects {gate.arity} qubit(s), got {len(qs)}")
    if len(set(qs)) != len(qs):
        raise ValueError("duplicate target qubit")
    for q in qs:
        if q < 0 or q >= num_qubits:
            raise ValueError(f"qubit {q} out of range for {num_qubits}-qubit state")
    return qs


def apply_gate(state: StateVector, gate: Gate, qubits) -> StateVector:
    """Apply one gate and return the new state. The input is not mutated.

    Two-qubit targets are ordered (control, target).
    """
    qs = _check_targets(state.num_qubits, gate, qubits)
    amps = state.amplitudes.copy()
    _apply_gate_inplace(amps, gate, qs)
    return StateVector(amps)


def overlap(a: StateVector, b: StateVector) -> float:
    """|<a|b>|. Equality of states up to global phase means overlap 1."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("qubit counts differ")
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)))


def fidelity(a, b: StateVector) -> float:
    """Fidelity of a (pure state or density matrix) against pure state b."""
    if isinstance(a, StateVector):
        value = overlap(a, b) ** 2
    elif isinstance(a, DensityMatrix):
        if a.num_qubits != b.num_qubits:
            raise ValueError("qubit counts differ")
        value = float(np.real(np.vdot(b.amplitudes, a.matrix @ b.amplitudes)))
    else:
        raise TypeError("first argument must be StateVector or DensityMatrix")
    return min(1.0, max(0.0, value))


def _draw_outcomes(probs: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    cum = np.cumsum(probs)
    out = np.searchsorted(cum, uniforms, side="right")
    return np.minimum(out, probs.size - 1)


def _marginal_indices(outcomes: np.ndarray, qubits) -> np.ndarray:
    sub = np.zeros_like(outcomes)
    for j, q in enumerate(qubits):
        sub |= ((outcomes >> q) & 1) << j
    return sub


def sample(state: StateVector, shots: int, seed, qubits=None) -> Histogram:
    """Draw shots outcomes from |amplitude|^2.

    qubits optionally restricts keys to that register (marginal counts);
    by default all qubits are reported. Deterministic under seed: shot s
    consumes the s-th uniform of numpy's default_rng(seed) stream.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if qubits is None:
        qubits = tuple(range(state.num_qubits))
    else:
        qubits = tuple(int(q) for q in qubits)
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate qubit in register")
        for q in qubits:
            if q < 0 or q >= state.num_qubits:
                raise ValueError(f"qubit {q} out of range")
    rng = np.random.default_rng(seed)
    outcomes = _draw_outcomes(state.probabilities(), rng.random(shots))
    sub = _marginal_indices(outcomes, qubits)
    values, counts = np.unique(sub, return_counts=True)
    n = len(qubits)
    return Histogram(
        num_qubits=n,
        shots=shots,
        counts={index_to_key(int(v), n): int(c) for v, c in zip(values, counts)},
    )


def pauli_expectation(state: StateVector, pauli_string: str) -> float:
    """<state| P |state> for P a tensor product over {I,X,Y,Z}.

    Character i of the string addresses qubit i (leftmost = qubit 0,
    matching key display order).
    """
    if len(pauli_string) != state.num_qubits:
        raise ValueError("pauli string length must equal qubit count")
    work = state.amplitudes.copy()
    for q, ch in enumerate(pauli_string):
        if ch == "I":
            continue
        if ch not in ("X", "Y", "Z"):
            raise ValueError(f"bad pauli character {ch!r}")
        _apply_1q(work, q, _MATRICES[ch])
    return float(np.real(np.vdot(state.amplitudes, work)))


def density_of(state: StateVector) -> DensityMatrix:
    a = state.amplitudes
    return DensityMatrix(np.outer(a, a.conj()))


def _keep_tuple(keep, num_qubits: int) -> tuple:
    kept = tuple(sorted(set(int(q) for q in keep)))
    if not kept:
        raise ValueError("keep set must be nonempty")
    for q in kept:
        if q < 0 or q >= num_qubits:
            raise ValueError(f"qubit {q} out of range")
    return kept


def partial_trace(source, keep) -> DensityMatrix:
    """Reduced density matrix on the kept qubits.

    Accepts a DensityMatrix or, for efficiency on wide registers, a
    StateVector (tracing a pure state never materializes the full matrix).
    Kept qubit j of the result corresponds to sorted(keep)[j], preserving
    little-endian order.
    """
    if isinstance(source, StateVector):
        n = source.num_qubits
        kept = _keep_tuple(keep, n)
        rest = tuple(q for q in range(n) if q not in kept)
        tensor = source.amplitudes.reshape((2,) * n)
        # axis n-1-q holds qubit q; row index packs kept bits little-endian
        axes = [n - 1 - q for q in reversed(kept)] + [n - 1 - q for q in reversed(rest)]
        v = tensor.transpose(axes).reshape(1 << len(kept), 1 << len(rest))
        return DensityMatrix(v @ v.conj().T)
    if isinstance(source, DensityMatrix):
        n = source.num_qubits
        kept = _keep_tuple(keep, n)
        rest = tuple(q for q in range(n) if q not in kept)
        tensor = source.matrix.reshape((2,) * (2 * n))
        for q in sorted(rest, reverse=True):
            # trace axis pair of qubit q; row axes precede column axes
            dims = tensor.ndim // 2
            ax = dims - 1 - sum(1 for r in rest if r < q) - sum(1 for k in kept if k < q)
            tensor = np.trace(tensor, axis1=ax, axis2=ax + dims)
        k = len(kept)
        return DensityMatrix(tensor.reshape(1 << k, 1 << k))
    raise TypeError("source must be StateVector or DensityMatrix")
