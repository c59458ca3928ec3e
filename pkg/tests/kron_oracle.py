"""Independent full-matrix oracle for the test suite.

Every operator is built as an explicit Kronecker product over the whole
register and applied by matrix-vector multiplication. Nothing here shares
code with the package kernels: matrices are written out locally and
controlled gates are projector sums. Dense arrays up to 8 qubits; above
that the same construction runs through scipy.sparse (still the full
2^n x 2^n operator, just stored sparsely so wide-register suites finish
in reasonable time).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 8

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)

PAULI = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def phase2(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def _gate_matrix(name: str, theta) -> np.ndarray:
    if name == "PHASE":
        return phase2(theta)
    if name == "H":
        return H2
    return PAULI[name]


def embed_1q(n: int, qubit: int, mat: np.ndarray):
    """I x ... x mat x ... x I with qubit 0 the least significant factor."""
    if n <= DENSE_LIMIT:
        out = np.array([[1.0]], dtype=complex)
        for q in range(n):
            out = np.kron(mat if q == qubit else I2, out)
        return out
    out = sp.identity(1, dtype=complex, format="csr")
    for q in range(n):
        factor = sp.csr_matrix(mat) if q == qubit else sp.identity(
            2, dtype=complex, format="csr")
        out = sp.kron(factor, out, format="csr")
    return out


def embed_controlled(n: int, control: int, target: int, mat: np.ndarray):
    """|0><0|_c x I + |1><1|_c x mat_t as one full-register operator."""
    return embed_1q(n, control, P0) + embed_1q(n, control, P1) @ embed_1q(
        n, target, mat)


_CACHE = {}


def operator_for(n: int, name: str, qubits, theta=None):
    key = (n, name, tuple(qubits), theta)
    if key not in _CACHE:
        if name == "CX":
            op = embed_controlled(n, qubits[0], qubits[1], X2)
        elif name == "CZ":
            op = embed_controlled(n, qubits[0], qubits[1], Z2)
        else:
            op = embed_1q(n, qubits[0], _gate_matrix(name, theta))
        _CACHE[key] = op
    return _CACHE[key]


_ERROR_MATRICES = {
    "bit_flip": lambda theta: X2,
    "phase_flip": lambda theta: Z2,
    "phase_shift": lambda theta: phase2(theta),
}


def _flat_ops(circuit):
    """(name, qubits, theta) triples; transfers drop, markers become their
    matrices by this module's own reading of the kinds."""
    out = []
    for op in circuit.ops:
        kind = type(op).__name__
        if kind == "GateOp":
            out.append((op.gate.name, tuple(op.qubits), op.gate.theta))
        elif kind == "ErrorMarker":
            if op.kind not in _ERROR_MATRICES:
                raise ValueError(f"unknown error kind {op.kind!r}")
            name = {"bit_flip": "X", "phase_flip": "Z",
                    "phase_shift": "PHASE"}[op.kind]
            out.append((name, (op.qubit,), op.theta))
        elif kind == "TransferEvent":
            continue
        else:
            raise ValueError(f"unknown op {kind}")
    return out


def oracle_apply(circuit, initial=None) -> np.ndarray:
    """Final amplitudes of the circuit by full-operator products."""
    n = circuit.num_qubits
    if initial is None:
        vec = np.zeros(1 << n, dtype=complex)
        vec[0] = 1.0
    else:
        vec = np.asarray(initial, dtype=complex).copy()
    for name, qubits, theta in _flat_ops(circuit):
        if name == "I":
            continue
        vec = operator_for(n, name, qubits, theta) @ vec
    return np.asarray(vec).reshape(-1)


def pauli_matrix(pauli_string: str) -> np.ndarray:
    """Dense tensor product; character i addresses qubit i (bit i)."""
    out = np.array([[1.0]], dtype=complex)
    for ch in pauli_string:
        out = np.kron(PAULI[ch], out)
    return out


def oracle_expectation(amps: np.ndarray, pauli_string: str) -> float:
    mat = pauli_matrix(pauli_string)
    return float(np.real(np.vdot(amps, mat @ amps)))


def _place_bits(value: int, positions) -> int:
    return sum(((value >> pos) & 1) << q for pos, q in enumerate(positions))


def oracle_partial_trace(amps: np.ndarray, keep) -> np.ndarray:
    """Reduced density matrix of a pure state by explicit index summation
    over the full outer product: out[a, b] = sum_r rho[(a, r), (b, r)]."""
    n = int(np.log2(amps.size))
    keep = sorted(keep)
    rest = [q for q in range(n) if q not in keep]
    rho = np.outer(amps, amps.conj())
    out = np.zeros((1 << len(keep), 1 << len(keep)), dtype=complex)
    for a in range(1 << len(keep)):
        for b in range(1 << len(keep)):
            for r in range(1 << len(rest)):
                i = _place_bits(a, keep) | _place_bits(r, rest)
                j = _place_bits(b, keep) | _place_bits(r, rest)
                out[a, b] += rho[i, j]
    return out
