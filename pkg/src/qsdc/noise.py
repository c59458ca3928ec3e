"""Stochastic device-noise emulation.

The model is trajectory sampling over Pauli errors: per shot, every applied
1-qubit gate draws a uniform Pauli from {X, Y, Z} on its qubit with the
device's per-qubit gate error probability, every 2-qubit gate draws a
uniform non-identity Pauli pair with the device's pair error probability,
and each measured bit flips independently with the device's readout error.

A DeviceProfile holds the per-qubit and per-directed-pair parameters; the
package ships `nairobi` (a seven-qubit transcription) and `kolkata` (a
27-qubit generic stand-in) under qsdc/profiles/. Pair error lookup falls
back from the exact directed pair to the reversed pair, the profile's
default_cnot_error, then the mean of all listed pairs, so circuits wired
over pairs the profile does not list still get a representative rate.

Sampling is deterministic under NoiseConfig.seed, and with every
probability zero consumes the random stream exactly as core.sample() does,
so a zero-noise run is bit-identical to ideal sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .circuit import Circuit, concrete_gate_ops
from .core import (
    Histogram,
    X,
    Y,
    Z,
    _apply_gate_inplace,
    _draw_outcomes,
    _marginal_indices,
    index_to_key,
    new_zero_state,
)

_PAULIS = (None, X, Y, Z)


def _check_probability(value, label: str) -> float:
    p = float(value)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{label} must be a probability, got {p}")
    return p


@dataclass(frozen=True)
class QubitParams:
    """Per-qubit noise figures; frequency, anharmonicity, and
    readout_length are carried as metadata only."""

    readout_error: float = 0.0
    id_error: float = 0.0
    frequency: float | None = None
    anharmonicity: float | None = None
    readout_length: float | None = None

    def __post_init__(self):
        _check_probability(self.readout_error, "readout_error")
        _check_probability(self.id_error, "id_error")

    def to_dict(self) -> dict:
        out = {"readout_error": self.readout_error, "id_error": self.id_error}
        for key in ("frequency", "anharmonicity", "readout_length"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass(frozen=True)
class PairParams:
    """Directed two-qubit gate noise; gate_time is metadata only."""

    cnot_error: float = 0.0
    gate_time: float | None = None

    def __post_init__(self):
        _check_probability(self.cnot_error, "cnot_error")

    def to_dict(self) -> dict:
        out = {"cnot_error": self.cnot_error}
        if self.gate_time is not None:
            out["gate_time"] = self.gate_time
        return out


def _parse_pair_key(key: str) -> tuple:
    try:
        a, b = key.split("_")
        return int(a), int(b)
    except Exception as exc:
        raise ValueError(f"pair key must look like '0_1', got {key!r}") from exc


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    qubits: dict = field(default_factory=dict)
    pairs: dict = field(default_factory=dict)
    default_cnot_error: float | None = None

    def __post_init__(self):
        if not self.qubits:
            raise ValueError("profile must define at least one qubit")
        for q in self.qubits:
            if not isinstance(q, int) or q < 0:
                raise ValueError(f"qubit id must be a non-negative int, got {q!r}")
        for pair in self.pairs:
            a, b = pair
            if a not in self.qubits or b not in self.qubits:
                raise ValueError(f"pair {a}_{b} references an unknown qubit")
        if self.default_cnot_error is not None:
            _check_probability(self.default_cnot_error, "default_cnot_error")

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    @property
    def qubit_ids(self) -> tuple:
        return tuple(sorted(self.qubits))

    def qubit_params(self, qubit: int) -> QubitParams:
        try:
            return self.qubits[qubit]
        except KeyError:
            raise ValueError(f"profile {self.name!r} has no qubit {qubit}") from None

    def cnot_error_for(self, a: int, b: int) -> float:
        """Directed pair error with fallback: (a,b), then (b,a), then the
        profile default, then the mean over all listed pairs."""
        if (a, b) in self.pairs:
            return self.pairs[(a, b)].cnot_error
        if (b, a) in self.pairs:
            return self.pairs[(b, a)].cnot_error
        if self.default_cnot_error is not None:
            return self.default_cnot_error
        if self.pairs:
            return float(np.mean([p.cnot_error for p in self.pairs.values()]))
        raise ValueError(
            f"profile {self.name!r} has no two-qubit error data for pair {a}_{b}"
        )

    @classmethod
    def zero(cls, num_qubits: int, name: str = "zero") -> "DeviceProfile":
        """All probabilities zero: ideal behavior."""
        return cls(
            name=name,
            qubits={q: QubitParams() for q in range(num_qubits)},
            pairs={},
            default_cnot_error=0.0,
        )

    @classmethod
    def uniform(cls, num_qubits: int, *, readout_error=0.0, id_error=0.0,
                cnot_error=0.0, name: str = "uniform") -> "DeviceProfile":
        return cls(
            name=name,
            qubits={q: QubitParams(readout_error=readout_error, id_error=id_error)
                    for q in range(num_qubits)},
            pairs={},
            default_cnot_error=cnot_error,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceProfile":
        if not isinstance(data, dict):
            raise ValueError("profile document must be a JSON object")
        qubits = {}
        for key, params in dict(data.get("qubits", {})).items():
            qubits[int(key)] = QubitParams(**params)
        pairs = {}
        for key, params in dict(data.get("pairs", {})).items():
            pairs[_parse_pair_key(key)] = PairParams(**params)
        return cls(
            name=str(data.get("name", "unnamed")),
            qubits=qubits,
            pairs=pairs,
            default_cnot_error=data.get("default_cnot_error"),
        )

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "qubits": {str(q): p.to_dict() for q, p in sorted(self.qubits.items())},
            "pairs": {f"{a}_{b}": p.to_dict()
                      for (a, b), p in sorted(self.pairs.items())},
        }
        if self.default_cnot_error is not None:
            out["default_cnot_error"] = self.default_cnot_error
        return out


def load_profile(path) -> DeviceProfile:
    """Parse a device profile from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"profile {path}: invalid JSON ({exc})") from exc
    return DeviceProfile.from_dict(data)


def builtin_profile(name: str) -> DeviceProfile:
    """Load one of the profiles shipped with the package."""
    ref = resources.files("qsdc") / "profiles" / f"{name}.json"
    if not ref.is_file():
        available = sorted(
            p.name[:-5] for p in (resources.files("qsdc") / "profiles").iterdir()
            if p.name.endswith(".json")
        )
        raise ValueError(f"no builtin profile {name!r} (available: {available})")
    return DeviceProfile.from_dict(json.loads(ref.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class NoiseConfig:
    """profile plus the logical-to-physical qubit assignment and the seed
    that makes a run reproducible."""

    profile: DeviceProfile
    qubit_assignment: dict | None = None
    seed: int | None = None

    def resolve_assignment(self, num_qubits: int) -> tuple:
        """Physical qubit id for each logical qubit 0..num_qubits-1.

        An explicit map wins and must cover every logical qubit. Without
        one, logical i maps to the i-th profile qubit, wrapping around
        when the circuit is wider than the device.
        """
        ids = self.profile.qubit_ids
        if self.qubit_assignment is None:
            return tuple(ids[q % len(ids)] for q in range(num_qubits))
        out = []
        for q in range(num_qubits):
            mapping = self.qubit_assignment
            phys = mapping.get(q, mapping.get(str(q)))
            if phys is None:
                raise ValueError(f"qubit_assignment missing logical qubit {q}")
            phys = int(phys)
            self.profile.qubit_params(phys)  # existence check
            out.append(phys)
        return tuple(out)


def _gate_error_probs(ops, assignment, profile) -> np.ndarray:
    probs = np.empty(len(ops))
    for i, op in enumerate(ops):
        if op.gate.arity == 1:
            probs[i] = profile.qubit_params(assignment[op.qubits[0]]).id_error
        else:
            probs[i] = profile.cnot_error_for(
                assignment[op.qubits[0]], assignment[op.qubits[1]]
            )
    return probs


def _trajectory_probs(num_qubits: int, ops, inserts: dict) -> np.ndarray:
    amps = new_zero_state(num_qubits).amplitudes.copy()
    for i, op in enumerate(ops):
        _apply_gate_inplace(amps, op.gate, op.qubits)
        for qubit, pauli in inserts.get(i, ()):
            _apply_gate_inplace(amps, pauli, (qubit,))
    return np.abs(amps) ** 2


def _draw_pauli_insert(rng, op) -> tuple:
    if op.gate.arity == 1:
        return ((op.qubits[0], _PAULIS[1 + int(rng.integers(3))]),)
    code = 1 + int(rng.integers(15))  # 1..15, skipping identity-identity
    a, b = divmod(code, 4)
    out = []
    if a:
        out.append((op.qubits[0], _PAULIS[a]))
    if b:
        out.append((op.qubits[1], _PAULIS[b]))
    return tuple(out)


def noisy_simulate(circuit: Circuit, config: NoiseConfig, shots: int,
                   measure_qubits=None) -> Histogram:
    """Sample a circuit under the configured device noise.

    Every applied gate, injected channel-error gates included, draws from
    the gate error model. Readout flips hit only the measured register.
    When no gate in the circuit has a nonzero error probability the
    outcome draws are consumed in one block, exactly like core.sample(),
    which makes the zero-noise histogram bit-identical to the ideal one.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = circuit.num_qubits
    if measure_qubits is None:
        measure_qubits = tuple(range(n))
    else:
        measure_qubits = tuple(int(q) for q in measure_qubits)
        if len(set(measure_qubits)) != len(measure_qubits):
            raise ValueError("duplicate qubit in measured register")
        for q in measure_qubits:
            if q < 0 or q >= n:
                raise ValueError(f"measured qubit {q} out of range")

    assignment = config.resolve_assignment(n)
    ops = concrete_gate_ops(circuit)
    gate_probs = _gate_error_probs(ops, assignment, config.profile)
    noisy_ops = [(int(i), ops[i]) for i in np.nonzero(gate_probs > 0)[0]]
    noisy_probs = gate_probs[gate_probs > 0]

    ideal_probs = None

    def base_probs():
        nonlocal ideal_probs
        if ideal_probs is None:
            ideal_probs = _trajectory_probs(n, ops, {})
        return ideal_probs

    rng = np.random.default_rng(config.seed)
    if not noisy_ops:
        outcomes = _draw_outcomes(base_probs(), rng.random(shots))
    else:
        outcomes = np.empty(shots, dtype=np.intp)
        for s in range(shots):
            draws = rng.random(noisy_probs.size)
            hit = np.nonzero(draws < noisy_probs)[0]
            if hit.size:
                inserts = {}
                for k in hit:
                    op_index, op = noisy_ops[k]
                    inserts[op_index] = _draw_pauli_insert(rng, op)
                probs = _trajectory_probs(n, ops, inserts)
            else:
                probs = base_probs()
            outcomes[s] = _draw_outcomes(probs, rng.random(1))[0]

    sub = _marginal_indices(outcomes, measure_qubits)
    for j, q in enumerate(measure_qubits):
        r = config.profile.qubit_params(assignment[q]).readout_error
        if r > 0:
            sub = sub ^ ((rng.random(shots) < r).astype(sub.dtype) << j)

    values, counts = np.unique(sub, return_counts=True)
    k = len(measure_qubits)
    return Histogram(
        num_qubits=k,
        shots=shots,
        counts={index_to_key(int(v), k): int(c) for v, c in zip(values, counts)},
    )
