"""Circuit intermediate representation: typed qubits, party ownership,
gate/transfer/error ops, composition, inversion, locality checking,
simulation, and JSON serialization.

A circuit is data, not behavior: ops are applied by simulate() and owners
evolve through TransferEvents. ErrorMarkers are symbolic channel errors,
expanded into concrete gates by an error resolver at simulation time.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .core import (
    Gate,
    StateVector,
    X,
    Z,
    _apply_gate_inplace,
    _check_targets,
    new_zero_state,
    phase,
)


class Party(enum.Enum):
    ALICE = "alice"
    BOB = "bob"
    CHARLIE = "charlie"
    CHANNEL = "channel"


class Role(enum.Enum):
    DATA = "data"
    PHASE_ANCILLA = "phase_ancilla"
    PARITY_ANCILLA = "parity_ancilla"
    CORRECTION_ANCILLA = "correction_ancilla"


@dataclass(frozen=True)
class QubitRef:
    index: int
    role: Role
    owner: Party


@dataclass(frozen=True)
class GateOp:
    gate: Gate
    qubits: tuple

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


@dataclass(frozen=True)
class TransferEvent:
    """Hand qubits from src to dst. No physical action on the state."""

    qubits: tuple
    src: Party
    dst: Party

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if not self.qubits:
            raise ValueError("transfer must move at least one qubit")
        if self.src == self.dst:
            raise ValueError("transfer source and destination coincide")


ERROR_KINDS = ("bit_flip", "phase_flip", "phase_shift")


@dataclass(frozen=True)
class ErrorMarker:
    """Symbolic channel error on one qubit."""

    qubit: int
    kind: str
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in ERROR_KINDS:
            raise ValueError(f"unknown error kind {self.kind!r}")
        if self.kind == "phase_shift":
            if self.theta is None:
                raise ValueError("phase_shift requires theta")
        elif self.theta is not None:
            raise ValueError(f"{self.kind} takes no angle")


def default_error_resolver(marker: ErrorMarker):
    """BitFlip -> X, PhaseFlip -> Z, PhaseShift -> diag(1, e^{i theta})."""
    if marker.kind == "bit_flip":
        return [GateOp(X, (marker.qubit,))]
    if marker.kind == "phase_flip":
        return [GateOp(Z, (marker.qubit,))]
    return [GateOp(phase(marker.theta), (marker.qubit,))]


@dataclass(frozen=True)
class Circuit:
    registry: tuple
    ops: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "registry", tuple(self.registry))
        object.__setattr__(self, "ops", tuple(self.ops))
        indices = sorted(ref.index for ref in self.registry)
        n = len(self.registry)
        if indices != list(range(n)):
            raise ValueError("registry must cover indices 0..n-1 exactly once")
        for pos, op in enumerate(self.ops):
            if isinstance(op, GateOp):
                _check_targets(n, op.gate, op.qubits)
            elif isinstance(op, (TransferEvent, ErrorMarker)):
                qubits = op.qubits if isinstance(op, TransferEvent) else (op.qubit,)
                for q in qubits:
                    if q < 0 or q >= n:
                        raise ValueError(f"op {pos}: qubit {q} out of range")
            else:
                raise ValueError(f"op {pos}: unsupported op type {type(op).__name__}")

    @property
    def num_qubits(self) -> int:
        return len(self.registry)

    def qubit(self, index: int) -> QubitRef:
        for ref in self.registry:
            if ref.index == index:
                return ref
        raise ValueError(f"no qubit {index}")

    def qubits_with_role(self, role: Role) -> tuple:
        return tuple(ref.index for ref in sorted(self.registry, key=lambda r: r.index)
                     if ref.role == role)


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Concatenate b after a. Registries must agree in size and roles;
    a's initial ownership is kept. Locality of the parts does not imply
    locality of the whole, so callers re-run locality_check if they care.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError("circuits have different widths")
    roles_a = {ref.index: ref.role for ref in a.registry}
    roles_b = {ref.index: ref.role for ref in b.registry}
    if roles_a != roles_b:
        raise ValueError("circuits disagree on qubit roles")
    return Circuit(a.registry, a.ops + b.ops, {**a.metadata, **b.metadata})


def inverse(c: Circuit) -> Circuit:
    """Reverse the gate order, inverting each gate. Gate-only circuits."""
    inverted = []
    for op in reversed(c.ops):
        if not isinstance(op, GateOp):
            raise ValueError("inverse is defined for gate-only circuits")
        inverted.append(GateOp(op.gate.inverse(), op.qubits))
    return Circuit(c.registry, inverted, dict(c.metadata))


@dataclass(frozen=True)
class LocalityReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def locality_check(c: Circuit) -> LocalityReport:
    """Every gate must act within a single party's qubits at that point in
    the op stream; transfers must move qubits their source actually holds.
    """
    owner = {ref.index: ref.owner for ref in c.registry}
    violations = []
    for pos, op in enumerate(c.ops):
        if isinstance(op, GateOp):
            owners = {owner[q] for q in op.qubits}
            if len(owners) > 1:
                held = ", ".join(f"q{q}={owner[q].value}" for q in op.qubits)
                violations.append(f"op {pos}: {op.gate.name} spans parties ({held})")
        elif isinstance(op, TransferEvent):
            for q in op.qubits:
                if owner[q] != op.src:
                    violations.append(
                        f"op {pos}: transfer of q{q} from {op.src.value}, "
                        f"but {owner[q].value} holds it"
                    )
            for q in op.qubits:
                owner[q] = op.dst
    return LocalityReport(ok=not violations, violations=tuple(violations))


def concrete_gate_ops(c: Circuit, error_resolver=None) -> list:
    """Flatten to plain gates: transfers drop out, markers are resolved."""
    resolver = error_resolver or default_error_resolver
    gates = []
    for op in c.ops:
        if isinstance(op, GateOp):
            gates.append(op)
        elif isinstance(op, ErrorMarker):
            gates.extend(resolver(op))
    return gates


def simulate(c: Circuit, initial: StateVector | None = None,
             error_resolver=None) -> StateVector:
    """Run the circuit on initial (default |0...0>) and return the state."""
    if initial is None:
        initial = new_zero_state(c.num_qubits)
    elif initial.num_qubits != c.num_qubits:
        raise ValueError("initial state width differs from circuit")
    amps = initial.amplitudes.copy()
    for op in concrete_gate_ops(c, error_resolver):
        _apply_gate_inplace(amps, op.gate, op.qubits)
    return StateVector(amps)


# JSON serialization. Gate names are persisted upper-case and angles in
# radians as decimals; the layout round-trips structurally.

def _op_to_dict(op) -> dict:
    if isinstance(op, GateOp):
        d = {"type": "gate", "name": op.gate.name, "qubits": list(op.qubits)}
        if op.gate.theta is not None:
            d["theta"] = op.gate.theta
        return d
    if isinstance(op, TransferEvent):
        return {"type": "transfer", "qubits": list(op.qubits),
                "from": op.src.value, "to": op.dst.value}
    d = {"type": "error", "qubit": op.qubit, "kind": op.kind}
    if op.theta is not None:
        d["theta"] = op.theta
    return d


def _op_from_dict(d: dict):
    kind = d.get("type")
    if kind == "gate":
        gate = Gate(d["name"], d.get("theta"))
        return GateOp(gate, tuple(d["qubits"]))
    if kind == "transfer":
        return TransferEvent(tuple(d["qubits"]), Party(d["from"]), Party(d["to"]))
    if kind == "error":
        return ErrorMarker(d["qubit"], d["kind"], d.get("theta"))
    raise ValueError(f"unknown op type {kind!r}")


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "registry": [
            {"index": ref.index, "role": ref.role.value, "owner": ref.owner.value}
            for ref in sorted(c.registry, key=lambda r: r.index)
        ],
        "ops": [_op_to_dict(op) for op in c.ops],
        "metadata": dict(c.metadata),
    }


def circuit_from_dict(d: dict) -> Circuit:
    registry = tuple(
        QubitRef(entry["index"], Role(entry["role"]), Party(entry["owner"]))
        for entry in d["registry"]
    )
    ops = tuple(_op_from_dict(entry) for entry in d["ops"])
    return Circuit(registry, ops, dict(d.get("metadata", {})))


def circuit_to_json(c: Circuit, indent: int | None = 2) -> str:
    return json.dumps(circuit_to_dict(c), indent=indent, sort_keys=True)


def circuit_from_json(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))
