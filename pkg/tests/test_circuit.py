import numpy as np
import pytest

from qsdc.circuit import (
    Circuit,
    ErrorMarker,
    GateOp,
    LocalityReport,
    Party,
    QubitRef,
    Role,
    TransferEvent,
    circuit_from_json,
    circuit_to_json,
    compose,
    concrete_gate_ops,
    default_error_resolver,
    inverse,
    locality_check,
    simulate,
)
from qsdc.core import CX, CZ, H, StateVector, X, Z, overlap, phase

import kron_oracle as ko


def reg(*owners, role=Role.DATA):
    return tuple(QubitRef(i, role, o) for i, o in enumerate(owners))


A, B, C, CH = Party.ALICE, Party.BOB, Party.CHARLIE, Party.CHANNEL


def bell_circuit(owner=A):
    return Circuit(reg(owner, owner), (GateOp(H, (0,)), GateOp(CX, (0, 1))))


# construction and validation

def test_registry_must_cover_indices():
    with pytest.raises(ValueError):
        Circuit((QubitRef(0, Role.DATA, A), QubitRef(2, Role.DATA, A)), ())
    with pytest.raises(ValueError):
        Circuit((QubitRef(0, Role.DATA, A), QubitRef(0, Role.DATA, B)), ())


def test_op_targets_validated():
    with pytest.raises(ValueError):
        Circuit(reg(A, A), (GateOp(H, (2,)),))
    with pytest.raises(ValueError):
        Circuit(reg(A, A), (ErrorMarker(5, "bit_flip"),))
    with pytest.raises(ValueError):
        Circuit(reg(A, A), ("not an op",))


def test_transfer_validation():
    with pytest.raises(ValueError):
        TransferEvent((), A, B)
    with pytest.raises(ValueError):
        TransferEvent((0,), A, A)


def test_error_marker_validation():
    with pytest.raises(ValueError):
        ErrorMarker(0, "melt")
    with pytest.raises(ValueError):
        ErrorMarker(0, "phase_shift")  # needs theta
    with pytest.raises(ValueError):
        ErrorMarker(0, "bit_flip", theta=0.1)
    ErrorMarker(0, "phase_shift", theta=1.5)


def test_default_error_resolver():
    assert default_error_resolver(ErrorMarker(3, "bit_flip"))[0].gate == X
    assert default_error_resolver(ErrorMarker(3, "phase_flip"))[0].gate == Z
    got = default_error_resolver(ErrorMarker(3, "phase_shift", 0.4))[0]
    assert got.gate.name == "PHASE" and got.gate.theta == pytest.approx(0.4)
    assert got.qubits == (3,)


def test_roles_and_lookup():
    c = Circuit(
        (QubitRef(0, Role.DATA, A), QubitRef(1, Role.PHASE_ANCILLA, A)),
        (),
    )
    assert c.qubit(1).role == Role.PHASE_ANCILLA
    assert c.qubits_with_role(Role.DATA) == (0,)
    with pytest.raises(ValueError):
        c.qubit(7)


# compose / inverse

def test_compose_keeps_first_ownership():
    a = bell_circuit(owner=C)
    b = Circuit(reg(A, A), (GateOp(Z, (0,)),), {"tag": 1})
    out = compose(a, b)
    assert out.qubit(0).owner == C
    assert len(out.ops) == 3
    assert out.metadata["tag"] == 1


def test_compose_width_and_role_mismatch():
    a = bell_circuit()
    with pytest.raises(ValueError):
        compose(a, Circuit(reg(A), ()))
    other = Circuit(
        (QubitRef(0, Role.DATA, A), QubitRef(1, Role.PARITY_ANCILLA, A)), ()
    )
    with pytest.raises(ValueError):
        compose(a, other)


def test_inverse_round_trip():
    rng = np.random.default_rng(31)
    gates = [X, Z, H, phase(0.9), CX, CZ]
    for _ in range(15):
        n = int(rng.integers(2, 6))
        ops = []
        for _ in range(12):
            g = gates[rng.integers(len(gates))]
            if g.arity == 2:
                c, t = rng.choice(n, size=2, replace=False)
                ops.append(GateOp(g, (int(c), int(t))))
            else:
                ops.append(GateOp(g, (int(rng.integers(n)),)))
        circ = Circuit(reg(*([A] * n)), ops)
        amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        start = StateVector(amps / np.linalg.norm(amps))
        out = simulate(inverse(circ), simulate(circ, start))
        assert overlap(out, start) > 1 - 1e-12


def test_inverse_rejects_non_gate_ops():
    circ = Circuit(reg(A, B), (TransferEvent((0,), A, B),))
    with pytest.raises(ValueError):
        inverse(circ)


# locality

def test_locality_clean_protocol_flow():
    c = Circuit(
        reg(C, C),
        (
            GateOp(H, (0,)),
            GateOp(CX, (0, 1)),
            TransferEvent((0,), C, A),
            TransferEvent((1,), C, B),
            GateOp(Z, (0,)),
            TransferEvent((0,), A, CH),
            ErrorMarker(0, "bit_flip"),
            TransferEvent((0,), CH, B),
            GateOp(CX, (0, 1)),
        ),
    )
    report = locality_check(c)
    assert report.ok and bool(report)
    assert report.violations == ()


def test_locality_gate_spanning_parties():
    c = Circuit(reg(A, B), (GateOp(CX, (0, 1)),))
    report = locality_check(c)
    assert not report.ok
    assert "spans parties" in report.violations[0]


def test_locality_transfer_from_wrong_holder():
    c = Circuit(reg(A, B), (TransferEvent((1,), A, CH),))
    report = locality_check(c)
    assert not report.ok
    assert "bob holds it" in report.violations[0]


def test_locality_ownership_evolves():
    # legal only because the transfer happens first
    c = Circuit(
        reg(A, B),
        (TransferEvent((0,), A, B), GateOp(CX, (0, 1))),
    )
    assert locality_check(c).ok
    # reversed order is a violation
    c2 = Circuit(
        reg(A, B),
        (GateOp(CX, (0, 1)), TransferEvent((0,), A, B)),
    )
    assert not locality_check(c2).ok


def test_locality_stale_gate_after_move_away():
    c = Circuit(
        reg(A, A, B),
        (
            GateOp(CX, (0, 1)),           # fine, both alice
            TransferEvent((1,), A, B),
            GateOp(CX, (0, 1)),           # stale: q1 left
        ),
    )
    report = locality_check(c)
    assert not report.ok
    assert len(report.violations) == 1
    assert report.violations[0].startswith("op 2")


def test_locality_markers_are_ignored():
    c = Circuit(reg(CH, B), (ErrorMarker(0, "phase_flip"),))
    assert locality_check(c).ok


# flattening and simulation

def test_concrete_gate_ops_resolution():
    c = Circuit(
        reg(CH, CH),
        (
            GateOp(H, (0,)),
            TransferEvent((0,), CH, B),
            ErrorMarker(1, "phase_shift", 2.0),
        ),
    )
    flat = concrete_gate_ops(c)
    assert [op.gate.name for op in flat] == ["H", "PHASE"]
    custom = concrete_gate_ops(c, lambda m: [GateOp(X, (m.qubit,))] * 2)
    assert [op.gate.name for op in custom] == ["H", "X", "X"]


def test_simulate_matches_oracle_with_markers():
    rng = np.random.default_rng(32)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        ops = [TransferEvent((0,), A, B)]  # transfers must not touch amplitudes
        for _ in range(10):
            roll = rng.integers(4)
            if roll == 0:
                c, t = rng.choice(n, size=2, replace=False)
                ops.append(GateOp(CX, (int(c), int(t))))
            elif roll == 1:
                ops.append(GateOp(H, (int(rng.integers(n)),)))
            elif roll == 2:
                ops.append(ErrorMarker(int(rng.integers(n)), "phase_shift",
                                       float(rng.uniform(0, np.pi))))
            else:
                ops.append(GateOp(Z, (int(rng.integers(n)),)))
        circ = Circuit(reg(*([A] * n)), ops)
        got = simulate(circ).amplitudes
        want = ko.oracle_apply(circ)
        assert np.max(np.abs(got - want)) < 1e-9


def test_simulate_initial_width_check():
    circ = bell_circuit()
    with pytest.raises(ValueError):
        simulate(circ, StateVector(np.array([1.0, 0.0])))


# serialization

def test_json_round_trip():
    c = Circuit(
        reg(C, C, role=Role.DATA),
        (
            GateOp(H, (0,)),
            GateOp(phase(0.25), (1,)),
            TransferEvent((0,), C, A),
            ErrorMarker(0, "phase_shift", 1.25),
        ),
        {"family": "epr", "note": "round trip"},
    )
    text = circuit_to_json(c)
    back = circuit_from_json(text)
    assert back == c
    assert circuit_to_json(back) == text


def test_json_rejects_unknown_op():
    with pytest.raises(ValueError):
        circuit_from_json(
            '{"registry": [{"index": 0, "role": "data", "owner": "alice"}], '
            '"ops": [{"type": "measure", "qubit": 0}], "metadata": {}}'
        )
