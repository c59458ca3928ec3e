"""Superdense coding over generalized Bell states.

A generalized Bell state (GBS) on N qubits is (|x> + (-1)^b |x bar>)/sqrt(2)
with x bar the bitwise complement; the label keeps x's top bit at 0 so each
state has a unique (b, x) name. The sender holds the first N-1 qubits of a
block and moves N bits per block by choosing a phase flip on qubit 0 plus a
bit-flip pattern. Families:

  EPR       one 2-qubit block (the standard 2-bit protocol)
  GBS(N)    one N-qubit block, N bits
  GhzEpr(N) one 3-qubit block plus N-1 independent 2-qubit blocks, 2N+1 bits

Block encode map, message bits b1..bk over a k-qubit block: qubit 0 receives
Z if b1 then X if b2; qubit j for j in 1..k-2 receives X if b_{j+2}. The last
qubit stays with the receiver and is never touched. decode_message inverts
the basis permutation this induces after the inverse preparation runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, GateOp, Party, QubitRef, Role
from .core import CX, H, StateVector, X, Z

FAMILY_KINDS = ("epr", "gbs", "ghz_epr")


@dataclass(frozen=True)
class Block:
    """One protected GBS block: global data qubit indices plus the slice of
    the message it carries. The receiver keeps data[-1]."""

    data: tuple
    message_start: int

    @property
    def size(self) -> int:
        return len(self.data)

    @property
    def alice_data(self) -> tuple:
        return self.data[:-1]

    @property
    def bob_data(self) -> int:
        return self.data[-1]

    @property
    def message_slice(self) -> slice:
        return slice(self.message_start, self.message_start + self.size)


@dataclass(frozen=True)
class StateFamily:
    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "epr" and self.n != 2:
            raise ValueError("epr is the two-qubit family")
        if self.kind == "gbs" and self.n < 2:
            raise ValueError("gbs needs n >= 2")
        if self.kind == "ghz_epr" and self.n < 1:
            raise ValueError("ghz_epr needs n >= 1")

    @classmethod
    def epr(cls) -> "StateFamily":
        return cls("epr", 2)

    @classmethod
    def gbs(cls, n: int) -> "StateFamily":
        return cls("gbs", n)

    @classmethod
    def ghz_epr(cls, n: int) -> "StateFamily":
        return cls("ghz_epr", n)

    @classmethod
    def parse(cls, text: str) -> "StateFamily":
        """Accepts "epr", "gbsN", and "ghz_eprN" (e.g. "gbs4")."""
        name = text.strip().lower()
        if name == "epr":
            return cls.epr()
        for prefix, kind in (("ghz_epr", "ghz_epr"), ("gbs", "gbs")):
            if name.startswith(prefix):
                suffix = name[len(prefix):]
                if suffix.isdigit():
                    return cls(kind, int(suffix))
        raise ValueError(f"cannot parse family {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "epr":
            return "epr"
        return f"{self.kind}{self.n}"

    @property
    def block_sizes(self) -> tuple:
        if self.kind == "ghz_epr":
            return (3,) + (2,) * (self.n - 1)
        return (self.n,)

    @property
    def blocks(self) -> tuple:
        out = []
        qubit = 0
        bit = 0
        for size in self.block_sizes:
            out.append(Block(tuple(range(qubit, qubit + size)), bit))
            qubit += size
            bit += size
        return tuple(out)

    @property
    def num_data_qubits(self) -> int:
        return sum(self.block_sizes)

    @property
    def alice_data_qubits(self) -> tuple:
        return tuple(q for block in self.blocks for q in block.alice_data)

    @property
    def bob_data_qubits(self) -> tuple:
        return tuple(block.bob_data for block in self.blocks)


def capacity(family: StateFamily) -> int:
    """Classical bits carried per run: the log2 of the encoded basis size."""
    return family.num_data_qubits


@dataclass(frozen=True)
class GbsLabel:
    """Canonical (phase bit, flip pattern) name of a GBS basis state. The
    pattern's top bit (last qubit of the block) is always 0."""

    phase_bit: int
    pattern: tuple

    def __post_init__(self):
        if self.phase_bit not in (0, 1):
            raise ValueError("phase bit must be 0 or 1")
        if any(b not in (0, 1) for b in self.pattern):
            raise ValueError("pattern bits must be 0 or 1")
        if self.pattern and self.pattern[-1] != 0:
            raise ValueError("pattern top bit must be 0")


def label_for_message(bits: str) -> GbsLabel:
    """Block message bits -> the GBS label the encode map produces."""
    pattern = tuple(int(b) for b in bits[1:]) + (0,)
    return GbsLabel(int(bits[0]), pattern)


def validate_message(family: StateFamily, message: str) -> str:
    if not isinstance(message, str) or set(message) - {"0", "1"} or not message:
        raise ValueError("message must be a nonempty string of 0s and 1s")
    want = capacity(family)
    if len(message) != want:
        raise ValueError(
            f"message length {len(message)} does not match "
            f"{family.label} capacity {want}"
        )
    return message


def _prepare_block_ops(block: Block) -> list:
    ops = [GateOp(H, (block.data[0],))]
    for a, b in zip(block.data, block.data[1:]):
        ops.append(GateOp(CX, (a, b)))
    return ops


def _encode_block_ops(block: Block, bits: str) -> list:
    ops = []
    q0 = block.data[0]
    if bits[0] == "1":
        ops.append(GateOp(Z, (q0,)))
    if bits[1] == "1":
        ops.append(GateOp(X, (q0,)))
    for j, bit in enumerate(bits[2:], start=1):
        if bit == "1":
            ops.append(GateOp(X, (block.data[j],)))
    return ops


def _decode_block_message(bits: str) -> str:
    # invert the readout permutation: r0 = b1, r_j = b_{j+1} xor b_{j+2},
    # r_last = b_last
    k = len(bits)
    out = [0] * k
    out[0] = int(bits[0])
    out[k - 1] = int(bits[k - 1])
    for j in range(k - 2, 0, -1):
        out[j] = int(bits[j]) ^ out[j + 1]
    return "".join(str(b) for b in out)


def _data_registry(family: StateFamily, owner_map) -> tuple:
    return tuple(
        QubitRef(q, Role.DATA, owner_map(q)) for q in range(family.num_data_qubits)
    )


def prepare(family: StateFamily) -> Circuit:
    """Entangled resource preparation, one H + CX chain per block. All data
    qubits start with the preparer (Charlie)."""
    ops = []
    for block in family.blocks:
        ops.extend(_prepare_block_ops(block))
    registry = _data_registry(family, lambda q: Party.CHARLIE)
    return Circuit(registry, ops, {"family": family.label})


def _distributed_owner(family: StateFamily):
    bob = set(family.bob_data_qubits)
    return lambda q: Party.BOB if q in bob else Party.ALICE


def encode(family: StateFamily, message: str) -> Circuit:
    """Sender-side message encoding on the distributed resource."""
    validate_message(family, message)
    ops = []
    for block in family.blocks:
        ops.extend(_encode_block_ops(block, message[block.message_slice]))
    registry = _data_registry(family, _distributed_owner(family))
    return Circuit(registry, ops, {"family": family.label, "message": message})


def decode_circuit(family: StateFamily) -> Circuit:
    """Receiver-side decoding: the inverse preparation, blockwise."""
    ops = []
    for block in family.blocks:
        for op in reversed(_prepare_block_ops(block)):
            ops.append(op)  # H and CX are self-inverse
    registry = _data_registry(family, lambda q: Party.BOB)
    return Circuit(registry, ops, {"family": family.label})


def decode_message(bitstring: str, family: StateFamily) -> str:
    """Map a decoded data-register readout back to the message bits."""
    if len(bitstring) != family.num_data_qubits or set(bitstring) - {"0", "1"}:
        raise ValueError(
            f"readout must be {family.num_data_qubits} bits of 0/1, got {bitstring!r}"
        )
    parts = []
    for block in family.blocks:
        lo, hi = block.data[0], block.data[-1]
        parts.append(_decode_block_message(bitstring[lo:hi + 1]))
    return "".join(parts)


def expected_readout(family: StateFamily, message: str) -> str:
    """The data-register basis readout a perfect run produces."""
    validate_message(family, message)
    out = []
    for block in family.blocks:
        bits = [int(c) for c in message[block.message_slice]]
        k = len(bits)
        r = [bits[0]] + [bits[j] ^ bits[j + 1] for j in range(1, k - 1)] + [bits[-1]]
        out.append("".join(str(b) for b in r))
    return "".join(out)


def encoded_state(family: StateFamily, message: str) -> StateVector:
    """Convenience: the post-encode pure state on the data register."""
    from .circuit import compose, simulate

    return simulate(compose(prepare(family), encode(family, message)))
