"""Automated, measurement-free error correction for superdense coding.

The pipeline protects each GBS block with three kinds of helper qubits:

  phase ancilla      written by the sender before transmission, ends up
                     holding the block's encoded sign bit
  parity ancillas    one per adjacent data-qubit pair, holding the encoded
                     pair parities
  fresh ancilla      receiver-local, absorbs any arbitrary relative phase

Stages, in fixed order once errors have struck the transmitted qubits:

  1. sender phase discrimination   H on the phase ancilla, CX fan-out onto
                                   the sender's data qubits
  2. sender parity discrimination  CX pairs into the parity ancillas; the
                                   last ancilla gets only its first CX
  3. receiver completion           CX(phase -> last data) then H(phase),
                                   plus CX(last data -> last parity)
  4. arbitrary phase correction    moves any relative phase, sign included,
                                   onto the fresh ancilla
  5. phase flip restoration        comparison tail (H, CX fan-out, H) on the
                                   phase ancilla, then CZ onto the last data
                                   qubit; restores the encoded sign for any
                                   incoming sign
  6. bit flip correction           parity recomputation and conditional
                                   flips, aligning every qubit to qubit 0

Step 3 runs CX before H: the reversed order leaves the phase ancilla
entangled and misreads every odd-sign state. Step 5 runs its comparison
tail before the CZ: with the CZ first, a sign error arriving on a block
whose encoded sign bit is 0 is never repaired. Both orderings are recorded
in circuit metadata. Correction is exact for any combination of bit flips,
sign flips, and arbitrary diagonal phase errors on transmitted data qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Circuit,
    ErrorMarker,
    GateOp,
    Party,
    QubitRef,
    Role,
    TransferEvent,
    simulate,
)
from .core import CX, CZ, H, StateVector, key_to_index
from .protocol import (
    StateFamily,
    decode_circuit,
    decode_message,
    encode,
    expected_readout,
    prepare,
    validate_message,
)

STEP_ORDER_NOTES = {
    "discrimination_completion": "cx_before_h",
    "phase_restoration": "comparison_tail_before_cz",
}


@dataclass(frozen=True)
class ChannelError:
    """One channel error event. qubit is a data-qubit index of the family."""

    qubit: int
    kind: str
    theta: float | None = None

    def __post_init__(self):
        ErrorMarker(self.qubit, self.kind, self.theta)  # reuse validation

    def marker(self) -> ErrorMarker:
        return ErrorMarker(self.qubit, self.kind, self.theta)

    def describe(self) -> str:
        if self.kind == "phase_shift":
            return f"phase_shift({self.theta:g})@{self.qubit}"
        return f"{self.kind}@{self.qubit}"


@dataclass(frozen=True)
class ChannelErrorSpec:
    """Ordered channel error events; targets must be transmitted data
    qubits (the sender-held qubits of each block), never ancillas and never
    the receiver's qubit."""

    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def validate_for(self, family: StateFamily) -> None:
        allowed = set(family.alice_data_qubits)
        for ev in self.events:
            if ev.qubit not in allowed:
                raise ValueError(
                    f"error target q{ev.qubit} is not a transmitted data qubit "
                    f"of {family.label} (allowed: {sorted(allowed)})"
                )

    def kinds(self) -> set:
        return {ev.kind for ev in self.events}

    def describe(self) -> str:
        return "+".join(ev.describe() for ev in self.events) or "none"


@dataclass(frozen=True)
class StageSelection:
    arbitrary_phase: bool = False
    phase_flip: bool = False
    bit_flip: bool = False

    @classmethod
    def all(cls) -> "StageSelection":
        return cls(True, True, True)

    @classmethod
    def none(cls) -> "StageSelection":
        return cls()

    @classmethod
    def matching(cls, spec: ChannelErrorSpec) -> "StageSelection":
        """Smallest stage set that corrects the given error kinds. An
        arbitrary phase shift folds the encoded sign into the fresh
        ancilla, so its correction always needs the sign restoration
        stage as well."""
        kinds = spec.kinds()
        return cls(
            arbitrary_phase="phase_shift" in kinds,
            phase_flip="phase_shift" in kinds or "phase_flip" in kinds,
            bit_flip="bit_flip" in kinds,
        )

    @property
    def any(self) -> bool:
        return self.arbitrary_phase or self.phase_flip or self.bit_flip

    def names(self) -> tuple:
        out = []
        if self.arbitrary_phase:
            out.append("arbitrary_phase")
        if self.phase_flip:
            out.append("phase_flip")
        if self.bit_flip:
            out.append("bit_flip")
        return tuple(out)

    @classmethod
    def from_names(cls, names) -> "StageSelection":
        valid = {"arbitrary_phase", "phase_flip", "bit_flip"}
        chosen = set(names)
        unknown = chosen - valid
        if unknown:
            raise ValueError(f"unknown stage name(s): {sorted(unknown)}")
        return cls(*(stage in chosen for stage in
                     ("arbitrary_phase", "phase_flip", "bit_flip")))


@dataclass(frozen=True)
class AncillaBudget:
    """Per-block helper-qubit counts: 1 phase + (size-1) parity + 1 fresh."""

    phase_count: int
    parity_count: int
    fresh_count: int

    @classmethod
    def for_block_size(cls, size: int) -> "AncillaBudget":
        return cls(1, size - 1, 1)

    @classmethod
    def for_family(cls, family: StateFamily) -> "AncillaBudget":
        sizes = family.block_sizes
        return cls(len(sizes), sum(s - 1 for s in sizes), len(sizes))

    @property
    def total(self) -> int:
        return self.phase_count + self.parity_count + self.fresh_count


@dataclass(frozen=True)
class BlockLayout:
    """Global qubit indices of one protected block."""

    data: tuple
    phase: int
    parities: tuple
    fresh: int

    @property
    def alice_data(self) -> tuple:
        return self.data[:-1]

    @property
    def bob_data(self) -> int:
        return self.data[-1]


def family_layout(family: StateFamily) -> tuple:
    """Block layouts for the full AEC pipeline: data qubits first (block
    order), then each block's phase, parity, and fresh ancillas."""
    layouts = []
    cursor = family.num_data_qubits
    for block in family.blocks:
        size = block.size
        phase_q = cursor
        parities = tuple(range(cursor + 1, cursor + size))
        fresh = cursor + size
        cursor += size + 1
        layouts.append(BlockLayout(block.data, phase_q, parities, fresh))
    return tuple(layouts)


# Per-block op builders. Data qubits are indexed block.data[0..k-1]; the
# receiver holds data[-1]. parities[i] guards the adjacent pair
# (data[i], data[i+1]).

def _phase_discrimination_ops(block: BlockLayout) -> list:
    ops = [GateOp(H, (block.phase,))]
    for q in block.alice_data:
        ops.append(GateOp(CX, (block.phase, q)))
    return ops


def _parity_discrimination_ops(block: BlockLayout) -> list:
    ops = []
    data = block.data
    for i in range(len(data) - 2):
        ops.append(GateOp(CX, (data[i], block.parities[i])))
        ops.append(GateOp(CX, (data[i + 1], block.parities[i])))
    # last parity ancilla gets only its first CX; the receiver completes it
    ops.append(GateOp(CX, (data[-2], block.parities[-1])))
    return ops


def _completion_ops(block: BlockLayout) -> list:
    return [
        GateOp(CX, (block.phase, block.bob_data)),
        GateOp(H, (block.phase,)),
        GateOp(CX, (block.bob_data, block.parities[-1])),
    ]


def _arbitrary_phase_ops(block: BlockLayout) -> list:
    ops = [GateOp(H, (block.fresh,))]
    for q in block.data:
        ops.append(GateOp(CX, (block.fresh, q)))
    ops.append(GateOp(CX, (block.bob_data, block.fresh)))
    return ops


def _phase_flip_ops(block: BlockLayout) -> list:
    ops = [GateOp(H, (block.phase,))]
    for q in block.data:
        ops.append(GateOp(CX, (block.phase, q)))
    ops.append(GateOp(H, (block.phase,)))
    ops.append(GateOp(CZ, (block.phase, block.bob_data)))
    return ops


def _bit_flip_ops(block: BlockLayout) -> list:
    ops = []
    data = block.data
    for i in range(len(data) - 1):
        p = block.parities[i]
        ops.append(GateOp(CX, (data[i], p)))
        ops.append(GateOp(CX, (data[i + 1], p)))
        ops.append(GateOp(CX, (p, data[i + 1])))
    return ops


# Single-block circuits on the standard layout: data 0..N-1, phase N,
# parities N+1..2N-1, fresh 2N. Ownership matches each step's context.

def _single_block_layout(n: int) -> BlockLayout:
    if n < 2:
        raise ValueError("block size must be >= 2")
    return BlockLayout(
        data=tuple(range(n)),
        phase=n,
        parities=tuple(range(n + 1, 2 * n)),
        fresh=2 * n,
    )


def _single_block_registry(n: int, owner_of) -> tuple:
    block = _single_block_layout(n)
    refs = []
    for q in block.data:
        refs.append(QubitRef(q, Role.DATA, owner_of(q)))
    refs.append(QubitRef(block.phase, Role.PHASE_ANCILLA, owner_of(block.phase)))
    for q in block.parities:
        refs.append(QubitRef(q, Role.PARITY_ANCILLA, owner_of(q)))
    refs.append(QubitRef(block.fresh, Role.CORRECTION_ANCILLA, owner_of(block.fresh)))
    return tuple(refs)


def _sender_side_registry(n: int) -> tuple:
    block = _single_block_layout(n)

    def owner(q):
        if q == block.bob_data or q == block.fresh:
            return Party.BOB
        return Party.ALICE

    return _single_block_registry(n, owner)


def _receiver_side_registry(n: int) -> tuple:
    return _single_block_registry(n, lambda q: Party.BOB)


def alice_phase_discrimination(n: int) -> Circuit:
    """Stage 1: H on the phase ancilla, then CX onto each sender qubit."""
    block = _single_block_layout(n)
    return Circuit(_sender_side_registry(n), _phase_discrimination_ops(block),
                   {"stage": "phase_discrimination"})


def alice_parity_discrimination(n: int) -> Circuit:
    """Stage 2: copy adjacent pair parities; leave the last one incomplete."""
    block = _single_block_layout(n)
    return Circuit(_sender_side_registry(n), _parity_discrimination_ops(block),
                   {"stage": "parity_discrimination"})


def bob_complete_discrimination(n: int) -> Circuit:
    """Stage 3: finish both discriminations. After this the phase and parity
    ancillas are definite bits holding the pre-error encoded values."""
    block = _single_block_layout(n)
    return Circuit(
        _receiver_side_registry(n), _completion_ops(block),
        {"stage": "discrimination_completion",
         "discrimination_completion": STEP_ORDER_NOTES["discrimination_completion"]},
    )


def bob_arbitrary_phase_correction(n: int) -> Circuit:
    """Stage 4: fold any relative phase on the block into the fresh ancilla,
    leaving the data register in the plus-sign GBS family."""
    block = _single_block_layout(n)
    return Circuit(_receiver_side_registry(n), _arbitrary_phase_ops(block),
                   {"stage": "arbitrary_phase_correction"})


def bob_phase_flip_correction(n: int) -> Circuit:
    """Stage 5: restore the encoded sign from the phase ancilla."""
    block = _single_block_layout(n)
    return Circuit(
        _receiver_side_registry(n), _phase_flip_ops(block),
        {"stage": "phase_flip_correction",
         "phase_restoration": STEP_ORDER_NOTES["phase_restoration"]},
    )


def bob_bit_flip_correction(n: int) -> Circuit:
    """Stage 6: recompute pair parities against the stored ones and flip
    mismatched qubits, aligning the block to its first qubit."""
    block = _single_block_layout(n)
    return Circuit(_receiver_side_registry(n), _bit_flip_ops(block),
                   {"stage": "bit_flip_correction"})


def inject_errors(spec: ChannelErrorSpec, family: StateFamily) -> Circuit:
    """The channel segment: symbolic error markers on transmitted qubits."""
    spec.validate_for(family)
    registry = tuple(
        QubitRef(q, Role.DATA,
                 Party.CHANNEL if q in set(family.alice_data_qubits) else Party.BOB)
        for q in range(family.num_data_qubits)
    )
    return Circuit(registry, tuple(ev.marker() for ev in spec.events),
                   {"family": family.label, "segment": "channel"})


def _pipeline_registry(family: StateFamily, layouts, with_ancillas: bool) -> tuple:
    refs = [QubitRef(q, Role.DATA, Party.CHARLIE)
            for q in range(family.num_data_qubits)]
    if with_ancillas:
        for block in layouts:
            refs.append(QubitRef(block.phase, Role.PHASE_ANCILLA, Party.ALICE))
            for q in block.parities:
                refs.append(QubitRef(q, Role.PARITY_ANCILLA, Party.ALICE))
            refs.append(QubitRef(block.fresh, Role.CORRECTION_ANCILLA, Party.BOB))
    return tuple(sorted(refs, key=lambda r: r.index))


def assemble_pipeline(family: StateFamily, message: str,
                      spec: ChannelErrorSpec | None = None,
                      stages: StageSelection | None = None) -> Circuit:
    """The full protocol circuit: prepare, distribute, encode, sender
    discrimination, transfer out, channel errors, transfer in, receiver
    completion, the selected correction stages, decode.

    With no stages selected this is plain superdense coding (no ancillas).
    With any stage selected, every block carries its full ancilla budget
    and both discriminations always run.
    """
    spec = spec or ChannelErrorSpec()
    stages = stages or StageSelection.none()
    validate_message(family, message)
    spec.validate_for(family)

    layouts = family_layout(family)
    with_ancillas = stages.any
    registry = _pipeline_registry(family, layouts, with_ancillas)

    alice_data = tuple(family.alice_data_qubits)
    bob_data = tuple(family.bob_data_qubits)

    ops = []
    ops.extend(prepare(family).ops)
    ops.append(TransferEvent(alice_data, Party.CHARLIE, Party.ALICE))
    ops.append(TransferEvent(bob_data, Party.CHARLIE, Party.BOB))
    ops.extend(encode(family, message).ops)

    if with_ancillas:
        for block in layouts:
            ops.extend(_phase_discrimination_ops(block))
            ops.extend(_parity_discrimination_ops(block))
        transmitted = alice_data + tuple(
            q for block in layouts for q in (block.phase,) + block.parities
        )
    else:
        transmitted = alice_data

    ops.append(TransferEvent(transmitted, Party.ALICE, Party.CHANNEL))
    ops.extend(ev.marker() for ev in spec.events)
    ops.append(TransferEvent(transmitted, Party.CHANNEL, Party.BOB))

    if with_ancillas:
        for block in layouts:
            ops.extend(_completion_ops(block))
        if stages.arbitrary_phase:
            for block in layouts:
                ops.extend(_arbitrary_phase_ops(block))
        if stages.phase_flip:
            for block in layouts:
                ops.extend(_phase_flip_ops(block))
        if stages.bit_flip:
            for block in layouts:
                ops.extend(_bit_flip_ops(block))

    ops.extend(decode_circuit(family).ops)

    metadata = {
        "family": family.label,
        "message": message,
        "errors": spec.describe(),
        "stages": list(stages.names()),
    }
    if with_ancillas:
        metadata.update(STEP_ORDER_NOTES)
    return Circuit(registry, ops, metadata)


DEFAULT_PHASE_THETA = np.pi / 3


def error_grid(family: StateFamily, thetas=(DEFAULT_PHASE_THETA,),
               include_none: bool = True) -> list:
    """The canonical sweep grid: (label, ChannelErrorSpec) pairs.

    Covers the error-free case, every single error kind on every
    transmitted qubit, the stacked flip+sign+phase combination per qubit,
    and, when three or more qubits are transmitted, rotations of the three
    kinds across distinct qubits.
    """
    thetas = tuple(float(t) for t in thetas)
    if not thetas:
        raise ValueError("need at least one phase angle")
    qubits = tuple(family.alice_data_qubits)
    grid = []
    if include_none:
        grid.append(("none", ChannelErrorSpec()))
    for q in qubits:
        grid.append((f"bit_flip@{q}", ChannelErrorSpec((
            ChannelError(q, "bit_flip"),))))
        grid.append((f"phase_flip@{q}", ChannelErrorSpec((
            ChannelError(q, "phase_flip"),))))
        for theta in thetas:
            grid.append((f"phase_shift({theta:g})@{q}", ChannelErrorSpec((
                ChannelError(q, "phase_shift", theta),))))
    for q in qubits:
        for theta in thetas:
            spec = ChannelErrorSpec((
                ChannelError(q, "bit_flip"),
                ChannelError(q, "phase_flip"),
                ChannelError(q, "phase_shift", theta),
            ))
            grid.append((f"combined({theta:g})@{q}", spec))
    if len(qubits) >= 3:
        kinds = ("bit_flip", "phase_flip", "phase_shift")
        for offset in range(3):
            targets = qubits[:3]
            events = []
            for i, q in enumerate(targets):
                kind = kinds[(i + offset) % 3]
                theta = thetas[0] if kind == "phase_shift" else None
                events.append(ChannelError(q, kind, theta))
            spec = ChannelErrorSpec(tuple(events))
            grid.append((f"spread[{'+'.join(e.describe() for e in events)}]", spec))
    return grid


@dataclass(frozen=True)
class BlockSyndrome:
    phase_syndrome: int | None
    parity_syndromes: tuple


@dataclass(frozen=True)
class SyndromeRecord:
    """Informational ancilla readout after the pipeline; never used for
    control flow (the protocol is measurement-free)."""

    blocks: tuple = ()

    def describe(self) -> str:
        parts = []
        for blk in self.blocks:
            phi = "?" if blk.phase_syndrome is None else str(blk.phase_syndrome)
            par = "".join("?" if p is None else str(p)
                          for p in blk.parity_syndromes)
            parts.append(f"phi={phi},p={par}")
        return "|".join(parts) or "none"


BIT_READ_ATOL = 1e-9


def read_bit(state: StateVector, qubit: int) -> int | None:
    """The definite computational value of one qubit, or None if the qubit
    is not (numerically) in a basis state."""
    probs = state.probabilities()
    idx = np.arange(probs.size)
    p1 = float(probs[(idx >> qubit) & 1 == 1].sum())
    if p1 < BIT_READ_ATOL:
        return 0
    if p1 > 1.0 - BIT_READ_ATOL:
        return 1
    return None


def extract_syndromes(state: StateVector, family: StateFamily,
                      stages: StageSelection) -> SyndromeRecord:
    if not stages.any:
        return SyndromeRecord(())
    blocks = []
    for block in family_layout(family):
        blocks.append(BlockSyndrome(
            phase_syndrome=read_bit(state, block.phase),
            parity_syndromes=tuple(read_bit(state, q) for q in block.parities),
        ))
    return SyndromeRecord(tuple(blocks))


@dataclass(frozen=True)
class PipelineResult:
    circuit: Circuit
    final_state: StateVector
    data_qubits: tuple
    decoded: str
    overlap: float
    syndromes: SyndromeRecord
    success: bool = field(default=False)


def run_pipeline(family: StateFamily, message: str,
                 spec: ChannelErrorSpec | None = None,
                 stages: StageSelection | None = None) -> PipelineResult:
    """Assemble, simulate, and decode one noiseless pipeline run.

    overlap is |<expected basis state | data register>|, i.e. the square
    root of the probability of the correct readout.
    """
    spec = spec or ChannelErrorSpec()
    stages = stages or StageSelection.none()
    circuit = assemble_pipeline(family, message, spec, stages)
    state = simulate(circuit)
    data_qubits = tuple(range(family.num_data_qubits))

    probs = state.probabilities()
    idx = np.arange(probs.size)
    sub = np.zeros_like(idx)
    for j, q in enumerate(data_qubits):
        sub |= ((idx >> q) & 1) << j
    marginal = np.bincount(sub, weights=probs, minlength=1 << len(data_qubits))
    best = int(np.argmax(marginal))
    readout = "".join(str((best >> j) & 1) for j in range(len(data_qubits)))
    decoded = decode_message(readout, family)
    want = key_to_index(expected_readout(family, message))
    amp = float(np.sqrt(marginal[want]))
    syndromes = extract_syndromes(state, family, stages)
    return PipelineResult(
        circuit=circuit,
        final_state=state,
        data_qubits=data_qubits,
        decoded=decoded,
        overlap=amp,
        syndromes=syndromes,
        success=decoded == message and amp >= 1.0 - 1e-9,
    )
