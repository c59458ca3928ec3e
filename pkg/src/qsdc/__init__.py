"""qsdc: superdense coding over generalized Bell states with automated,
measurement-free error correction.

The package simulates the full two-party protocol: entangled resource
preparation and distribution, dense-coding encode/decode, non-destructive
state discrimination onto ancillas, channel-error injection, ancilla-driven
correction of bit flips, sign flips, and arbitrary phase errors, plus
device-noise emulation, state tomography, and a scenario CLI.
"""

from .aec import (
    AncillaBudget,
    ChannelError,
    ChannelErrorSpec,
    PipelineResult,
    StageSelection,
    SyndromeRecord,
    alice_parity_discrimination,
    alice_phase_discrimination,
    assemble_pipeline,
    bob_arbitrary_phase_correction,
    bob_bit_flip_correction,
    bob_complete_discrimination,
    bob_phase_flip_correction,
    error_grid,
    extract_syndromes,
    inject_errors,
    run_pipeline,
)
from .circuit import (
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
    inverse,
    locality_check,
    simulate,
)
from .core import (
    CX,
    CZ,
    DensityMatrix,
    Gate,
    H,
    Histogram,
    StateVector,
    X,
    Y,
    Z,
    apply_gate,
    fidelity,
    index_to_key,
    key_to_index,
    new_zero_state,
    overlap,
    partial_trace,
    pauli_expectation,
    phase,
    sample,
)
from .noise import (
    DeviceProfile,
    NoiseConfig,
    PairParams,
    QubitParams,
    builtin_profile,
    load_profile,
    noisy_simulate,
)
from .protocol import (
    StateFamily,
    capacity,
    decode_circuit,
    decode_message,
    encode,
    encoded_state,
    expected_readout,
    prepare,
)
from .tomography import (
    TomographyResult,
    collect_counts,
    reconstruct,
    reconstruct_exact,
    tomography_settings,
)

__version__ = "0.1.0"
