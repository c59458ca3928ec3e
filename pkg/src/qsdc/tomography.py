"""Pauli-basis state tomography of a qubit register.

Measurement settings are the 3^n strings over {X, Y, Z}; each qubit's
pre-measurement rotation maps its chosen axis onto the computational one
(X: H; Y: Phase(-pi/2) then H; Z: nothing). Reconstruction is linear
inversion: every one of the 4^n Pauli expectations is estimated by
averaging over all settings compatible with it (identity positions
marginalize out), the raw matrix is rho = 2^-n sum <P> P, and a final
eigenvalue clipping projects onto the positive unit-trace cone. Targets a
register inside a larger state, so decoded data qubits can be reconstructed
while ancillas stay in place.
"""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    StateVector,
    _apply_1q,
    fidelity,
    key_to_index,
    pauli_expectation,
    sample,
)
from .core import H as _H
from .core import phase as _phase

MAX_TOMOGRAPHY_QUBITS = 5

_AXES = "XYZ"
_ROTATIONS = {
    "X": (_H.matrix(),),
    "Y": (_phase(-np.pi / 2).matrix(), _H.matrix()),
    "Z": (),
}


def tomography_settings(n: int) -> list:
    """All 3^n measurement settings, lexicographic; setting[i] is the axis
    measured on register position i."""
    if n < 1 or n > MAX_TOMOGRAPHY_QUBITS:
        raise ValueError(
            f"tomography supports 1..{MAX_TOMOGRAPHY_QUBITS} qubits, got {n}"
        )
    return ["".join(t) for t in itertools.product(_AXES, repeat=n)]


def _rotated_probs(state: StateVector, qubits, setting: str) -> np.ndarray:
    amps = state.amplitudes.copy()
    for pos, axis in enumerate(setting):
        for mat in _ROTATIONS[axis]:
            _apply_1q(amps, qubits[pos], mat)
    return np.abs(amps) ** 2


def collect_counts(state: StateVector, qubits, shots: int, seed,
                   max_workers: int = 1) -> dict:
    """Sample every setting on the given register positions.

    Per-setting seeds come from one spawned SeedSequence, so results are
    deterministic for any max_workers value; aggregation follows setting
    order regardless of scheduling.
    """
    qubits = tuple(int(q) for q in qubits)
    settings = tomography_settings(len(qubits))
    children = np.random.SeedSequence(seed).spawn(len(settings))

    def one(idx):
        # sampling touches probabilities only, so the phase-free sqrt
        # state stands in for the rotated state
        rotated = StateVector(
            np.sqrt(_rotated_probs(state, qubits, settings[idx])).astype(complex)
        )
        return sample(rotated, shots, children[idx], qubits=qubits).counts

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, range(len(settings))))
    else:
        results = [one(i) for i in range(len(settings))]
    return dict(zip(settings, results))


def _parity_signs(dim: int, mask: int) -> np.ndarray:
    return np.array([-1.0 if bin(i & mask).count("1") & 1 else 1.0
                     for i in range(dim)])


def _setting_distributions(counts: dict) -> tuple:
    """Validated per-setting outcome distributions plus the smallest
    per-setting shot total."""
    if not counts:
        raise ValueError("no settings provided")
    n = len(next(iter(counts)))
    expected = tomography_settings(n)
    missing = [s for s in expected if s not in counts]
    if missing:
        raise ValueError(f"missing setting(s): {missing[:5]}")
    dim = 1 << n
    vectors = {}
    shots_seen = []
    for setting in expected:
        vec = np.zeros(dim)
        for key, c in counts[setting].items():
            if c < 0:
                raise ValueError("negative count")
            vec[key_to_index(key)] += c
        total = vec.sum()
        if total < 1:
            raise ValueError(f"setting {setting} has no shots")
        shots_seen.append(int(total))
        vectors[setting] = vec / total
    return vectors, min(shots_seen)


def expectations_from_counts(counts: dict) -> dict:
    """Estimate all 4^n Pauli expectations from per-setting counts.

    counts maps each setting string to {bitstring: count} with the
    register's position 0 leftmost in the keys. Every setting must be
    present with at least one shot; identity positions are estimated by
    averaging over every compatible setting.
    """
    vectors, _ = _setting_distributions(counts)
    n = len(next(iter(vectors)))
    dim = 1 << n
    settings = tomography_settings(n)

    sign_cache = {}
    out = {}
    for pauli in itertools.product("IXYZ", repeat=n):
        p = "".join(pauli)
        support = [i for i, c in enumerate(p) if c != "I"]
        if not support:
            out[p] = 1.0
            continue
        mask = sum(1 << i for i in support)
        if mask not in sign_cache:
            sign_cache[mask] = _parity_signs(dim, mask)
        signs = sign_cache[mask]
        acc = 0.0
        matches = 0
        for setting in settings:
            if all(setting[i] == p[i] for i in support):
                acc += float(signs @ vectors[setting])
                matches += 1
        out[p] = acc / matches
    return out


def exact_expectations(state: StateVector, qubits=None) -> dict:
    """Infinite-shot expectations of the register's reduced state."""
    if qubits is None:
        qubits = tuple(range(state.num_qubits))
    qubits = tuple(int(q) for q in qubits)
    n = len(qubits)
    if n > MAX_TOMOGRAPHY_QUBITS:
        raise ValueError(f"register too large ({n} > {MAX_TOMOGRAPHY_QUBITS})")
    out = {}
    for pauli in itertools.product("IXYZ", repeat=n):
        p = "".join(pauli)
        full = ["I"] * state.num_qubits
        for pos, q in enumerate(qubits):
            full[q] = p[pos]
        out[p] = pauli_expectation(state, "".join(full))
    return out


_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def rho_from_expectations(expectations: dict) -> np.ndarray:
    """Raw linear-inversion matrix 2^-n sum <P> P; may have small negative
    eigenvalues before projection."""
    n = len(next(iter(expectations)))
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    for p, value in expectations.items():
        mat = np.array([[1.0]], dtype=complex)
        # register position 0 is the least significant index bit
        for c in reversed(p):
            mat = np.kron(mat, _PAULI_MATS[c])
        rho += value * mat
    return rho / dim


def project_density(matrix: np.ndarray) -> DensityMatrix:
    """Nearest positive-semidefinite unit-trace matrix: Hermitize, clip
    negative eigenvalues, renormalize."""
    herm = (matrix + matrix.conj().T) / 2
    vals, vecs = np.linalg.eigh(herm)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise ValueError("matrix has no positive weight")
    vals /= total
    return DensityMatrix((vecs * vals) @ vecs.conj().T)


@dataclass(frozen=True)
class TomographyResult:
    rho: DensityMatrix
    fidelity_vs_ideal: float | None
    settings_used: int
    shots_per_setting: int

    def to_dict(self) -> dict:
        mat = self.rho.matrix
        return {
            "num_qubits": self.rho.num_qubits,
            "settings_used": self.settings_used,
            "shots_per_setting": self.shots_per_setting,
            "fidelity_vs_ideal": self.fidelity_vs_ideal,
            "rho_re": [[float(v) for v in row] for row in mat.real],
            "rho_im": [[float(v) for v in row] for row in mat.imag],
        }


def reconstruct(counts: dict, ideal: StateVector | None = None) -> TomographyResult:
    """Linear inversion plus projection from per-setting counts."""
    _, shots_per_setting = _setting_distributions(counts)
    expectations = expectations_from_counts(counts)
    rho = project_density(rho_from_expectations(expectations))
    fid = None if ideal is None else fidelity(rho, ideal)
    return TomographyResult(
        rho=rho,
        fidelity_vs_ideal=fid,
        settings_used=len(counts),
        shots_per_setting=shots_per_setting,
    )


def reconstruct_exact(state: StateVector, qubits=None,
                      ideal: StateVector | None = None) -> TomographyResult:
    """Infinite-shot reconstruction of the register's reduced state."""
    expectations = exact_expectations(state, qubits)
    rho = project_density(rho_from_expectations(expectations))
    fid = None if ideal is None else fidelity(rho, ideal)
    return TomographyResult(
        rho=rho,
        fidelity_vs_ideal=fid,
        settings_used=3 ** len(next(iter(expectations))),
        shots_per_setting=0,
    )


def write_json(result: TomographyResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(result: TomographyResult, path) -> None:
    """Row-major rho entries: row, col, re, im."""
    mat = result.rho.matrix
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                writer.writerow([i, j, repr(float(mat[i, j].real)),
                                 repr(float(mat[i, j].imag))])
