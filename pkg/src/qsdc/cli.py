"""Scenario-driven experiment runner.

Two subcommands:

  run <scenario.json>   execute one protocol scenario: histogram JSON (plus
                        a rendered PNG), optional tomography JSON/CSV/PNG
  sweep --family F      run the canonical message-by-error grid for a
                        family and write a summary CSV (plus a PNG)

Exit codes: 0 success, 2 scenario or argument validation failure, 3
internal error. Messages go to standard error. QSDC_THREADS caps the
number of worker threads used for tomography settings. Outputs under the
same seed are byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aec import (
    ChannelError,
    ChannelErrorSpec,
    StageSelection,
    assemble_pipeline,
    error_grid,
    run_pipeline,
)
from .circuit import Circuit, GateOp, simulate
from .core import H, StateVector, key_to_index, phase, sample
from .noise import NoiseConfig, builtin_profile, load_profile, noisy_simulate
from .protocol import (
    StateFamily,
    capacity,
    decode_message,
    expected_readout,
    validate_message,
)
from .tomography import (
    TomographyResult,
    collect_counts,
    reconstruct,
    tomography_settings,
    write_csv,
    write_json,
)

SCENARIO_VERSION = 1


def _threads() -> int:
    raw = os.environ.get("QSDC_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"QSDC_THREADS must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Scenario:
    family: StateFamily
    message: str
    errors: ChannelErrorSpec
    stages: StageSelection
    shots: int
    seed: int
    noise_profile: str | None
    qubit_assignment: dict | None
    histogram_name: str
    tomography: bool


def _parse_stages(raw, errors: ChannelErrorSpec) -> StageSelection:
    if raw is None or raw == "matching":
        return StageSelection.matching(errors)
    if raw == "all":
        return StageSelection.all()
    if raw == "none":
        return StageSelection.none()
    if isinstance(raw, list):
        return StageSelection.from_names(raw)
    raise ValueError(
        "stages must be 'matching', 'all', 'none', or a list of stage names"
    )


def _parse_errors(raw) -> ChannelErrorSpec:
    if raw is None:
        return ChannelErrorSpec()
    if not isinstance(raw, list):
        raise ValueError("errors must be a list of objects")
    events = []
    for item in raw:
        if not isinstance(item, dict):
            raise ValueError("each error must be an object")
        unknown = set(item) - {"qubit", "kind", "theta"}
        if unknown:
            raise ValueError(f"unknown error field(s): {sorted(unknown)}")
        if "qubit" not in item or "kind" not in item:
            raise ValueError("each error needs 'qubit' and 'kind'")
        theta = item.get("theta")
        events.append(ChannelError(
            int(item["qubit"]), str(item["kind"]),
            None if theta is None else float(theta),
        ))
    return ChannelErrorSpec(tuple(events))


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"scenario {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ValueError("scenario document must be a JSON object")
    version = data.get("version")
    if version != SCENARIO_VERSION:
        raise ValueError(
            f"unsupported scenario version {version!r} (expected {SCENARIO_VERSION})"
        )
    known = {"version", "family", "message", "errors", "stages", "shots",
             "seed", "noise_profile", "qubit_assignment", "outputs"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown scenario field(s): {sorted(unknown)}")
    if "family" not in data or "message" not in data:
        raise ValueError("scenario needs 'family' and 'message'")

    family = StateFamily.parse(str(data["family"]))
    message = validate_message(family, str(data["message"]))
    errors = _parse_errors(data.get("errors"))
    stages = _parse_stages(data.get("stages"), errors)
    shots = int(data.get("shots", 1024))
    if shots < 1:
        raise ValueError("shots must be >= 1")
    seed = int(data.get("seed", 7))
    noise_profile = data.get("noise_profile")
    assignment = data.get("qubit_assignment")
    if assignment is not None and not isinstance(assignment, dict):
        raise ValueError("qubit_assignment must be an object")

    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ValueError("outputs must be an object")
    unknown = set(outputs) - {"histogram", "tomography"}
    if unknown:
        raise ValueError(f"unknown outputs field(s): {sorted(unknown)}")
    histogram_name = str(outputs.get("histogram", "histogram.json"))
    tomography = bool(outputs.get("tomography", False))

    return Scenario(
        family=family,
        message=message,
        errors=errors,
        stages=stages,
        shots=shots,
        seed=seed,
        noise_profile=None if noise_profile is None else str(noise_profile),
        qubit_assignment=assignment,
        histogram_name=histogram_name,
        tomography=tomography,
    )


def _resolve_profile(value: str, relative_to=None):
    candidates = [Path(value)]
    if relative_to is not None:
        candidates.append(Path(relative_to) / value)
    for cand in candidates:
        if cand.is_file():
            return load_profile(cand)
    if "/" not in value and not value.endswith(".json"):
        return builtin_profile(value)
    raise ValueError(f"noise profile not found: {value}")


def _plurality_decode(counts: dict, family: StateFamily) -> str | None:
    top = max(counts.values())
    winners = [k for k, v in counts.items() if v == top]
    if len(winners) != 1:
        return None
    return decode_message(winners[0], family)


def _rotation_ops(setting: str, qubits) -> list:
    ops = []
    for pos, axis in enumerate(setting):
        q = qubits[pos]
        if axis == "X":
            ops.append(GateOp(H, (q,)))
        elif axis == "Y":
            ops.append(GateOp(phase(-np.pi / 2), (q,)))
            ops.append(GateOp(H, (q,)))
    return ops


def _noisy_tomography_counts(circuit: Circuit, qubits, profile, assignment,
                             shots: int, seed, max_workers: int) -> dict:
    settings = tomography_settings(len(qubits))
    children = np.random.SeedSequence(seed).spawn(len(settings))

    def one(idx):
        rotated = Circuit(
            circuit.registry,
            tuple(circuit.ops) + tuple(_rotation_ops(settings[idx], qubits)),
            circuit.metadata,
        )
        cfg = NoiseConfig(profile, assignment, children[idx])
        return noisy_simulate(rotated, cfg, shots, measure_qubits=qubits).counts

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, range(len(settings))))
    else:
        results = [one(i) for i in range(len(settings))]
    return dict(zip(settings, results))


def _basis_state(num_qubits: int, key: str) -> StateVector:
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[key_to_index(key)] = 1.0
    return StateVector(amps)


def _write_histogram(path, shots: int, counts: dict, decoded) -> None:
    doc = {"shots": shots, "counts": dict(sorted(counts.items())),
           "decoded": decoded}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_command(args) -> int:
    scenario = load_scenario(args.file)
    seed = scenario.seed if args.seed is None else args.seed
    family = scenario.family
    threads = _threads()

    profile = None
    if scenario.noise_profile is not None:
        profile = _resolve_profile(scenario.noise_profile,
                                   relative_to=Path(args.file).parent)

    circuit = assemble_pipeline(family, scenario.message, scenario.errors,
                                scenario.stages)
    data_qubits = tuple(range(family.num_data_qubits))

    if profile is not None:
        cfg = NoiseConfig(profile, scenario.qubit_assignment, seed)
        hist = noisy_simulate(circuit, cfg, scenario.shots,
                              measure_qubits=data_qubits)
        final_state = None
    else:
        final_state = simulate(circuit)
        hist = sample(final_state, scenario.shots, seed, qubits=data_qubits)

    decoded = _plurality_decode(hist.counts, family)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    histogram_path = outdir / scenario.histogram_name
    _write_histogram(histogram_path, hist.shots, hist.counts, decoded)
    written = [histogram_path]

    if not args.no_figures:
        from . import report

        png = histogram_path.with_suffix(".png")
        report.render_histogram(
            hist, png,
            title=f"{family.label} m={scenario.message} "
                  f"errors={scenario.errors.describe()}",
        )
        written.append(png)

    if scenario.tomography:
        if profile is not None:
            counts = _noisy_tomography_counts(
                circuit, data_qubits, profile, scenario.qubit_assignment,
                scenario.shots, seed, threads,
            )
        else:
            counts = collect_counts(final_state, data_qubits, scenario.shots,
                                    seed, max_workers=threads)
        ideal = _basis_state(len(data_qubits),
                             expected_readout(family, scenario.message))
        result = reconstruct(counts, ideal=ideal)
        tomo_json = outdir / "tomography.json"
        tomo_csv = outdir / "tomography.csv"
        write_json(result, tomo_json)
        write_csv(result, tomo_csv)
        written.extend([tomo_json, tomo_csv])
        if not args.no_figures:
            from . import report

            tomo_png = outdir / "tomography.png"
            report.render_tomography(
                result, tomo_png,
                title=f"{family.label} m={scenario.message}",
            )
            written.append(tomo_png)

    print(f"family: {family.label}")
    print(f"message: {scenario.message}")
    print(f"decoded: {decoded if decoded is not None else 'null'}")
    for path in written:
        print(f"wrote: {path}")
    return 0


def sweep_command(args) -> int:
    family = StateFamily.parse(args.family)
    if args.shots < 1:
        raise ValueError("shots must be >= 1")

    profile = None
    if args.noise is not None:
        profile = _resolve_profile(args.noise)

    grid = error_grid(family)
    n_bits = capacity(family)
    messages = [format(m, f"0{n_bits}b") for m in range(1 << n_bits)]
    stages = StageSelection.all()
    data_qubits = tuple(range(family.num_data_qubits))

    rows = []
    good_shots = 0
    total_shots = 0
    case_fid_sum = {label: 0.0 for label, _ in grid}
    seeds = np.random.SeedSequence(args.seed).spawn(len(messages) * len(grid))

    for mi, message in enumerate(messages):
        want_key = expected_readout(family, message)
        for gi, (label, spec) in enumerate(grid):
            if profile is None:
                result = run_pipeline(family, message, spec, stages)
                fid = result.overlap ** 2
                success = result.success
                syndromes = result.syndromes.describe()
                good_shots += fid * args.shots
                total_shots += args.shots
            else:
                circuit = assemble_pipeline(family, message, spec, stages)
                cfg = NoiseConfig(profile, None,
                                  seeds[mi * len(grid) + gi])
                hist = noisy_simulate(circuit, cfg, args.shots,
                                      measure_qubits=data_qubits)
                hits = hist.counts.get(want_key, 0)
                fid = hits / args.shots
                success = _plurality_decode(hist.counts, family) == message
                syndromes = ""
                good_shots += hits
                total_shots += args.shots
            case_fid_sum[label] += fid
            rows.append({
                "family": family.label,
                "message": message,
                "error_case": label,
                "stages": "+".join(stages.names()),
                "shots": args.shots,
                "success": int(success),
                "fidelity": repr(float(fid)),
                "syndromes": syndromes,
            })

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"sweep_{family.label}.csv"
    fields = ["family", "message", "error_case", "stages", "shots",
              "success", "fidelity", "syndromes"]
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)

    rate = good_shots / total_shots
    successes = sum(r["success"] for r in rows)

    written = [csv_path]
    if not args.no_figures:
        from . import report

        case_rates = {label: case_fid_sum[label] / len(messages)
                      for label, _ in grid}
        png = outdir / f"sweep_{family.label}.png"
        report.render_sweep(case_rates, png,
                            title=f"{family.label} sweep, all stages")
        written.append(png)

    print(f"family: {family.label}")
    print(f"rows: {len(rows)}")
    print(f"row successes: {successes}/{len(rows)}")
    print(f"success rate: {rate:.6f}")
    for path in written:
        print(f"wrote: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdc",
        description="Superdense coding with automated error correction: "
                    "scenario runner and sweep tool.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario file")
    run_p.add_argument("file", help="scenario JSON path")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")
    run_p.set_defaults(func=run_command)

    sweep_p = sub.add_parser("sweep", help="run the canonical error grid")
    sweep_p.add_argument("--family", required=True,
                         help="epr, gbsN, or ghz_eprN")
    sweep_p.add_argument("--noise", default=None,
                         help="device profile path or builtin name")
    sweep_p.add_argument("--shots", type=int, default=1024)
    sweep_p.add_argument("--seed", type=int, default=7)
    sweep_p.add_argument("--out", default=".", help="output directory")
    sweep_p.add_argument("--no-figures", action="store_true",
                         help="skip PNG rendering")
    sweep_p.set_defaults(func=sweep_command)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
