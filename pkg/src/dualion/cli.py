"""Command-line drivers: one subcommand per experiment, CSV/JSON artifacts.

Subcommands::

    plan | rabi | spectrum | gate design | gate simulate |
    readout correct | readout fidelity | protocol detect | chain

Global flags: --config PATH, --seed N, --out DIR.  Exit codes: 0 success,
1 configuration error, 2 domain error, 3 convergence error.  Every run
writes a manifest.json with the config hash, seed and per-file checksums;
identical config and seed reproduce identical output bytes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, chain, dynamics, gate, protocol, readout
from .config import ExperimentConfig, config_hash, load_config, reference_config
from .errors import ConfigError, ConvergenceError, DomainError, DualionError
from .freqplan import solve_awg

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


def _csv_bytes(header, rows) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".12g") if isinstance(v, float) else v for v in row])
    return out.getvalue().encode()


class OutputWriter:
    """Collects artifacts, writes them atomically, removes them on failure."""

    def __init__(self, out_dir: Path, config: ExperimentConfig, seed: int):
        self.out_dir = Path(out_dir)
        self.config = config
        self.seed = seed
        self.pending: list[tuple[str, bytes]] = []

    def add_json(self, name: str, payload) -> None:
        self.pending.append((name, _json_bytes(payload)))

    def add_csv(self, name: str, header, rows) -> None:
        self.pending.append((name, _csv_bytes(header, rows)))

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        try:
            for name, blob in self.pending:
                path = self.out_dir / name
                path.write_bytes(blob)
                written.append(path)
            manifest = {
                "tool": "dualion",
                "version": __version__,
                "config_sha256": config_hash(self.config),
                "seed": self.seed,
                "outputs": [
                    {
                        "name": name,
                        "sha256": hashlib.sha256(blob).hexdigest(),
                        "bytes": len(blob),
                    }
                    for name, blob in self.pending
                ],
            }
            path = self.out_dir / "manifest.json"
            path.write_bytes(_json_bytes(manifest))
            written.append(path)
        except BaseException:
            for path in written:
                path.unlink(missing_ok=True)
            raise
        return written


def _gate_sequence(cfg: ExperimentConfig) -> gate.GateSequence:
    com, roc = cfg.gate_modes
    settings = cfg.gate_settings
    target_chi = settings.pop("target_chi")
    return gate.build_calibrated_sequence(com, roc, target_chi=target_chi, **settings)


# --- subcommand implementations -------------------------------------------


def cmd_plan(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    comb = cfg.comb
    band = cfg.aom_band
    plans = []
    detunings = [0.0]
    for mode in cfg.modes:
        detunings.extend([+mode.frequency, -mode.frequency])
    for label in ("S", "F"):
        species = cfg.species(label)
        pll = cfg.pll_frequency(label)
        sign = cfg.beat_sign(label)
        for det in detunings:
            plan = solve_awg(species, pll, det, sign, comb, band)
            plans.append(plan.to_dict())
    payload = {
        "comb_bandwidth_hz": comb.bandwidth,
        "covers": {
            label: comb.covers(cfg.species(label).splitting) for label in ("S", "F")
        },
        "plans": plans,
    }
    writer.add_json("plans.json", payload)
    for plan in plans:
        print(
            f"{plan['species']} at {plan['detuning_hz'] / 1e6:+.6f} MHz: "
            f"awg {plan['awg_hz'] / 1e6:.6f} MHz "
            f"(pll {plan['pll_hz'] / 1e6:.3f} MHz, tooth {plan['tooth']}, "
            f"sign {plan['beat_sign']})"
        )


def cmd_rabi(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    drive_s = cfg.drive
    ratio = cfg.s_to_f_rabi_ratio
    drive_f = dynamics.DriveParams(
        rabi_rate=drive_s.rabi_rate / ratio,
        detuning=drive_s.detuning,
        duration=drive_s.duration,
        decay_rate=drive_s.decay_rate / ratio,
    )
    t_max = drive_s.duration if drive_s.duration > 0 else 2e-4
    times = np.linspace(0.0, t_max, args.points)
    rows = [
        (
            float(t),
            dynamics.carrier_flip_probability(drive_s, float(t)),
            dynamics.carrier_flip_probability(drive_f, float(t)),
        )
        for t in times
    ]
    writer.add_csv("rabi.csv", ["time_s", "p_flip_s", "p_flip_f"], rows)
    print(f"carrier Rabi curves over {t_max * 1e6:.1f} us ({args.points} points)")


def cmd_spectrum(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    settings = cfg.spectrum_settings
    drive = cfg.drive
    ratio = cfg.s_to_f_rabi_ratio
    if settings["ion_index"] == 1:
        drive = dynamics.DriveParams(
            rabi_rate=drive.rabi_rate / ratio,
            detuning=0.0,
            duration=drive.duration,
            decay_rate=drive.decay_rate / ratio,
        )
    duration = settings["duration_s"] or math.pi / drive.rabi_rate
    span = settings["span_hz"]
    grid = np.linspace(-span, span, settings["points"])
    spectrum = dynamics.scan_spectrum(
        cfg.modes, drive, grid, ion_index=settings["ion_index"], t=duration
    )
    writer.add_csv(
        "spectrum.csv", ["detuning_hz", "flip_probability"], spectrum.to_rows()
    )
    print(
        f"spectrum over +/-{span / 1e6:.3f} MHz at {duration * 1e6:.2f} us probe "
        f"({settings['points']} points)"
    )


def cmd_gate_design(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    seq = _gate_sequence(cfg)
    drive = seq.drive_segments
    tau = drive[0].duration
    n = len(drive)
    gaps = sum(1 for s in seq.segments if s.is_gap)
    gap = next((s.duration for s in seq.segments if s.is_gap), 0.0)
    arcs = {
        m.label.value: seq.mode_detuning(m) * tau for m in seq.modes
    }
    total = seq.total_duration
    writer.add_json("sequence.json", seq.to_json_dict())
    for mode in seq.modes:
        traj = gate.integrate_displacement(seq, mode, samples_per_segment=24)
        writer.add_csv(
            f"trajectory_{mode.label.value}.csv",
            ["time_s", "re_alpha", "im_alpha"],
            [
                (float(t), float(a.real), float(a.imag))
                for t, a in zip(traj.times, traj.alphas)
            ],
        )
    chi = gate.entangling_phase(seq)
    summary = {
        "segment_duration_s": tau,
        "segments": n,
        "gap_s": gap,
        "gaps": gaps,
        "total_duration_s": total,
        "total_duration_with_trailing_gap_s": total + gap,
        "per_segment_arc_rad": arcs,
        "entangling_phase_rad": chi,
        "closure": {
            m.label.value: abs(gate.integrate_displacement(seq, m).final_displacement)
            for m in seq.modes
        },
    }
    writer.add_json("gate_design.json", summary)
    print(
        f"tau = {tau * 1e6:.4f} us, total T = {total * 1e6:.4f} us "
        f"({n} segments + {gaps} gaps of {gap * 1e6:.1f} us; "
        f"{(total + gap) * 1e6:.4f} us counting a trailing gap)"
    )
    print(
        "per-segment arc: "
        + ", ".join(f"{k} {v:+.6f} rad" for k, v in arcs.items())
        + f"; entangling phase {chi:.6f} rad"
    )


def cmd_gate_simulate(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    seq = _gate_sequence(cfg)
    noise = cfg.noise
    if args.shots:
        noise = gate.NoiseModel(
            noise.spin_coherence_time,
            noise.motional_coherence_time,
            args.shots,
            noise.seed,
        )
    result = gate.simulate_gate(seq, noise)
    fit = readout.fit_parity(result.parity_samples())
    pop_even = float(result.populations[0] + result.populations[3])
    fidelity = readout.bell_fidelity(pop_even, fit.contrast)
    writer.add_csv(
        "parity.csv",
        ["analysis_phase_rad", "parity"],
        [(float(p), float(v)) for p, v in result.parity_samples()],
    )
    writer.add_json(
        "gate_simulation.json",
        {
            "shots": noise.shots,
            "populations": result.populations.tolist(),
            "population_even": pop_even,
            "parity_contrast": fit.contrast,
            "parity_phase_offset_rad": fit.phase_offset,
            "bell_fidelity": fidelity,
            "state_fidelity": result.state_fidelity,
            "spin_coherence_time_s": noise.spin_coherence_time,
            "motional_coherence_time_s": noise.motional_coherence_time,
        },
    )
    print(
        f"populations {np.round(result.populations, 4).tolist()}, "
        f"contrast {fit.contrast:.4f}, Bell fidelity {fidelity:.4f} "
        f"({noise.shots} shots)"
    )


def _read_counts_csv(path: str) -> readout.OutcomeDistribution:
    counts = dict.fromkeys(readout.BASIS_LABELS, 0.0)
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("state", ""):
                continue
            state = row[0].strip()
            if state not in counts:
                raise DomainError(
                    f"unknown basis state {state!r} (expected one of {readout.BASIS_LABELS})"
                )
            counts[state] += float(row[1])
    return readout.OutcomeDistribution.from_counts(
        [counts[label] for label in readout.BASIS_LABELS]
    )


def _confusion_from_args(cfg: ExperimentConfig, args) -> readout.ConfusionMatrix:
    if args.confusion:
        return readout.ConfusionMatrix.from_csv(args.confusion)
    from importlib import resources

    bundled = resources.files("dualion.data").joinpath("confusion_reference.csv")
    return readout.ConfusionMatrix.from_csv(bundled.read_text())


def cmd_readout_correct(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    observed = _read_counts_csv(args.counts)
    matrix = _confusion_from_args(cfg, args)
    result = readout.mle_correct(observed, matrix)
    boot = readout.bootstrap_uncertainty(
        observed, matrix, resamples=args.resamples, seed=cfg.seed
    )
    writer.add_json(
        "readout_corrected.json",
        {
            "observed_frequencies": observed.frequencies.tolist(),
            "p": result.probabilities.tolist(),
            "stderr": boot.p_stderr.tolist(),
            "population_even": float(result.probabilities[0] + result.probabilities[3]),
            "population_even_stderr": boot.population_even_stderr,
            "em_iterations": result.iterations,
        },
    )
    print(
        f"corrected p = {np.round(result.probabilities, 5).tolist()} "
        f"({result.iterations} EM iterations)"
    )


def cmd_readout_fidelity(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    observed = _read_counts_csv(args.counts)
    matrix = _confusion_from_args(cfg, args)
    result = readout.mle_correct(observed, matrix)
    parity_rows = []
    with open(args.parity, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                parity_rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                continue  # header or malformed line
    fit = readout.fit_parity(parity_rows)
    pop_even = float(result.probabilities[0] + result.probabilities[3])
    fidelity = readout.bell_fidelity(pop_even, fit.contrast)
    boot = readout.bootstrap_uncertainty(
        observed,
        matrix,
        resamples=args.resamples,
        seed=cfg.seed,
        contrast=fit.contrast,
    )
    writer.add_json(
        "readout_fidelity.json",
        {
            "p": result.probabilities.tolist(),
            "stderr": boot.p_stderr.tolist(),
            "population_even": pop_even,
            "population_even_stderr": boot.population_even_stderr,
            "parity_contrast": fit.contrast,
            "parity_phase_offset_rad": fit.phase_offset,
            "F": fidelity,
            "F_stderr": boot.fidelity_stderr,
        },
    )
    print(
        f"population {pop_even:.4f}, contrast {fit.contrast:.4f}, "
        f"F = {fidelity:.4f} +/- {boot.fidelity_stderr:.4f}"
    )


def cmd_protocol_detect(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    if args.calibrate:
        cal = protocol.calibrate_pulse_errors()
        errors = cal.errors
        calibration = {
            "max_deviation": cal.max_deviation,
            "observables": cal.observables,
            "targets": cal.targets,
        }
    else:
        errors = cfg.pulse_errors
        calibration = None
    rounds = cfg.detection_rounds
    obs = protocol.compute_observables(errors, rounds=rounds)
    matrix = protocol.synthesize_confusion_matrix(
        errors, shots=args.shots, seed=cfg.seed
    )
    report = {
        "pulse_errors": {k: float(v) for k, v in errors.as_dict().items()},
        "rounds": rounds,
        "observables": obs,
        "reference_observables": protocol.REFERENCE_OBSERVABLES,
        "synthesized_diagonal": np.diag(matrix.entries).tolist(),
    }
    if calibration is not None:
        report["calibration"] = calibration
    writer.add_json("protocol_report.json", report)
    writer.pending.append(("confusion_synthesized.csv", matrix.to_csv().encode()))
    print(
        "observables: "
        + ", ".join(f"{k}={v * 100:.3f}%" for k, v in obs.items())
    )


def cmd_chain(cfg: ExperimentConfig, args, writer: OutputWriter) -> None:
    charges = tuple(int(c) for c in args.charges.split(","))
    config = chain.IonChainConfig(charges=charges)
    result = chain.equilibrium_positions(config)
    writer.add_json("chain.json", result.to_report(config))
    positions = ", ".join(f"{z:+.4f}" for z in result.positions)
    print(f"charges {charges}: positions [{positions}] z0 units")


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default=argparse.SUPPRESS,
        help="configuration JSON (default: bundled reference)",
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS,
        help="override the configured random seed",
    )
    common.add_argument(
        "--out", default=argparse.SUPPRESS, help="output directory (default: ./out)"
    )

    parser = argparse.ArgumentParser(
        prog="dualion",
        parents=[common],
        description=(
            "Frequency-comb control planning and desk-scale simulation for a "
            "dual-type trapped-ion qubit pair."
        ),
    )
    parser.add_argument("--version", action="version", version=f"dualion {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser(
        "plan", parents=[common],
        help="solve S/F beat-note plans at carrier and sideband detunings",
    )

    p_rabi = sub.add_parser(
        "rabi", parents=[common],
        help="carrier Rabi oscillation curves for both qubit types",
    )
    p_rabi.add_argument("--points", type=int, default=401)

    sub.add_parser("spectrum", parents=[common], help="carrier and sideband spectrum scan")

    p_gate = sub.add_parser("gate", help="entangling-gate design and simulation")
    gate_sub = p_gate.add_subparsers(dest="gate_command", required=True)
    gate_sub.add_parser(
        "design", parents=[common],
        help="build the phase-modulation sequence and trajectories",
    )
    p_sim = gate_sub.add_parser(
        "simulate", parents=[common], help="Monte Carlo gate run with dephasing noise"
    )
    p_sim.add_argument("--shots", type=int, help="override configured shot count")

    p_read = sub.add_parser("readout", help="confusion-matrix correction and fidelity")
    read_sub = p_read.add_subparsers(dest="readout_command", required=True)
    p_corr = read_sub.add_parser(
        "correct", parents=[common], help="MLE-correct an observed distribution"
    )
    p_corr.add_argument("--counts", required=True, help="CSV of state,count rows")
    p_corr.add_argument("--confusion", help="confusion matrix CSV (default: bundled)")
    p_corr.add_argument("--resamples", type=int, default=1000)
    p_fid = read_sub.add_parser(
        "fidelity", parents=[common], help="population + parity Bell fidelity"
    )
    p_fid.add_argument("--counts", required=True, help="CSV of state,count rows")
    p_fid.add_argument("--parity", required=True, help="CSV of analysis_phase_rad,parity rows")
    p_fid.add_argument("--confusion", help="confusion matrix CSV (default: bundled)")
    p_fid.add_argument("--resamples", type=int, default=1000)

    p_prot = sub.add_parser("protocol", help="preparation/detection protocol model")
    prot_sub = p_prot.add_subparsers(dest="protocol_command", required=True)
    p_det = prot_sub.add_parser(
        "detect", parents=[common],
        help="detection infidelities and synthesized confusion matrix",
    )
    p_det.add_argument("--shots", type=int, default=100000)
    p_det.add_argument("--calibrate", action="store_true", help="refit pulse errors first")

    p_chain = sub.add_parser("chain", parents=[common], help="two-ion equilibrium positions")
    p_chain.add_argument("--charges", default="1,2", help="comma-separated integer charges")

    return parser


_DISPATCH = {
    ("plan",): cmd_plan,
    ("rabi",): cmd_rabi,
    ("spectrum",): cmd_spectrum,
    ("gate", "design"): cmd_gate_design,
    ("gate", "simulate"): cmd_gate_simulate,
    ("readout", "correct"): cmd_readout_correct,
    ("readout", "fidelity"): cmd_readout_fidelity,
    ("protocol", "detect"): cmd_protocol_detect,
    ("chain",): cmd_chain,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config_path = getattr(args, "config", None)
    seed = getattr(args, "seed", None)
    out_dir = getattr(args, "out", "out")
    try:
        cfg = load_config(config_path) if config_path else reference_config()
        if seed is not None:
            raw = dict(cfg.raw)
            raw["seed"] = seed
            cfg = load_config(raw)
        key = (args.command,)
        for attr in ("gate_command", "readout_command", "protocol_command"):
            if getattr(args, attr, None):
                key = (args.command, getattr(args, attr))
        writer = OutputWriter(Path(out_dir), cfg, cfg.seed)
        _DISPATCH[key](cfg, args, writer)
        written = writer.commit()
        print(f"wrote {len(written)} files to {writer.out_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DomainError, DualionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
