"""One shared configuration document for every experiment driver.

The document is plain JSON; ``load_config`` validates it field by field
and reports the exact dotted path of anything wrong.  A reference
configuration with the published experiment's constants ships with the
package (``reference_config()``); every CLI subcommand and demo reads the
same schema.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

from .dynamics import DriveParams, ModeLabel, MotionalMode
from .errors import ConfigError
from .freqplan import AomBand, BeatSign, CombSpec, QubitSpecies
from .gate import NoiseModel
from .protocol import PulseErrors

__all__ = [
    "ExperimentConfig",
    "load_config",
    "reference_config",
    "reference_config_path",
    "config_hash",
]

_MODE_LABELS = {
    "com": ModeLabel.CENTER_OF_MASS,
    "center_of_mass": ModeLabel.CENTER_OF_MASS,
    "rocking": ModeLabel.ROCKING,
}


def _require(doc, path, kind, predicate=None, reason=""):
    node = doc
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"{path}: missing required field")
        node = node[key]
    if kind is float and isinstance(node, bool):
        raise ConfigError(f"{path}: expected a number")
    if kind is float and isinstance(node, (int, float)):
        node = float(node)
    elif not isinstance(node, kind):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {type(node).__name__}")
    if predicate is not None and not predicate(node):
        raise ConfigError(f"{path}: {reason}")
    return node


def _optional(doc, path, default):
    node = doc
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration with typed accessors for each module."""

    raw: dict

    # -- frequency planning -------------------------------------------------
    @property
    def comb(self) -> CombSpec:
        return CombSpec(
            repetition_rate=_require(
                self.raw, "comb.repetition_rate_hz", float, lambda v: v > 0, "must be > 0"
            ),
            pulse_width=_require(
                self.raw, "comb.pulse_width_s", float, lambda v: v > 0, "must be > 0"
            ),
        )

    def species(self, label: str) -> QubitSpecies:
        return QubitSpecies(
            label=label,
            splitting=_require(
                self.raw, f"species.{label}.splitting_hz", float, lambda v: v > 0, "must be > 0"
            ),
            tooth_index=_require(
                self.raw, f"species.{label}.tooth", int, lambda v: v >= 1, "must be >= 1"
            ),
        )

    def pll_frequency(self, label: str) -> float:
        return _require(
            self.raw, f"species.{label}.pll_hz", float, lambda v: v > 0, "must be > 0"
        )

    def beat_sign(self, label: str) -> BeatSign:
        return BeatSign.from_name(
            _require(self.raw, f"species.{label}.beat_sign", str)
        )

    @property
    def aom_band(self) -> AomBand:
        band = _require(
            self.raw, "aom_band_hz", list, lambda v: len(v) == 2, "expected [low, high]"
        )
        return AomBand(float(band[0]), float(band[1]))

    # -- dynamics ------------------------------------------------------------
    @property
    def modes(self) -> list[MotionalMode]:
        entries = _require(self.raw, "modes", list, lambda v: len(v) >= 1, "need >= 1 mode")
        modes = []
        for i, entry in enumerate(entries):
            label = _require({"m": entry}, "m.label", str)
            if label not in _MODE_LABELS:
                raise ConfigError(f"modes[{i}].label: unknown label {label!r}")
            eta = _require({"m": entry}, "m.eta", list, lambda v: len(v) >= 1, "need eta list")
            modes.append(
                MotionalMode(
                    frequency=_require(
                        {"m": entry}, "m.frequency_hz", float, lambda v: v > 0, "must be > 0"
                    ),
                    eta=tuple(float(e) for e in eta),
                    nbar=_require(
                        {"m": entry}, "m.nbar", float, lambda v: v >= 0, "must be >= 0"
                    ),
                    label=_MODE_LABELS[label],
                )
            )
        return modes

    @property
    def drive(self) -> DriveParams:
        return DriveParams(
            rabi_rate=_require(
                self.raw, "drive.rabi_rate_rad_s", float, lambda v: v >= 0, "must be >= 0"
            ),
            detuning=_optional(self.raw, "drive.detuning_hz", 0.0),
            duration=_optional(self.raw, "drive.duration_s", 0.0),
            decay_rate=_optional(self.raw, "drive.decay_rate_s", 0.0),
        )

    @property
    def s_to_f_rabi_ratio(self) -> float:
        return float(_optional(self.raw, "drive.s_to_f_rabi_ratio", 15.0))

    @property
    def spectrum_settings(self) -> dict:
        return {
            "ion_index": int(_optional(self.raw, "spectrum.ion_index", 1)),
            "span_hz": float(_optional(self.raw, "spectrum.span_hz", 2.5e6)),
            "points": int(_optional(self.raw, "spectrum.points", 501)),
            "duration_s": float(_optional(self.raw, "spectrum.duration_s", 0.0)),
        }

    # -- gate ----------------------------------------------------------------
    @property
    def gate_modes(self) -> tuple[MotionalMode, MotionalMode]:
        gate = _require(self.raw, "gate", dict)
        freqs = _require(
            {"g": gate}, "g.mode_frequencies_hz", list, lambda v: len(v) == 2, "need two"
        )
        etas = _optional(gate, "etas", [[0.1, 0.1], [0.1, -0.1]])
        nbars = _optional(gate, "nbars", [0.3, 0.1])
        com = MotionalMode(
            frequency=float(freqs[0]),
            eta=tuple(etas[0]),
            nbar=float(nbars[0]),
            label=ModeLabel.CENTER_OF_MASS,
        )
        roc = MotionalMode(
            frequency=float(freqs[1]),
            eta=tuple(etas[1]),
            nbar=float(nbars[1]),
            label=ModeLabel.ROCKING,
        )
        return com, roc

    @property
    def gate_settings(self) -> dict:
        gate = _require(self.raw, "gate", dict)
        return {
            "n_segments": int(_optional(gate, "segments", 40)),
            "gap_duration": float(_optional(gate, "gap_s", 2e-6)),
            "edge_length": int(_optional(gate, "edge_length", 5)),
            "relocated_segments": int(_optional(gate, "relocated_segments", 2)),
            "rabi_rate": float(_optional(gate, "base_rabi_rad_s", 2 * math.pi * 2e4)),
            "target_chi": float(_optional(gate, "target_phase_rad", math.pi / 4)),
        }

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(
            spin_coherence_time=_require(
                self.raw, "noise.spin_coherence_time_s", float, lambda v: v > 0, "must be > 0"
            ),
            motional_coherence_time=_require(
                self.raw, "noise.motional_coherence_time_s", float, lambda v: v > 0, "must be > 0"
            ),
            shots=_require(self.raw, "noise.shots", int, lambda v: v >= 1, "must be >= 1"),
            seed=self.seed,
        )

    # -- protocol ------------------------------------------------------------
    @property
    def pulse_errors(self) -> PulseErrors:
        entries = _optional(self.raw, "pulse_errors", {})
        known = {
            "pi411", "pi3432a", "pi3432b", "pump976", "pump370", "microwave", "raman355",
        }
        values = {}
        for key, value in entries.items():
            if key in ("comment", "description"):
                continue
            if key not in known:
                raise ConfigError(f"pulse_errors.{key}: unknown pulse name")
            values[key] = float(value)
        return PulseErrors(**values)

    @property
    def detection_rounds(self) -> int:
        return int(_optional(self.raw, "protocol.rounds", 5))

    # -- misc ------------------------------------------------------------------
    @property
    def seed(self) -> int:
        return int(_optional(self.raw, "seed", 0))

    def validate(self) -> "ExperimentConfig":
        """Touch every section so field errors surface at load time."""
        _ = self.comb
        for label in ("S", "F"):
            _ = self.species(label)
            _ = self.pll_frequency(label)
            _ = self.beat_sign(label)
        _ = self.aom_band
        _ = self.modes
        _ = self.drive
        _ = self.gate_modes
        _ = self.gate_settings
        _ = self.noise
        _ = self.pulse_errors
        return self


def load_config(path_or_dict) -> ExperimentConfig:
    """Load and validate a configuration document (path or parsed dict)."""
    if isinstance(path_or_dict, dict):
        doc = path_or_dict
    else:
        try:
            with open(path_or_dict) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return ExperimentConfig(raw=doc).validate()


def reference_config_path():
    """Filesystem path of the bundled reference configuration."""
    return resources.files("dualion.data").joinpath("reference_config.json")


def reference_config() -> ExperimentConfig:
    """The bundled configuration reproducing the published experiment."""
    return load_config(json.loads(reference_config_path().read_text()))


def config_hash(config: ExperimentConfig) -> str:
    """Stable sha256 of the canonical JSON form of the document."""
    canonical = json.dumps(config.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
