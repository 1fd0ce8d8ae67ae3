"""Frequency-comb beat-note planning for dual-type qubit Raman drives.

A mode-locked pulsed laser carries a comb of teeth spaced by the
repetition rate.  A pair of counter-propagating beams bridges a qubit
splitting when ``tooth * rep_rate`` plus the difference of the two AOM
frequencies (PLL-locked side and AWG-tuned side) hits the splitting plus
the requested detuning:

    tooth * rep_rate + beat_sign * (awg - pll) = splitting + detuning

All frequencies here are ordinary frequencies in Hz (not angular); with
integer-Hz inputs every relation above is exact in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import DomainError, NoBridgeableTooth, OutOfBand

__all__ = [
    "BeatSign",
    "CombSpec",
    "QubitSpecies",
    "AomBand",
    "FrequencyPlan",
    "ToothCandidate",
    "SPECIES_S",
    "SPECIES_F",
    "DEFAULT_AOM_BAND",
    "comb_bandwidth",
    "select_tooth",
    "solve_awg",
    "pll_drift_compensation",
]


class BeatSign(Enum):
    """Relative sign between the AOM difference term and the comb-tooth term."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def from_name(cls, name: str) -> "BeatSign":
        key = str(name).strip().lower()
        if key in ("plus", "+", "+1", "1"):
            return cls.PLUS
        if key in ("minus", "-", "-1"):
            return cls.MINUS
        raise DomainError(f"unknown beat sign {name!r} (expected 'plus' or 'minus')")


@dataclass(frozen=True)
class CombSpec:
    """Pulsed-laser comb: repetition rate and pulse width set tooth spacing and span.

    The usable comb bandwidth is taken as 1/pulse_width.
    """

    repetition_rate: float  # Hz
    pulse_width: float      # s
    bandwidth: float = field(default=None)  # Hz, derived unless given

    def __post_init__(self):
        if not (self.repetition_rate > 0):
            raise DomainError("repetition_rate must be > 0")
        if not (self.pulse_width > 0):
            raise DomainError("pulse_width must be > 0")
        derived = 1.0 / self.pulse_width
        if self.bandwidth is None:
            object.__setattr__(self, "bandwidth", derived)
        elif abs(self.bandwidth - derived) > 1e-6 * derived:
            raise DomainError(
                f"bandwidth {self.bandwidth} inconsistent with 1/pulse_width {derived}"
            )

    def covers(self, splitting: float) -> bool:
        """True if the comb bandwidth spans a qubit splitting."""
        return splitting < self.bandwidth


@dataclass(frozen=True)
class QubitSpecies:
    """One qubit type: hyperfine splitting and the comb tooth that bridges it."""

    label: str            # "S" (ground) or "F" (metastable)
    splitting: float      # Hz
    tooth_index: int

    def __post_init__(self):
        if self.label not in ("S", "F"):
            raise DomainError(f"label must be 'S' or 'F', got {self.label!r}")
        if not (self.splitting > 0):
            raise DomainError("splitting must be > 0")
        if self.tooth_index < 1:
            raise DomainError("tooth_index must be >= 1")


@dataclass(frozen=True)
class AomBand:
    """Usable AOM frequency band [low, high] in Hz."""

    low: float
    high: float

    def __post_init__(self):
        if not (0 < self.low < self.high):
            raise DomainError("AOM band must satisfy 0 < low < high")

    def contains(self, frequency: float) -> bool:
        return self.low <= frequency <= self.high


@dataclass(frozen=True)
class FrequencyPlan:
    """A solved beat-note configuration for one qubit species."""

    species: QubitSpecies
    repetition_rate: float   # Hz
    pll_frequency: float     # Hz
    awg_frequency: float     # Hz
    detuning: float          # Hz, signed
    beat_sign: BeatSign

    def residual(self) -> float:
        """Defect of the plan equation; 0 for a valid plan."""
        lhs = self.species.tooth_index * self.repetition_rate + self.beat_sign.value * (
            self.awg_frequency - self.pll_frequency
        )
        return lhs - (self.species.splitting + self.detuning)

    def to_dict(self) -> dict:
        return {
            "species": self.species.label,
            "splitting_hz": self.species.splitting,
            "tooth": self.species.tooth_index,
            "repetition_rate_hz": self.repetition_rate,
            "pll_hz": self.pll_frequency,
            "awg_hz": self.awg_frequency,
            "detuning_hz": self.detuning,
            "beat_sign": self.beat_sign.name.lower(),
        }


# Reference experiment values: ground-state qubit at 12.642 GHz bridged by
# tooth 158 of an 80 MHz comb, metastable qubit at 3.620 GHz by tooth 45.
SPECIES_S = QubitSpecies("S", 12.642e9, 158)
SPECIES_F = QubitSpecies("F", 3.620e9, 45)

# Brackets the reference PLL/AWG settings (230-250 MHz) with margin.
DEFAULT_AOM_BAND = AomBand(200e6, 280e6)


def comb_bandwidth(comb: CombSpec) -> float:
    """Comb bandwidth in Hz (reciprocal pulse width)."""
    return comb.bandwidth


@dataclass(frozen=True)
class ToothCandidate:
    """A comb tooth able to bridge a splitting, with its signed residual."""

    tooth: int
    residual: float  # Hz, splitting - tooth * rep_rate


def select_tooth(
    splitting: float, rep_rate: float, aom_tuning_span: float
) -> list[ToothCandidate]:
    """All teeth k with |splitting - k*rep_rate| <= span, nearest first.

    Raises NoBridgeableTooth (carrying the nearest tooth and its residual)
    when the span cannot be bridged by any tooth.
    """
    if not (rep_rate > 0):
        raise DomainError("rep_rate must be > 0")
    if not (splitting > 0):
        raise DomainError("splitting must be > 0")
    k_lo = max(1, math.ceil((splitting - aom_tuning_span) / rep_rate))
    k_hi = max(1, math.floor((splitting + aom_tuning_span) / rep_rate))
    candidates = []
    for k in range(k_lo, k_hi + 1):
        residual = splitting - k * rep_rate
        if abs(residual) <= aom_tuning_span:
            candidates.append(ToothCandidate(k, residual))
    if not candidates:
        nearest = max(1, round(splitting / rep_rate))
        raise NoBridgeableTooth(
            f"no tooth within {aom_tuning_span} Hz of splitting {splitting} Hz; "
            f"nearest is k={nearest} at {splitting - nearest * rep_rate:+} Hz",
            nearest_tooth=nearest,
            residual=splitting - nearest * rep_rate,
        )
    candidates.sort(key=lambda c: (abs(c.residual), c.tooth))
    return candidates


def solve_awg(
    species: QubitSpecies,
    pll_frequency: float,
    detuning: float,
    beat_sign: BeatSign,
    comb: CombSpec,
    band: AomBand = DEFAULT_AOM_BAND,
) -> FrequencyPlan:
    """Solve the plan equation for the AWG frequency at a requested detuning.

    Raises OutOfBand if the PLL setting or the solved AWG frequency falls
    outside the configured AOM band.
    """
    for value in (pll_frequency, detuning):
        if not math.isfinite(value):
            raise DomainError("plan inputs must be finite")
    if not band.contains(pll_frequency):
        raise OutOfBand(
            f"PLL frequency {pll_frequency / 1e6:.6f} MHz outside AOM band "
            f"[{band.low / 1e6:.1f}, {band.high / 1e6:.1f}] MHz",
            frequency=pll_frequency,
        )
    mismatch = species.splitting + detuning - species.tooth_index * comb.repetition_rate
    awg = pll_frequency + beat_sign.value * mismatch
    if not band.contains(awg):
        raise OutOfBand(
            f"solved AWG frequency {awg / 1e6:.6f} MHz outside AOM band "
            f"[{band.low / 1e6:.1f}, {band.high / 1e6:.1f}] MHz",
            frequency=awg,
        )
    return FrequencyPlan(
        species=species,
        repetition_rate=comb.repetition_rate,
        pll_frequency=pll_frequency,
        awg_frequency=awg,
        detuning=detuning,
        beat_sign=beat_sign,
    )


def pll_drift_compensation(species: QubitSpecies, rep_rate_drift: float) -> float:
    """PLL shift keeping (pll - tooth * rep_rate) constant: tooth * drift."""
    return species.tooth_index * rep_rate_drift
