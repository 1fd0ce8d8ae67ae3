"""Single-qubit carrier and sideband dynamics with thermal motional modes.

Everything here stays in the Lamb-Dicke, resolved-sideband regime: the
carrier and each sideband are treated as independent two-level processes
whose effective Rabi rate carries the appropriate sqrt(n) factor, and
thermal motion enters as a classical average over the phonon-number
distribution p_n = nbar^n / (nbar+1)^(n+1).

Rabi rates are angular (rad/s); detunings are ordinary frequencies (Hz)
and are converted to angular inside the formulas.  Laser-intensity noise
is modelled as pure contrast damping exp(-gamma*t) of the oscillation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NotThermalizable

__all__ = [
    "ModeLabel",
    "Sideband",
    "MotionalMode",
    "DriveParams",
    "Spectrum",
    "carrier_flip_probability",
    "sideband_flip_probability",
    "scan_spectrum",
    "estimate_nbar",
    "gaussian_crosstalk",
    "thermal_weights",
]

# Thermal-state truncation: exact to double precision for nbar <= 1.
DEFAULT_NMAX = 200
TAIL_MASS_LIMIT = 1e-8


class ModeLabel(Enum):
    CENTER_OF_MASS = "com"
    ROCKING = "rocking"


class Sideband(Enum):
    RED = -1
    BLUE = +1


@dataclass(frozen=True)
class MotionalMode:
    """One collective phonon mode of the two-ion crystal.

    Parameters
    ----------
    frequency : float
        Mode frequency in Hz.
    eta : tuple of float
        Signed Lamb-Dicke parameter per ion, ion order (S, F).
    nbar : float
        Mean thermal occupation.
    label : ModeLabel
        Center-of-mass modes have equal-sign eta entries, rocking modes
        opposite-sign entries.
    """

    frequency: float
    eta: tuple
    nbar: float
    label: ModeLabel

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        if not (self.frequency > 0):
            raise DomainError("mode frequency must be > 0")
        if self.nbar < 0:
            raise DomainError("nbar must be >= 0")
        if any(abs(e) >= 0.5 for e in self.eta):
            raise DomainError("|eta| must stay < 0.5 (Lamb-Dicke regime)")
        signs = {math.copysign(1.0, e) for e in self.eta if e != 0}
        if self.label is ModeLabel.CENTER_OF_MASS and len(signs) > 1:
            raise DomainError("center-of-mass mode requires equal-sign eta entries")
        if self.label is ModeLabel.ROCKING and len(self.eta) > 1 and len(signs) < 2:
            raise DomainError("rocking mode requires opposite-sign eta entries")


@dataclass(frozen=True)
class DriveParams:
    """Raman drive parameters for a single qubit.

    rabi_rate is angular (rad/s); detuning is a signed ordinary frequency
    (Hz) from the carrier; decay_rate damps the oscillation contrast.
    """

    rabi_rate: float
    detuning: float = 0.0
    duration: float = 0.0
    decay_rate: float = 0.0

    def __post_init__(self):
        if self.rabi_rate < 0:
            raise DomainError("rabi_rate must be >= 0")
        if self.duration < 0:
            raise DomainError("duration must be >= 0")
        if self.decay_rate < 0:
            raise DomainError("decay_rate must be >= 0")


@dataclass(frozen=True)
class Spectrum:
    """Flip probability versus drive detuning."""

    detunings: np.ndarray          # Hz, strictly increasing
    flip_probabilities: np.ndarray

    def __post_init__(self):
        det = np.asarray(self.detunings, dtype=float)
        prob = np.asarray(self.flip_probabilities, dtype=float)
        if det.ndim != 1 or det.size == 0 or np.any(np.diff(det) <= 0):
            raise DomainError("detunings must be non-empty and strictly increasing")
        if np.any((prob < 0) | (prob > 1)):
            raise DomainError("flip probabilities must lie in [0, 1]")
        object.__setattr__(self, "detunings", det)
        object.__setattr__(self, "flip_probabilities", prob)

    def to_rows(self):
        return list(zip(self.detunings.tolist(), self.flip_probabilities.tolist()))


def _damped_rabi(omega, delta_angular, gamma, t):
    """Generalized Rabi flip probability with contrast damping.

    P = 1/2 * [1 - e^{-gamma t} ((W_r^2/W^2) cos(W t) + (d^2/W^2))]
    with W^2 = omega^2 + d^2.  Reduces to sin^2(omega t / 2) on resonance
    without damping, and to the standard off-resonant lineshape
    (omega^2/W^2) sin^2(W t / 2) for gamma = 0.
    """
    omega = np.asarray(omega, dtype=float)
    w2 = omega**2 + delta_angular**2
    w = np.sqrt(w2)
    with np.errstate(invalid="ignore"):
        frac = np.where(w2 > 0, omega**2 / np.where(w2 > 0, w2, 1.0), 0.0)
    envelope = np.exp(-gamma * t)
    p = 0.5 * (1.0 - envelope * (frac * np.cos(w * t) + (1.0 - frac)))
    return np.clip(p, 0.0, 1.0)


def carrier_flip_probability(drive: DriveParams, t: float | None = None) -> float:
    """Qubit flip probability after driving the carrier for time t.

    Uses the drive's duration when t is omitted.
    """
    if t is None:
        t = drive.duration
    if t < 0:
        raise DomainError("t must be >= 0")
    delta = 2.0 * math.pi * drive.detuning
    return float(_damped_rabi(drive.rabi_rate, delta, drive.decay_rate, t))


def thermal_weights(nbar: float, n_max: int = DEFAULT_NMAX) -> np.ndarray:
    """Thermal occupation probabilities p_0..p_nmax, with tail-mass check."""
    if nbar < 0:
        raise DomainError("nbar must be >= 0")
    if nbar == 0:
        weights = np.zeros(n_max + 1)
        weights[0] = 1.0
        return weights
    ratio = nbar / (nbar + 1.0)
    n = np.arange(n_max + 1)
    weights = np.exp(n * math.log(ratio)) / (nbar + 1.0)
    tail = ratio ** (n_max + 1)
    if tail > TAIL_MASS_LIMIT:
        warnings.warn(
            f"thermal tail mass {tail:.2e} beyond n_max={n_max} exceeds "
            f"{TAIL_MASS_LIMIT:.0e}; increase n_max",
            RuntimeWarning,
            stacklevel=2,
        )
    return weights


def sideband_flip_probability(
    mode: MotionalMode,
    ion_index: int,
    drive: DriveParams,
    sideband: Sideband,
    t: float | None = None,
    n_max: int = DEFAULT_NMAX,
) -> float:
    """Thermally averaged sideband flip probability.

    On resonance this is the thermal average of sin^2(eta sqrt(n) W t / 2)
    for the red sideband and sin^2(eta sqrt(n+1) W t / 2) for the blue; the
    drive's detuning (Hz, relative to the sideband resonance) and contrast
    decay are folded in through the generalized Rabi lineshape per n.
    """
    if t is None:
        t = drive.duration
    if t < 0:
        raise DomainError("t must be >= 0")
    eta = abs(mode.eta[ion_index])
    weights = thermal_weights(mode.nbar, n_max)
    n = np.arange(n_max + 1, dtype=float)
    quanta = n if sideband is Sideband.RED else n + 1.0
    omega_n = eta * drive.rabi_rate * np.sqrt(quanta)
    delta = 2.0 * math.pi * drive.detuning
    p_n = _damped_rabi(omega_n, delta, drive.decay_rate, t)
    return float(np.dot(weights, p_n))


def scan_spectrum(
    modes: list[MotionalMode],
    drive: DriveParams,
    detuning_grid,
    ion_index: int = 0,
    t: float | None = None,
    n_max: int = DEFAULT_NMAX,
) -> Spectrum:
    """Flip probability over a grid of drive detunings from the carrier.

    Each grid point is assigned to its nearest resonance (carrier at 0,
    red/blue sideband at -/+ each mode frequency) and evaluated as that
    process with the remaining offset as the two-level detuning.  Peaks
    therefore appear at zero and at plus/minus the mode frequencies, with
    red/blue asymmetry set by each mode's nbar.
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("detuning grid must be a non-empty 1-D sequence")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("detuning grid must be strictly increasing")
    if t is None:
        t = drive.duration

    centers = [(0.0, None, None)]
    for mode in modes:
        centers.append((-mode.frequency, mode, Sideband.RED))
        centers.append((+mode.frequency, mode, Sideband.BLUE))

    probs = np.empty_like(grid)
    for i, det in enumerate(grid):
        center, mode, side = min(centers, key=lambda c: abs(det - c[0]))
        local = DriveParams(
            rabi_rate=drive.rabi_rate,
            detuning=det - center,
            duration=t,
            decay_rate=drive.decay_rate,
        )
        if mode is None:
            probs[i] = carrier_flip_probability(local, t)
        else:
            probs[i] = sideband_flip_probability(mode, ion_index, local, side, t, n_max)
    return Spectrum(grid, probs)


def estimate_nbar(p_red: float, p_blue: float) -> float:
    """Mean phonon number from the red/blue sideband ratio R = p_red/p_blue.

    In the weak-drive limit R = nbar/(nbar+1), so nbar = R/(1-R).  Raises
    NotThermalizable when the ratio reaches 1.
    """
    if not (0 <= p_red <= 1 and 0 <= p_blue <= 1):
        raise DomainError("sideband probabilities must lie in [0, 1]")
    if p_red >= p_blue:
        raise NotThermalizable(
            f"red/blue ratio {p_red}/{p_blue} >= 1 has no thermal solution"
        )
    if p_red == 0:
        return 0.0
    ratio = p_red / p_blue
    return ratio / (1.0 - ratio)


def gaussian_crosstalk(separation: float, beam_radius: float) -> float:
    """Relative intensity of a Gaussian beam at a neighbour ion's position."""
    if not (beam_radius > 0):
        raise DomainError("beam_radius must be > 0")
    return math.exp(-2.0 * separation**2 / beam_radius**2)
