"""Preparation and detection pulse sequences as population-transfer maps.

The dual-type scheme shuttles population between the ground (S) qubit,
the metastable (F) qubit and the D5/2 / D3/2 shelves with pi pulses at
411 nm and 3432 nm, optical pumping at 976 nm, and a 370 nm pump with the
935 nm repump off.  Coherences never matter for the classical outcomes
tracked here, so an ion is just a probability vector over the named
levels, and every pulse moves population with a transfer error eps.

An ion counts as bright under the detection laser iff its population sits
in the S manifold or D3/2; the F7/2 and D5/2 levels stay dark.  Photon
counting statistics are abstracted away (ideal discrimination).

The three reference sequences (pair initialization, repeated F-qubit
shelving detection, joint S/F detection) ship as JSON data files, not
code; see data/sequences/.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import numpy as np
from scipy import optimize

from .errors import ConfigError, DomainError
from .readout import ConfusionMatrix

__all__ = [
    "Level",
    "PulseKind",
    "LevelState",
    "PulseOp",
    "PulseErrors",
    "SequenceResult",
    "load_sequence",
    "apply_pulse",
    "is_bright",
    "run_detection_sequence",
    "run_prepare_sf",
    "run_detect_f",
    "run_detect_joint",
    "synthesize_confusion_matrix",
    "compute_observables",
    "calibrate_pulse_errors",
    "REFERENCE_OBSERVABLES",
]


class Level(Enum):
    """Electronic levels tracked by the protocol simulator."""

    S0 = 0        # |0>,  S1/2 F=0
    S1 = 1        # |1>,  S1/2 F=1
    F0P = 2       # |0'>, F7/2 F=3
    F1P = 3       # |1'>, F7/2 F=4
    D52_F2 = 4
    D52_F3 = 5
    D32 = 6
    LOST = 7


N_LEVELS = len(Level)

BRIGHT_LEVELS = (Level.S0, Level.S1, Level.D32)


class PulseKind(Enum):
    PI_411 = "pi411"                  # S0 <-> D52_F2
    PI_3432_A = "pi3432a"             # D52_F2 <-> F0'
    PI_3432_B = "pi3432b"             # D52_F3 <-> F1'
    PI_3432 = "pi3432"                # bichromatic: both tones at once
    PUMP_976 = "pump976"              # D5/2 -> S manifold
    PUMP_370_NO935 = "pump370_no935"  # S manifold -> D3/2
    DETECT_370 = "detect370"          # fluorescence classification event
    MICROWAVE_PI = "microwave_pi"     # S0 <-> S1
    RAMAN_355_PI = "raman355_pi"      # S0 <-> S1 via the comb


@dataclass(frozen=True)
class LevelState:
    """Population vector over Level, non-negative and summing to 1."""

    populations: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.shape != (N_LEVELS,):
            raise DomainError(f"need {N_LEVELS} level populations")
        if np.any(p < -1e-12):
            raise DomainError("populations must be >= 0")
        if abs(p.sum() - 1.0) > 1e-9:
            raise DomainError("populations must sum to 1")
        object.__setattr__(self, "populations", np.clip(p, 0.0, None))

    @classmethod
    def pure(cls, level: Level) -> "LevelState":
        p = np.zeros(N_LEVELS)
        p[level.value] = 1.0
        return cls(p)

    def population(self, level: Level) -> float:
        return float(self.populations[level.value])


@dataclass(frozen=True)
class PulseOp:
    kind: PulseKind
    transfer_error: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.transfer_error <= 1.0):
            raise DomainError("transfer_error must lie in [0, 1]")


@dataclass(frozen=True)
class PulseErrors:
    """Per-pulse transfer errors; the 3432 nm tones carry separate values."""

    pi411: float = 0.0
    pi3432a: float = 0.0
    pi3432b: float = 0.0
    pump976: float = 0.0
    pump370: float = 0.0
    microwave: float = 0.0
    raman355: float = 0.0

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not (0.0 <= value <= 1.0):
                raise DomainError(f"{name} error must lie in [0, 1]")

    def as_dict(self) -> dict:
        return {
            "pi411": self.pi411,
            "pi3432a": self.pi3432a,
            "pi3432b": self.pi3432b,
            "pump976": self.pump976,
            "pump370": self.pump370,
            "microwave": self.microwave,
            "raman355": self.raman355,
        }

    def error_for(self, kind: PulseKind) -> float:
        return {
            PulseKind.PI_411: self.pi411,
            PulseKind.PI_3432_A: self.pi3432a,
            PulseKind.PI_3432_B: self.pi3432b,
            PulseKind.PUMP_976: self.pump976,
            PulseKind.PUMP_370_NO935: self.pump370,
            PulseKind.MICROWAVE_PI: self.microwave,
            PulseKind.RAMAN_355_PI: self.raman355,
        }.get(kind, 0.0)


_EXCHANGE_PAIRS = {
    PulseKind.PI_411: ((Level.S0, Level.D52_F2),),
    PulseKind.PI_3432_A: ((Level.D52_F2, Level.F0P),),
    PulseKind.PI_3432_B: ((Level.D52_F3, Level.F1P),),
    PulseKind.MICROWAVE_PI: ((Level.S0, Level.S1),),
    PulseKind.RAMAN_355_PI: ((Level.S0, Level.S1),),
}

_PUMP_MAPS = {
    PulseKind.PUMP_976: ((Level.D52_F2, Level.S0), (Level.D52_F3, Level.S0)),
    PulseKind.PUMP_370_NO935: ((Level.S0, Level.D32), (Level.S1, Level.D32)),
}


def apply_pulse(state: LevelState, pulse: PulseOp) -> LevelState:
    """Population map of one pulse; failed fractions stay in place.

    Pi pulses exchange their level pair both ways; pumps move all addressed
    population to the target.  The bichromatic 3432 nm pulse applies both
    tones simultaneously (disjoint level pairs) and uses their separate
    errors only via the PulseErrors-aware helpers below; as a bare PulseOp
    it applies its single transfer_error to both tones.
    """
    p = state.populations.copy()
    eps = pulse.transfer_error
    if pulse.kind is PulseKind.PI_3432:
        pairs = _EXCHANGE_PAIRS[PulseKind.PI_3432_A] + _EXCHANGE_PAIRS[PulseKind.PI_3432_B]
        for a, b in pairs:
            pa, pb = p[a.value], p[b.value]
            p[a.value] = eps * pa + (1 - eps) * pb
            p[b.value] = (1 - eps) * pa + eps * pb
    elif pulse.kind in _EXCHANGE_PAIRS:
        ((a, b),) = _EXCHANGE_PAIRS[pulse.kind]
        pa, pb = p[a.value], p[b.value]
        p[a.value] = eps * pa + (1 - eps) * pb
        p[b.value] = (1 - eps) * pa + eps * pb
    elif pulse.kind in _PUMP_MAPS:
        for src, dst in _PUMP_MAPS[pulse.kind]:
            moved = (1 - eps) * p[src.value]
            p[dst.value] += moved
            p[src.value] -= moved
    elif pulse.kind is PulseKind.DETECT_370:
        pass  # classification event, no population transfer modelled
    else:
        raise DomainError(f"unknown pulse kind {pulse.kind}")
    return LevelState(p)


def _apply_named(state: LevelState, kind: PulseKind, errors: PulseErrors) -> LevelState:
    if kind is PulseKind.PI_3432:
        state = apply_pulse(state, PulseOp(PulseKind.PI_3432_A, errors.pi3432a))
        return apply_pulse(state, PulseOp(PulseKind.PI_3432_B, errors.pi3432b))
    return apply_pulse(state, PulseOp(kind, errors.error_for(kind)))


def is_bright(state: LevelState) -> float:
    """Probability the ion fluoresces under the detection laser."""
    return float(sum(state.population(lev) for lev in BRIGHT_LEVELS))


@dataclass(frozen=True)
class SequenceStep:
    kind: PulseKind
    target: str = "global"  # "global", "ion1", "ion2"


@dataclass(frozen=True)
class SequenceSpec:
    name: str
    steps: tuple
    repeat: int = 1


def load_sequence(name: str) -> SequenceSpec:
    """Load one of the bundled declarative pulse sequences by name."""
    try:
        raw = resources.files("dualion.data.sequences").joinpath(f"{name}.json").read_text()
    except FileNotFoundError as exc:
        raise ConfigError(f"no bundled sequence named {name!r}") from exc
    doc = json.loads(raw)
    steps = []
    for entry in doc["steps"]:
        kind = PulseKind(entry["pulse"])
        steps.append(SequenceStep(kind=kind, target=entry.get("target", "global")))
    return SequenceSpec(name=name, steps=tuple(steps), repeat=int(doc.get("repeat", 1)))


def _run_steps(ion: LevelState, steps, errors: PulseErrors, ion_name: str) -> LevelState:
    for step in steps:
        if step.target in ("global", ion_name):
            if step.kind is PulseKind.DETECT_370:
                continue
            ion = _apply_named(ion, step.kind, errors)
    return ion


@dataclass(frozen=True)
class SequenceResult:
    """Brightness, classification and final populations after a sequence."""

    bright_probability: float
    classification: str  # the state label the brightness outcome maps to
    post_state: LevelState


def run_detection_sequence(
    name: str,
    initial: Level,
    errors: PulseErrors,
    rounds: int = 1,
    qubit_type: str = "F",
) -> SequenceResult:
    """Run one bundled sequence on a single ion and classify the outcome.

    For an S-type qubit a bright ion reads |1>, dark reads |0>; for an
    F-type qubit the exchange map inverts this: bright reads |0'>, dark
    reads |1'>.
    """
    seq = load_sequence(name)
    ion = LevelState.pure(initial)
    for _ in range(rounds):
        ion = _run_steps(ion, seq.steps, errors, "ion")
    bright = is_bright(ion)
    if qubit_type == "S":
        classification = "1" if bright >= 0.5 else "0"
    else:
        classification = "0p" if bright >= 0.5 else "1p"
    return SequenceResult(
        bright_probability=bright, classification=classification, post_state=ion
    )


def run_prepare_sf(errors: PulseErrors) -> dict:
    """Initialize an S-F pair from |00> and verify by fluorescence.

    Ion 1 gets an individual carrier pi pulse to |1>; ion 2 is mapped to
    |0'> by the 411/3432 chain; the D5/2 shelves are repumped and success
    requires ion 1 bright with ion 2 dark.  Returns the success
    probability and the verified (post-selected) pair state.
    """
    seq = load_sequence("prepare_sf")
    ion1 = LevelState.pure(Level.S0)
    ion2 = LevelState.pure(Level.S0)
    ion1 = _run_steps(ion1, seq.steps, errors, "ion1")
    ion2 = _run_steps(ion2, seq.steps, errors, "ion2")

    p1_bright = is_bright(ion1)
    p2_dark = 1.0 - is_bright(ion2)
    success = p1_bright * p2_dark

    bright_mask = np.zeros(N_LEVELS)
    for lev in BRIGHT_LEVELS:
        bright_mask[lev.value] = 1.0
    post1 = ion1.populations * bright_mask
    post2 = ion2.populations * (1.0 - bright_mask)
    post1 = post1 / post1.sum() if post1.sum() > 0 else ion1.populations
    post2 = post2 / post2.sum() if post2.sum() > 0 else ion2.populations
    return {
        "success_probability": success,
        "ion1_bright_probability": p1_bright,
        "ion2_dark_probability": p2_dark,
        "post_selected_state": (LevelState(post1), LevelState(post2)),
    }


def run_detect_f(errors: PulseErrors, rounds: int = 5) -> dict:
    """Detection infidelity of the repeated-shelving F-qubit readout.

    One round converts |0'> to the S manifold and parks it in D3/2 with
    the 935-off pump, leaving |1'> in the dark manifolds; repetition
    recovers earlier shelving failures.  Returns the misclassification
    probability for each F-qubit basis state.
    """
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    results = {}
    for label, start in (("0p", Level.F0P), ("1p", Level.F1P)):
        run = run_detection_sequence("detect_f", start, errors, rounds=rounds)
        # |0'> must come out bright, |1'> dark
        bright = run.bright_probability
        results[label] = (1.0 - bright) if label == "0p" else bright
    return {"infidelity_0p": results["0p"], "infidelity_1p": results["1p"], "rounds": rounds}


def _joint_bright_probability(start: Level, errors: PulseErrors) -> float:
    return run_detection_sequence("detect_joint", start, errors).bright_probability


def run_detect_joint(errors: PulseErrors) -> dict:
    """Simultaneous S/F readout through the exchange sequence.

    The pulse chain swaps |0> with |0'> and leaves |1>, |1'> untouched, so
    an S-type ion reads |1> when bright and an F-type ion reads |0'> when
    bright.  Returns the per-type detection infidelity averaged over the
    two basis inputs.
    """
    err_s0 = _joint_bright_probability(Level.S0, errors)          # should be dark
    err_s1 = 1.0 - _joint_bright_probability(Level.S1, errors)    # should be bright
    err_f0 = 1.0 - _joint_bright_probability(Level.F0P, errors)   # should be bright
    err_f1 = _joint_bright_probability(Level.F1P, errors)         # should be dark
    return {
        "infidelity_s": 0.5 * (err_s0 + err_s1),
        "infidelity_f": 0.5 * (err_f0 + err_f1),
        "misread": {"0": err_s0, "1": err_s1, "0p": err_f0, "1p": err_f1},
    }


def joint_column_distribution(prepared: str, errors: PulseErrors) -> np.ndarray:
    """Measured-outcome distribution for one prepared basis state.

    prepared is one of "00", "01", "10", "11" (S bit then F bit); outcome
    order is (00', 01', 10', 11').
    """
    s_level = Level.S1 if prepared[0] == "1" else Level.S0
    f_level = Level.F1P if prepared[1] == "1" else Level.F0P
    p_s_bright = _joint_bright_probability(s_level, errors)
    p_f_bright = _joint_bright_probability(f_level, errors)
    p_s1 = p_s_bright          # bright S-type ion reads |1>
    p_f1 = 1.0 - p_f_bright    # bright F-type ion reads |0'>
    return np.array(
        [
            (1 - p_s1) * (1 - p_f1),
            (1 - p_s1) * p_f1,
            p_s1 * (1 - p_f1),
            p_s1 * p_f1,
        ]
    )


def synthesize_confusion_matrix(
    errors: PulseErrors, shots: int, seed: int = 0
) -> ConfusionMatrix:
    """Monte Carlo 4x4 measured-vs-prepared table from the joint-detection model."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    columns = []
    for prepared in ("00", "01", "10", "11"):
        probs = joint_column_distribution(prepared, errors)
        counts = rng.multinomial(shots, probs)
        columns.append(counts / shots)
    return ConfusionMatrix(np.column_stack(columns))


# Observables quoted for the reference experiment: pair-preparation success,
# repeated-shelving F-detection infidelities, joint-detection infidelities.
REFERENCE_OBSERVABLES = {
    "prep_success": 0.94,
    "detect_f_0p": 0.005,
    "detect_f_1p": 0.009,
    "joint_s": 0.005,
    "joint_f": 0.028,
}


def compute_observables(errors: PulseErrors, rounds: int = 5) -> dict:
    """The five headline protocol observables for a given error vector."""
    prep = run_prepare_sf(errors)
    det_f = run_detect_f(errors, rounds=rounds)
    joint = run_detect_joint(errors)
    return {
        "prep_success": prep["success_probability"],
        "detect_f_0p": det_f["infidelity_0p"],
        "detect_f_1p": det_f["infidelity_1p"],
        "joint_s": joint["infidelity_s"],
        "joint_f": joint["infidelity_f"],
    }


@dataclass(frozen=True)
class CalibrationResult:
    errors: PulseErrors
    observables: dict
    targets: dict
    max_deviation: float
    deviations: dict = field(default_factory=dict)


def calibrate_pulse_errors(
    targets: dict | None = None, rounds: int = 5
) -> CalibrationResult:
    """Fit the per-pulse error vector to the five reference observables.

    Minimizes the worst absolute deviation subject to the 411 nm pulse
    carrying the largest error (it is the known weakest link); the other
    errors, including the preparation carrier pulse, are parameterized as
    fractions of it.  The |1'> shelving infidelity is structurally zero in
    this population model (that branch never reaches a bright level), so
    the attainable worst-case deviation is bounded below by its 0.9%
    target.  The result reproduces the observables, it is not asserted as
    physical truth.
    """
    targets = dict(REFERENCE_OBSERVABLES if targets is None else targets)

    def unpack(x):
        e411 = float(np.clip(x[0], 0.0, 0.2))
        fracs = np.clip(x[1:], 0.0, 1.0)
        return PulseErrors(
            pi411=e411,
            pi3432a=e411 * fracs[0],
            pi3432b=e411 * fracs[1],
            pump976=e411 * fracs[2],
            pump370=e411 * fracs[3],
            raman355=e411 * fracs[4],
        )

    def deviations_of(x):
        obs = compute_observables(unpack(x), rounds=rounds)
        return np.array([obs[key] - targets[key] for key in targets])

    def sse(x):
        return float(np.sum(deviations_of(x) ** 2))

    def worst(x):
        return float(np.max(np.abs(deviations_of(x))))

    x0 = np.array([0.026, 0.5, 0.1, 0.1, 0.05, 0.7])
    stage1 = optimize.minimize(
        sse, x0, method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-14, "maxiter": 4000},
    )
    stage2 = optimize.minimize(
        worst, stage1.x, method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-12, "maxiter": 4000},
    )
    best_x = stage2.x if worst(stage2.x) <= worst(stage1.x) else stage1.x
    errors = unpack(best_x)
    observables = compute_observables(errors, rounds=rounds)
    deviations = {key: observables[key] - targets[key] for key in targets}
    return CalibrationResult(
        errors=errors,
        observables=observables,
        targets=targets,
        max_deviation=max(abs(d) for d in deviations.values()),
        deviations=deviations,
    )
