import numpy as np
import pytest

from dualion.errors import DomainError
from dualion.protocol import (
    REFERENCE_OBSERVABLES,
    Level,
    LevelState,
    PulseErrors,
    PulseKind,
    PulseOp,
    apply_pulse,
    calibrate_pulse_errors,
    compute_observables,
    joint_column_distribution,
    load_sequence,
    run_detect_f,
    run_detect_joint,
    run_prepare_sf,
    synthesize_confusion_matrix,
)

ZERO = PulseErrors()


@pytest.fixture(scope="module")
def calibration():
    return calibrate_pulse_errors()


class TestApplyPulse:
    def test_perfect_411_on_s0(self):
        state = apply_pulse(LevelState.pure(Level.S0), PulseOp(PulseKind.PI_411))
        assert state.population(Level.D52_F2) == 1.0

    def test_411_ignores_s1(self):
        state = apply_pulse(LevelState.pure(Level.S1), PulseOp(PulseKind.PI_411))
        assert state.population(Level.S1) == 1.0

    def test_bichromatic_transfer(self):
        state = apply_pulse(LevelState.pure(Level.D52_F2), PulseOp(PulseKind.PI_3432))
        assert state.population(Level.F0P) == 1.0
        state = apply_pulse(LevelState.pure(Level.D52_F3), PulseOp(PulseKind.PI_3432))
        assert state.population(Level.F1P) == 1.0

    def test_involution_at_zero_error(self):
        for kind in (PulseKind.PI_411, PulseKind.PI_3432, PulseKind.MICROWAVE_PI):
            for level in Level:
                once = apply_pulse(LevelState.pure(level), PulseOp(kind))
                twice = apply_pulse(once, PulseOp(kind))
                assert twice.population(level) == pytest.approx(1.0, abs=1e-12)

    def test_partial_transfer(self):
        state = apply_pulse(LevelState.pure(Level.S0), PulseOp(PulseKind.PI_411, 0.25))
        assert state.population(Level.S0) == pytest.approx(0.25)
        assert state.population(Level.D52_F2) == pytest.approx(0.75)

    def test_pump_moves_all(self):
        mixed = LevelState(np.array([0.3, 0.0, 0.0, 0.0, 0.5, 0.2, 0.0, 0.0]))
        pumped = apply_pulse(mixed, PulseOp(PulseKind.PUMP_976))
        assert pumped.population(Level.S0) == pytest.approx(1.0)
        assert pumped.population(Level.D52_F2) == 0.0

    def test_population_conserved(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            p = rng.dirichlet(np.ones(8))
            kind = rng.choice(list(PulseKind))
            eps = float(rng.uniform(0, 1))
            out = apply_pulse(LevelState(p), PulseOp(kind, eps))
            assert out.populations.sum() == pytest.approx(1.0, abs=1e-12)


class TestPrepare:
    def test_perfect_pulses(self):
        result = run_prepare_sf(ZERO)
        assert result["success_probability"] == pytest.approx(1.0)
        ion1, ion2 = result["post_selected_state"]
        assert ion1.population(Level.S1) == 1.0
        assert ion2.population(Level.F0P) == 1.0

    def test_broken_411_forces_failure(self):
        result = run_prepare_sf(PulseErrors(pi411=1.0))
        assert result["success_probability"] == pytest.approx(0.0)

    def test_calibrated_success_probability(self, calibration):
        prep = run_prepare_sf(calibration.errors)
        assert prep["success_probability"] == pytest.approx(0.94, abs=0.01)


class TestDetectF:
    def test_zero_error_perfect(self):
        result = run_detect_f(ZERO, rounds=5)
        assert result["infidelity_0p"] == 0.0
        assert result["infidelity_1p"] == 0.0

    def test_rounds_monotone(self):
        errors = PulseErrors(pi411=0.05, pi3432a=0.02, pump370=0.01)
        values = [run_detect_f(errors, rounds=r)["infidelity_0p"] for r in (1, 3, 5)]
        assert values[0] >= values[1] >= values[2]

    def test_zero_rounds_rejected(self):
        with pytest.raises(DomainError):
            run_detect_f(ZERO, rounds=0)

    @pytest.mark.parametrize(
        "name", ["pi411", "pi3432a", "pi3432b", "pump976", "pump370"]
    )
    def test_monotone_in_each_error(self, name):
        grid = [0.0, 0.02, 0.05, 0.1]
        last = -1.0
        for eps in grid:
            errors = PulseErrors(**{name: eps})
            result = run_detect_f(errors, rounds=5)
            total = result["infidelity_0p"] + result["infidelity_1p"]
            assert total >= last - 1e-12
            last = total


class TestDetectJoint:
    def test_exchange_map_zero_error(self):
        # |0> <-> |0'>, |1> and |1'> untouched
        seq = load_sequence("detect_joint")
        from dualion.protocol import _run_steps

        for start, end in [
            (Level.S0, Level.F0P),
            (Level.F0P, Level.S0),
            (Level.S1, Level.S1),
            (Level.F1P, Level.F1P),
        ]:
            out = _run_steps(LevelState.pure(start), seq.steps, ZERO, "ion")
            assert out.population(end) == pytest.approx(1.0, abs=1e-12)

    def test_composite_map_is_involution(self):
        seq = load_sequence("detect_joint")
        from dualion.protocol import _run_steps

        for start in (Level.S0, Level.F0P, Level.S1, Level.F1P):
            once = _run_steps(LevelState.pure(start), seq.steps, ZERO, "ion")
            twice = _run_steps(once, seq.steps, ZERO, "ion")
            assert twice.population(start) == pytest.approx(1.0, abs=1e-12)

    def test_zero_error_infidelities(self):
        result = run_detect_joint(ZERO)
        assert result["infidelity_s"] == 0.0
        assert result["infidelity_f"] == 0.0

    def test_ideal_input_01_reads_correctly(self):
        dist = joint_column_distribution("01", ZERO)
        assert dist == pytest.approx([0, 1, 0, 0], abs=1e-12)

    @pytest.mark.parametrize("name", ["pi411", "pi3432a", "pi3432b"])
    def test_monotone_in_each_error(self, name):
        grid = [0.0, 0.02, 0.05, 0.1]
        last = -1.0
        for eps in grid:
            result = run_detect_joint(PulseErrors(**{name: eps}))
            total = result["infidelity_s"] + result["infidelity_f"]
            assert total >= last - 1e-12
            last = total


class TestCalibration:
    def test_five_observables_within_one_point(self, calibration):
        for key, target in REFERENCE_OBSERVABLES.items():
            assert abs(calibration.observables[key] - target) <= 0.01, key

    def test_411_error_is_largest(self, calibration):
        errors = calibration.errors.as_dict()
        assert all(errors["pi411"] >= v - 1e-12 for v in errors.values())

    def test_reported_deviations_consistent(self, calibration):
        recomputed = compute_observables(calibration.errors)
        for key, value in calibration.observables.items():
            assert recomputed[key] == pytest.approx(value, abs=1e-12)


class TestSynthesizedMatrix:
    def test_zero_error_identity(self):
        matrix = synthesize_confusion_matrix(ZERO, shots=5000, seed=1)
        assert np.allclose(matrix.entries, np.eye(4))

    def test_seeded_determinism(self, calibration):
        a = synthesize_confusion_matrix(calibration.errors, shots=2000, seed=42)
        b = synthesize_confusion_matrix(calibration.errors, shots=2000, seed=42)
        assert np.array_equal(a.entries, b.entries)

    def test_columns_stochastic(self, calibration):
        matrix = synthesize_confusion_matrix(calibration.errors, shots=2000, seed=3)
        assert matrix.entries.sum(axis=0) == pytest.approx([1, 1, 1, 1], abs=1e-9)

    def test_matches_exact_column_distributions(self, calibration):
        matrix = synthesize_confusion_matrix(calibration.errors, shots=200000, seed=9)
        for j, prepared in enumerate(("00", "01", "10", "11")):
            exact = joint_column_distribution(prepared, calibration.errors)
            assert matrix.entries[:, j] == pytest.approx(exact, abs=5e-3)


class TestSequenceData:
    def test_bundled_sequences_load(self):
        for name in ("prepare_sf", "detect_f", "detect_joint"):
            seq = load_sequence(name)
            assert len(seq.steps) >= 3

    def test_unknown_sequence(self):
        from dualion.errors import ConfigError

        with pytest.raises(ConfigError):
            load_sequence("does_not_exist")

    def test_run_detection_sequence_classifies(self):
        from dualion.protocol import run_detection_sequence

        # F-qubit readout: |0'> shelves bright, |1'> stays dark
        res0 = run_detection_sequence("detect_f", Level.F0P, ZERO, rounds=5)
        assert res0.bright_probability == pytest.approx(1.0)
        assert res0.classification == "0p"
        res1 = run_detection_sequence("detect_f", Level.F1P, ZERO, rounds=5)
        assert res1.bright_probability == 0.0
        assert res1.classification == "1p"
        # S-qubit through the joint sequence: |1> untouched and bright
        res_s = run_detection_sequence(
            "detect_joint", Level.S1, ZERO, qubit_type="S"
        )
        assert res_s.classification == "1"
        assert res_s.post_state.population(Level.S1) == 1.0
