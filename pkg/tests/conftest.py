import math

import numpy as np
import pytest

from dualion.dynamics import ModeLabel, MotionalMode
from dualion.gate import build_calibrated_sequence, build_heuristic_sequence

# Confusion matrix measured for the reference experiment (percent,
# columns = prepared state).
REFERENCE_CONFUSION_PERCENT = np.array(
    [
        [96.82, 2.14, 0.24, 0.00],
        [2.27, 97.16, 0.00, 0.24],
        [0.91, 0.23, 97.43, 4.39],
        [0.00, 0.47, 2.33, 95.38],
    ]
)


@pytest.fixture(scope="session")
def gate_modes():
    com = MotionalMode(2.271e6, (0.1, 0.1), 0.3, ModeLabel.CENTER_OF_MASS)
    roc = MotionalMode(2.203e6, (0.1, -0.1), 0.1, ModeLabel.ROCKING)
    return com, roc


@pytest.fixture(scope="session")
def heuristic_sequence(gate_modes):
    com, roc = gate_modes
    return build_heuristic_sequence(com, roc, rabi_rate=2 * math.pi * 2e4)


@pytest.fixture(scope="session")
def calibrated_sequence(gate_modes):
    com, roc = gate_modes
    return build_calibrated_sequence(com, roc, rabi_rate=2 * math.pi * 2e4)
