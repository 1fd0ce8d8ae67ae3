"""dualion: planning and simulation for comb-driven dual-type trapped-ion qubits.

Submodules
----------
freqplan  - comb tooth selection, AOM beat-note plans, PLL drift compensation
dynamics  - carrier/sideband Rabi dynamics, spectra, sideband thermometry
gate      - segmented phase-modulated entangling gate and its noise model
readout   - confusion-matrix MLE correction, parity fits, Bell fidelity
protocol  - preparation/detection pulse sequences over the level populations
chain     - ion-chain equilibrium positions for arbitrary integer charges
config    - one shared configuration document for all of the above
cli       - command-line drivers writing CSV/JSON artifacts
"""

from . import chain, config, dynamics, errors, freqplan, gate, protocol, readout

__all__ = [
    "chain",
    "config",
    "dynamics",
    "errors",
    "freqplan",
    "gate",
    "protocol",
    "readout",
    "__version__",
]

__version__ = "0.1.0"
