"""Plan the comb beat notes that drive both qubit types with one laser.

A 15 ps pulsed laser at 80 MHz repetition rate spans a 67 GHz comb, wide
enough to bridge both the 12.642 GHz ground-qubit and the 3.620 GHz
metastable-qubit splittings.  This script picks the comb teeth, solves
the AWG frequencies for carrier and sideband driving, and shows how the
PLL tracks repetition-rate drift.
"""

from dualion.freqplan import (
    SPECIES_F,
    SPECIES_S,
    BeatSign,
    CombSpec,
    comb_bandwidth,
    pll_drift_compensation,
    select_tooth,
    solve_awg,
)

comb = CombSpec(repetition_rate=80e6, pulse_width=15e-12)
print(f"comb bandwidth: {comb_bandwidth(comb) / 1e9:.1f} GHz")
for species in (SPECIES_S, SPECIES_F):
    print(
        f"  covers the {species.label} splitting "
        f"({species.splitting / 1e9:.3f} GHz): {comb.covers(species.splitting)}"
    )

print("\ntooth selection within a 40 MHz AOM tuning span:")
for species in (SPECIES_S, SPECIES_F):
    cands = select_tooth(species.splitting, comb.repetition_rate, 40e6)
    best = cands[0]
    print(
        f"  {species.label}: tooth {best.tooth}, residual {best.residual / 1e6:+.1f} MHz"
    )

print("\nbeat-note plans (carrier, then red/blue sidebands of the 2.225 MHz mode):")
settings = {"S": (240e6, BeatSign.PLUS), "F": (250e6, BeatSign.MINUS)}
for species in (SPECIES_S, SPECIES_F):
    pll, sign = settings[species.label]
    for detuning in (0.0, -2.225e6, +2.225e6):
        plan = solve_awg(species, pll, detuning, sign, comb)
        print(
            f"  {species.label} at {detuning / 1e6:+.3f} MHz detuning: "
            f"AWG {plan.awg_frequency / 1e6:.6f} MHz (PLL {pll / 1e6:.0f} MHz, "
            f"sign {sign.name.lower()})"
        )

print("\nPLL compensation for repetition-rate drift:")
for drift in (+1.0, -10.0):
    s_shift = pll_drift_compensation(SPECIES_S, drift)
    f_shift = pll_drift_compensation(SPECIES_F, drift)
    print(f"  drift {drift:+.0f} Hz -> PLL shifts S {s_shift:+.0f} Hz, F {f_shift:+.0f} Hz")
