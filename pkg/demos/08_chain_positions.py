"""Two-ion equilibrium positions and the second-ionization signature.

A doubly charged ion in the harmonic axial trap pushes its singly charged
companion out to z1 = -1.526 z0 (z0 being the half-separation of two
singly charged ions), the fingerprint that distinguishes a second
ionization event from molecule formation.
"""

from dualion.chain import (
    PUBLISHED_MEASURED_Z1,
    PUBLISHED_THEORY_Z1,
    IonChainConfig,
    equilibrium_positions,
)

for charges in [(1, 1), (1, 2), (1, 3), (2, 2)]:
    result = equilibrium_positions(IonChainConfig(charges))
    positions = ", ".join(f"{z:+.4f}" for z in result.positions)
    print(
        f"charges {charges}: positions [{positions}] z0 units "
        f"(gradient norm {result.residual_force_norm:.1e}, "
        f"{result.iterations} Newton steps)"
    )

print(
    f"\n(1,2) companion position vs published values: "
    f"theory {PUBLISHED_THEORY_Z1} z0, measured {PUBLISHED_MEASURED_Z1} z0"
)

d = 3 ** (1 / 3)
print(
    "closed-form cross-check for (1,2): "
    f"z1 = -2/d^2 = {-2 / d**2:.6f}, z2 = 1/d^2 = {1 / d**2:.6f} "
    "(pre-normalization units, d^3 = total charge)"
)
