"""Equilibrium positions of an ion chain with arbitrary integer charges.

The static axial confinement is linear in charge (potential energy Q*phi),
so in dimensionless units the chain minimizes

    V(z) = sum_i Q_i k z_i^2 / 2 + sum_{i<j} Q_i Q_j / |z_i - z_j|

with k the trap curvature.  Positions are reported in units of z0, the
half-separation of a (1,1) pair at the same curvature, which makes the
result curvature independent.  A doubly charged ion in a two-ion chain
lands the companion at z1 = -1.526 z0, the signature used to tell a
second-ionization event from molecule formation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "IonChainConfig",
    "EquilibriumResult",
    "equilibrium_positions",
    "PUBLISHED_THEORY_Z1",
    "PUBLISHED_MEASURED_Z1",
]

# Reference comparison constants for the (1,2) two-ion configuration.
PUBLISHED_THEORY_Z1 = -1.53
PUBLISHED_MEASURED_Z1 = -1.61

GRADIENT_TOL = 1e-12
MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class IonChainConfig:
    """Charges (elementary-charge units) and trap curvature (arbitrary units)."""

    charges: tuple
    trap_curvature: float = 1.0

    def __post_init__(self):
        charges = tuple(int(q) for q in self.charges)
        if len(charges) < 1:
            raise DomainError("need at least one ion")
        if any(q < 1 for q in charges):
            raise DomainError("all charges must be >= 1")
        if not (self.trap_curvature > 0):
            raise DomainError("trap_curvature must be > 0")
        object.__setattr__(self, "charges", charges)


@dataclass(frozen=True)
class EquilibriumResult:
    """Solved chain positions in z0 units plus solver diagnostics."""

    positions: tuple          # z0 units, strictly increasing
    positions_raw: tuple      # solver units (curvature folded in)
    z0: float                 # single-charge pair half-separation, solver units
    converged: bool
    residual_force_norm: float
    iterations: int

    def to_report(self, config: IonChainConfig) -> dict:
        return {
            "charges": list(config.charges),
            "positions_z0_units": list(self.positions),
            "published_theory_z1_z0": PUBLISHED_THEORY_Z1,
            "published_measured_z1_z0": PUBLISHED_MEASURED_Z1,
            "residual_force_norm": self.residual_force_norm,
            "converged": self.converged,
        }


def _potential(z, charges, k):
    v = 0.5 * k * np.dot(charges, z**2)
    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            v += charges[i] * charges[j] / abs(z[i] - z[j])
    return v


def _gradient(z, charges, k):
    g = k * charges * z
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, np.inf)
    qq = charges[:, None] * charges[None, :]
    g -= np.sum(qq * np.sign(diff) / diff**2, axis=1)
    return g


def _hessian(z, charges, k):
    n = len(z)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, np.inf)
    qq = charges[:, None] * charges[None, :]
    off = -2.0 * qq / np.abs(diff) ** 3
    h = off.copy()
    np.fill_diagonal(h, k * charges - off.sum(axis=1))
    return h


def equilibrium_positions(config: IonChainConfig) -> EquilibriumResult:
    """Minimize the chain potential by damped Newton iteration.

    Starts from equally spaced ordered positions; steps are backtracked
    whenever they break the ordering or fail to reduce the potential.
    Raises ConvergenceError if the gradient norm does not fall below
    tolerance within the iteration budget.
    """
    charges = np.asarray(config.charges, dtype=float)
    k = float(config.trap_curvature)
    n = len(charges)
    # Half-separation of the (1,1) reference pair at this curvature.
    z0 = (0.25 / k) ** (1.0 / 3.0)

    if n == 1:
        return EquilibriumResult(
            positions=(0.0,),
            positions_raw=(0.0,),
            z0=z0,
            converged=True,
            residual_force_norm=0.0,
            iterations=0,
        )

    scale = (charges.sum() / k) ** (1.0 / 3.0)
    z = (np.arange(n) - 0.5 * (n - 1)) * scale
    if np.any(np.diff(z) <= 0):
        raise DomainError("initial positions must be strictly increasing")

    iterations = 0
    grad = _gradient(z, charges, k)
    while np.linalg.norm(grad) > GRADIENT_TOL:
        if iterations >= MAX_ITERATIONS:
            raise ConvergenceError(
                f"no convergence after {MAX_ITERATIONS} iterations "
                f"(gradient norm {np.linalg.norm(grad):.3e})",
                residual=float(np.linalg.norm(grad)),
            )
        step = np.linalg.solve(_hessian(z, charges, k), -grad)
        v_here = _potential(z, charges, k)
        alpha = 1.0
        while True:
            trial = z + alpha * step
            if np.all(np.diff(trial) > 0) and _potential(trial, charges, k) <= v_here:
                break
            alpha *= 0.5
            if alpha < 1e-16:
                trial = z
                break
        z = trial
        grad = _gradient(z, charges, k)
        iterations += 1

    residual = float(np.linalg.norm(grad))
    return EquilibriumResult(
        positions=tuple((z / z0).tolist()),
        positions_raw=tuple(z.tolist()),
        z0=z0,
        converged=True,
        residual_force_norm=residual,
        iterations=iterations,
    )
