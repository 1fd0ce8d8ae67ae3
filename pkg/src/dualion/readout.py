"""Readout error mitigation and Bell-state fidelity estimation.

A calibrated 4x4 column-stochastic confusion matrix M maps true two-qubit
populations p to measured distributions f = M p.  Maximum-likelihood
inversion recovers p from observed counts by the multiplicative EM fixed
point, which stays on the probability simplex and never decreases the
multinomial likelihood.  Parity-fringe fitting and the population/parity
fidelity formula complete the Bell-state analysis.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePhases, DomainError, InfeasibleObservation

__all__ = [
    "BASIS_LABELS",
    "ConfusionMatrix",
    "OutcomeDistribution",
    "ParityFit",
    "MleResult",
    "BootstrapResult",
    "mle_correct",
    "fit_parity",
    "bell_fidelity",
    "bootstrap_uncertainty",
]

# Two-qubit basis order used everywhere: first ion S-type, second F-type.
BASIS_LABELS = ("00'", "01'", "10'", "11'")

EM_TOL = 1e-12
EM_MAX_ITER = 100_000


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic map, column = prepared state, row = measured state."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.shape != (4, 4):
            raise DomainError(f"confusion matrix must be 4x4, got {m.shape}")
        if np.any(m < 0):
            raise DomainError("confusion matrix entries must be >= 0")
        sums = m.sum(axis=0)
        if np.any(sums <= 0):
            raise DomainError("every prepared column needs positive total probability")
        m = m / sums
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls) -> "ConfusionMatrix":
        return cls(np.eye(4))

    @classmethod
    def from_csv(cls, text_or_path) -> "ConfusionMatrix":
        """Read a 4x4 table; percent vs fraction auto-detected by column sums.

        Accepts an optional header row of prepared-state labels and an
        optional leading column of measured-state labels.
        """
        is_inline = isinstance(text_or_path, str) and "\n" in text_or_path
        if is_inline:
            rows = list(csv.reader(io.StringIO(text_or_path)))
        else:
            with open(text_or_path, newline="") as fh:
                rows = list(csv.reader(fh))
        rows = [r for r in rows if any(cell.strip() for cell in r)]

        def is_number(cell):
            try:
                float(cell)
                return True
            except ValueError:
                return False

        if rows and not all(is_number(c) for c in rows[0]):
            rows = rows[1:]
        values = []
        for row in rows:
            cells = row if is_number(row[0]) else row[1:]
            values.append([float(c) for c in cells])
        m = np.asarray(values, dtype=float)
        if m.shape != (4, 4):
            raise DomainError(f"expected a 4x4 table, got shape {m.shape}")
        if np.all(np.abs(m.sum(axis=0) - 100.0) < 5.0):
            m = m / 100.0
        return cls(m)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["measured\\prepared", *BASIS_LABELS])
        for label, row in zip(BASIS_LABELS, self.entries):
            writer.writerow([label, *(format(v, ".10g") for v in row)])
        return out.getvalue()


@dataclass(frozen=True)
class OutcomeDistribution:
    """Measured counts (or frequencies) over the four basis states."""

    counts: np.ndarray
    total_shots: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        if c.shape != (4,):
            raise DomainError("need exactly four outcome counts")
        if np.any(c < 0):
            raise DomainError("counts must be >= 0")
        if c.sum() <= 0:
            raise DomainError("observed distribution is empty")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_counts(cls, counts) -> "OutcomeDistribution":
        c = np.asarray(counts, dtype=float)
        return cls(c, int(round(float(c.sum()))))

    @classmethod
    def from_frequencies(cls, freqs, total_shots: int) -> "OutcomeDistribution":
        f = np.asarray(freqs, dtype=float)
        if abs(f.sum() - 1.0) > 1e-9:
            raise DomainError("frequencies must sum to 1")
        return cls(f * total_shots, total_shots)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.counts.sum()


@dataclass(frozen=True)
class ParityFit:
    """Least-squares fit of Pi(phi) = C cos(2 phi + phi0)."""

    contrast: float
    phase_offset: float
    residual: float  # sum of squared residuals

    def __post_init__(self):
        if not (-1e-9 <= self.contrast <= 1 + 1e-9):
            raise DomainError("contrast must lie in [0, 1]")


@dataclass(frozen=True)
class MleResult:
    """MLE-corrected populations with the EM iteration trace."""

    probabilities: np.ndarray
    iterations: int
    log_likelihoods: np.ndarray  # one value per EM iteration, non-decreasing


def mle_correct(observed: OutcomeDistribution, m: ConfusionMatrix) -> MleResult:
    """Most likely true distribution p given observed counts and matrix M.

    Maximizes sum_i n_i log((M p)_i) over the simplex via the multiplicative
    EM update p_j <- p_j * sum_i M_ij f_i / (M p)_i, iterated until the
    max-norm change drops below 1e-12 (or 1e5 iterations).
    """
    f = observed.frequencies
    mat = m.entries
    p = np.full(4, 0.25)
    lls = []
    for iteration in range(1, EM_MAX_ITER + 1):
        mp = mat @ p
        bad = (mp <= 0) & (f > 0)
        if np.any(bad):
            raise InfeasibleObservation(
                "observed outcome has zero model probability for basis states "
                f"{[BASIS_LABELS[i] for i in np.nonzero(bad)[0]]}"
            )
        support = f > 0
        lls.append(float(np.sum(f[support] * np.log(mp[support]))))
        ratio = np.where(mp > 0, f / np.where(mp > 0, mp, 1.0), 0.0)
        p_new = p * (mat.T @ ratio)
        total = p_new.sum()
        if total <= 0:
            raise InfeasibleObservation("EM update collapsed to the zero vector")
        p_new = p_new / total
        if np.max(np.abs(p_new - p)) < EM_TOL:
            p = p_new
            break
        p = p_new
    return MleResult(probabilities=p, iterations=iteration, log_likelihoods=np.asarray(lls))


def fit_parity(samples) -> ParityFit:
    """Fit parity samples (phase, value) to C cos(2 phi + phi0).

    Linear regression on the cos(2 phi)/sin(2 phi) basis; needs at least
    four samples spanning more than one phase mod pi.
    """
    samples = list(samples)
    if len(samples) < 4:
        raise DomainError("need at least four parity samples")
    phases = np.asarray([s[0] for s in samples], dtype=float)
    values = np.asarray([s[1] for s in samples], dtype=float)
    design = np.column_stack([np.cos(2 * phases), np.sin(2 * phases)])
    if np.linalg.matrix_rank(design, tol=1e-10) < 2:
        raise DegeneratePhases("all analysis phases coincide modulo pi")
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    a, b = coeffs
    contrast = float(np.hypot(a, b))
    phase_offset = float(math.atan2(-b, a) % (2 * math.pi))
    residual = float(np.sum((design @ coeffs - values) ** 2))
    return ParityFit(contrast=min(contrast, 1.0), phase_offset=phase_offset, residual=residual)


def bell_fidelity(population_even: float, contrast: float) -> float:
    """Bell fidelity (population_even + contrast) / 2.

    population_even is the summed population of the two target basis
    states; contrast is the fitted parity-fringe amplitude.
    """
    if not (0 <= population_even <= 1 and 0 <= contrast <= 1):
        raise DomainError("both arguments must lie in [0, 1]")
    return 0.5 * (population_even + contrast)


@dataclass(frozen=True)
class BootstrapResult:
    """Nonparametric bootstrap standard errors."""

    p_stderr: np.ndarray
    population_even_stderr: float
    fidelity_stderr: float | None
    resamples: int


def bootstrap_uncertainty(
    observed: OutcomeDistribution,
    m: ConfusionMatrix,
    resamples: int = 1000,
    seed: int = 0,
    contrast: float | None = None,
    contrast_stderr: float = 0.0,
    even_states: tuple = (0, 3),
) -> BootstrapResult:
    """Multinomial bootstrap of the MLE correction.

    Each resample redraws the observed counts, reruns mle_correct, and
    re-evaluates the even-pair population.  When a parity contrast (and
    optionally its standard error) is supplied, the Bell fidelity spread
    is propagated as well.  Deterministic for a fixed seed.
    """
    if resamples < 100:
        raise DomainError("resamples must be >= 100")
    rng = np.random.default_rng(seed)
    n = max(int(observed.total_shots), 1)
    f = observed.frequencies
    ps = np.empty((resamples, 4))
    for i in range(resamples):
        counts = rng.multinomial(n, f)
        ps[i] = mle_correct(OutcomeDistribution.from_counts(counts), m).probabilities
    p_stderr = ps.std(axis=0, ddof=1)
    even = ps[:, list(even_states)].sum(axis=1)
    even_stderr = float(even.std(ddof=1))
    fid_stderr = None
    if contrast is not None:
        contrasts = contrast + contrast_stderr * rng.standard_normal(resamples)
        fids = 0.5 * (even + np.clip(contrasts, 0.0, 1.0))
        fid_stderr = float(fids.std(ddof=1))
    return BootstrapResult(
        p_stderr=p_stderr,
        population_even_stderr=even_stderr,
        fidelity_stderr=fid_stderr,
        resamples=resamples,
    )
