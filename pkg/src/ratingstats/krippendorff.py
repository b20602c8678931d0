"""Krippendorff's alpha on incomplete rating matrices.

Units (rows) with fewer than two ratings are not pairable and are ignored.
The bootstrap resamples pairable units with replacement. Replicate ``b``
draws from ``numpy.random.default_rng([seed, b])``, so the interval depends
only on ``(seed, replicates)`` and not on how replicates are spread over
workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedCoefficientError, ValidationError
from .instrument import RatingMatrix
from .reliability import ReliabilityEstimate

LEVELS = ("nominal", "ordinal", "interval")
MAX_DROPPED_FRACTION = 0.10


@dataclass(frozen=True, eq=False)
class CoincidenceMatrix:
    values: tuple[float, ...]
    counts: np.ndarray

    @property
    def n_pairable(self) -> float:
        return float(self.counts.sum())

    @property
    def margins(self) -> np.ndarray:
        return self.counts.sum(axis=1)


@dataclass(frozen=True)
class KrippendorffResult:
    alpha: float
    observed_disagreement: float
    expected_disagreement: float
    level: str
    n_units: int
    n_pairable: float
    ci: ReliabilityEstimate | None = None
    replicates: int = 0
    dropped_replicates: int = 0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "Do": self.observed_disagreement,
            "De": self.expected_disagreement,
            "level": self.level,
            "n_units": self.n_units,
            "n_pairable": self.n_pairable,
            "ci": None if self.ci is None else [self.ci.ci_lower, self.ci.ci_upper],
            "ci_level": None if self.ci is None else self.ci.ci_level,
            "replicates": self.replicates,
            "dropped_replicates": self.dropped_replicates,
        }


def _unit_contributions(matrix) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-unit coincidence contributions, shape (units, v, v), and the value set."""
    x = matrix.cells if isinstance(matrix, RatingMatrix) else np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise ValidationError("rating matrix must be two-dimensional")
    pairable = (~np.isnan(x)).sum(axis=1) >= 2
    x = x[pairable]
    if x.shape[0] == 0:
        raise ValidationError("no pairable units: every unit has fewer than 2 ratings")
    values = np.unique(x[~np.isnan(x)])
    # n_uv: how often value v occurs in unit u
    counts = np.stack([(x == v).sum(axis=1) for v in values], axis=1).astype(float)
    m = counts.sum(axis=1)
    outer = counts[:, :, None] * counts[:, None, :]
    idx = np.arange(len(values))
    outer[:, idx, idx] -= counts
    return outer / (m - 1)[:, None, None], values, x.shape[0]


def coincidence(matrix: RatingMatrix | np.ndarray) -> CoincidenceMatrix:
    """Coincidence matrix: each ordered within-unit pair adds ``1/(m_u - 1)``."""
    contrib, values, _ = _unit_contributions(matrix)
    return CoincidenceMatrix(tuple(float(v) for v in values), contrib.sum(axis=0))


def _delta2(values: np.ndarray, margins: np.ndarray, level: str) -> np.ndarray:
    """Squared difference function; ``margins`` may carry leading batch axes."""
    v = len(values)
    if level == "nominal":
        return np.broadcast_to(1.0 - np.eye(v), margins.shape[:-1] + (v, v))
    if level == "interval":
        d = (values[:, None] - values[None, :]) ** 2
        return np.broadcast_to(d, margins.shape[:-1] + (v, v))
    if level == "ordinal":
        cum = np.cumsum(margins, axis=-1)
        lo = np.minimum.outer(np.arange(v), np.arange(v))
        hi = np.maximum.outer(np.arange(v), np.arange(v))
        # sum of n_g for g in [lo, hi]
        between = cum[..., hi] - cum[..., lo] + margins[..., lo]
        half = (margins[..., :, None] + margins[..., None, :]) / 2
        return (between - half) ** 2
    raise ValueError(f"unknown level {level!r}; expected one of {LEVELS}")


def _disagreements(counts: np.ndarray, values: np.ndarray, level: str) -> tuple[np.ndarray, np.ndarray]:
    margins = counts.sum(axis=-1)
    n = margins.sum(axis=-1)
    d2 = _delta2(values, margins, level)
    with np.errstate(invalid="ignore", divide="ignore"):
        do = (counts * d2).sum(axis=(-2, -1)) / n
        de = (margins[..., :, None] * margins[..., None, :] * d2).sum(axis=(-2, -1)) / (n * (n - 1))
    return do, de


def alpha(matrix: RatingMatrix | np.ndarray, level: str = "ordinal") -> KrippendorffResult:
    """Krippendorff's alpha = 1 - Do/De at the given measurement level."""
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; expected one of {LEVELS}")
    contrib, values, n_units = _unit_contributions(matrix)
    counts = contrib.sum(axis=0)
    do, de = _disagreements(counts, values, level)
    if not de > 0:
        raise UndefinedCoefficientError(
            "Krippendorff's alpha is undefined: expected disagreement is zero (one distinct value)"
        )
    return KrippendorffResult(
        alpha=float(1 - do / de),
        observed_disagreement=float(do),
        expected_disagreement=float(de),
        level=level,
        n_units=n_units,
        n_pairable=float(counts.sum()),
    )


def _bootstrap_chunk(flat: np.ndarray, values, level, n_units, seed, indices) -> np.ndarray:
    v = len(values)
    weights = np.empty((len(indices), n_units))
    for row, b in enumerate(indices):
        rng = np.random.default_rng([seed, b])
        weights[row] = np.bincount(rng.integers(0, n_units, n_units), minlength=n_units)
    counts = (weights @ flat).reshape(len(indices), v, v)
    do, de = _disagreements(counts, values, level)
    out = np.full(len(indices), np.nan)
    ok = de > 0
    out[ok] = 1 - do[ok] / de[ok]
    return out


def bootstrap_alphas(
    matrix: RatingMatrix | np.ndarray,
    level: str = "ordinal",
    replicates: int = 2000,
    seed: int = 0,
    workers: int = 1,
    chunk: int = 256,
) -> np.ndarray:
    """Alpha for each bootstrap replicate; NaN marks a degenerate resample (De = 0)."""
    contrib, values, n_units = _unit_contributions(matrix)
    flat = contrib.reshape(n_units, -1)
    chunks = [range(i, min(i + chunk, replicates)) for i in range(0, replicates, chunk)]

    def run(idx):
        return _bootstrap_chunk(flat, values, level, n_units, seed, idx)

    if workers <= 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    return np.concatenate(parts) if parts else np.empty(0)


def alpha_ci(
    matrix: RatingMatrix | np.ndarray,
    level: str = "ordinal",
    replicates: int = 2000,
    ci_level: float = 0.95,
    seed: int = 0,
    workers: int = 1,
) -> KrippendorffResult:
    """Alpha with a percentile bootstrap interval over resampled units.

    Raises
    ------
    ValidationError
        If ``replicates < 200`` or more than 10% of resamples are degenerate.
    """
    if replicates < 200:
        raise ValidationError(f"at least 200 bootstrap replicates required, got {replicates}")
    if not 0 < ci_level < 1:
        raise ValueError("ci_level must lie in (0, 1)")
    point = alpha(matrix, level)
    boots = bootstrap_alphas(matrix, level, replicates, seed, workers)
    kept = boots[~np.isnan(boots)]
    dropped = replicates - kept.size
    if dropped > MAX_DROPPED_FRACTION * replicates:
        raise ValidationError(
            f"{dropped} of {replicates} bootstrap resamples had zero expected disagreement "
            f"(more than {MAX_DROPPED_FRACTION:.0%})"
        )
    a = 1 - ci_level
    lower, upper = np.percentile(kept, [100 * a / 2, 100 * (1 - a / 2)])
    n_subjects, n_raters = (matrix.cells.shape if isinstance(matrix, RatingMatrix) else np.shape(matrix))
    ci = ReliabilityEstimate(
        method="krippendorff",
        value=point.alpha,
        ci_lower=float(min(lower, point.alpha)),
        ci_upper=float(max(upper, point.alpha)),
        ci_level=ci_level,
        ci_method="bootstrap",
        n_subjects=int(n_subjects),
        n_raters=int(n_raters),
    )
    return KrippendorffResult(
        alpha=point.alpha,
        observed_disagreement=point.observed_disagreement,
        expected_disagreement=point.expected_disagreement,
        level=level,
        n_units=point.n_units,
        n_pairable=point.n_pairable,
        ci=ci,
        replicates=replicates,
        dropped_replicates=int(dropped),
    )
