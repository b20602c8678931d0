"""Rank tests and correlations used for discriminant and substantive validity checks."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import UndefinedTestError, ValidationError
from .instrument import RatingDataset

EXACT_MAX_N = 12


@dataclass(frozen=True)
class TestResult:
    method: str
    statistic: float
    p_value: float
    exact: bool
    tie_correction_applied: bool
    n1: int | None = None
    n2: int | None = None
    n_pairs: int | None = None
    n_zeros_dropped: int | None = None
    z: float | None = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CorrelationResult:
    method: str
    coefficient: float
    p_value: float
    n: int
    label: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _sample(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValidationError(f"empty sample {name}")
    if np.isnan(x).any():
        raise ValidationError(f"sample {name} contains missing values")
    return x


def _tie_sum(values: np.ndarray) -> float:
    _, counts = np.unique(values, return_counts=True)
    return float((counts**3 - counts).sum())


def _normal_p(stat: float, mean: float, var: float) -> tuple[float, float]:
    """Two-sided p with continuity correction; returns (p, z)."""
    if var <= 0:
        return 1.0, 0.0
    z = max(abs(stat - mean) - 0.5, 0.0) / np.sqrt(var)
    return float(min(1.0, 2 * stats.norm.sf(z))), float(np.sign(stat - mean) * z)


METHODS = ("auto", "exact", "asymptotic")


def _use_exact(method: str, n: int, ties: float) -> bool:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "exact" and ties > 0:
        raise ValidationError("exact p-values need tie-free data")
    return method == "exact" or (method == "auto" and n <= EXACT_MAX_N and ties == 0)


def _rank_sum_counts(n1: int, n: int) -> np.ndarray:
    """Number of n1-subsets of ranks 1..n with each possible sum (index = sum)."""
    top = n * (n + 1) // 2
    counts = np.zeros((n1 + 1, top + 1))
    counts[0, 0] = 1
    for r in range(1, n + 1):
        # descending size so each rank is used at most once
        for size in range(min(r, n1), 0, -1):
            counts[size, r:] += counts[size - 1, : top + 1 - r]
    return counts[n1]


def rank_sum_test(a, b, method: str = "auto") -> TestResult:
    """Two-sided Mann-Whitney U test; ``statistic`` is U for sample ``a``.

    With ``method="auto"`` the p-value is exact (counting all group
    labelings) when ``len(a) + len(b) <= 12`` and there are no ties, and
    otherwise the normal approximation with tie and continuity corrections.
    ``"exact"`` and ``"asymptotic"`` force one route.
    """
    a, b = _sample(a, "a"), _sample(b, "b")
    n1, n2 = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = stats.rankdata(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)
    n = n1 + n2
    ties = _tie_sum(pooled)
    if _use_exact(method, n, ties):
        counts = _rank_sum_counts(n1, n)[n1 * (n1 + 1) // 2:]
        k = int(round(u))
        p = 2 * min(counts[: k + 1].sum(), counts[k:].sum()) / counts.sum()
        return TestResult("mann-whitney-u", u, float(min(1.0, p)), True, False, n1=n1, n2=n2)
    var = n1 * n2 / 12 * ((n + 1) - ties / (n * (n - 1)))
    p, z = _normal_p(u, n1 * n2 / 2, var)
    return TestResult("mann-whitney-u", u, p, False, ties > 0, n1=n1, n2=n2, z=z)


def signed_rank_test(x, y=None, method: str = "auto") -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Pass either two equal-length samples or a single sequence of ``(x, y)``
    pairs. Zero differences are dropped and counted; ``statistic`` is the
    smaller of the positive and negative rank sums. ``method`` works as in
    :func:`rank_sum_test`, with the size limit applied to nonzero pairs.
    """
    if y is None:
        pairs = np.asarray(x, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValidationError("expected a sequence of (x, y) pairs")
        x, y = pairs[:, 0], pairs[:, 1]
    x, y = _sample(x, "x"), _sample(y, "y")
    if x.size != y.size:
        raise ValidationError(f"paired samples differ in length ({x.size} vs {y.size})")
    d = x - y
    nonzero = d[d != 0]
    zeros = int(d.size - nonzero.size)
    n = nonzero.size
    if n == 0:
        raise UndefinedTestError("signed-rank test is undefined: all paired differences are zero")
    ranks = stats.rankdata(np.abs(nonzero))
    w_plus = float(ranks[nonzero > 0].sum())
    w_minus = float(ranks[nonzero < 0].sum())
    w = min(w_plus, w_minus)
    ties = _tie_sum(np.abs(nonzero))
    if _use_exact(method, n, ties):
        # distribution of the positive rank sum over all 2^n sign patterns
        counts = np.zeros(n * (n + 1) // 2 + 1)
        counts[0] = 1
        for r in range(1, n + 1):
            counts[r:] = counts[r:] + counts[:-r].copy()
        p = 2 * counts[: int(w) + 1].sum() / 2**n
        return TestResult("wilcoxon-signed-rank", w, float(min(1.0, p)), True, False,
                          n_pairs=n, n_zeros_dropped=zeros)
    var = n * (n + 1) * (2 * n + 1) / 24 - ties / 48
    p, z = _normal_p(w_plus, n * (n + 1) / 4, var)
    return TestResult("wilcoxon-signed-rank", w, p, False, ties > 0,
                      n_pairs=n, n_zeros_dropped=zeros, z=z)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc, yc = x - x.mean(), y - y.mean()
    return float(np.clip((xc @ yc) / np.sqrt((xc @ xc) * (yc @ yc)), -1.0, 1.0))


def correlation_test(x, y, method: str = "spearman", label: str | None = None) -> CorrelationResult:
    """Pearson or Spearman (Pearson on midranks) correlation with a t-based two-sided p."""
    x, y = _sample(x, "x"), _sample(y, "y")
    if x.size != y.size:
        raise ValidationError(f"samples differ in length ({x.size} vs {y.size})")
    n = x.size
    if n < 3:
        raise ValidationError(f"at least 3 observations required, got {n}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValidationError("correlation is undefined for a constant input")
    if method == "spearman":
        x, y = stats.rankdata(x), stats.rankdata(y)
    elif method != "pearson":
        raise ValueError(f"unknown method {method!r}; expected 'pearson' or 'spearman'")
    rho = _pearson(x, y)
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * np.sqrt((n - 2) / (1 - rho**2))
        p = float(2 * stats.t.sf(abs(t), n - 2))
    return CorrelationResult(method, rho, p, n, label)


# --------------------------------------------------------------------------
# dataset-level analyses
# --------------------------------------------------------------------------


def subject_statistic(dataset: RatingDataset, attribute: str, statistic: str = "mean") -> dict[str, float]:
    """Aggregate each subject's ratings of ``attribute`` by mean or sample standard deviation."""
    by_subject: dict[str, list[float]] = defaultdict(list)
    for rec in dataset.records:
        if rec.attribute == attribute and rec.value is not None:
            by_subject[rec.subject_id].append(rec.value)
    if statistic == "mean":
        return {s: float(np.mean(v)) for s, v in sorted(by_subject.items())}
    if statistic == "stddev":
        short = [s for s, v in by_subject.items() if len(v) < 2]
        if short:
            raise ValidationError(
                f"insufficient ratings: {len(short)} subject(s) have fewer than 2 ratings of "
                f"{attribute!r} (e.g. {sorted(short)[0]!r}); the standard deviation needs 2"
            )
        return {s: float(np.std(v, ddof=1)) for s, v in sorted(by_subject.items())}
    raise ValueError(f"unknown statistic {statistic!r}; expected 'mean' or 'stddev'")


def length_quality_pairs(
    dataset: RatingDataset, covariate: str, statistic: str = "mean", attributes: Sequence[str] | None = None
) -> dict[str, tuple[list[str], np.ndarray, np.ndarray]]:
    """Per attribute: subject ids, covariate values and aggregated scores, aligned."""
    if covariate not in dataset.covariate_names:
        raise ValidationError(f"missing covariate {covariate!r}")
    out = {}
    for attribute in attributes or dataset.attributes:
        agg = subject_statistic(dataset, attribute, statistic)
        subjects = [s for s in agg if covariate in dataset.covariates.get(s, {})]
        cov = np.array([dataset.covariates[s][covariate] for s in subjects])
        out[attribute] = (subjects, cov, np.array([agg[s] for s in subjects]))
    return out


def length_quality_analysis(
    dataset: RatingDataset, covariate: str, statistic: str = "mean", attributes: Sequence[str] | None = None
) -> list[CorrelationResult]:
    """Spearman correlation of a subject covariate with each attribute's aggregated score."""
    results = []
    for attribute, (_, cov, agg) in length_quality_pairs(dataset, covariate, statistic, attributes).items():
        results.append(correlation_test(cov, agg, "spearman", label=attribute))
    return results


def _keys(dataset: RatingDataset, attributes: Iterable[str] | None) -> list[str]:
    if attributes:
        return list(attributes)
    return [k for k in dataset.attributes if dataset.schema.scale_for(k).kind != "binary"]


def group_scores(
    dataset: RatingDataset, covariate: str, code: float, attributes: Sequence[str] | None = None
) -> np.ndarray:
    """All ratings of subjects whose ``covariate`` equals ``code``, pooled over attributes."""
    keys = set(_keys(dataset, attributes))
    members = {s for s, v in dataset.covariates.items() if v.get(covariate) == code}
    return np.array(
        [r.value for r in dataset.records if r.subject_id in members and r.attribute in keys and r.value is not None],
        dtype=float,
    )


def panel_pairs(
    dataset: RatingDataset,
    panel_a: Sequence[str],
    panel_b: Sequence[str],
    attributes: Sequence[str] | None = None,
) -> tuple[list[str], np.ndarray]:
    """Mean score per subject from each of two rater panels, for subjects both panels rated."""
    keys = set(_keys(dataset, attributes))
    a_set, b_set = set(panel_a), set(panel_b)
    sums: dict[str, list[list[float]]] = defaultdict(lambda: [[], []])
    for r in dataset.records:
        if r.attribute not in keys or r.value is None:
            continue
        if r.rater_id in a_set:
            sums[r.subject_id][0].append(r.value)
        elif r.rater_id in b_set:
            sums[r.subject_id][1].append(r.value)
    subjects = sorted(s for s, (va, vb) in sums.items() if va and vb)
    pairs = np.array([[np.mean(sums[s][0]), np.mean(sums[s][1])] for s in subjects]).reshape(-1, 2)
    return subjects, pairs
