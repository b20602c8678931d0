"""Two-way ANOVA reliability: intraclass correlations, Cronbach's alpha, exact agreement.

The six intraclass correlation forms follow Shrout & Fleiss (1979):

=========  ==========================  =================
label      model                       unit
=========  ==========================  =================
icc-1-1    one-way random              single rater
icc-2-1    two-way random, agreement   single rater
icc-3-1    two-way mixed, consistency  single rater
icc-1-k    one-way random              mean of k raters
icc-2-k    two-way random, agreement   mean of k raters
icc-3-k    two-way mixed, consistency  mean of k raters
=========  ==========================  =================

All of them need a complete subjects x raters matrix; build one with
``build_matrix(..., policy="listwise-complete")``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import f as f_dist

from .errors import UndefinedCoefficientError, ValidationError
from .instrument import RatingMatrix

ICC_FORMS = ("icc-1-1", "icc-2-1", "icc-3-1", "icc-1-k", "icc-2-k", "icc-3-k")

# residual sums of squares below this fraction of the total are rounding noise
_RESIDUAL_RTOL = 1e-13


@dataclass(frozen=True)
class AnovaTable:
    ms_subjects: float
    ms_raters: float
    ms_error: float
    ms_within: float
    n: int
    k: int
    ss_total: float

    @property
    def df_subjects(self) -> int:
        return self.n - 1

    @property
    def df_raters(self) -> int:
        return self.k - 1

    @property
    def df_error(self) -> int:
        return (self.n - 1) * (self.k - 1)

    @property
    def df_within(self) -> int:
        return self.n * (self.k - 1)


@dataclass(frozen=True)
class ReliabilityEstimate:
    method: str
    value: float
    ci_lower: float | None
    ci_upper: float | None
    ci_level: float
    ci_method: str | None
    n_subjects: int
    n_raters: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AgreementSummary:
    attribute: str
    proportion_unanimous: float
    n_unanimous: int
    n_subjects: int

    def to_dict(self) -> dict:
        return asdict(self)


def _cells(matrix) -> np.ndarray:
    if isinstance(matrix, RatingMatrix):
        return matrix.cells
    return np.asarray(matrix, dtype=float)


def _complete_cells(matrix) -> np.ndarray:
    x = _cells(matrix)
    if x.ndim != 2:
        raise ValidationError("rating matrix must be two-dimensional")
    if np.isnan(x).any():
        raise ValidationError(
            "incomplete matrix: ANOVA-based coefficients need every subject rated by "
            "every rater (use build_matrix with policy='listwise-complete')"
        )
    n, k = x.shape
    if n < 2 or k < 2:
        raise ValidationError(f"degenerate dimensions: need >= 2 subjects and >= 2 raters, got {n}x{k}")
    return x


def anova_two_way(matrix: RatingMatrix | np.ndarray) -> AnovaTable:
    """Mean squares of the two-way crossed subjects x raters decomposition."""
    x = _complete_cells(matrix)
    n, k = x.shape
    grand = x.mean()
    row = x.mean(axis=1)
    col = x.mean(axis=0)
    ss_total = float(((x - grand) ** 2).sum())
    ss_subjects = float(k * ((row - grand) ** 2).sum())
    ss_raters = float(n * ((col - grand) ** 2).sum())
    ss_error = float(((x - row[:, None] - col[None, :] + grand) ** 2).sum())
    if ss_error <= _RESIDUAL_RTOL * ss_total:
        ss_error = 0.0
    return AnovaTable(
        ms_subjects=ss_subjects / (n - 1),
        ms_raters=ss_raters / (k - 1),
        ms_error=ss_error / ((n - 1) * (k - 1)),
        ms_within=(ss_raters + ss_error) / (n * (k - 1)),
        n=n,
        k=k,
        ss_total=ss_total,
    )


def _ratio(num: float, den: float, what: str, scale: float) -> float:
    # a denominator that cancels to rounding noise is treated as zero
    if abs(den) <= 1e-12 * scale:
        raise UndefinedCoefficientError(f"{what} is undefined: zero denominator (constant ratings?)")
    return num / den


def icc_point(table: AnovaTable, form: str) -> float:
    """Point estimate of one ICC form from ANOVA mean squares."""
    s, r, e, w = table.ms_subjects, table.ms_raters, table.ms_error, table.ms_within
    n, k = table.n, table.k
    scale = s + k * (r + e + w)
    if form == "icc-1-1":
        return _ratio(s - w, s + (k - 1) * w, form, scale)
    if form == "icc-1-k":
        return _ratio(s - w, s, form, scale)
    if form == "icc-2-1":
        return _ratio(s - e, s + (k - 1) * e + k * (r - e) / n, form, scale)
    if form == "icc-2-k":
        return _ratio(s - e, s + (r - e) / n, form, scale)
    if form == "icc-3-1":
        return _ratio(s - e, s + (k - 1) * e, form, scale)
    if form == "icc-3-k":
        return _ratio(s - e, s, form, scale)
    raise ValueError(f"unknown ICC form {form!r}; expected one of {ICC_FORMS}")


def _f_bounds(f_obs: float, df1: float, df2: float, alpha: float) -> tuple[float, float]:
    """Shrout-Fleiss F bounds (F_L, F_U) for an observed variance ratio."""
    if np.isinf(f_obs):
        return np.inf, np.inf
    return f_obs / f_dist.ppf(1 - alpha / 2, df1, df2), f_obs * f_dist.ppf(1 - alpha / 2, df2, df1)


def _single_from_f(fb: float, k: int) -> float:
    return 1.0 if np.isinf(fb) else (fb - 1) / (fb + k - 1)


def _average_from_f(fb: float) -> float:
    return 1.0 if np.isinf(fb) else 1 - 1 / fb


def _icc_ci(table: AnovaTable, form: str, alpha: float) -> tuple[float | None, float | None]:
    s, r, e, w = table.ms_subjects, table.ms_raters, table.ms_error, table.ms_within
    n, k = table.n, table.k
    if form in ("icc-1-1", "icc-1-k", "icc-3-1", "icc-3-k"):
        resid, df2 = (w, table.df_within) if form.startswith("icc-1") else (e, table.df_error)
        if s == 0:
            return None, None
        f_obs = np.inf if resid == 0 else s / resid
        fl, fu = _f_bounds(f_obs, n - 1, df2, alpha)
        if form.endswith("-1"):
            return _single_from_f(fl, k), _single_from_f(fu, k)
        return _average_from_f(fl), _average_from_f(fu)

    # icc-2-*: Satterthwaite degrees of freedom for the denominator mixture
    if e == 0:
        return None, None
    rho = icc_point(table, "icc-2-1")
    fj = r / e
    a = k * rho * fj
    b = n * (1 + (k - 1) * rho) - k * rho
    v = (n - 1) * (k - 1) * (a + b) ** 2 / ((n - 1) * a**2 + b**2)
    f_low = f_dist.ppf(1 - alpha / 2, n - 1, v)
    f_up = f_dist.ppf(1 - alpha / 2, v, n - 1)
    lower = n * (s - f_low * e) / (f_low * (k * r + (k * n - k - n) * e) + n * s)
    upper = n * (f_up * s - e) / (k * r + (k * n - k - n) * e + n * f_up * s)
    if form == "icc-2-k":
        lower, upper = _step_up(lower, k), _step_up(upper, k)
    return float(lower), float(upper)


def _step_up(single: float, k: int) -> float:
    """Spearman-Brown step-up; diverges to -inf as ``single`` falls to -1/(k-1)."""
    if single <= -1 / (k - 1):
        return -np.inf
    return single * k / (1 + single * (k - 1))


def icc(matrix: RatingMatrix | np.ndarray, form: str = "icc-3-k", ci_level: float = 0.95) -> ReliabilityEstimate:
    """Intraclass correlation with a Shrout-Fleiss confidence interval.

    Parameters
    ----------
    matrix
        Complete subjects x raters ratings.
    form
        One of :data:`ICC_FORMS`.
    ci_level
        Two-sided confidence level.

    Raises
    ------
    UndefinedCoefficientError
        If the coefficient's denominator is zero (e.g. all cells equal).
    """
    if not 0 < ci_level < 1:
        raise ValueError("ci_level must lie in (0, 1)")
    table = anova_two_way(matrix)
    value = icc_point(table, form)
    lower, upper = _icc_ci(table, form, 1 - ci_level)
    return ReliabilityEstimate(
        method=form,
        value=float(value),
        ci_lower=None if lower is None else float(lower),
        ci_upper=None if upper is None else float(upper),
        ci_level=ci_level,
        ci_method="shrout-fleiss",
        n_subjects=table.n,
        n_raters=table.k,
    )


def icc3k_interval(f_obs: np.ndarray, n: int, k: int, ci_level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ICC(3,k) bounds for an array of observed F = MSs/MSe ratios."""
    alpha = 1 - ci_level
    df1, df2 = n - 1, (n - 1) * (k - 1)
    q_hi = f_dist.ppf(1 - alpha / 2, df1, df2)
    q_lo = f_dist.ppf(alpha / 2, df1, df2)
    f_obs = np.asarray(f_obs, dtype=float)
    with np.errstate(divide="ignore"):
        return 1 - q_hi / f_obs, 1 - q_lo / f_obs


def cronbach_alpha(matrix: RatingMatrix | np.ndarray, ci_level: float = 0.95) -> ReliabilityEstimate:
    """Cronbach's alpha over the columns of a complete matrix, with a Feldt interval."""
    if not 0 < ci_level < 1:
        raise ValueError("ci_level must lie in (0, 1)")
    x = _complete_cells(matrix)
    n, k = x.shape
    item_var = x.var(axis=0, ddof=1).sum()
    total_var = x.sum(axis=1).var(ddof=1)
    if total_var == 0:
        raise UndefinedCoefficientError("Cronbach's alpha is undefined: zero variance of sum scores")
    alpha_hat = k / (k - 1) * (1 - item_var / total_var)
    a = 1 - ci_level
    df1, df2 = n - 1, (n - 1) * (k - 1)
    lower = 1 - (1 - alpha_hat) * f_dist.ppf(1 - a / 2, df1, df2)
    upper = 1 - (1 - alpha_hat) * f_dist.ppf(a / 2, df1, df2)
    return ReliabilityEstimate(
        method="cronbach",
        value=float(alpha_hat),
        ci_lower=float(lower),
        ci_upper=float(upper),
        ci_level=ci_level,
        ci_method="feldt",
        n_subjects=n,
        n_raters=k,
    )


def exact_agreement(matrix: RatingMatrix | np.ndarray) -> AgreementSummary:
    """Share of subjects (with >= 2 ratings) whose ratings are all identical."""
    x = _cells(matrix)
    unanimous = eligible = 0
    for row in x:
        vals = row[~np.isnan(row)]
        if vals.size >= 2:
            eligible += 1
            unanimous += bool((vals == vals[0]).all())
    if eligible == 0:
        raise ValidationError("no subject has two or more ratings")
    attribute = matrix.attribute if isinstance(matrix, RatingMatrix) else "score"
    return AgreementSummary(attribute, unanimous / eligible, unanimous, eligible)


def stack_matrices(matrices: list[RatingMatrix], attribute: str = "pooled") -> RatingMatrix:
    """Stack per-attribute matrices over their common raters, one row per (subject, attribute).

    Used for a pooled "overall" coefficient. Rows missing any common rater are dropped.
    """
    if not matrices:
        raise ValidationError("nothing to stack")
    raters = sorted(set.intersection(*(set(m.rater_ids) for m in matrices)))
    if len(raters) < 2:
        raise ValidationError("stacked matrices share fewer than 2 raters")
    rows, ids = [], []
    for m in matrices:
        cols = [m.rater_ids.index(r) for r in raters]
        for sid, row in zip(m.subject_ids, m.cells[:, cols]):
            if not np.isnan(row).any():
                rows.append(row)
                ids.append(f"{m.attribute}|{sid}")
    if len(rows) < 2:
        raise ValidationError("stacked matrix has fewer than 2 complete rows")
    order = np.argsort(ids, kind="stable")
    return RatingMatrix(attribute, tuple(ids[i] for i in order), tuple(raters), np.array(rows)[order])
