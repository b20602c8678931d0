"""Two-way mixed-effects rating simulator with known population reliability.

Latent score of subject ``i`` by rater ``j``::

    x_ij = mean + group_shift + s_i + r_j + e_ij

with independent zero-mean Gaussian components of variance ``var_subject``,
``var_rater`` and ``var_error``. Likert output bins ``x_ij`` at ordered
thresholds. Every draw comes from ``numpy.random.Generator(PCG64)`` seeded
with ``[seed, stream]``; within one study the draws are taken in a fixed
order (subject effects, rater effects, errors, missingness), so identical
``(spec, seed)`` give identical data on every platform numpy supports.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .errors import UndefinedCoefficientError, ValidationError
from .instrument import (
    InstrumentSchema,
    RatingDataset,
    RatingRecord,
    Scale,
    single_attribute_schema,
)

GENERATOR = "numpy.random.PCG64"


def generator_metadata() -> dict:
    return {"generator": GENERATOR, "numpy": np.__version__}


@dataclass(frozen=True)
class SimulationSpec:
    n_subjects: int
    k_raters: int
    var_subject: float = 1.0
    var_rater: float = 0.0
    var_error: float = 1.0
    scale: str = "continuous"
    likert_min: int = 1
    likert_max: int = 5
    thresholds: tuple[float, ...] | None = None
    category_probs: tuple[float, ...] | None = None
    mean: float = 0.0
    group_shift: float = 0.0
    missing_rate: float = 0.0
    seed: int = 0
    attribute: str = "score"

    def __post_init__(self):
        if self.n_subjects < 1 or self.k_raters < 1:
            raise ValidationError("n_subjects and k_raters must be positive")
        if min(self.var_subject, self.var_rater, self.var_error) < 0:
            raise ValidationError("variance components must be non-negative")
        if not 0 <= self.missing_rate < 1:
            raise ValidationError("missing_rate must lie in [0, 1)")
        if self.scale not in ("likert", "continuous"):
            raise ValidationError(f"unknown scale {self.scale!r}; expected 'likert' or 'continuous'")
        if self.scale == "likert":
            if self.likert_min >= self.likert_max:
                raise ValidationError("invalid bounds: likert_min must be below likert_max")
            cuts = self.likert_max - self.likert_min
            if self.thresholds is not None:
                t = np.asarray(self.thresholds, dtype=float)
                if t.size != cuts:
                    raise ValidationError(
                        f"{t.size} thresholds are incompatible with a {self.likert_min}-{self.likert_max} "
                        f"scale (needs {cuts})"
                    )
                if np.any(np.diff(t) <= 0):
                    raise ValidationError("thresholds must be strictly increasing")
            if self.category_probs is not None:
                p = np.asarray(self.category_probs, dtype=float)
                if p.size != cuts + 1 or np.any(p <= 0) or abs(p.sum() - 1) > 1e-9:
                    raise ValidationError(f"category_probs must be {cuts + 1} positive values summing to 1")

    @property
    def total_variance(self) -> float:
        return self.var_subject + self.var_rater + self.var_error

    @property
    def scale_obj(self) -> Scale:
        if self.scale == "likert":
            return Scale("likert", self.likert_min, self.likert_max)
        return Scale("continuous")

    def cut_points(self) -> np.ndarray:
        """Latent thresholds; by default equal probability mass per category."""
        if self.thresholds is not None:
            return np.asarray(self.thresholds, dtype=float)
        levels = self.likert_max - self.likert_min + 1
        probs = np.asarray(self.category_probs or np.full(levels, 1 / levels), dtype=float)
        sd = np.sqrt(self.total_variance) if self.total_variance > 0 else 1.0
        return self.mean + sd * norm.ppf(np.cumsum(probs)[:-1])

    def to_dict(self) -> dict:
        return asdict(self)


def theoretical_icc(spec: SimulationSpec, form: str = "icc-3-k") -> float:
    """Population consistency ICC on the latent scale."""
    s, e, k = spec.var_subject, spec.var_error, spec.k_raters
    if form == "icc-3-1":
        den = s + e
    elif form == "icc-3-k":
        den = s + e / k
    else:
        raise ValueError(f"theoretical ICC available for icc-3-1 and icc-3-k, not {form!r}")
    if den == 0:
        raise UndefinedCoefficientError("theoretical ICC undefined: zero subject and error variance")
    return s / den


def subject_variance_for(icc_value: float, k: int = 1, var_error: float = 1.0) -> float:
    """Subject variance giving latent ICC(3,k) = ``icc_value`` (k=1 for ICC(3,1))."""
    if not 0 <= icc_value < 1:
        raise ValidationError("target ICC must lie in [0, 1)")
    return icc_value / (1 - icc_value) * var_error / k


def discretize(latent: np.ndarray, cuts: np.ndarray, low: int) -> np.ndarray:
    """Bin latent scores; raising a latent value never lowers its bin."""
    return low + np.searchsorted(cuts, latent, side="right").astype(float)


def _draw(spec: SimulationSpec, rng: np.random.Generator, cuts: np.ndarray | None) -> np.ndarray:
    n, k = spec.n_subjects, spec.k_raters
    s = rng.normal(0.0, np.sqrt(spec.var_subject), n)
    r = rng.normal(0.0, np.sqrt(spec.var_rater), k)
    e = rng.normal(0.0, np.sqrt(spec.var_error), (n, k))
    x = spec.mean + spec.group_shift + s[:, None] + r[None, :] + e
    if cuts is not None:
        x = discretize(x, cuts, spec.likert_min)
    if spec.missing_rate > 0:
        drop = rng.random((n, k)) < spec.missing_rate
        keep = rng.integers(0, k, n)
        emptied = drop.all(axis=1)
        drop[emptied, keep[emptied]] = False
        x[drop] = np.nan
    return x


def simulate_matrix(spec: SimulationSpec, stream: int = 0) -> np.ndarray:
    """One simulated subjects x raters array (NaN = missing) from substream ``[seed, stream]``."""
    cuts = spec.cut_points() if spec.scale == "likert" else None
    return _draw(spec, np.random.default_rng([spec.seed, stream]), cuts)


def simulate_batch(spec: SimulationSpec, replicates: int, offset: int = 0) -> np.ndarray:
    """Stack of ``replicates`` independent studies, shape (replicates, n, k).

    Study ``b`` uses substream ``[seed, offset + b]``, so any split of the
    replicate range across workers reproduces the same studies.
    """
    cuts = spec.cut_points() if spec.scale == "likert" else None
    return np.stack([_draw(spec, np.random.default_rng([spec.seed, offset + b]), cuts) for b in range(replicates)])


def _ids(prefix: str, count: int) -> list[str]:
    width = len(str(count))
    return [f"{prefix}{i + 1:0{width}d}" for i in range(count)]


def matrix_to_dataset(
    cells: np.ndarray,
    attribute: str,
    scale: Scale,
    subject_prefix: str = "S",
    schema: InstrumentSchema | None = None,
) -> RatingDataset:
    schema = schema or single_attribute_schema(attribute, scale)
    subjects = _ids(subject_prefix, cells.shape[0])
    raters = _ids("R", cells.shape[1])
    records = []
    for i, s in enumerate(subjects):
        for j, r in enumerate(raters):
            v = cells[i, j]
            if not np.isnan(v):
                records.append(RatingRecord(s, r, attribute, int(v) if scale.discrete else float(v)))
    return RatingDataset(schema, tuple(records))


def simulate_ratings(spec: SimulationSpec) -> RatingDataset:
    return matrix_to_dataset(simulate_matrix(spec), spec.attribute, spec.scale_obj)


def simulate_two_tier(spec: SimulationSpec, shift: float) -> tuple[RatingDataset, RatingDataset]:
    """Low- and high-quality tiers that differ only by a latent mean offset of ``shift``.

    Tiers draw from substreams 0 and 1; subject ids are prefixed ``L``/``H``.
    The default equal-mass thresholds are computed once, from the low tier,
    so both tiers are binned on the same scale.
    """
    if shift < 0:
        raise ValidationError("shift must be non-negative")
    if spec.scale == "likert" and spec.thresholds is None:
        spec = replace(spec, thresholds=tuple(spec.cut_points()))
    low = simulate_matrix(spec, stream=0)
    high = simulate_matrix(replace(spec, group_shift=spec.group_shift + shift), stream=1)
    return (
        matrix_to_dataset(low, spec.attribute, spec.scale_obj, "L"),
        matrix_to_dataset(high, spec.attribute, spec.scale_obj, "H"),
    )


# --------------------------------------------------------------------------
# whole-instrument synthetic studies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StudySpec:
    """Synthetic multi-attribute study over an instrument schema.

    Each attribute's subject effect mixes a quality factor shared by all
    attributes (weight ``attribute_correlation``) with an attribute-specific
    part. ``length_effect`` lowers latent quality by that many subject-SDs
    per SD of log input length, giving the covariate ``input_tokens`` a
    built-in negative association with scores.
    """

    n_subjects: int = 120
    k_raters: int = 5
    var_subject: float = 1.0
    var_rater: float = 0.1
    var_error: float = 0.6
    attribute_correlation: float = 0.4
    length_effect: float = 0.0
    tier_shift: float | None = None
    gate_yes_rate: float = 0.7
    missing_rate: float = 0.0
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def simulate_study(schema: InstrumentSchema, spec: StudySpec) -> RatingDataset:
    """Ratings for every attribute of ``schema`` plus per-subject covariates.

    Covariates: ``input_tokens`` (log-normal, median about 5,000) and, when
    ``tier_shift`` is set, ``tier`` (0 = low, 1 = high; the second half of
    subjects is shifted up by ``tier_shift`` latent SDs).
    """
    if not 0 <= spec.attribute_correlation <= 1:
        raise ValidationError("attribute_correlation must lie in [0, 1]")
    rng = np.random.default_rng([spec.seed, 0])
    n, k = spec.n_subjects, spec.k_raters
    subjects, raters = _ids("S", n), _ids("R", k)
    quality = rng.normal(size=n)
    log_len = rng.normal(np.log(5100), 0.4, n)
    z_len = (log_len - np.log(5100)) / 0.4
    tier = np.zeros(n)
    if spec.tier_shift is not None:
        tier[n // 2 :] = 1.0
    durations = np.round(np.exp(rng.normal(np.log(10.9), 0.45, (n, k))), 2)
    sd_s = np.sqrt(spec.var_subject)
    rho = spec.attribute_correlation
    records = []
    for key in schema.rating_keys:
        scale = schema.scale_for(key)
        attr = schema.attribute_for(key)
        unique = rng.normal(size=n)
        s = sd_s * (np.sqrt(rho) * quality + np.sqrt(1 - rho) * unique - spec.length_effect * z_len)
        s = s + sd_s * (spec.tier_shift or 0.0) * tier
        r = rng.normal(0, np.sqrt(spec.var_rater), k)
        e = rng.normal(0, np.sqrt(spec.var_error), (n, k))
        latent = s[:, None] + r[None, :] + e
        sd_total = np.sqrt(spec.var_subject * (1 + spec.length_effect**2) + spec.var_rater + spec.var_error)
        if scale.kind == "likert":
            levels = scale.max - scale.min + 1
            cuts = sd_total * norm.ppf(np.arange(1, levels) / levels)
            values = discretize(latent, cuts, scale.min)
        elif scale.kind == "binary":
            values = discretize(latent, np.array([sd_total * norm.ppf(0.2)]), 0)
        else:
            values = latent
        gate_yes = rng.random((n, k)) < spec.gate_yes_rate if attr.gate else None
        missing = rng.random((n, k)) < spec.missing_rate
        for i in range(n):
            for j in range(k):
                if missing[i, j]:
                    continue
                v = values[i, j]
                v = int(v) if scale.discrete else float(v)
                gate = None
                if gate_yes is not None:
                    gate = bool(gate_yes[i, j])
                    if not gate:
                        v = None
                records.append(RatingRecord(subjects[i], raters[j], key, v, gate, float(durations[i, j])))
    covariates = {s: {"input_tokens": float(np.round(np.exp(l)))} for s, l in zip(subjects, log_len)}
    if spec.tier_shift is not None:
        for s, t in zip(subjects, tier):
            covariates[s]["tier"] = float(t)
    return RatingDataset(schema, tuple(records), covariates)


def rater_ids(k: int) -> Sequence[str]:
    return _ids("R", k)
