"""Sample size for agreement studies by Monte-Carlo CI precision.

For a candidate number of subjects ``n``, many studies are simulated at an
assumed coefficient, the coefficient's confidence interval is computed for
each, and power is the fraction whose half-width is at most ``precision``.
``required_sample_size`` finds the smallest ``n`` whose power reaches the
target, by doubling from ``n = 4`` and then bisecting.

Intervals are truncated to [0, 1] before their half-width is taken: the
planning target is a coefficient in that range, and an F-based lower bound
far below zero says nothing more about precision than a bound at zero.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import UndefinedCoefficientError, ValidationError
from .krippendorff import alpha_ci
from .reliability import icc3k_interval
from .simulate import SimulationSpec, simulate_batch, subject_variance_for

COEFFICIENT_KINDS = ("icc-3-k", "krippendorff-ordinal")
MIN_SUBJECTS = 4

# externally stated sample size for the default configuration
# (k=5, even 5-point distribution, 80% power, 0.1 precision), echoed for comparison
REFERENCE_N = 84


@dataclass(frozen=True)
class PowerSpec:
    """Planning assumptions.

    ``assumed_coefficient`` is the latent-scale population value: ICC(3,k)
    for ``icc-3-k`` and ICC(3,1) for ``krippendorff-ordinal`` (pairwise
    agreement is a single-rater quantity). Likert discretization lowers the
    observed coefficient somewhat below it.
    """

    raters: int = 5
    categories: int = 5
    category_probs: tuple[float, ...] | None = None
    assumed_coefficient: float = 0.7
    precision: float = 0.1
    power: float = 0.8
    ci_level: float = 0.95
    coefficient_kind: str = "icc-3-k"
    replicates: int = 1000
    seed: int = 0
    n_max: int = 4096
    bootstrap_replicates: int = 200
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.precision < 1:
            raise ValidationError("precision must lie in (0, 1)")
        if not 0.5 <= self.power < 1:
            raise ValidationError("power must lie in [0.5, 1)")
        if not 0 < self.ci_level < 1:
            raise ValidationError("ci_level must lie in (0, 1)")
        if self.coefficient_kind not in COEFFICIENT_KINDS:
            raise ValidationError(f"coefficient_kind must be one of {COEFFICIENT_KINDS}")
        if self.raters < 2:
            raise ValidationError("at least 2 raters required")
        if self.categories < 2:
            raise ValidationError("degenerate spec: ordinal data with fewer than 2 categories has no variance")
        if not 0 <= self.assumed_coefficient < 1:
            raise ValidationError("assumed_coefficient must lie in [0, 1)")
        if self.replicates < 1:
            raise ValidationError("replicates must be positive")
        if self.category_probs is not None and len(self.category_probs) != self.categories:
            raise ValidationError("category_probs length must equal categories")

    def simulation(self, n: int) -> SimulationSpec:
        k = self.raters if self.coefficient_kind == "icc-3-k" else 1
        return SimulationSpec(
            n_subjects=n,
            k_raters=self.raters,
            var_subject=subject_variance_for(self.assumed_coefficient, k),
            var_rater=0.0,
            var_error=1.0,
            scale="likert",
            likert_min=1,
            likert_max=self.categories,
            category_probs=self.category_probs,
            seed=self.seed,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TracePoint:
    n: int
    power: float
    mean_half_width: float


@dataclass(frozen=True)
class SampleSizeResult:
    n_required: int
    achieved_power_estimate: float
    mean_half_width: float
    search_trace: tuple[TracePoint, ...]
    spec: PowerSpec
    reference_n: int | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "n_required": self.n_required,
            "achieved_power_estimate": self.achieved_power_estimate,
            "mean_half_width": self.mean_half_width,
            "search_trace": [asdict(t) for t in self.search_trace],
            "assumptions": self.spec.to_dict(),
            "reference_n": self.reference_n,
            "notes": list(self.notes),
        }


def _icc_half_widths(cells: np.ndarray, ci_level: float) -> np.ndarray:
    r, n, k = cells.shape
    grand = cells.mean(axis=(1, 2), keepdims=True)
    row = cells.mean(axis=2, keepdims=True)
    col = cells.mean(axis=1, keepdims=True)
    ms_s = k * ((row - grand) ** 2).sum(axis=(1, 2)) / (n - 1)
    ms_e = ((cells - row - col + grand) ** 2).sum(axis=(1, 2)) / ((n - 1) * (k - 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        f_obs = np.where(ms_e > 0, ms_s / ms_e, np.inf)
    lower, upper = icc3k_interval(f_obs, n, k, ci_level)
    lower, upper = np.clip(lower, 0, 1), np.clip(upper, 0, 1)
    half = (upper - lower) / 2
    # no subject variance at all: the coefficient is undefined, count as a miss
    return np.where(ms_s > 0, half, np.inf)


def _kripp_half_width(cells: np.ndarray, spec: PowerSpec, b: int) -> float:
    try:
        res = alpha_ci(cells, "ordinal", spec.bootstrap_replicates, spec.ci_level, seed=spec.seed * 1_000_003 + b)
    except (UndefinedCoefficientError, ValidationError):
        return np.inf
    lo, hi = np.clip([res.ci.ci_lower, res.ci.ci_upper], 0, 1)
    return float(hi - lo) / 2


def half_widths(n: int, spec: PowerSpec) -> np.ndarray:
    """CI half-width of each simulated study at ``n`` subjects (inf = undefined)."""
    if n < MIN_SUBJECTS:
        raise ValidationError(f"n must be at least {MIN_SUBJECTS}")
    sim = spec.simulation(n)
    if spec.coefficient_kind == "icc-3-k":
        return _icc_half_widths(simulate_batch(sim, spec.replicates), spec.ci_level)

    def run(b):
        return _kripp_half_width(simulate_batch(sim, 1, offset=b)[0], spec, b)

    if spec.workers <= 1:
        return np.array([run(b) for b in range(spec.replicates)])
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        return np.array(list(pool.map(run, range(spec.replicates))))


def expected_ci_width(n: int, spec: PowerSpec) -> tuple[float, float]:
    """Mean half-width over defined studies and the fraction with half-width <= precision."""
    h = half_widths(n, spec)
    finite = h[np.isfinite(h)]
    mean = float(finite.mean()) if finite.size else float("inf")
    return mean, float((h <= spec.precision).mean())


def _is_reference_config(spec: PowerSpec) -> bool:
    even = spec.category_probs is None or np.allclose(spec.category_probs, 1 / spec.categories)
    return (
        spec.raters == 5 and spec.categories == 5 and even
        and spec.power == 0.8 and spec.precision == 0.1 and spec.ci_level == 0.95
    )


def required_sample_size(spec: PowerSpec) -> SampleSizeResult:
    """Smallest ``n`` whose estimated power reaches ``spec.power``.

    Raises
    ------
    ValidationError
        If power is still short of the target at ``spec.n_max``.
    """
    trace: list[TracePoint] = []
    cache: dict[int, TracePoint] = {}

    def evaluate(n: int) -> TracePoint:
        if n not in cache:
            width, pw = expected_ci_width(n, spec)
            cache[n] = TracePoint(n, pw, width)
            trace.append(cache[n])
        return cache[n]

    lo, hi = MIN_SUBJECTS - 1, MIN_SUBJECTS
    while evaluate(hi).power < spec.power:
        if hi >= spec.n_max:
            raise ValidationError(
                f"bracket exhausted: power {cache[hi].power:.3f} < {spec.power} at n_max={spec.n_max}"
            )
        lo, hi = hi, min(2 * hi, spec.n_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if evaluate(mid).power >= spec.power:
            hi = mid
        else:
            lo = mid
    best = cache[hi]
    notes = []
    reference = None
    if _is_reference_config(spec):
        reference = REFERENCE_N
        notes.append(
            "reference_n is an externally stated plan for this configuration; its assumed coefficient "
            "and precision definition are not stated, so agreement is not expected to be exact"
        )
    return SampleSizeResult(hi, best.power, best.mean_half_width, tuple(trace), spec, reference, tuple(notes))
