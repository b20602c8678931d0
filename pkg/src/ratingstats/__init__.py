"""Psychometric validation statistics for multi-rater rating instruments."""

from ._version import __version__
from .errors import (
    RatingStatsError,
    SchemaError,
    SingularMatrixError,
    UndefinedCoefficientError,
    UndefinedTestError,
    ValidationError,
)
from .factor import (
    CorrelationMatrix,
    FactorAnalysis,
    FactorModel,
    FitIndices,
    correlation_matrix,
    eigenvalues,
    factor_analysis,
    fit_indices,
    fit_minres,
    fit_statistics,
    kaiser_count,
    kmo,
    minres_objective,
    scree,
    score_adequacy,
    summary_text,
    variance_explained,
    varimax,
    varimax_criterion,
)
from .inference import (
    CorrelationResult,
    TestResult,
    correlation_test,
    length_quality_analysis,
    rank_sum_test,
    signed_rank_test,
)
from .instrument import (
    AttributeSpec,
    InstrumentSchema,
    RatingDataset,
    RatingMatrix,
    RatingRecord,
    Scale,
    build_matrix,
    default_instrument,
    describe,
    load_instrument,
    parse_covariates,
    parse_ratings,
    subject_scores,
    write_ratings,
)
from .krippendorff import KrippendorffResult, alpha_ci, bootstrap_alphas, coincidence
from .krippendorff import alpha as krippendorff_alpha
from .power import PowerSpec, SampleSizeResult, expected_ci_width, required_sample_size
from .reliability import (
    ICC_FORMS,
    AnovaTable,
    ReliabilityEstimate,
    anova_two_way,
    cronbach_alpha,
    exact_agreement,
    icc,
    stack_matrices,
)
from .report import AnalysisBundle, ReportConfig, analyze, emit_report, export_distributions
from .simulate import (
    SimulationSpec,
    StudySpec,
    simulate_matrix,
    simulate_ratings,
    simulate_study,
    simulate_two_tier,
    theoretical_icc,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
