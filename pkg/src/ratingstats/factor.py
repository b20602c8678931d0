"""Exploratory factor analysis: correlations, KMO, minres extraction, varimax.

Minres picks uniquenesses ``psi`` so that the top-``m`` eigenpairs of
``R - diag(psi)`` reproduce the off-diagonal correlations as closely as
possible (least squares). Uniquenesses are optimized with bounded L-BFGS-B,
first on the full least-squares fit (gradient ``diag(L L' + diag(psi) - R)``)
and then on the off-diagonal criterion with its eigen-perturbation gradient.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import chi2

from .errors import SingularMatrixError, ValidationError

PSI_MIN = 1e-3
PSI_MAX = 1.0
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    n_obs: int

    @property
    def p(self) -> int:
        return len(self.labels)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "values": self.values.tolist(), "n_obs": self.n_obs}


@dataclass(frozen=True)
class KmoResult:
    overall_msa: float
    per_item_msa: dict[str, float]

    def to_dict(self) -> dict:
        return {"overall_msa": self.overall_msa, "per_item_msa": dict(self.per_item_msa)}


@dataclass(frozen=True, eq=False)
class FactorModel:
    labels: tuple[str, ...]
    loadings: np.ndarray
    uniquenesses: np.ndarray
    eigenvalues: np.ndarray
    rotation: str = "none"
    converged: bool = True
    objective: float = 0.0
    heywood: tuple[bool, ...] = ()
    rotation_matrix: np.ndarray | None = None
    iterations: int = 0

    @property
    def m(self) -> int:
        return self.loadings.shape[1]

    @property
    def p(self) -> int:
        return self.loadings.shape[0]

    @property
    def communalities(self) -> np.ndarray:
        return (self.loadings**2).sum(axis=1)

    @property
    def complexity(self) -> np.ndarray:
        """Hofmann item complexity ``(sum l^2)^2 / sum l^4``."""
        sq = self.loadings**2
        with np.errstate(invalid="ignore", divide="ignore"):
            return sq.sum(axis=1) ** 2 / (sq**2).sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "m": self.m,
            "rotation": self.rotation,
            "loadings": self.loadings.tolist(),
            "uniquenesses": self.uniquenesses.tolist(),
            "communalities": self.communalities.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "converged": self.converged,
            "objective": self.objective,
            "heywood": list(self.heywood),
        }


@dataclass(frozen=True)
class FitIndices:
    chi_square: float
    df: float
    p_value: float | None
    rmsr: float
    rmsea: float | None
    tli: float | None
    bic: float
    null_chi_square: float
    null_df: float
    n_obs: int
    objective: float
    null_objective: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class VarianceTable:
    ss_loadings: tuple[float, ...]
    proportion_var: tuple[float, ...]
    cumulative_var: tuple[float, ...]
    proportion_explained: tuple[float, ...]
    cumulative_proportion: tuple[float, ...]

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class ScoreAdequacy:
    correlation: tuple[float, ...]
    r_squared: tuple[float, ...]
    minimum_correlation: tuple[float, ...]

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.__dict__.items()}


# --------------------------------------------------------------------------
# correlation, KMO, eigenvalues
# --------------------------------------------------------------------------


def correlation_matrix(table, labels: Sequence[str] | None = None) -> CorrelationMatrix:
    """Pearson correlations over rows with no missing value."""
    x = np.asarray(table, dtype=float)
    if x.ndim != 2:
        raise ValidationError("observation table must be two-dimensional")
    labels = tuple(labels) if labels is not None else tuple(f"V{j + 1}" for j in range(x.shape[1]))
    if len(labels) != x.shape[1]:
        raise ValidationError(f"{len(labels)} labels for {x.shape[1]} columns")
    x = x[~np.isnan(x).any(axis=1)]
    if x.shape[0] < 3:
        raise ValidationError(f"at least 3 complete observations required, got {x.shape[0]}")
    centered = x - x.mean(axis=0)
    ss = (centered**2).sum(axis=0)
    for name, s in zip(labels, ss):
        if s == 0:
            raise ValidationError(f"attribute {name!r} is constant; its correlations are undefined")
    scaled = centered / np.sqrt(ss)
    r = scaled.T @ scaled
    r = np.clip((r + r.T) / 2, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(labels, r, int(x.shape[0]))


def _values(corr) -> np.ndarray:
    return corr.values if isinstance(corr, CorrelationMatrix) else np.asarray(corr, dtype=float)


def _labels(corr, p: int) -> tuple[str, ...]:
    return corr.labels if isinstance(corr, CorrelationMatrix) else tuple(f"V{j + 1}" for j in range(p))


def _checked_inverse(r: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(r)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError("correlation matrix is singular", float(cond))
    return np.linalg.inv(r)


def kmo(corr: CorrelationMatrix | np.ndarray) -> KmoResult:
    """Kaiser-Meyer-Olkin measure of sampling adequacy, overall and per item."""
    r = _values(corr)
    inv = _checked_inverse(r)
    d = np.sqrt(np.diag(inv))
    partial = -inv / np.outer(d, d)
    r2 = r**2
    q2 = partial**2
    np.fill_diagonal(r2, 0.0)
    np.fill_diagonal(q2, 0.0)
    per_item = r2.sum(axis=0) / (r2.sum(axis=0) + q2.sum(axis=0))
    overall = r2.sum() / (r2.sum() + q2.sum())
    labels = _labels(corr, r.shape[0])
    return KmoResult(float(overall), {name: float(v) for name, v in zip(labels, per_item)})


def eigenvalues(corr: CorrelationMatrix | np.ndarray) -> np.ndarray:
    r = _values(corr)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValidationError("eigenvalues need a square matrix")
    return np.linalg.eigvalsh(r)[::-1].copy()


def scree(corr: CorrelationMatrix | np.ndarray) -> list[tuple[int, float]]:
    """(index, eigenvalue) pairs, 1-based, for external scree plots."""
    return [(i + 1, float(v)) for i, v in enumerate(eigenvalues(corr))]


def kaiser_count(corr: CorrelationMatrix | np.ndarray) -> int:
    """Number of eigenvalues above 1. Advisory only; nothing selects m automatically."""
    return int((eigenvalues(corr) > 1).sum())


# --------------------------------------------------------------------------
# minres extraction
# --------------------------------------------------------------------------


def model_degrees_of_freedom(p: int, m: int) -> float:
    return ((p - m) ** 2 - (p + m)) / 2


def _loadings_for(r: np.ndarray, psi: np.ndarray, m: int) -> np.ndarray:
    vals, vecs = np.linalg.eigh(r - np.diag(psi))
    vals, vecs = vals[::-1][:m], vecs[:, ::-1][:, :m]
    return vecs * np.sqrt(np.maximum(vals, 0.0))


def minres_objective(r: np.ndarray, psi: np.ndarray, m: int) -> float:
    """Sum of squared off-diagonal residuals of ``R - L L'`` at uniquenesses ``psi``."""
    lam = _loadings_for(r, psi, m)
    resid = r - lam @ lam.T
    np.fill_diagonal(resid, 0.0)
    return float((resid**2).sum())


def _minres_and_grad(psi: np.ndarray, r: np.ndarray, m: int) -> tuple[float, np.ndarray]:
    """Off-diagonal criterion and its exact gradient in ``psi``.

    ``L L'`` is a spectral function of ``R - diag(psi)``; its derivative
    follows from first-order eigen-perturbation (divided differences of the
    retained eigenvalues).
    """
    vals, vecs = np.linalg.eigh(r - np.diag(psi))
    vals, vecs = vals[::-1], vecs[:, ::-1]
    p = len(vals)
    kept = np.zeros(p)
    kept[:m] = np.maximum(vals[:m], 0.0)
    fitted = (vecs * kept) @ vecs.T
    resid = r - fitted
    np.fill_diagonal(resid, 0.0)
    gap = vals[:, None] - vals[None, :]
    slope = np.zeros(p)
    slope[:m] = (vals[:m] > 0).astype(float)
    close = np.abs(gap) < 1e-12
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(close, (slope[:, None] + slope[None, :]) / 2, (kept[:, None] - kept[None, :]) / gap)
    inner = g * (vecs.T @ resid @ vecs)
    grad = 2 * np.einsum("ij,jk,ik->i", vecs, inner, vecs)
    return float((resid**2).sum()), grad


def _uls_and_grad(psi: np.ndarray, r: np.ndarray, m: int) -> tuple[float, np.ndarray]:
    lam = _loadings_for(r, psi, m)
    resid = r - np.diag(psi) - lam @ lam.T
    return 0.5 * float((resid**2).sum()), -np.diag(resid).copy()


def _smc_start(r: np.ndarray) -> np.ndarray:
    try:
        smc = 1 - 1 / np.diag(np.linalg.inv(r))
    except np.linalg.LinAlgError:
        smc = np.full(r.shape[0], 0.5)
    return np.clip(1 - smc, PSI_MIN, PSI_MAX)


def _projected_gradient(psi: np.ndarray, grad: np.ndarray) -> np.ndarray:
    pg = grad.copy()
    pg[(psi <= PSI_MIN) & (grad > 0)] = 0.0
    pg[(psi >= PSI_MAX) & (grad < 0)] = 0.0
    return pg


def fit_minres(
    corr: CorrelationMatrix | np.ndarray,
    m: int,
    max_iter: int = 1000,
    labels: Sequence[str] | None = None,
    restarts: int = 8,
    seed: int = 0,
) -> FactorModel:
    """Minres factor extraction with ``m`` factors (unrotated).

    Starts from ``psi = 1 - SMC``, from ``psi = 0.5`` and from ``restarts``
    uniform draws seeded by ``seed``; the best optimum wins. Uniquenesses
    that end on the lower bound are Heywood cases and are flagged in
    ``heywood``. If the winning run has not converged within ``max_iter``
    iterations it is still returned, with ``converged=False`` and a
    ``RuntimeWarning``.
    """
    r = _values(corr)
    p = r.shape[0]
    if m < 1 or m >= p:
        raise ValidationError(f"factor count must satisfy 1 <= m < p={p}, got {m}")
    if model_degrees_of_freedom(p, m) < 0:
        raise ValidationError(f"{m} factors are not identified for {p} variables (negative df)")
    labels = tuple(labels) if labels is not None else _labels(corr, p)

    bounds = [(PSI_MIN, PSI_MAX)] * p
    options = {"maxiter": max_iter, "ftol": 1e-16, "gtol": 1e-12, "maxcor": 20}
    rng = np.random.default_rng(seed)
    starts = [_smc_start(r), np.full(p, 0.5), *rng.uniform(0.05, 0.95, (restarts, p))]
    best = None
    for start in starts:
        # the smooth full least-squares fit and the off-diagonal criterion
        # share interior optima but part ways once psi hits a bound, so each
        # start is polished on the criterion itself and also tried directly
        uls = minimize(_uls_and_grad, start, args=(r, m), jac=True, method="L-BFGS-B",
                       bounds=bounds, options=options)
        for x0, spent in ((uls.x, uls.nit), (start, 0)):
            steps = [np.asarray(x0, dtype=float).copy()]
            res = minimize(_minres_and_grad, x0, args=(r, m), jac=True, method="L-BFGS-B",
                           bounds=bounds, callback=lambda xk: steps.append(xk.copy()), options=options)
            _, grad = _minres_and_grad(res.x, r, m)
            pg_norm = float(np.linalg.norm(_projected_gradient(res.x, grad)))
            last_step = float(np.linalg.norm(steps[-1] - steps[-2])) if len(steps) >= 2 else 0.0
            converged = pg_norm < 1e-7 or last_step < 1e-9
            cand = (minres_objective(r, res.x, m), res.x, converged, spent + res.nit)
            if best is None or cand[0] < best[0] - 1e-15:
                best = cand
    objective, psi, converged, nit = best
    if not converged:
        warnings.warn(f"minres did not converge in {max_iter} iterations", RuntimeWarning, stacklevel=2)

    lam = _loadings_for(r, psi, m)
    # unrotated convention: each factor's loadings sum positive
    signs = np.where(lam.sum(axis=0) < 0, -1.0, 1.0)
    return FactorModel(
        labels=labels,
        loadings=lam * signs,
        uniquenesses=psi.copy(),
        eigenvalues=eigenvalues(r),
        rotation="none",
        converged=bool(converged),
        objective=objective,
        heywood=tuple(bool(v) for v in psi <= PSI_MIN * (1 + 1e-9)),
        iterations=int(nit),
    )


# --------------------------------------------------------------------------
# varimax
# --------------------------------------------------------------------------


def varimax_criterion(loadings: np.ndarray) -> float:
    """Sum over factors of the variance (1/p denominator) of squared loadings."""
    sq = np.asarray(loadings) ** 2
    return float(((sq**2).mean(axis=0) - sq.mean(axis=0) ** 2).sum())


def _kaiser_weights(loadings: np.ndarray) -> np.ndarray:
    h = np.sqrt((loadings**2).sum(axis=1))
    return np.where(h > 0, h, 1.0)


def varimax(
    model: FactorModel,
    normalize: bool = True,
    tol: float = 1e-5,
    max_iter: int = 1000,
    return_trace: bool = False,
):
    """Varimax rotation with optional Kaiser row normalization.

    Each sweep is the SVD update of the orthomax family, which never lowers
    the criterion. Iteration stops once the relative criterion gain drops
    below ``tol``. Columns come back ordered by sum of squared loadings,
    each with its largest-magnitude loading positive.

    With ``return_trace=True`` also returns the criterion after every sweep.
    """
    lam = model.loadings
    p, m = lam.shape
    if m < 2:
        return (model, []) if return_trace else model
    w = _kaiser_weights(lam) if normalize else np.ones(p)
    a = lam / w[:, None]
    t = np.eye(m)
    crit = varimax_criterion(a)
    trace = [crit]
    for _ in range(max_iter):
        z = a @ t
        b = a.T @ (z**3 - z * (z**2).mean(axis=0))
        u, _, vt = np.linalg.svd(b)
        t = u @ vt
        new = varimax_criterion(a @ t)
        trace.append(new)
        done = new - crit <= tol * abs(crit)
        crit = new
        if done:
            break

    rotated = (a @ t) * w[:, None]
    signs = np.sign(rotated[np.abs(rotated).argmax(axis=0), np.arange(m)])
    signs[signs == 0] = 1.0
    rotated = rotated * signs
    t = t * signs
    order = np.argsort(-(rotated**2).sum(axis=0), kind="stable")
    rotated, t = rotated[:, order], t[:, order]
    out = replace(model, loadings=rotated, rotation="varimax", rotation_matrix=t)
    return (out, trace) if return_trace else out


# --------------------------------------------------------------------------
# fit, variance, factor scores
# --------------------------------------------------------------------------


def fit_statistics(
    chi_square: float, df: float, n_obs: int, null_chi_square: float, null_df: float
) -> tuple[float | None, float | None, float]:
    """RMSEA, Tucker-Lewis index and BIC from the model and null chi-squares.

    RMSEA and TLI are ``None`` when ``df == 0``.
    """
    bic = chi_square - df * math.log(n_obs)
    if df <= 0:
        return None, None, bic
    rmsea = math.sqrt(max(chi_square - df, 0.0) / (df * (n_obs - 1)))
    null_ratio = null_chi_square / null_df
    tli = (null_ratio - chi_square / df) / (null_ratio - 1)
    return rmsea, tli, bic


def _ml_discrepancy(sigma: np.ndarray, r: np.ndarray) -> float:
    s_inv_r = np.linalg.solve(sigma, r)
    sign, logdet = np.linalg.slogdet(s_inv_r)
    if sign <= 0:
        raise SingularMatrixError("model-implied covariance is not positive definite", float(np.linalg.cond(sigma)))
    return float(-logdet + np.trace(s_inv_r) - r.shape[0])


def fit_indices(model: FactorModel, corr: CorrelationMatrix | np.ndarray, n_obs: int | None = None) -> FitIndices:
    """Likelihood-ratio chi-square with Bartlett's correction, RMSR, RMSEA, TLI, BIC."""
    r = _values(corr)
    if n_obs is None:
        if not isinstance(corr, CorrelationMatrix):
            raise ValidationError("n_obs is required for a bare correlation array")
        n_obs = corr.n_obs
    p, m = model.p, model.m
    if n_obs <= p:
        raise ValidationError(f"n_obs ({n_obs}) must exceed the number of variables ({p})")
    sigma = model.loadings @ model.loadings.T + np.diag(model.uniquenesses)
    f = _ml_discrepancy(sigma, r)
    f0 = _ml_discrepancy(np.diag(np.diag(r)), r)
    df = model_degrees_of_freedom(p, m)
    null_df = p * (p - 1) / 2
    chi_sq = (n_obs - 1 - (2 * p + 5) / 6 - 2 * m / 3) * f
    null_chi_sq = (n_obs - 1 - (2 * p + 5) / 6) * f0
    resid = r - model.loadings @ model.loadings.T
    off = ~np.eye(p, dtype=bool)
    rmsr = float(np.sqrt((resid[off] ** 2).mean()))
    rmsea, tli, bic = fit_statistics(chi_sq, df, n_obs, null_chi_sq, null_df)
    return FitIndices(
        chi_square=float(chi_sq),
        df=float(df),
        p_value=float(chi2.sf(chi_sq, df)) if df > 0 else None,
        rmsr=rmsr,
        rmsea=rmsea,
        tli=tli,
        bic=float(bic),
        null_chi_square=float(null_chi_sq),
        null_df=float(null_df),
        n_obs=int(n_obs),
        objective=f,
        null_objective=f0,
    )


def variance_explained(model: FactorModel) -> VarianceTable:
    ss = (model.loadings**2).sum(axis=0)
    prop = ss / model.p
    expl = ss / ss.sum() if ss.sum() > 0 else np.zeros_like(ss)
    return VarianceTable(
        ss_loadings=tuple(ss.tolist()),
        proportion_var=tuple(prop.tolist()),
        cumulative_var=tuple(np.cumsum(prop).tolist()),
        proportion_explained=tuple(expl.tolist()),
        cumulative_proportion=tuple(np.cumsum(expl).tolist()),
    )


def score_adequacy(model: FactorModel, corr: CorrelationMatrix | np.ndarray) -> ScoreAdequacy:
    """Regression-score adequacy: R^2 of scores with factors, their correlation, and 2R^2 - 1."""
    r = _values(corr)
    weights = _checked_inverse(r) @ model.loadings
    r2 = np.einsum("ij,ij->j", weights, model.loadings)
    return ScoreAdequacy(
        correlation=tuple(np.sqrt(np.maximum(r2, 0.0)).tolist()),
        r_squared=tuple(r2.tolist()),
        minimum_correlation=tuple((2 * r2 - 1).tolist()),
    )


# --------------------------------------------------------------------------
# full analysis and text summary
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FactorAnalysis:
    correlation: CorrelationMatrix
    kmo: KmoResult | None
    eigenvalues: np.ndarray
    model: FactorModel
    fit: FitIndices
    variance: VarianceTable
    adequacy: ScoreAdequacy
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "correlation": self.correlation.to_dict(),
            "kmo": None if self.kmo is None else self.kmo.to_dict(),
            "eigenvalues": self.eigenvalues.tolist(),
            "scree": [list(pt) for pt in scree(self.correlation)],
            "model": self.model.to_dict(),
            "fit": self.fit.to_dict(),
            "variance": self.variance.to_dict(),
            "adequacy": self.adequacy.to_dict(),
            "warnings": list(self.warnings),
        }


def factor_analysis(table, labels: Sequence[str], m: int, rotate: str = "varimax") -> FactorAnalysis:
    """Correlations -> KMO -> minres -> rotation -> fit/variance/adequacy in one call."""
    corr = correlation_matrix(table, labels)
    notes = []
    try:
        k = kmo(corr)
    except SingularMatrixError as exc:
        k = None
        notes.append(str(exc))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = fit_minres(corr, m)
    notes += [str(w.message) for w in caught]
    if any(model.heywood):
        notes.append("Heywood case: uniqueness clamped at lower bound for " + ", ".join(
            name for name, h in zip(model.labels, model.heywood) if h))
    if rotate == "varimax":
        model = varimax(model)
    elif rotate != "none":
        raise ValidationError(f"unknown rotation {rotate!r}; expected 'varimax' or 'none'")
    return FactorAnalysis(
        correlation=corr,
        kmo=k,
        eigenvalues=eigenvalues(corr),
        model=model,
        fit=fit_indices(model, corr),
        variance=variance_explained(model),
        adequacy=score_adequacy(model, corr),
        warnings=tuple(notes),
    )


def _row(label: str, values, width: int = 22, fmt: str = "{:5.2f}") -> str:
    return f"{label:<{width}}" + "".join(fmt.format(v) for v in values)


def summary_text(fa: FactorAnalysis, cutoff: float = 0.1) -> str:
    """Plain-text block: loadings (|l| < cutoff blanked), variance, fit and score adequacy."""
    model, fit = fa.model, fa.fit
    names = [f"MR{j + 1}" for j in range(model.m)]
    head = f"{'':<22}" + "".join(f"{n:>5}" for n in names)
    lines = [
        "Factor Analysis using method = minres",
        f"Factors: {model.m}, rotation = {model.rotation}",
        "Standardized loadings (pattern matrix) based upon correlation matrix",
        "",
        f"{'':<16}" + "".join(f"{n:>7}" for n in names) + f"{'h2':>7}{'u2':>7}{'com':>6}",
    ]
    for i, label in enumerate(model.labels):
        cells = "".join(
            f"{v:7.2f}" if abs(v) >= cutoff else f"{'':7}" for v in model.loadings[i]
        )
        lines.append(
            f"{label[:15]:<16}{cells}{model.communalities[i]:7.2f}"
            f"{model.uniquenesses[i]:7.2f}{model.complexity[i]:6.1f}"
        )
    v = fa.variance
    lines += [
        "",
        head,
        _row("SS loadings", v.ss_loadings),
        _row("Proportion Var", v.proportion_var),
        _row("Cumulative Var", v.cumulative_var),
        _row("Proportion Explained", v.proportion_explained),
        _row("Cumulative Proportion", v.cumulative_proportion),
        "",
        f"Mean item complexity = {np.nanmean(model.complexity):.1f}",
        f"Test of the hypothesis that {model.m} factors are sufficient.",
        "",
        f"df null model = {fit.null_df:g} with the objective function = {fit.null_objective:.2f} "
        f"with Chi Square = {fit.null_chi_square:.2f}",
        f"df of the model are {fit.df:g} and the objective function was {fit.objective:.2f}",
        "",
        f"The root mean square of the residuals (RMSR) is {fit.rmsr:.2f}",
        "",
        f"The total n.obs was {fit.n_obs} with Likelihood Chi Square = {fit.chi_square:.2f}"
        + ("" if fit.p_value is None else f" with prob < {fit.p_value:.2g}"),
        "",
        "Tucker Lewis Index of factoring reliability = "
        + ("undefined (df = 0)" if fit.tli is None else f"{fit.tli:.3f}"),
        "RMSEA index = " + ("undefined (df = 0)" if fit.rmsea is None else f"{fit.rmsea:.2f}"),
        f"BIC = {fit.bic:.2f}",
        "Measures of factor score adequacy",
        f"{'':<50}" + "".join(f"{n:>5}" for n in names),
        _row("Correlation of (regression) scores with factors", fa.adequacy.correlation, 50),
        _row("Multiple R square of scores with factors", fa.adequacy.r_squared, 50),
        _row("Minimum correlation of possible factor scores", fa.adequacy.minimum_correlation, 50),
    ]
    for note in fa.warnings:
        lines.append(f"warning: {note}")
    return "\n".join(lines) + "\n"
