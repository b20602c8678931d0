"""Study report: run every analysis over a dataset and render JSON or markdown.

Stored numbers keep full precision. Rounding happens only in the markdown
renderer: point estimates to 3 decimals, interval bounds to 3 decimals with
trailing zeros trimmed, e.g. ``0.791 (0.79, 0.793)``.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Any, Mapping, Sequence

import jsonschema
import numpy as np

from ._version import __version__
from .errors import RatingStatsError, ValidationError
from .factor import correlation_matrix, factor_analysis, kaiser_count, summary_text
from .inference import group_scores, length_quality_analysis, rank_sum_test
from .instrument import RatingDataset, RatingMatrix, build_matrix, describe, subject_scores
from .krippendorff import alpha_ci
from .power import PowerSpec, required_sample_size
from .reliability import cronbach_alpha, exact_agreement, icc, stack_matrices

POOLED = "Overall"


@dataclass(frozen=True)
class ReportConfig:
    """Analysis choices; everything here is echoed into the report provenance."""

    icc_form: str = "icc-3-k"
    kripp_levels: tuple[str, ...] = ("ordinal", "interval")
    replicates: int = 1000
    seed: int = 0
    ci_level: float = 0.95
    workers: int = 1
    nfactors: int | None = None
    rotate: str = "varimax"
    length_covariate: str | None = None
    tier_covariate: str | None = None
    power: PowerSpec | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kripp_levels"] = list(self.kripp_levels)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ReportConfig":
        d = dict(d)
        d["kripp_levels"] = tuple(d.get("kripp_levels", ("ordinal", "interval")))
        if d.get("power") is not None:
            p = dict(d["power"])
            if p.get("category_probs") is not None:
                p["category_probs"] = tuple(p["category_probs"])
            d["power"] = PowerSpec(**p)
        return cls(**d)


@dataclass
class AnalysisBundle:
    """Everything a report shows, as plain JSON-ready structures."""

    descriptives: dict
    reliability: list[dict]
    agreement: list[dict]
    factor: dict | None
    factor_text: str | None
    tests: list[dict]
    correlations: list[dict]
    power: dict | None
    provenance: dict
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and replace NaN/inf by None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def provenance(inputs: Mapping[str, Mapping[str, str]], config: ReportConfig, extra: Mapping | None = None) -> dict:
    """Inputs (path + sha256 per role), full configuration, seeds and tool version. No timestamps."""
    return {
        "tool": "ratingstats",
        "version": __version__,
        "inputs": {k: dict(v) for k, v in sorted(inputs.items())},
        "config": config.to_dict(),
        "seeds": {"bootstrap": config.seed, "power": None if config.power is None else config.power.seed},
        **(dict(extra) if extra else {}),
    }


# --------------------------------------------------------------------------
# analysis
# --------------------------------------------------------------------------


def _attempt(fn, notes: list[str], what: str):
    try:
        return fn()
    except (RatingStatsError, ValueError) as exc:
        notes.append(f"{what}: {exc}")
        return None


def _gate_matrix(dataset: RatingDataset, key: str) -> RatingMatrix | None:
    answers: dict[str, dict[str, float]] = {}
    for r in dataset.records:
        if r.attribute == key and r.gate_answer is not None:
            answers.setdefault(r.subject_id, {})[r.rater_id] = float(r.gate_answer)
    raters = sorted({rid for row in answers.values() for rid in row})
    if len(answers) < 2 or len(raters) < 2:
        return None
    subjects = sorted(answers)
    cells = np.array([[answers[s].get(r, np.nan) for r in raters] for s in subjects])
    return RatingMatrix(f"{key}.gate", tuple(subjects), tuple(raters), cells)


def _reliability_row(matrix_all: RatingMatrix, matrix_complete: RatingMatrix | None, binary: bool,
                     config: ReportConfig, notes: list[str]) -> dict:
    name = matrix_all.attribute
    row: dict[str, Any] = {"attribute": name, "scale": "binary" if binary else matrix_all.scale.kind}
    if not binary and matrix_complete is not None:
        row["icc"] = _attempt(lambda: icc(matrix_complete, config.icc_form, config.ci_level).to_dict(),
                              notes, f"{name} ICC")
        row["cronbach"] = _attempt(lambda: cronbach_alpha(matrix_complete, config.ci_level).to_dict(),
                                   notes, f"{name} Cronbach")
    else:
        row["icc"] = row["cronbach"] = None
    levels = ("nominal",) if binary else config.kripp_levels
    row["krippendorff"] = {
        level: _attempt(
            lambda level=level: alpha_ci(matrix_all, level, config.replicates, config.ci_level,
                                         config.seed, config.workers).to_dict(),
            notes, f"{name} Krippendorff ({level})",
        )
        for level in levels
    }
    return row


def analyze(dataset: RatingDataset, config: ReportConfig, inputs: Mapping[str, Mapping[str, str]] | None = None,
            extra_provenance: Mapping | None = None) -> AnalysisBundle:
    """Run descriptives, reliability, agreement, factor analysis, tests and (optionally) power."""
    notes: list[str] = []
    schema = dataset.schema
    reliability, agreement, complete = [], [], []
    for key in schema.rating_keys:
        if key not in dataset.attributes:
            continue
        binary = schema.scale_for(key).kind == "binary"
        m_all = _attempt(lambda: build_matrix(dataset, key), notes, key)
        if m_all is None:
            continue
        m_complete = _attempt(lambda: build_matrix(dataset, key, policy="listwise-complete"), notes,
                              f"{key} complete cases")
        reliability.append(_reliability_row(m_all, m_complete, binary, config, notes))
        agr = _attempt(lambda: exact_agreement(m_all).to_dict(), notes, f"{key} agreement")
        if agr is not None:
            agreement.append(agr)
        if schema.attribute_for(key).gate:
            g = _gate_matrix(dataset, key)
            if g is not None:
                agreement.append(exact_agreement(g).to_dict())
        if not binary and m_complete is not None:
            complete.append(m_complete)
    if len(complete) > 1:
        pooled = _attempt(lambda: stack_matrices(complete, POOLED), notes, "pooled matrix")
        if pooled is not None:
            reliability.append(_reliability_row(pooled, pooled, False, config, notes))

    fa_dict = fa_text = None
    likert = [k for k in schema.keys_of_kind("likert") if k in dataset.attributes]
    if len(likert) >= 3:
        _, table = subject_scores(dataset, likert)
        if config.nfactors is None:
            # the factor count is the analyst's call; only advise
            corr = _attempt(lambda: correlation_matrix(table, likert), notes, "factor analysis")
            if corr is not None:
                notes.append(
                    f"factor analysis skipped (no factor count given); {kaiser_count(corr)} "
                    "eigenvalue(s) exceed 1"
                )
        else:
            fa = _attempt(lambda: factor_analysis(table, likert, config.nfactors, config.rotate),
                          notes, "factor analysis")
            if fa is not None:
                fa_dict, fa_text = fa.to_dict(), summary_text(fa)
                notes.extend(f"factor analysis: {w}" for w in fa.warnings)

    tests = []
    if config.tier_covariate:
        def discriminant():
            low = group_scores(dataset, config.tier_covariate, 0.0)
            high = group_scores(dataset, config.tier_covariate, 1.0)
            res = rank_sum_test(low, high).to_dict()
            res["label"] = f"{config.tier_covariate}: 0 vs 1"
            return res
        t = _attempt(discriminant, notes, "discriminant test")
        if t is not None:
            tests.append(t)
    correlations = []
    if config.length_covariate:
        keys = [k for k in schema.rating_keys if k in dataset.attributes]
        res = _attempt(lambda: length_quality_analysis(dataset, config.length_covariate, "mean", keys),
                       notes, "length correlation")
        correlations = [r.to_dict() for r in res or []]
    power = None
    if config.power is not None:
        power = _attempt(lambda: required_sample_size(config.power).to_dict(), notes, "power")

    return AnalysisBundle(
        descriptives=describe(dataset).to_dict(),
        reliability=reliability,
        agreement=agreement,
        factor=fa_dict,
        factor_text=fa_text,
        tests=tests,
        correlations=correlations,
        power=power,
        provenance=provenance(inputs or {}, config, extra_provenance),
        notes=notes,
    )


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def report_schema() -> dict:
    return json.loads(resources.files("ratingstats").joinpath("data/report.schema.json").read_text())


def to_json(bundle: AnalysisBundle) -> str:
    doc = bundle.to_dict()
    jsonschema.validate(doc, report_schema())
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def fmt_point(v: float | None) -> str:
    return "NA" if v is None else f"{v:.3f}"


def fmt_bound(v: float | None) -> str:
    """3-decimal rounding with trailing zeros dropped: 0.790 -> '0.79'."""
    if v is None:
        return "NA"
    text = f"{round(v, 3):.3f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def fmt_estimate(est: Mapping | None) -> str:
    if est is None:
        return "NA"
    value = est.get("value", est.get("alpha"))
    lo, hi = (est["ci_lower"], est["ci_upper"]) if "ci_lower" in est else (est.get("ci") or [None, None])
    if lo is None or hi is None:
        return fmt_point(value)
    return f"{fmt_point(value)} ({fmt_bound(lo)}, {fmt_bound(hi)})"


def _kripp_primary(row: Mapping) -> Mapping | None:
    k = row.get("krippendorff") or {}
    for level in ("ordinal", "nominal", "interval"):
        if k.get(level):
            return k[level]
    return None


def reliability_grid(reliability: Sequence[Mapping], ci_level: float = 0.95) -> list[str]:
    pct = f"{100 * ci_level:g}%"
    lines = [
        f"| Attribute | ICC ({pct} CI) | Krippendorff α ({pct} CI) | Cronbach α ({pct} CI) |",
        "|---|---|---|---|",
    ]
    for row in reliability:
        lines.append(
            f"| {row['attribute']} | {fmt_estimate(row.get('icc'))} | "
            f"{fmt_estimate(_kripp_primary(row))} | {fmt_estimate(row.get('cronbach'))} |"
        )
    return lines


def to_markdown(bundle: AnalysisBundle | Mapping) -> str:
    doc = bundle.to_dict() if isinstance(bundle, AnalysisBundle) else bundle
    cfg = doc["provenance"]["config"]
    out = ["# Rating study report", "", "## Reliability", ""]
    out += reliability_grid(doc["reliability"], cfg["ci_level"])
    out += [
        "",
        f"ICC form {cfg['icc_form']} (complete cases); Krippendorff α at the ordinal level "
        f"(nominal for binary attributes), {cfg['replicates']} bootstrap replicates, seed {cfg['seed']}.",
    ]
    extra = [
        (row["attribute"], level, est)
        for row in doc["reliability"]
        for level, est in (row.get("krippendorff") or {}).items()
        if level != "ordinal" and est and row["scale"] != "binary"
    ]
    if extra:
        out += ["", "| Attribute | Level | Krippendorff α |", "|---|---|---|"]
        out += [f"| {a} | {lv} | {fmt_estimate(e)} |" for a, lv, e in extra]
    if doc["agreement"]:
        out += ["", "## Exact agreement", "", "| Attribute | Unanimous | Subjects | Proportion |", "|---|---|---|---|"]
        out += [
            f"| {a['attribute']} | {a['n_unanimous']} | {a['n_subjects']} | {fmt_point(a['proportion_unanimous'])} |"
            for a in doc["agreement"]
        ]
    # dict-backed sections are sorted so JSON round trips render identically
    desc = doc["descriptives"]
    out += ["", "## Descriptives", "", "| Attribute | Median | Q1 | Q3 | n |", "|---|---|---|---|---|"]
    out += [
        f"| {k} | {v['median']:g} | {v['q1']:g} | {v['q3']:g} | {v['count']} |"
        for k, v in sorted(desc["attributes"].items())
    ]
    if desc["durations"]:
        out += ["", "| Duration group | Median (min) | Q1 | Q3 | n |", "|---|---|---|---|---|"]
        out += [
            f"| {k} | {v['median']:.1f} | {v['q1']:.1f} | {v['q3']:.1f} | {v['count']} |"
            for k, v in sorted(desc["durations"].items())
        ]
    if doc.get("factor_text"):
        f = doc["factor"]
        out += ["", "## Factor analysis", ""]
        if f.get("kmo"):
            out.append(f"KMO overall MSA = {f['kmo']['overall_msa']:.2f}")
            out.append("")
        out += ["```", doc["factor_text"].rstrip("\n"), "```"]
    if doc["tests"]:
        out += ["", "## Tests", "", "| Test | Comparison | Statistic | p | Exact |", "|---|---|---|---|---|"]
        out += [
            f"| {t['method']} | {t.get('label', '')} | {t['statistic']:g} | {t['p_value']:.3g} | {t['exact']} |"
            for t in doc["tests"]
        ]
    if doc["correlations"]:
        out += ["", "## Correlations", "", "| Attribute | Method | Coefficient | p | n |", "|---|---|---|---|---|"]
        out += [
            f"| {c['label']} | {c['method']} | {fmt_point(c['coefficient'])} | {c['p_value']:.3g} | {c['n']} |"
            for c in doc["correlations"]
        ]
    if doc.get("power"):
        p = doc["power"]
        a = p["assumptions"]
        out += [
            "",
            "## Sample size",
            "",
            f"n_required = {p['n_required']} (power {p['achieved_power_estimate']:.3f}, "
            f"mean half-width {p['mean_half_width']:.3f})",
            f"Assumptions: {a['raters']} raters, {a['categories']} categories, "
            f"{a['coefficient_kind']} = {a['assumed_coefficient']}, precision {a['precision']}, "
            f"power {a['power']}, CI level {a['ci_level']}, {a['replicates']} replicates, seed {a['seed']}",
        ]
        if p.get("reference_n") is not None:
            out.append(f"Published reference for this configuration: n = {p['reference_n']}")
    if doc["notes"]:
        out += ["", "## Notes", ""] + [f"- {n}" for n in doc["notes"]]
    prov = doc["provenance"]
    out += ["", "## Provenance", "", f"- {prov['tool']} {prov['version']}"]
    out += [f"- {role}: `{v['path']}` sha256 {v['sha256']}" for role, v in sorted(prov["inputs"].items())]
    return "\n".join(out) + "\n"


def emit_report(bundle: AnalysisBundle, format: str = "json") -> str:
    if format == "json":
        return to_json(bundle)
    if format == "markdown":
        return to_markdown(bundle)
    raise ValueError(f"unknown format {format!r}; expected 'json' or 'markdown'")


# --------------------------------------------------------------------------
# plot-ready exports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DistributionRow:
    attribute: str
    value: float
    count: int
    frequency: float


def export_distributions(dataset: RatingDataset) -> list[DistributionRow]:
    """Count and relative frequency of each observed score, per attribute (highest score first)."""
    if len(dataset) == 0:
        raise ValidationError("empty dataset")
    rows = []
    for key in dataset.attributes:
        values = dataset.values(key)
        if values.size == 0:
            continue
        tally = Counter(values.tolist())
        for v in sorted(tally, reverse=True):
            rows.append(DistributionRow(key, v, tally[v], tally[v] / values.size))
    return rows
