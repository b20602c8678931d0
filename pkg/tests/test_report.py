import json
import re
from collections import Counter

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ratingstats.errors import ValidationError
from ratingstats.instrument import RatingDataset, RatingRecord, Scale, default_instrument, single_attribute_schema
from ratingstats.power import PowerSpec
from ratingstats.report import (
    ReportConfig,
    analyze,
    emit_report,
    export_distributions,
    fmt_bound,
    fmt_estimate,
    jsonable,
    report_schema,
    to_markdown,
)
from ratingstats.simulate import SimulationSpec, StudySpec, simulate_ratings, simulate_study

ONE = single_attribute_schema("Accurate", Scale("likert", 1, 5))


@pytest.fixture(scope="module")
def study_bundle():
    ds = simulate_study(default_instrument(), StudySpec(n_subjects=40, k_raters=4, tier_shift=1.5, seed=3))
    cfg = ReportConfig(replicates=200, seed=5, nfactors=2, length_covariate="input_tokens", tier_covariate="tier")
    return analyze(ds, cfg, inputs={"ratings": {"path": "r.csv", "sha256": "0" * 64}})


# ---- formatting -------------------------------------------------------------------------


def test_bound_formatting_matches_table_style():
    assert fmt_bound(0.790) == "0.79"
    assert fmt_bound(0.7931) == "0.793"
    assert fmt_bound(0.8) == "0.8"
    assert fmt_bound(1.0) == "1"
    assert fmt_bound(-0.0001) == "0"
    assert fmt_bound(None) == "NA"
    est = {"value": 0.7916, "ci_lower": 0.79, "ci_upper": 0.7929}
    assert fmt_estimate(est) == "0.792 (0.79, 0.793)"
    assert fmt_estimate({"alpha": 0.5, "ci": [None, None]}) == "0.500"


def test_jsonable_replaces_non_finite():
    doc = jsonable({"a": np.float64("nan"), "b": [np.inf, np.int64(3)], "c": np.array([1.5]), "d": np.bool_(True)})
    assert doc == {"a": None, "b": [None, 3], "c": [1.5], "d": True}
    json.dumps(doc, allow_nan=False)


# ---- bundle and schema --------------------------------------------------------------------


def test_bundle_validates_against_schema(study_bundle):
    doc = json.loads(emit_report(study_bundle, "json"))
    jsonschema.validate(doc, report_schema())
    prov = doc["provenance"]
    assert prov["tool"] == "ratingstats" and prov["seeds"]["bootstrap"] == 5
    assert prov["config"]["nfactors"] == 2
    assert "timestamp" not in json.dumps(prov)


def test_schema_rejects_broken_provenance(study_bundle):
    doc = study_bundle.to_dict()
    doc["provenance"]["inputs"]["ratings"]["sha256"] = "xyz"
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(doc, report_schema())


def test_every_estimate_carries_method_and_sizes(study_bundle):
    for row in study_bundle.to_dict()["reliability"]:
        for est in (row["icc"], row["cronbach"]):
            if est is not None:
                assert est["method"] and est["n_subjects"] > 0 and est["n_raters"] > 0
        for level, k in row["krippendorff"].items():
            assert k["level"] == level and k["n_units"] > 0


def test_binary_rows_get_nominal_only(study_bundle):
    rows = {r["attribute"]: r for r in study_bundle.to_dict()["reliability"]}
    stig = rows["Stigmatizing_notes"]
    assert stig["icc"] is None and stig["cronbach"] is None
    assert set(stig["krippendorff"]) == {"nominal"}
    assert set(rows["Accurate"]["krippendorff"]) == {"ordinal", "interval"}
    assert "Overall" in rows


def test_cronbach_column_equals_icc3k(study_bundle):
    for row in study_bundle.to_dict()["reliability"]:
        if row["icc"] is not None and row["cronbach"] is not None:
            assert row["icc"]["value"] == pytest.approx(row["cronbach"]["value"], abs=1e-10)


def test_tier_test_and_length_correlations(study_bundle):
    doc = study_bundle.to_dict()
    (test,) = doc["tests"]
    assert test["method"] == "mann-whitney-u" and test["p_value"] < 0.001
    assert {c["label"] for c in doc["correlations"]} >= {"Accurate", "Succinct"}


def test_factor_skipped_without_count():
    ds = simulate_study(default_instrument(), StudySpec(n_subjects=30, k_raters=3, seed=1))
    bundle = analyze(ds, ReportConfig(replicates=200))
    assert bundle.factor is None
    assert any("factor analysis skipped" in n for n in bundle.notes)


def test_failures_become_notes():
    # a constant attribute has no defined coefficient; the report keeps going
    recs = tuple(RatingRecord(f"s{i}", f"r{j}", "Accurate", 3) for i in range(5) for j in range(3))
    bundle = analyze(RatingDataset(ONE, recs), ReportConfig(replicates=200))
    assert bundle.notes
    emit_report(bundle, "json")


def test_power_section():
    ds = simulate_ratings(SimulationSpec(20, 3, scale="likert", attribute="Accurate", seed=2))
    cfg = ReportConfig(replicates=200, power=PowerSpec(precision=0.3, replicates=100))
    bundle = analyze(ds, cfg)
    assert bundle.power["n_required"] >= 4
    md = to_markdown(bundle)
    assert "## Sample size" in md and "icc-3-k = 0.7" in md
    assert ReportConfig.from_dict(cfg.to_dict()) == cfg


# ---- markdown ---------------------------------------------------------------------------------


def test_single_attribute_grid_row():
    ds = simulate_ratings(SimulationSpec(25, 4, var_subject=2, scale="likert", attribute="Accurate", seed=4))
    md = to_markdown(analyze(ds, ReportConfig(replicates=200)))
    grid_block = md.split("## Reliability")[1].split("\n\n")[1]
    grid = [line for line in grid_block.splitlines() if line.startswith("| Accurate |")]
    assert len(grid) == 1
    cells = [c.strip() for c in grid[0].strip("|").split("|")]
    assert len(cells) == 4
    for cell in cells[1:]:
        assert re.fullmatch(r"-?\d\.\d{3} \(-?[\d.]+, -?[\d.]+\)", cell)


def test_json_markdown_round_trip(study_bundle):
    doc = json.loads(emit_report(study_bundle, "json"))
    assert to_markdown(doc) == to_markdown(study_bundle)
    for row in doc["reliability"]:
        if row["icc"] is None:
            continue
        line = next(x for x in to_markdown(doc).splitlines() if x.startswith(f"| {row['attribute']} |"))
        shown = re.findall(r"-?\d+(?:\.\d+)?", line.split("|")[2])
        assert float(shown[0]) == pytest.approx(row["icc"]["value"], abs=5e-4)
        assert float(shown[1]) == pytest.approx(row["icc"]["ci_lower"], abs=5e-4)
        assert float(shown[2]) == pytest.approx(row["icc"]["ci_upper"], abs=5e-4)


def test_markdown_sections(study_bundle):
    md = emit_report(study_bundle, "markdown")
    for heading in ("## Reliability", "## Exact agreement", "## Descriptives", "## Factor analysis", "## Provenance"):
        assert heading in md
    assert "Factor Analysis using method = minres" in md
    with pytest.raises(ValueError):
        emit_report(study_bundle, "html")


# ---- distributions ---------------------------------------------------------------------------


def test_distribution_small_example():
    recs = tuple(RatingRecord(f"s{i}", "r1", "Accurate", v) for i, v in enumerate([5, 5, 4]))
    rows = export_distributions(RatingDataset(ONE, recs))
    assert [(r.value, r.count, round(r.frequency, 3)) for r in rows] == [(5, 2, 0.667), (4, 1, 0.333)]


def test_distribution_empty():
    with pytest.raises(ValidationError):
        export_distributions(RatingDataset(ONE, ()))


@given(st.lists(st.tuples(st.sampled_from(["Accurate", "Useful"]), st.integers(1, 5)), min_size=1, max_size=60))
def test_distribution_counts_and_normalization(items):
    schema = default_instrument()
    recs = tuple(RatingRecord(f"s{i}", "r1", a, v) for i, (a, v) in enumerate(items))
    rows = export_distributions(RatingDataset(schema, recs))
    tally = Counter(items)
    assert {(r.attribute, r.value): r.count for r in rows} == dict(tally)
    for attr in {a for a, _ in items}:
        assert sum(r.frequency for r in rows if r.attribute == attr) == pytest.approx(1.0, abs=1e-12)
