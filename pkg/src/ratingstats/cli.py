"""Command-line interface.

Exit status: 0 on success, 1 on data or validation errors, 2 on usage errors.
Every file output is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import RatingStatsError
from .factor import factor_analysis, summary_text
from .inference import (
    correlation_test,
    group_scores,
    length_quality_analysis,
    length_quality_pairs,
    panel_pairs,
    rank_sum_test,
    signed_rank_test,
)
from .instrument import (
    RatingDataset,
    build_matrix,
    default_instrument,
    describe,
    load_instrument,
    parse_covariates,
    parse_ratings,
    subject_scores,
    write_covariates,
    write_ratings,
)
from .krippendorff import LEVELS, alpha_ci
from .power import COEFFICIENT_KINDS, PowerSpec, required_sample_size
from .reliability import ICC_FORMS, cronbach_alpha, exact_agreement, icc
from .report import ReportConfig, jsonable, analyze, emit_report, export_distributions, sha256_bytes
from .simulate import StudySpec, generator_metadata, simulate_study


class UsageError(Exception):
    """Bad flag combination detected after parsing (exit status 2)."""


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def _csv_list(text: str | None) -> list[str] | None:
    return [t.strip() for t in text.split(",") if t.strip()] if text else None


# --------------------------------------------------------------------------
# input loading
# --------------------------------------------------------------------------


def _schema(args):
    if args.instrument in (None, "default"):
        return default_instrument(), None
    data = Path(args.instrument).read_bytes()
    return load_instrument(data), {"path": args.instrument, "sha256": sha256_bytes(data)}


def _load(args) -> tuple[RatingDataset, dict]:
    """Dataset plus input digests keyed by role."""
    schema, schema_digest = _schema(args)
    inputs = {}
    if schema_digest:
        inputs["instrument"] = schema_digest
    raw = Path(args.input).read_bytes()
    inputs["ratings"] = {"path": args.input, "sha256": sha256_bytes(raw)}
    covariates = None
    if getattr(args, "covariates", None):
        cov_raw = Path(args.covariates).read_bytes()
        inputs["covariates"] = {"path": args.covariates, "sha256": sha256_bytes(cov_raw)}
        covariates = parse_covariates(cov_raw.decode("utf-8"))
    dataset = parse_ratings(raw.decode("utf-8"), schema, args.layout, covariates)
    return dataset, inputs


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_validate(args) -> int:
    ds, inputs = _load(args)
    _emit(_dump({
        "valid": True,
        "records": len(ds),
        "subjects": len(ds.subject_ids),
        "raters": len(ds.rater_ids),
        "attributes": list(ds.attributes),
        "covariates": list(ds.covariate_names),
        "inputs": inputs,
    }), args.output)
    return 0


def cmd_describe(args) -> int:
    ds, _ = _load(args)
    groups = None
    if args.rater_groups:
        with open(args.rater_groups, newline="") as fh:
            groups = {row["rater_id"]: row["group"] for row in csv.DictReader(fh)}
    if args.distributions:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["attribute", "value", "count", "frequency"])
        for r in export_distributions(ds):
            w.writerow([r.attribute, f"{r.value:g}", r.count, repr(r.frequency)])
        write_atomic(args.distributions, buf.getvalue())
    _emit(_dump(describe(ds, groups).to_dict()), args.output)
    return 0


def cmd_reliability(args) -> int:
    ds, _ = _load(args)
    panel = _csv_list(args.panel)
    matrix = build_matrix(ds, args.attribute, panel, policy="listwise-complete")
    out = {"attribute": args.attribute, "raters": list(matrix.rater_ids)}
    forms = ICC_FORMS if args.form == "all" else (args.form,)
    for form in forms:
        if form == "cronbach":
            out["cronbach"] = cronbach_alpha(matrix, args.ci_level).to_dict()
        else:
            out[form] = icc(matrix, form, args.ci_level).to_dict()
    if args.form == "all":
        out["cronbach"] = cronbach_alpha(matrix, args.ci_level).to_dict()
    out["agreement"] = exact_agreement(build_matrix(ds, args.attribute, panel)).to_dict()
    _emit(_dump(out), args.output)
    return 0


def cmd_krippendorff(args) -> int:
    ds, _ = _load(args)
    matrix = build_matrix(ds, args.attribute, _csv_list(args.panel))
    levels = LEVELS[1:] if args.level is None else (args.level,)
    out = {"attribute": args.attribute, "seed": args.seed}
    for level in levels:
        out[level] = alpha_ci(matrix, level, args.replicates, args.ci_level, args.seed, args.workers).to_dict()
    _emit(_dump(out), args.output)
    return 0


def cmd_factor(args) -> int:
    if args.table:
        with open(args.input, newline="") as fh:
            rows = list(csv.reader(fh))
        labels = [h.strip() for h in rows[0]]
        try:
            table = np.array([[float(c) if c.strip() else np.nan for c in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise RatingStatsError(f"non-numeric cell in {args.input}: {exc}") from None
        keep = _csv_list(args.attributes)
        if keep:
            idx = [labels.index(k) for k in keep]
            labels, table = keep, table[:, idx]
    else:
        ds, _ = _load(args)
        labels = _csv_list(args.attributes) or [
            k for k in ds.schema.keys_of_kind("likert") if k in ds.attributes
        ]
        _, table = subject_scores(ds, labels)
    fa = factor_analysis(table, labels, args.nfactors, args.rotate)
    sys.stdout.write(summary_text(fa))
    if args.output:
        write_atomic(args.output, _dump(fa.to_dict()))
    return 0


def cmd_compare(args) -> int:
    ds, _ = _load(args)
    attrs = _csv_list(args.attributes)
    if args.test == "rank-sum":
        if not args.covariate:
            raise UsageError("--test rank-sum needs --covariate (groups coded by --groups)")
        codes = [float(c) for c in (_csv_list(args.groups) or ["0", "1"])]
        if len(codes) != 2:
            raise UsageError("--groups takes exactly two codes")
        a = group_scores(ds, args.covariate, codes[0], attrs)
        b = group_scores(ds, args.covariate, codes[1], attrs)
        res = rank_sum_test(a, b, args.p_method).to_dict()
        res["label"] = f"{args.covariate}: {codes[0]:g} vs {codes[1]:g}"
    else:
        pa, pb = _csv_list(args.panel_a), _csv_list(args.panel_b)
        if not pa or not pb:
            raise UsageError("--test signed-rank needs --panel-a and --panel-b")
        subjects, pairs = panel_pairs(ds, pa, pb, attrs)
        res = signed_rank_test(pairs, method=args.p_method).to_dict()
        res["label"] = f"{','.join(pa)} vs {','.join(pb)}"
    _emit(_dump(res), args.output)
    return 0


def cmd_correlate(args) -> int:
    ds, _ = _load(args)
    attrs = _csv_list(args.attributes)
    if args.with_covariate:
        cov = ds.covariates
        subjects = sorted(s for s in cov if args.covariate in cov[s] and args.with_covariate in cov[s])
        x = [cov[s][args.covariate] for s in subjects]
        y = [cov[s][args.with_covariate] for s in subjects]
        res = [correlation_test(x, y, args.method, f"{args.covariate} ~ {args.with_covariate}").to_dict()]
    else:
        res = [r.to_dict() for r in length_quality_analysis(ds, args.covariate, args.statistic, attrs)]
    if args.export:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["attribute", "subject_id", args.covariate, args.statistic])
        for attr, (subjects, cov, agg) in length_quality_pairs(ds, args.covariate, args.statistic, attrs).items():
            for s, c, v in zip(subjects, cov, agg):
                w.writerow([attr, s, repr(float(c)), repr(float(v))])
        write_atomic(args.export, buf.getvalue())
    _emit(_dump(res), args.output)
    return 0


def _power_spec(args) -> PowerSpec:
    probs = tuple(float(p) for p in _csv_list(args.category_probs)) if args.category_probs else None
    return PowerSpec(
        raters=args.raters,
        categories=args.categories,
        category_probs=probs,
        assumed_coefficient=args.assumed_coefficient,
        precision=args.precision,
        power=args.power,
        ci_level=args.ci_level,
        coefficient_kind=args.kind,
        replicates=args.replicates,
        seed=args.seed,
        n_max=args.n_max,
        workers=args.workers,
    )


def cmd_power(args) -> int:
    result = required_sample_size(_power_spec(args))
    _emit(_dump(result.to_dict()), args.output)
    return 0


def cmd_simulate(args) -> int:
    schema, _ = _schema(args)
    spec = StudySpec(
        n_subjects=args.n_subjects,
        k_raters=args.raters,
        var_subject=args.var_subject,
        var_rater=args.var_rater,
        var_error=args.var_error,
        attribute_correlation=args.attribute_correlation,
        length_effect=args.length_effect,
        tier_shift=args.tier_shift,
        gate_yes_rate=args.gate_yes_rate,
        missing_rate=args.missing_rate,
        seed=args.seed,
    )
    ds = simulate_study(schema, spec)
    buf = io.StringIO()
    write_ratings(ds, buf, args.layout)
    _emit(buf.getvalue(), args.output)
    if args.covariates_output:
        cbuf = io.StringIO()
        write_covariates(ds.covariates, cbuf)
        write_atomic(args.covariates_output, cbuf.getvalue())
    if args.metadata:
        meta = {"spec": spec.to_dict(), "instrument": schema.name, "tool_version": __version__, **generator_metadata()}
        write_atomic(args.metadata, _dump(meta))
    return 0


def _report_config(args) -> ReportConfig:
    return ReportConfig(
        icc_form=args.form,
        kripp_levels=LEVELS[1:] if args.level is None else (args.level,),
        replicates=args.replicates,
        seed=args.seed,
        ci_level=args.ci_level,
        workers=1,
        nfactors=args.nfactors,
        rotate=args.rotate,
        length_covariate=args.length_covariate,
        tier_covariate=args.tier_covariate,
        power=_power_spec(args) if args.with_power else None,
    )


def _resolve(path: str, base: Path) -> str:
    return path if Path(path).exists() else str(base / path)


def cmd_report(args) -> int:
    if args.replay:
        recorded = json.loads(Path(args.replay).read_text())
        prov = recorded["provenance"]
        base = Path(args.replay).resolve().parent
        config = ReportConfig.from_dict(prov["config"])
        cli = prov.get("cli", {})
        args.layout = cli.get("layout", "long")
        inputs = prov["inputs"]
        args.instrument = inputs["instrument"]["path"] if "instrument" in inputs else "default"
        args.input = inputs["ratings"]["path"]
        args.covariates = inputs["covariates"]["path"] if "covariates" in inputs else None
        for role, entry in inputs.items():
            data = Path(_resolve(entry["path"], base)).read_bytes()
            if sha256_bytes(data) != entry["sha256"]:
                raise RatingStatsError(f"input {role} ({entry['path']}) does not match its recorded sha256")
        # open resolved paths while keeping the recorded strings in provenance
        resolved = argparse.Namespace(**vars(args))
        resolved.input = _resolve(args.input, base)
        resolved.covariates = args.covariates and _resolve(args.covariates, base)
        if args.instrument != "default":
            resolved.instrument = _resolve(args.instrument, base)
        ds, _ = _load(resolved)
    else:
        if not args.input:
            raise UsageError("report needs --input (or --replay)")
        config = _report_config(args)
        ds, inputs = _load(args)
    bundle = analyze(ds, config, inputs, {"cli": {"layout": args.layout}})
    if not args.output and not args.markdown:
        sys.stdout.write(emit_report(bundle, "json"))
    if args.output:
        write_atomic(args.output, emit_report(bundle, "json"))
    if args.markdown:
        write_atomic(args.markdown, emit_report(bundle, "markdown"))
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _probability(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed (default 0)")
    common.add_argument("--replicates", type=int, default=1000, help="bootstrap / Monte-Carlo replicates")
    common.add_argument("--ci-level", type=_probability, default=0.95, help="two-sided confidence level")
    common.add_argument("--workers", type=int, default=1, help="threads for resampling loops")
    common.add_argument("--output", "-o", help="output file (default: stdout)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", "-i", help="ratings CSV")
    data.add_argument("--instrument", default="default", help="instrument TOML (default: bundled PDSQI-9)")
    data.add_argument("--layout", choices=("long", "wide"), default="long")
    data.add_argument("--covariates", help="per-subject covariates CSV (subject_id,<name>...)")

    parser = argparse.ArgumentParser(prog="ratingstats", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help, *parents):
        return sub.add_parser(name, help=help, parents=[common, *parents])

    p = add("validate", "check a ratings file against the instrument", data)
    p.set_defaults(func=cmd_validate, needs_input=True)

    p = add("describe", "medians, quartiles and durations", data)
    p.add_argument("--rater-groups", help="CSV with rater_id,group columns")
    p.add_argument("--distributions", help="write per-attribute score frequencies to this CSV")
    p.set_defaults(func=cmd_describe, needs_input=True)

    p = add("reliability", "ICC / Cronbach's alpha for one attribute", data)
    p.add_argument("--attribute", "-a", required=True)
    p.add_argument("--form", choices=(*ICC_FORMS, "cronbach", "all"), default="icc-3-k")
    p.add_argument("--panel", help="comma-separated rater ids (default: all raters)")
    p.set_defaults(func=cmd_reliability, needs_input=True)

    p = add("krippendorff", "Krippendorff's alpha with bootstrap CI", data)
    p.add_argument("--attribute", "-a", required=True)
    p.add_argument("--level", choices=LEVELS, help="default: report ordinal and interval")
    p.add_argument("--panel")
    p.set_defaults(func=cmd_krippendorff, needs_input=True)

    p = add("factor", "minres exploratory factor analysis", data)
    p.add_argument("--nfactors", type=int, required=True, help="number of factors (see eigenvalues/scree)")
    p.add_argument("--rotate", choices=("varimax", "none"), default="varimax")
    p.add_argument("--attributes", help="comma-separated subset of variables")
    p.add_argument("--table", action="store_true", help="input is a numeric table (one column per variable)")
    p.set_defaults(func=cmd_factor, needs_input=True)

    p = add("compare", "rank-sum or signed-rank test", data)
    p.add_argument("--test", choices=("rank-sum", "signed-rank"), required=True)
    p.add_argument("--covariate", help="grouping covariate for rank-sum")
    p.add_argument("--groups", help="two covariate codes to compare (default 0,1)")
    p.add_argument("--panel-a")
    p.add_argument("--panel-b")
    p.add_argument("--p-method", choices=("auto", "exact", "asymptotic"), default="auto",
                   help="auto: exact for <= 12 tie-free observations, else normal approximation")
    p.add_argument("--attributes")
    p.set_defaults(func=cmd_compare, needs_input=True)

    p = add("correlate", "Spearman/Pearson of a covariate with per-subject scores", data)
    p.add_argument("--covariate", required=True)
    p.add_argument("--statistic", choices=("mean", "stddev"), default="mean")
    p.add_argument("--method", choices=("spearman", "pearson"), default="spearman")
    p.add_argument("--with-covariate", help="correlate two covariates instead of covariate vs scores")
    p.add_argument("--attributes")
    p.add_argument("--export", help="write (covariate, statistic) pairs per attribute to this CSV")
    p.set_defaults(func=cmd_correlate, needs_input=True)

    power = argparse.ArgumentParser(add_help=False)
    power.add_argument("--raters", type=int, default=5)
    power.add_argument("--categories", type=int, default=5)
    power.add_argument("--category-probs", help="comma-separated probabilities (default even)")
    power.add_argument("--assumed-coefficient", type=float, default=0.7)
    power.add_argument("--precision", type=float, default=0.1)
    power.add_argument("--power", type=float, default=0.8)
    power.add_argument("--kind", choices=COEFFICIENT_KINDS, default="icc-3-k")
    power.add_argument("--n-max", type=int, default=4096)

    p = add("power", "Monte-Carlo sample size for CI precision", power)
    p.set_defaults(func=cmd_power, needs_input=False)

    p = add("simulate", "write a synthetic study over the instrument")
    p.add_argument("--instrument", default="default")
    p.add_argument("--layout", choices=("long", "wide"), default="long")
    p.add_argument("--n-subjects", type=int, default=120)
    p.add_argument("--raters", type=int, default=5)
    p.add_argument("--var-subject", type=float, default=1.0)
    p.add_argument("--var-rater", type=float, default=0.1)
    p.add_argument("--var-error", type=float, default=0.6)
    p.add_argument("--attribute-correlation", type=float, default=0.4)
    p.add_argument("--length-effect", type=float, default=0.0)
    p.add_argument("--tier-shift", type=float, help="add a 0/1 'tier' covariate with this latent shift")
    p.add_argument("--gate-yes-rate", type=float, default=0.7)
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.add_argument("--covariates-output", help="write per-subject covariates here")
    p.add_argument("--metadata", help="write spec and generator metadata (JSON) here")
    p.set_defaults(func=cmd_simulate, needs_input=False)

    p = add("report", "full study report (JSON and/or markdown)", data, power)
    p.add_argument("--form", choices=ICC_FORMS, default="icc-3-k")
    p.add_argument("--level", choices=LEVELS, help="default: ordinal and interval")
    p.add_argument("--nfactors", type=int, help="run factor analysis with this many factors")
    p.add_argument("--rotate", choices=("varimax", "none"), default="varimax")
    p.add_argument("--length-covariate", help="covariate for per-attribute Spearman correlations")
    p.add_argument("--tier-covariate", help="0/1 covariate for the discriminant rank-sum test")
    p.add_argument("--with-power", action="store_true", help="include a sample-size calculation")
    p.add_argument("--markdown", help="write the markdown report here")
    p.add_argument("--replay", help="re-run the analysis recorded in a JSON report")
    p.set_defaults(func=cmd_report, needs_input=False)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "needs_input", False) and not args.input:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: --input is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (RatingStatsError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
