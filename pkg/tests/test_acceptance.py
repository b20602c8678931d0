"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v``; the verdicts are printed in the
"acceptance criteria" section of the terminal summary.
"""

import json
import re
import time

import jsonschema
import numpy as np
import pytest

from oracles import (
    kripp_alpha_pairs,
    mann_whitney_permutation_p,
    minres_nelder_mead,
    random_rotation_best,
    raw_varimax,
    signed_rank_flip_p,
)
from ratingstats.cli import main
from ratingstats.factor import fit_minres, fit_statistics, minres_objective, varimax
from ratingstats.inference import rank_sum_test, signed_rank_test
from ratingstats.krippendorff import alpha, alpha_ci, bootstrap_alphas
from ratingstats.power import REFERENCE_N, PowerSpec, required_sample_size
from ratingstats.reliability import anova_two_way, cronbach_alpha, icc, icc3k_interval
from ratingstats.report import report_schema
from ratingstats.simulate import (
    SimulationSpec,
    simulate_batch,
    simulate_matrix,
    simulate_two_tier,
    subject_variance_for,
)

pytestmark = pytest.mark.acceptance


class Criterion:
    """Collects named checks; the verdict line lists every failed check."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failures, self.details = [], []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)

    def note(self, text):
        self.details.append(text)

    def verify(self):
        assert not self.failures, self.line()

    def line(self):
        verdict = "PASS" if not self.failures else "FAIL"
        info = "; ".join([*(f"FAILED {f}" for f in self.failures), *self.details])
        return f"criterion {self.number:>2} {verdict}: {self.title}" + (f" [{info}]" if info else "")


@pytest.fixture
def criterion(request):
    crit = {}

    def make(number, title):
        crit["c"] = Criterion(number, title)
        return crit["c"]

    yield make
    c = crit["c"]
    rep = getattr(request.node, "call_report", None)
    if rep is not None and rep.failed and not c.failures:
        crash = getattr(rep.longrepr, "reprcrash", None)
        c.failures.append(f"raised {crash.message if crash else rep.longrepr}")
    request.node.user_properties.append(("acceptance", c.line()))


# ---- 1 -------------------------------------------------------------------------------------


def test_criterion_01_cronbach_icc_identity(criterion):
    c = criterion(1, "Cronbach alpha equals ICC(3,k) on 1000 random matrices")
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n, k = rng.integers(4, 51), rng.integers(2, 8)
        x = rng.normal(size=(n, 1)) * rng.uniform(0, 3) + rng.normal(size=(n, k)) + rng.normal(size=k)
        worst = max(worst, abs(cronbach_alpha(x).value - icc(x, "icc-3-k").value))
    elapsed = time.perf_counter() - start
    c.check(worst <= 1e-10, f"max gap {worst:.2e} > 1e-10")
    c.check(elapsed < 10, f"runtime {elapsed:.1f}s >= 10s")
    c.note(f"max gap {worst:.1e}, {elapsed:.2f}s")
    c.verify()


# ---- 2 -------------------------------------------------------------------------------------


def test_criterion_02_hand_anova(criterion, hand_matrix):
    c = criterion(2, "hand-worked 4x2 ANOVA")
    t = anova_two_way(hand_matrix)
    c.check(abs(t.ms_subjects - 3.0) <= 1e-12, f"MS subjects {t.ms_subjects}")
    c.check(abs(t.ms_error - 5 / 6) <= 1e-12, f"MS error {t.ms_error}")
    i31, a = icc(hand_matrix, "icc-3-1").value, cronbach_alpha(hand_matrix).value
    c.check(abs(i31 - 0.5652) <= 1e-4, f"ICC(3,1) {i31:.6f}")
    c.check(abs(a - 0.7222) <= 1e-4, f"alpha {a:.6f}")
    c.note(f"ICC(3,1) {i31:.4f}, alpha {a:.4f}")
    c.verify()


# ---- 3 -------------------------------------------------------------------------------------


def test_criterion_03_krippendorff(criterion):
    c = criterion(3, "Krippendorff alpha hand example, perfect agreement, all-pairs oracle")
    units = np.array([[1, 1], [1, 1], [2, 2], [1, 2]], dtype=float)
    nominal = alpha(units, "nominal").alpha
    c.check(abs(nominal - 8 / 15) <= 1e-9, f"nominal {nominal!r}")
    perfect = np.repeat(np.arange(1, 6, dtype=float)[:, None], 3, axis=1)
    for level in ("nominal", "ordinal", "interval"):
        c.check(alpha(perfect, level).alpha == 1.0, f"perfect agreement {level}")
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(5):
        x = (rng.integers(1, 6, (50, 1)) + rng.integers(-1, 2, (50, 5))).astype(float)
        x[rng.random(x.shape) < 0.15] = np.nan
        worst = max(worst, abs(alpha(x, "interval").alpha - kripp_alpha_pairs(x, "interval")))
    c.check(worst <= 1e-9, f"interval gap {worst:.2e}")
    c.note(f"nominal {nominal:.6f}, interval gap {worst:.1e}")
    c.verify()


# ---- 4 -------------------------------------------------------------------------------------


def test_criterion_04_fit_indices(criterion):
    c = criterion(4, "fit-index arithmetic anchors")
    rmsea, tli, bic = fit_statistics(2.6, 2, 118, 157.34, 28)
    c.check(abs(bic - -6.94) <= 0.01, f"BIC {bic:.4f}")
    c.check(abs(rmsea - 0.05) <= 0.005, f"RMSEA {rmsea:.4f}")
    c.check(abs(tli - 0.933) <= 0.01, f"TLI {tli:.4f}")
    c.note(f"BIC {bic:.3f}, RMSEA {rmsea:.4f}, TLI {tli:.3f}")
    c.verify()


# ---- 5 -------------------------------------------------------------------------------------


def random_corr(rng, p=8, m=4, n=200):
    lam = rng.uniform(-0.8, 0.8, (p, m))
    x = rng.standard_normal((n, m)) @ lam.T + 0.7 * rng.standard_normal((n, p))
    return np.corrcoef(x, rowvar=False)


@pytest.mark.slow
def test_criterion_05_factor_engine(criterion):
    c = criterion(5, "minres recovery, optimality and varimax")
    start = time.perf_counter()
    for lam in (np.array([[0.8], [0.7], [0.6]]),
                np.array([[0.8, 0], [0.7, 0], [0.6, 0], [0, 0.7], [0, 0.6], [0, 0.5]])):
        r = lam @ lam.T
        np.fill_diagonal(r, 1.0)
        fit = varimax(fit_minres(r, lam.shape[1]))
        got = fit.loadings * np.sign(fit.loadings[np.abs(fit.loadings).argmax(axis=0), range(lam.shape[1])])
        want = lam[:, np.argsort(-(lam**2).sum(axis=0))]
        err = np.abs(got - want).max()
        c.check(err <= 1e-4, f"recovery error {err:.1e} for {lam.shape[1]} factor(s)")
    rng = np.random.default_rng(505)
    gap_worst, rot_margin, comm_worst = -np.inf, np.inf, 0.0
    for i in range(20):
        r = random_corr(rng)
        model = fit_minres(r, 4)
        ours = minres_objective(r, model.uniquenesses, 4)
        gap_worst = max(gap_worst, ours - minres_nelder_mead(r, 4, starts=3, seed=i))
        rot = varimax(model, tol=1e-10)
        h = np.sqrt((model.loadings**2).sum(axis=1, keepdims=True))
        rot_margin = min(rot_margin, raw_varimax(rot.loadings / h) - random_rotation_best(model.loadings, 10_000, seed=i))
        comm_worst = max(comm_worst, np.abs(rot.communalities - model.communalities).max())
    elapsed = time.perf_counter() - start
    c.check(gap_worst <= 1e-4, f"minres exceeds oracle by {gap_worst:.2e}")
    c.check(rot_margin >= 0, f"a random rotation beats varimax by {-rot_margin:.2e}")
    c.check(comm_worst <= 1e-10, f"communality drift {comm_worst:.1e}")
    c.check(elapsed < 120, f"runtime {elapsed:.0f}s >= 120s")
    c.note(f"minres - oracle <= {gap_worst:.1e}, varimax margin {rot_margin:.1e}, {elapsed:.0f}s")
    c.verify()


# ---- 6 -------------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_06_recovery_and_coverage(criterion):
    c = criterion(6, "ICC(3,k) recovery/coverage and bootstrap Krippendorff CIs")
    start = time.perf_counter()
    n, k, reps = 200, 5, 500
    for target in (0.6, 0.8):
        spec = SimulationSpec(n, k, var_subject=subject_variance_for(target, k, 1.0), var_error=1.0, seed=606)
        cells = simulate_batch(spec, reps)
        mean = cells.mean(axis=2, keepdims=True)
        rows = cells.mean(axis=2)
        # per-replicate mean squares, cross-checked against the scalar path below
        ss_s = k * ((rows - cells.mean(axis=(1, 2))[:, None]) ** 2).sum(axis=1)
        resid = cells - mean - cells.mean(axis=1, keepdims=True) + cells.mean(axis=(1, 2))[:, None, None]
        mss, mse = ss_s / (n - 1), (resid**2).sum(axis=(1, 2)) / ((n - 1) * (k - 1))
        est = 1 - mse / mss
        lo, hi = icc3k_interval(mss / mse, n, k)
        check = icc(cells[0], "icc-3-k")
        c.check(abs(check.value - est[0]) < 1e-12 and abs(check.ci_lower - lo[0]) < 1e-12, "vectorized path")
        cover = np.mean((lo <= target) & (target <= hi))
        c.check(abs(est.mean() - target) <= 0.03, f"mean {est.mean():.4f} at {target}")
        c.check(0.93 <= cover <= 0.97, f"coverage {cover:.3f} at {target}")
        c.note(f"ICC {target}: mean {est.mean():.3f}, coverage {cover:.3f}")

    ordinal = SimulationSpec(200, 5, var_subject=1.0, var_error=1.0, scale="likert", seed=616)
    x = simulate_matrix(ordinal, 0)
    runs = [bootstrap_alphas(x, "ordinal", 1000, seed=3, workers=w) for w in (1, 2, 8)]
    c.check(all(np.array_equal(runs[0], r) for r in runs[1:]), "bootstrap differs across workers")
    truth = alpha(simulate_matrix(SimulationSpec(200_000, 5, var_subject=1.0, var_error=1.0, scale="likert",
                                                 thresholds=tuple(ordinal.cut_points()), seed=617)), "ordinal").alpha
    hits = 0
    for b in range(1, 501):
        ci = alpha_ci(simulate_matrix(ordinal, b), "ordinal", 1000, seed=b).ci
        hits += ci.ci_lower <= truth <= ci.ci_upper
    c.check(hits / 500 >= 0.93, f"Krippendorff coverage {hits / 500:.3f}")
    elapsed = time.perf_counter() - start
    c.check(elapsed < 300, f"runtime {elapsed:.0f}s >= 300s")
    c.note(f"Krippendorff coverage {hits / 500:.3f} of alpha {truth:.3f}, {elapsed:.0f}s")
    c.verify()


# ---- 7 -------------------------------------------------------------------------------------

# designs fixed in advance: null, moderate and strong effects
RANK_SUM_SHIFTS = (0.0, 0.5, 1.0)
MC_DRAWS = 1_000_000


@pytest.mark.slow
def test_criterion_07_rank_tests(criterion):
    c = criterion(7, "rank-test enumeration and Monte-Carlo agreement")
    p = rank_sum_test([1, 2], [3, 4]).p_value
    c.check(abs(p - 1 / 3) <= 1e-12, f"rank-sum tiny p {p}")
    p = signed_rank_test([1, 2, 3], [0, 0, 0]).p_value
    c.check(abs(p - 0.25) <= 1e-12, f"signed-rank tiny p {p}")
    rng = np.random.default_rng(707)
    for shift in RANK_SUM_SHIFTS:
        a, b = rng.normal(size=30), rng.normal(shift, size=30)
        ours, mc = rank_sum_test(a, b).p_value, mann_whitney_permutation_p(a, b, MC_DRAWS, seed=1)
        exact = rank_sum_test(a, b, method="exact").p_value
        c.check(abs(ours - mc) <= 1e-3, f"30+30 shift {shift}: p {ours:.5f} vs MC {mc:.5f} (exact {exact:.5f})")
        c.note(f"30+30 shift {shift}: |p - MC| {abs(ours - mc):.1e}")
    c.verify()


# ---- 8 -------------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_08_power(criterion):
    c = criterion(8, "sample-size search monotonicity, stability and reference run")
    start = time.perf_counter()
    for seed in range(5):
        by_precision = [required_sample_size(PowerSpec(precision=q, replicates=400, seed=seed)).n_required
                        for q in (0.1, 0.15, 0.2)]
        by_power = [required_sample_size(PowerSpec(precision=0.15, power=w, replicates=400, seed=seed)).n_required
                    for w in (0.7, 0.8, 0.9)]
        c.check(by_precision[0] > by_precision[1] > by_precision[2], f"seed {seed} precision order {by_precision}")
        c.check(by_power[0] <= by_power[1] <= by_power[2], f"seed {seed} power order {by_power}")
    for seed in range(3):
        base = required_sample_size(PowerSpec(replicates=1000, seed=seed)).n_required
        doubled = required_sample_size(PowerSpec(replicates=2000, seed=seed + 100)).n_required
        c.check(abs(doubled - base) <= 0.1 * base, f"seed {seed}: {base} vs {doubled} with doubled replicates")
    ref = required_sample_size(PowerSpec(raters=5, categories=5, power=0.8, precision=0.1)).to_dict()
    c.check(ref["reference_n"] == REFERENCE_N == 84, "reference anchor missing")
    assumed = ref["assumptions"]
    c.check(assumed["raters"] == 5 and assumed["categories"] == 5 and assumed["power"] == 0.8
            and assumed["precision"] == 0.1 and "assumed_coefficient" in assumed, "assumptions not echoed")
    elapsed = time.perf_counter() - start
    c.check(elapsed < 300, f"runtime {elapsed:.0f}s >= 300s")
    c.note(f"reference run n_required {ref['n_required']} next to anchor {ref['reference_n']}, {elapsed:.0f}s")
    c.verify()


# ---- 9 -------------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_09_discriminant_validity(criterion):
    c = criterion(9, "two-tier rank-sum p < 0.001")
    var_s, var_e = 1.0, 1.0
    shift = 3 * np.sqrt(var_s + var_e)
    hits = 0
    for seed in range(200):
        spec = SimulationSpec(100, 3, var_subject=var_s, var_error=var_e, scale="likert", seed=seed)
        low, high = simulate_two_tier(spec, shift)
        scores = [np.array([r.value for r in ds.records], dtype=float) for ds in (low, high)]
        hits += rank_sum_test(*scores).p_value < 0.001
    c.check(hits >= 198, f"{hits}/200 seeds below 0.001")
    c.note(f"{hits}/200 seeds below 0.001")
    c.verify()


# ---- 10 ------------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_10_cli_end_to_end(criterion, tmp_path, monkeypatch):
    c = criterion(10, "CLI simulate -> report, schema, grid and byte-identical replay")
    monkeypatch.chdir(tmp_path)
    start = time.perf_counter()
    c.check(main(["simulate", "--seed", "11", "--tier-shift", "1.5", "--covariates-output", "cov.csv",
                  "-o", "ratings.csv"]) == 0, "simulate failed")
    c.check(main(["report", "--input", "ratings.csv", "--covariates", "cov.csv", "--seed", "12",
                  "--nfactors", "2", "--tier-covariate", "tier", "--length-covariate", "input_tokens",
                  "-o", "report.json", "--markdown", "report.md"]) == 0, "report failed")
    elapsed = time.perf_counter() - start
    doc = json.loads((tmp_path / "report.json").read_text())
    try:
        jsonschema.validate(doc, report_schema())
    except jsonschema.ValidationError as exc:
        c.check(False, f"schema: {exc.message}")
    md = (tmp_path / "report.md").read_text()
    cell = r"-?\d\.\d{3} \(-?\d(?:\.\d{1,3})?, -?\d(?:\.\d{1,3})?\)"
    grid = [ln for ln in md.split("## Reliability")[1].splitlines() if ln.startswith("| Accurate |")]
    c.check(bool(grid) and re.search(cell, grid[0]) is not None, "grid row lacks 3-decimal CIs")
    c.check(elapsed < 60, f"runtime {elapsed:.0f}s >= 60s")
    replay_dir = tmp_path / "replay"
    replay_dir.mkdir()
    monkeypatch.chdir(replay_dir)
    c.check(main(["report", "--replay", str(tmp_path / "report.json"), "-o", "report.json",
                  "--markdown", "report.md"]) == 0, "replay failed")
    for name in ("report.json", "report.md"):
        c.check((replay_dir / name).read_bytes() == (tmp_path / name).read_bytes(), f"{name} differs on replay")
    c.note(f"simulate + report {elapsed:.1f}s")
    c.verify()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
