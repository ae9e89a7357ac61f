"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see every line as it
happens.  The long tau sweep (length 8, alphabet {0..4}) only runs when
MG1BAYES_SLOW=1 is set.
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from mg1bayes.cli import main as cli_main
from mg1bayes.delta_matrix import (
    DeltaDirichletPosterior,
    GeometricBase,
    PoissonBase,
    PosteriorMeanPmf,
)
from mg1bayes.marks import parse_marks, tau_equiv, tau_exhaustive_report, tau_tilde_equiv
from mg1bayes.rate import GammaPosterior
from mg1bayes.service import Deterministic, Erlang, Exponential
from mg1bayes.simulate import SimConfig
from mg1bayes.snapshot import parse as snapshot_parse, render as snapshot_render
from mg1bayes.transforms import (
    EstimatorContext,
    busy_b,
    g_hat,
    pi_hat,
    rho_hat_via_lst,
    served_mb,
)
from mg1bayes.validation import (
    BvmThresholds,
    bvm_experiment,
    consistency_experiment,
    oracle_a_pmf,
    pi_empirical_check,
)

SEED = 20260810


def announce(criterion: str, passed: bool, detail: str) -> bool:
    line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} — {detail}"
    print(line, flush=True)
    return passed


# ---------------------------------------------------------------------------
# 1. exhaustive combinatorics


def test_criterion_1_tau_combinatorics_exhaustive():
    start = time.perf_counter()
    rows = tau_exhaustive_report(max_len=7, max_state=3)
    elapsed = time.perf_counter() - start
    violations = {row.property: row.violations for row in rows}
    ok = all(v == 0 for v in violations.values()) and elapsed < 60.0
    assert announce(
        "1 (tau combinatorics, len<=7 alphabet {0..3})",
        ok,
        f"violations={violations}, runtime={elapsed:.1f}s",
    )


@pytest.mark.skipif(
    os.environ.get("MG1BAYES_SLOW") != "1", reason="slow suite: set MG1BAYES_SLOW=1"
)
def test_criterion_1_slow_suite():
    rows = tau_exhaustive_report(max_len=8, max_state=4)
    violations = {row.property: row.violations for row in rows}
    assert announce(
        "1-slow (tau combinatorics, len<=8 alphabet {0..4})",
        all(v == 0 for v in violations.values()),
        f"violations={violations}",
    )


# ---------------------------------------------------------------------------
# 2. reference-string fixtures


def test_criterion_2_reference_fixtures():
    strings = {
        name: parse_marks(digits)
        for name, digits in {
            "a": "121211100", "b": "102232101", "c": "123332100",
            "d": "100234543", "e": "121002343", "f": "102102323",
            "g": "100234543", "h": "100002345", "i": "210101100",
        }.items()
    }
    class_abc = all(
        tau_equiv(strings[x], strings[y]) for x, y in (("a", "b"), ("b", "c"))
    )
    class_defg = all(
        tau_equiv(strings[x], strings[y])
        for x, y in (("d", "e"), ("e", "f"), ("f", "g"))
    )
    import itertools

    no_extra = all(
        not tau_equiv(strings[x], strings[y])
        for x, y in itertools.combinations(sorted(strings), 2)
        if not (
            {x, y} <= {"a", "b", "c"}
            or {x, y} <= {"d", "e", "f", "g"}
            or strings[x] == strings[y]
        )
    )
    tilde_pair = tau_tilde_equiv(strings["g"], strings["h"]) and not tau_equiv(
        strings["g"], strings["h"]
    )
    extension = not tau_tilde_equiv(strings["g"] + (4, 4), strings["h"] + (4, 4))
    ok = class_abc and class_defg and no_extra and tilde_pair and extension
    assert announce(
        "2 (reference-string classes)",
        ok,
        f"abc={class_abc}, defg={class_defg}, only={no_extra}, "
        f"tilde={tilde_pair}, extension={extension}",
    )


# ---------------------------------------------------------------------------
# 3. quadrature oracle agreement


def test_criterion_3_oracle_agreement():
    exp_err = max(
        abs(oracle_a_pmf(Exponential(2.0), 1.0, k) - (2.0 / 3.0) * (1.0 / 3.0) ** k)
        for k in range(21)
    )
    det_err = max(
        abs(
            oracle_a_pmf(Deterministic(0.5), 1.0, k)
            - math.exp(-0.5) * 0.5**k / math.factorial(k)
        )
        for k in range(21)
    )
    ok = exp_err <= 1e-10 and det_err <= 1e-10
    assert announce(
        "3 (oracle vs closed forms)",
        ok,
        f"exp_err={exp_err:.2e}, det_err={det_err:.2e}, tol=1e-10",
    )


# ---------------------------------------------------------------------------
# 4. exact-input transform oracles


def test_criterion_4_exact_transform_oracles():
    start = time.perf_counter()
    ctx = EstimatorContext.exact(1.0, Exponential(2.0))
    g_err = max(
        abs(g_hat(ctx, z) - 2.0 / (2.0 + z)) for z in np.linspace(0.0, 5.0, 51)
    )
    pi_err = max(
        abs(pi_hat(ctx, z) - 0.5 / (1.0 - 0.5 * z)) for z in np.linspace(0.0, 1.0, 51)
    )
    busy_err = abs(busy_b(ctx, 1.0) - (2.0 - math.sqrt(2.0)))
    served_err = abs(served_mb(ctx, 0.5) - (3.0 - math.sqrt(5.0)) / 2.0)
    elapsed = time.perf_counter() - start
    ok = max(g_err, pi_err, busy_err, served_err) <= 1e-8 and elapsed < 1.0
    assert announce(
        "4 (exact-input transforms)",
        ok,
        f"g={g_err:.1e}, pi={pi_err:.1e}, busy={busy_err:.1e}, "
        f"served={served_err:.1e}, runtime={elapsed:.2f}s",
    )


# ---------------------------------------------------------------------------
# 5. consistency experiment


N_LIST = (100, 1000, 10_000, 50_000)


@pytest.fixture(scope="module")
def consistency_mm1():
    config = SimConfig(lam=1.0, service=Exponential(2.0), n=50_000, warmup=1000, seed=SEED)
    start = time.perf_counter()
    report = consistency_experiment(config, N_LIST, g_grid_max=5.0)
    report.extras["runtime"] = time.perf_counter() - start
    return report


@pytest.fixture(scope="module")
def consistency_erlang():
    config = SimConfig(lam=1.0, service=Erlang(2, 4.0), n=50_000, warmup=1000, seed=SEED)
    start = time.perf_counter()
    report = consistency_experiment(config, N_LIST, g_grid_max=5.0)
    report.extras["runtime"] = time.perf_counter() - start
    return report


def test_criterion_5a_rate_consistency(consistency_mm1):
    err = consistency_mm1.metrics["lambda_err.50000"]
    ok = err <= 0.05
    assert announce(
        "5a (rate error at n=5e4, exponential service)", ok, f"err={err:.4f}, tol=0.05"
    )


def test_criterion_5b_lst_sup_error_mm1(consistency_mm1):
    sups = [consistency_mm1.metrics[f"g_sup_r5.{n}"] for n in N_LIST]
    monotone = all(b <= a for a, b in zip(sups, sups[1:]))
    final_ok = sups[-1] <= 0.02
    runtime_ok = consistency_mm1.extras["runtime"] < 30.0
    detail = (
        f"sup errors across n={list(N_LIST)}: {[f'{s:.3g}' for s in sups]}, "
        f"monotone={monotone}, final<=0.02={final_ok}, "
        f"runtime={consistency_mm1.extras['runtime']:.1f}s. "
        "The LST grid [0,5] evaluates the estimated pgf at arguments down to "
        "1-5/rate ~ -4, outside the true arrival pmf's convergence radius (3); "
        "there a single extra count of size k shifts the value by |w|^k/n, "
        "which grows without bound in n, so no sample size can meet this "
        "tolerance (on [0,2] the same errors are "
        + str([f"{consistency_mm1.metrics[f'g_sup_r2.{n}']:.3g}" for n in N_LIST])
        + ", monotone and below 0.02 at n=5e4)."
    )
    assert announce(
        "5b (LST sup error on [0,5], exponential service)",
        monotone and final_ok and runtime_ok,
        detail,
    )


def test_criterion_5c_lst_sup_error_erlang(consistency_erlang):
    lam_err = consistency_erlang.metrics["lambda_err.50000"]
    sups = [consistency_erlang.metrics[f"g_sup_r5.{n}"] for n in N_LIST]
    monotone = all(b <= a for a, b in zip(sups, sups[1:]))
    final_ok = sups[-1] <= 0.02
    ok = lam_err <= 0.05 and monotone and final_ok
    assert announce(
        "5c (consistency with Erlang(2,4) service, quadrature oracle)",
        ok,
        f"lambda_err={lam_err:.4f}, sup errors={[f'{s:.3g}' for s in sups]}, "
        f"monotone={monotone}, final<=0.02={final_ok}. Here the grid endpoint "
        "argument -4 sits inside the arrival pmf's radius (5), but the "
        "per-coefficient noise is still amplified by 4^k, so the sup error "
        "decays only like a small negative power of n and remains an order "
        "of magnitude above the tolerance at n=5e4.",
    )


# ---------------------------------------------------------------------------
# 6. dual utilization identity


def test_criterion_6_rho_dual_identity():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        alpha = float(rng.uniform(0.2, 5.0))
        base = (
            GeometricBase(float(rng.uniform(0.05, 0.9)))
            if rng.random() < 0.5
            else PoissonBase(float(rng.uniform(0.1, 3.0)))
        )
        n_incs = int(rng.integers(0, 40))
        counts: dict[int, int] = {}
        for _ in range(n_incs):
            k = int(rng.geometric(0.4) - 1)
            counts[k] = counts.get(k, 0) + 1
        post = DeltaDirichletPosterior(
            alpha, base, tuple(sorted(counts.items())), n_incs + 1 if n_incs else 0
        )
        ctx = EstimatorContext(float(rng.uniform(0.3, 3.0)), PosteriorMeanPmf(post))
        worst = max(worst, abs(rho_hat_via_lst(ctx) - ctx.pmf.mean_by_series(256)))
    ok = worst <= 1e-8
    assert announce(
        "6 (utilization dual-formula identity, 1000 posteriors)",
        ok,
        f"max |difference|={worst:.2e}, tol=1e-8",
    )


# ---------------------------------------------------------------------------
# 7. posterior normality


def test_criterion_7_bvm():
    config = SimConfig(lam=1.0, service=Exponential(2.0), n=10_000, warmup=1000, seed=SEED)
    start = time.perf_counter()
    report = bvm_experiment(
        config,
        draws=2000,
        z_grid=(0.2, 0.5, 0.8),
        truncation=200,
        dp_prior=DeltaDirichletPosterior(1.0, GeometricBase(0.5)),
        thresholds=BvmThresholds(cov_rel_err=0.15, rate_var_rel_err=0.15, normal_ks=0.05),
    )
    elapsed = time.perf_counter() - start
    ks_max = max(v for k, v in report.metrics.items() if k.startswith("ks."))
    ok = report.passed and elapsed < 60.0
    assert announce(
        "7 (posterior normality)",
        ok,
        f"cov_rel={report.metrics['cov_rel_err']:.3f} (tol 0.15), "
        f"rate_var_rel={report.metrics['rate_var_rel_err']:.3f} (tol 0.15), "
        f"max_ks={ks_max:.3f} (tol 0.05), runtime={elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 8. stationary-law empirical check


def test_criterion_8_pi_empirical():
    config = SimConfig(lam=1.0, service=Exponential(2.0), n=50_000, warmup=1000, seed=SEED)
    report = pi_empirical_check(config)
    true_idle = 0.5  # 1 - rho for this parameter set
    # the report's idle gap compares against the empirical idle fraction;
    # also check against the exact idle probability
    sup_ok = report.metrics["sup_gap"] <= 0.02
    idle_ok = report.metrics["idle_gap"] <= 0.01
    estimate_at_zero = float(report.extras["estimate"][0])
    exact_ok = abs(estimate_at_zero - true_idle) <= 0.01
    ok = sup_ok and idle_ok and exact_ok
    assert announce(
        "8 (stationary-law check)",
        ok,
        f"sup_gap={report.metrics['sup_gap']:.4f} (tol 0.02), "
        f"idle_gap={report.metrics['idle_gap']:.4f} (tol 0.01), "
        f"|pi(0)-(1-rho)|={abs(estimate_at_zero - true_idle):.4f} (tol 0.01)",
    )


# ---------------------------------------------------------------------------
# 9. CLI round trip


def test_criterion_9_cli_round_trip(tmp_path):
    data = tmp_path / "dep.csv"
    post = tmp_path / "post.snap"
    csv = tmp_path / "west.csv"
    codes = {}
    codes["simulate"] = cli_main(
        ["simulate", "--lambda", "1", "--service", "exp:2", "--n", "500",
         "--warmup", "50", "--seed", str(SEED), "--out", str(data)]
    )
    codes["infer"] = cli_main(["infer", "--data", str(data), "--out", str(post)])
    codes["estimate"] = cli_main(
        ["estimate", "--posterior", str(post), "--transform", "w",
         "--grid", "0:5:11", "--out", str(csv)]
    )
    golden = Path(__file__).parent / "data" / "golden_estimate_w.csv"
    golden_ok = csv.read_bytes() == golden.read_bytes()

    loaded = snapshot_parse(post.read_text())
    round_trip_ok = snapshot_render(loaded) == post.read_text()

    bad = tmp_path / "bad.csv"
    bad.write_text("t,n\n2.0,0\n1.0,1\n")
    codes["corrupt"] = cli_main(["infer", "--data", str(bad), "--out", str(tmp_path / "x")])
    codes["unstable"] = cli_main(
        ["simulate", "--lambda", "1", "--service", "exp:1", "--n", "10",
         "--out", str(tmp_path / "y")]
    )
    codes["failing-validate"] = cli_main(
        ["validate", "consistency", "--n-list", "200,400", "--seed", "5",
         "--g-max", "1.0", "--g-tol", "1e-9", "--no-figures"]
    )
    exit_codes_ok = (
        codes["simulate"] == 0
        and codes["infer"] == 0
        and codes["estimate"] == 0
        and codes["corrupt"] == 3
        and codes["unstable"] == 2
        and codes["failing-validate"] == 1
    )
    ok = golden_ok and round_trip_ok and exit_codes_ok
    assert announce(
        "9 (CLI round trip)",
        ok,
        f"golden={golden_ok}, snapshot_round_trip={round_trip_ok}, exit_codes={codes}",
    )
