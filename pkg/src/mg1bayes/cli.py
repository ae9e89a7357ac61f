"""Command-line interface.

Subcommands: simulate (write a departure file), infer (fit both posteriors
from one), estimate (evaluate a transform as CSV), and validate (run the
built-in checks, write a key=value report, and render figures alongside it).

Exit codes: 0 success, 1 validation failure, 2 invalid parameters,
3 corrupt input data.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import snapshot as snap
from .delta_matrix import DeltaDirichletPosterior, parse_base, update_with_marks
from .errors import CorruptDataError, StabilityError
from .rate import GammaPosterior, update
from .service import parse_service
from .simulate import SimConfig, read_departures, simulate_path, write_departures
from .transforms import TRANSFORM_KINDS, EstimatorContext, evaluate_transform
from .validation import (
    BvmThresholds,
    ConsistencyThresholds,
    ExperimentReport,
    PiCheckThresholds,
    bvm_experiment,
    consistency_experiment,
    oracle_agreement,
    pi_empirical_check,
    tau_exhaustive_experiment,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVALID = 2
EXIT_CORRUPT = 3


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo_s, hi_s, steps_s = spec.split(":")
        lo, hi, steps = float(lo_s), float(hi_s), int(steps_s)
    except ValueError as exc:
        raise ValueError(f"grid must be <lo>:<hi>:<steps>, got {spec!r}") from exc
    if steps < 1 or hi < lo:
        raise ValueError(f"grid needs hi >= lo and steps >= 1, got {spec!r}")
    return np.linspace(lo, hi, steps)


# ---------------------------------------------------------------------------
# simulate


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = SimConfig(
        lam=args.lam,
        service=parse_service(args.service),
        n=args.n,
        warmup=args.warmup,
        seed=args.seed,
    )
    path = simulate_path(config)
    buf = io.StringIO()
    write_departures(path, buf)
    _atomic_write(Path(args.out), buf.getvalue())
    print(f"wrote {len(path)} departures to {args.out} (rho={config.rho()!r})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# infer


def _cmd_infer(args: argparse.Namespace) -> int:
    data_path = Path(args.data)
    raw = data_path.read_bytes()
    times, marks = read_departures(io.StringIO(raw.decode("utf-8")))
    gamma_post = update(GammaPosterior(args.gamma_a, args.gamma_b), np.diff(times))
    dp_prior = DeltaDirichletPosterior(args.alpha, parse_base(args.base))
    dp_post = update_with_marks(dp_prior, [int(m) for m in marks])
    result = snap.PosteriorSnapshot(
        gamma=gamma_post, dp=dp_post, source_sha256=snap.sha256_of_bytes(raw)
    )
    _atomic_write(Path(args.out), snap.render(result))
    print(f"wrote posterior snapshot for {len(times)} records to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimate


def _cmd_estimate(args: argparse.Namespace) -> int:
    snap_path = Path(args.posterior)
    raw = snap_path.read_bytes()
    loaded = snap.parse(raw.decode("utf-8"))
    ctx = EstimatorContext.from_posteriors(loaded.gamma, loaded.dp)
    grid = _parse_grid(args.grid) if args.transform != "rho" else np.array([])
    estimate = evaluate_transform(ctx, args.transform, grid)

    lines = [
        f"# transform={estimate.kind}",
        f"# posterior_sha256={snap.sha256_of_bytes(raw)}",
        f"# domain={estimate.domain_note}",
        "arg,value",
    ]
    ok_points = 0
    if estimate.kind == "rho":
        lines.append(f"rho,{estimate.values[0]!r}")
        ok_points = 1
    else:
        for arg, value in zip(estimate.grid, estimate.values):
            if math.isnan(value):  # point failed its domain or convergence check
                print(f"warning: no value at {arg!r}", file=sys.stderr)
                lines.append(f"{arg!r},")
            else:
                ok_points += 1
                lines.append(f"{arg!r},{value!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    if args.figure:
        from .figures import transform_figure

        transform_figure(estimate, Path(args.figure))
    return EXIT_OK if ok_points else EXIT_INVALID


# ---------------------------------------------------------------------------
# validate


def _emit_report(args: argparse.Namespace, report: ExperimentReport, renderer) -> int:
    print(report.table())
    figure_dir: Path | None = None
    if getattr(args, "plot_dir", None):
        figure_dir = Path(args.plot_dir)
    report_path = Path(args.report) if args.report else None
    if report_path:
        _atomic_write(report_path, "\n".join(report.lines()) + "\n")
        print(f"report written to {report_path}")
        if figure_dir is None:
            figure_dir = report_path.parent
    if renderer is not None and figure_dir is not None and not args.no_figures:
        stem = report_path.stem if report_path else report.name
        figure = renderer(report, figure_dir / f"{stem}.png")
        print(f"figure written to {figure}")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_validate_tau(args: argparse.Namespace) -> int:
    from .figures import tau_sweep_figure

    report = tau_exhaustive_experiment(args.max_len, args.max_state)
    for row in report.extras["rows"]:
        print(f"{row.property:24s} checked={row.checked:<10d} violations={row.violations}")
    return _emit_report(
        args, report, lambda rep, path: tau_sweep_figure(rep.extras["rows"], path)
    )


def _cmd_validate_consistency(args: argparse.Namespace) -> int:
    from .figures import consistency_figure

    config = SimConfig(
        lam=args.lam,
        service=parse_service(args.service),
        n=max(args.n_list),
        warmup=args.warmup,
        seed=args.seed,
    )
    report = consistency_experiment(
        config,
        tuple(args.n_list),
        gamma_prior=GammaPosterior(args.gamma_a, args.gamma_b),
        dp_prior=DeltaDirichletPosterior(args.alpha, parse_base(args.base)),
        g_grid_max=args.g_max,
        thresholds=ConsistencyThresholds(
            final_g_sup=args.g_tol, final_lambda_err=args.lambda_tol
        ),
    )
    return _emit_report(args, report, consistency_figure)


def _cmd_validate_bvm(args: argparse.Namespace) -> int:
    from .figures import bvm_figure

    config = SimConfig(
        lam=args.lam,
        service=parse_service(args.service),
        n=args.n,
        warmup=args.warmup,
        seed=args.seed,
    )
    report = bvm_experiment(
        config,
        draws=args.draws,
        z_grid=tuple(args.z_grid),
        truncation=args.truncation,
        gamma_prior=GammaPosterior(args.gamma_a, args.gamma_b),
        dp_prior=DeltaDirichletPosterior(args.alpha, parse_base(args.base)),
        thresholds=BvmThresholds(
            cov_rel_err=args.cov_tol,
            rate_var_rel_err=args.rate_tol,
            normal_ks=args.normal_tol,
        ),
    )
    return _emit_report(args, report, bvm_figure)


def _cmd_validate_oracles(args: argparse.Namespace) -> int:
    from .figures import oracle_figure

    report = oracle_agreement(lam=args.lam, k_max=args.k_max, tol=args.tol)
    return _emit_report(args, report, oracle_figure)


def _cmd_validate_pi(args: argparse.Namespace) -> int:
    from .figures import pi_check_figure

    config = SimConfig(
        lam=args.lam,
        service=parse_service(args.service),
        n=args.n,
        warmup=args.warmup,
        seed=args.seed,
    )
    report = pi_empirical_check(
        config,
        gamma_prior=GammaPosterior(args.gamma_a, args.gamma_b),
        dp_prior=DeltaDirichletPosterior(args.alpha, parse_base(args.base)),
        thresholds=PiCheckThresholds(sup_gap=args.sup_tol, idle_gap=args.idle_tol),
    )
    return _emit_report(args, report, pi_check_figure)


# ---------------------------------------------------------------------------
# parser assembly


def _add_prior_flags(parser: argparse.ArgumentParser, base_default: str) -> None:
    parser.add_argument("--gamma-a", type=float, default=1.0, help="rate-prior shape")
    parser.add_argument("--gamma-b", type=float, default=1.0, help="rate-prior rate")
    parser.add_argument("--alpha", type=float, default=1.0, help="process concentration")
    parser.add_argument(
        "--base", default=base_default, help="base pmf: geom:<p> or pois:<theta>"
    )


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0, help="arrival rate")
    parser.add_argument("--service", default="exp:2", help="service spec, e.g. exp:2")
    parser.add_argument("--warmup", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)


def _add_report_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--report", help="write a key=value report file")
    parser.add_argument("--plot-dir", help="directory for rendered figures")
    parser.add_argument(
        "--no-figures", action="store_true", help="suppress figure rendering"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mg1bayes",
        description="Simulate a stable single-server queue's marked departures and "
        "run Bayesian inference on them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write a departure file")
    p_sim.add_argument("--lambda", dest="lam", type=float, required=True)
    p_sim.add_argument("--service", required=True, help="exp:<mu> | erlang:<k>,<mu> | det:<d> | hyper:<w,mu>[;...]")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--warmup", type=int, default=1000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_inf = sub.add_parser("infer", help="fit posteriors from a departure file")
    p_inf.add_argument("--data", required=True)
    _add_prior_flags(p_inf, base_default="geom:0.5")
    p_inf.add_argument("--out", required=True)
    p_inf.set_defaults(func=_cmd_infer)

    p_est = sub.add_parser("estimate", help="evaluate a transform from a snapshot")
    p_est.add_argument("--posterior", required=True)
    p_est.add_argument("--transform", required=True, choices=TRANSFORM_KINDS)
    p_est.add_argument("--grid", default="0:1:21", help="<lo>:<hi>:<steps>; ignored for rho")
    p_est.add_argument("--out", help="CSV path (stdout when omitted)")
    p_est.add_argument("--figure", help="also render the curve to this file")
    p_est.set_defaults(func=_cmd_estimate)

    p_val = sub.add_parser("validate", help="run built-in checks")
    val_sub = p_val.add_subparsers(dest="check", required=True)

    v_tau = val_sub.add_parser("tau-exhaustive", help="combinatorial sweeps")
    v_tau.add_argument("--max-len", type=int, default=7)
    v_tau.add_argument("--max-state", type=int, default=3)
    _add_report_flags(v_tau)
    v_tau.set_defaults(func=_cmd_validate_tau)

    v_con = val_sub.add_parser("consistency", help="posterior-error decay experiment")
    _add_sim_flags(v_con)
    v_con.add_argument(
        "--n-list", type=lambda s: [int(x) for x in s.split(",")],
        default=[100, 1000, 10_000, 50_000],
    )
    _add_prior_flags(v_con, base_default="pois:1.0")
    v_con.add_argument("--g-max", type=float, default=5.0, help="LST grid upper end")
    v_con.add_argument("--g-tol", type=float, default=0.02)
    v_con.add_argument("--lambda-tol", type=float, default=0.05)
    _add_report_flags(v_con)
    v_con.set_defaults(func=_cmd_validate_consistency)

    v_bvm = val_sub.add_parser("bvm", help="posterior-normality experiment")
    _add_sim_flags(v_bvm)
    v_bvm.add_argument("--n", type=int, default=10_000)
    v_bvm.add_argument("--draws", type=int, default=2000)
    v_bvm.add_argument("--truncation", type=int, default=200)
    v_bvm.add_argument(
        "--z-grid", type=lambda s: [float(x) for x in s.split(",")],
        default=[0.2, 0.5, 0.8],
    )
    _add_prior_flags(v_bvm, base_default="geom:0.5")
    v_bvm.add_argument("--cov-tol", type=float, default=0.15)
    v_bvm.add_argument("--rate-tol", type=float, default=0.15)
    v_bvm.add_argument("--normal-tol", type=float, default=0.05)
    _add_report_flags(v_bvm)
    v_bvm.set_defaults(func=_cmd_validate_bvm)

    v_orc = val_sub.add_parser("oracles", help="quadrature vs closed forms")
    v_orc.add_argument("--lambda", dest="lam", type=float, default=1.0)
    v_orc.add_argument("--k-max", type=int, default=20)
    v_orc.add_argument("--tol", type=float, default=1e-10)
    _add_report_flags(v_orc)
    v_orc.set_defaults(func=_cmd_validate_oracles)

    v_pi = val_sub.add_parser("pi-check", help="stationary-law empirical check")
    _add_sim_flags(v_pi)
    v_pi.add_argument("--n", type=int, default=50_000)
    _add_prior_flags(v_pi, base_default="geom:0.5")
    v_pi.add_argument("--sup-tol", type=float, default=0.02)
    v_pi.add_argument("--idle-tol", type=float, default=0.01)
    _add_report_flags(v_pi)
    v_pi.set_defaults(func=_cmd_validate_pi)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CorruptDataError as exc:
        print(f"error: corrupt data: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except (StabilityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
