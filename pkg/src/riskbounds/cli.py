"""Command-line frontend: wilson, fit, coverage, simulate, refuted.

Every output (stdout or file) starts with a run manifest rendered as
comment lines, so any table can be traced back to the exact invocation
that produced it.  Reruns with an identical manifest are byte-identical;
set SOURCE_DATE_EPOCH to pin the manifest timestamp.

Exit codes: 0 success, 2 input/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .data import InputError, expand_weights, parse_category_table
from .identifiability import (
    ScenarioSpec,
    ThresholdScenario,
    clustering_test,
    exact_count_distribution,
    icc_estimate,
    marginal_equivalence_check,
    read_scenario_config,
    simulate_repeated,
    simulate_threshold_cohort,
)
from .logistic import (
    NumericalError,
    figure_data,
    fit_grouped_logistic,
    predict_risk,
    trend_test,
)
from .refuted import (
    REFUTATION_BANNER,
    CM1PseudoInput,
    cm1_pseudo_interval,
    hmc_individual_interval,
)
from .rounding import format_fixed
from .wilson import WilsonInput, exact_coverage, wilson_interval

FORMATS = ("csv", "tsv", "pretty")
DEFAULT_DIGITS = 4
SEED_ENV_VAR = "RISKBOUNDS_SEED"


# ---------------------------------------------------------------------------
# run manifest and table rendering


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    inputs: tuple[str, ...]
    parameters: tuple[tuple[str, str], ...]
    seed: int | None
    version: str
    timestamp: str

    def lines(self) -> list[str]:
        params = " ".join(f"{k}={v}" for k, v in self.parameters) or "none"
        return [
            f"riskbounds {self.version}",
            f"subcommand: {self.subcommand}",
            f"inputs: {', '.join(self.inputs) or 'none'}",
            f"parameters: {params}",
            f"seed: {self.seed if self.seed is not None else 'none'}",
            f"timestamp: {self.timestamp}",
        ]


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = int(epoch) if epoch is not None else int(time.time())
    return datetime.fromtimestamp(moment, tz=timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def build_manifest(
    subcommand: str,
    inputs: tuple[str, ...],
    parameters: dict[str, object],
    seed: int | None = None,
) -> RunManifest:
    rendered = tuple(sorted((k, str(v)) for k, v in parameters.items()))
    return RunManifest(
        subcommand=subcommand,
        inputs=inputs,
        parameters=rendered,
        seed=seed,
        version=__version__,
        timestamp=_timestamp(),
    )


def _cell(value: object, digits: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_fixed(value, digits)
    return str(value)


def render_table(
    columns: list[str],
    rows: list[list[object]],
    manifest: RunManifest,
    fmt: str,
    digits: int,
    banner: str | None = None,
    footer: list[str] | None = None,
) -> str:
    """Render rows in csv, tsv, or pretty layout, manifest included."""
    footer = footer or []
    cells = [[_cell(v, digits) for v in row] for row in rows]
    lines: list[str] = []
    if fmt in ("csv", "tsv"):
        sep = "," if fmt == "csv" else "\t"
        lines.extend(f"# {text}" for text in manifest.lines())
        if banner:
            lines.extend(f"# {text}" for text in banner.splitlines())
        lines.append(sep.join(columns))
        lines.extend(sep.join(row) for row in cells)
        lines.extend(f"# {text}" for text in footer)
    elif fmt == "pretty":
        lines.extend(manifest.lines())
        lines.append("")
        if banner:
            lines.extend(banner.splitlines())
            lines.append("")
        widths = [
            max(len(col), *(len(row[i]) for row in cells)) if cells else len(col)
            for i, col in enumerate(columns)
        ]
        lines.append("  ".join(col.ljust(w) for col, w in zip(columns, widths)))
        lines.append("  ".join("-" * w for w in widths))
        lines.extend(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in cells
        )
        if footer:
            lines.append("")
            lines.extend(footer)
    else:
        raise InputError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"


def _read_table_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_category_table(text, name=Path(path).stem)


def _env_seed() -> int | None:
    env = os.environ.get(SEED_ENV_VAR)
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise InputError(
            f"{SEED_ENV_VAR} must be an integer, got {env!r}"
        ) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_wilson(args: argparse.Namespace) -> int:
    digits = args.round if args.round is not None else DEFAULT_DIGITS
    if args.fictitious is not None:
        theta_text, n_text = args.fictitious
        try:
            theta = float(theta_text)
            sizes = [float(part) for part in n_text.split(",") if part]
        except ValueError:
            raise InputError(
                "--fictitious expects THETA and a comma-separated n list"
            ) from None
        if not sizes:
            raise InputError("--fictitious n list is empty")
        manifest = build_manifest(
            "wilson",
            inputs=(),
            parameters={
                "alpha": args.alpha,
                "theta": theta,
                "n_list": n_text,
                "format": args.format,
                "round": args.round,
            },
        )
        columns = ["n", "theta_hat", "lower", "upper", "level", "method", "valid"]
        rows = []
        for n in sizes:
            est = wilson_interval(WilsonInput(theta_hat=theta, n=n, alpha=args.alpha))
            rows.append(
                [n, theta, est.lower, est.upper, est.level, est.method, est.valid]
            )
        sys.stdout.write(
            render_table(columns, rows, manifest, args.format, digits)
        )
        return 0

    if args.table is None:
        raise InputError("provide a table path or --fictitious THETA N_LIST")
    table = _read_table_file(args.table)
    manifest = build_manifest(
        "wilson",
        inputs=(args.table,),
        parameters={
            "alpha": args.alpha,
            "per_row": True,
            "format": args.format,
            "round": args.round,
        },
    )
    columns = [
        "category",
        "total",
        "events",
        "theta_hat",
        "lower",
        "upper",
        "level",
        "method",
        "valid",
    ]
    rows = []
    for row in table.rows:
        est = wilson_interval(
            WilsonInput(theta_hat=row.proportion, n=row.total, alpha=args.alpha)
        )
        rows.append(
            [
                row.category,
                row.total,
                row.events,
                row.proportion,
                est.lower,
                est.upper,
                est.level,
                est.method,
                est.valid,
            ]
        )
    sys.stdout.write(render_table(columns, rows, manifest, args.format, digits))
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    digits = args.round if args.round is not None else DEFAULT_DIGITS
    try:
        alphas = [float(part) for part in args.alpha.split(",") if part]
    except ValueError:
        raise InputError(f"bad --alpha list {args.alpha!r}") from None
    if not alphas:
        raise InputError("--alpha list is empty")
    table = _read_table_file(args.table)
    if args.expand != 1:
        table = expand_weights(table, args.expand)
    fit = fit_grouped_logistic(table)
    trend = trend_test(fit)

    manifest = build_manifest(
        "fit",
        inputs=(args.table,),
        parameters={
            "alpha": args.alpha,
            "expand": args.expand,
            "format": args.format,
            "round": args.round,
        },
    )
    se0 = float(fit.cov[0, 0]) ** 0.5
    se1 = float(fit.cov[1, 1]) ** 0.5
    summary = [
        f"fit: beta0={format_fixed(fit.beta0, digits)} "
        f"se0={format_fixed(se0, digits)} "
        f"beta1={format_fixed(fit.beta1, digits)} "
        f"se1={format_fixed(se1, digits)}",
        f"fit: deviance={format_fixed(fit.deviance, digits)} "
        f"iterations={fit.iterations} converged={str(fit.converged).lower()}",
        f"trend: wald_chi2={format_fixed(trend.wald_chi2, digits)} "
        f"p_value={trend.p_value:.3g}",
    ]
    columns = [
        "alpha",
        "category",
        "total",
        "events",
        "observed",
        "fitted",
        "lower",
        "upper",
    ]
    rows = []
    for alpha in alphas:
        for row in table.rows:
            pred = predict_risk(fit, row.category, alpha)
            rows.append(
                [
                    alpha,
                    row.category,
                    row.total,
                    row.events,
                    row.proportion,
                    pred.risk,
                    pred.interval.lower,
                    pred.interval.upper,
                ]
            )
    sys.stdout.write(
        render_table(
            columns, rows, manifest, args.format, digits, footer=summary
        )
    )

    if args.figure is not None:
        points = figure_data(fit, table, alphas[0])
        fig_manifest = build_manifest(
            "fit",
            inputs=(args.table,),
            parameters={
                "alpha": alphas[0],
                "expand": args.expand,
                "figure": args.figure,
                "round": args.round,
            },
        )
        fig_rows = [
            [p.category, p.observed, p.fitted, p.lower, p.upper] for p in points
        ]
        text = render_table(
            ["category", "observed", "fitted", "lower", "upper"],
            fig_rows,
            fig_manifest,
            "csv",
            digits,
        )
        Path(args.figure).write_text(text, encoding="utf-8")
    return 0


def cmd_coverage(args: argparse.Namespace) -> int:
    digits = args.round if args.round is not None else DEFAULT_DIGITS
    try:
        report = exact_coverage(args.n, args.p, args.level)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    manifest = build_manifest(
        "coverage",
        inputs=(),
        parameters={
            "n": args.n,
            "p": args.p,
            "level": args.level,
            "format": args.format,
            "round": args.round,
        },
    )
    columns = ["k", "probability", "lower", "upper", "covered"]
    rows = [
        [o.k, o.probability, o.interval.lower, o.interval.upper, o.covered]
        for o in report.per_outcome
    ]
    footer = [f"coverage: {format_fixed(report.coverage, digits)}"]
    sys.stdout.write(
        render_table(columns, rows, manifest, args.format, digits, footer=footer)
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    digits = args.round if args.round is not None else DEFAULT_DIGITS
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {args.config}: {exc}") from exc
    # precedence: --seed beats each section's seed key, which beats the
    # RISKBOUNDS_SEED fallback, which beats the built-in default of 0
    env_seed = _env_seed()
    specs = read_scenario_config(
        text,
        seed_override=args.seed,
        fallback_seed=env_seed if env_seed is not None else 0,
    )
    seed = args.seed if args.seed is not None else env_seed
    if args.reps is not None:
        if args.reps < 1:
            raise InputError("--reps must be >= 1")
        specs = {
            name: (
                spec
                if isinstance(spec, ThresholdScenario)
                else ScenarioSpec(
                    risk_distribution=spec.risk_distribution,
                    sample_size=spec.sample_size,
                    repeats=args.reps,
                    seed=spec.seed,
                )
            )
            for name, spec in specs.items()
        }

    manifest = build_manifest(
        "simulate",
        inputs=(args.config,),
        parameters={
            "reps": args.reps,
            "format": args.format,
            "round": args.round,
        },
        seed=seed,
    )
    columns = ["section", "record", "key", "value"]
    rows: list[list[object]] = []
    outcome_rows: list[list[object]] = []
    single_outcome: list[tuple[str, ScenarioSpec]] = []

    for name, spec in specs.items():
        if isinstance(spec, ThresholdScenario):
            cohort = simulate_threshold_cohort(
                spec.model, spec.cohort_size, spec.seed
            )
            observed = float(cohort.outcomes.outcomes.mean())
            rows.append([name, "threshold", "cohort_size", spec.cohort_size])
            rows.append([name, "threshold", "observed_frequency", observed])
            rows.append(
                [name, "threshold", "mean_latent_risk", float(cohort.latent_risks.mean())]
            )
            for i, value in enumerate(cohort.outcomes.outcomes[:, 0]):
                outcome_rows.append([name, i, 0, int(value)])
            continue
        if spec.repeats == 1:
            dist = exact_count_distribution(spec)
            for k, prob in enumerate(dist):
                rows.append([name, "count_distribution", k, float(prob)])
            single_outcome.append((name, spec))
            continue
        data = simulate_repeated(spec)
        cluster = clustering_test(data)
        icc = icc_estimate(data)
        rows.append([name, "clustering", "statistic", cluster.statistic])
        rows.append([name, "clustering", "df", cluster.df])
        rows.append([name, "clustering", "p_value", cluster.p_value])
        if cluster.p_value_permutation is not None:
            rows.append(
                [name, "clustering", "p_value_permutation", cluster.p_value_permutation]
            )
        rows.append([name, "clustering", "undefined", cluster.undefined])
        rows.append(
            [name, "icc", "estimate", icc.value if not icc.undefined else "nan"]
        )
        rows.append([name, "icc", "undefined", icc.undefined])
        for i in range(data.n_individuals):
            for j in range(data.n_repeats):
                outcome_rows.append([name, i, j, int(data.outcomes[i, j])])

    if len(single_outcome) >= 2:
        (name_a, spec_a), (name_b, spec_b) = single_outcome[0], single_outcome[1]
        if spec_a.sample_size == spec_b.sample_size:
            tv = marginal_equivalence_check(
                spec_a, spec_b, spec_a.sample_size, strict=False
            )
            rows.append([f"{name_a}|{name_b}", "tv_distance", "value", tv])

    sys.stdout.write(render_table(columns, rows, manifest, args.format, digits))

    if args.outcomes is not None:
        text_out = render_table(
            ["section", "individual", "rep", "outcome"],
            outcome_rows,
            manifest,
            "csv",
            digits,
        )
        Path(args.outcomes).write_text(text_out, encoding="utf-8")
    return 0


def cmd_refuted(args: argparse.Namespace) -> int:
    digits = args.round if args.round is not None else DEFAULT_DIGITS
    if args.mode == "hmc":
        if args.theta is None:
            raise InputError("--mode hmc requires --theta")
        est = hmc_individual_interval(args.theta, args.alpha)
        manifest = build_manifest(
            "refuted",
            inputs=(),
            parameters={
                "mode": "hmc",
                "theta": args.theta,
                "alpha": args.alpha,
                "format": args.format,
                "round": args.round,
            },
        )
        columns = ["theta_hat", "n", "lower", "upper", "level", "method", "valid", "note"]
        rows = [
            [
                args.theta,
                1,
                est.lower,
                est.upper,
                est.level,
                est.method,
                est.valid,
                est.note,
            ]
        ]
    else:
        required = {
            "--sigma": args.sigma,
            "--beta0": args.beta0,
            "--beta1": args.beta1,
            "--n": args.n,
            "--x-bar": args.x_bar,
            "--ss-x": args.ss_x,
            "--x-new": args.x_new,
        }
        missing = [flag for flag, value in required.items() if value is None]
        if missing:
            raise InputError(
                f"--mode cm1 requires {', '.join(missing)} (sigma has no "
                "default by design: the fit provides no such quantity)"
            )
        try:
            inp = CM1PseudoInput(
                beta0=args.beta0,
                beta1=args.beta1,
                sigma_hat=args.sigma,
                n=args.n,
                x_bar=args.x_bar,
                ss_x=args.ss_x,
                x_new=args.x_new,
                alpha=args.alpha,
            )
            est = cm1_pseudo_interval(inp, df=args.df)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        manifest = build_manifest(
            "refuted",
            inputs=(),
            parameters={
                "mode": "cm1",
                "beta0": args.beta0,
                "beta1": args.beta1,
                "sigma": args.sigma,
                "n": args.n,
                "x_bar": args.x_bar,
                "ss_x": args.ss_x,
                "x_new": args.x_new,
                "alpha": args.alpha,
                "df": args.df,
                "format": args.format,
                "round": args.round,
            },
        )
        columns = ["point", "lower", "upper", "level", "method", "valid", "note"]
        rows = [
            [est.point, est.lower, est.upper, est.level, est.method, est.valid, est.note]
        ]
    sys.stdout.write(
        render_table(
            columns,
            rows,
            manifest,
            args.format,
            digits,
            banner=REFUTATION_BANNER,
        )
    )
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskbounds",
        description=(
            "Group-risk confidence intervals from stratified binary-outcome "
            "counts, their exact coverage, and identifiability simulations."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"riskbounds {__version__}"
    )
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--format", choices=FORMATS, default="pretty", help="output layout"
    )
    shared.add_argument(
        "--round",
        type=int,
        default=None,
        metavar="DIGITS",
        help="presentation rounding (default: 4 decimals)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_wilson = sub.add_parser(
        "wilson",
        parents=[shared],
        help="score intervals per stratum, or for a what-if theta/n sweep",
    )
    p_wilson.add_argument("table", nargs="?", help="category,total,events CSV")
    p_wilson.add_argument("--alpha", type=float, default=0.05)
    p_wilson.add_argument(
        "--per-row",
        action="store_true",
        help="one interval per stratum (the default for table input)",
    )
    p_wilson.add_argument(
        "--fictitious",
        nargs=2,
        metavar=("THETA", "N_LIST"),
        help="fixed proportion and comma-separated sample sizes, real samples or not",
    )
    p_wilson.set_defaults(func=cmd_wilson)

    p_fit = sub.add_parser(
        "fit",
        parents=[shared],
        help="grouped logistic fit with per-category risk intervals",
    )
    p_fit.add_argument("table", help="category,total,events CSV")
    p_fit.add_argument(
        "--alpha", default="0.05", help="comma-separated significance levels"
    )
    p_fit.add_argument(
        "--expand",
        type=int,
        default=1,
        metavar="K",
        help="replicate all counts K-fold before fitting",
    )
    p_fit.add_argument(
        "--figure", metavar="PATH", help="write the plot dataset CSV here"
    )
    p_fit.set_defaults(func=cmd_fit)

    p_cov = sub.add_parser(
        "coverage",
        parents=[shared],
        help="exact finite-sample coverage of the score interval",
    )
    p_cov.add_argument("--n", type=int, required=True)
    p_cov.add_argument("--p", type=float, required=True)
    p_cov.add_argument("--level", type=float, default=0.95)
    p_cov.set_defaults(func=cmd_coverage)

    p_sim = sub.add_parser(
        "simulate",
        parents=[shared],
        help="identifiability scenarios from a config file",
    )
    p_sim.add_argument("config", help="INI config of scenario sections")
    p_sim.add_argument(
        "--seed", type=int, default=None, help="override every section's seed"
    )
    p_sim.add_argument(
        "--reps", type=int, default=None, help="override repeats per individual"
    )
    p_sim.add_argument(
        "--outcomes", metavar="PATH", help="write raw outcome rows CSV here"
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_ref = sub.add_parser(
        "refuted",
        parents=[shared],
        help="reproduce a refuted individual-risk interval (flagged invalid)",
    )
    p_ref.add_argument("--mode", choices=("hmc", "cm1"), required=True)
    p_ref.add_argument("--alpha", type=float, default=0.05)
    p_ref.add_argument("--theta", type=float, help="observed proportion (hmc mode)")
    p_ref.add_argument("--beta0", type=float, help="intercept (cm1 mode)")
    p_ref.add_argument("--beta1", type=float, help="slope (cm1 mode)")
    p_ref.add_argument(
        "--sigma", type=float, help="claimed residual SD (cm1 mode, no default)"
    )
    p_ref.add_argument("--n", type=int, help="sample size (cm1 mode)")
    p_ref.add_argument("--x-bar", type=float, help="predictor mean (cm1 mode)")
    p_ref.add_argument(
        "--ss-x", type=float, help="predictor sum of squares (cm1 mode)"
    )
    p_ref.add_argument("--x-new", type=float, help="target score (cm1 mode)")
    p_ref.add_argument(
        "--df", type=int, default=None, help="override t degrees of freedom (cm1)"
    )
    p_ref.set_defaults(func=cmd_refuted)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed a usage message; keep its exit code
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
