"""Command-line surface: estimation, baselines, simulations, pilot planning.

Every subcommand wraps library calls one-to-one and emits the shared report
document (JSON by default, CSV via --output csv) to stdout or --out FILE,
optionally rendering a figure of the same report via --figure FILE.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical or
model-misfit error.  Progress lines go to stderr unless --quiet.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .baselines import NpmleConfig, fwer_count, npmle_fit, plugin_zeta
from .data import Dataset, fit_null_scale, load_tsv
from .ecdf import EmpiricalCdf
from .errors import DataError, NumericalError
from .estimator import (
    EstimatorConfig,
    estimate_curve,
    estimate_zeta,
    estimate_zeta_bisect,
)
from .kernels import Family, MixingDistribution, ObservationModel
from .pilot import (
    detection_sample_complexity,
    estimation_sample_complexity,
    followup_replicates,
    plan_pilot,
)
from .reporting import ExperimentReport
from .simulate import (
    run_beta_mixture_experiment,
    run_conservativeness_trial,
    run_convergence_experiment,
    run_detection_heatmap,
)

_EXIT_OK = 0
_EXIT_USAGE = 1
_EXIT_DATA = 2
_EXIT_NUMERIC = 3

_METHODS = {"direct": "direct_lp", "bisect": "bisect"}

# boolean flags a config file may set with key=true/false
_SWITCH_KEYS = frozenset({"quiet", "fit-null"})

# spike-plus-scaled-Beta scenarios with integer-valued kernels; thresholds
# chosen inside the alternate-mean range so true tails vary along the curve
_BETA_PRESETS = {
    "poisson": {
        "model": "poisson",
        "null_mean": 1.0,
        "alt_fraction": 0.2,
        "beta_a": 2.0,
        "beta_b": 5.0,
        "scale": 5.0,
        "shift": 2.0,
        "gammas": [1.5, 2.0, 2.5, 3.0, 4.0],
    },
    "binomial": {
        "model": "binomial:20",
        "null_mean": 0.5,
        "alt_fraction": 0.1,
        "beta_a": 2.0,
        "beta_b": 5.0,
        "scale": 0.5,
        "shift": 0.5,
        "gammas": [0.55, 0.6, 0.65, 0.7, 0.8],
    },
}


class _UsageError(Exception):
    """Bad flags or flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _parse_model(text: str) -> ObservationModel:
    name, _, param = text.strip().partition(":")
    name = name.lower()
    try:
        if name == "gaussian":
            return ObservationModel.gaussian(float(param) if param else 1.0)
        if name == "poisson":
            if param:
                raise _UsageError("poisson model takes no parameter")
            return ObservationModel.poisson()
        if name == "binomial":
            if not param:
                raise _UsageError("binomial model needs a trial count: binomial:T")
            return ObservationModel.binomial(int(param))
    except (ValueError, _UsageError) as exc:
        if isinstance(exc, _UsageError):
            raise
        raise _UsageError(f"bad model parameter in {text!r}: {exc}") from None
    raise _UsageError(
        f"unknown model {text!r}; expected gaussian:SIGMA, poisson, or binomial:T"
    )


def _model_label(model: ObservationModel) -> str:
    if model.family is Family.GAUSSIAN:
        return f"gaussian:{model.sigma:g}"
    if model.family is Family.POISSON:
        return "poisson"
    return f"binomial:{model.trials}"


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise _UsageError(f"bad {name} list {text!r}: {exc}") from None
    if not values:
        raise _UsageError(f"{name} list is empty")
    return values


def _parse_ints(text: str, name: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise _UsageError(f"bad {name} list {text!r}: {exc}") from None
    if not values:
        raise _UsageError(f"{name} list is empty")
    return values


def _split_columns(text: str | None) -> list[str] | None:
    if text is None:
        return None
    columns = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not columns:
        raise _UsageError("value column list is empty")
    return columns


# -- config file -------------------------------------------------------------


def _find_config_path(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config":
            if i + 1 >= len(argv):
                raise _UsageError("--config needs a file argument")
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _config_tokens(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc}") from exc
    tokens: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("_", "-")
        value = value.strip()
        if not sep or not key:
            raise DataError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        flag = f"--{key}"
        if key in _SWITCH_KEYS:
            if value.lower() not in {"true", "false"}:
                raise DataError(f"{path}:{line_no}: {key} must be true or false")
            if value.lower() == "true":
                tokens.append(flag)
        else:
            tokens.extend([flag, value])
    return tokens


def _apply_config(argv: list[str]) -> list[str]:
    """Insert config-file tokens after the command words, before real flags.

    argparse resolves repeated options last-wins, so flags typed on the
    command line override anything the file sets.
    """
    path = _find_config_path(argv)
    if path is None:
        return argv
    head = 0
    while head < len(argv) and not argv[head].startswith("-"):
        head += 1
    return argv[:head] + _config_tokens(path) + argv[head:]


# -- shared plumbing ----------------------------------------------------------


def _progress(args) -> callable | None:
    if args.quiet:
        return None
    return lambda message: print(message, file=sys.stderr, flush=True)


def _estimator_config(args) -> EstimatorConfig:
    try:
        return EstimatorConfig(
            alpha=args.alpha,
            grid_points=args.grid_points,
            max_constraint_points=args.max_constraint_points,
            method=_METHODS[args.method],
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _load_dataset(args) -> Dataset:
    return load_tsv(args.data, args.id_column, _split_columns(args.value_columns))


def _resolve_model(args, dataset: Dataset | None = None) -> ObservationModel:
    model = _parse_model(args.model)
    if getattr(args, "fit_null", False):
        if model.family is not Family.GAUSSIAN:
            raise _UsageError("--fit-null only applies to the gaussian model")
        if dataset is None:
            raise _UsageError("--fit-null needs --data")
        model = ObservationModel.gaussian(fit_null_scale(dataset.samples()))
    return model


def _emit(report: ExperimentReport, args) -> None:
    document = report.to_csv() if args.output == "csv" else report.to_json()
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
    else:
        sys.stdout.write(document)
    if args.figure:
        from .figures import render_report

        render_report(report, args.figure)


def _estimate_rows(entries) -> list[dict]:
    return [
        {
            "gamma": entry.gamma,
            "zeta_hat": entry.zeta_hat,
            "tau": entry.tau,
            "status": entry.status,
            "residual": entry.residual,
        }
        for entry in entries
    ]


# -- subcommand handlers ------------------------------------------------------


def _cmd_estimate(args) -> ExperimentReport:
    dataset = _load_dataset(args)
    model = _resolve_model(args, dataset)
    ecdf = EmpiricalCdf(dataset.samples())
    cfg = _estimator_config(args)
    estimate = estimate_zeta_bisect if cfg.method == "bisect" else estimate_zeta
    result = estimate(ecdf, model, args.gamma, cfg)
    params = {
        "data": args.data,
        "n": ecdf.n,
        "dropped": dataset.dropped,
        "model": _model_label(model),
        "alpha": cfg.alpha,
        "method": args.method,
        "grid_points": cfg.grid_points,
        "max_constraint_points": cfg.max_constraint_points,
    }
    return ExperimentReport(
        kind="estimate",
        params=params,
        rows=_estimate_rows([result]),
        seed=args.seed,
    )


def _cmd_curve(args) -> ExperimentReport:
    dataset = _load_dataset(args)
    model = _resolve_model(args, dataset)
    ecdf = EmpiricalCdf(dataset.samples())
    cfg = _estimator_config(args)
    gammas = _parse_floats(args.gammas, "gamma")
    curve = estimate_curve(ecdf, model, gammas, cfg)
    params = {
        "data": args.data,
        "n": ecdf.n,
        "dropped": dataset.dropped,
        "model": _model_label(model),
        "alpha": cfg.alpha,
        "method": args.method,
        "grid_points": cfg.grid_points,
        "max_constraint_points": cfg.max_constraint_points,
    }
    return ExperimentReport(
        kind="curve",
        params=params,
        rows=_estimate_rows(curve.entries),
        seed=args.seed,
    )


def _cmd_baseline(args) -> ExperimentReport:
    dataset = _load_dataset(args)
    model = _resolve_model(args, dataset)
    ecdf = EmpiricalCdf(dataset.samples())
    params = {
        "data": args.data,
        "n": ecdf.n,
        "dropped": dataset.dropped,
        "model": _model_label(model),
        "alpha": args.alpha,
    }
    if args.which == "fwer":
        gammas = _parse_floats(args.gammas, "gamma") if args.gammas else [0.0]
        rows = [
            {"gamma": g, "zeta_hat": fwer_count(ecdf, model, g, args.alpha)}
            for g in gammas
        ]
        return ExperimentReport(kind="fwer", params=params, rows=rows, seed=args.seed)

    cfg = NpmleConfig(
        grid_points=args.npmle_grid_points, max_iterations=args.npmle_iterations
    )
    history: list[float] = []
    nu = npmle_fit(ecdf, model, cfg, history=history)
    params["npmle_grid_points"] = cfg.grid_points
    summary = {"log_likelihood": history[-1], "iterations": len(history)}
    if args.gammas:
        gammas = _parse_floats(args.gammas, "gamma")
        rows = [{"gamma": g, "zeta_hat": plugin_zeta(nu, g)} for g in gammas]
        return ExperimentReport(
            kind="npmle_plugin", params=params, rows=rows, seed=args.seed, summary=summary
        )
    rows = [
        {"support": float(s), "weight": float(w)}
        for s, w in zip(nu.support, nu.weights)
    ]
    return ExperimentReport(
        kind="npmle_weights", params=params, rows=rows, seed=args.seed, summary=summary
    )


def _cmd_simulate(args) -> ExperimentReport:
    progress = _progress(args)
    if args.scenario == "convergence":
        gammas = _parse_floats(args.gammas, "gamma") if args.gammas else [0.5, 1.0, 2.0]
        n_values = (
            _parse_ints(args.n_values, "n-values")
            if args.n_values
            else [100, 1000, 10000]
        )
        trials = args.trials if args.trials is not None else 20
        return run_convergence_experiment(
            gammas, n_values, trials, args.alpha, args.seed, progress=progress
        )
    if args.scenario == "heatmap":
        zetas = (
            _parse_floats(args.zetas, "zeta")
            if args.zetas
            else [0.02, 0.05, 0.1, 0.2]
        )
        gammas = (
            _parse_floats(args.gammas, "gamma") if args.gammas else [0.5, 1.0, 2.0, 3.0]
        )
        n = args.n if args.n is not None else 10_000
        trials = args.trials if args.trials is not None else 10
        return run_detection_heatmap(
            zetas, gammas, n, trials, args.alpha, args.seed, progress=progress
        )
    if args.scenario == "conservativeness":
        support = _parse_floats(args.support, "support") if args.support else [0.0, 1.0]
        weights = _parse_floats(args.weights, "weights") if args.weights else [0.9, 0.1]
        try:
            nu_star = MixingDistribution(support, weights)
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
        model = _resolve_model(args)
        gammas = (
            _parse_floats(args.gammas, "gamma") if args.gammas else [0.0, 0.5, 1.0, 1.5]
        )
        n = args.n if args.n is not None else 2000
        trials = args.trials if args.trials is not None else 200
        return run_conservativeness_trial(
            nu_star, model, n, trials, args.alpha, gammas, args.seed, progress=progress
        )
    # beta-mixture
    preset = _BETA_PRESETS.get(args.preset) if args.preset else None
    if args.preset and preset is None:
        raise _UsageError(f"unknown preset {args.preset!r}; use poisson or binomial")

    def pick(flag_value, key):
        if flag_value is not None:
            return flag_value
        if preset is not None:
            return preset[key]
        raise _UsageError(f"--{key.replace('_', '-')} is required without --preset")

    model = (
        _parse_model(preset["model"])
        if preset is not None and args.model == "gaussian:1"
        else _resolve_model(args)
    )
    gammas = (
        _parse_floats(args.gammas, "gamma")
        if args.gammas
        else pick(None, "gammas")
    )
    n = args.n if args.n is not None else 10_000
    return run_beta_mixture_experiment(
        model,
        pick(args.null_mean, "null_mean"),
        pick(args.alt_fraction, "alt_fraction"),
        pick(args.beta_a, "beta_a"),
        pick(args.beta_b, "beta_b"),
        pick(args.scale, "scale"),
        pick(args.shift, "shift"),
        n,
        gammas,
        args.alpha,
        args.seed,
        progress=progress,
    )


def _cmd_pilot(args) -> ExperimentReport:
    if args.calc == "plan":
        if args.budget is None or args.zeta is None:
            raise _UsageError("pilot plan needs --budget and --zeta")
        plan = plan_pilot(args.budget, args.zeta, args.delta)
        rows = [asdict(plan)]
        return ExperimentReport(kind="pilot_plan", rows=rows, seed=args.seed)
    if args.calc == "followup":
        if args.pilot_n is None or args.gamma is None or args.zeta_hat is None:
            raise _UsageError("pilot followup needs --pilot-n, --gamma, --zeta-hat")
        replicates = followup_replicates(args.pilot_n, args.gamma, args.zeta_hat)
        rows = [
            {
                "pilot_n": args.pilot_n,
                "gamma": args.gamma,
                "zeta_hat": args.zeta_hat,
                "replicates": replicates,
            }
        ]
        return ExperimentReport(kind="pilot_followup", rows=rows, seed=args.seed)
    # samplesize
    if args.zeta is None or args.gamma is None:
        raise _UsageError("pilot samplesize needs --zeta and --gamma")
    model = _parse_model(args.model)
    if model.family is not Family.GAUSSIAN:
        raise _UsageError("sample-size formulas assume the gaussian model")
    if args.kind == "detection":
        n = detection_sample_complexity(args.zeta, args.gamma, model.sigma, args.delta)
    else:
        n = estimation_sample_complexity(
            args.zeta, args.gamma, model.sigma, args.alpha, args.delta
        )
    rows = [
        {
            "kind": args.kind,
            "zeta": args.zeta,
            "gamma": args.gamma,
            "sigma": model.sigma,
            "alpha": args.alpha,
            "delta": args.delta,
            "n": n,
        }
    ]
    return ExperimentReport(kind="pilot_samplesize", rows=rows, seed=args.seed)


def _cmd_fit_null(args) -> ExperimentReport:
    dataset = _load_dataset(args)
    sigma = fit_null_scale(dataset.samples())
    rows = [
        {
            "n": dataset.n,
            "dropped": dataset.dropped,
            "sigma": sigma,
            "sigma_squared": sigma * sigma,
        }
    ]
    params = {"data": args.data}
    return ExperimentReport(kind="fit_null", params=params, rows=rows, seed=args.seed)


# -- parser -------------------------------------------------------------------


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument(
        "--alpha", type=float, default=0.05, help="simultaneous error level"
    )
    common.add_argument(
        "--model",
        default="gaussian:1",
        help="observation kernel: gaussian:SIGMA | poisson | binomial:T",
    )
    common.add_argument(
        "--grid-points", type=int, default=200, help="candidate mean grid size"
    )
    common.add_argument(
        "--max-constraint-points",
        type=int,
        default=1024,
        help="cap on empirical-CDF constraint points",
    )
    common.add_argument(
        "--method",
        choices=sorted(_METHODS),
        default="direct",
        help="optimize tail mass directly or bisect the fit statistic",
    )
    common.add_argument(
        "--output", choices=["json", "csv"], default="json", help="report format"
    )
    common.add_argument(
        "--config",
        metavar="FILE",
        help="flat key=value defaults; command-line flags win",
    )
    common.add_argument(
        "--out", metavar="FILE", help="write the report here instead of stdout"
    )
    common.add_argument(
        "--figure",
        metavar="FILE",
        help="also render the report as a figure (format from the suffix)",
    )
    common.add_argument(
        "--quiet", action="store_true", help="suppress progress lines on stderr"
    )

    data_opts = argparse.ArgumentParser(add_help=False)
    data_opts.add_argument("--data", required=True, help="tab-delimited input file")
    data_opts.add_argument(
        "--id-column", help="identifier column name (default: first column)"
    )
    data_opts.add_argument(
        "--value-columns",
        help="comma-separated replicate columns (default: all non-id columns)",
    )

    fit_null_opt = argparse.ArgumentParser(add_help=False)
    fit_null_opt.add_argument(
        "--fit-null",
        action="store_true",
        help="replace the gaussian sigma with a robust fit from the data",
    )

    parser = _Parser(
        prog="tailmass",
        description=(
            "Conservative estimation of the fraction of effect sizes above a "
            "threshold, with baselines, simulations, and pilot-design math."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "estimate",
        parents=[common, data_opts, fit_null_opt],
        help="conservative tail-mass estimate at one threshold",
    )
    p.add_argument("--gamma", type=float, required=True, help="effect threshold")
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser(
        "curve",
        parents=[common, data_opts, fit_null_opt],
        help="estimates across an increasing threshold sweep",
    )
    p.add_argument(
        "--gammas", required=True, help="comma-separated increasing thresholds"
    )
    p.set_defaults(handler=_cmd_curve)

    p = sub.add_parser(
        "baseline",
        parents=[common, data_opts, fit_null_opt],
        help="per-hypothesis rejection counting or grid maximum likelihood",
    )
    p.add_argument("which", choices=["fwer", "npmle"])
    p.add_argument("--gammas", help="thresholds (npmle: omit to dump weights)")
    p.add_argument("--npmle-grid-points", type=int, default=200)
    p.add_argument("--npmle-iterations", type=int, default=2000)
    p.set_defaults(handler=_cmd_baseline)

    p = sub.add_parser(
        "simulate",
        parents=[common],
        help="synthetic-data experiment drivers",
    )
    p.add_argument(
        "scenario",
        choices=["convergence", "heatmap", "conservativeness", "beta-mixture"],
    )
    p.add_argument("--gammas", help="comma-separated thresholds or effect sizes")
    p.add_argument("--zetas", help="comma-separated tail masses (heatmap)")
    p.add_argument("--n-values", help="comma-separated sample sizes (convergence)")
    p.add_argument("--n", type=int, help="samples per trial")
    p.add_argument("--trials", type=int, help="trials per configuration")
    p.add_argument("--support", help="true mean atoms (conservativeness)")
    p.add_argument("--weights", help="true atom weights (conservativeness)")
    p.add_argument(
        "--preset", help="beta-mixture scenario preset: poisson | binomial"
    )
    p.add_argument("--null-mean", type=float)
    p.add_argument("--alt-fraction", type=float)
    p.add_argument("--beta-a", type=float)
    p.add_argument("--beta-b", type=float)
    p.add_argument("--scale", type=float)
    p.add_argument("--shift", type=float)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser(
        "pilot",
        parents=[common],
        help="pilot budgets, follow-up replicates, and sample sizes",
    )
    p.add_argument("calc", choices=["plan", "followup", "samplesize"])
    p.add_argument("--budget", type=float, help="total replicate budget")
    p.add_argument("--zeta", type=float, help="tail fraction of interest")
    p.add_argument("--delta", type=float, default=0.05, help="failure probability")
    p.add_argument("--gamma", type=float, help="effect threshold")
    p.add_argument("--pilot-n", type=float, help="pilot hypothesis count")
    p.add_argument("--zeta-hat", type=float, help="pilot tail estimate")
    p.add_argument(
        "--kind",
        choices=["detection", "estimation"],
        default="detection",
        help="which sample-size formula",
    )
    p.set_defaults(handler=_cmd_pilot)

    p = sub.add_parser(
        "fit-null",
        parents=[common, data_opts],
        help="robust null scale from averaged statistics",
    )
    p.set_defaults(handler=_cmd_fit_null)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_apply_config(argv))
        report = args.handler(args)
        _emit(report, args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except SystemExit as exc:  # argparse --help/--version
        return int(exc.code) if isinstance(exc.code, int) else _EXIT_OK
    return _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
