"""Command line front end.

Four subcommands: ``generate`` (synthetic panels + ground truth),
``infer`` (causality matrix for one panel), ``eval`` (AUC of a matrix
against ground truth) and ``bench`` (the full generate/infer/score loop).

Exit codes: 0 success, 1 numerical/runtime failure, 2 invalid input.
Primary results go to stdout; progress and errors go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace

from .core import (
    format_gci,
    load_ground_truth,
    load_panel,
    save_gci,
    save_ground_truth,
    save_panel,
)
from .errors import KgrangerError, MissingFileError, SchemaError
from .evaluate import (
    auc,
    roc_points,
    run_benchmark,
    write_per_trial_csv,
    write_report_json,
)
from .granger import (
    LskgcConfig,
    lasso_granger_infer,
    lsgc_infer,
    lskgc_infer_with_diagnostics,
)
from .kernels import MEDIAN_HEURISTIC, KernelConfig
from .plotting import save_boxplot
from .regression import RegressionSpec
from .synthgen import GeneratorConfig, generate_trial, suite_layout

METHOD_CHOICES = ("lskgc", "lsgc", "lasso_granger")
# The infer flag also accepts the hyphenated spelling.
METHOD_FLAG_CHOICES = ("lskgc", "lsgc", "lasso-granger", "lasso_granger")


@dataclass(frozen=True)
class LassoGrangerParams:
    lag: int = 2
    lambda1: float = 0.05
    tol: float = 1e-8
    max_iter: int = 10000


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated benchmark experiment."""

    seed: int
    t_values: tuple[int, ...]
    n_trials: int
    methods: tuple[str, ...]
    generator: GeneratorConfig
    inference: LskgcConfig = field(default_factory=LskgcConfig)
    lasso: LassoGrangerParams = field(default_factory=LassoGrangerParams)
    output_dir: str = "."
    raw_config: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Strict JSON config parsing
# ---------------------------------------------------------------------------


def _check_keys(doc: dict, allowed: set, path: str):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise SchemaError(where, "unknown field")


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        where = f"{path}.{key}" if path else key
        raise SchemaError(where, "missing required field")
    return doc[key]


def _as_int(value, path: str, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise SchemaError(path, f"must be >= {minimum}")
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, "expected a number")
    out = float(value)
    if not math.isfinite(out):
        raise SchemaError(path, "must be finite")
    return out


def _as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, "expected an object")
    return value


def _parse_kernel(doc: dict, path: str) -> KernelConfig:
    _check_keys(doc, {"kind", "bandwidth_sigma", "degree", "offset"}, path)
    kwargs = {}
    if "kind" in doc:
        kwargs["kind"] = doc["kind"]
    if "bandwidth_sigma" in doc:
        bw = doc["bandwidth_sigma"]
        if not isinstance(bw, str):
            bw = _as_float(bw, f"{path}.bandwidth_sigma")
        kwargs["bandwidth_sigma"] = bw
    if "degree" in doc:
        kwargs["degree"] = _as_int(doc["degree"], f"{path}.degree")
    if "offset" in doc:
        kwargs["offset"] = _as_float(doc["offset"], f"{path}.offset")
    try:
        return KernelConfig(**kwargs)
    except (ValueError, KgrangerError) as exc:
        raise SchemaError(path, str(exc)) from exc


def _parse_regression(doc: dict, path: str) -> RegressionSpec:
    _check_keys(doc, {"method", "lambda1", "lambda2", "tol", "max_iter"}, path)
    kwargs = {}
    for key in ("lambda1", "lambda2", "tol"):
        if key in doc:
            kwargs[key] = _as_float(doc[key], f"{path}.{key}")
    if "max_iter" in doc:
        kwargs["max_iter"] = _as_int(doc["max_iter"], f"{path}.max_iter")
    if "method" in doc:
        kwargs["method"] = doc["method"]
    try:
        return RegressionSpec(**kwargs)
    except (ValueError, KgrangerError) as exc:
        raise SchemaError(path, str(exc)) from exc


def _parse_inference(doc: dict, path: str) -> LskgcConfig:
    allowed = {
        "kernel",
        "components",
        "lag",
        "max_lag",
        "regression",
        "variance_floor",
        "eigensolver",
    }
    _check_keys(doc, allowed, path)
    kwargs = {}
    if "kernel" in doc:
        kwargs["kernel"] = _parse_kernel(
            _as_object(doc["kernel"], f"{path}.kernel"), f"{path}.kernel"
        )
    if "regression" in doc:
        kwargs["regression"] = _parse_regression(
            _as_object(doc["regression"], f"{path}.regression"),
            f"{path}.regression",
        )
    if "components" in doc:
        value = doc["components"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{path}.components", "expected a number")
        kwargs["components"] = value
    if "lag" in doc:
        value = doc["lag"]
        if not isinstance(value, (int, str)) or isinstance(value, bool):
            raise SchemaError(f"{path}.lag", "expected an integer or rule name")
        kwargs["lag"] = value
    if "max_lag" in doc:
        kwargs["max_lag"] = _as_int(doc["max_lag"], f"{path}.max_lag", 1)
    if "variance_floor" in doc:
        kwargs["variance_floor"] = _as_float(
            doc["variance_floor"], f"{path}.variance_floor"
        )
    if "eigensolver" in doc:
        kwargs["eigensolver"] = doc["eigensolver"]
    try:
        return LskgcConfig(**kwargs)
    except (ValueError, KgrangerError) as exc:
        raise SchemaError(path, str(exc)) from exc


def _parse_generator(doc: dict, path: str, seed: int) -> GeneratorConfig:
    allowed = {
        "n_nodes",
        "n_edges",
        "max_lag",
        "coupling_range",
        "autocoeff",
        "noise_sigma",
        "nonlinear_fraction",
        "nonlinearity",
        "burn_in",
        "stability_cap",
    }
    _check_keys(doc, allowed, path)
    kwargs = {"seed": seed}
    for key in ("n_nodes", "n_edges", "max_lag", "burn_in"):
        if key in doc:
            kwargs[key] = _as_int(doc[key], f"{path}.{key}")
    for key in (
        "autocoeff",
        "noise_sigma",
        "nonlinear_fraction",
        "stability_cap",
    ):
        if key in doc:
            kwargs[key] = _as_float(doc[key], f"{path}.{key}")
    if "coupling_range" in doc:
        pair = doc["coupling_range"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaError(
                f"{path}.coupling_range", "expected a [low, high] pair"
            )
        kwargs["coupling_range"] = (
            _as_float(pair[0], f"{path}.coupling_range[0]"),
            _as_float(pair[1], f"{path}.coupling_range[1]"),
        )
    if "nonlinearity" in doc:
        kwargs["nonlinearity"] = doc["nonlinearity"]
    try:
        return GeneratorConfig(**kwargs)
    except KgrangerError as exc:
        raise SchemaError(path, str(exc)) from exc


def _parse_lasso(doc: dict, path: str) -> LassoGrangerParams:
    _check_keys(doc, {"lag", "lambda1", "tol", "max_iter"}, path)
    kwargs = {}
    if "lag" in doc:
        kwargs["lag"] = _as_int(doc["lag"], f"{path}.lag", 1)
    if "lambda1" in doc:
        kwargs["lambda1"] = _as_float(doc["lambda1"], f"{path}.lambda1")
    if "tol" in doc:
        kwargs["tol"] = _as_float(doc["tol"], f"{path}.tol")
    if "max_iter" in doc:
        kwargs["max_iter"] = _as_int(doc["max_iter"], f"{path}.max_iter", 1)
    return LassoGrangerParams(**kwargs)


def parse_experiment_config(doc: dict, base_dir: str = ".") -> ExperimentConfig:
    """Validate a raw JSON document into an :class:`ExperimentConfig`.

    ``base_dir`` anchors relative paths in the document (the config file's
    directory when loaded from disk).
    """
    _as_object(doc, "<root>")
    allowed = {
        "seed",
        "t_values",
        "n_trials",
        "methods",
        "generator",
        "inference",
        "lasso_granger",
        "output_dir",
    }
    _check_keys(doc, allowed, "")
    seed = _as_int(_require(doc, "seed", ""), "seed", 0)
    raw_t = _require(doc, "t_values", "")
    if not isinstance(raw_t, list) or not raw_t:
        raise SchemaError("t_values", "expected a non-empty list")
    t_values = tuple(
        _as_int(v, f"t_values[{i}]", 2) for i, v in enumerate(raw_t)
    )
    n_trials = _as_int(_require(doc, "n_trials", ""), "n_trials", 1)
    raw_methods = _require(doc, "methods", "")
    if not isinstance(raw_methods, list) or not raw_methods:
        raise SchemaError("methods", "expected a non-empty list")
    methods = []
    for i, m in enumerate(raw_methods):
        if m not in METHOD_CHOICES:
            raise SchemaError(
                f"methods[{i}]", f"must be one of {list(METHOD_CHOICES)}"
            )
        if m in methods:
            raise SchemaError(f"methods[{i}]", f"duplicate method {m!r}")
        methods.append(m)
    generator = _parse_generator(
        _as_object(doc.get("generator", {}), "generator"), "generator", seed
    )
    inference = _parse_inference(
        _as_object(doc.get("inference", {}), "inference"), "inference"
    )
    lasso = _parse_lasso(
        _as_object(doc.get("lasso_granger", {}), "lasso_granger"),
        "lasso_granger",
    )
    output_dir = doc.get("output_dir", ".")
    if not isinstance(output_dir, str) or not output_dir:
        raise SchemaError("output_dir", "expected a non-empty string")
    return ExperimentConfig(
        seed=seed,
        t_values=t_values,
        n_trials=n_trials,
        methods=tuple(methods),
        generator=generator,
        inference=inference,
        lasso=lasso,
        output_dir=os.path.normpath(os.path.join(base_dir, output_dir)),
        raw_config=doc,
    )


def load_experiment_config(path) -> ExperimentConfig:
    if not os.path.isfile(path):
        raise MissingFileError(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("<root>", f"invalid JSON: {exc}") from exc
    return parse_experiment_config(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def _override_seed(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return config
    return replace(
        config, seed=seed, generator=replace(config.generator, seed=seed)
    )


# ---------------------------------------------------------------------------
# Flag parsing helpers
# ---------------------------------------------------------------------------


def _flag_components(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected an int count or float fraction, got {text!r}"
        ) from None


def _flag_lag(text: str):
    try:
        return int(text)
    except ValueError:
        return text  # validated by LskgcConfig


def _flag_bandwidth(text: str):
    if text == MEDIAN_HEURISTIC:
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a number or {MEDIAN_HEURISTIC!r}, got {text!r}"
        ) from None


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _resolve_jobs(value) -> int:
    if value is None:
        return os.cpu_count() or 1
    if value < 1:
        raise SchemaError("--jobs", "must be >= 1")
    return value


def cmd_generate(args) -> int:
    config = _override_seed(load_experiment_config(args.config), args.seed)
    out_dir = args.output or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    layout = suite_layout(list(config.t_values), config.n_trials)
    jobs = _resolve_jobs(args.jobs)

    def make(item):
        t_len, k, counter = item
        return generate_trial(config.generator, t_len, counter, trial_index=k)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(make, layout))
    else:
        trials = [make(item) for item in layout]
    for (t_len, k, _), trial in zip(layout, trials):
        base = os.path.join(out_dir, f"trial_{t_len}_{k}")
        panel_path = base + ".csv"
        truth_path = base + ".truth.json"
        save_panel(trial.panel, panel_path)
        save_ground_truth(trial.graph, truth_path)
        print(panel_path)
        print(truth_path)
    return 0


def _build_lskgc_config(args) -> LskgcConfig:
    kernel = KernelConfig(
        kind=args.kernel,
        bandwidth_sigma=args.bandwidth,
        degree=args.degree,
        offset=args.offset,
    )
    regression = RegressionSpec(
        method=args.regression,
        lambda1=args.lambda1 if args.regression in ("lasso", "elastic_net") else 0.0,
        lambda2=args.lambda2 if args.regression in ("ridge", "elastic_net") else 0.0,
        tol=args.tol,
        max_iter=args.max_iter,
    )
    return LskgcConfig(
        kernel=kernel,
        components=args.P,
        lag=args.L,
        max_lag=args.max_lag,
        regression=regression,
        variance_floor=args.variance_floor,
        eigensolver=args.eigensolver,
    )


def cmd_infer(args) -> int:
    panel = load_panel(args.panel)
    method = args.method.replace("-", "_")
    diagnostics_doc = None
    if method == "lasso_granger":
        if not isinstance(args.L, int):
            raise SchemaError("--L", "lasso_granger needs an integer lag")
        gci = lasso_granger_infer(
            panel,
            lag=args.L,
            lambda1=args.lambda1,
            tol=args.tol,
            max_iter=args.max_iter,
        )
        diagnostics_doc = {
            "method": "lasso_granger",
            "lag": args.L,
            "lambda1": args.lambda1,
        }
    else:
        config = _build_lskgc_config(args)
        if method == "lsgc":
            config = replace(config, kernel=KernelConfig(kind="linear"))
        gci, diag = lskgc_infer_with_diagnostics(panel, config)
        diagnostics_doc = {"method": method, **diag.to_dict()}
    if args.output:
        save_gci(gci, args.output)
    else:
        sys.stdout.write(format_gci(gci))
    if args.diagnostics:
        with open(args.diagnostics, "w", encoding="utf-8") as fh:
            json.dump(diagnostics_doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_eval(args) -> int:
    from .core import load_gci  # local import keeps the hot path lean

    gci = load_gci(args.gci)
    truth = load_ground_truth(args.truth)
    value = auc(gci, truth)
    if args.roc:
        points = roc_points(gci, truth)
        with open(args.roc, "w", newline="", encoding="utf-8") as fh:
            fh.write("fpr,tpr\n")
            for fpr, tpr in points:
                fh.write(f"{format(fpr, '.17g')},{format(tpr, '.17g')}\n")
    print(f"{value:.6f}")
    return 0


def cmd_bench(args) -> int:
    config = _override_seed(load_experiment_config(args.config), args.seed)
    out_dir = args.output or config.output_dir
    os.makedirs(out_dir, exist_ok=True)

    def log(message: str):
        print(message, file=sys.stderr)

    report = run_benchmark(
        config,
        jobs=_resolve_jobs(args.jobs),
        log=log if args.verbose else None,
    )
    write_report_json(report, os.path.join(out_dir, "report.json"))
    write_per_trial_csv(report, os.path.join(out_dir, "per_trial.csv"))
    if args.plot:
        save_boxplot(report, os.path.join(out_dir, "benchmark_boxplot.svg"))
    for s in report.summaries:
        if s.summary is None:
            print(
                f"{s.method:>14} T={s.n_samples:<5} n={s.n_ok:<3} "
                f"failed={s.n_failed} (no successful trials)"
            )
            continue
        print(
            f"{s.method:>14} T={s.n_samples:<5} n={s.n_ok:<3} "
            f"median={s.summary.median:.4f} "
            f"ci95=[{s.summary.ci_low:.4f},{s.summary.ci_high:.4f}] "
            f"iqr=[{s.summary.q1:.4f},{s.summary.q3:.4f}] "
            f"failed={s.n_failed}"
        )
    return 0 if report.trial_rows else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_infer_flags(sub: argparse.ArgumentParser):
    sub.add_argument("panel", help="panel CSV to analyse")
    sub.add_argument(
        "--method",
        required=True,
        choices=METHOD_FLAG_CHOICES,
        help="inference method",
    )
    sub.add_argument(
        "--P",
        type=_flag_components,
        default=0.95,
        help="component count (int) or explained-variance fraction (float)",
    )
    sub.add_argument(
        "--L",
        type=_flag_lag,
        default=2,
        help="lag order (int) or auto_bic / auto_aic",
    )
    sub.add_argument("--max-lag", type=int, default=5, dest="max_lag")
    sub.add_argument(
        "--kernel", choices=("rbf", "linear", "polynomial"), default="rbf"
    )
    sub.add_argument(
        "--bandwidth",
        type=_flag_bandwidth,
        default=MEDIAN_HEURISTIC,
        help=f"RBF bandwidth sigma or {MEDIAN_HEURISTIC!r}",
    )
    sub.add_argument("--degree", type=int, default=2)
    sub.add_argument("--offset", type=float, default=1.0)
    sub.add_argument(
        "--regression",
        choices=("ols", "ridge", "lasso", "elastic_net"),
        default="ridge",
    )
    sub.add_argument("--lambda1", type=float, default=0.05)
    sub.add_argument("--lambda2", type=float, default=1e-3)
    sub.add_argument("--tol", type=float, default=1e-8)
    sub.add_argument("--max-iter", type=int, default=10000, dest="max_iter")
    sub.add_argument(
        "--variance-floor", type=float, default=1e-12, dest="variance_floor"
    )
    sub.add_argument(
        "--eigensolver", choices=("auto", "jacobi", "lapack"), default="auto"
    )
    sub.add_argument("--output", help="write the score matrix here (default stdout)")
    sub.add_argument("--diagnostics", help="write a diagnostics JSON here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgranger",
        description=(
            "Directed network inference from multivariate time series via "
            "kernelized Granger causality"
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser(
        "generate", help="write synthetic panels and ground-truth graphs"
    )
    gen.add_argument("config", help="experiment config JSON")
    gen.add_argument(
        "--output", help="output directory (default: config output_dir)"
    )
    gen.add_argument("--seed", type=int, help="override the config seed")
    gen.add_argument(
        "--jobs", type=int, help="worker threads (default: all cores)"
    )
    gen.set_defaults(func=cmd_generate)

    infer = subparsers.add_parser(
        "infer", help="infer a causality matrix from a panel CSV"
    )
    _add_infer_flags(infer)
    infer.set_defaults(func=cmd_infer)

    evl = subparsers.add_parser(
        "eval", help="score an inferred matrix against ground truth"
    )
    evl.add_argument("gci", help="inferred score matrix CSV")
    evl.add_argument("truth", help="ground-truth JSON")
    evl.add_argument("--roc", help="write ROC points CSV here")
    evl.set_defaults(func=cmd_eval)

    bench = subparsers.add_parser(
        "bench", help="run a benchmark experiment end to end"
    )
    bench.add_argument("config", help="experiment config JSON")
    bench.add_argument(
        "--output", help="output directory (default: config output_dir)"
    )
    bench.add_argument("--seed", type=int, help="override the config seed")
    bench.add_argument(
        "--jobs", type=int, help="worker threads (default: all cores)"
    )
    bench.add_argument(
        "--plot", action="store_true", help="also write an SVG boxplot"
    )
    bench.add_argument(
        "--verbose", action="store_true", help="progress lines on stderr"
    )
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KgrangerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
