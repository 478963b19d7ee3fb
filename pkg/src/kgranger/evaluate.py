"""Scoring inferred networks against ground truth, and the benchmark loop.

Edge-detection quality is measured as ranking quality: every off-diagonal
(i, j) pair is a binary-classification item (edge present at any lag or
not) scored by the inferred matrix.  AUC is computed by the rank-statistic
form of the Mann-Whitney U with midranks for ties,

    AUC = (sum of positive ranks - n_pos (n_pos + 1) / 2) / (n_pos * n_neg)

which equals the tie-aware concordance probability
P(score_pos > score_neg) + P(tie)/2.  ROC points sweep the decision
threshold over the distinct score values (ties produce diagonal segments),
so the trapezoid area under the curve equals the midrank AUC.

``run_benchmark`` ties the package together: generate a synthetic trial,
run each configured inference method, score it, and aggregate per
(method, series length) into quartile/CI summaries.  Trial failures are
recorded with their reason, never silently dropped.  Everything is
deterministic given the master seed, including the bootstrap confidence
intervals and row ordering in serialized output.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import GciMatrix, GroundTruthGraph
from .errors import DegenerateTruthError, DimensionMismatchError, KgrangerError
from .granger import lasso_granger_infer, lsgc_infer, lskgc_infer
from .synthgen import generate_trial, mix64, suite_layout

_FLOAT_FMT = ".17g"
_BOOTSTRAP_STREAM = 1 << 34

DEFAULT_BOOTSTRAP_SAMPLES = 10000

METHOD_NAMES = ("lskgc", "lsgc", "lasso_granger")


def _offdiag_items(
    gci: GciMatrix, truth: GroundTruthGraph
) -> tuple[np.ndarray, np.ndarray]:
    if gci.n_nodes != truth.n_nodes:
        raise DimensionMismatchError(
            f"score matrix has {gci.n_nodes} nodes, truth has {truth.n_nodes}"
        )
    n = gci.n_nodes
    mask = ~np.eye(n, dtype=bool)
    scores = gci.values[mask]
    positives = truth.adjacency()[mask]
    n_pos = int(positives.sum())
    if n_pos == 0 or n_pos == positives.size:
        raise DegenerateTruthError(
            f"ground truth has {n_pos} positive of {positives.size} "
            f"off-diagonal pairs; AUC is undefined"
        )
    return scores, positives


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties averaged (always exact half-integers)."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i: j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc(gci: GciMatrix, truth: GroundTruthGraph) -> float:
    """Area under the ROC curve for detecting true edges, ties at half credit.

    Raises
    ------
    DegenerateTruthError
        If the truth has no positive or no negative off-diagonal pair.
    """
    scores, positives = _offdiag_items(gci, truth)
    ranks = _midranks(scores)
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    rank_sum = float(ranks[positives].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_points(gci: GciMatrix, truth: GroundTruthGraph) -> np.ndarray:
    """ROC polyline vertices as an ``(K, 2)`` array of (FPR, TPR).

    Starts at (0, 0) and adds one vertex per distinct score value in
    descending order (all items sharing a value enter together, so ties
    trace diagonal segments); the final vertex is always (1, 1).
    """
    scores, positives = _offdiag_items(gci, truth)
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    order = np.argsort(-scores, kind="stable")
    points = [(0.0, 0.0)]
    tp = fp = 0
    idx = 0
    while idx < scores.size:
        value = scores[order[idx]]
        while idx < scores.size and scores[order[idx]] == value:
            if positives[order[idx]]:
                tp += 1
            else:
                fp += 1
            idx += 1
        points.append((fp / n_neg, tp / n_pos))
    return np.asarray(points, dtype=np.float64)


@dataclass(frozen=True)
class AucSummary:
    """Five-number-ish summary of a batch of AUC values.

    ``ci_low``/``ci_high`` bound the median via a seeded bootstrap;
    ``outliers`` are values beyond 1.5 IQR from the quartiles.
    """

    n: int
    median: float
    q1: float
    q3: float
    ci_low: float
    ci_high: float
    outliers: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "outliers": list(self.outliers),
        }


def summarize(
    values,
    seed: int = 0,
    n_bootstrap: int = DEFAULT_BOOTSTRAP_SAMPLES,
) -> AucSummary:
    """Quartiles (linear interpolation), IQR outliers, bootstrap median CI.

    The 95% CI is the [2.5, 97.5] percentile range of ``n_bootstrap``
    resampled medians drawn with a generator seeded by ``seed``, so repeated
    calls agree bit for bit.
    """
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatchError("summarize needs a non-empty 1-D batch")
    if not np.isfinite(arr).all():
        raise DimensionMismatchError("summarize needs finite values")
    median = float(np.median(arr))
    q1, q3 = (float(q) for q in np.quantile(arr, [0.25, 0.75]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    outliers = tuple(
        float(v) for v in np.sort(arr[(arr < lo_fence) | (arr > hi_fence)])
    )
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(n_bootstrap, arr.size))
    medians = np.median(arr[idx], axis=1)
    ci_low, ci_high = (float(q) for q in np.quantile(medians, [0.025, 0.975]))
    return AucSummary(
        n=arr.size,
        median=median,
        q1=q1,
        q3=q3,
        ci_low=ci_low,
        ci_high=ci_high,
        outliers=outliers,
    )


# ---------------------------------------------------------------------------
# Benchmark loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    method: str
    n_samples: int
    trial_index: int
    auc: float


@dataclass(frozen=True)
class TrialFailure:
    method: str
    n_samples: int
    trial_index: int
    reason: str


@dataclass(frozen=True)
class MethodSummary:
    method: str
    n_samples: int
    n_ok: int
    n_failed: int
    summary: AucSummary | None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_samples": self.n_samples,
            "n_ok": self.n_ok,
            "n_failed": self.n_failed,
            "summary": None if self.summary is None else self.summary.to_dict(),
        }


@dataclass(frozen=True)
class BenchmarkReport:
    trial_rows: tuple[TrialResult, ...]
    failures: tuple[TrialFailure, ...]
    summaries: tuple[MethodSummary, ...]
    config_echo: dict


def _run_method(method: str, panel, experiment) -> GciMatrix:
    if method == "lskgc":
        return lskgc_infer(panel, experiment.inference)
    if method == "lsgc":
        return lsgc_infer(panel, experiment.inference)
    if method == "lasso_granger":
        lasso = experiment.lasso
        return lasso_granger_infer(
            panel,
            lag=lasso.lag,
            lambda1=lasso.lambda1,
            tol=lasso.tol,
            max_iter=lasso.max_iter,
        )
    raise ValueError(f"unknown method {method!r}")


def run_benchmark(experiment, jobs: int = 1, log=None) -> BenchmarkReport:
    """Run the full generate/infer/score loop described by an experiment.

    ``experiment`` is an :class:`kgranger.cli.ExperimentConfig` (or anything
    with the same attributes).  ``jobs`` > 1 distributes trials over a
    thread pool; results are merged in trial order, so the report does not
    depend on scheduling.  ``log``, when given, receives one progress line
    per finished trial.
    """
    layout = suite_layout(list(experiment.t_values), experiment.n_trials)
    methods = list(experiment.methods)

    def run_one(item):
        t_len, k, counter = item
        rows = []
        try:
            trial = generate_trial(
                experiment.generator, t_len, counter, trial_index=k
            )
        except KgrangerError as exc:
            reason = f"generate: {type(exc).__name__}: {exc}"
            for method in methods:
                rows.append((method, t_len, k, None, reason))
            return rows
        for method in methods:
            try:
                value = auc(_run_method(method, trial.panel, experiment), trial.graph)
                rows.append((method, t_len, k, value, None))
            except KgrangerError as exc:
                rows.append(
                    (method, t_len, k, None, f"{type(exc).__name__}: {exc}")
                )
        return rows

    outcomes = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for item, rows in zip(layout, pool.map(run_one, layout)):
                outcomes.append(rows)
                if log is not None:
                    log(f"trial T={item[0]} k={item[1]} done")
    else:
        for item in layout:
            outcomes.append(run_one(item))
            if log is not None:
                log(f"trial T={item[0]} k={item[1]} done")

    trial_rows = []
    failures = []
    for per_trial in outcomes:
        for method, t_len, k, value, reason in per_trial:
            if value is None:
                failures.append(TrialFailure(method, t_len, k, reason))
            else:
                trial_rows.append(TrialResult(method, t_len, k, float(value)))

    summaries = []
    summary_index = 0
    for method in methods:
        for t_len in experiment.t_values:
            values = [
                r.auc
                for r in trial_rows
                if r.method == method and r.n_samples == t_len
            ]
            n_failed = sum(
                1
                for f in failures
                if f.method == method and f.n_samples == t_len
            )
            boot_seed = mix64(experiment.seed, _BOOTSTRAP_STREAM + summary_index)
            summary_index += 1
            summaries.append(
                MethodSummary(
                    method=method,
                    n_samples=int(t_len),
                    n_ok=len(values),
                    n_failed=n_failed,
                    summary=summarize(values, seed=boot_seed) if values else None,
                )
            )
    return BenchmarkReport(
        trial_rows=tuple(trial_rows),
        failures=tuple(failures),
        summaries=tuple(summaries),
        config_echo=dict(experiment.raw_config),
    )


def report_to_dict(report: BenchmarkReport) -> dict:
    return {
        "config": report.config_echo,
        "summaries": [s.to_dict() for s in report.summaries],
        "trials": [
            {
                "method": r.method,
                "n_samples": r.n_samples,
                "trial": r.trial_index,
                "auc": r.auc,
            }
            for r in report.trial_rows
        ],
        "failures": [
            {
                "method": f.method,
                "n_samples": f.n_samples,
                "trial": f.trial_index,
                "reason": f.reason,
            }
            for f in report.failures
        ],
    }


def write_report_json(report: BenchmarkReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_per_trial_csv(report: BenchmarkReport, path) -> None:
    """One row per successful trial: ``method,n_samples,trial,auc``.

    Rows appear in run order -- series length, then trial index, then method
    -- and AUC values carry 17 significant digits, so repeated runs of the
    same experiment produce byte-identical files.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n_samples", "trial", "auc"])
        for r in report.trial_rows:
            writer.writerow(
                [r.method, r.n_samples, r.trial_index, format(r.auc, _FLOAT_FMT)]
            )
