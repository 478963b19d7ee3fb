"""Directed network inference from multivariate time series.

The package infers which nodes drive which by comparing the one-step
prediction error of a full model against models refitted with one candidate
source removed, measured in a kernel feature space (``lskgc_infer``), in
plain input space (``lsgc_infer``) or by sparse lagged regression
(``lasso_granger_infer``).  A synthetic generator with known ground truth
and an AUC benchmark harness close the loop.
"""

from ._accel import NUMBA_ENABLED
from .core import (
    Edge,
    GciMatrix,
    GroundTruthGraph,
    TimeSeriesPanel,
    load_gci,
    load_ground_truth,
    load_panel,
    normalize,
    save_gci,
    save_ground_truth,
    save_panel,
)
from .errors import KgrangerError
from .evaluate import (
    AucSummary,
    BenchmarkReport,
    auc,
    roc_points,
    run_benchmark,
    summarize,
)
from .granger import (
    FeatureVarModel,
    InferenceDiagnostics,
    LskgcConfig,
    lasso_granger_infer,
    lsgc_infer,
    lskgc_infer,
    lskgc_infer_with_diagnostics,
    predict_panel,
    residual_variances,
)
from .kernels import (
    KernelConfig,
    center_gram,
    gram_matrix,
    kernel_eval,
    median_heuristic_bandwidth,
)
from .kpca import (
    KernelModel,
    PreImageMap,
    fit_kpca,
    fit_preimage,
    project,
    reconstruct,
)
from .regression import (
    LaggedDesign,
    RegressionSpec,
    build_lagged_design,
    fit_linear,
    predict,
    select_order,
)
from .synthgen import (
    GeneratorConfig,
    benchmark_suite,
    gauss_damped,
    quadratic_damped,
    random_topology,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "Edge",
    "GciMatrix",
    "GroundTruthGraph",
    "TimeSeriesPanel",
    "load_gci",
    "load_ground_truth",
    "load_panel",
    "normalize",
    "save_gci",
    "save_ground_truth",
    "save_panel",
    "KgrangerError",
    "AucSummary",
    "BenchmarkReport",
    "auc",
    "roc_points",
    "run_benchmark",
    "summarize",
    "FeatureVarModel",
    "InferenceDiagnostics",
    "LskgcConfig",
    "lasso_granger_infer",
    "lsgc_infer",
    "lskgc_infer",
    "lskgc_infer_with_diagnostics",
    "predict_panel",
    "residual_variances",
    "KernelConfig",
    "center_gram",
    "gram_matrix",
    "kernel_eval",
    "median_heuristic_bandwidth",
    "KernelModel",
    "PreImageMap",
    "fit_kpca",
    "fit_preimage",
    "project",
    "reconstruct",
    "LaggedDesign",
    "RegressionSpec",
    "build_lagged_design",
    "fit_linear",
    "predict",
    "select_order",
    "GeneratorConfig",
    "benchmark_suite",
    "gauss_damped",
    "quadratic_damped",
    "random_topology",
    "simulate",
    "__version__",
]
