"""Synthetic ground-truth networks and panel simulation.

Each node follows a noisy first-order autoregression plus lagged couplings
from its parents:

    y[i, t] = a_i * y[i, t-1]
              + sum over edges (src -> i, lag ell):  w * f(y[src, t-ell])
              + eps[i, t],     eps ~ N(0, sigma^2)

``f`` is the identity for linear edges; nonlinear edges use one of two
bounded-slope link functions (:func:`quadratic_damped`,
:func:`gauss_damped`) chosen per graph.  A burn-in prefix is simulated and
discarded so the returned panel starts near the stationary regime.

Determinism: every random draw flows from ``GeneratorConfig.seed`` through a
splitmix-style 64-bit mixer with disjoint stream offsets for topology
sampling and for each simulation attempt.  Trial seeds for benchmark suites
come from the same mixer applied to a running trial counter, which makes
them provably distinct for distinct counters (the mix is a bijection of the
counter for a fixed master seed).

Stability: realizations where any value exceeds ``stability_cap`` in
magnitude are rejected and resimulated with a fresh derived seed, up to 100
attempts.  For all-linear graphs the companion-matrix spectral radius is
checked first; a radius >= 1 means every attempt would diverge, so the
rejection loop is short-circuited into the same failure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._accel import jit_compile
from .core import Edge, GroundTruthGraph, TimeSeriesPanel
from .errors import InfeasibleError, ShapeError, TooShortError, UnstableError

NONLINEARITIES = ("quadratic_damped", "gauss_damped")

MAX_SIM_ATTEMPTS = 100

_MIX_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
_TOPOLOGY_STREAM = 1 << 32
_SIMULATION_STREAM = 1 << 33


def mix64(seed: int, counter: int) -> int:
    """Derive a 64-bit sub-seed; bijective in ``counter`` for fixed seed."""
    return (int(seed) ^ (((counter + 1) * _MIX_GOLDEN) & _MASK64)) & _MASK64


def derive_trial_seed(master_seed: int, trial_counter: int) -> int:
    """Per-trial seed used by :func:`benchmark_suite` (counter starts at 0)."""
    return mix64(master_seed, trial_counter)


def quadratic_damped(x):
    """Signed square with linear continuation: ``x|x|`` capped at slope 1.

    Equals ``x * |x|`` for ``|x| <= 1`` and ``x`` beyond, i.e.
    ``x^2 sign(x) min(1, 1/|x|)``.  Odd, continuous, and bounded by ``|x|``.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.where(np.abs(x) <= 1.0, x * np.abs(x), x)
    return out if out.ndim else float(out)


def gauss_damped(x):
    """Gaussian-notched identity: ``(1 - 4 exp(-x^2/2)) * x``.

    Odd with ``f(0) = 0``; negatively sloped near the origin (slope -3) and
    asymptotically the identity, so it decorrelates strongly from a linear
    response on standardized inputs.
    """
    x = np.asarray(x, dtype=np.float64)
    out = (1.0 - 4.0 * np.exp(-x * x / 2.0)) * x
    return out if out.ndim else float(out)


_NL_CODES = {"quadratic_damped": 1, "gauss_damped": 2}


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for topology sampling and simulation.

    ``n_edges`` directed couplings are drawn uniformly without replacement
    from the ``n_nodes * (n_nodes - 1) * max_lag`` possible (src, dst, lag)
    slots; weights are uniform in ``coupling_range`` with random sign;
    each edge is nonlinear with probability ``nonlinear_fraction``.
    """

    n_nodes: int = 6
    n_edges: int = 6
    max_lag: int = 3
    coupling_range: tuple[float, float] = (0.2, 0.6)
    autocoeff: float = 0.3
    noise_sigma: float = 0.5
    nonlinear_fraction: float = 0.0
    nonlinearity: str = "gauss_damped"
    burn_in: int = 200
    stability_cap: float = 1e4
    seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ShapeError(f"n_nodes must be >= 2, got {self.n_nodes}")
        if self.n_edges < 1:
            raise ShapeError(f"n_edges must be >= 1, got {self.n_edges}")
        if self.max_lag < 1:
            raise ShapeError(f"max_lag must be >= 1, got {self.max_lag}")
        lo, hi = (float(self.coupling_range[0]), float(self.coupling_range[1]))
        if not (0.0 < lo <= hi) or not np.isfinite(hi):
            raise ShapeError(
                f"coupling_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            )
        object.__setattr__(self, "coupling_range", (lo, hi))
        if not (-1.0 < self.autocoeff < 1.0):
            raise ShapeError(
                f"autocoeff must lie in (-1, 1), got {self.autocoeff}"
            )
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma > 0.0):
            raise ShapeError(f"noise_sigma must be > 0, got {self.noise_sigma}")
        if not (0.0 <= self.nonlinear_fraction <= 1.0):
            raise ShapeError(
                f"nonlinear_fraction must lie in [0, 1], "
                f"got {self.nonlinear_fraction}"
            )
        if self.nonlinearity not in NONLINEARITIES:
            raise ShapeError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.burn_in < 0:
            raise ShapeError(f"burn_in must be >= 0, got {self.burn_in}")
        if not (np.isfinite(self.stability_cap) and self.stability_cap > 0.0):
            raise ShapeError(
                f"stability_cap must be > 0, got {self.stability_cap}"
            )
        if self.seed < 0:
            raise ShapeError(f"seed must be >= 0, got {self.seed}")


def random_topology(config: GeneratorConfig) -> GroundTruthGraph:
    """Sample a ground-truth graph from the configured edge distribution.

    The same seed always yields the same graph.  Edges come out sorted by
    (src, dst, lag).

    Raises
    ------
    InfeasibleError
        If ``n_edges`` exceeds the number of available (src, dst, lag) slots.
    """
    n, max_lag = config.n_nodes, config.max_lag
    capacity = n * (n - 1) * max_lag
    if config.n_edges > capacity:
        raise InfeasibleError(
            f"cannot place {config.n_edges} edges: only {capacity} "
            f"(src, dst, lag) slots with n_nodes={n}, max_lag={max_lag}"
        )
    rng = np.random.default_rng(mix64(config.seed, _TOPOLOGY_STREAM))
    slots = rng.choice(capacity, size=config.n_edges, replace=False)
    magnitudes = rng.uniform(*config.coupling_range, size=config.n_edges)
    signs = np.where(rng.random(config.n_edges) < 0.5, -1.0, 1.0)
    nonlin = rng.random(config.n_edges) < config.nonlinear_fraction
    pairs_per_lag = n * (n - 1)
    edges = []
    for slot, mag, sign, is_nl in zip(slots, magnitudes, signs, nonlin):
        lag = int(slot) // pairs_per_lag + 1
        pair = int(slot) % pairs_per_lag
        src = pair // (n - 1)
        rem = pair % (n - 1)
        dst = rem if rem < src else rem + 1
        edges.append(
            Edge(
                src=src,
                dst=dst,
                lag=lag,
                weight=float(sign * mag),
                kind="nonlinear" if is_nl else "linear",
            )
        )
    edges.sort(key=lambda e: (e.src, e.dst, e.lag))
    return GroundTruthGraph(
        n_nodes=n,
        edges=tuple(edges),
        autocoeffs=tuple([config.autocoeff] * n),
        noise_sigma=config.noise_sigma,
        nonlinearity=config.nonlinearity,
    )


def _recurse(auto, src, dst, lag, weight, kind, nl_code, noise, cap):
    """Run the recursion over the noise array; returns (values, stayed_bounded)."""
    total, n = noise.shape
    n_edges = src.shape[0]
    y = np.zeros((total, n))
    for t in range(total):
        for i in range(n):
            v = noise[t, i]
            if t >= 1:
                v += auto[i] * y[t - 1, i]
            y[t, i] = v
        for e in range(n_edges):
            t_src = t - lag[e]
            if t_src >= 0:
                x = y[t_src, src[e]]
                if kind[e] == 0:
                    f = x
                elif nl_code == 1:
                    ax = -x if x < 0.0 else x
                    f = x * ax if ax <= 1.0 else x
                else:
                    f = (1.0 - 4.0 * np.exp(-x * x / 2.0)) * x
                y[t, dst[e]] += weight[e] * f
        for i in range(n):
            v = y[t, i]
            if v > cap or v < -cap or v != v:
                return y, False
    return y, True


_recurse_jit = jit_compile(_recurse)


def companion_spectral_radius(graph: GroundTruthGraph) -> float:
    """Spectral radius of the stacked-lag companion matrix.

    Only meaningful for all-linear dynamics; a radius below 1 guarantees
    stationarity of the noise-driven recursion.
    """
    n = graph.n_nodes
    max_lag = graph.max_lag
    coefs = np.zeros((max_lag, n, n))
    for i, a in enumerate(graph.autocoeffs):
        coefs[0, i, i] = a
    for e in graph.edges:
        coefs[e.lag - 1, e.dst, e.src] += e.weight
    size = n * max_lag
    companion = np.zeros((size, size))
    for ell in range(max_lag):
        companion[:n, ell * n: (ell + 1) * n] = coefs[ell]
    if max_lag > 1:
        companion[n:, :-n] = np.eye(n * (max_lag - 1))
    return float(np.abs(np.linalg.eigvals(companion)).max())


def simulate(
    graph: GroundTruthGraph, n_samples: int, config: GeneratorConfig
) -> TimeSeriesPanel:
    """Simulate a panel of ``n_samples`` rows from a ground-truth graph.

    Burn-in rows are simulated first and discarded.  A realization is
    rejected if any value exceeds ``config.stability_cap`` in magnitude;
    rejection resimulates with the next derived seed, up to 100 attempts.

    Raises
    ------
    TooShortError
        If ``n_samples < max(2, 2 * graph.max_lag)``.
    UnstableError
        If every attempt diverges (an all-linear graph with companion
        spectral radius >= 1 fails immediately, since no realization can
        stay bounded in the long run).
    """
    min_rows = max(2, 2 * graph.max_lag)
    if n_samples < min_rows:
        raise TooShortError(
            n_samples, graph.max_lag, f"need at least {min_rows} samples"
        )
    if all(e.kind == "linear" for e in graph.edges):
        radius = companion_spectral_radius(graph)
        if radius >= 1.0:
            raise UnstableError(
                f"linear dynamics have companion spectral radius "
                f"{radius:.4f} >= 1; every realization diverges"
            )
    auto = np.asarray(graph.autocoeffs, dtype=np.float64)
    n_edges = len(graph.edges)
    src = np.array([e.src for e in graph.edges], dtype=np.int64)
    dst = np.array([e.dst for e in graph.edges], dtype=np.int64)
    lag = np.array([e.lag for e in graph.edges], dtype=np.int64)
    weight = np.array([e.weight for e in graph.edges], dtype=np.float64)
    kind = np.array(
        [0 if e.kind == "linear" else 1 for e in graph.edges], dtype=np.int64
    )
    if n_edges == 0:  # keep arrays 1-D and typed for the compiled kernel
        src = np.zeros(0, dtype=np.int64)
        dst = np.zeros(0, dtype=np.int64)
        lag = np.zeros(0, dtype=np.int64)
        weight = np.zeros(0, dtype=np.float64)
        kind = np.zeros(0, dtype=np.int64)
    nl_code = _NL_CODES[graph.nonlinearity]
    total = config.burn_in + n_samples
    impl = _recurse_jit if _recurse_jit is not None else _recurse
    for attempt in range(MAX_SIM_ATTEMPTS):
        rng = np.random.default_rng(
            mix64(config.seed, _SIMULATION_STREAM + attempt)
        )
        noise = rng.normal(0.0, graph.noise_sigma, size=(total, graph.n_nodes))
        values, bounded = impl(
            auto, src, dst, lag, weight, kind, nl_code, noise,
            float(config.stability_cap),
        )
        if bounded:
            labels = tuple(f"n{i}" for i in range(graph.n_nodes))
            return TimeSeriesPanel(values[config.burn_in:], labels)
    raise UnstableError(
        f"simulation exceeded stability cap {config.stability_cap:g} on all "
        f"{MAX_SIM_ATTEMPTS} attempts"
    )


@dataclass(frozen=True)
class SyntheticTrial:
    """One generated benchmark trial: a panel plus the graph that made it.

    ``trial_index`` counts within a series length (it appears in file names
    and reports); ``seed`` is derived from the suite-wide trial counter.
    """

    n_samples: int
    trial_index: int
    seed: int
    panel: TimeSeriesPanel
    graph: GroundTruthGraph


def generate_trial(
    config: GeneratorConfig,
    n_samples: int,
    trial_counter: int,
    trial_index: int | None = None,
) -> SyntheticTrial:
    """Generate the trial at a given global counter position.

    The counter indexes trials across the whole suite (all series lengths),
    so each trial has a unique derived seed and an independent topology.
    """
    seed = derive_trial_seed(config.seed, trial_counter)
    trial_config = replace(config, seed=seed)
    graph = random_topology(trial_config)
    panel = simulate(graph, n_samples, trial_config)
    return SyntheticTrial(
        n_samples=n_samples,
        trial_index=trial_counter if trial_index is None else trial_index,
        seed=seed,
        panel=panel,
        graph=graph,
    )


def suite_layout(t_values: list[int], n_trials: int) -> list[tuple[int, int, int]]:
    """Enumerate ``(n_samples, trial_index, global_counter)`` for a suite."""
    if n_trials < 1:
        raise ShapeError(f"n_trials must be >= 1, got {n_trials}")
    layout = []
    counter = 0
    for t_len in t_values:
        for k in range(n_trials):
            layout.append((int(t_len), k, counter))
            counter += 1
    return layout


def benchmark_suite(
    config: GeneratorConfig,
    t_values: list[int],
    n_trials: int,
) -> list[SyntheticTrial]:
    """Generate ``n_trials`` independent trials for each series length.

    Trials are ordered by series length (as given) then trial index; the
    suite-wide counter that drives seed derivation runs in the same order
    starting at 0.
    """
    return [
        generate_trial(config, t_len, counter, trial_index=k)
        for t_len, k, counter in suite_layout(t_values, n_trials)
    ]
