"""Core data types and file formats.

Three value types flow through the package:

* :class:`TimeSeriesPanel` -- a ``(T, N)`` matrix of observations, one column
  per node, with unique column labels.
* :class:`GciMatrix` -- an ``(N, N)`` matrix of directed causality scores,
  ``values[i, j]`` scoring the influence of node ``i`` on node ``j``, zero on
  the diagonal.
* :class:`GroundTruthGraph` -- the directed lagged graph a synthetic panel
  was generated from.

Panels and score matrices travel as CSV with numbers written to 17
significant digits (lossless for float64); ground truth travels as JSON.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    MissingFileError,
    NonFiniteError,
    ParseError,
    SchemaError,
    ShapeError,
    ZeroVarianceError,
)

_FLOAT_FMT = ".17g"

EDGE_KINDS = ("linear", "nonlinear")


def _fmt(value: float) -> str:
    return format(float(value), _FLOAT_FMT)


def _check_labels(labels: Sequence[str], expected: int) -> tuple[str, ...]:
    labels = tuple(str(lab) for lab in labels)
    if len(labels) != expected:
        raise ShapeError(f"expected {expected} labels, got {len(labels)}")
    for lab in labels:
        if not lab:
            raise ShapeError("empty column label")
    if len(set(labels)) != len(labels):
        dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
        raise ShapeError(f"duplicate column labels: {dupes}")
    return labels


@dataclass(frozen=True)
class TimeSeriesPanel:
    """A ``(T, N)`` observation matrix with one labelled column per node.

    Requires ``T >= 2`` rows, ``N >= 2`` columns and all entries finite.
    """

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise ShapeError(f"panel must be 2-D, got {values.ndim}-D")
        t, n = values.shape
        if n < 2:
            raise ShapeError(f"panel needs at least 2 columns, got {n}")
        if t < 2:
            raise ShapeError(f"panel needs at least 2 rows, got {t}")
        if not np.isfinite(values).all():
            raise NonFiniteError("panel values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", _check_labels(self.labels, n))

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GciMatrix:
    """Directed causality scores; ``values[i, j]`` is influence of i on j."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ShapeError(f"score matrix must be square, got {values.shape}")
        if not np.isfinite(values).all():
            raise NonFiniteError("score matrix")
        if np.any(np.diag(values) != 0.0):
            raise ShapeError("score matrix diagonal must be exactly zero")
        object.__setattr__(self, "values", values)
        object.__setattr__(
            self, "labels", _check_labels(self.labels, values.shape[0])
        )

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Edge:
    """One directed lagged coupling ``src -> dst`` at ``lag >= 1``."""

    src: int
    dst: int
    lag: int
    weight: float
    kind: str = "linear"

    def __post_init__(self):
        if self.src == self.dst:
            raise ShapeError("self-loop edges are not allowed")
        if self.lag < 1:
            raise ShapeError(f"edge lag must be >= 1, got {self.lag}")
        if not math.isfinite(self.weight):
            raise NonFiniteError("edge weight")
        if self.kind not in EDGE_KINDS:
            raise ShapeError(f"unknown edge kind {self.kind!r}")


@dataclass(frozen=True)
class GroundTruthGraph:
    """The generating structure of a synthetic panel."""

    n_nodes: int
    edges: tuple[Edge, ...]
    autocoeffs: tuple[float, ...]
    noise_sigma: float
    nonlinearity: str = "gauss_damped"

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ShapeError(f"graph needs at least 2 nodes, got {self.n_nodes}")
        edges = tuple(self.edges)
        seen = set()
        for e in edges:
            if not (0 <= e.src < self.n_nodes and 0 <= e.dst < self.n_nodes):
                raise ShapeError(f"edge endpoint out of range: {e.src}->{e.dst}")
            key = (e.src, e.dst, e.lag)
            if key in seen:
                raise ShapeError(f"duplicate edge {key}")
            seen.add(key)
        autocoeffs = tuple(float(a) for a in self.autocoeffs)
        if len(autocoeffs) != self.n_nodes:
            raise ShapeError(
                f"need {self.n_nodes} autoregressive coefficients, "
                f"got {len(autocoeffs)}"
            )
        if not all(math.isfinite(a) for a in autocoeffs):
            raise NonFiniteError("autoregressive coefficients")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0.0):
            raise ShapeError("noise_sigma must be finite and >= 0")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "autocoeffs", autocoeffs)

    @property
    def max_lag(self) -> int:
        return max((e.lag for e in self.edges), default=1)

    def adjacency(self) -> np.ndarray:
        """Boolean ``(N, N)`` matrix: True where an edge exists at any lag."""
        adj = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        for e in self.edges:
            adj[e.src, e.dst] = True
        return adj


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def column_stats(panel: TimeSeriesPanel) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and sample standard deviation (ddof=1)."""
    means = panel.values.mean(axis=0)
    sds = panel.values.std(axis=0, ddof=1)
    return means, sds


def normalize(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Return a panel whose columns have zero mean and unit sample variance.

    Raises
    ------
    ZeroVarianceError
        If any column is constant.
    """
    means, sds = column_stats(panel)
    for j, sd in enumerate(sds):
        if sd == 0.0:
            raise ZeroVarianceError(panel.labels[j])
    return TimeSeriesPanel((panel.values - means) / sds, panel.labels)


# ---------------------------------------------------------------------------
# Panel CSV
# ---------------------------------------------------------------------------


def _open_for_read(path):
    if not os.path.isfile(path):
        raise MissingFileError(path)
    return open(path, "r", newline="", encoding="utf-8")


def _parse_cell(path, line_no: int, col_no: int, cell: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(
            str(path), line_no, col_no, f"cannot parse {cell!r} as a number"
        ) from None
    if not math.isfinite(value):
        raise NonFiniteError(f"{path}:{line_no}:{col_no}")
    return value


def load_panel(path) -> TimeSeriesPanel:
    """Read a panel from CSV: one header row of labels, then numeric rows."""
    with _open_for_read(path) as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    rows = [r for r in rows if r]  # tolerate a trailing blank line
    if not rows:
        raise ShapeError(f"{path}: empty file")
    labels = [c.strip() for c in rows[0]]
    n = len(labels)
    data = np.empty((len(rows) - 1, n), dtype=np.float64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise ShapeError(
                f"{path}:{i}: expected {n} cells, got {len(row)}"
            )
        for j, cell in enumerate(row):
            data[i - 2, j] = _parse_cell(path, i, j + 1, cell)
    return TimeSeriesPanel(data, labels)


def save_panel(panel: TimeSeriesPanel, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(panel.labels)
        for row in panel.values:
            writer.writerow([_fmt(v) for v in row])


# ---------------------------------------------------------------------------
# Score-matrix CSV
# ---------------------------------------------------------------------------


def save_gci(gci: GciMatrix, path) -> None:
    """Write a score matrix as CSV with labelled rows and columns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_gci(gci))


def format_gci(gci: GciMatrix) -> str:
    lines = ["," + ",".join(_csv_quote(lab) for lab in gci.labels)]
    for lab, row in zip(gci.labels, gci.values):
        lines.append(
            _csv_quote(lab) + "," + ",".join(_fmt(v) for v in row)
        )
    return "\n".join(lines) + "\n"


def _csv_quote(cell: str) -> str:
    if any(ch in cell for ch in ',"\n\r'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def load_gci(path) -> GciMatrix:
    with _open_for_read(path) as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ShapeError(f"{path}: empty file")
    header = rows[0]
    if header[0].strip() != "":
        raise ShapeError(f"{path}: first header cell must be empty")
    labels = [c.strip() for c in header[1:]]
    n = len(labels)
    if len(rows) - 1 != n:
        raise ShapeError(
            f"{path}: expected {n} data rows to match header, got {len(rows) - 1}"
        )
    values = np.empty((n, n), dtype=np.float64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n + 1:
            raise ShapeError(f"{path}:{i}: expected {n + 1} cells, got {len(row)}")
        if row[0].strip() != labels[i - 2]:
            raise ShapeError(
                f"{path}:{i}: row label {row[0]!r} does not match column "
                f"label {labels[i - 2]!r}"
            )
        for j, cell in enumerate(row[1:]):
            values[i - 2, j] = _parse_cell(path, i, j + 2, cell)
    return GciMatrix(values, labels)


# ---------------------------------------------------------------------------
# Ground-truth JSON
# ---------------------------------------------------------------------------


def _schema_type(field_path: str, value, kinds, detail: str):
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise SchemaError(field_path, detail)
    return value


def _schema_int(field_path: str, value) -> int:
    return int(_schema_type(field_path, value, int, "expected an integer"))


def _schema_float(field_path: str, value) -> float:
    out = float(_schema_type(field_path, value, (int, float), "expected a number"))
    if not math.isfinite(out):
        raise SchemaError(field_path, "must be finite")
    return out


def graph_to_dict(graph: GroundTruthGraph) -> dict:
    return {
        "n_nodes": graph.n_nodes,
        "noise_sigma": graph.noise_sigma,
        "nonlinearity": graph.nonlinearity,
        "autocoeff": list(graph.autocoeffs),
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "lag": e.lag,
                "weight": e.weight,
                "kind": e.kind,
            }
            for e in graph.edges
        ],
    }


def graph_from_dict(doc: dict, where: str = "") -> GroundTruthGraph:
    prefix = where + "." if where else ""
    if not isinstance(doc, dict):
        raise SchemaError(where or "<root>", "expected an object")
    allowed = {"n_nodes", "noise_sigma", "nonlinearity", "autocoeff", "edges"}
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"{prefix}{key}", "unknown field")
    for key in ("n_nodes", "noise_sigma", "autocoeff", "edges"):
        if key not in doc:
            raise SchemaError(f"{prefix}{key}", "missing required field")
    n_nodes = _schema_int(f"{prefix}n_nodes", doc["n_nodes"])
    noise_sigma = _schema_float(f"{prefix}noise_sigma", doc["noise_sigma"])
    nonlinearity = doc.get("nonlinearity", "gauss_damped")
    if not isinstance(nonlinearity, str):
        raise SchemaError(f"{prefix}nonlinearity", "expected a string")
    autos = _schema_type(
        f"{prefix}autocoeff", doc["autocoeff"], list, "expected a list"
    )
    autocoeffs = [
        _schema_float(f"{prefix}autocoeff[{i}]", a) for i, a in enumerate(autos)
    ]
    raw_edges = _schema_type(f"{prefix}edges", doc["edges"], list, "expected a list")
    edges = []
    for i, item in enumerate(raw_edges):
        loc = f"{prefix}edges[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(loc, "expected an object")
        for key in item:
            if key not in {"src", "dst", "lag", "weight", "kind"}:
                raise SchemaError(f"{loc}.{key}", "unknown field")
        for key in ("src", "dst", "lag", "weight"):
            if key not in item:
                raise SchemaError(f"{loc}.{key}", "missing required field")
        kind = item.get("kind", "linear")
        if kind not in EDGE_KINDS:
            raise SchemaError(f"{loc}.kind", f"must be one of {list(EDGE_KINDS)}")
        edges.append(
            Edge(
                src=_schema_int(f"{loc}.src", item["src"]),
                dst=_schema_int(f"{loc}.dst", item["dst"]),
                lag=_schema_int(f"{loc}.lag", item["lag"]),
                weight=_schema_float(f"{loc}.weight", item["weight"]),
                kind=kind,
            )
        )
    try:
        return GroundTruthGraph(
            n_nodes=n_nodes,
            edges=tuple(edges),
            autocoeffs=tuple(autocoeffs),
            noise_sigma=noise_sigma,
            nonlinearity=nonlinearity,
        )
    except (ShapeError, NonFiniteError) as exc:
        raise SchemaError(where or "<root>", str(exc)) from exc


def load_ground_truth(path) -> GroundTruthGraph:
    if not os.path.isfile(path):
        raise MissingFileError(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("<root>", f"invalid JSON: {exc}") from exc
    return graph_from_dict(doc)


def save_ground_truth(graph: GroundTruthGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(graph), fh, indent=2, sort_keys=True)
        fh.write("\n")
