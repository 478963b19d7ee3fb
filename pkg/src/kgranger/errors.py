"""Exception hierarchy shared by every module in the package.

All errors raised on purpose derive from :class:`KgrangerError` so callers
(and the CLI) can distinguish anticipated failures from genuine bugs.  Each
class carries an ``exit_code`` used by the command line front end: ``2`` for
invalid input (files, schemas, shapes), ``1`` for numerical/runtime failures.
"""

from __future__ import annotations


class KgrangerError(Exception):
    """Base class for all anticipated failures."""

    exit_code = 1


# ---------------------------------------------------------------------------
# Input / validation errors (CLI exit code 2)
# ---------------------------------------------------------------------------


class MissingFileError(KgrangerError):
    exit_code = 2

    def __init__(self, path: str):
        self.path = str(path)
        super().__init__(f"file not found: {self.path}")


class ParseError(KgrangerError):
    """A cell in a CSV file could not be parsed as a number.

    ``line`` and ``column`` are 1-based (line counts include the header).
    """

    exit_code = 2

    def __init__(self, path: str, line: int, column: int, detail: str):
        self.path = str(path)
        self.line = line
        self.column = column
        super().__init__(f"{self.path}:{line}:{column}: {detail}")


class ShapeError(KgrangerError):
    exit_code = 2


class NonFiniteError(KgrangerError):
    """A NaN or infinity was found where finite data is required."""

    exit_code = 2

    def __init__(self, where: str):
        super().__init__(f"non-finite value in {where}")


class SchemaError(KgrangerError):
    """A config/JSON document violated the expected schema.

    ``field`` is the dotted key path of the offending entry, e.g.
    ``"generator.n_nodes"``.
    """

    exit_code = 2

    def __init__(self, field: str, detail: str):
        self.field = field
        super().__init__(f"{field}: {detail}")


class ZeroVarianceError(KgrangerError):
    exit_code = 2

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"column {label!r} has zero variance; cannot normalize")


class TooShortError(KgrangerError):
    """The series is too short for the requested lag order."""

    exit_code = 2

    def __init__(self, n_samples: int, lag: int, detail: str = ""):
        self.n_samples = n_samples
        self.lag = lag
        msg = f"series of length {n_samples} too short for lag {lag}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DimensionMismatchError(KgrangerError):
    exit_code = 2


class InfeasibleError(KgrangerError):
    """The requested topology cannot exist (too many edges for the grid)."""

    exit_code = 2


class DegenerateTruthError(KgrangerError):
    """Ground truth has no positive or no negative off-diagonal pairs."""

    exit_code = 2


class DegenerateDataError(KgrangerError):
    """Data admits no meaningful model (e.g. all pairwise distances zero)."""

    exit_code = 2


# ---------------------------------------------------------------------------
# Numerical / runtime errors (CLI exit code 1)
# ---------------------------------------------------------------------------


class EigenFailureError(KgrangerError):
    """The Jacobi eigensolver did not converge within the sweep cap."""

    def __init__(self, sweeps: int, off_norm: float):
        self.sweeps = sweeps
        self.off_norm = off_norm
        super().__init__(
            f"eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e})"
        )


class NoConvergenceError(KgrangerError):
    """Coordinate descent hit its iteration cap before converging."""

    def __init__(self, iterations: int, max_delta: float):
        self.iterations = iterations
        self.max_delta = max_delta
        super().__init__(
            f"coordinate descent did not converge after {iterations} sweeps "
            f"(last max coefficient change {max_delta:.3e})"
        )


class UnstableError(KgrangerError):
    """The simulated system diverged on every resampling attempt."""


class ReducedModelDegenerateError(KgrangerError):
    """A leave-one-node-out model could not be fitted."""

    def __init__(self, node: int, detail: str):
        self.node = node
        super().__init__(f"leave-out model for node {node} failed: {detail}")


class RankDeficientWarning(UserWarning):
    """Fewer usable kernel components than requested."""
