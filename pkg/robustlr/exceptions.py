"""Special exceptions raised by robustlr."""

from typing import Any

from kerno.typing import DictStr


class RobustTestError(Exception):
    """Base class. ``diagnostics`` holds solver state for the run manifest."""

    def __init__(self, message: str, **diagnostics: Any) -> None:  # noqa
        super().__init__(message)
        self.diagnostics = diagnostics

    def to_record(self) -> DictStr:
        """Return a JSON-serializable description of the failure."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):  # numpy scalars and arrays
        return value.tolist()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return repr(value)


class Infeasible(RobustTestError):
    """The requested robustness parameters make the hypotheses overlap."""


class NoConvergence(RobustTestError):
    """An iterative solver stopped without meeting its tolerance."""


class NonConvergence(NoConvergence):
    """Quadrature refinement stalled above the requested tolerance."""


class InvalidRegion(RobustTestError):
    """A region could not be resolved to a finite union of intervals."""


class SupportMismatch(RobustTestError):
    """A density has mass where the reference density vanishes."""


class NotSymmetric(RobustTestError):
    """The symmetric solver requires f0(y) == f1(-y)."""


class OutOfRange(RobustTestError):
    """An argument lies outside the range a limit curve can reach."""


class NoRoot(RobustTestError):
    """A bracketing search found no sign change."""


class MGFInfinite(RobustTestError):
    """The moment generating function diverged."""


class TruncationExceeded(RobustTestError):
    """Too much probability mass was still undecided at the step cap."""


class UnknownFamily(RobustTestError):
    """No nominal distribution is registered under this family name."""


class UnknownExperiment(RobustTestError):
    """No experiment is registered under this identifier."""


class InvalidConfiguration(RobustTestError):
    """The configuration file did not validate. ``errors`` lists every problem."""

    def __init__(self, errors: list) -> None:  # noqa
        super().__init__("; ".join(errors), errors=errors)
        self.errors = errors


class Degenerate(UserWarning):
    """A contamination ratio of zero leaves the likelihood ratio unclipped."""


class NonMonotoneLikelihoodRatio(UserWarning):
    """The clipped construction was applied to a non-monotone likelihood ratio."""
