"""Strategies for computing least favorable densities (LFDs).

Each strategy solves for the parameters of one robust test and returns an
immutable solution object implementing :class:`BaseSolution`.
"""

from abc import ABCMeta, abstractmethod

from robustlr.model import Array, BranchDensity, NominalModel
from robustlr.lfd.piecewise import PiecewiseLLR


class BaseSolution(metaclass=ABCMeta):
    """Formal interface of a solved robust test."""

    model: NominalModel

    @abstractmethod
    def density(self, hypothesis: int) -> BranchDensity:
        """Return the least favorable density under ``hypothesis``."""
        raise NotImplementedError()

    @abstractmethod
    def robust_llr(self) -> PiecewiseLLR:
        """Return the robust likelihood ratio and its decision rule."""
        raise NotImplementedError()

    def densities(self) -> tuple[BranchDensity, BranchDensity]:
        return self.density(0), self.density(1)

    def delta(self, y: Array) -> Array:
        return self.robust_llr().delta(y)


def lfd_density(solution: BaseSolution, hypothesis: int) -> BranchDensity:
    """Return the least favorable density of ``solution`` under ``hypothesis``."""
    if hypothesis not in (0, 1):
        raise ValueError(f"hypothesis must be 0 or 1, not {hypothesis}")
    return solution.density(hypothesis)


def robust_llr(solution: BaseSolution) -> PiecewiseLLR:
    """Return the robust likelihood ratio of ``solution``."""
    return solution.robust_llr()


from robustlr.lfd.kl_ball import (  # noqa: E402
    MTestSolution,
    solve_m_test,
    solve_m_test_symmetric,
)
from robustlr.lfd.contamination import HTestSolution, solve_h_test  # noqa: E402
from robustlr.lfd.tilted import ATestSolution, solve_a_test  # noqa: E402
from robustlr.lfd.composite import (  # noqa: E402
    CompositeSolution,
    solve_c_test,
    solve_cstar_test,
)
