"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""


class DynSBMException(Exception):
    """Base class of every error raised by dynsbm"""

    pass


class ShapeMismatchException(DynSBMException, ValueError):
    """
    This error is raised when arrays do not have the declared shapes, when a
    graph is not symmetric with an empty diagonal or when labels are out of range.
    It is structural and distinct from a failed model assumption.
    """

    pass


class InvalidMarginException(DynSBMException, ValueError):
    """A error that happens if delta, zeta or eta lies outside its interval"""

    pass


class DomainException(DynSBMException, ValueError):
    pass


class UnsupportedSizeException(DynSBMException, ValueError):
    """
    This error is raised if an exact computation would enumerate more
    configurations, joint states or permutations than the package allows
    """

    pass


class NumericalException(DynSBMException, ArithmeticError):
    """A error that happens when a system is singular or an objective is not finite"""

    pass


class UndefinedResidualException(DynSBMException, ValueError):
    """A fixed-point residual was requested on a sequence without transitions (T=1)"""

    pass


class DegenerateClassException(DynSBMException):
    """
    A latent class collected (almost) no mass. The class index is kept in
    `q`; the caller is expected to reinitialise.
    """

    def __init__(self, q: int, mass: float):
        super().__init__(f'class {q} is degenerate (mass {mass:.3g})')
        self.q = q
        self.mass = mass


class EstimationFailedException(DynSBMException):
    """Every restart of an estimator failed. `diagnostics` lists the reasons."""

    def __init__(self, message: str, diagnostics: list[str]):
        super().__init__(message)
        self.diagnostics = diagnostics


class ElboDecreasedException(DynSBMException, ArithmeticError):
    pass


class UnknownStrategyException(DynSBMException, ValueError):
    pass


class DegenerateGridException(DynSBMException, ValueError):
    """A rate regression needs at least three distinct abscissae"""

    pass


class ExperimentFailedException(DynSBMException):
    """More than half of the replicates of some experiment cell failed"""

    def __init__(self, cells: list[tuple[int, int]]):
        super().__init__(f'estimator failure rate above threshold in cells {cells}')
        self.cells = cells
