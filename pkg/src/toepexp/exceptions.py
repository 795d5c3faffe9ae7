"""Exception hierarchy for toepexp."""


class ToeplitzExpmError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ToeplitzExpmError, ValueError):
    pass


class DiagonalMismatch(ToeplitzExpmError, ValueError):
    """First column and first row disagree on the diagonal entry."""


class DenseCapExceeded(ToeplitzExpmError, MemoryError):
    """Refused to materialize an n x n dense matrix above the dense cap."""


class SingularPreconditioner(ToeplitzExpmError, ArithmeticError):
    pass


class XiZero(ToeplitzExpmError, ArithmeticError):
    """The first entry of the solution of T x = e_1 vanishes.

    The Gohberg-Semencul representation does not exist in that case.
    """


class SolverFailure(ToeplitzExpmError, RuntimeError):
    """GMRES did not reach the requested tolerance.

    The full :class:`~toepexp.gmres.SolveReport` is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularHessenberg(ToeplitzExpmError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UsedAfterBreakdown(ToeplitzExpmError, RuntimeError):
    pass


class ZeroReference(ToeplitzExpmError, ValueError):
    pass
