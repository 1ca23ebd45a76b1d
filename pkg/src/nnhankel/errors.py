"""Exception types raised by nnhankel."""


class HankelError(Exception):
    """Base class for all nnhankel errors."""


class DimensionMismatch(HankelError, ValueError):
    pass


class NotHankel(HankelError, ValueError):
    """A dense matrix is not constant along one of its anti-diagonals.

    ``antidiagonal`` is the zero-based anti-diagonal index ``i + j``.
    """

    def __init__(self, antidiagonal, deviation):
        self.antidiagonal = int(antidiagonal)
        self.deviation = float(deviation)
        super().__init__(
            f"anti-diagonal {self.antidiagonal} varies by {self.deviation:.3g}"
        )


class InvalidEigenpair(HankelError, ValueError):
    pass


class Infeasible(HankelError):
    """No nonnegative Hankel matrix realizes the eigenpair exactly.

    Carries the certificate: the smallest attainable eigenpair residual and
    the bound-feasible point attaining it.
    """

    def __init__(self, min_residual, witness=None):
        self.min_residual = float(min_residual)
        self.witness = witness
        super().__init__(f"exact eigenpair infeasible; min residual {self.min_residual:.6g}")


class MaxIterations(HankelError, RuntimeError):
    def __init__(self, solver, iterations):
        self.solver = solver
        self.iterations = iterations
        super().__init__(f"{solver} did not converge within {iterations} iterations")


class TooLarge(HankelError, ValueError):
    pass


class EmptyInput(HankelError, ValueError):
    pass
