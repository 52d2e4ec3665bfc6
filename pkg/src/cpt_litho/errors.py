"""Exception types shared across the solver and fitting modules."""


class NumericError(RuntimeError):
    """An evaluation or integration produced non-finite values."""


class ConvergenceError(RuntimeError):
    """An iterative solve exhausted its budget before reaching tolerance.

    Attributes
    ----------
    residual : float or None
        Norm of the remaining defect when the budget ran out, if known.
    result : object or None
        Best-effort result assembled before giving up, if one exists.
    """

    def __init__(self, message, *, residual=None, result=None):
        super().__init__(message)
        self.residual = residual
        self.result = result
