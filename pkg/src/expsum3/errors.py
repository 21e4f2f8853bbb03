"""Exception hierarchy shared by every engine.

The CLI maps ``ParameterError`` to exit code 2 and the other two to exit code 3.
"""


class Expsum3Error(Exception):
    pass


class ParameterError(Expsum3Error, ValueError):
    """Invalid input parameters (bad triple, non-positive cutoff, ...)."""


class ResourceError(Expsum3Error):
    """A configured cap (tuple count, term count) would be exceeded."""

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class AccuracyError(Expsum3Error):
    """Requested accuracy could not be reached within the cost budget."""

    def __init__(self, message, achieved=None, best=None):
        super().__init__(message)
        self.achieved = achieved
        self.best = best
