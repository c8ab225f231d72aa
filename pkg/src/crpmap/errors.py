"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes (input error 2, numerical
integrity 3, non-convergence 4).
"""


class CrpmapError(Exception):
    """Base class for all package-specific errors."""


class InputError(CrpmapError, ValueError):
    """Invalid user-supplied data, configuration or file content."""


class NumericalIntegrityError(CrpmapError, ArithmeticError):
    """An internal quantity violated an analytic guarantee beyond tolerance."""


class EmptyClusterError(CrpmapError, ValueError):
    """Attempt to remove an observation from a cluster with no members."""


class ConvergenceError(CrpmapError, RuntimeError):
    """An iterative procedure failed to converge and the caller asked for it."""


class InsufficientChain(CrpmapError, ValueError):
    """Chain too short for the requested diagnostic; keep sampling."""
