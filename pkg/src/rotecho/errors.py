"""Exception types shared across the package.

The command line maps these onto exit codes: configuration problems
exit with 2, numerical failures (tolerance violations, windows or
brackets that cannot be satisfied, fits that do not converge) with 3.
"""


class RotechoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RotechoError):
    """Invalid or inconsistent configuration input."""


class ToleranceError(RotechoError):
    """A numerical guard tripped (trace, hermiticity or convergence)."""


class TruncationError(ToleranceError):
    """Thermal population at the top of the basis exceeds tolerance."""


class WindowError(RotechoError):
    """Requested analysis window does not fit inside the trace."""


class BracketError(RotechoError):
    """A 1-d search bracket could not be established."""


class FitError(RotechoError):
    """Least-squares fit failed to converge."""
