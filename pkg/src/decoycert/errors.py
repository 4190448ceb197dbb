"""Exception types shared across the package."""


class DecoyCertError(Exception):
    """Base class for all package-specific errors."""


class InvariantViolation(DecoyCertError, ValueError):
    """A domain-type invariant does not hold (bad input data)."""


class ValidityError(DecoyCertError, ValueError):
    """Inputs fall outside the regime where a bound is established."""


class InfeasibleProblem(DecoyCertError, ValueError):
    """A constraint system admits no solution; inputs are inconsistent."""


class ProtocolDiscarded(DecoyCertError, RuntimeError):
    """The dark-count consistency rule rejected the run (s1 < 1.5 * S0)."""
