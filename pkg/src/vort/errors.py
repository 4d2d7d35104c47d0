"""Shared exception types."""


class VortError(Exception):
    """Base class for all errors raised by this package."""


class ExprSyntaxError(VortError):
    """Raised when expression text does not conform to the grammar.

    Carries the byte offset of the offending token and the set of token
    kinds that would have been accepted there.
    """

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}"
                         + (f" (expected {', '.join(sorted(expected))})" if expected else ""))
        self.offset = offset
        self.expected = frozenset(expected)


class UnknownFunctionError(ExprSyntaxError):
    def __init__(self, name, offset):
        ExprSyntaxError.__init__(self, f"unknown function '{name}'", offset, ())
        self.name = name


class EvalDomainError(VortError):
    """Math domain failure during evaluation (log of non-positive, division
    by zero, fractional power of a negative base, overflow)."""


class UnboundVariableError(VortError):
    def __init__(self, name):
        super().__init__(f"variable '{name}' is not bound at the evaluation point")
        self.name = name


class DegenerateMetricError(VortError):
    """Metric determinant at or below the degeneracy threshold."""


class ChartMismatchError(VortError):
    """Operands live on different charts."""


class DegreeError(VortError):
    """Form or tensor degree outside the operation's range."""


class ManifestError(VortError):
    """Malformed manifest file or unresolved name."""


class SolverError(VortError):
    """Linear solve failed (incompatible right-hand side or no convergence)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FlowError(VortError):
    """Field evaluation failed during flow integration."""

    def __init__(self, message, t):
        super().__init__(f"{message} (t={t})")
        self.t = t
