"""Exception hierarchy shared by the numerical and DSL layers."""


class HFracError(Exception):
    """Base class for every error raised by :mod:`hfrac`."""


class DomainError(HFracError, ValueError):
    """An argument violates a documented precondition."""


class PoleError(DomainError):
    """A gamma function (or product of them) was evaluated at a pole."""


class PoleCollisionError(HFracError):
    """Two numerator poles coincide, i.e. a logarithmic residue case."""


class ConvergenceError(HFracError):
    """A series, quadrature or contour ladder failed to reach its tolerance."""


class DivergentError(HFracError):
    """An H-function representation does not converge for the given argument."""


class InterpolationError(ConvergenceError):
    """Chebyshev interpolation of a sampled function was not resolved."""


class DSLError(HFracError):
    """Base class for errors of the operator expression language."""


class ParseError(DSLError):
    """Syntax error with 1-based line and column information."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class RewriteError(DSLError):
    """A rewrite rule failed its precondition."""

    def __init__(self, rule: str, reason: str) -> None:
        super().__init__(f"rule {rule!r} failed: {reason}")
        self.rule = rule
