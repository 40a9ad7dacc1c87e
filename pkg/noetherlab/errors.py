from __future__ import annotations


class NoetherError(Exception):
    """A base class for all errors raised on purpose by this package."""
    pass


class ConfigurationError(NoetherError, ValueError):
    """An invalid system, run configuration, or point syntax."""
    pass


class ExpressionError(NoetherError, ValueError):
    """A base class for errors of parsing the scalar-field expressions."""
    pass


class ExpressionSyntaxError(ExpressionError):
    """A malformed expression text, with the position of the problem."""

    def __init__(self, position: int, message: str) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position
        self.message = message


class UnknownIdentifier(ExpressionError):
    """An identifier that is neither a variable, a parameter, nor a function."""

    def __init__(self, name: str) -> None:
        super().__init__(f"Unknown identifier: {name!r}")
        self.name = name


class IndexOutOfRange(ExpressionError):
    """A coordinate reference like ``q3`` beyond the system's dimension."""

    def __init__(self, name: str, index: int, n: int) -> None:
        super().__init__(f"Coordinate {name!r} is out of range 1..{n}")
        self.name = name
        self.index = index
        self.n = n


class DomainError(NoetherError, ArithmeticError):
    """An expression evaluated outside of its domain (log of 0, division by 0, etc)."""

    def __init__(self, message: str, subtree: str, *, index: int | None = None) -> None:
        where = f" at sample {index}" if index is not None else ""
        super().__init__(f"{message} in {subtree}{where}")
        self.message = message
        self.subtree = subtree
        self.index = index

    def at_index(self, index: int) -> DomainError:
        """The same error, attributed to a sample of a trajectory."""
        return DomainError(self.message, self.subtree, index=index)


class ContactDegenerate(NoetherError, ArithmeticError):
    """The elementary action vanishes: the point is outside of the contact region."""

    def __init__(self, rho: float) -> None:
        super().__init__(f"The elementary action is degenerate: rho={rho!r}")
        self.rho = rho


class UnknownSystem(NoetherError, KeyError):
    """A catalog lookup of a system that does not exist."""

    def __init__(self, name: str) -> None:
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"Unknown system: {self.name!r}"
