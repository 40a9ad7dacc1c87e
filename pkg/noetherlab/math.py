from __future__ import annotations

import abc
from typing import Iterable


class Numeric(metaclass=abc.ABCMeta):
    """
    A base class for objects that support direct comparison & arithmetics.

    Unlike a plain float, the object keeps its constituents (e.g. the absolute
    residual and the scale of the compared terms), but it can be asserted
    against plain numbers as if it were the float itself::

        assert report.max_rel <= 1e-9
    """

    @property
    @abc.abstractmethod
    def _value(self) -> float:
        raise NotImplementedError

    #
    # Type conversion:
    #

    def __str__(self) -> str:
        return str(float(self))

    def __float__(self) -> float:
        return float(self._value)

    #
    # Comparison:
    #

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float, Numeric)):
            return float(self) == float(other)
        else:
            return NotImplemented

    def __ne__(self, other: object) -> bool:
        if isinstance(other, (int, float, Numeric)):
            return float(self) != float(other)
        else:
            return NotImplemented

    def __ge__(self, other: object) -> bool:
        if isinstance(other, (int, float, Numeric)):
            return float(self) >= float(other)
        else:
            return NotImplemented

    def __gt__(self, other: object) -> bool:
        if isinstance(other, (int, float, Numeric)):
            return float(self) > float(other)
        else:
            return NotImplemented

    def __le__(self, other: object) -> bool:
        if isinstance(other, (int, float, Numeric)):
            return float(self) <= float(other)
        else:
            return NotImplemented

    def __lt__(self, other: object) -> bool:
        if isinstance(other, (int, float, Numeric)):
            return float(self) < float(other)
        else:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(float(self))

    #
    # Arithmetics:
    #

    def __add__(self, other: object) -> float:
        if isinstance(other, (int, float)):
            return float(self) + other
        else:
            return NotImplemented

    def __sub__(self, other: object) -> float:
        if isinstance(other, (int, float)):
            return float(self) - other
        else:
            return NotImplemented

    def __mul__(self, other: object) -> float:
        if isinstance(other, (int, float)):
            return float(self) * other
        else:
            return NotImplemented

    def __truediv__(self, other: object) -> float:
        if isinstance(other, (int, float)):
            return float(self) / other
        else:
            return NotImplemented


class Residual(Numeric):
    """
    A residual under the relative tolerance convention of the package.

    The value is ``|absolute| / (1 + scale)``, where the scale is the magnitude
    of the terms that were compared (or summed up) to get the residual.
    """

    def __init__(self, absolute: float, scale: float = 0.0) -> None:
        super().__init__()
        self.absolute = abs(float(absolute))
        self.scale = abs(float(scale))

    def __repr__(self) -> str:
        return f"<Residual: {self.relative!r} (absolute {self.absolute!r}, scale {self.scale!r})>"

    @property
    def _value(self) -> float:
        return self.relative

    @property
    def relative(self) -> float:
        return self.absolute / (1.0 + self.scale)

    def within(self, tolerance: float) -> bool:
        return self.relative <= tolerance


def relative(absolute: float, *terms: float) -> Residual:
    """The residual of a comparison, scaled by the magnitudes of its terms."""
    return Residual(absolute, sum(abs(float(term)) for term in terms))


def worst(residuals: Iterable[Residual]) -> Residual:
    """The largest of the residuals by their relative value (zero if none)."""
    result = Residual(0.0)
    for residual in residuals:
        if residual.relative > result.relative:
            result = residual
    return result
