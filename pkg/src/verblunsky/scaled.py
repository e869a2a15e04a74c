"""Floating point values with an unbounded binary exponent.

The orthonormal polynomials evaluated at the band edge grow geometrically
(roughly ``2**(n/2)`` for the families studied here), so products and kernel
sums leave the binary64 range after a few thousand steps.  The types below
keep a binary64 mantissa and a Python ``int`` exponent and renormalize after
every operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ScaledReal", "ScaledComplex"]

# Beyond this exponent gap the smaller addend is below one ulp of the larger.
_ALIGN_LIMIT = 60


def _split(x: float) -> tuple[float, int]:
    """Return ``(mantissa, exponent)`` with ``|mantissa|`` in ``[1, 2)``."""
    if x == 0.0:
        return 0.0, 0
    if not math.isfinite(x):
        raise OverflowError(f"cannot scale non-finite value {x!r}")
    m, e = math.frexp(x)
    return 2.0 * m, e - 1


@dataclass(frozen=True, slots=True)
class ScaledReal:
    """A real number ``mantissa * 2**exponent``.

    Construct through :meth:`from_float` or :meth:`normalized`; the raw
    constructor assumes the mantissa is already in ``[1, 2)`` (or zero).
    """

    mantissa: float
    exponent: int = 0

    @classmethod
    def normalized(cls, mantissa: float, exponent: int = 0) -> ScaledReal:
        m, e = _split(mantissa)
        if m == 0.0:
            return cls(0.0, 0)
        return cls(m, e + exponent)

    @classmethod
    def from_float(cls, x: float) -> ScaledReal:
        return cls.normalized(float(x), 0)

    @classmethod
    def one(cls) -> ScaledReal:
        return cls(1.0, 0)

    @classmethod
    def zero(cls) -> ScaledReal:
        return cls(0.0, 0)

    def __float__(self) -> float:
        # math.ldexp raises OverflowError instead of returning inf.
        return math.ldexp(self.mantissa, self.exponent)

    def to_float(self) -> float:
        return float(self)

    def log2(self) -> float:
        if self.mantissa <= 0.0:
            raise ValueError("log2 of a non-positive value")
        return math.log2(self.mantissa) + self.exponent

    def log(self) -> float:
        return self.log2() * math.log(2.0)

    def is_zero(self) -> bool:
        return self.mantissa == 0.0

    def __neg__(self) -> ScaledReal:
        return ScaledReal(-self.mantissa, self.exponent)

    def __abs__(self) -> ScaledReal:
        return ScaledReal(abs(self.mantissa), self.exponent)

    def __mul__(self, other) -> ScaledReal:
        if isinstance(other, ScaledReal):
            return ScaledReal.normalized(self.mantissa * other.mantissa,
                                         self.exponent + other.exponent)
        if isinstance(other, (int, float)):
            return ScaledReal.normalized(self.mantissa * float(other), self.exponent)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> ScaledReal:
        if isinstance(other, (int, float)):
            other = ScaledReal.from_float(other)
        if not isinstance(other, ScaledReal):
            return NotImplemented
        if other.mantissa == 0.0:
            raise ZeroDivisionError("division by zero ScaledReal")
        return ScaledReal.normalized(self.mantissa / other.mantissa,
                                     self.exponent - other.exponent)

    def __rtruediv__(self, other) -> ScaledReal:
        if isinstance(other, (int, float)):
            return ScaledReal.from_float(other) / self
        return NotImplemented

    def __add__(self, other) -> ScaledReal:
        if isinstance(other, (int, float)):
            other = ScaledReal.from_float(other)
        if not isinstance(other, ScaledReal):
            return NotImplemented
        if self.mantissa == 0.0:
            return other
        if other.mantissa == 0.0:
            return self
        gap = self.exponent - other.exponent
        if gap > _ALIGN_LIMIT:
            return self
        if gap < -_ALIGN_LIMIT:
            return other
        if gap >= 0:
            m = self.mantissa + math.ldexp(other.mantissa, -gap)
            return ScaledReal.normalized(m, self.exponent)
        m = math.ldexp(self.mantissa, gap) + other.mantissa
        return ScaledReal.normalized(m, other.exponent)

    __radd__ = __add__

    def __sub__(self, other) -> ScaledReal:
        if isinstance(other, (int, float)):
            other = ScaledReal.from_float(other)
        return self + (-other)

    def __rsub__(self, other) -> ScaledReal:
        return (-self) + other

    def sqrt(self) -> ScaledReal:
        if self.mantissa < 0.0:
            raise ValueError("sqrt of a negative value")
        if self.mantissa == 0.0:
            return self
        m, e = self.mantissa, self.exponent
        if e % 2:
            m, e = 2.0 * m, e - 1
        return ScaledReal.normalized(math.sqrt(m), e // 2)

    def _cmp_key(self, other: ScaledReal) -> float:
        return float((self - other).mantissa)

    def __lt__(self, other) -> bool:
        return self._cmp_key(_coerce(other)) < 0.0

    def __le__(self, other) -> bool:
        return self._cmp_key(_coerce(other)) <= 0.0

    def __gt__(self, other) -> bool:
        return self._cmp_key(_coerce(other)) > 0.0

    def __ge__(self, other) -> bool:
        return self._cmp_key(_coerce(other)) >= 0.0


def _coerce(x) -> ScaledReal:
    if isinstance(x, ScaledReal):
        return x
    return ScaledReal.from_float(float(x))


@dataclass(frozen=True, slots=True)
class ScaledComplex:
    """A complex number ``mantissa * 2**exponent``.

    The mantissa is normalized so that ``max(|re|, |im|)`` lies in ``[1, 2)``.
    """

    mantissa: complex
    exponent: int = 0

    @classmethod
    def normalized(cls, mantissa: complex, exponent: int = 0) -> ScaledComplex:
        mantissa = complex(mantissa)
        big = max(abs(mantissa.real), abs(mantissa.imag))
        if big == 0.0:
            return cls(0j, 0)
        _, e = _split(big)
        return cls(complex(math.ldexp(mantissa.real, -e), math.ldexp(mantissa.imag, -e)),
                   exponent + e)

    @classmethod
    def from_complex(cls, z: complex) -> ScaledComplex:
        return cls.normalized(z, 0)

    @classmethod
    def one(cls) -> ScaledComplex:
        return cls(1 + 0j, 0)

    def __complex__(self) -> complex:
        return complex(math.ldexp(self.mantissa.real, self.exponent),
                       math.ldexp(self.mantissa.imag, self.exponent))

    def to_complex(self) -> complex:
        return complex(self)

    @property
    def real(self) -> ScaledReal:
        return ScaledReal.normalized(self.mantissa.real, self.exponent)

    @property
    def imag(self) -> ScaledReal:
        return ScaledReal.normalized(self.mantissa.imag, self.exponent)

    def conjugate(self) -> ScaledComplex:
        return ScaledComplex(self.mantissa.conjugate(), self.exponent)

    def abs2(self) -> ScaledReal:
        m = self.mantissa
        return ScaledReal.normalized(m.real * m.real + m.imag * m.imag, 2 * self.exponent)

    def __neg__(self) -> ScaledComplex:
        return ScaledComplex(-self.mantissa, self.exponent)

    def __mul__(self, other) -> ScaledComplex:
        if isinstance(other, ScaledComplex):
            return ScaledComplex.normalized(self.mantissa * other.mantissa,
                                            self.exponent + other.exponent)
        if isinstance(other, ScaledReal):
            return ScaledComplex.normalized(self.mantissa * other.mantissa,
                                            self.exponent + other.exponent)
        if isinstance(other, (int, float, complex)):
            return ScaledComplex.normalized(self.mantissa * other, self.exponent)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> ScaledComplex:
        if isinstance(other, (ScaledReal, ScaledComplex)):
            if other.mantissa == 0:
                raise ZeroDivisionError("division by zero scaled value")
            return ScaledComplex.normalized(self.mantissa / other.mantissa,
                                            self.exponent - other.exponent)
        if isinstance(other, (int, float, complex)):
            return ScaledComplex.normalized(self.mantissa / other, self.exponent)
        return NotImplemented

    def __add__(self, other) -> ScaledComplex:
        if isinstance(other, ScaledReal):
            other = ScaledComplex(complex(other.mantissa), other.exponent)
        elif isinstance(other, (int, float, complex)):
            other = ScaledComplex.from_complex(other)
        if not isinstance(other, ScaledComplex):
            return NotImplemented
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        gap = self.exponent - other.exponent
        if gap > _ALIGN_LIMIT:
            return self
        if gap < -_ALIGN_LIMIT:
            return other
        if gap >= 0:
            return ScaledComplex.normalized(self.mantissa + other.mantissa * 2.0 ** -gap,
                                            self.exponent)
        return ScaledComplex.normalized(self.mantissa * 2.0 ** gap + other.mantissa,
                                        other.exponent)

    __radd__ = __add__

    def __sub__(self, other) -> ScaledComplex:
        return self + (-other)
