"""Complex numbers with an explicit base-2 exponent.

Values such as ``P^{(k)}(z) / P(z)`` for degree ``10^5`` polynomials sweep
through magnitudes like ``e^{+-n}``, far outside the double range.  A
``ScaledComplex`` keeps a mantissa with ``1 <= |mantissa| < 2`` (or exactly
zero) next to an unbounded integer exponent, and renormalizes after every
operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LOG2 = math.log(2.0)


def _normalize(m: complex, e: int) -> tuple[complex, int]:
    m = complex(m)
    if not (math.isfinite(m.real) and math.isfinite(m.imag)):
        raise ValueError(f"non-finite mantissa {m!r}")
    a = max(abs(m.real), abs(m.imag))
    if a == 0.0:
        return 0j, 0
    # pre-scale by the max-norm so abs() cannot overflow or underflow
    _, ea = math.frexp(a)
    m = complex(math.ldexp(m.real, -ea), math.ldexp(m.imag, -ea))
    e += ea
    r = abs(m)
    _, er = math.frexp(r)
    shift = er - 1
    m = complex(math.ldexp(m.real, -shift), math.ldexp(m.imag, -shift))
    e += shift
    # rounding in abs() can leave |m| a hair outside [1, 2)
    r = abs(m)
    if r >= 2.0:
        m, e = m / 2.0, e + 1
    elif r < 1.0:
        m, e = m * 2.0, e - 1
    return m, int(e)


@dataclass(frozen=True)
class ScaledComplex:
    mantissa: complex
    exponent: int

    def __post_init__(self):
        m, e = _normalize(self.mantissa, self.exponent)
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_complex(cls, value: complex) -> "ScaledComplex":
        return cls(complex(value), 0)

    @classmethod
    def zero(cls) -> "ScaledComplex":
        return cls(0j, 0)

    @classmethod
    def one(cls) -> "ScaledComplex":
        return cls(1 + 0j, 0)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def log_abs(self) -> float:
        """Natural log of the modulus; ``-inf`` for zero."""
        if self.is_zero:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.exponent * LOG2

    def log2_abs(self) -> float:
        if self.is_zero:
            return -math.inf
        return math.log2(abs(self.mantissa)) + self.exponent

    def to_complex(self) -> complex:
        """Collapse to a plain complex; overflows to inf / underflows to 0."""
        m = self.mantissa
        e = self.exponent
        if e > 1100:
            return complex(math.copysign(math.inf, m.real) if m.real else 0.0,
                           math.copysign(math.inf, m.imag) if m.imag else 0.0)
        if e < -1200:
            return 0j
        return complex(math.ldexp(m.real, e), math.ldexp(m.imag, e))

    __complex__ = to_complex

    def __abs__(self) -> "ScaledComplex":
        return ScaledComplex(abs(self.mantissa) + 0j, self.exponent)

    def conjugate(self) -> "ScaledComplex":
        return ScaledComplex(self.mantissa.conjugate(), self.exponent)

    def ldexp(self, shift: int) -> "ScaledComplex":
        return ScaledComplex(self.mantissa, self.exponent + int(shift))

    def __neg__(self) -> "ScaledComplex":
        return ScaledComplex(-self.mantissa, self.exponent)

    def __mul__(self, other) -> "ScaledComplex":
        other = _coerce(other)
        return ScaledComplex(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledComplex":
        other = _coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("division by zero ScaledComplex")
        return ScaledComplex(self.mantissa / other.mantissa, self.exponent - other.exponent)

    def __rtruediv__(self, other) -> "ScaledComplex":
        return _coerce(other) / self

    def __add__(self, other) -> "ScaledComplex":
        other = _coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self, other) if self.exponent >= other.exponent else (other, self)
        gap = lo.exponent - hi.exponent
        if gap < -110:
            return hi
        lo_m = complex(math.ldexp(lo.mantissa.real, gap), math.ldexp(lo.mantissa.imag, gap))
        return ScaledComplex(hi.mantissa + lo_m, hi.exponent)

    __radd__ = __add__

    def __sub__(self, other) -> "ScaledComplex":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ScaledComplex":
        return _coerce(other) + (-self)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float, complex)):
            other = ScaledComplex.from_complex(other)
        if not isinstance(other, ScaledComplex):
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __hash__(self):
        return hash((self.mantissa, self.exponent))

    def __repr__(self):
        return f"ScaledComplex({self.mantissa!r} * 2**{self.exponent})"


def _coerce(x) -> ScaledComplex:
    if isinstance(x, ScaledComplex):
        return x
    return ScaledComplex.from_complex(complex(x))


def ratio(a: ScaledComplex, b: ScaledComplex) -> complex:
    """``a / b`` as a plain complex (the exponents cancel before collapsing)."""
    return (a / b).to_complex()
