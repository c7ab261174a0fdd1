"""Exact coefficient arithmetic: rationals extended by powers of pi, and Q[i].

Two small rings live here.

``PiScalar`` is a polynomial in the transcendental pi with ``Fraction``
coefficients, capped at degree 6.  Every closed-form coefficient the engine
produces (things like -pi/16 + pi^3/12) is a PiScalar.  The cap is a tripwire:
no correct computation exceeds degree 6, so an overflow means an index
bookkeeping bug, and we want that loud, not silently wrapped.

``GaussRat`` is the field Q[i] with ``Fraction`` components.  It is the
coefficient field for rational functions of the normal covariable, where the
contour arithmetic needs exact division by quantities like 2i.

The imaginary unit is deliberately NOT part of PiScalar.  Factors of i are
tracked as integer power tags on terms and folded mod 4 at accumulation time
(see :func:`fold_ipow`); final reported coefficients must end up real.
"""

from __future__ import annotations

from fractions import Fraction
from math import pi as _PI_FLOAT
from typing import Mapping, Union

MAX_PI_DEGREE = 6

RationalLike = Union[int, Fraction]


class PiDegreeError(ValueError):
    """A product or constructor escaped the supported pi-degree range."""


class PiScalar:
    """Exact polynomial in pi, degrees 0..6, Fraction coefficients.

    Instances are immutable; all operators return new values.  Zero
    coefficients are never stored, so equality is plain dict equality.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, RationalLike] | None = None):
        clean: dict[int, Fraction] = {}
        if coeffs:
            for deg, val in coeffs.items():
                if not 0 <= deg <= MAX_PI_DEGREE:
                    raise PiDegreeError(f"pi-degree {deg} outside 0..{MAX_PI_DEGREE}")
                frac = Fraction(val)
                if frac != 0:
                    clean[deg] = frac
        self._c = clean

    @classmethod
    def of(cls, value: RationalLike, degree: int = 0) -> "PiScalar":
        """value * pi**degree as a PiScalar."""
        return cls({degree: Fraction(value)})

    @classmethod
    def zero(cls) -> "PiScalar":
        return cls()

    @classmethod
    def one(cls) -> "PiScalar":
        return cls({0: Fraction(1)})

    def coeff(self, degree: int) -> Fraction:
        return self._c.get(degree, Fraction(0))

    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def degree(self) -> int:
        """Largest pi-power with a nonzero coefficient (0 for the zero value)."""
        return max(self._c, default=0)

    def __add__(self, other: "PiScalar") -> "PiScalar":
        if not isinstance(other, PiScalar):
            return NotImplemented
        merged = dict(self._c)
        for deg, val in other._c.items():
            merged[deg] = merged.get(deg, Fraction(0)) + val
        return PiScalar(merged)

    def __sub__(self, other: "PiScalar") -> "PiScalar":
        if not isinstance(other, PiScalar):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "PiScalar":
        return PiScalar({deg: -val for deg, val in self._c.items()})

    def __mul__(self, other: "PiScalar | RationalLike") -> "PiScalar":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, PiScalar):
            return NotImplemented
        out: dict[int, Fraction] = {}
        for d1, v1 in self._c.items():
            for d2, v2 in other._c.items():
                deg = d1 + d2
                if deg > MAX_PI_DEGREE:
                    raise PiDegreeError(
                        f"pi-degree {deg} in product exceeds cap {MAX_PI_DEGREE}"
                    )
                out[deg] = out.get(deg, Fraction(0)) + v1 * v2
        return PiScalar(out)

    __rmul__ = __mul__

    def scale(self, factor: RationalLike) -> "PiScalar":
        factor = Fraction(factor)
        return PiScalar({deg: val * factor for deg, val in self._c.items()})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PiScalar):
            return self._c == other._c
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._c.items()))

    def to_float(self) -> float:
        return float(sum(float(val) * _PI_FLOAT**deg for deg, val in self._c.items()))

    def to_json(self) -> dict[str, str]:
        return {f"pi{deg}": str(self._c[deg]) for deg in sorted(self._c)}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "PiScalar":
        return cls({int(key[2:]): Fraction(val) for key, val in data.items()})

    def __str__(self) -> str:
        if not self._c:
            return "0"
        parts = []
        for deg in sorted(self._c):
            val = self._c[deg]
            if deg == 0:
                body = str(val)
            else:
                power = "pi" if deg == 1 else f"pi^{deg}"
                if val == 1:
                    body = power
                elif val == -1:
                    body = f"-{power}"
                else:
                    body = f"{val}*{power}"
            parts.append(body)
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"PiScalar({self!s})"


def pis_add(a: PiScalar, b: PiScalar) -> PiScalar:
    return a + b


def pis_mul(a: PiScalar, b: PiScalar) -> PiScalar:
    return a * b


def pis_to_float(a: PiScalar) -> float:
    return a.to_float()


def fold_ipow(ipow: int) -> tuple[int, int]:
    """Reduce an integer power of i to (sign, residual) with residual in {0, 1}.

    i**ipow == sign * i**residual.  residual 0 means real, 1 means imaginary.
    """
    ipow %= 4
    if ipow == 0:
        return 1, 0
    if ipow == 1:
        return 1, 1
    if ipow == 2:
        return -1, 0
    return -1, 1


class GaussRat:
    """Exact Gaussian rational re + i*im, with field operations."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("GaussRat is immutable")

    @classmethod
    def i(cls) -> "GaussRat":
        return cls(0, 1)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other: "GaussRat | RationalLike") -> "GaussRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other: "GaussRat | RationalLike") -> "GaussRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other: "GaussRat | RationalLike") -> "GaussRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self) -> "GaussRat":
        return GaussRat(-self.re, -self.im)

    def __mul__(self, other: "GaussRat | RationalLike") -> "GaussRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: "GaussRat | RationalLike") -> "GaussRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero GaussRat")
        return GaussRat(
            (self.re * other.re + self.im * other.im) / norm,
            (self.im * other.re - self.re * other.im) / norm,
        )

    def __rtruediv__(self, other: "GaussRat | RationalLike") -> "GaussRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, exponent: int) -> "GaussRat":
        if exponent < 0:
            return GaussRat(1) / self.__pow__(-exponent)
        result = GaussRat(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conj(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GaussRat(other)
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re} {sign} {abs(self.im)}*i"

    def __repr__(self) -> str:
        return f"GaussRat({self.re!s}, {self.im!s})"


def _coerce(value: object) -> "GaussRat":
    if isinstance(value, GaussRat):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussRat(value)
    return NotImplemented
