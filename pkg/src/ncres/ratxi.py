"""Rational functions of the normal covariable with poles confined to +-i.

A value is P(x) / ((x - i)^a (x + i)^b) with P a polynomial over the
Gaussian rationals, stored as a coefficient list (low degree first), and
(a, b) the pole orders.  Construction always normalizes: factors of
(x -+ i) common to numerator and denominator are cancelled, so the
representation is unique and equality is structural.

(1 + x^2) factors exactly as (x - i)(x + i), so the ubiquitous denominators
(1 + x^2)^m enter as a = b = m.

The three contour operations the engine needs:

  rx_pi_plus        the sum of principal parts at x = +i; this is the
                    projection onto the part holomorphic in the lower
                    half-plane (for decaying functions)
  rx_diff           exact derivative
  rx_integrate_line the real-line integral by closing upward, returned as
                    w with integral = 2*pi*w (the residue's factor i is
                    folded into w, keeping pi itself out of this module)
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .scalar import GaussRat

Poly = tuple[GaussRat, ...]

_I = GaussRat(0, 1)
_TWO_I = GaussRat(0, 2)


class NonDecayingError(ValueError):
    """The operation needs decay at infinity that the input lacks."""


def _as_gauss(value) -> GaussRat:
    if isinstance(value, GaussRat):
        return value
    return GaussRat(Fraction(value))


def p_trim(coeffs: Sequence[GaussRat]) -> Poly:
    out = list(coeffs)
    while out and out[-1].is_zero():
        out.pop()
    return tuple(out)


def p_add(p: Poly, q: Poly) -> Poly:
    size = max(len(p), len(q))
    return p_trim(
        [
            (p[k] if k < len(p) else GaussRat()) + (q[k] if k < len(q) else GaussRat())
            for k in range(size)
        ]
    )


def p_scale(p: Poly, factor: GaussRat) -> Poly:
    return p_trim([c * factor for c in p])


def p_mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [GaussRat() for _ in range(len(p) + len(q) - 1)]
    for k, pk in enumerate(p):
        for l, ql in enumerate(q):
            out[k + l] = out[k + l] + pk * ql
    return p_trim(out)


def p_diff(p: Poly) -> Poly:
    return p_trim([p[k] * k for k in range(1, len(p))])


def p_eval(p: Poly, x: GaussRat) -> GaussRat:
    acc = GaussRat()
    for coeff in reversed(p):
        acc = acc * x + coeff
    return acc


def p_divroot(p: Poly, root: GaussRat) -> Poly:
    """Exact division by (x - root); caller guarantees p(root) = 0."""
    degree = len(p) - 1
    quotient: list[GaussRat] = [GaussRat()] * degree
    acc = p[degree]
    for k in range(degree - 1, -1, -1):
        quotient[k] = acc
        acc = p[k] + acc * root
    if not acc.is_zero():
        raise ValueError("p_divroot called with a non-root")
    return p_trim(quotient)


class RatXi:
    """Immutable normalized rational function P/((x-i)^a (x+i)^b)."""

    __slots__ = ("num", "ord_plus", "ord_minus")

    def __init__(self, num: Sequence, ord_plus: int = 0, ord_minus: int = 0):
        poly = p_trim([_as_gauss(c) for c in num])
        if ord_plus < 0 or ord_minus < 0:
            raise ValueError("pole orders must be nonnegative")
        while ord_plus > 0 and poly and p_eval(poly, _I).is_zero():
            poly = p_divroot(poly, _I)
            ord_plus -= 1
        while ord_minus > 0 and poly and p_eval(poly, -_I).is_zero():
            poly = p_divroot(poly, -_I)
            ord_minus -= 1
        if not poly:
            ord_plus = ord_minus = 0
        object.__setattr__(self, "num", poly)
        object.__setattr__(self, "ord_plus", ord_plus)
        object.__setattr__(self, "ord_minus", ord_minus)

    def __setattr__(self, name, value):
        raise AttributeError("RatXi is immutable")

    @classmethod
    def zero(cls) -> "RatXi":
        return cls(())

    @classmethod
    def const(cls, value) -> "RatXi":
        return cls((value,))

    @classmethod
    def from_parts(cls, xin_power: int, inv_sq_power: int, scale=1) -> "RatXi":
        """scale * x^xin_power / (1 + x^2)^inv_sq_power."""
        num = [GaussRat()] * xin_power + [_as_gauss(scale)]
        return cls(num, inv_sq_power, inv_sq_power)

    def is_zero(self) -> bool:
        return not self.num

    def decay_degree(self) -> int:
        """Degree at infinity: deg(num) - ord_plus - ord_minus."""
        if not self.num:
            return -(10**9)
        return (len(self.num) - 1) - self.ord_plus - self.ord_minus

    def __add__(self, other: "RatXi") -> "RatXi":
        if not isinstance(other, RatXi):
            return NotImplemented
        a = max(self.ord_plus, other.ord_plus)
        b = max(self.ord_minus, other.ord_minus)
        left = _lift(self.num, a - self.ord_plus, b - self.ord_minus)
        right = _lift(other.num, a - other.ord_plus, b - other.ord_minus)
        return RatXi(p_add(left, right), a, b)

    def __neg__(self) -> "RatXi":
        return RatXi([-c for c in self.num], self.ord_plus, self.ord_minus)

    def __sub__(self, other: "RatXi") -> "RatXi":
        return self + (-other)

    def __mul__(self, other: "RatXi") -> "RatXi":
        if not isinstance(other, RatXi):
            return NotImplemented
        return RatXi(
            p_mul(self.num, other.num),
            self.ord_plus + other.ord_plus,
            self.ord_minus + other.ord_minus,
        )

    def scale(self, factor) -> "RatXi":
        return RatXi(p_scale(self.num, _as_gauss(factor)), self.ord_plus, self.ord_minus)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RatXi):
            return (
                self.num == other.num
                and self.ord_plus == other.ord_plus
                and self.ord_minus == other.ord_minus
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.num, self.ord_plus, self.ord_minus))

    def eval(self, x: complex) -> complex:
        num = sum(c.to_complex() * x**k for k, c in enumerate(self.num))
        return num / ((x - 1j) ** self.ord_plus * (x + 1j) ** self.ord_minus)

    def __str__(self) -> str:
        num = " + ".join(
            f"({coeff})*xin^{deg}" if deg else f"({coeff})"
            for deg, coeff in enumerate(self.num)
            if not coeff.is_zero()
        )
        if not num:
            return "0"
        denom = []
        if self.ord_plus:
            denom.append(f"(xin-i)^{self.ord_plus}")
        if self.ord_minus:
            denom.append(f"(xin+i)^{self.ord_minus}")
        return f"[{num}] / {' '.join(denom)}" if denom else f"[{num}]"

    def __repr__(self) -> str:
        return f"RatXi({self!s})"

    def to_json(self) -> dict:
        return {
            "num": [str(c) for c in self.num],
            "ord_plus": self.ord_plus,
            "ord_minus": self.ord_minus,
        }


def _lift(num: Poly, extra_plus: int, extra_minus: int) -> Poly:
    out = num
    for _ in range(extra_plus):
        out = p_mul(out, (-_I, GaussRat(1)))
    for _ in range(extra_minus):
        out = p_mul(out, (_I, GaussRat(1)))
    return out


def _upper_derivatives(f: RatXi, count: int) -> list[GaussRat]:
    """Values g^(m)(i) for m in 0..count-1, where g = num / (x+i)^ord_minus.

    Leibniz on num and (x+i)^(-b): the latter's r-th derivative at i is
    (-1)^r * b(b+1)...(b+r-1) * (2i)^(-b-r).
    """
    b = f.ord_minus
    poly_derivs: list[GaussRat] = []
    poly = f.num
    for _ in range(count):
        poly_derivs.append(p_eval(poly, _I))
        poly = p_diff(poly)
    inv_pow = _TWO_I ** (-b) if b else GaussRat(1)
    out: list[GaussRat] = []
    for m in range(count):
        total = GaussRat()
        binom = 1
        rising = 1
        sign = 1
        power = inv_pow
        for r in range(m + 1):
            term = poly_derivs[m - r] * power * (sign * binom * rising)
            total = total + term
            binom = binom * (m - r) // (r + 1)
            rising *= b + r
            sign = -sign
            power = power / _TWO_I
        out.append(total)
    return out


def rx_pi_plus(f: RatXi) -> RatXi:
    """Sum of principal parts at x = +i (the upper-pole projection).

    Requires decay at infinity; idempotent; the complement f - rx_pi_plus(f)
    has poles only at -i.
    """
    if f.is_zero():
        return f
    if f.decay_degree() > -1:
        raise NonDecayingError(f"decay degree {f.decay_degree()} > -1")
    a = f.ord_plus
    if a == 0:
        return RatXi.zero()
    derivs = _upper_derivatives(f, a)
    # c_k = g^(a-k)(i) / (a-k)!  for k = 1..a; rebuild sum c_k (x-i)^(a-k)
    factorial = [1]
    for k in range(1, a):
        factorial.append(factorial[-1] * k)
    num: Poly = ()
    basis: Poly = (GaussRat(1),)
    for k in range(a, 0, -1):
        coeff = derivs[a - k] / factorial[a - k]
        num = p_add(num, p_scale(basis, coeff))
        basis = p_mul(basis, (-_I, GaussRat(1)))
    return RatXi(num, a, 0)


def rx_diff(f: RatXi) -> RatXi:
    """Exact derivative d/dx."""
    a, b = f.ord_plus, f.ord_minus
    u: Poly = (-_I, GaussRat(1))  # x - i
    v: Poly = (_I, GaussRat(1))  # x + i
    term = p_mul(p_diff(f.num), p_mul(u, v))
    if a:
        term = p_add(term, p_scale(p_mul(f.num, v), GaussRat(-a)))
    if b:
        term = p_add(term, p_scale(p_mul(f.num, u), GaussRat(-b)))
    return RatXi(term, a + 1, b + 1)


def rx_integrate_line(f: RatXi) -> GaussRat:
    """Real-line integral, as w with integral = 2*pi*w.

    Closes the contour upward: integral = 2*pi*i*Res_{x=i} f, and the i is
    folded into the returned Gaussian rational.  Needs decay degree <= -2.
    """
    if f.is_zero():
        return GaussRat()
    if f.decay_degree() > -2:
        raise NonDecayingError(f"decay degree {f.decay_degree()} > -2")
    a = f.ord_plus
    if a == 0:
        return GaussRat()
    derivs = _upper_derivatives(f, a)
    factorial = 1
    for k in range(1, a):
        factorial *= k
    residue = derivs[a - 1] / factorial
    return _I * residue
