"""Exact surface moments of covariable monomials over unit spheres.

The boundary computation integrates monomials in the tangential covariables
over the unit sphere S^(d-1) in d variables (d = 5 here: one dimension is
spent on the normal direction).  The closed form is a Gamma-function ratio,

    moment(alpha) = 2 * prod_i Gamma((alpha_i + 1)/2) / Gamma((|alpha| + d)/2)

for all exponents even, and 0 whenever any exponent is odd.  Every
half-integer Gamma value is a rational multiple of sqrt(pi) and the sqrt(pi)
factors always combine to an integer power of pi, so the result is exact as
a PiScalar (for d = 5 every even moment is rational * pi^2).

Equivalent pairing form, used when the exponents live on symbolic indices:

    integral of xi_{i_1} ... xi_{i_2k} =
        pairing_constant(k) * sum over perfect matchings of delta products

with pairing_constant(k) = area / ((d)(d+2)...(d+2k-2)).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .scalar import PiScalar

MAX_TOTAL_DEGREE = 8

TANGENTIAL_COUNT = 5


class MomentDegreeError(ValueError):
    """Total monomial degree beyond the engine bound."""


def _half_gamma(m: int) -> Fraction:
    """Gamma(m + 1/2) / sqrt(pi) for integer m >= 0."""
    out = Fraction(1)
    # Gamma(m + 1/2) = (2m)! / (4^m m!) * sqrt(pi), built up incrementally
    for k in range(m):
        out *= Fraction(2 * k + 1, 2)
    return out


def _int_gamma(k: int) -> Fraction:
    """Gamma(k) for integer k >= 1."""
    out = Fraction(1)
    for j in range(2, k):
        out *= j
    return out


@lru_cache(maxsize=None)
def _even_moment(half_exponents: tuple[int, ...], d: int) -> PiScalar:
    """Moment for exponents alpha = 2 * half_exponents, all even, d slots."""
    total = 2 * sum(half_exponents)
    numerator = Fraction(2)
    sqrt_pi_count = d
    for m in half_exponents:
        numerator *= _half_gamma(m)
    s2 = total + d  # twice the denominator's Gamma argument
    if s2 % 2 == 0:
        denominator = _int_gamma(s2 // 2)
    else:
        denominator = _half_gamma((s2 - 1) // 2)
        sqrt_pi_count -= 1
    if sqrt_pi_count % 2:
        raise AssertionError("sqrt(pi) factors failed to pair up")
    return PiScalar.of(numerator / denominator, sqrt_pi_count // 2)


def sphere_moment(alpha: Sequence[int], d: int = TANGENTIAL_COUNT) -> PiScalar:
    """Integral of prod_i xi_i^alpha_i over the unit sphere S^(d-1).

    alpha may be shorter than d (missing exponents are zero).  Zero for any
    odd exponent; otherwise the exact Gamma-ratio value.
    """
    if d < 2:
        raise ValueError("need at least a circle")
    if len(alpha) > d:
        raise ValueError(f"{len(alpha)} exponents for {d} variables")
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    total = sum(alpha)
    if total > MAX_TOTAL_DEGREE:
        raise MomentDegreeError(f"degree {total} > {MAX_TOTAL_DEGREE}")
    if any(a % 2 for a in alpha):
        return PiScalar.zero()
    halves = tuple(sorted((a // 2 for a in alpha), reverse=True))
    return _even_moment(halves, d)


def pairing_constant(k: int, d: int = TANGENTIAL_COUNT) -> PiScalar:
    """Coefficient of each delta-matching in a degree-2k sphere integral."""
    if k < 0:
        raise ValueError("negative pairing order")
    if 2 * k > MAX_TOTAL_DEGREE:
        raise MomentDegreeError(f"degree {2 * k} > {MAX_TOTAL_DEGREE}")
    scale = Fraction(1)
    for j in range(k):
        scale /= d + 2 * j
    return sphere_moment((), d).scale(scale)


def perfect_matchings(items: Sequence) -> list[list[tuple]]:
    """All ways to pair up an even-length sequence, as lists of pairs.

    The first element of each pair precedes the second in input order, and
    pairings keep the leftmost unpaired element first, so the output order
    is deterministic.  (2k-1)!! matchings for 2k items.
    """
    if len(items) % 2:
        raise ValueError("cannot pair an odd count")
    if not items:
        return [[]]
    head, rest = items[0], list(items[1:])
    out: list[list[tuple]] = []
    for pos, partner in enumerate(rest):
        remaining = rest[:pos] + rest[pos + 1 :]
        for tail in perfect_matchings(remaining):
            out.append([(head, partner)] + tail)
    return out


def moment_via_pairings(alpha: Sequence[int], d: int = TANGENTIAL_COUNT) -> PiScalar:
    """Recompute sphere_moment through the matching formula (consistency check).

    Expands the monomial into a list of repeated indices, counts the
    matchings whose deltas all close, and multiplies by pairing_constant.
    """
    if any(a % 2 for a in alpha):
        return PiScalar.zero()
    letters: list[int] = []
    for idx, count in enumerate(alpha):
        letters.extend([idx] * count)
    closed = sum(
        1
        for matching in perfect_matchings(letters)
        if all(a == b for a, b in matching)
    )
    return pairing_constant(len(letters) // 2, d).scale(closed)
