"""Clifford word algebra on n generators with c_i c_j + c_j c_i = -2 delta_ij.

Words are tuples of generator labels.  A label is either a literal int in
1..n or any other hashable object standing for a symbolic summation index
(the tensor module's IndexVar in practice).  Literal words reduce to a
canonical strictly increasing form with an accumulated sign, using
c_i c_i = -1 and c_i c_j = -c_j c_i.  Symbolic labels reduce only when
provably equal (identical label) or provably distinct (two different
literals); anything else stays unreduced, because two distinct bound names
may still take the same value under their summations.

The trace functional is normalized so that tr[id] = 2**(n/2).  Two engines
compute it: :func:`cw_trace` reduces a fully literal element and reads off
the empty-word coefficient, and :func:`trace_pairings` runs the generic
pairing recursion

    tr[c_{a_1} ... c_{a_m}] = sum_{j>=2} (-1)^j (-Delta(a_1, a_j)) tr[rest]

parameterized by a Delta callback, which is what lets the boundary pipeline
trace words with live summation indices without expanding them.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, Mapping, Sequence

Label = Hashable
Word = tuple[Label, ...]

# A Delta callback maps a label pair to weighted substitution branches:
# each branch is (integer multiplier, {label: replacement label}).  An empty
# list means the contraction vanishes.
DeltaBranch = tuple[int, dict]
DeltaFn = Callable[[Label, Label], list[DeltaBranch]]


class SymbolicIndexError(ValueError):
    """A literal-only operation met a symbolic generator label."""


def is_literal(label: Label) -> bool:
    return isinstance(label, int)


def reduce_literal_word(word: Sequence[int]) -> tuple[int, Word]:
    """Canonical form of a literal word: (sign, strictly increasing tuple)."""
    sign = 1
    out: list[int] = []
    for letter in word:
        if not is_literal(letter):
            raise SymbolicIndexError(f"non-literal generator label {letter!r}")
        pos = len(out)
        while pos > 0 and out[pos - 1] > letter:
            sign = -sign
            pos -= 1
        if pos > 0 and out[pos - 1] == letter:
            del out[pos - 1]
            sign = -sign
        else:
            out.insert(pos, letter)
    return sign, tuple(out)


def _is_zero_coeff(coeff: object) -> bool:
    probe = getattr(coeff, "is_zero", None)
    if callable(probe):
        return bool(probe())
    return coeff == 0


class CliffordElement:
    """Formal sum of Clifford words with coefficients in a caller ring.

    The coefficient ring must support +, unary -, *, and zero detection
    (an ``is_zero()`` method or equality with 0).  Ints, Fractions, and
    PiScalar all qualify.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Word, object] | None = None):
        self.n = n
        clean: dict[Word, object] = {}
        if terms:
            for word, coeff in terms.items():
                if not _is_zero_coeff(coeff):
                    clean[tuple(word)] = coeff
        self.terms = clean

    @classmethod
    def from_word(cls, n: int, word: Iterable[Label], coeff: object = 1) -> "CliffordElement":
        return cls(n, {tuple(word): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        if not isinstance(other, CliffordElement):
            return NotImplemented
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        merged = dict(self.terms)
        for word, coeff in other.terms.items():
            if word in merged:
                merged[word] = merged[word] + coeff
            else:
                merged[word] = coeff
        return CliffordElement(self.n, merged)

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(self.n, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return self + (-other)

    def scale(self, factor: object) -> "CliffordElement":
        return CliffordElement(self.n, {w: c * factor for w, c in self.terms.items()})

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        return cw_mul(self, other)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CliffordElement):
            return self.n == other.n and self.terms == other.terms
        return NotImplemented

    def __repr__(self) -> str:
        if not self.terms:
            return "CliffordElement(0)"
        parts = []
        for word in sorted(self.terms, key=_word_sort_key):
            body = "".join(f"c({label})" for label in word) or "1"
            parts.append(f"({self.terms[word]})*{body}")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [
            {"word": [repr(label) for label in word], "coeff": str(coeff)}
            for word, coeff in sorted(self.terms.items(), key=lambda kv: _word_sort_key(kv[0]))
        ]


def _word_sort_key(word: Word) -> tuple:
    return (len(word), tuple(str(label) for label in word))


def cw_mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    """Bilinear product with reduction on the provably decidable letter pairs.

    Fully literal words reduce completely.  Words containing symbolic labels
    are concatenated and then simplified only where adjacent labels are
    identical (c_x c_x = -1) or both literal.
    """
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    out: dict[Word, object] = {}
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            sign, word = _reduce_mixed_word(wa + wb)
            coeff = ca * cb
            if sign == -1:
                coeff = -coeff
            if word in out:
                out[word] = out[word] + coeff
            else:
                out[word] = coeff
    return CliffordElement(a.n, out)


def _reduce_mixed_word(word: Word) -> tuple[int, Word]:
    """Sort literal letters where legal; cancel identical adjacent labels.

    Symbolic labels act as barriers: literals commute (with sign) only within
    runs not crossing a symbolic label, and identical labels cancel when they
    become adjacent.  This is exactly the "provably equal or distinct" rule.
    """
    if all(is_literal(label) for label in word):
        return reduce_literal_word(word)
    sign = 1
    letters = list(word)
    changed = True
    while changed:
        changed = False
        pos = 0
        while pos < len(letters) - 1:
            left, right = letters[pos], letters[pos + 1]
            if left == right:
                del letters[pos : pos + 2]
                sign = -sign
                changed = True
                pos = max(pos - 1, 0)
                continue
            if is_literal(left) and is_literal(right) and left > right:
                letters[pos], letters[pos + 1] = right, left
                sign = -sign
                changed = True
            pos += 1
    return sign, tuple(letters)


def tr_id(n: int) -> int:
    """Dimension of the spinor representation: tr[id] = 2**(n/2)."""
    if n % 2:
        raise ValueError(f"odd dimension {n}")
    return 2 ** (n // 2)


def cw_trace(a: CliffordElement, n: int | None = None) -> object:
    """Trace of a fully literal element, in absolute units (times tr[id]).

    Returns the coefficient-ring value coeff(empty word) * 2**(n/2).
    Raises SymbolicIndexError if any word still carries a symbolic label.
    """
    if n is None:
        n = a.n
    scale = tr_id(n)
    total: object | None = None
    for word, coeff in a.terms.items():
        sign, reduced = reduce_literal_word(word)  # raises on symbolic labels
        if reduced:
            continue
        contrib = coeff * scale if sign == 1 else -(coeff * scale)
        total = contrib if total is None else total + contrib
    if total is None:
        zero = 0
        if a.terms:
            sample = next(iter(a.terms.values()))
            zero = sample - sample
        return zero
    return total


def literal_delta(a: Label, b: Label) -> list[DeltaBranch]:
    """Delta callback for fully literal words: plain Kronecker delta."""
    if not (is_literal(a) and is_literal(b)):
        raise SymbolicIndexError(f"symbolic label in literal trace: {a!r}, {b!r}")
    return [(1, {})] if a == b else []


def trace_pairings(word: Word, delta: DeltaFn) -> list[tuple[int, dict]]:
    """All full pairings of a word, weighted by signs and Delta branches.

    Returns a list of (multiplier, substitution map) pairs such that

        tr[word] = sum over pairs of multiplier * (traced remainder under
                   the substitution) * tr[id]

    where the substitution map sends symbolic labels to the labels they were
    contracted with.  Odd-length words return an empty list.  The engine
    applies each branch's substitution to the remaining letters before
    recursing, so chained contractions compose correctly.
    """
    results: list[tuple[int, dict]] = []
    if len(word) % 2:
        return results

    def recurse(letters: tuple, mult: int, subst: dict) -> None:
        if not letters:
            results.append((mult, subst))
            return
        head = letters[0]
        for j in range(1, len(letters)):
            partner = letters[j]
            # (-1)^j here is the 1-based (-1)^(j+1) crossing sign with the
            # minus from -Delta already folded in; j=1 gives tr[c_a c_b] =
            # -delta_ab tr[id].
            pair_sign = -1 if j % 2 == 1 else 1
            for branch_mult, branch_subst in delta(head, partner):
                if branch_mult == 0:
                    continue
                rest = letters[1:j] + letters[j + 1 :]
                if branch_subst:
                    rest = tuple(branch_subst.get(label, label) for label in rest)
                combined = {
                    key: branch_subst.get(val, val) for key, val in subst.items()
                }
                combined.update(branch_subst)
                recurse(rest, mult * pair_sign * branch_mult, combined)

    recurse(tuple(word), 1, {})
    return results
