"""Indexed-symbol algebra for the product structure at the boundary point.

The symbols are the entries of the structure matrix and its first
derivatives, all evaluated at the distinguished boundary point:

    a[p,h]      entries of the orthogonal involution (symmetric: a[p,h]=a[h,p])
    d[j]a[p,h]  coordinate derivative of a[p,h] in direction j
    nj[al,be,ga] contractions of the covariant derivative of the structure
                 (kept atomic; no rewrite to d[.]a is attempted)
    hp          the normal metric derivative h'(0)
    delta[i,j]  Kronecker delta (resolved eagerly wherever it appears)

Index slots are either literal ints 1..6 (6 is the inward normal direction)
or bound summation indices with a declared range: full (1..6) or tangential
(1..5).  A monomial is a multiset of factors plus its bound declarations and
a power of hp; a polynomial maps canonical monomials to coefficients in a
caller-supplied ring (PiScalar, or richer pairs further up the stack).

Canonicalization renames bound indices by exhaustive minimal-label search
(monomials here never carry more than ~6 bound names, so brute force over
assignments is cheap and obviously correct).

``apply_relations`` rewrites modulo the consequences of orthogonality and
involutivity of the structure matrix:

    R1  sum_p a[p,x] a[p,y] = delta[x,y]           (full-range p only)
    R2  a tangential-range bound sum equals the full-range sum minus the
        normal-slot term
    R3  sum_h a[h,x] d[j]a[h,y] is antisymmetric under x <-> y
        (in particular zero for x = y)

R3 is confluence-sensitive, so instead of a directed rewrite the normal form
takes the minimum over all orientation choices, carrying signs into the
coefficients.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Mapping, NamedTuple, Sequence

N_DIM = 6
NORMAL = N_DIM  # literal index of the inward normal direction

FULL = "f"
TANGENT = "t"

_RANGE_SIZE = {FULL: N_DIM, TANGENT: N_DIM - 1}
_RANGE_TEXT = {FULL: f"1..{N_DIM}", TANGENT: f"1..{N_DIM - 1}"}


class Idx(NamedTuple):
    """A bound summation index: a name plus its range tag ('f' or 't')."""

    name: str
    rng: str

    def __repr__(self) -> str:
        return f"{self.name}:{self.rng}"


Slot = "Idx | int"


def range_size(rng: str) -> int:
    return _RANGE_SIZE[rng]


def range_values(slot: Slot) -> tuple[int, ...]:
    if isinstance(slot, int):
        return (slot,)
    return tuple(range(1, range_size(slot.rng) + 1))


def slot_in_range(value: int, slot: Slot) -> bool:
    if isinstance(slot, int):
        return value == slot
    return 1 <= value <= range_size(slot.rng)


# Factors are plain tagged tuples; slots inside are Idx or int.
#   ("A", s1, s2)          s1 <= s2 in slot order (symmetric)
#   ("DA", d, s1, s2)      s1 <= s2 (symmetric pair; d is the direction)
#   ("NJ", a, b, g)        ordered
#   ("DELTA", s1, s2)      s1 <= s2 (symmetric)
Factor = tuple


class IndexCountError(ValueError):
    """A bound index appears more often than Einstein summation allows."""


def _slot_key(slot: Slot) -> tuple:
    if isinstance(slot, int):
        return (0, slot, "", "")
    return (1, 0, slot.rng, slot.name)


def factor_a(s1: Slot, s2: Slot) -> Factor:
    s1, s2 = sorted((s1, s2), key=_slot_key)
    return ("A", s1, s2)


def factor_da(direction: Slot, s1: Slot, s2: Slot) -> Factor:
    s1, s2 = sorted((s1, s2), key=_slot_key)
    return ("DA", direction, s1, s2)


def factor_nj(alpha: Slot, beta: Slot, gamma: Slot) -> Factor:
    return ("NJ", alpha, beta, gamma)


def factor_delta(s1: Slot, s2: Slot) -> Factor:
    s1, s2 = sorted((s1, s2), key=_slot_key)
    return ("DELTA", s1, s2)


def factor_slots(factor: Factor) -> tuple[Slot, ...]:
    return factor[1:]


def _rebuild(factor: Factor, slots: Sequence[Slot]) -> Factor:
    kind = factor[0]
    if kind == "A":
        return factor_a(slots[0], slots[1])
    if kind == "DA":
        return factor_da(slots[0], slots[1], slots[2])
    if kind == "NJ":
        return factor_nj(slots[0], slots[1], slots[2])
    if kind == "DELTA":
        return factor_delta(slots[0], slots[1])
    raise ValueError(f"unknown factor kind {kind}")


def substitute_factor(factor: Factor, subst: Mapping[Idx, Slot]) -> Factor:
    slots = [subst.get(s, s) if isinstance(s, Idx) else s for s in factor_slots(factor)]
    return _rebuild(factor, slots)


class TensorMonomial:
    """Immutable product of factors with bound-index declarations and hp^k.

    Identity (equality, hashing) is by the stored representation, so always
    construct through :func:`canonicalize` when forms must be comparable.
    """

    __slots__ = ("hp", "factors", "_key")

    def __init__(self, factors: Iterable[Factor] = (), hp: int = 0):
        self.hp = hp
        self.factors = tuple(factors)
        self._key = (self.hp, self.factors)

    def bound_indices(self) -> dict[Idx, int]:
        """Bound indices with their occurrence counts across all slots."""
        counts: dict[Idx, int] = {}
        for factor in self.factors:
            for slot in factor_slots(factor):
                if isinstance(slot, Idx):
                    counts[slot] = counts.get(slot, 0) + 1
        return counts

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TensorMonomial):
            return self._key == other._key
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"TensorMonomial({to_text(self)!r})"


ONE = TensorMonomial()


def canonicalize(monomial: TensorMonomial) -> TensorMonomial:
    """Unique representative under bound renaming, factor order, symmetry.

    Exhaustive minimal-label search: try every assignment of the bound names
    to i0..i{k-1}, serialize, keep the smallest.  Idempotent by construction.
    Raises IndexCountError if a bound index appears more than twice.
    """
    counts = monomial.bound_indices()
    for idx, count in counts.items():
        if count > 2:
            raise IndexCountError(f"index {idx} appears {count} times")
    names = sorted(counts, key=lambda idx: (idx.rng, idx.name))
    if not names:
        return TensorMonomial(sorted(monomial.factors, key=_factor_sort_key), monomial.hp)

    best: tuple | None = None
    best_factors: tuple | None = None
    for perm in itertools.permutations(range(len(names))):
        subst = {
            old: Idx(f"i{perm[pos]}", old.rng) for pos, old in enumerate(names)
        }
        factors = tuple(
            sorted(
                (substitute_factor(f, subst) for f in monomial.factors),
                key=_factor_sort_key,
            )
        )
        key = tuple(_factor_sort_key(f) for f in factors)
        if best is None or key < best:
            best = key
            best_factors = factors
    assert best_factors is not None
    return TensorMonomial(best_factors, monomial.hp)


def _factor_sort_key(factor: Factor) -> tuple:
    return (factor[0],) + tuple(_slot_key(s) for s in factor_slots(factor))


class TensorPoly:
    """Linear combination of canonical monomials over a caller ring.

    Coefficients must support +, unary -, * int, and zero detection
    (is_zero() or == 0).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[TensorMonomial, object] | None = None):
        clean: dict[TensorMonomial, object] = {}
        if terms:
            for monomial, coeff in terms.items():
                if not _is_zero_coeff(coeff):
                    clean[monomial] = coeff
        self.terms = clean

    @classmethod
    def single(cls, monomial: TensorMonomial, coeff: object) -> "TensorPoly":
        return cls({canonicalize(monomial): coeff})

    def add_term(self, monomial: TensorMonomial, coeff: object) -> None:
        """Mutating accumulate used while building; canonicalizes the key."""
        key = canonicalize(monomial)
        if key in self.terms:
            total = self.terms[key] + coeff
            if _is_zero_coeff(total):
                del self.terms[key]
            else:
                self.terms[key] = total
        elif not _is_zero_coeff(coeff):
            self.terms[key] = coeff

    def __add__(self, other: "TensorPoly") -> "TensorPoly":
        if not isinstance(other, TensorPoly):
            return NotImplemented
        result = TensorPoly(self.terms)
        for monomial, coeff in other.terms.items():
            result.add_term(monomial, coeff)
        return result

    def __neg__(self) -> "TensorPoly":
        return TensorPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TensorPoly):
            return self.terms == other.terms
        return NotImplemented

    def __repr__(self) -> str:
        if not self.terms:
            return "TensorPoly(0)"
        lines = [
            f"  ({coeff}) * {to_text(monomial)}"
            for monomial, coeff in sorted(
                self.terms.items(), key=lambda kv: to_text(kv[0])
            )
        ]
        return "TensorPoly(\n" + "\n".join(lines) + "\n)"


def _is_zero_coeff(coeff: object) -> bool:
    probe = getattr(coeff, "is_zero", None)
    if callable(probe):
        return bool(probe())
    return coeff == 0


# ---------------------------------------------------------------------------
# relation rewriting


def resolve_deltas(
    factors: Sequence[Factor],
) -> tuple[int, tuple[Factor, ...]] | None:
    """Eagerly resolve DELTA factors by substitution; None if the term dies.

    Returns (integer multiplier, remaining factors).  The multiplier picks up
    range sizes when a contraction closes a loop (delta with both slots the
    same bound index that occurs nowhere else).
    """
    mult = 1
    work = list(factors)
    while True:
        delta_pos = next((k for k, f in enumerate(work) if f[0] == "DELTA"), None)
        if delta_pos is None:
            return mult, tuple(work)
        _, s1, s2 = work.pop(delta_pos)
        if isinstance(s1, int) and isinstance(s2, int):
            if s1 != s2:
                return None
            continue
        if s1 == s2:
            # delta[x,x] summed over x, with no other occurrence in this delta
            other_occurrences = sum(
                1 for f in work for s in factor_slots(f) if s == s1
            )
            if other_occurrences == 0:
                mult *= range_size(s1.rng)
            # if x occurs elsewhere the delta is redundant: delta[x,x] = 1
            # per value of x, and the remaining occurrences keep x alive
            continue
        # one or both symbolic, different: substitute the looser by the tighter
        keep, drop = _substitution_order(s1, s2)
        if keep is None:
            return None
        subst = {drop: keep}
        work = [substitute_factor(f, subst) for f in work]


def _substitution_order(s1: Slot, s2: Slot) -> tuple[Slot | None, Idx | None]:
    """Pick which slot survives a delta/pairing merge: (kept, dropped)."""
    if isinstance(s1, int):
        s1, s2 = s2, s1
    # now s1 is an Idx
    if isinstance(s2, int):
        if not slot_in_range(s2, s1):
            return None, None
        return s2, s1
    # both Idx: keep the tighter range, else the first
    if s1.rng == s2.rng:
        return s1, s2
    if s1.rng == TANGENT:
        return s1, s2
    return s2, s1


def apply_relations(poly: TensorPoly) -> TensorPoly:
    """Full relation normal form: R2-expand, contract R1, orient/kill R3.

    Semantics-preserving on every structure instance (the eval_numeric
    property tests pin this); used both to present reduced results and to
    zero-test differences between normalization levels.
    """
    result = TensorPoly()
    for monomial, coeff in poly.terms.items():
        for mult, expanded in _expand_tangent(monomial):
            reduced = _relation_normal_form(expanded)
            if reduced is None:
                continue
            signed_mult, normal = reduced
            result.add_term(normal, coeff * (mult * signed_mult))
    return result


def _expand_tangent(
    monomial: TensorMonomial,
) -> list[tuple[int, TensorMonomial]]:
    """R2: rewrite every tangential bound sum as full-range minus normal."""
    out: list[tuple[int, TensorMonomial]] = []

    def recurse(factors: tuple[Factor, ...], hp: int, mult: int) -> None:
        tangent = next(
            (
                slot
                for f in factors
                for slot in factor_slots(f)
                if isinstance(slot, Idx) and slot.rng == TANGENT
            ),
            None,
        )
        if tangent is None:
            out.append((mult, TensorMonomial(factors, hp)))
            return
        as_full = {tangent: Idx(tangent.name, FULL)}
        recurse(tuple(substitute_factor(f, as_full) for f in factors), hp, mult)
        as_normal = {tangent: NORMAL}
        recurse(tuple(substitute_factor(f, as_normal) for f in factors), hp, -mult)

    recurse(monomial.factors, monomial.hp, 1)
    return out


def _relation_normal_form(
    monomial: TensorMonomial,
) -> tuple[int, TensorMonomial] | None:
    """Signed normal form of a tangent-free monomial under R1 + R3.

    Explores the full rewrite graph: nodes are canonicalized monomials with
    an integer multiplier (sign times any range-size factors picked up by
    closed delta loops); edges are single R1 contractions and single R3
    orientation swaps.  R3 swaps are involutions, so the reachable terminal
    set is the same from any two equivalent starting forms, which is what
    makes the minimum-terminal choice a well-defined normal form.

    Returns None when the monomial is identically zero, which the search
    detects as the same terminal form reachable with two different
    multipliers (m1*X = m2*X forces X = 0).
    """
    start = _canonical_state(1, monomial)
    if start is None:
        return None
    frontier = [start]
    seen: set[tuple[int, tuple]] = set()
    terminals: dict[tuple, tuple[int, TensorMonomial]] = {}
    while frontier:
        mult, mono = frontier.pop()
        state_key = (mult, mono._key)
        if state_key in seen:
            continue
        seen.add(state_key)
        r1 = list(_r1_moves(mono))
        if not r1:
            # R1-irreducible: record as a terminal form.  R3 swaps do not
            # reduce anything, so they cannot disqualify a terminal; they
            # only connect alternative orientations of it.
            prior = terminals.get(mono._key)
            if prior is not None and prior[0] != mult:
                return None  # reachable with two multipliers: the form is 0
            terminals[mono._key] = (mult, mono)
        for move_mult, move_mono in r1 + list(_r3_moves(mono)):
            state = _canonical_state(mult * move_mult, move_mono)
            if state is not None:
                frontier.append(state)
    if not terminals:
        return None
    best_key = min(terminals, key=lambda k: to_text(terminals[k][1]))
    return terminals[best_key]


def _canonical_state(
    mult: int, monomial: TensorMonomial
) -> tuple[int, TensorMonomial] | None:
    resolved = resolve_deltas(monomial.factors)
    if resolved is None:
        return None
    extra, factors = resolved
    return mult * extra, canonicalize(TensorMonomial(factors, monomial.hp))


def _r1_moves(monomial: TensorMonomial):
    """Single R1 contractions: a[p,x] a[p,y] -> delta[x,y], p full-range."""
    factors = monomial.factors
    counts = monomial.bound_indices()
    positions: dict[Idx, list[int]] = {}
    for pos, factor in enumerate(factors):
        if factor[0] != "A":
            continue
        for slot in factor_slots(factor):
            if isinstance(slot, Idx):
                positions.setdefault(slot, []).append(pos)
    for idx, pos_list in positions.items():
        if idx.rng != FULL or counts[idx] != 2:
            continue
        if len(pos_list) != 2 or pos_list[0] == pos_list[1]:
            continue
        pos_a, pos_b = pos_list
        others = [
            s
            for pos in (pos_a, pos_b)
            for s in factor_slots(factors[pos])
            if s != idx
        ]
        remaining = [f for k, f in enumerate(factors) if k not in (pos_a, pos_b)]
        remaining.append(factor_delta(others[0], others[1]))
        yield 1, TensorMonomial(tuple(remaining), monomial.hp)


def _r3_moves(monomial: TensorMonomial):
    """Single R3 swaps: sum_h a[h,x] d[j]a[h,y] -> -sum_h a[h,y] d[j]a[h,x]."""
    factors = monomial.factors
    counts = monomial.bound_indices()
    for pos_a, fa in enumerate(factors):
        if fa[0] != "A":
            continue
        for pos_d, fd in enumerate(factors):
            if fd[0] != "DA":
                continue
            for idx in (fa[1], fa[2]):
                if not isinstance(idx, Idx):
                    continue
                if idx.rng != FULL or counts.get(idx) != 2:
                    continue
                if idx not in (fd[2], fd[3]):
                    continue
                free_a = fa[1] if fa[2] == idx else fa[2]
                free_d = fd[2] if fd[3] == idx else fd[3]
                new = list(factors)
                new[pos_a] = factor_a(idx, free_d)
                new[pos_d] = factor_da(fd[1], idx, free_a)
                yield -1, TensorMonomial(tuple(new), monomial.hp)
                break  # one shared index per factor pair drives the swap


# ---------------------------------------------------------------------------
# numeric evaluation


def eval_monomial(monomial: TensorMonomial, inst) -> float:
    """Literal summation of one monomial on a numeric structure instance.

    ``inst`` provides numpy arrays ``a`` (6x6), ``da`` (6x6x6, first axis the
    direction), ``nj`` (6x6x6), and the scalar ``hp``.  Indices are 1-based in
    the symbols and 0-based in the arrays.
    """
    import numpy as np

    counts = monomial.bound_indices()
    for idx, count in counts.items():
        if count > 2:
            raise IndexCountError(f"index {idx} appears {count} times")
    letters = {idx: chr(ord("a") + k) for k, idx in enumerate(sorted(counts))}

    arrays = {
        "A": np.asarray(inst.a, dtype=float),
        "DA": np.asarray(inst.da, dtype=float),
        "NJ": np.asarray(inst.nj, dtype=float),
        "DELTA": np.eye(N_DIM),
    }
    operands = []
    scripts = []
    for factor in monomial.factors:
        array = arrays[factor[0]]
        slots = factor_slots(factor)
        # index literal slots away first, highest axis first so positions
        # of the earlier axes stay valid
        for axis in sorted(range(len(slots)), reverse=True):
            if isinstance(slots[axis], int):
                array = np.take(array, slots[axis] - 1, axis=axis)
        script = ""
        for slot in slots:
            if isinstance(slot, int):
                continue
            axis = len(script)
            script += letters[slot]
            if slot.rng == TANGENT:
                slicer = [slice(None)] * array.ndim
                slicer[axis] = slice(0, N_DIM - 1)
                array = array[tuple(slicer)]
        operands.append(array)
        scripts.append(script)
    value = float(np.einsum(",".join(scripts) + "->", *operands)) if operands else 1.0
    return value * float(inst.hp) ** monomial.hp


def eval_numeric(poly: TensorPoly, inst, coeff_to_float=None) -> float:
    """Evaluate a polynomial numerically; coefficients default to to_float()."""
    if coeff_to_float is None:
        coeff_to_float = lambda c: c.to_float()
    total = 0.0
    for monomial, coeff in poly.terms.items():
        total += coeff_to_float(coeff) * eval_monomial(monomial, inst)
    return total


# ---------------------------------------------------------------------------
# text form: "sum{h:1..6, i:1..5} a[h,i] d[i]a[h,n] hp"


def _slot_text(slot: Slot) -> str:
    if isinstance(slot, int):
        return "n" if slot == NORMAL else str(slot)
    return slot.name


def _factor_text(factor: Factor) -> str:
    kind = factor[0]
    slots = [_slot_text(s) for s in factor_slots(factor)]
    if kind == "A":
        return f"a[{slots[0]},{slots[1]}]"
    if kind == "DA":
        return f"d[{slots[0]}]a[{slots[1]},{slots[2]}]"
    if kind == "NJ":
        return f"nj[{slots[0]},{slots[1]},{slots[2]}]"
    if kind == "DELTA":
        return f"delta[{slots[0]},{slots[1]}]"
    raise ValueError(f"unknown factor kind {kind}")


def to_text(monomial: TensorMonomial) -> str:
    """Render in the fixture grammar; inverse of :func:`parse_monomial`."""
    counts = monomial.bound_indices()
    parts = []
    if counts:
        decls = ", ".join(
            f"{idx.name}:{_RANGE_TEXT[idx.rng]}" for idx in sorted(counts)
        )
        parts.append("sum{" + decls + "}")
    parts.extend(_factor_text(f) for f in monomial.factors)
    if monomial.hp == 1:
        parts.append("hp")
    elif monomial.hp > 1:
        parts.append(f"hp^{monomial.hp}")
    return " ".join(parts) if parts else "1"


_SUM_RE = re.compile(r"^sum\{([^}]*)\}\s*(.*)$")
_FACTOR_RE = re.compile(
    r"a\[([^\],]+),([^\]]+)\]"
    r"|d\[([^\]]+)\]a\[([^\],]+),([^\]]+)\]"
    r"|nj\[([^\],]+),([^\],]+),([^\]]+)\]"
    r"|delta\[([^\],]+),([^\]]+)\]"
    r"|hp(\^\d+)?"
)


def parse_monomial(text: str) -> TensorMonomial:
    """Parse the fixture text grammar back into a (canonicalized) monomial."""
    text = text.strip()
    if text == "1":
        return ONE
    ranges: dict[str, str] = {}
    match = _SUM_RE.match(text)
    body = text
    if match:
        decls, body = match.groups()
        for decl in decls.split(","):
            name, _, rng_text = decl.strip().partition(":")
            rng_text = rng_text.strip()
            if rng_text == _RANGE_TEXT[FULL]:
                ranges[name.strip()] = FULL
            elif rng_text == _RANGE_TEXT[TANGENT]:
                ranges[name.strip()] = TANGENT
            else:
                raise ValueError(f"bad range declaration {decl!r}")

    def slot(token: str) -> Slot:
        token = token.strip()
        if token == "n":
            return NORMAL
        if token.isdigit():
            return int(token)
        if token not in ranges:
            raise ValueError(f"undeclared index {token!r} in {text!r}")
        return Idx(token, ranges[token])

    factors: list[Factor] = []
    hp = 0
    pos = 0
    body = body.strip()
    while pos < len(body):
        if body[pos].isspace():
            pos += 1
            continue
        match = _FACTOR_RE.match(body, pos)
        if not match:
            raise ValueError(f"cannot parse factor at {body[pos:]!r}")
        groups = match.groups()
        if groups[0] is not None:
            factors.append(factor_a(slot(groups[0]), slot(groups[1])))
        elif groups[2] is not None:
            factors.append(factor_da(slot(groups[2]), slot(groups[3]), slot(groups[4])))
        elif groups[5] is not None:
            factors.append(factor_nj(slot(groups[5]), slot(groups[6]), slot(groups[7])))
        elif groups[8] is not None:
            factors.append(factor_delta(slot(groups[8]), slot(groups[9])))
        else:
            hp += int(groups[10][1:]) if groups[10] else 1
        pos = match.end()
    return canonicalize(TensorMonomial(factors, hp))
