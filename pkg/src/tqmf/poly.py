"""Exact graded polynomial arithmetic over Z and Z/m.

Every variable carries a positive integer weight (the algebraic grading;
topological degrees are twice these).  Polynomials are sparse maps from
dense exponent tuples to nonzero integer coefficients.

>>> D = RingSpec.from_weights({"a1": 1, "a2": 2})
>>> a1, a2 = D.gens()
>>> b2 = a1 * a1 + 4 * a2
>>> str(b2), b2.weight()
('a1^2 + 4*a2', 2)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping


class RingMismatch(ValueError):
    pass


class MissingImage(KeyError):
    pass


@dataclass(frozen=True)
class VariableSpec:
    name: str
    weight: int

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError(f"variable {self.name!r} needs a positive weight")


@dataclass(frozen=True)
class RingSpec:
    """Ordered variables plus a coefficient modulus (0 means the integers)."""

    variables: tuple[VariableSpec, ...]
    modulus: int = 0

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if self.modulus < 0 or self.modulus == 1:
            raise ValueError("modulus must be 0 or at least 2")

    @classmethod
    def from_weights(cls, weights: Mapping[str, int], modulus: int = 0) -> "RingSpec":
        return cls(tuple(VariableSpec(n, w) for n, w in weights.items()), modulus)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(v.weight for v in self.variables)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a variable of this ring") from None

    def gen(self, name: str) -> "GradedPolynomial":
        e = [0] * self.nvars
        e[self.index(name)] = 1
        return GradedPolynomial(self, {tuple(e): 1})

    def gens(self) -> tuple["GradedPolynomial", ...]:
        return tuple(self.gen(n) for n in self.names)

    def one(self) -> "GradedPolynomial":
        return self.constant(1)

    def zero(self) -> "GradedPolynomial":
        return GradedPolynomial(self, {})

    def constant(self, c: int) -> "GradedPolynomial":
        return GradedPolynomial(self, {(0,) * self.nvars: c})

    def monomial(self, exps: Iterable[int], coeff: int = 1) -> "GradedPolynomial":
        return GradedPolynomial(self, {tuple(exps): coeff})

    def monomial_weight(self, exps: tuple[int, ...]) -> int:
        return sum(e * w for e, w in zip(exps, self.weights))

    def reduce(self, c: int) -> int:
        return c % self.modulus if self.modulus else c

    def extend(self, extra: Iterable[VariableSpec]) -> "RingSpec":
        return RingSpec(self.variables + tuple(extra), self.modulus)

    def parse(self, text: str) -> "GradedPolynomial":
        return parse_polynomial(self, text)


class GradedPolynomial:
    """Immutable sparse polynomial in a :class:`RingSpec`."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: RingSpec, terms: Mapping[tuple[int, ...], int]):
        m = ring.modulus
        clean = {}
        for e, c in terms.items():
            if m:
                c %= m
            if c:
                if len(e) != ring.nvars:
                    raise ValueError(f"exponent {e} has wrong length for {ring.names}")
                clean[e] = c
        self.ring = ring
        self.terms = clean

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "GradedPolynomial":
        if isinstance(other, GradedPolynomial):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring.names} vs {other.ring.names}")
            return other
        if isinstance(other, int):
            return self.ring.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return GradedPolynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPolynomial(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scalar_mul(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return GradedPolynomial(self.ring, out)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scalar_mul(other)
        return NotImplemented

    def scalar_mul(self, k: int) -> "GradedPolynomial":
        return GradedPolynomial(self.ring, {e: k * c for e, c in self.terms.items()})

    def __pow__(self, n: int) -> "GradedPolynomial":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # -- grading ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def weights_present(self) -> set[int]:
        return {self.ring.monomial_weight(e) for e in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.weights_present()) <= 1

    def weight(self) -> int | None:
        """Weight of a homogeneous polynomial; ``None`` for zero or mixed."""
        ws = self.weights_present()
        if len(ws) != 1:
            return None
        return ws.pop()

    def homogeneous_part(self, w: int) -> "GradedPolynomial":
        mw = self.ring.monomial_weight
        return GradedPolynomial(self.ring, {e: c for e, c in self.terms.items() if mw(e) == w})

    def coefficient(self, exps: tuple[int, ...]) -> int:
        return self.terms.get(tuple(exps), 0)

    def variables_used(self) -> set[str]:
        names = self.ring.names
        return {names[i] for e in self.terms for i, k in enumerate(e) if k}

    # -- homomorphisms ----------------------------------------------------
    def apply_hom(self, images: Mapping[str, "GradedPolynomial"], target: RingSpec | None = None):
        return apply_hom(images, self, target)

    def change_ring(self, target: RingSpec) -> "GradedPolynomial":
        """Re-embed in a ring whose variables include ours (missing ones error)."""
        idx = [target.index(n) for n in self.ring.names]
        out = {}
        for e, c in self.terms.items():
            new = [0] * target.nvars
            for i, k in zip(idx, e):
                new[i] = k
            out[tuple(new)] = c
        return GradedPolynomial(target, out)

    # -- rendering --------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        mw = self.ring.monomial_weight
        return sorted(self.terms.items(), key=lambda ec: (mw(ec[0]), ec[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = self.ring.names
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            if not mono:
                parts.append((c, f"{abs(c)}"))
            else:
                parts.append((c, mono if abs(c) == 1 else f"{abs(c)}*{mono}"))
        text = ("-" if parts[0][0] < 0 else "") + parts[0][1]
        for c, body in parts[1:]:
            text += (" - " if c < 0 else " + ") + body
        return text

    def __repr__(self) -> str:
        return f"GradedPolynomial({self})"


def apply_hom(
    images: Mapping[str, GradedPolynomial],
    x: GradedPolynomial,
    target: RingSpec | None = None,
) -> GradedPolynomial:
    """Evaluate the ring homomorphism sending each variable to ``images[name]``."""
    names = x.ring.names
    used = [i for i in range(len(names)) if any(e[i] for e in x.terms)]
    for i in used:
        if names[i] not in images:
            raise MissingImage(names[i])
    if target is None:
        rings = {images[names[i]].ring for i in used}
        if len(rings) > 1:
            raise RingMismatch("images live in different rings")
        target = rings.pop() if rings else next(iter(images.values())).ring
    for i in used:
        if images[names[i]].ring != target:
            raise RingMismatch(f"image of {names[i]} is not in the target ring")
    powers: dict[tuple[int, int], GradedPolynomial] = {}

    def power(i: int, k: int) -> GradedPolynomial:
        key = (i, k)
        if key not in powers:
            powers[key] = images[names[i]] if k == 1 else power(i, k - 1) * images[names[i]]
        return powers[key]

    out = target.zero()
    for e, c in x.terms.items():
        term = target.constant(c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        out = out + term
    return out


def graded_basis(ring: RingSpec, weight: int) -> list[tuple[int, ...]]:
    """All exponent vectors of the given weight, lexicographically descending."""
    if weight < 0:
        return []
    return list(_graded_basis(ring.weights, weight))


@lru_cache(maxsize=None)
def _graded_basis(weights: tuple[int, ...], weight: int) -> tuple[tuple[int, ...], ...]:
    if not weights:
        return ((),) if weight == 0 else ()
    w0, rest = weights[0], weights[1:]
    out = []
    for k in range(weight // w0, -1, -1):
        for tail in _graded_basis(rest, weight - k * w0):
            out.append((k,) + tail)
    return tuple(out)


def parse_polynomial(ring: RingSpec, text: str) -> GradedPolynomial:
    """Parse ``+``, ``-``, ``*``, ``^``, parentheses, integers and variable names."""
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"unexpected end of polynomial {text!r}")
        tok = tokens[pos]
        pos += 1
        return tok

    def expr():
        sign = 1
        if peek() in ("+", "-"):
            sign = -1 if take() == "-" else 1
        acc = term() * sign
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term():
        acc = factor()
        while peek() == "*":
            take()
            acc = acc * factor()
        return acc

    def factor():
        base = atom()
        if peek() == "^":
            take()
            tok = take()
            if not tok.isdigit():
                raise ValueError(f"exponent must be a nonnegative integer, got {tok!r}")
            base = base ** int(tok)
        return base

    def atom():
        tok = take() if peek() is not None else None
        if tok is None:
            raise ValueError(f"unexpected end of polynomial {text!r}")
        if tok == "(":
            val = expr()
            if take() != ")":
                raise ValueError(f"unbalanced parentheses in {text!r}")
            return val
        if tok == "-":
            return -factor()
        if tok.isdigit():
            return ring.constant(int(tok))
        if tok not in ring.names:
            raise ValueError(f"unknown variable {tok!r} in {text!r}")
        return ring.gen(tok)

    result = expr()
    if pos != len(tokens):
        raise ValueError(f"trailing input in {text!r}")
    return result


def _tokenize(text: str) -> list[str]:
    tokens, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*^()":
            tokens.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise ValueError(f"unexpected character {ch!r} in {text!r}")
    return tokens
