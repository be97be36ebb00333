"""Reduced cobar complex of a Hopf algebroid with comodule coefficients.

A cochain of cohomological degree s is a finite sum of basis keys
``(g, b, (m_1, ..., m_s))`` where ``g`` indexes a comodule generator, ``b`` is
an exponent vector of a base monomial and each ``m_i`` is a positive-weight
exponent vector of the adjoined variables.  The key stands for
``g (x) b*m_1 | m_2 | ... | m_s``: base coefficients sit on the left.

The differential is the alternating sum of cofaces d = sum_i (-1)^i d_i:

* d_0 applies the coaction and pushes the base coefficient through the right
  unit of the new first slot,
* d_i (1 <= i <= s) applies the comultiplication to slot i,
* d_{s+1} appends an empty slot.

Terms with an empty slot cancel in total; they are dropped from the reduced
complex (and can be audited with ``keep_degenerate=True``).
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .hopf import ComodulePresentation, HopfAlgebroidPresentation, copy_name, trivial_comodule
from .linalg import (
    AbelianGroupPresentation,
    CompositionNotZero,
    IntMatrix,
    LatticeCoordinates,
    Limits,
    ResourceLimitExceeded,
    cohomology_at,
    invariant_factors,
    is_prime,
    kernel_basis,
    lattice_basis,
    rank_mod_p,
    smith_normal_form,
)
from .poly import GradedPolynomial, RingSpec, apply_hom, graded_basis

Key = tuple  # (generator index, base exponents, slot exponents tuple)
Cochain = dict  # Key -> int


class NotACocycle(ValueError):
    pass


class OutOfRange(KeyError):
    pass


class CobarComplex:
    """Bidegree-local access to the reduced cobar complex C(H; M)."""

    def __init__(
        self,
        algebroid: HopfAlgebroidPresentation,
        comodule: ComodulePresentation | None = None,
        limits: Limits | None = None,
    ):
        self.H = algebroid
        self.M = comodule if comodule is not None else trivial_comodule(algebroid)
        if self.M.algebroid is not algebroid and self.M.algebroid.name != algebroid.name:
            raise ValueError("comodule belongs to a different algebroid")
        self.limits = limits or Limits.from_env()
        self.modulus = algebroid.modulus
        self.nb = algebroid.base.nvars
        self.na = len(algebroid.adjoined)
        self.adj_weights = tuple(v.weight for v in algebroid.adjoined)
        self.adj_bounds = tuple(algebroid.truncation.get(v.name) for v in algebroid.adjoined)
        self.zero_slot = (0,) * self.na
        self.gen_weights = tuple(w for _, w in self.M.generators)
        self._slices: dict[tuple[int, int], "CobarSlice"] = {}
        self._delta: dict[tuple, list] = {}
        self._d0: dict[tuple, list] = {}
        self._eta_pow: dict[tuple[int, int], GradedPolynomial] = {}

    # -- small building blocks ------------------------------------------
    def _reduce(self, c: int) -> int:
        return c % self.modulus if self.modulus else c

    def slot_monomials(self, w: int) -> list[tuple[int, ...]]:
        if w <= 0:
            return []
        return [
            m
            for m in graded_basis(self.adj_ring, w)
            if all(b is None or k < b for k, b in zip(m, self.adj_bounds))
        ]

    @cached_property
    def adj_ring(self) -> RingSpec:
        return RingSpec(self.H.adjoined, self.modulus)

    def delta(self, m: tuple[int, ...]) -> list[tuple[tuple, tuple, int]]:
        """Delta(m) as (left, right, coeff) triples, including empty factors."""
        got = self._delta.get(m)
        if got is None:
            H = self.H
            pair = H.copies_ring(2)
            poly = pair.one()
            for x, k in zip(H.adjoined_names, m):
                if k:
                    poly = poly * H.comult[x].change_ring(pair) ** k
            poly = H.reduce(poly)
            na = self.na
            got = [(e[:na], e[na:], c) for e, c in poly.terms.items()]
            self._delta[m] = got
        return got

    def _eta_power(self, j: int, k: int) -> GradedPolynomial:
        key = (j, k)
        got = self._eta_pow.get(key)
        if got is None:
            if k == 0:
                got = self.H.total.one()
            else:
                a = self.H.base.names[j]
                got = self.H.reduce(self._eta_power(j, k - 1) * self.H.eta_R[a])
            self._eta_pow[key] = got
        return got

    def d0_terms(self, g: int, b: tuple[int, ...]) -> list[tuple[int, tuple, tuple, int]]:
        """sum_w c_{wg} * eta_R(b) as (w, base exps, slot exps, coeff)."""
        key = (g, b)
        got = self._d0.get(key)
        if got is None:
            H, M = self.H, self.M
            eta_b = H.total.one()
            for j, k in enumerate(b):
                if k:
                    eta_b = eta_b * self._eta_power(j, k)
            gname = M.names[g]
            got = []
            nb = self.nb
            for wi, wname in enumerate(M.names):
                c = M.coefficient(wname, gname)
                if not c:
                    continue
                prod = H.reduce(c * eta_b)
                for e, v in prod.terms.items():
                    got.append((wi, e[:nb], e[nb:], v))
            self._d0[key] = got
        return got

    # -- bases and differentials ------------------------------------------
    def basis(self, s: int, n: int) -> list[Key]:
        return self.slice(s, n).basis

    def slice(self, s: int, n: int) -> "CobarSlice":
        key = (s, n)
        if key not in self._slices:
            self._slices[key] = CobarSlice(self, s, n, self._enumerate(s, n))
        return self._slices[key]

    def _enumerate(self, s: int, n: int) -> list[Key]:
        if s < 0 or n < 0:
            return []
        out: list[Key] = []
        cap = self.limits.max_slice_dim
        slot_cache: dict[int, list] = {}

        def slots(w):
            if w not in slot_cache:
                slot_cache[w] = self.slot_monomials(w)
            return slot_cache[w]

        for g, wg in enumerate(self.gen_weights):
            for kb in range(0, n - wg + 1):
                bases = graded_basis(self.H.base, kb)
                if not bases:
                    continue
                rest = n - wg - kb
                for comp in _compositions(rest, s):
                    lists = [slots(w) for w in comp]
                    if any(not lst for lst in lists):
                        continue
                    for b in bases:
                        for ms in itertools.product(*lists):
                            out.append((g, b, ms))
                            if len(out) > cap:
                                raise ResourceLimitExceeded(
                                    f"cobar slice (s={s}, n={n}) exceeds max_slice_dim={cap}"
                                )
        return out

    def differential(self, x: Mapping[Key, int], keep_degenerate: bool = False) -> dict[Key, int]:
        """Apply d to a cochain (all keys of equal cohomological degree)."""
        out: dict[Key, int] = defaultdict(int)
        zero = self.zero_slot
        for key, coeff in x.items():
            if not coeff:
                continue
            g, b, ms = key
            s = len(ms)
            for w, b2, m0, c in self.d0_terms(g, b):
                if m0 != zero or keep_degenerate:
                    out[(w, b2, (m0,) + ms)] += c * coeff
            for i in range(s):
                sign = -coeff if i % 2 == 0 else coeff
                head, tail = ms[:i], ms[i + 1 :]
                for left, right, c in self.delta(ms[i]):
                    if (left != zero and right != zero) or keep_degenerate:
                        out[(g, b, head + (left, right) + tail)] += sign * c
            if keep_degenerate:
                out[(g, b, ms + (zero,))] += coeff if (s + 1) % 2 == 0 else -coeff
        return {k: self._reduce(v) for k, v in out.items() if self._reduce(v)}

    def differential_matrix(self, s: int, n: int) -> IntMatrix:
        return self.slice(s, n).differential

    def cup(self, x: Mapping[Key, int], y: Mapping[Key, int]) -> dict[Key, int]:
        """Concatenation product of trivial-coefficient cochains.

        (x . y)(a; u_1..u_{p+q}) = x(a; u_1..u_p) * y(a.u_1...u_p; u_{p+1}..).
        """
        if len(self.M.generators) != 1:
            raise ValueError("cup product implemented for trivial coefficients only")
        if not x or not y:
            return {}
        p = _degree(x)
        q = _degree(y)
        H = self.H
        ring = H.copies_ring(p + q, with_base=True)
        px = cochain_to_polynomial(self, x, ring)
        pts = H.iterated_right_unit(p + q)[p]
        images = {a: pts[a] for a in H.base.names}
        for j in range(1, q + 1):
            for v in H.adjoined_names:
                images[copy_name(v, j)] = ring.gen(copy_name(v, j + p))
        qring = H.copies_ring(q, with_base=True)
        py = cochain_to_polynomial(self, y, qring)
        moved = apply_hom(images, py, ring) if py else ring.zero()
        return polynomial_to_cochain(self, H.reduce(px * moved), p + q)


def _degree(x: Mapping[Key, int]) -> int:
    degs = {len(k[2]) for k in x}
    if len(degs) != 1:
        raise ValueError("cochain mixes cohomological degrees")
    return degs.pop()


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """Ordered tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if total < parts:
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass
class CobarSlice:
    complex: CobarComplex
    s: int
    n: int
    basis: list[Key]

    @cached_property
    def index(self) -> dict[Key, int]:
        return {k: i for i, k in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def differential(self) -> IntMatrix:
        """Matrix of d: (s, n) -> (s+1, n); column j is d(basis[j])."""
        C = self.complex
        target = C.slice(self.s + 1, self.n)
        tindex = target.index
        entries = {}
        for j, key in enumerate(self.basis):
            for k, v in C.differential({key: 1}).items():
                i = tindex.get(k)
                if i is None:
                    raise AssertionError(f"d produced {k} outside the target basis")
                entries[(i, j)] = v
        return IntMatrix(target.dim, self.dim, entries)

    def factors(self, inverted: tuple[int, ...] = ()) -> tuple[int, list[int]]:
        """Rank and invariant factors of the outgoing differential (cached)."""
        cache = self.__dict__.setdefault("_factors", {})
        if inverted not in cache:
            cache[inverted] = invariant_factors(self.differential, inverted, self.complex.limits)
        return cache[inverted]

    def rank_mod(self, p: int) -> int:
        cache = self.__dict__.setdefault("_ranks_mod", {})
        if p not in cache:
            cache[p] = rank_mod_p(self.differential, p)
        return cache[p]

    def vector(self, x: Mapping[Key, int]) -> dict[int, int]:
        idx = self.index
        out = {}
        for k, v in x.items():
            if k not in idx:
                raise OutOfRange(f"{k} is not a basis element of slice (s={self.s}, n={self.n})")
            out[idx[k]] = v
        return out

    def cochain(self, vec: Mapping[int, int]) -> dict[Key, int]:
        return {self.basis[i]: v for i, v in vec.items() if v}


# ---------------------------------------------------------------------------
# conversions and rendering
# ---------------------------------------------------------------------------


def cochain_to_polynomial(C: CobarComplex, x: Mapping[Key, int], ring: RingSpec | None = None) -> GradedPolynomial:
    """Trivial-coefficient cochain as a polynomial in D[x_1..x_s] (or D[adjoined] when s = 1)."""
    if len(C.M.generators) != 1:
        raise ValueError("polynomial form exists for trivial coefficients only")
    if not x:
        return (ring or C.H.total).zero()
    s = _degree(x)
    if ring is None:
        ring = C.H.total if s == 1 else C.H.copies_ring(s, with_base=True)
    if ring.nvars != C.nb + s * C.na and ring.nvars < C.nb + s * C.na:
        raise ValueError("ring too small")
    pad = ring.nvars - C.nb - s * C.na
    terms = {}
    for (g, b, ms), v in x.items():
        e = b + tuple(itertools.chain.from_iterable(ms)) + (0,) * pad
        terms[e] = terms.get(e, 0) + v
    return GradedPolynomial(ring, terms)


def polynomial_to_cochain(C: CobarComplex, p: GradedPolynomial, s: int) -> dict[Key, int]:
    """Inverse of :func:`cochain_to_polynomial`; drops terms with an empty slot."""
    out = {}
    nb, na = C.nb, C.na
    for e, v in p.terms.items():
        b = e[:nb]
        ms = tuple(tuple(e[nb + i * na : nb + (i + 1) * na]) for i in range(s))
        if any(not any(m) for m in ms):
            continue
        out[(0, b, ms)] = v
    return out


def format_key(C: CobarComplex, key: Key) -> str:
    g, b, ms = key
    base = "*".join(
        n if k == 1 else f"{n}^{k}" for n, k in zip(C.H.base.names, b) if k
    )
    slots = "|".join(
        "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(C.H.adjoined_names, m) if k) for m in ms
    )
    gen = C.M.names[g]
    parts = [p for p in (gen if gen != "1" else "", base) if p]
    return "*".join(parts) + f"[{slots}]" if parts else f"[{slots}]"


def format_cochain(C: CobarComplex, x: Mapping[Key, int]) -> str:
    if not x:
        return "0"
    items = sorted(x.items(), key=lambda kv: (kv[0][0], kv[0][2], kv[0][1]))
    text = ""
    for i, (k, v) in enumerate(items):
        body = f"{abs(v)}*{format_key(C, k)}"
        if i == 0:
            text = ("-" if v < 0 else "") + body
        else:
            text += (" - " if v < 0 else " + ") + body
    return text


# ---------------------------------------------------------------------------
# Ext tables
# ---------------------------------------------------------------------------


def _group_over_field(dim: int, p: int) -> AbelianGroupPresentation:
    return AbelianGroupPresentation(0, (p,) * dim)


def ext_group(C: CobarComplex, s: int, n: int, inverted: Iterable[int] = (), check: bool = True) -> AbelianGroupPresentation:
    """Ext^{s,n} as ker(d out of (s,n)) / im(d into (s,n))."""
    inverted = tuple(sorted(set(inverted)))
    sl = C.slice(s, n)
    d_out = sl.differential
    prev = C.slice(s - 1, n) if s > 0 else None
    d_in = prev.differential if prev is not None else IntMatrix(sl.dim, 0)
    m = C.modulus
    if m:
        if not is_prime(m):
            raise ValueError("Ext over Z/m is supported for prime m only")
        if check:
            prod = (d_out @ d_in).mod(m)
            if not prod.is_zero():
                raise CompositionNotZero(f"d o d != 0 mod {m} at (s={s}, n={n})")
        dim = sl.dim - sl.rank_mod(m) - (prev.rank_mod(m) if prev is not None else 0)
        return _group_over_field(dim, m)
    return cohomology_at(
        d_in,
        d_out,
        inverted=inverted,
        check=check,
        limits=C.limits,
        out_rank=sl.factors(inverted)[0],
        in_factors=prev.factors(inverted) if prev is not None else (0, []),
    )


@dataclass
class NamedClass:
    name: str
    s: int
    n: int
    representative: dict

    def to_json(self, C: CobarComplex) -> dict:
        return {"name": self.name, "s": self.s, "n": self.n, "representative": format_cochain(C, self.representative)}


@dataclass
class ExtTable:
    complex: CobarComplex
    s_max: int
    n_max: int
    entries: dict[tuple[int, int], AbelianGroupPresentation]
    named: dict[str, NamedClass] = field(default_factory=dict)
    inverted: tuple[int, ...] = ()
    s_min: int = 0

    def __getitem__(self, sn: tuple[int, int]) -> AbelianGroupPresentation:
        if sn not in self.entries:
            raise OutOfRange(sn)
        return self.entries[sn]

    def register(self, name: str, x: Mapping[Key, int]) -> NamedClass:
        C = self.complex
        if not x:
            raise ValueError(f"representative of {name} is zero")
        s = _degree(x)
        n = _weight_of(C, next(iter(x)))
        if C.differential(x):
            raise NotACocycle(name)
        nc = NamedClass(name, s, n, dict(x))
        self.named[name] = nc
        return nc

    def to_json(self) -> dict:
        H = self.complex.H
        return {
            "algebroid": H.name,
            "comodule": list(self.complex.M.names),
            "coefficients": ("Z" if not H.modulus else f"Z/{H.modulus}")
            + (f"[1/{','.join(map(str, self.inverted))}]" if self.inverted else ""),
            "grading_note": "n is the algebraic internal degree; the topological internal degree is 2n",
            "s_max": self.s_max,
            "n_max": self.n_max,
            "entries": [
                {
                    "s": s,
                    "n": n,
                    "topological_degree": 2 * n,
                    "stem": 2 * n - s,
                    "group": str(g),
                    **g.to_json(),
                }
                for (s, n), g in sorted(self.entries.items())
            ],
            "named_classes": [nc.to_json(self.complex) for nc in self.named.values()],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _weight_of(C: CobarComplex, key: Key) -> int:
    g, b, ms = key
    w = C.gen_weights[g] + sum(k * wt for k, wt in zip(b, C.H.base.weights))
    for m in ms:
        w += sum(k * wt for k, wt in zip(m, C.adj_weights))
    return w


def standard_classes(C: CobarComplex) -> dict[str, dict]:
    """Representatives of the named classes that make sense for C."""
    H = C.H
    out: dict[str, dict] = {}
    if len(C.M.generators) != 1:
        return out
    names = H.adjoined_names
    zb = (0,) * C.nb

    def slot(var):
        m = tuple(1 if v == var else 0 for v in names)
        return {(0, zb, (m,)): 1}

    if "s" in names:
        out["h1"] = slot("s")
    if "t" in names:
        out["h21"] = slot("t")
    if "r" in names:
        out["[r]"] = slot("r")
    if set(H.base.names) == {"a1", "a2", "a3", "a4", "a6"}:
        from .quasimodular import named_elements

        for k, p in named_elements().items():
            if k in ("b2", "b4", "b6", "b8"):
                out[k] = {(0, e, ()): c for e, c in p.terms.items()}
    return out


def ext_table(
    H: HopfAlgebroidPresentation,
    comodule: ComodulePresentation | None = None,
    s_max: int = 2,
    n_max: int = 6,
    inverted: Iterable[int] = (),
    limits: Limits | None = None,
    complex: CobarComplex | None = None,
    s_min: int = 0,
    register: bool = True,
) -> ExtTable:
    C = complex or CobarComplex(H, comodule, limits)
    inverted = tuple(inverted)
    entries = {}
    for n in range(n_max + 1):
        for s in range(s_min, s_max + 1):
            entries[(s, n)] = ext_group(C, s, n, inverted)
    table = ExtTable(C, s_max, n_max, entries, inverted=inverted, s_min=s_min)
    if register:
        for name, rep in standard_classes(C).items():
            s = _degree(rep)
            n = _weight_of(C, next(iter(rep)))
            if s_min <= s <= s_max and n <= n_max and not C.differential(rep):
                table.register(name, rep)
    return table


# ---------------------------------------------------------------------------
# class coordinates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassCoordinates:
    """Coordinates of a class in Z/d_1 + ... + Z/d_k + Z^f (torsion first)."""

    group: AbelianGroupPresentation
    torsion: tuple[int, ...]
    free: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.torsion) and not any(self.free)

    def generates(self) -> bool:
        """True when the class alone generates the group (cyclic groups only)."""
        g = self.group
        if g.free_rank + len(g.torsion) != 1:
            return False
        if g.torsion:
            import math

            return math.gcd(self.torsion[0], g.torsion[0]) == 1
        return abs(self.free[0]) == 1


class ExtSpot:
    """Dense change-of-basis data for one bidegree (small slices only)."""

    def __init__(self, C: CobarComplex, s: int, n: int):
        if C.modulus:
            raise ValueError("class coordinates are implemented over Z")
        self.C, self.s, self.n = C, s, n
        sl = C.slice(s, n)
        self.slice = sl
        N = sl.dim
        d_in = C.slice(s - 1, n).differential if s > 0 else IntMatrix(N, 0)
        snf = smith_normal_form(d_in, C.limits)
        self.U = snf.U.row_dicts()
        diag = snf.diagonal
        self.rank = sum(1 for d in diag if d)
        self.factors = [d for d in diag if d]
        ker = kernel_basis(sl.differential)
        proj = []
        for z in ker:
            uz = self._apply_U(dict((i, v) for i, v in enumerate(z) if v))
            proj.append([uz.get(i, 0) for i in range(self.rank, N)])
        self.free_basis = lattice_basis(proj, N - self.rank)
        self.free_coords = LatticeCoordinates(self.free_basis, N - self.rank)
        self.torsion_positions = [i for i, d in enumerate(self.factors) if d > 1]
        self.group = AbelianGroupPresentation(len(self.free_basis), tuple(self.factors[i] for i in self.torsion_positions))

    def _apply_U(self, vec: Mapping[int, int]) -> dict[int, int]:
        out = {}
        for i, row in enumerate(self.U):
            v = sum(c * vec.get(j, 0) for j, c in row.items())
            if v:
                out[i] = v
        return out

    def coordinates(self, x: Mapping[Key, int]) -> ClassCoordinates:
        C = self.C
        if x and C.differential(x):
            raise NotACocycle(format_cochain(C, x))
        vec = self.slice.vector(x)
        u = self._apply_U(vec)
        tors = tuple(u.get(i, 0) % self.factors[i] for i in self.torsion_positions)
        N = self.slice.dim
        free = self.free_coords.solve([u.get(i, 0) for i in range(self.rank, N)])
        if free is None:
            raise AssertionError("cocycle projection is outside the cycle lattice")
        return ClassCoordinates(self.group, tors, tuple(free))


def cocycle_class(table: ExtTable, z: Mapping[Key, int], s: int | None = None, n: int | None = None) -> ClassCoordinates:
    C = table.complex
    if z:
        s = _degree(z)
        n = _weight_of(C, next(iter(z)))
    if s is None or n is None:
        raise ValueError("zero cochain needs an explicit bidegree")
    if (s, n) not in table.entries:
        raise OutOfRange((s, n))
    cache = getattr(table, "_spots", None)
    if cache is None:
        cache = table._spots = {}
    if (s, n) not in cache:
        cache[(s, n)] = ExtSpot(C, s, n)
    return cache[(s, n)].coordinates(z)
