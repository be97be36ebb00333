"""Graded Hopf algebroid presentations and comodules over them.

A presentation (D, Gamma) has Gamma = D[x_1, ..., x_k] (optionally truncated,
x_i^{e_i} = 0).  The left unit is the inclusion, the right unit is given on
the generators of D, and the comultiplication is given on the adjoined
variables as a polynomial in two copies ``x_1``/``x_2`` of them.

Elements of Gamma^{(x)k} are written in a normal form: base coefficients are
pushed to the far left through the right unit, so an element is a polynomial
in D[x_1, ..., x_k] where ``x_i`` is the i-th copy of the adjoined variables.
Read as functions on a groupoid, a slot variable is an arrow and a base
coefficient is evaluated at the source of the first arrow.

Comultiplication is forbidden from carrying base-ring coefficients; every
presentation shipped here satisfies this.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

from .poly import GradedPolynomial, RingSpec, VariableSpec, apply_hom, parse_polynomial


class PresentationError(ValueError):
    """A presentation or comodule failed one of its structural checks."""

    def __init__(self, failures: list["CheckResult"]):
        self.failures = failures
        names = ", ".join(f"{f.invariant}[{f.subject}]" for f in failures)
        super().__init__(f"failed invariants: {names}")


class ParameterMismatch(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    invariant: str
    subject: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"invariant": self.invariant, "subject": self.subject, "passed": self.passed, "detail": self.detail}


def copy_name(var: str, slot: int) -> str:
    return f"{var}_{slot}"


def truncate(p: GradedPolynomial, bounds: tuple[int | None, ...]) -> GradedPolynomial:
    """Drop monomials that vanish in the truncated ring (x_i^{bounds[i]} = 0)."""
    if not any(bounds):
        return p
    keep = {e: c for e, c in p.terms.items() if all(b is None or k < b for k, b in zip(e, bounds))}
    return GradedPolynomial(p.ring, keep)


# ---------------------------------------------------------------------------
# coordinate transformations x -> x + r, y -> y + s x + t
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordinateTransformation:
    """Parameters (r, s, t) or (s, t) of a cubic-curve coordinate change."""

    params: Mapping[str, GradedPolynomial]

    WEIGHTS = {"r": 2, "s": 1, "t": 3}

    def __post_init__(self):
        keys = set(self.params)
        if keys not in ({"r", "s", "t"}, {"s", "t"}):
            raise ParameterMismatch(f"expected parameters r,s,t or s,t; got {sorted(keys)}")
        rings = {p.ring for p in self.params.values()}
        if len(rings) != 1:
            raise ParameterMismatch("parameters live in different rings")
        for k, p in self.params.items():
            if p and (not p.is_homogeneous() or p.weight() != self.WEIGHTS[k]):
                raise ParameterMismatch(f"parameter {k} must be homogeneous of weight {self.WEIGHTS[k]}")

    @property
    def with_r(self) -> bool:
        return "r" in self.params

    @property
    def ring(self) -> RingSpec:
        return next(iter(self.params.values())).ring

    def __getitem__(self, k: str) -> GradedPolynomial:
        if k == "r" and not self.with_r:
            return self.ring.zero()
        return self.params[k]

    @classmethod
    def generic(cls, ring: RingSpec, suffix: str = "", with_r: bool = True) -> "CoordinateTransformation":
        keys = ("r", "s", "t") if with_r else ("s", "t")
        return cls({k: ring.gen(k + suffix) for k in keys})

    @classmethod
    def identity(cls, ring: RingSpec, with_r: bool = True) -> "CoordinateTransformation":
        keys = ("r", "s", "t") if with_r else ("s", "t")
        return cls({k: ring.zero() for k in keys})


def compose_transformations(T1: CoordinateTransformation, T2: CoordinateTransformation) -> CoordinateTransformation:
    """The transformation "first T1, then T2", found by literal substitution.

    T1 writes old coordinates through intermediate ones, (x, y) = (x1 + r1,
    y1 + s1 x1 + t1); T2 writes the intermediate ones through new ones.
    """
    if T1.with_r != T2.with_r:
        raise ParameterMismatch("cannot compose transformations with and without r")
    if T1.ring != T2.ring:
        raise ParameterMismatch("transformations live in different rings")
    base = T1.ring
    ring = base.extend([VariableSpec("X", 2), VariableSpec("Y", 3)])
    up = lambda p: p.change_ring(ring)  # noqa: E731
    X, Y = ring.gen("X"), ring.gen("Y")
    x1 = X + up(T2["r"])
    y1 = Y + up(T2["s"]) * X + up(T2["t"])
    x = x1 + up(T1["r"])
    y = y1 + up(T1["s"]) * x1 + up(T1["t"])
    iX, iY = ring.index("X"), ring.index("Y")

    def part(p: GradedPolynomial, ex: int, ey: int) -> GradedPolynomial:
        terms = {e[:iX] + e[iY + 1 :]: c for e, c in p.terms.items() if e[iX] == ex and e[iY] == ey}
        return GradedPolynomial(base, terms)

    # the composite must again be affine of the same shape
    if part(x, 1, 0) != 1 or part(y, 0, 1) != 1 or part(x, 0, 1) or part(y, 1, 1):
        raise AssertionError("composite is not a coordinate change of the expected shape")
    out = {"s": part(y, 1, 0), "t": part(y, 0, 0)}
    if T1.with_r:
        out["r"] = part(x, 0, 0)
    return CoordinateTransformation(out)


def comult_from_composition(with_r: bool = True, modulus: int = 0) -> dict[str, GradedPolynomial]:
    """Comultiplication on r, s, t read off from composing two generic transformations.

    The two tensor factors are the two transformation copies, named ``x_1``
    and ``x_2``; the result lives in the ring of those copies.
    """
    keys = ("r", "s", "t") if with_r else ("s", "t")
    ring = RingSpec(
        tuple(VariableSpec(copy_name(k, i), CoordinateTransformation.WEIGHTS[k]) for i in (1, 2) for k in keys),
        modulus,
    )
    T1 = CoordinateTransformation.generic(ring, "_1", with_r)
    T2 = CoordinateTransformation.generic(ring, "_2", with_r)
    comp = compose_transformations(T1, T2)
    return {k: comp[k] for k in keys}


def weierstrass_right_unit(with_r: bool = True) -> dict[str, GradedPolynomial]:
    """Right unit on a1..a6 obtained by substituting x = x' + r, y = y' + s x' + t
    into y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6 and reading off the
    new coefficients."""
    D = weierstrass_base()
    keys = ("r", "s", "t") if with_r else ("s", "t")
    G = D.extend([VariableSpec(k, CoordinateTransformation.WEIGHTS[k]) for k in keys])
    ring = G.extend([VariableSpec("X", 2), VariableSpec("Y", 3)])
    g = {n: ring.gen(n) for n in ring.names}
    r = g["r"] if with_r else ring.zero()
    x = g["X"] + r
    y = g["Y"] + g["s"] * g["X"] + g["t"]
    E = y * y + g["a1"] * x * y + g["a3"] * y - (x**3 + g["a2"] * x * x + g["a4"] * x + g["a6"])
    iX, iY = ring.index("X"), ring.index("Y")

    def coeff(ex: int, ey: int) -> GradedPolynomial:
        return GradedPolynomial(G, {e[:iX]: c for e, c in E.terms.items() if e[iX] == ex and e[iY] == ey})

    if coeff(0, 2) != 1 or coeff(3, 0) != -1 or coeff(2, 1) or coeff(1, 2) or coeff(0, 3):
        raise AssertionError("substitution left Weierstrass form")
    return {
        "a1": coeff(1, 1),
        "a2": -coeff(2, 0),
        "a3": coeff(0, 1),
        "a4": -coeff(1, 0),
        "a6": -coeff(0, 0),
    }


def weierstrass_base(modulus: int = 0) -> RingSpec:
    return RingSpec.from_weights({"a1": 1, "a2": 2, "a3": 3, "a4": 4, "a6": 6}, modulus)


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HopfAlgebroidPresentation:
    name: str
    base: RingSpec
    adjoined: tuple[VariableSpec, ...]
    eta_R: Mapping[str, GradedPolynomial]
    comult: Mapping[str, GradedPolynomial]
    counit: Mapping[str, GradedPolynomial] = field(default_factory=dict)
    truncation: Mapping[str, int] = field(default_factory=dict)

    @property
    def modulus(self) -> int:
        return self.base.modulus

    @cached_property
    def total(self) -> RingSpec:
        return self.base.extend(self.adjoined)

    @property
    def adjoined_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.adjoined)

    def counit_of(self, x: str) -> GradedPolynomial:
        c = self.counit.get(x)
        return c if c is not None else self.base.zero()

    def copies_ring(self, k: int, with_base: bool = False) -> RingSpec:
        """Ring of k copies of the adjoined variables (base variables first if asked)."""
        vs = tuple(VariableSpec(copy_name(v.name, i), v.weight) for i in range(1, k + 1) for v in self.adjoined)
        return RingSpec((self.base.variables if with_base else ()) + vs, self.modulus)

    def bounds(self, ring: RingSpec) -> tuple[int | None, ...]:
        out = []
        for n in ring.names:
            head, _, tail = n.rpartition("_")
            key = head if tail.isdigit() and head in self.truncation else n
            out.append(self.truncation.get(key))
        return tuple(out)

    def reduce(self, p: GradedPolynomial) -> GradedPolynomial:
        return truncate(p, self.bounds(p.ring))

    # -- embeddings between the rings used by checks ----------------------
    def slot_images(self, ring: RingSpec, slot: int) -> dict[str, GradedPolynomial]:
        """Adjoined variable x -> its copy x_slot inside ``ring``."""
        return {v: ring.gen(copy_name(v, slot)) for v in self.adjoined_names}

    def base_identity(self, ring: RingSpec) -> dict[str, GradedPolynomial]:
        return {v: ring.gen(v) for v in self.base.names}

    def right_unit_at(self, ring: RingSpec, slot: int, point: Mapping[str, GradedPolynomial]):
        """a -> eta_R(a) with the arrow in copy ``slot`` and source coordinates ``point``."""
        images = dict(point)
        images.update(self.slot_images(ring, slot))
        return {a: self.reduce(apply_hom(images, self.eta_R[a], ring)) for a in self.base.names}

    def iterated_right_unit(self, k: int) -> list[dict[str, GradedPolynomial]]:
        """Coordinates of a.x_1...x_i for i = 0..k inside D[x_1..x_k]."""
        ring = self.copies_ring(k, with_base=True)
        points = [self.base_identity(ring)]
        for i in range(1, k + 1):
            points.append(self.right_unit_at(ring, i, points[-1]))
        return points

    def comult_into(self, ring: RingSpec, left: int, right: int) -> dict[str, GradedPolynomial]:
        """x -> Delta(x) with the two factors placed in copies ``left`` and ``right``."""
        pair = self.copies_ring(2)
        sub = {}
        for v in self.adjoined_names:
            sub[copy_name(v, 1)] = ring.gen(copy_name(v, left))
            sub[copy_name(v, 2)] = ring.gen(copy_name(v, right))
        return {x: self.reduce(apply_hom(sub, self.comult[x].change_ring(pair), ring)) for x in self.adjoined_names}

    # -- validation -------------------------------------------------------
    def checks(self) -> list[CheckResult]:
        out: list[CheckResult] = []
        base_w = dict(zip(self.base.names, self.base.weights))
        adj_w = {v.name: v.weight for v in self.adjoined}
        total = self.total
        for a in self.base.names:
            img = self.eta_R.get(a)
            ok = img is not None and img.ring == total and (img.is_zero() or img.weight() == base_w[a])
            out.append(CheckResult("eta_R grading", a, ok, "" if ok else f"eta_R({a}) = {img}"))
        for x in self.adjoined_names:
            img = self.comult.get(x)
            ok = img is not None and all(v.startswith(tuple(f"{n}_" for n in self.adjoined_names)) for v in img.ring.names)
            ok = ok and (img.is_zero() or img.weight() == adj_w[x])
            out.append(CheckResult("comult grading", x, ok, "" if ok else f"Delta({x}) = {img}"))
            c = self.counit_of(x)
            ok = c.ring == self.base and (c.is_zero() or c.weight() == adj_w[x])
            out.append(CheckResult("counit grading", x, ok, "" if ok else f"eps({x}) = {c}"))
        if not all(c.passed for c in out):
            return out

        # counit laws
        for x in self.adjoined_names:
            delta = self.comult[x].change_ring(self.copies_ring(2))
            left = {copy_name(v, 1): self.counit_of(v).change_ring(total) for v in self.adjoined_names}
            left.update({copy_name(v, 2): total.gen(v) for v in self.adjoined_names})
            lhs = self.reduce(apply_hom(left, delta, total))
            right = {copy_name(v, 1): total.gen(v) for v in self.adjoined_names}
            for v in self.adjoined_names:
                right[copy_name(v, 2)] = apply_hom(self.eta_R, self.counit_of(v), total) if self.base.names else self.counit_of(v).change_ring(total)
            rhs = self.reduce(apply_hom(right, delta, total))
            gx = total.gen(x)
            out.append(CheckResult("counit law (eps x id)", x, lhs == gx, "" if lhs == gx else str(lhs - gx)))
            out.append(CheckResult("counit law (id x eps)", x, rhs == gx, "" if rhs == gx else str(rhs - gx)))

        # coassociativity
        triple = self.copies_ring(3)
        d12 = self.comult_into(triple, 1, 2)
        d23 = self.comult_into(triple, 2, 3)
        pair = self.copies_ring(2)
        for x in self.adjoined_names:
            delta = self.comult[x].change_ring(pair)
            sub_l = {copy_name(v, 1): d12[v] for v in self.adjoined_names}
            sub_l.update({copy_name(v, 2): triple.gen(copy_name(v, 3)) for v in self.adjoined_names})
            sub_r = {copy_name(v, 1): triple.gen(copy_name(v, 1)) for v in self.adjoined_names}
            sub_r.update({copy_name(v, 2): d23[v] for v in self.adjoined_names})
            lhs = self.reduce(apply_hom(sub_l, delta, triple))
            rhs = self.reduce(apply_hom(sub_r, delta, triple))
            out.append(CheckResult("coassociativity", x, lhs == rhs, "" if lhs == rhs else str(lhs - rhs)))

        # truncation ideal is a Hopf ideal
        for x, k in self.truncation.items():
            p = self.reduce(self.comult[x].change_ring(pair) ** k)
            out.append(CheckResult("truncation preserved by Delta", x, p.is_zero(), str(p)))

        # eps o eta_R = id, and compatibility of eta_R with Delta
        if self.base.names:
            epsimg = self.base_identity(self.base)
            epsimg.update({v: self.counit_of(v) for v in self.adjoined_names})
            ring2 = self.copies_ring(2, with_base=True)
            pts = self.iterated_right_unit(2)
            comp = self.comult_into(ring2, 1, 2)
            for a in self.base.names:
                e = apply_hom(epsimg, self.eta_R[a], self.base)
                ga = self.base.gen(a)
                out.append(CheckResult("eps o eta_R = id", a, e == ga, "" if e == ga else str(e)))
                images = self.base_identity(ring2)
                images.update(comp)
                lhs = self.reduce(apply_hom(images, self.eta_R[a], ring2))
                ok = lhs == pts[2][a]
                out.append(CheckResult("right unit compatible with Delta", a, ok, "" if ok else str(lhs - pts[2][a])))
        return out

    def validate(self) -> "HopfAlgebroidPresentation":
        failures = [c for c in self.checks() if not c.passed]
        if failures:
            raise PresentationError(failures)
        return self

    def with_right_unit(self, eta_R: Mapping[str, GradedPolynomial], name: str | None = None):
        """Same presentation with a replaced right unit (no validation)."""
        return HopfAlgebroidPresentation(
            name or self.name, self.base, self.adjoined, dict(eta_R), self.comult, self.counit, self.truncation
        )

    def describe(self) -> dict:
        return {
            "name": self.name,
            "modulus": self.modulus,
            "base": {v.name: v.weight for v in self.base.variables},
            "adjoined": {v.name: v.weight for v in self.adjoined},
            "truncation": dict(self.truncation),
            "eta_R": {a: str(p) for a, p in self.eta_R.items()},
            "comult": {x: str(p) for x, p in self.comult.items()},
        }


# ---------------------------------------------------------------------------
# comodules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComodulePresentation:
    """A comodule free over D on named generators.

    ``coaction[g][w]`` is the Gamma-coefficient c_{wg} in
    psi(g) = sum_w w (x) c_{wg}; missing entries are zero.
    """

    algebroid: HopfAlgebroidPresentation
    generators: tuple[tuple[str, int], ...]
    coaction: Mapping[str, Mapping[str, GradedPolynomial]]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(g for g, _ in self.generators)

    @property
    def weights(self) -> dict[str, int]:
        return dict(self.generators)

    def coefficient(self, w: str, g: str) -> GradedPolynomial:
        c = self.coaction.get(g, {}).get(w)
        return c if c is not None else self.algebroid.total.zero()

    def checks(self) -> list[CheckResult]:
        H = self.algebroid
        total = H.total
        wt = self.weights
        out = []
        for g in self.names:
            for w in self.names:
                c = self.coefficient(w, g)
                ok = c.ring == total and (c.is_zero() or c.weight() == wt[g] - wt[w])
                out.append(CheckResult("coaction grading", f"{w}<-{g}", ok, "" if ok else str(c)))
        if not all(c.passed for c in out):
            return out
        epsimg = H.base_identity(H.base)
        epsimg.update({v: H.counit_of(v) for v in H.adjoined_names})
        for g in self.names:
            for w in self.names:
                e = apply_hom(epsimg, self.coefficient(w, g), H.base)
                want = 1 if w == g else 0
                out.append(CheckResult("coaction counit", f"{w}<-{g}", e == want, "" if e == want else str(e)))
        ring2 = H.copies_ring(2, with_base=True)
        comp = H.comult_into(ring2, 1, 2)
        pts = H.iterated_right_unit(2)
        slot1 = H.base_identity(ring2)
        slot1.update(H.slot_images(ring2, 1))
        slot2 = dict(pts[1])
        slot2.update(H.slot_images(ring2, 2))
        delta_img = H.base_identity(ring2)
        delta_img.update(comp)
        for g in self.names:
            for u in self.names:
                lhs = H.reduce(apply_hom(delta_img, self.coefficient(u, g), ring2))
                rhs = ring2.zero()
                for w in self.names:
                    a, b = self.coefficient(u, w), self.coefficient(w, g)
                    if a and b:
                        rhs = rhs + apply_hom(slot1, a, ring2) * apply_hom(slot2, b, ring2)
                rhs = H.reduce(rhs)
                out.append(CheckResult("coaction coassociativity", f"{u}<-{g}", lhs == rhs, "" if lhs == rhs else str(lhs - rhs)))
        return out

    def validate(self) -> "ComodulePresentation":
        failures = [c for c in self.checks() if not c.passed]
        if failures:
            raise PresentationError(failures)
        return self


def trivial_comodule(H: HopfAlgebroidPresentation) -> ComodulePresentation:
    return ComodulePresentation(H, (("1", 0),), {"1": {"1": H.total.one()}})


def comodule_from_strings(
    H: HopfAlgebroidPresentation, generators: Mapping[str, int], coaction: Mapping[str, str]
) -> ComodulePresentation:
    """Build a comodule from text like ``{"v1": "v1 + v0*s"}``.

    Each coaction string is linear in the generator names with coefficients in
    Gamma; unlisted generators are primitive.
    """
    names = list(generators)
    shifted = [VariableSpec(n, generators[n] + 1) for n in names]
    ring = H.total.extend(shifted)
    data: dict[str, dict[str, GradedPolynomial]] = {}
    for g in names:
        expr = parse_polynomial(ring, coaction.get(g, g))
        data[g] = _split_linear(expr, names, H.total)
    return ComodulePresentation(H, tuple(generators.items()), data)


def _split_linear(expr: GradedPolynomial, names: list[str], total: RingSpec) -> dict[str, GradedPolynomial]:
    k = total.nvars
    idx = {n: k + i for i, n in enumerate(names)}
    out: dict[str, dict] = {}
    for e, c in expr.terms.items():
        tail = e[k:]
        if sum(tail) != 1:
            raise ValueError(f"coaction term is not linear in the generators: {expr}")
        w = next(n for n in names if e[idx[n]])
        out.setdefault(w, {})[e[:k]] = c
    return {w: GradedPolynomial(total, t) for w, t in out.items()}


def sym_power_comodule(V: ComodulePresentation, q: int) -> ComodulePresentation:
    """q-th symmetric power over the base with the diagonal coaction."""
    if q < 0:
        raise ValueError("q must be non-negative")
    H = V.algebroid
    names = list(V.names)
    wt = V.weights
    ring = H.total.extend([VariableSpec(n, wt[n] + 1) for n in names])
    k = H.total.nvars
    psi = {}
    for g in names:
        p = ring.zero()
        for w in names:
            c = V.coefficient(w, g)
            if c:
                p = p + c.change_ring(ring) * ring.gen(w)
        psi[g] = p

    monos = [m for m in itertools.combinations_with_replacement(range(len(names)), q)]
    gens = []
    data = {}
    for m in monos:
        exps = [0] * len(names)
        for i in m:
            exps[i] += 1
        gname = _mono_name(names, exps)
        gens.append((gname, sum(wt[names[i]] for i in m)))
        prod = ring.one()
        for i in m:
            prod = prod * psi[names[i]]
        prod = truncate(prod, H.bounds(H.total) + (None,) * len(names))
        coeffs: dict[str, dict] = {}
        for e, c in prod.terms.items():
            wname = _mono_name(names, e[k:])
            coeffs.setdefault(wname, {})[e[:k]] = c
        data[gname] = {w: GradedPolynomial(H.total, t) for w, t in coeffs.items()}
    return ComodulePresentation(H, tuple(gens), data)


def _mono_name(names: list[str], exps) -> str:
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, exps) if e]
    return "*".join(parts) if parts else "1"


# ---------------------------------------------------------------------------
# built-in presentations
# ---------------------------------------------------------------------------

BUILTIN_NAMES = ("weierstrass-gamma", "de-rham-sigma", "bar-sigma", "exterior-c")
_ALIASES = {
    "WeierstrassGamma": "weierstrass-gamma",
    "DeRhamSigma": "de-rham-sigma",
    "BarSigma": "bar-sigma",
    "ExteriorC": "exterior-c",
}
_BUILTIN_CACHE: dict[str, HopfAlgebroidPresentation] = {}


def _primitive_comult(names: tuple[str, ...], modulus: int, weights: Mapping[str, int]) -> dict[str, GradedPolynomial]:
    ring = RingSpec(tuple(VariableSpec(copy_name(n, i), weights[n]) for i in (1, 2) for n in names), modulus)
    return {n: ring.gen(copy_name(n, 1)) + ring.gen(copy_name(n, 2)) for n in names}


def _make_builtin(name: str) -> HopfAlgebroidPresentation:
    W = CoordinateTransformation.WEIGHTS
    if name in ("weierstrass-gamma", "de-rham-sigma"):
        with_r = name == "weierstrass-gamma"
        keys = ("r", "s", "t") if with_r else ("s", "t")
        base = weierstrass_base()
        return HopfAlgebroidPresentation(
            name=name,
            base=base,
            adjoined=tuple(VariableSpec(k, W[k]) for k in keys),
            eta_R=weierstrass_right_unit(with_r),
            comult=comult_from_composition(with_r),
        )
    if name == "bar-sigma":
        base = RingSpec.from_weights({"a2": 2, "a6": 6}, 2)
        adj = (VariableSpec("s", 1), VariableSpec("t", 3))
        total = base.extend(adj)
        g = {n: total.gen(n) for n in total.names}
        return HopfAlgebroidPresentation(
            name=name,
            base=base,
            adjoined=adj,
            eta_R={"a2": g["a2"] + g["s"] ** 2, "a6": g["a6"] + g["t"] ** 2},
            comult=_primitive_comult(("s", "t"), 2, W),
        )
    if name == "exterior-c":
        base = RingSpec((), 2)
        adj = (VariableSpec("s", 1), VariableSpec("t", 3))
        return HopfAlgebroidPresentation(
            name=name,
            base=base,
            adjoined=adj,
            eta_R={},
            comult=_primitive_comult(("s", "t"), 2, W),
            truncation={"s": 2, "t": 2},
        )
    raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def builtin(name: str) -> HopfAlgebroidPresentation:
    """One of the shipped presentations, validated on first use."""
    key = _ALIASES.get(name, name)
    if key not in _BUILTIN_CACHE:
        _BUILTIN_CACHE[key] = _make_builtin(key).validate()
    return _BUILTIN_CACHE[key]


# ---------------------------------------------------------------------------
# JSON config files
# ---------------------------------------------------------------------------


def presentation_from_config(cfg: Mapping) -> HopfAlgebroidPresentation:
    """Build (and validate) a presentation from a parsed JSON document.

    Keys: ``name``, ``modulus`` (0 for Z), ``base`` and ``adjoined`` (name ->
    weight, in order), optional ``truncation`` (name -> nilpotency order),
    ``eta_R`` (base name -> polynomial text over base + adjoined), ``comult``
    (either ``"derive-from-composition"`` or adjoined name -> text in the
    copies ``x_1``, ``x_2``; omitted means every adjoined variable is
    primitive), optional ``counit`` (adjoined name -> text over the base).
    """
    modulus = int(cfg.get("modulus", 0))
    base = RingSpec.from_weights(dict(cfg.get("base", {})), modulus)
    adjoined = tuple(VariableSpec(n, int(w)) for n, w in dict(cfg["adjoined"]).items())
    total = base.extend(adjoined)
    eta = {a: parse_polynomial(total, str(cfg.get("eta_R", {}).get(a, a))) for a in base.names}
    names = tuple(v.name for v in adjoined)
    weights = {v.name: v.weight for v in adjoined}
    comult_cfg = cfg.get("comult")
    if comult_cfg is None:
        comult = _primitive_comult(names, modulus, weights)
    elif comult_cfg == "derive-from-composition":
        if set(names) not in ({"r", "s", "t"}, {"s", "t"}):
            raise ValueError("derive-from-composition needs adjoined variables r,s,t or s,t")
        comult = comult_from_composition("r" in names, modulus)
    else:
        pair = RingSpec(tuple(VariableSpec(copy_name(n, i), weights[n]) for i in (1, 2) for n in names), modulus)
        comult = {x: parse_polynomial(pair, str(comult_cfg[x])) for x in names}
    counit = {x: parse_polynomial(base, str(t)) for x, t in dict(cfg.get("counit", {})).items()}
    H = HopfAlgebroidPresentation(
        name=str(cfg.get("name", "custom")),
        base=base,
        adjoined=adjoined,
        eta_R=eta,
        comult=comult,
        counit=counit,
        truncation={k: int(v) for k, v in dict(cfg.get("truncation", {})).items()},
    )
    return H.validate()


def load_presentation(path: str | Path) -> HopfAlgebroidPresentation:
    return presentation_from_config(json.loads(Path(path).read_text()))
