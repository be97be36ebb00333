"""The elements b2..b8, c4, c6, Delta of a Weierstrass curve, their identities,
the integral ring they generate inside the invariants, and q-expansions."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .hopf import builtin
from .linalg import AbelianGroupPresentation, IntMatrix, invariant_factors, kernel_basis, subquotient
from .poly import GradedPolynomial, RingSpec, apply_hom, graded_basis


class NonPositive(ValueError):
    pass


NAMED_WEIGHTS = {"b2": 2, "b4": 4, "b6": 6, "b8": 8, "c4": 4, "c6": 6, "Delta": 12}


@lru_cache(maxsize=None)
def _named() -> tuple[tuple[str, GradedPolynomial], ...]:
    D = builtin("de-rham-sigma").base
    a1, a2, a3, a4, a6 = D.gens()
    b2 = a1**2 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3**2 + 4 * a6
    b8 = a1**2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3**2 - a4**2
    c4 = b2**2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    delta = -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6
    return tuple({"b2": b2, "b4": b4, "b6": b6, "b8": b8, "c4": c4, "c6": c6, "Delta": delta}.items())


def named_elements() -> dict[str, GradedPolynomial]:
    """b2, b4, b6, b8, c4, c6 and Delta as polynomials in a1..a6."""
    return dict(_named())


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    difference: str

    def to_json(self) -> dict:
        return {"identity": self.name, "passed": self.passed, "difference": self.difference}


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...]
    notes: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks], "notes": list(self.notes)}


def _check(name: str, lhs: GradedPolynomial, rhs: GradedPolynomial) -> IdentityCheck:
    diff = lhs - rhs
    return IdentityCheck(name, diff.is_zero(), str(diff))


def _cubic_discriminant(A, B, C, D):
    return B * B * C * C - 4 * A * C**3 - 4 * B**3 * D - 27 * A * A * D * D + 18 * A * B * C * D


def verify_identities() -> IdentityReport:
    e = named_elements()
    b2, b4, b6, b8, c4, c6, delta = (e[k] for k in ("b2", "b4", "b6", "b8", "c4", "c6", "Delta"))
    checks = [
        _check("4*b8 = b2*b6 - b4^2", 4 * b8, b2 * b6 - b4**2),
        _check("1728*Delta = c4^3 - c6^2", 1728 * delta, c4**3 - c6**2),
        _check(
            "16*Delta = disc(4x^3 + b2*x^2 + 2*b4*x + b6)",
            16 * delta,
            _cubic_discriminant(4, b2, 2 * b4, b6),
        ),
    ]
    sigma = builtin("de-rham-sigma")
    gamma = builtin("weierstrass-gamma")
    for k in ("b2", "b4", "b6", "b8"):
        moved = apply_hom(sigma.eta_R, e[k], sigma.total)
        checks.append(_check(f"eta_R({k}) = {k} over the r-free algebroid", moved, e[k].change_ring(sigma.total)))
    for k in ("c4", "c6", "Delta"):
        moved = apply_hom(gamma.eta_R, e[k], gamma.total)
        checks.append(_check(f"eta_R({k}) = {k} over the full algebroid", moved, e[k].change_ring(gamma.total)))
    variant = 1728 * delta - (c4**2 - c6**2)
    notes = (
        "variant '1728*Delta = c4^2 - c6^2' does not hold "
        f"(difference has weights {sorted(variant.weights_present())}); the cubic form is the true identity",
        "over the full algebroid b2 is not invariant: eta_R(b2) - b2 = "
        + str(apply_hom(gamma.eta_R, b2, gamma.total) - b2.change_ring(gamma.total)),
    )
    return IdentityReport(tuple(checks), notes)


# ---------------------------------------------------------------------------
# H^0 versus the presented ring
# ---------------------------------------------------------------------------

B_RING = RingSpec.from_weights({"b2": 2, "b4": 4, "b6": 6, "b8": 8})


def _relations() -> tuple[GradedPolynomial, GradedPolynomial]:
    b2, b4, b6, b8 = B_RING.gens()
    c4 = b2**2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    delta = -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6
    return 4 * b8 - b2 * b6 + b4**2, 1728 * delta - c4**3 + c6**2


@dataclass(frozen=True)
class H0Row:
    weight: int
    kernel_rank: int
    presented_rank: int
    presented_torsion: tuple[int, ...]
    monomials: int
    index_of_image: AbelianGroupPresentation
    image_basis: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.kernel_rank == self.presented_rank and not self.presented_torsion

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "topological_degree": 2 * self.weight,
            "kernel_rank": self.kernel_rank,
            "presented_rank": self.presented_rank,
            "presented_torsion": list(self.presented_torsion),
            "b_monomials": self.monomials,
            "kernel_mod_image": str(self.index_of_image),
            "image_basis": list(self.image_basis),
            "passed": self.passed,
        }


def presented_ring_piece(n: int) -> tuple[int, tuple[int, ...], list[tuple[int, ...]]]:
    """Rank and torsion of Z[b2,b4,b6,b8]/(two relations) in weight n."""
    monos = graded_basis(B_RING, n)
    idx = {m: i for i, m in enumerate(monos)}
    cols = []
    for rel in _relations():
        w = rel.weight()
        for m in graded_basis(B_RING, n - w):
            p = rel * B_RING.monomial(m)
            cols.append({idx[e]: c for e, c in p.terms.items()})
    M = IntMatrix.from_columns(len(monos), cols)
    r, factors = invariant_factors(M)
    return len(monos) - r, tuple(factors), monos


def _eta_difference_matrix(n: int) -> tuple[IntMatrix, list[tuple[int, ...]]]:
    sigma = builtin("de-rham-sigma")
    monos = graded_basis(sigma.base, n)
    rows: dict[tuple, int] = {}
    entries = {}
    for j, m in enumerate(monos):
        p = sigma.base.monomial(m)
        diff = apply_hom(sigma.eta_R, p, sigma.total) - p.change_ring(sigma.total)
        for e, c in diff.terms.items():
            i = rows.setdefault(e, len(rows))
            entries[(i, j)] = c
    return IntMatrix(len(rows), len(monos), entries), monos


def h0_row(n: int) -> H0Row:
    M, dmonos = _eta_difference_matrix(n)
    ker = kernel_basis(M)
    p_rank, p_tors, bmonos = presented_ring_piece(n)
    named = named_elements()
    gens = [named[k] for k in ("b2", "b4", "b6", "b8")]
    didx = {m: i for i, m in enumerate(dmonos)}
    images = []
    for m in bmonos:
        p = apply_hom(dict(zip(B_RING.names, gens)), B_RING.monomial(m), gens[0].ring)
        v = [0] * len(dmonos)
        for e, c in p.terms.items():
            v[didx[e]] = c
        images.append(v)
    group, _, _ = subquotient(len(dmonos), ker, images) if ker else (AbelianGroupPresentation(), None, None)
    names = []
    for m in bmonos:
        names.append("*".join(f"{x}^{k}" if k > 1 else x for x, k in zip(B_RING.names, m) if k) or "1")
    return H0Row(n, len(ker), p_rank, p_tors, len(bmonos), group, tuple(names))


@dataclass(frozen=True)
class H0Report:
    rows: tuple[H0Row, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_json(self) -> dict:
        return {"passed": self.passed, "rows": [r.to_json() for r in self.rows]}


def h0_presentation_check(n_max: int) -> H0Report:
    """Compare ker(eta_R - eta_L) on each D_n with the presented ring, n <= n_max."""
    return H0Report(tuple(h0_row(n) for n in range(n_max + 1)))


def count_monomials(weights: tuple[int, ...], n: int) -> int:
    return len(graded_basis(RingSpec.from_weights({f"v{i}": w for i, w in enumerate(weights)}), n))


# ---------------------------------------------------------------------------
# q-expansions
# ---------------------------------------------------------------------------


def sigma1(n: int) -> int:
    if n < 1:
        raise NonPositive(n)
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d
            if d * d != n:
                total += n // d
        d += 1
    return total


@dataclass(frozen=True)
class QSeries:
    """Power series truncated at precision N (exponents 0..N-1)."""

    coefficients: tuple[int, ...]

    @property
    def precision(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, k: int) -> int:
        if not 0 <= k < self.precision:
            raise IndexError(f"q^{k} is beyond precision {self.precision}")
        return self.coefficients[k]

    def __mul__(self, other: "QSeries") -> "QSeries":
        N = min(self.precision, other.precision)
        out = [0] * N
        for i in range(N):
            if self.coefficients[i]:
                for j in range(N - i):
                    out[i + j] += self.coefficients[i] * other.coefficients[j]
        return QSeries(tuple(out))

    def to_json(self) -> list[int]:
        return list(self.coefficients)

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coefficients):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*q^{k}")
        return " + ".join(terms).replace("+ -", "- ") + f" + O(q^{self.precision})"


def b2_q_expansion(N: int) -> QSeries:
    """b2 = 1 - 24 * sum sigma1(n) q^n, to precision N.

    >>> print(b2_q_expansion(4))
    1 - 24*q^1 - 72*q^2 - 96*q^3 + O(q^4)
    """
    if N < 1:
        raise NonPositive(N)
    return QSeries((1,) + tuple(-24 * sigma1(n) for n in range(1, N)))
