import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from oracles import count_weighted_monomials, sigma1_by_divisors

from tqmf.quasimodular import (
    NonPositive,
    QSeries,
    b2_q_expansion,
    count_monomials,
    h0_presentation_check,
    named_elements,
    presented_ring_piece,
    sigma1,
    verify_identities,
)

A = sympy.symbols("a1 a2 a3 a4 a6")


def sympy_named():
    a1, a2, a3, a4, a6 = A
    b2 = a1**2 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3**2 + 4 * a6
    b8 = a1**2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3**2 - a4**2
    c4 = b2**2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    delta = -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6
    return {"b2": b2, "b4": b4, "b6": b6, "b8": b8, "c4": c4, "c6": c6, "Delta": delta}


def test_named_elements_match_sympy():
    ours = named_elements()
    for k, expr in sympy_named().items():
        assert sympy.expand(sympy.sympify(str(ours[k]).replace("^", "**")) - expr) == 0, k


def test_identities_hold():
    report = verify_identities()
    assert report.passed, [c for c in report.checks if not c.passed]
    names = [c.name for c in report.checks]
    assert "4*b8 = b2*b6 - b4^2" in names and "1728*Delta = c4^3 - c6^2" in names


def test_square_variant_is_reported_false():
    e = sympy_named()
    assert sympy.expand(1728 * e["Delta"] - (e["c4"] ** 2 - e["c6"] ** 2)) != 0
    assert any("c4^2" in n for n in verify_identities().notes)


def test_discriminant_oracle():
    # the discriminant of 4x^3 + b2 x^2 + 2 b4 x + b6 is 16 Delta
    e = sympy_named()
    X = sympy.Symbol("X")
    disc = sympy.discriminant(4 * X**3 + e["b2"] * X**2 + 2 * e["b4"] * X + e["b6"], X)
    assert sympy.expand(disc - 16 * e["Delta"]) == 0


@pytest.mark.parametrize("n", range(0, 13))
def test_h0_rows(n):
    (row,) = h0_presentation_check(n).rows[-1:]
    assert row.passed
    # presented ring rank equals the count of b-monomials minus relation multiples
    rank, torsion, monos = presented_ring_piece(n)
    assert len(monos) == count_weighted_monomials([2, 4, 6, 8], n)
    assert rank == row.kernel_rank and torsion == ()


def test_h0_ranks_match_hilbert_series():
    # below weight 24 the only relation is 4*b8 = b2*b6 - b4^2 (weight 8), so the
    # rational rank is that of a polynomial ring on weights 2, 4, 6
    ranks = [r.kernel_rank for r in h0_presentation_check(14).rows]
    assert ranks == [count_weighted_monomials([2, 4, 6], n) for n in range(15)]


def test_count_monomials():
    for n in range(20):
        assert count_monomials((2, 4, 6, 8), n) == count_weighted_monomials([2, 4, 6, 8], n)


@given(st.integers(1, 3000))
def test_sigma1_matches_divisor_enumeration(n):
    assert sigma1(n) == sigma1_by_divisors(n)


@given(st.integers(1, 60), st.integers(1, 60))
def test_sigma1_multiplicative(m, n):
    if sympy.gcd(m, n) == 1:
        assert sigma1(m * n) == sigma1(m) * sigma1(n)


@pytest.mark.parametrize(
    "N, expected",
    [(5, [1, -24, -72, -96, -168]), (1, [1]), (2, [1, -24])],
)
def test_b2_expansion_examples(N, expected):
    assert b2_q_expansion(N).to_json() == expected


def test_b2_expansion_to_50():
    q = b2_q_expansion(50)
    assert q.precision == 50
    assert q.to_json() == [1] + [-24 * sigma1_by_divisors(n) for n in range(1, 50)]


def test_qseries_behaviour():
    with pytest.raises(NonPositive):
        b2_q_expansion(0)
    with pytest.raises(NonPositive):
        sigma1(0)
    q = b2_q_expansion(6)
    with pytest.raises(IndexError):
        q[6]
    sq = q * q
    assert sq[1] == -48 and sq.precision == 6
    assert (QSeries((1, 0, 0)) * q).precision == 3
    assert str(QSeries((1, -24))) == "1 - 24*q^1 + O(q^2)"
