import json

import pytest
import sympy

from tqmf.cobar import ext_table
from tqmf.hopf import builtin
from tqmf.linalg import AbelianGroupPresentation
from tqmf.sseq import (
    BETA,
    CrossCheckMismatch,
    DescentSS,
    FiltrationSetup,
    apply_d3_and_collapse,
    assemble_e2,
    bockstein_e1,
    class_identities,
    d_a4_squared,
    e2_element,
    invariant_ring_check,
    run_bockstein,
)

Z2 = lambda k: AbelianGroupPresentation(0, (2,) * k)  # noqa: E731


@pytest.fixture(scope="module")
def sigma_table():
    return ext_table(builtin("de-rham-sigma"), s_max=3, n_max=8)


def test_presentations_at_stem_nine():
    assert DescentSS("stated").group(1, 5) == Z2(3)
    assert DescentSS("corrected").group(1, 5) == Z2(2)


def test_corrected_presentation_matches_cobar(sigma_table):
    page = assemble_e2(8, 3, presentation="corrected", table=sigma_table)
    assert page.passed, [c for c in page.checks if not c.passed]


def test_stated_presentation_disagrees_with_cobar(sigma_table):
    with pytest.raises(CrossCheckMismatch):
        assemble_e2(8, 3, presentation="stated", table=sigma_table)
    page = assemble_e2(8, 3, presentation="stated", table=sigma_table, strict=False)
    bad = [c for c in page.checks if not c.passed]
    assert len(bad) == 1 and "(s,n)=(1,5)" in bad[0].detail


def test_class_identities(sigma_table):
    checks = class_identities(sigma_table, 3, 8)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    subjects = {c.subject for c in checks}
    assert {"2*h1 = 0", "2*h21 = 0", "h1^2*b6 = h21^2*b2", "h1*b4 = h21*b2"} <= subjects


def test_d3_is_a_derivation_and_squares_to_zero():
    ss = DescentSS("corrected")
    for n in range(0, 14):
        for s in range(0, n + 1):
            assert ss.check_leibniz(s, n) == []
            assert ss.check_square_zero(s, n)
    assert ss.derivation(e2_element("b2")) == e2_element("h1^3")
    assert ss.derivation(e2_element("b8")) == e2_element("h21^3")
    assert ss.derivation(e2_element("h1")).is_zero()


def test_low_stems_collapse():
    e2 = assemble_e2(8, 8, verify_n_max=0)
    report = apply_d3_and_collapse(e2, stem_max=8)
    assert report.passed, [c for c in report.checks if not c.passed]
    pi = report.table.entries
    assert str(pi[1]) == "Z/2" and str(pi[2]) == "Z/2" and str(pi[3]) == "0"
    # sigma1 in stem 5 is simple 2-torsion
    assert pi[5] == Z2(1)
    assert report.table.detected["sigma1"] == (5, 1)
    assert report.table.detected["eta"] == (1, 1)


def test_stated_presentation_breaks_torsion_pattern():
    e2 = assemble_e2(24, 24, presentation="stated", verify_n_max=0)
    report = apply_d3_and_collapse(e2, stem_max=24)
    bad = [c for c in report.checks if c.invariant == "E4 torsion only in stems 1, 2 mod 4"]
    assert not bad[0].passed and "(3, 15)" in bad[0].detail


def test_page_json_is_deterministic():
    a = assemble_e2(6, 6, verify_n_max=0).dumps()
    b = assemble_e2(6, 6, verify_n_max=0).dumps()
    assert a == b
    doc = json.loads(a)
    assert doc["kind"] == "anss" and doc["meta"]["presentation"] == "corrected"


def test_filtration_setup_checks():
    assert all(c.passed for c in FiltrationSetup().checks())


def test_bockstein_e1_small_box():
    e1 = bockstein_e1(2, 2, 6)
    assert e1.passed
    # q = 0 row is Ext over the exterior algebra: F2[h1, h21]
    for p in range(3):
        for n in range(7):
            expected = sum(1 for i in range(p + 1) if i + 3 * (p - i) == n)
            assert e1.dim((p, 0, n)) == expected


def test_bockstein_landmarks():
    run = run_bockstein(bockstein_e1(2, 2, 6), 2)
    assert run.passed
    found = {f.label: f for f in run.quoted}
    assert found["a1 -> 2h1"].r == 0 and found["a1 -> 2h1"].target == (1, 1, 1)
    assert found["a3 -> 2h21"].target == (1, 1, 3)
    assert found["hits h1^2 b6 + h21^2 b2"].target == (2, 2, 8)


def test_invariant_ring_small():
    report = invariant_ring_check(3)
    assert report.generated_matches and report.free_matches and report.passed


def test_beta_relation_holds_in_characteristic_two():
    # the five generators satisfy beta4^2 = beta2*beta6 + abar0^2*beta8 identically
    a0, a1, a3, a4 = sympy.symbols("abar0 abar1 abar3 abar4")
    loc = {"abar0": a0, "abar1": a1, "abar3": a3, "abar4": a4}
    b = {k: sympy.sympify(v.replace("^", "**"), locals=loc) for k, v in BETA.items()}
    rel = sympy.Poly(b["b4"] ** 2 - b["b2"] * b["b6"] - a0**2 * b["b8"], a0, a1, a3, a4, modulus=2)
    assert rel.is_zero


def test_d_a4_squared_against_sympy():
    a1, a3, a4, s, t = sympy.symbols("a1 a3 a4 s t")
    u = -a3 * s - a1 * t - 2 * s * t
    oracle = sympy.expand((a4 + u) ** 2 - a4**2)
    cmp = d_a4_squared()
    assert sympy.expand(sympy.sympify(str(cmp.computed).replace("^", "**")) - oracle) == 0
    # the stated form is the square of the correction with the a3*s sign flipped
    flipped = sympy.expand((a3 * s - a1 * t - 2 * s * t) ** 2)
    assert sympy.expand(sympy.sympify(str(cmp.stated).replace("^", "**")) - flipped) == 0
    assert cmp.stated_is_square and cmp.agrees_mod_i3
    assert cmp.sign is None
