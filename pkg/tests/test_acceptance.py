"""Acceptance criteria 1-10, one PASS/FAIL line each.

The lines are printed in the pytest terminal summary and, when this file is
run directly, on standard output.  Rectangle sizes can be lowered or raised
through environment variables (see README).
"""
import os
import sys
import time

import pytest
from conftest import ACCEPTANCE_LINES
from oracles import count_weighted_monomials, sigma1_by_divisors
from test_cobar import run_dd_suite
from test_linalg import run_cohomology_suite, run_snf_suite

from tqmf.cobar import cocycle_class, ext_table
from tqmf.hopf import BUILTIN_NAMES, builtin
from tqmf.quasimodular import b2_q_expansion, h0_presentation_check, verify_identities
from tqmf.sseq import (
    apply_d3_and_collapse,
    assemble_e2,
    bockstein_e1,
    d_a4_squared,
    invariant_ring_check,
)

E2_S_MAX = int(os.environ.get("TQMF_ACCEPT_E2_S_MAX", "6"))
E2_N_MAX = int(os.environ.get("TQMF_ACCEPT_E2_N_MAX", "14"))
# s-cochains have weight >= s, so s <= 16 covers every nonzero group for n <= 16
INVERTED_S_MAX = int(os.environ.get("TQMF_ACCEPT_INVERTED_S_MAX", "16"))
STEM_MAX = 30


def record(number: int, ok: bool, detail: str, started: float) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({time.time() - started:.1f}s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def sigma_table():
    """Direct cobar Ext over (D, Sigma) on the verified rectangle (shared by 4 and 7)."""
    return ext_table(builtin("de-rham-sigma"), s_max=E2_S_MAX, n_max=E2_N_MAX)


def test_criterion_1_ext_12_generated_by_r():
    t = time.time()
    table = ext_table(builtin("weierstrass-gamma"), s_max=1, n_max=2)
    group = table[(1, 2)]
    generates = cocycle_class(table, table.named["[r]"].representative).generates()
    ok = str(group) == "Z/12" and generates
    record(1, ok, f"Ext^(1,2) over Gamma = {group}; [r] generates: {generates}", t)
    assert ok


def test_criterion_2_identities():
    t = time.time()
    report = verify_identities()
    failed = [c.name for c in report.checks if not c.passed]
    record(2, report.passed, f"{len(report.checks)} identities checked, failing: {failed or 'none'}", t)
    assert report.passed


def test_criterion_3_invariance_and_h0():
    t = time.time()
    invariance = [c for c in verify_identities().checks if c.name.startswith("eta_R(b")]
    h0 = h0_presentation_check(16)
    ok = len(invariance) == 4 and all(c.passed for c in invariance) and h0.passed
    ranks = [r.kernel_rank for r in h0.rows]
    record(3, ok, f"eta_R(b_i) = b_i for i = 2,4,6,8; H0 ranks n<=16 {ranks} equal the presented ring", t)
    assert ok


def test_criterion_4_e2_against_stated_presentation(sigma_table):
    t = time.time()
    stated = assemble_e2(E2_N_MAX, E2_S_MAX, presentation="stated", table=sigma_table, strict=False)
    corrected = assemble_e2(E2_N_MAX, E2_S_MAX, presentation="corrected", table=sigma_table, strict=False)
    comparison = stated.checks[0]
    identities = [c for c in stated.checks[1:] if c.invariant == "class identity in cobar"]
    quoted = {"2*h1 = 0", "2*h21 = 0", "h1^2*b6 = h21^2*b2"}
    quoted_ok = all(c.passed for c in identities if c.subject in quoted) and {c.subject for c in identities} >= quoted
    extra_ok = all(c.passed for c in identities if c.subject not in quoted)
    detail = (
        f"rectangle s<={E2_S_MAX}, n<={E2_N_MAX} (topological degree <= {2 * E2_N_MAX}); "
        f"stated presentation vs cobar: {comparison.detail}; "
        f"quoted class identities hold: {quoted_ok}; "
        f"h1*b4 = h21*b2 and h1*b6 = h21*b4 hold in cobar with both sides nonzero: {extra_ok}; "
        f"with those two relations added the presentation agrees on every spot: {corrected.checks[0].passed}"
    )
    ok = comparison.passed and quoted_ok
    record(4, ok, detail, t)
    assert quoted_ok, "quoted class identities"
    assert comparison.passed, comparison.detail


def test_criterion_5_d_a4_squared():
    t = time.time()
    cmp = d_a4_squared()
    detail = (
        f"computed d(a4^2) = {cmp.computed}; differs from the stated form by {cmp.computed - cmp.stated} "
        f"under either sign; agrees modulo I^3: {cmp.agrees_mod_i3}; stated form is the square of the "
        f"a4 correction with the a3*s sign flipped: {cmp.stated_is_square}; computed minus u^2 where u = eta_R(a4) - a4: "
        f"{cmp.missing_cross_term}"
    )
    record(5, cmp.passed, detail, t)
    assert cmp.passed, detail


def test_criterion_6_bockstein_e1_and_invariants():
    t = time.time()
    e1 = bockstein_e1(3, 4, 8)
    inv = invariant_ring_check(4)
    rels = "; ".join(f"(q={q}, n={n}) {r}" for q, n, r in inv.relations)
    ok = e1.passed and inv.passed
    detail = (
        f"E1 over D/I equals E1 over F2 on p<=3, q<=4, n<=8: {e1.passed}; "
        f"Ext^0 dimensions equal those of the F2-algebra generated by the five elements for q<=4: {inv.generated_matches}; "
        f"b_i leading forms invariant: {all(c.passed for c in inv.representatives)}; "
        f"the generators are not algebraically independent: {rels}"
    )
    record(6, ok, detail, t)
    assert ok


def test_criterion_7_d3_and_collapse(sigma_table):
    t = time.time()
    e2 = assemble_e2(
        STEM_MAX, STEM_MAX, presentation="corrected",
        verify_s_max=E2_S_MAX, verify_n_max=E2_N_MAX, table=sigma_table,
    )
    report = apply_d3_and_collapse(e2, STEM_MAX)
    failing = [f"{c.invariant} [{c.subject}]" for c in report.checks if not c.passed]
    pi24 = report.table.entries[24]
    delta_ok = report.table.detected.get("Delta") == (24, 0)
    stated = apply_d3_and_collapse(assemble_e2(STEM_MAX, STEM_MAX, presentation="stated", verify_n_max=0), STEM_MAX)
    stated_fail = [f"{c.invariant}: {c.detail}" for c in stated.checks if not c.passed]
    ok = report.passed and delta_ok
    detail = (
        f"E2 from the cobar-verified presentation; stems<={STEM_MAX}; failing checks: {failing or 'none'}; "
        f"pi_24 = {pi24} with Delta in filtration 0; torsion stems {report.table.torsion_stems()}; "
        f"for comparison the stated presentation gives: {stated_fail or 'no failures'}"
    )
    record(7, ok, detail, t)
    assert ok


def test_criterion_8_inverting_two():
    t = time.time()
    n_max = 16
    table = ext_table(builtin("de-rham-sigma"), s_max=INVERTED_S_MAX, n_max=n_max, inverted=(2,))
    higher = [(s, n, str(table[(s, n)])) for s in range(1, INVERTED_S_MAX + 1) for n in range(n_max + 1) if not table[(s, n)].is_trivial()]
    h0 = [table[(0, n)] for n in range(n_max + 1)]
    expected = [count_weighted_monomials([2, 4, 6], n) for n in range(n_max + 1)]
    torsion_free = all(not g.torsion for g in h0)
    ok = not higher and torsion_free and [g.free_rank for g in h0] == expected
    detail = (
        f"Ext^(s,n)[1/2] = 0 for 1<=s<={INVERTED_S_MAX}, n<={n_max}: {not higher}; "
        f"Ext^0 ranks {[g.free_rank for g in h0]} vs Z[1/2][a2,a4,a6] {expected}"
    )
    record(8, ok, detail, t)
    assert ok, higher[:5]


def test_criterion_9_b2_q_expansion():
    t = time.time()
    ours = b2_q_expansion(50).to_json()
    oracle = [1] + [-24 * sigma1_by_divisors(n) for n in range(1, 50)]
    ok = ours == oracle
    record(9, ok, f"50 coefficients match divisor enumeration; q^49 coefficient {ours[-1]}", t)
    assert ok


def test_criterion_10_property_suites():
    t = time.time()
    snf = run_snf_suite(1000)
    coh, with_torsion = run_cohomology_suite(1000)
    slices, dd = run_dd_suite()
    structure = [
        f"{name}: {c.invariant}[{c.subject}]"
        for name in BUILTIN_NAMES
        for c in builtin(name).checks()
        if not c.passed
    ]
    kinds = {c.invariant for name in BUILTIN_NAMES for c in builtin(name).checks()}
    has_laws = any("coassoc" in k for k in kinds) and any("counit" in k for k in kinds)
    ok = not snf and not coh and not dd and not structure and has_laws
    detail = (
        f"SNF 1000 random matrices: {len(snf)} failures; cohomology_at 1000 cases "
        f"({with_torsion} with torsion): {len(coh)} failures; d o d on {slices} slices: {len(dd)} failures; "
        f"coassociativity/counit on {len(BUILTIN_NAMES)} builtins: {len(structure)} failures"
    )
    record(10, ok, detail, t)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
