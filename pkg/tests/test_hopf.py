import json

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from tqmf.hopf import (
    BUILTIN_NAMES,
    CoordinateTransformation,
    ParameterMismatch,
    PresentationError,
    builtin,
    comodule_from_strings,
    compose_transformations,
    load_presentation,
    presentation_from_config,
    sym_power_comodule,
    trivial_comodule,
    weierstrass_right_unit,
)
from tqmf.poly import RingSpec, parse_polynomial

a1, a2, a3, a4, a6, r, s, t, x, y = sympy.symbols("a1 a2 a3 a4 a6 r s t x y")


def sympy_right_unit(with_r: bool) -> dict[str, sympy.Expr]:
    """Coefficients of the transformed Weierstrass equation, by sympy."""
    rr = r if with_r else 0
    X, Y = x + rr, y + s * x + t
    E = sympy.Poly(sympy.expand(Y**2 + a1 * X * Y + a3 * Y - (X**3 + a2 * X**2 + a4 * X + a6)), x, y)
    c = lambda i, j: E.coeff_monomial(x**i * y**j)  # noqa: E731
    assert c(0, 2) == 1 and c(3, 0) == -1
    return {"a1": c(1, 1), "a2": -c(2, 0), "a3": c(0, 1), "a4": -c(1, 0), "a6": -c(0, 0)}


@pytest.mark.parametrize("with_r", [True, False])
def test_right_unit_against_sympy_substitution(with_r):
    ours = weierstrass_right_unit(with_r)
    theirs = sympy_right_unit(with_r)
    for k, p in ours.items():
        assert sympy.expand(sympy.sympify(str(p).replace("^", "**")) - theirs[k]) == 0, k


def test_a4_right_unit_sign():
    # substitution gives a4 - s a3 - t a1 - 2 s t (plus r terms over Gamma)
    sigma = builtin("de-rham-sigma")
    assert sigma.eta_R["a4"] == parse_polynomial(sigma.total, "a4 - a3*s - a1*t - 2*s*t")
    assert sigma.eta_R["a1"] == parse_polynomial(sigma.total, "a1 + 2*s")
    assert sigma.eta_R["a3"] == parse_polynomial(sigma.total, "a3 + 2*t")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_pass_all_structure_checks(name):
    checks = builtin(name).checks()
    kinds = {c.invariant for c in checks}
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert any("coassoc" in k for k in kinds)
    assert any("counit" in k for k in kinds)


def test_aliases():
    assert builtin("DeRhamSigma") is builtin("de-rham-sigma")
    with pytest.raises(KeyError):
        builtin("nope")


def test_corrupted_right_unit_is_rejected_with_named_invariant():
    sigma = builtin("de-rham-sigma")
    bad = dict(sigma.eta_R)
    bad["a4"] = parse_polynomial(sigma.total, "a4 + a3*s - a1*t - 2*s*t")
    with pytest.raises(PresentationError) as err:
        sigma.with_right_unit(bad, "corrupt").validate()
    assert any(f.subject == "a4" for f in err.value.failures)
    assert "a4" in str(err.value)


def test_config_round_trip(tmp_path):
    d = builtin("de-rham-sigma").describe()
    path = tmp_path / "sigma.json"
    path.write_text(json.dumps(d))
    H = load_presentation(path)
    assert H.eta_R == builtin("de-rham-sigma").eta_R
    assert H.comult == builtin("de-rham-sigma").comult


def test_config_derive_comult_matches_builtin():
    d = builtin("weierstrass-gamma").describe()
    d["comult"] = "derive-from-composition"
    H = presentation_from_config(d)
    assert H.comult == builtin("weierstrass-gamma").comult


def test_config_grading_failure():
    d = builtin("de-rham-sigma").describe()
    d["eta_R"]["a2"] = "a2 + s"
    with pytest.raises(PresentationError) as err:
        presentation_from_config(d)
    assert any(f.invariant == "eta_R grading" for f in err.value.failures)


weights = {"r": 2, "s": 1, "t": 3}
P = RingSpec.from_weights({f"{k}{i}": w for i in (1, 2, 3) for k, w in weights.items()})


@st.composite
def transformations(draw, i):
    coeffs = draw(st.lists(st.integers(-3, 3), min_size=3, max_size=3))
    return CoordinateTransformation({k: c * P.gen(f"{k}{i}") for k, c in zip("rst", coeffs)})


@given(transformations(1), transformations(2), transformations(3))
def test_composition_is_associative(T1, T2, T3):
    left = compose_transformations(compose_transformations(T1, T2), T3)
    right = compose_transformations(T1, compose_transformations(T2, T3))
    assert all(left[k] == right[k] for k in "rst")


@given(transformations(1))
def test_identity_transformation_is_neutral(T):
    e = CoordinateTransformation.identity(P)
    for U in (compose_transformations(e, T), compose_transformations(T, e)):
        assert all(U[k] == T[k] for k in "rst")


def test_parameter_shape_checked():
    with pytest.raises(ParameterMismatch):
        CoordinateTransformation({"s": P.gen("s1")})
    with pytest.raises(ParameterMismatch):
        CoordinateTransformation({"r": P.gen("s1"), "s": P.gen("s1"), "t": P.gen("t1")})


def test_comodules_validate():
    for name in BUILTIN_NAMES:
        trivial_comodule(builtin(name)).validate()
    C = builtin("exterior-c")
    V = comodule_from_strings(C, {"v0": 0, "v1": 1}, {"v1": "v1 + v0*s"}).validate()
    for q in range(4):
        sym_power_comodule(V, q).validate()
    bad = comodule_from_strings(C, {"v0": 0, "v1": 1}, {"v0": "v0 + v1*s"})
    with pytest.raises(PresentationError):
        bad.validate()
