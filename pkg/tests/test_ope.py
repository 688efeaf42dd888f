from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from strategies import CHART, chart_states, homogeneous_chart_states
from voaengine import cdr
from voaengine.coeff import FnElement, partial
from voaengine.ope import (
    central_charge, commute_check, is_primary, is_primary_n1, is_virasoro, norm_product, nprod,
    nth_product, singular_ope, skew_ope,
)
from voaengine.state import AlgebraError, dpow, susy_D, translate

A = cdr.bcbg(2)
S = cdr.std_sections(A)
vac = A.alg.vacuum()


def test_beta_gamma_simple_pole():
    assert nth_product(A.beta(1), A.gamma(1), 0) == vac


def test_off_diagonal_vanishes():
    assert nth_product(A.b(1), A.c(2), 0) == 0


def test_virasoro_quartic_pole():
    L = cdr.std_sections(cdr.bcbg(1))["L"]
    assert nth_product(L, L, 3) == L.alg.vacuum() * Fraction(3, 2)


def test_singular_ope_bc():
    assert singular_ope(A.b(1), A.c(1)) == {0: vac}


def test_coordinates_commute():
    assert singular_ope(A.gamma(1), A.gamma(1)) == {}


def test_beta_against_function():
    x1, x2 = FnElement.coord(1), FnElement.coord(2)
    f = x1 * x2 + x1 ** 3
    assert singular_ope(A.beta(1), A.fn(f)) == {0: A.fn(partial(f, 1))}


def test_vacuum_is_identity():
    for x in (A.b(1), S["G"], A.fn(FnElement.coord(2))):
        assert norm_product(vac, x) == x
        assert norm_product(x, vac) == x


def quasi_associator(a, b, c):
    """(a.b).c - a.(b.c) via the finite correction sum."""
    sign = -1 if a.parity() and b.parity() else 1
    out = A.zero() if a.alg is A.alg else type(a)(a.alg)
    for j in range(6):
        out = out + nth_product(a, nth_product(b, c, j), -j - 2)
        out = out + nth_product(b, nth_product(a, c, j), -j - 2) * sign
    return out


def test_quasi_associativity_on_bcb():
    b, c = A.b(1), A.c(1)
    left = norm_product(norm_product(b, c), b)
    right = norm_product(b, norm_product(c, b))
    assert left - right == quasi_associator(b, c, b)


def test_quasi_associativity_on_beta_gamma():
    be, ga = A.beta(1), A.gamma(1)
    dga = translate(ga)
    left = norm_product(norm_product(be, dga), be)
    right = norm_product(be, norm_product(dga, be))
    assert left - right == quasi_associator(be, dga, be)
    assert left != right


def test_reordering_against_skew_formula():
    c, b = A.c(1), A.b(1)
    assert norm_product(c, b) == -norm_product(b, c)


def test_negative_products_use_translation():
    x, y = A.b(1), S["Q"]
    assert nth_product(x, y, -3) == norm_product(dpow(x, 2), y) * Fraction(1, 2)


def test_commute_checks():
    fr = cdr.frames(cdr.bcbg(1), cdr.MetricData.flat(1))
    assert commute_check(fr[("up", 1, 1)], fr[("up", 1, -1)]).ok
    bad = commute_check(A.b(1), A.c(1))
    assert not bad.ok
    assert bad.witness["ab"] == {0: vac}
    assert commute_check(A.gamma(1), A.gamma(2)).ok


def test_central_charge_of_chart_virasoro():
    for n in (1, 2, 3):
        assert central_charge(cdr.std_sections(cdr.bcbg(n))["L"]) == 3 * n


def test_zero_is_not_virasoro():
    assert not is_virasoro(A.zero())
    with pytest.raises(AlgebraError):
        central_charge(A.zero())


def test_primaries():
    L = S["L"]
    assert is_primary(A.b(1), L, Fraction(1, 2))
    assert is_primary(A.gamma(1), L, 0)
    assert is_primary(A.c(2), L, Fraction(1, 2))
    assert not is_primary(A.b(1), L, 1)
    assert is_primary_n1(A.gamma(1), L, S["G"], 0)


def test_n2_charges():
    J = S["J"]
    assert nth_product(J, S["Q"], 0) == S["Q"]
    assert nth_product(J, S["H"], 0) == -S["H"]


def test_mixed_algebras_rejected():
    with pytest.raises(AlgebraError):
        nth_product(A.b(1), cdr.bcbg(1).c(1), 0)


def skew_oracle(a, b):
    """b_(n)a from the products a_(m)b."""
    sign = -1 if a.parity() and b.parity() else 1
    ope = singular_ope(a, b)
    top = max(ope, default=-1)
    out = {}
    for n in range(top + 1):
        acc = type(a)(a.alg)
        for j in range(top - n + 1):
            p = ope.get(n + j)
            if p:
                acc = acc + dpow(p, j) * (sign * (-1) ** (n + j + 1)) / factorial(j)
        if acc:
            out[n] = acc
    return out


@given(homogeneous_chart_states(), homogeneous_chart_states())
def test_skew_symmetry_on_random_states(a, b):
    expected = skew_oracle(a, b)
    assert singular_ope(b, a) == expected
    assert skew_ope(a, b) == expected


@given(chart_states(), chart_states(), st.integers(0, 3))
def test_sesquilinearity(a, b, n):
    assert nth_product(translate(a), b, n) == nth_product(a, b, n - 1) * (-n)
    # a_(n) d b = d(a_(n) b) + n a_(n-1) b
    rhs = translate(nth_product(a, b, n)) + (nth_product(a, b, n - 1) * n if n else 0)
    assert nth_product(a, translate(b), n) == rhs


@given(homogeneous_chart_states(), homogeneous_chart_states(), st.integers(0, 2))
def test_susy_derivation_of_products(a, b, n):
    sign = -1 if a.parity() else 1
    lhs = susy_D(nth_product(a, b, n))
    rhs = nth_product(susy_D(a), b, n) + nth_product(a, susy_D(b), n) * sign
    assert lhs == rhs


@given(homogeneous_chart_states(), homogeneous_chart_states(), homogeneous_chart_states(),
       st.integers(0, 2), st.integers(0, 2))
def test_borcherds_commutator(a, b, c, m, n):
    sign = -1 if a.parity() and b.parity() else 1
    lhs = nth_product(a, nth_product(b, c, n), m) - nth_product(b, nth_product(a, c, m), n) * sign
    rhs = CHART.zero()
    for j in range(m + 1):
        rhs = rhs + nth_product(nth_product(a, b, j), c, m + n - j) * comb(m, j)
    assert lhs == rhs


def test_nprod_is_right_nested():
    a, b, c = A.b(1), A.c(1), A.beta(2)
    assert nprod(a, b, c) == norm_product(a, norm_product(b, c))
