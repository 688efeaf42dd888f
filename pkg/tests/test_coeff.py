import pytest
from hypothesis import given, strategies as st

from voaengine.coeff import (
    FnElement, IMAG, RewriteRules, as_scalar, fmt, from_sympy, inverse, is_zero,
    partial, reduce, sqrt_pm2, to_sympy,
)

G = FnElement.symbol


def test_partial_of_constant_vanishes():
    assert partial(FnElement.const(1), 1) == FnElement()


def test_partial_of_metric_symbol_is_derived_symbol():
    assert partial(G("g", 1, 2), 3) == G("g", 1, 2, der=(3,))


def test_partial_leibniz():
    f = G("g", 1, 1) * G("g", 2, 2)
    expected = G("g", 1, 1, der=(1,)) * G("g", 2, 2) + G("g", 1, 1) * G("g", 2, 2, der=(1,))
    assert partial(f, 1) == expected


def test_partial_index_out_of_range():
    with pytest.raises(IndexError):
        partial(G("g", 1, 1), 3, dim=2)


def test_mixed_partials_commute():
    f = G("g", 1, 2) * FnElement.coord(1) ** 2 * FnElement.coord(2)
    assert partial(partial(f, 1), 2) == partial(partial(f, 2), 1)


def test_metric_symbols_are_symmetric():
    assert G("g", 2, 1) == G("g", 1, 2)


def test_reduce_metric_derivative():
    dim = 2
    got = reduce(G("g", 1, 2, der=(2,)), RewriteRules("nabla-g", dim))
    expected = FnElement()
    for k in range(1, dim + 1):
        expected = expected + G("g", k, 2) * G("Gamma", k, 1, 2) + G("g", 1, k) * G("Gamma", k, 2, 2)
    assert got == expected


def test_reduce_inverse_contraction():
    dim = 2
    f = sum((G("ginv", 1, j) * G("g", 2, j) for j in range(1, dim + 1)), FnElement())
    assert reduce(f, RewriteRules("inverse-contraction", dim)) == FnElement()
    g = sum((G("ginv", 1, j) * G("g", 1, j) for j in range(1, dim + 1)), FnElement())
    assert reduce(g, RewriteRules("inverse-contraction", dim)) == FnElement.const(1)


def test_reduce_leaves_plain_metric():
    assert reduce(G("g", 1, 1), RewriteRules("nabla-g", 3)) == G("g", 1, 1)


def test_unknown_rule_set():
    with pytest.raises(KeyError):
        RewriteRules("curvature", 2)


def test_reduce_idempotent_on_derivatives():
    rules = RewriteRules("all", 2)
    f = G("g", 1, 1, der=(1, 2)) * G("ginv", 1, 2) + G("ginv", 2, 2, der=(1,))
    once = reduce(f, rules)
    assert reduce(once, rules) == once


def test_square_roots_and_imaginary_unit():
    r = sqrt_pm2(1)
    assert r * r == 2
    s = sqrt_pm2(-1)
    assert s * s == -2
    assert IMAG * IMAG == -1
    assert inverse(r) * r == 1


def test_parameters_form_a_field():
    x = as_scalar("c/(k+2)")
    assert is_zero(x * inverse(x) - 1)
    assert fmt(as_scalar("k") * 0) == "0"
    assert from_sympy(to_sympy(x)) == x


small = st.fractions(min_value=-20, max_value=20, max_denominator=6)


@st.composite
def scalars(draw):
    a, b, c, d = (draw(small) for _ in range(4))
    k = as_scalar("k")
    return (as_scalar(a) + as_scalar(b) * k) * (1 + as_scalar(c) * IMAG) + as_scalar(d) * sqrt_pm2(1)


@given(scalars(), scalars(), scalars())
def test_field_axioms(x, y, z):
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x + y == y + x
    if not is_zero(x):
        assert is_zero(x * inverse(x) - 1)


@given(st.lists(st.tuples(small, st.integers(0, 2), st.integers(0, 2)), max_size=4),
       st.integers(1, 2))
def test_partial_is_a_derivation(terms, i):
    x1, x2 = FnElement.coord(1), FnElement.coord(2)
    f = sum((FnElement.const(c) * x1 ** a * x2 ** b for c, a, b in terms), FnElement())
    g = G("g", 1, 2) * x1 + x2 ** 2
    assert partial(f * g, i) == partial(f, i) * g + f * partial(g, i)
