import itertools
from fractions import Fraction

import pytest

from voaengine import cdr
from voaengine import superconf as sc
from voaengine.coeff import FnElement, inverse, sqrt_pm2
from voaengine.ope import central_charge, commute_check, nprod, norm_product, nth_product, singular_ope
from voaengine.state import susy_D, translate

x = FnElement.coord
half = Fraction(1, 2)


def nonzero_pairs(A):
    names = A.alg.gen_names()
    return {frozenset((a, b)) for a in names for b in names
            if singular_ope(A.alg.gen(a), A.alg.gen(b))}


def test_chart_generators_and_table():
    A = cdr.bcbg(1)
    assert len(A.alg.gens) == 4
    assert len(nonzero_pairs(A)) == 2
    assert len(nonzero_pairs(cdr.bcbg(2))) == 4


def test_chart_admits_polynomial_coefficients():
    A = cdr.bcbg(2)
    f = A.fn(x(1) * x(2))
    assert f == nprod(A.gamma(1), A.gamma(2))


def test_chart_dimension_must_be_positive():
    with pytest.raises(ValueError):
        cdr.bcbg(0)


def test_std_sections():
    A = cdr.bcbg(2)
    s = cdr.std_sections(A)
    assert s["J"] == norm_product(A.c(1), A.b(1)) + norm_product(A.c(2), A.b(2))
    assert s["G"] == s["Q"] + s["H"]
    assert s["L"] == susy_D(s["G"]) * half
    for n in (1, 2, 3):
        assert central_charge(cdr.std_sections(cdr.bcbg(n))["L"]) == 3 * n


def test_twisted_weights():
    A = cdr.bcbg(1)
    T = cdr.std_sections(A)["T"]
    for name, w in (("gamma1", 0), ("c1", 0), ("b1", 1), ("beta1", 1)):
        g = A.alg.gen(name)
        assert nth_product(T, g, 1) == g * w


def test_scaling_coordinate_change():
    A = cdr.bcbg(1)
    r = cdr.coordinate_change(A, [x(1) * 2], [x(1) * half])
    assert r.ok
    assert r.images["b1"] == A.b(1) * half
    assert r.images["c1"] == A.c(1) * 2
    assert r.images["beta1"] == A.beta(1) * half


def test_triangular_change_has_second_derivative_term():
    A = cdr.bcbg(2)
    r = cdr.coordinate_change(A, [x(1), x(2) + x(1) ** 2], [x(1), x(2) - x(1) ** 2])
    assert r.ok, r.residuals
    # hand value: d^2 g^2 / dx1^2 = -2 contracts c^1 with b_2
    assert r.second_derivative_terms[1] == norm_product(A.c(1), A.b(2)) * -2
    assert r.second_derivative_terms[2] == 0


def test_identity_change():
    A = cdr.bcbg(2)
    r = cdr.coordinate_change(A, [x(1), x(2)], [x(1), x(2)])
    assert r.ok
    for name in A.alg.gen_names():
        assert r.images[name] == A.alg.gen(name)


def test_non_inverse_maps_rejected():
    with pytest.raises(ValueError):
        cdr.coordinate_change(cdr.bcbg(1), [x(1) * 2], [x(1)])


def test_flat_frames():
    A = cdr.bcbg(1)
    fr = cdr.frames(A, cdr.MetricData.flat(1))
    ep, em = fr[("up", 1, 1)], fr[("up", 1, -1)]
    assert singular_ope(ep, ep) == {0: A.alg.vacuum()}
    assert singular_ope(em, em) == {0: A.alg.vacuum()}
    assert commute_check(ep, em).ok
    assert ep == (A.b(1) + A.c(1)) * inverse(sqrt_pm2(1))


def test_frame_dimension_mismatch():
    with pytest.raises(ValueError):
        cdr.frames(cdr.bcbg(2), cdr.MetricData.flat(3))


def test_bessel_coefficients():
    assert all(cdr.bessel_T(r, 0) == 1 for r in range(6))
    assert cdr.bessel_T(2, 1) == 3
    assert cdr.bessel_T(2, 2) == 3
    assert cdr.bessel_T(2, 3) == 0


def test_one_form_current_is_frame():
    A = cdr.bcbg(2)
    m = cdr.MetricData.flat(2)
    fr = cdr.frames(A, m)
    w = cdr.FormData(1, {(1,): 1})
    for s in (1, -1):
        assert cdr.form_current(A, w, s, m) == fr[("up", 1, s)]


def test_zero_form_current_is_constant():
    A = cdr.bcbg(2)
    w = cdr.FormData(0, {(): 5})
    assert cdr.form_current(A, w, 1, cdr.MetricData.flat(2)) == A.alg.vacuum() * 5


def test_two_form_current_with_formal_metric():
    A = cdr.bcbg(2)
    m = cdr.MetricData.formal(2)
    w = cdr.FormData(2, {(1, 2): FnElement.symbol("omega", 1, 2)})
    fr = cdr.frames(A, m)
    got = cdr.form_current(A, w, 1, m)
    expected = A.zero()
    for i, j in itertools.product((1, 2), repeat=2):
        om = w.component((i, j))
        if not om.t:
            continue
        expected = expected + norm_product(fr[("up", i, 1)], fr[("up", j, 1)]) * (om * half)
        for k, l in itertools.product((1, 2), repeat=2):
            coef = om * m.christoffel(i, k, l) * m.ginv(j, k) * half
            expected = expected + A.dgamma(l) * coef
    assert got == expected


def test_formal_forms_limited_to_degree_three():
    A = cdr.bcbg(4)
    with pytest.raises(ValueError):
        cdr.form_current(A, cdr.FormData(4, {(1, 2, 3, 4): 1}), 1, cdr.MetricData.formal(4))


@pytest.mark.parametrize("n", [1, 2])
def test_flat_g_pm(n):
    A = cdr.bcbg(n)
    G = cdr.g_pm(A, cdr.MetricData.flat(n))
    assert G["+"] + G["-"] == cdr.std_sections(A)["G"]
    for s in "+-":
        rep = sc.verify({"G": G[s]}, sc.builtin("n1"))
        assert rep.passed and rep.c == Fraction(3 * n, 2)
    assert commute_check(G["+"], G["-"]).ok


def test_formal_g_pm_contains_cubic_term():
    A = cdr.bcbg(2)
    m = cdr.MetricData.formal(2)
    G = cdr.g_pm(A, m)
    word = nprod(A.c(1), A.b(1), A.b(2))
    coef = G["+"].coefficient_fn(word)
    expected = FnElement()
    for i, k, j in itertools.product((1, 2), repeat=3):
        if {i, k} == {1, 2}:
            sign = 1 if (i, k) == (1, 2) else -1
            expected = expected + m.christoffel(k, j, 1) * m.ginv(i, j) * (sign * half)
    assert coef == expected


def test_curved_obstruction():
    A = cdr.bcbg(2)
    r = cdr.curved_obstruction(A, 1, 2)
    assert r["ok"]
    assert r["flat"] == {}
    assert set(r["ope"]) == {0}


def test_g2_form_metric_oracle():
    """Independent check: (u.phi)^(v.phi)^phi = 6 delta(u,v) vol by brute force."""
    phi = cdr.g2_form()

    def comp(idx):
        return phi.component(idx).const_value()

    def sign(p):
        s = 1
        for a, b in itertools.combinations(range(len(p)), 2):
            if p[a] > p[b]:
                s = -s
        return s

    for u in range(1, 8):
        for v in range(1, 8):
            total = Fraction(0)
            for p in itertools.permutations(range(1, 8)):
                total += sign(p) * comp((u,) + p[0:2]) * comp((v,) + p[2:4]) * comp(p[4:7])
            # each wedge of 2-, 2- and 3-forms appears 2!*2!*3! times among permutations
            assert total / 24 == (6 if u == v else 0)
    assert cdr.g2_metric_oracle(phi) == [[6 if i == j else 0 for j in range(7)] for i in range(7)]


def test_scenario_unknown():
    with pytest.raises(KeyError):
        cdr.scenario("flat_e8")


def test_flat_kahler_scenario():
    S = cdr.scenario("flat_kahler", 1)
    reps = {s: sc.verify(a, S.relation) for s, a in S.sections.items()}
    assert all(r.passed and r.c == 3 for r in reps.values())
    p, m = S.sections["+"], S.sections["-"]
    diag = sc.verify({"G": p["G"] + m["G"], "J": p["J"] + m["J"]}, sc.builtin("n2"))
    assert diag.passed and diag.c == 6


def test_flat_hyperkahler_single_g_per_sign():
    S = cdr.scenario("flat_hyperkahler")
    for s in "+-":
        boot = sc.bootstrap(S.seeds[s], "n4")
        assert boot.ok
        assert boot.slots["G"] == S.sections[s]["G"]
    assert translate(S.sections["+"]["J1"]) != 0
