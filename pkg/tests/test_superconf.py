from fractions import Fraction

import pytest
import sympy

from voaengine import cdr
from voaengine import superconf as sc
from voaengine.coeff import as_scalar
from voaengine.ope import central_charge, norm_product, nth_product
from voaengine.state import State, render


def rows(rel):
    return {(x, y, j): p for x, y, j, p in rel.describe()}


def test_n2_table_has_current_double_pole():
    r = rows(sc.builtin("n2"))
    assert r[("J", "J", 1)] == "(c/3)*1"


def test_svg2_table_first_line():
    r = rows(sc.builtin("svg2"))
    assert r[("Phi", "Phi", 0)] == "(6)*X"
    assert r[("Phi", "Phi", 2)] == "(-7)*1"
    assert not any(k[:2] == ("Phi", "Phi") and k[2] not in (0, 2) for k in r)


def test_virasoro_at_zero_central_charge():
    r = rows(sc.builtin("virasoro", c=0))
    assert ("L", "L", 3) not in r
    assert ("L", "L", 1) in r


def test_unknown_relation_set():
    with pytest.raises(KeyError):
        sc.builtin("n3")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_chart_n2_structure(n):
    s = cdr.std_sections(cdr.bcbg(n))
    rep = sc.verify({"G": s["G"], "J": s["J"]}, sc.builtin("n2"), expect_c=3 * n)
    assert rep.passed and rep.c == 3 * n
    d = rep.to_dict()
    assert d["passed"] and d["c"] == str(3 * n) and d["residuals"] == []


def test_flipping_one_current_term_is_a_mirror_automorphism():
    # J -> -J on one coordinate factor maps an N=2 structure to another one
    A = cdr.bcbg(2)
    s = cdr.std_sections(A)
    J = norm_product(A.c(1), A.b(1)) - norm_product(A.c(2), A.b(2))
    rep = sc.verify({"G": s["G"], "J": J}, sc.builtin("n2"))
    assert rep.passed and rep.c == 6


def test_perturbed_current_fails_in_current_slot():
    A = cdr.bcbg(2)
    s = cdr.std_sections(A)
    J = norm_product(A.c(1), A.b(1)) + norm_product(A.c(2), A.b(2)) * 2
    rep = sc.verify({"G": s["G"], "J": J}, sc.builtin("n2", c=6))
    assert not rep.passed
    assert any(r.left == "J" and r.right == "J" and r.state for r in rep.residuals)
    free = sc.verify({"G": s["G"], "J": J}, sc.builtin("n2"))
    assert not free.passed and free.c == 15


def test_expected_central_charge_mismatch():
    s = cdr.std_sections(cdr.bcbg(1))
    rep = sc.verify({"G": s["G"], "J": s["J"]}, sc.builtin("n2"), expect_c=6)
    assert not rep.passed and rep.info["c_mismatch"]


def test_darboux_n4():
    S = cdr.scenario("darboux_n4")
    rep = sc.verify(S.sections[""], S.relation)
    assert rep.passed and rep.c == 6


def test_bootstrap_recovers_chart_g():
    s = cdr.std_sections(cdr.bcbg(2))
    boot = sc.bootstrap({"J": s["J"]}, "n2")
    assert boot.ok and boot.slots["G"] == s["G"]


def test_bootstrap_from_zero_current_is_degenerate():
    A = cdr.bcbg(1)
    boot = sc.bootstrap({"J": A.zero()}, "n2")
    assert boot.slots["G"] == 0
    rep = sc.verify(boot.slots, sc.builtin("n2"))
    assert not rep.passed
    assert rep.c == 0
    assert rep.info["zero_slots"] == ["G", "J"]


def test_bootstrap_unknown_family():
    with pytest.raises(KeyError):
        sc.bootstrap({}, "n7")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_twist(n):
    s = cdr.std_sections(cdr.bcbg(n))
    tw = sc.twist(s["J"], s["G"])
    assert tw.ok, tw.checks
    assert tw.c_T == 0
    assert tw.Q == s["Q"] and tw.H == s["H"] and tw.T == s["T"]


def test_twist_rejects_non_n2_pair():
    s = cdr.std_sections(cdr.bcbg(1))
    with pytest.raises(Exception):
        sc.twist(s["J"] * 2, s["G"])


def test_virasoro_pair_scale_zero():
    s = cdr.std_sections(cdr.bcbg(1))
    vp = sc.virasoro_pair(s["L"], s["L"], 0)
    assert not vp.ok and vp.c_Y is None and vp.c_T == 3


def test_virasoro_pair_splits_chart_virasoro():
    # L = L1 + L2 on the two coordinates; each half is Virasoro with c = 3
    A = cdr.bcbg(2)
    L = cdr.std_sections(A)["L"]
    half = A.zero()
    for key, v in L.t.items():
        names = {A.alg.gens[g].name[-1] for g, _ in key[0]}
        if names == {"1"}:
            half = half + State(A.alg, {key: v})
    vp = sc.virasoro_pair(L, half, 1)
    assert vp.ok and vp.c_Y == 3 and vp.c_T == 3


def test_svspin7_designates_quartic_not_primary():
    from voaengine.ope import is_primary
    S = cdr.scenario("flat_spin7")
    a = S.sections["+"]
    L = nth_product(a["G"], a["G"], 0) / 2
    assert not is_primary(a["X"], L, 2)
    assert nth_product(L, a["X"], 3) == L.alg.vacuum() * 2
    assert central_charge(a["X"] * Fraction(1, 8)) == Fraction(1, 2)


def test_n4_phase_convention_is_recorded():
    rel = sc.builtin("n4", phase=sympy.I)
    assert rel.name == "n4" and rel.pairs()
    assert as_scalar(sc.builtin("n2", c=3).fixed_c) == 3
    assert render(cdr.std_sections(cdr.bcbg(1))["J"]) == "c1(b1)"
