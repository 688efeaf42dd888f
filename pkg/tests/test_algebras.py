from fractions import Fraction

import pytest

from voaengine import algebras as al
from voaengine import superconf
from voaengine.ope import central_charge, is_primary, singular_ope
from voaengine.state import AlgebraError, susy_D


def test_one_fermion():
    A = al.free_fermions(1, [[1]])
    psi = A.gen("psi1")
    assert singular_ope(psi, psi) == {0: A.vacuum()}


def test_fermions_with_zero_pairing_commute():
    A = al.free_fermions(2, [[0, 0], [0, 0]])
    for x in A.gen_names():
        for y in A.gen_names():
            assert singular_ope(A.gen(x), A.gen(y)) == {}


def test_hyperbolic_fermions():
    A = al.free_fermions(2, [[0, 1], [1, 0]])
    assert singular_ope(A.gen("psi1"), A.gen("psi2")) == {0: A.vacuum()}
    assert singular_ope(A.gen("psi1"), A.gen("psi1")) == {}


def test_fermion_pairing_must_be_symmetric():
    with pytest.raises(AlgebraError):
        al.free_fermions(2, [[0, 1], [0, 0]])
    with pytest.raises(AlgebraError):
        al.free_fermions(2, [[1]])


def test_symplectic_bosons():
    A = al.symplectic_bosons(2, [[0, 1], [-1, 0]])
    x, y = A.gen_names()
    assert singular_ope(A.gen(x), A.gen(y)) == {0: A.vacuum()}
    assert singular_ope(A.gen(y), A.gen(x)) == {0: -A.vacuum()}
    Z = al.symplectic_bosons(2, [[0, 0], [0, 0]])
    assert all(singular_ope(Z.gen(a), Z.gen(b)) == {} for a in Z.gen_names() for b in Z.gen_names())
    S = al.symplectic_bosons(2, [[0, 3], [-3, 0]])
    assert singular_ope(S.gen(x), S.gen(y)) == {0: S.vacuum() * 3}
    with pytest.raises(AlgebraError):
        al.symplectic_bosons(2, [[0, 1], [1, 0]])


def test_affine_sl2():
    A = al.affine(al.lie_sl2(), "k")
    e, f, h = A.gen("e"), A.gen("f"), A.gen("h")
    k = A.scalar("k")
    assert singular_ope(e, f) == {0: h, 1: k}
    assert singular_ope(h, h) == {1: k * 2}
    assert singular_ope(h, e) == {0: e * 2}


def test_affine_abelian_has_only_double_poles():
    g = al.parse_lie_data("name u1\neven a b\nform a a = 1\nform b b = 1\n")
    A = al.affine(g, 1)
    for x in A.gen_names():
        for y in A.gen_names():
            assert set(singular_ope(A.gen(x), A.gen(y))) <= {1}


def test_affine_degenerate_form():
    g = al.parse_lie_data("name deg\neven a\n")
    with pytest.raises(AlgebraError):
        al.affine(g, 1)


def test_lie_builtins_are_consistent():
    for name in ("sl2", "gl11", "sl21"):
        g = al.lie_builtin(name)
        assert g.jacobi_violations() == []
        assert g.antisymmetry_violations() == []
        assert g.invariance_violations() == []
        assert g.is_nondegenerate()


def test_unknown_lie_algebra():
    with pytest.raises(AlgebraError):
        al.lie_builtin("e8")


def test_lie_data_file_round_trip(tmp_path):
    text = """
    # sl2 in the plain-text format
    name sl2
    even e h f
    form h h = 2
    form e f = 1
    bracket h e = 2 e
    bracket h f = -2 f
    bracket e f = 1 h
    triple principal f = f ; h = h ; e = e
    """
    path = tmp_path / "sl2.lie"
    path.write_text(text)
    g = al.load_lie_data(path)
    ref = al.lie_sl2()
    assert g.brackets == ref.brackets
    assert g.form == ref.form
    assert g.jacobi_violations() == []


def test_supersymmetric_affine_products():
    g = al.lie_sl2()
    V = al.vg_super(g, 1)
    eb, fb, hb = V.gen("ebar"), V.gen("fbar"), V.gen("hbar")
    # level k pairs the odd fields with (k + dual Coxeter number) times the form
    assert singular_ope(eb, fb) == {0: V.vacuum() * 3}
    assert singular_ope(susy_D(eb), fb) == {0: hb}
    assert susy_D(eb) == V.gen("e")


def test_kac_todorov_central_charge():
    g = al.lie_sl2()
    V = al.vg_super(g, 1)
    kt = al.kac_todorov(V, 1)
    report = superconf.verify({"G": kt.G}, superconf.builtin("n1"))
    assert report.passed
    # independent closed form: k dim g/(k + h) + dim g / 2 with h = 2
    oracle = Fraction(1 * 3, 1 + 2) + Fraction(3, 2)
    assert central_charge(kt.L) == oracle == Fraction(5, 2)
    for b in ("ebar", "hbar", "fbar"):
        assert is_primary(V.gen(b), kt.L, Fraction(1, 2))


def test_kac_todorov_critical_level():
    V = al.vg_super(al.lie_sl2(), -2)
    with pytest.raises(AlgebraError):
        al.kac_todorov(V)


def test_sl2_grading_shapes():
    g = al.lie_sl2()
    gr = al.sl2_grading(g, g.triples["principal"][0])
    assert gr.blocks == {-1: ["f"], 0: ["h"], 1: ["e"]}
    zero = al.sl2_grading(g, None)
    assert zero.blocks == {0: ["e", "h", "f"]}
    s = al.lie_sl21()
    shape = al.sl2_grading(s, s.triples["minimal"][0]).shape()
    assert [j for j, _ in shape] == [-1, Fraction(-1, 2), 0, Fraction(1, 2), 1]
    assert [d for _, d in shape] == [1, 2, 2, 2, 1]


def test_grading_requires_stored_triple():
    g = al.lie_sl2()
    with pytest.raises(AlgebraError):
        al.sl2_grading(g, {"e": 1})


def test_tensor_product_keeps_factors_commuting():
    F = al.free_fermions(1, [[1]])
    B = al.symplectic_bosons(2, [[0, 1], [-1, 0]])
    T = al.tensor(F, B)
    assert len(T.gens) == 3
    psi = T.gen("psi1")
    for x in T.gen_names()[1:]:
        assert singular_ope(psi, T.gen(x)) == {}
