from fractions import Fraction

import pytest

from voaengine import algebras as al
from voaengine import hamred
from voaengine.coeff import as_scalar
from voaengine.ope import nth_product

SL2 = al.lie_sl2()
SL21 = al.lie_sl21()
PRINCIPAL = SL2.triples["principal"][0]


@pytest.fixture(scope="module")
def sl2_complex():
    return hamred.build(SL2, PRINCIPAL, "k")


@pytest.fixture(scope="module", params=["minimal", "superprincipal"])
def sl21_complex(request):
    return hamred.build(SL21, SL21.triples[request.param][0], "k")


def test_sl2_principal_factors(sl2_complex):
    names = sl2_complex.alg.gen_names()
    assert names[:3] == ["e", "h", "f"]
    assert sorted(names[3:]) == sorted([hamred.ghost("e"), hamred.antighost("e")])
    assert sl2_complex.half == []


def test_sl21_minimal_has_neutral_factor():
    C = hamred.build(SL21, SL21.triples["minimal"][0], "k")
    assert len(C.grading.shape()) == 5
    assert C.half and all(hamred.neutral(a) in C.alg.gen_names() for a in C.half)


def test_q_squares_to_zero(sl2_complex, sl21_complex):
    for C in (sl2_complex, sl21_complex):
        rep = hamred.q_square_zero(C)
        assert rep.passed and rep.witness == {}


def test_corrupted_structure_constant_breaks_square_zero():
    f = SL21.triples["minimal"][0]
    C = hamred.build(SL21, f, "k", structure_patch={("p13", "p32", "e"): 2})
    rep = hamred.q_square_zero(C)
    assert not rep.passed and rep.witness
    assert rep.to_dict()["passed"] is False


def test_q_has_charge_one(sl2_complex, sl21_complex):
    assert hamred.charge_of_q(sl2_complex) == 1
    assert hamred.charge_of_q(sl21_complex) == 1


def test_sl2_cohomology(sl2_complex):
    table = hamred.cohomology_dims(sl2_complex, 2)
    assert table.square_zero
    assert table.nonzero_charge_vanishes()
    assert table.charge_zero() == {0: 1, 1: 0, 2: 1}


def test_sl21_cohomology_concentrated(sl21_complex):
    table = hamred.cohomology_dims(sl21_complex, 2)
    assert table.square_zero and table.nonzero_charge_vanishes()


def test_zero_nilpotent_gives_trivial_differential():
    C = hamred.build(SL2, None, "k")
    assert not C.Q
    table = hamred.cohomology_dims(C, 2)
    assert table.dims == table.chain_dims


def test_q0_squares_to_zero_on_vectors(sl2_complex, sl21_complex):
    """Applied directly to every basis vector, not through the matrices."""
    for C in (sl2_complex, sl21_complex):
        basis = hamred.cminus_basis(C, 2)
        for elems in basis.blocks.values():
            for _, v in elems:
                assert not nth_product(C.Q, nth_product(C.Q, v, 0), 0)


def test_q0_matrices_compose_to_zero(sl21_complex):
    basis = hamred.cminus_basis(sl21_complex, 2)
    for (w, m) in basis.blocks:
        first = hamred.q0_matrix(sl21_complex, basis, w, m)
        second = hamred.q0_matrix(sl21_complex, basis, w, m + 1)
        product = {}
        for (r, mid), v in second.items():
            for (mid2, c), u in first.items():
                if mid == mid2:
                    product[(r, c)] = product.get((r, c), 0) + v * u
        assert all(v == 0 for v in product.values())
        rows = len(basis.blocks.get((w, m + 1), []))
        assert all(r < rows for r, _ in first)


@pytest.mark.parametrize("level", ["k", 3])
def test_euler_characteristic_matches_chain_counts(level):
    C = hamred.build(SL2, PRINCIPAL, level)
    table = hamred.cohomology_dims(C, 2)
    for w in {w for w, _ in table.chain_dims}:
        chain = sum((-1) ** m * d for (ww, m), d in table.chain_dims.items() if ww == w)
        coh = sum((-1) ** m * d for (ww, m), d in table.dims.items() if ww == w)
        assert chain == coh


def reduced_central_charge(k):
    """Hand formula for the principal sl2 reduction."""
    k = Fraction(k)
    return 1 - 6 * (k + 1) ** 2 / (k + 2)


def test_reduced_virasoro_central_charge():
    assert reduced_central_charge(1) == -7
    assert reduced_central_charge(2) == Fraction(-25, 2)
    for k in (1, 2):
        c, _ = hamred.w_virasoro(hamred.build(SL2, PRINCIPAL, k))
        assert c == reduced_central_charge(k)
    c, _ = hamred.w_virasoro(hamred.build(SL2, PRINCIPAL, "k"))
    assert c == as_scalar("1 - 6*(k+1)**2/(k+2)")
