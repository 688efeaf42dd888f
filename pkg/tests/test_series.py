import itertools
from fractions import Fraction

import pytest

from voaengine import algebras as al
from voaengine import cdr
from voaengine import series as se
from voaengine.algebras import make_algebra
from voaengine.coeff import FnElement, partial
from voaengine.ope import norm_product
from voaengine.state import AlgebraError, State, translate

half = Fraction(1, 2)


def fermion_virasoro(A):
    L = A.vacuum() * 0
    for name in A.gen_names():
        psi = A.gen(name)
        L = L + norm_product(translate(psi), psi) * half
    return L


def strict_half_odd_partitions(max_weight):
    """Independent count of sets of distinct parts in {1/2, 3/2, ...} by total."""
    parts = [Fraction(2 * i + 1, 2) for i in range(int(max_weight) + 1)]
    counts = {}
    for r in range(len(parts) + 1):
        for combo in itertools.combinations(parts, r):
            s = sum(combo, Fraction(0))
            if s <= max_weight:
                counts[s] = counts.get(s, 0) + 1
    return counts


def test_one_fermion_dimensions():
    A = al.free_fermions(1, [[1]])
    basis = se.weight_basis(A, fermion_virasoro(A), None, 2)
    expected = {Fraction(w, 2): d for w, d in zip(range(5), [1, 1, 0, 1, 1])}
    got = {w: basis.dims().get(w, 0) for w in expected}
    assert got == expected
    oracle = strict_half_odd_partitions(2)
    assert all(basis.dims().get(w, 0) == oracle.get(w, 0) for w in expected)


def test_one_fermion_trace_with_offset():
    A = al.free_fermions(1, [[1]])
    basis = se.weight_basis(A, fermion_virasoro(A), None, 4)
    tr = se.graded_trace(basis, Fraction(-1, 48))
    oracle = strict_half_odd_partitions(4)
    expected = se.QSeries({(w - Fraction(1, 48), 0): d for w, d in oracle.items()})
    assert tr == expected
    assert tr.t[(Fraction(-1, 48), 0)] == 1


def test_two_fermions_square_one_fermion_series():
    one = al.free_fermions(1, [[1]])
    two = al.free_fermions(2, [[1, 0], [0, 1]])
    t1 = se.graded_trace(se.weight_basis(one, fermion_virasoro(one), None, 3))
    t2 = se.graded_trace(se.weight_basis(two, fermion_virasoro(two), None, 3))
    assert t2 == (t1 * t1).truncate(3)


def test_empty_algebra_trace():
    E = make_algebra("empty", [], {})
    tr = se.graded_trace(se.weight_basis(E, None, None, 3))
    assert tr == se.QSeries({(0, 0): 1})


def test_current_zero_mode_charges():
    A = cdr.bcbg(1)
    s = cdr.std_sections(A)
    basis = se.weight_basis(A.alg, s["T"], s["J"], 1, degree_bound=1)
    J0 = se.mode_matrix(s["J"], basis, 0, weight=1)
    for (w, m, d), elems in basis.blocks.items():
        for e in elems:
            # the zero mode of J is diagonal with the charge as eigenvalue
            assert J0.get((e, e), 0) == m
            assert all(k[1] != e or k[0] == e for k in J0)
    single = {State(A.alg, {e: 1}): m for (w, m, d), elems in basis.blocks.items()
              for e in elems if len(e[0]) == 1 and not e[1]}
    assert single[A.c(1)] == 1 and single[A.b(1)] == -1


def test_virasoro_zero_mode_is_diagonal():
    A = al.free_fermions(2, [[1, 0], [0, 1]])
    L = fermion_virasoro(A)
    basis = se.weight_basis(A, L, None, 2)
    L0 = se.mode_matrix(L, basis, 0)
    for (w, _, _), elems in basis.blocks.items():
        for e in elems:
            assert L0.get((e, e), 0) == w
    assert all(r == c for r, c in L0)


def de_rham_setup(n=2, bound=3):
    A = cdr.bcbg(n)
    s = cdr.std_sections(A)
    deg = {}
    for i in range(1, n + 1):
        deg |= {f"gamma{i}": 1, f"c{i}": 1, f"b{i}": -1, f"beta{i}": -1}
    return A, s, se.twist_blocks(A.alg, s["T"], s["J"], s["Q"], s["H"], cutoff=2, degree=deg,
                                 degree_bound=bound)


@pytest.fixture(scope="module")
def de_rham():
    return de_rham_setup()


def test_q0_is_de_rham_on_weight_zero(de_rham):
    A, s, tb = de_rham
    basis = tb["basis"]
    for (w, m, d), elems in basis.blocks.items():
        if w != 0 or m > 0:
            continue
        for e in elems:
            f = FnElement({e[1]: Fraction(1)})
            got = State(A.alg)
            for (row, col), v in tb["Q0"].items():
                if col == e:
                    got = got + basis.state(row) * v
            expected = State(A.alg)
            for i in (1, 2):
                expected = expected + norm_product(A.fn(partial(f, i)), A.c(i))
            assert got == expected


def test_homotopy_identity(de_rham):
    assert de_rham[2]["identity"]


def test_de_rham_cohomology(de_rham):
    _, _, tb = de_rham
    coh = se.complex_cohomology(tb["basis"], tb["Q0"])
    nonzero = {k: v for k, v in coh.items() if v}
    assert nonzero == {(0, 0, 0): 1}
    assert all(v == 0 for (w, _, _), v in coh.items() if w == 1)


def test_zero_differential_gives_whole_space(de_rham):
    basis = de_rham[2]["basis"]
    coh = se.complex_cohomology(basis, {})
    assert coh == {k: len(v) for k, v in basis.blocks.items()}


def test_non_differential_rejected(de_rham):
    basis = de_rham[2]["basis"]
    e1, e2, e3 = [e for elems in basis.blocks.values() for e in elems][:3]
    with pytest.raises(AlgebraError):
        se.complex_cohomology(basis, {(e2, e1): 1, (e3, e2): 1})


def test_dimensions_independent_of_generator_order():
    one = al.free_fermions(1, [[1]])
    bos = al.symplectic_bosons(2, [[0, 1], [-1, 0]])
    a, b = al.tensor(one, bos), al.tensor(bos, one)
    da = se.weight_basis(a, None, None, 2).dims()
    db = se.weight_basis(b, None, None, 2).dims()
    assert da == db


def test_tensor_trace_multiplicative():
    one = al.free_fermions(1, [[1]])
    bos = al.symplectic_bosons(2, [[0, 1], [-1, 0]])
    t = se.graded_trace(se.weight_basis(al.tensor(one, bos), None, None, 3))
    t1 = se.graded_trace(se.weight_basis(one, None, None, 3))
    t2 = se.graded_trace(se.weight_basis(bos, None, None, 3))
    assert t == (t1 * t2).truncate(3)


def test_unbounded_zero_weight_sector_rejected():
    A = cdr.bcbg(1)
    s = cdr.std_sections(A)
    with pytest.raises(AlgebraError):
        se.weight_basis(A.alg, s["T"], s["J"], 1)
