"""Hypothesis strategies for random states over the small built-in algebras."""
from fractions import Fraction

from hypothesis import strategies as st

from voaengine import cdr
from voaengine.algebras import free_fermions, symplectic_bosons
from voaengine.coeff import FnElement
from voaengine.ope import nprod
from voaengine.state import dpow

CHART = cdr.bcbg(2)
FERMIONS = free_fermions(2, [[1, 0], [0, 1]])
BOSONS = symplectic_bosons(2, [[0, 1], [-1, 0]])

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(lambda x: x != 0)


def generator_atoms(alg, max_order=2):
    return st.tuples(st.sampled_from(alg.gen_names()), st.integers(0, max_order))


def atom_state(alg, atom):
    name, k = atom
    return dpow(alg.gen(name), k)


@st.composite
def words(draw, alg, max_len=3, max_order=2):
    atoms = draw(st.lists(generator_atoms(alg, max_order), min_size=1, max_size=max_len))
    return nprod(*[atom_state(alg, a) for a in atoms])


@st.composite
def chart_functions(draw):
    x1, x2 = FnElement.coord(1), FnElement.coord(2)
    terms = draw(st.lists(st.tuples(coefficients, st.integers(0, 2), st.integers(0, 2)),
                          min_size=1, max_size=3))
    return sum((FnElement.const(c) * x1 ** a * x2 ** b for c, a, b in terms), FnElement())


@st.composite
def chart_states(draw, max_terms=2):
    """Sums of (function) * word over the two-dimensional bc-beta-gamma chart."""
    out = CHART.zero()
    for _ in range(draw(st.integers(1, max_terms))):
        w = draw(words(CHART.alg))
        if draw(st.booleans()):
            w = nprod(CHART.fn(draw(chart_functions())), w)
        out = out + w * draw(coefficients)
    return out


@st.composite
def homogeneous_chart_states(draw):
    """A single word, so parity is definite."""
    w = draw(words(CHART.alg))
    if draw(st.booleans()):
        w = nprod(CHART.fn(draw(chart_functions())), w)
    return w * draw(coefficients)


def half():
    return Fraction(1, 2)
