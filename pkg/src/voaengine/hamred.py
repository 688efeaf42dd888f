"""Quantum Hamiltonian reduction: the BRST complex of an affine superalgebra.

The complex is affine(g, k) tensor charged ghosts for n_- + n_+ tensor
neutral fields on g_{1/2}.  Generator weights follow the Kac-Wakimoto
conformal vector: a current in g_j has weight 1 - j, the ghost paired with
g_j has weight j and its antighost 1 - j, neutral fields weight 1/2.

Cohomology is computed on the subcomplex generated by the dressed currents
J^(a) (a in g_{<=0}), the ghosts and the neutral fields.  Its weight spaces
are finite, and the complementary factor is acyclic, so it carries the
whole cohomology.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import Matrix

from .algebras import LieSuperData, affine, make_algebra, sl2_grading, tensor
from .coeff import as_scalar, fmt
from .linalg import Echelon, nullspace
from .ope import nprod, norm_product, nth_product, singular_ope
from .state import AlgebraDef, AlgebraError, GeneratorDecl, State, dpow, render


def ghost(name: str) -> str:
    return f"gh_{name}"


def antighost(name: str) -> str:
    return f"agh_{name}"


def neutral(name: str) -> str:
    return f"ne_{name}"


@dataclass
class CminusGenerator:
    name: str
    state: State
    weight: Fraction
    charge: int
    parity: int


@dataclass
class ReductionComplex:
    lie: LieSuperData
    f: dict
    level: object
    grading: object
    alg: AlgebraDef
    Q: State
    J: State
    positive: list  # basis of n_+
    half: list  # basis of g_{1/2}
    generators: list = field(default_factory=list)  # C^- generators

    def gen(self, name: str) -> State:
        return self.alg.gen(name)


def _sign(p: int) -> int:
    return -1 if p % 2 else 1


def _neutral_form(g: LieSuperData, f: dict, half: list) -> dict:
    form = {}
    for a in half:
        for b in half:
            v = g.pair(f, g.bracket(g.vec(a), g.vec(b)))
            if v != 0:
                form[(a, b)] = v
    return form


def build(g: LieSuperData, f: dict | None, k, structure_patch: dict | None = None) -> ReductionComplex:
    """Assemble C_k(g, f) and its BRST vector Q.

    ``structure_patch`` overrides individual n_+ structure constants
    {(a, b, c): value} inside Q only; it exists to build perturbation
    controls for the square-zero check.
    """
    k = as_scalar(k)
    f = {x: Fraction(v) for x, v in (f or {}).items() if v != 0}
    gr = sl2_grading(g, f)
    deg = {b: gr.degree(b) for b in g.basis}
    pos = gr.n_plus if f else []
    half = gr.half if f else []

    aff = affine(g, k, weights={b: 1 - deg[b] for b in g.basis})
    factors = [aff]
    if pos:
        gens, prods = [], {}
        for a in pos:
            p = (g.parity[a] + 1) % 2
            gens.append(GeneratorDecl(antighost(a), p, None, 1 - deg[a]))
            gens.append(GeneratorDecl(ghost(a), p, None, deg[a]))
            prods[(antighost(a), ghost(a))] = {0: [(1, None, 0)]}
        factors.append(make_algebra("ghosts", gens, prods))
    if half:
        form = _neutral_form(g, f, half)
        n = len(half)
        mat = [[form.get((a, b), 0) for b in half] for a in half]
        if Matrix(mat).rank() < n:
            raise AlgebraError("degenerate form (f,[.,.]) on g_{1/2}")
        gens = [GeneratorDecl(neutral(a), g.parity[a], None, Fraction(1, 2)) for a in half]
        prods = {}
        for i, a in enumerate(half):
            for b in half[i:]:
                v = form.get((a, b), 0)
                if v != 0:
                    prods[(neutral(a), neutral(b))] = {0: [(v, None, 0)]}
        factors.append(make_algebra("neutral", gens, prods))
    alg = tensor(*factors, name=f"C_k({g.name})")
    G = alg.gen

    Q = State(alg)
    for a in pos:
        Q = Q + norm_product(G(a), G(ghost(a))) * _sign(g.parity[a])
        fa = g.pair(f, g.vec(a))
        if fa != 0:
            Q = Q + G(ghost(a)) * fa
        if a in half:
            Q = Q + norm_product(G(ghost(a)), G(neutral(a)))
    patch = structure_patch or {}
    for a, b in itertools.product(pos, repeat=2):
        br = g.bracket(g.vec(a), g.vec(b))
        for c in pos:
            coef = patch.get((a, b, c), br.get(c, 0))
            if coef == 0:
                continue
            sgn = _sign(g.parity[a] * g.parity[c])
            Q = Q - nprod(G(antighost(c)), G(ghost(a)), G(ghost(b))) * (Fraction(sgn, 2) * coef)

    J = State(alg)
    for a in pos:
        J = J + norm_product(G(ghost(a)), G(antighost(a)))

    C = ReductionComplex(g, f, k, gr, alg, Q, J, pos, half)
    C.generators = _cminus_generators(C, deg)
    return C


def _cminus_generators(C: ReductionComplex, deg: dict) -> list:
    g, G = C.lie, C.alg.gen
    out = []
    for a in g.basis:
        if deg[a] > 0:
            continue
        st = G(a)
        # ghost dressing: the coadjoint action of a on the n_+ ghosts
        for b in C.positive:
            br = g.bracket(g.vec(a), g.vec(b))
            for c in C.positive:
                coef = br.get(c, 0)
                if coef != 0:
                    st = st + norm_product(G(antighost(c)), G(ghost(b))) * (coef * _sign(g.parity[c]))
        out.append(CminusGenerator(f"J({a})", st, 1 - deg[a], 0, g.parity[a]))
    for a in C.positive:
        out.append(CminusGenerator(ghost(a), G(ghost(a)), deg[a], 1, (g.parity[a] + 1) % 2))
    for a in C.half:
        out.append(CminusGenerator(neutral(a), G(neutral(a)), Fraction(1, 2), 0, g.parity[a]))
    return out


@dataclass
class Report:
    passed: bool
    witness: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "witness": {str(j): render(v) for j, v in sorted(self.witness.items())}}


def q_square_zero(C: ReductionComplex) -> Report:
    ope = singular_ope(C.Q, C.Q)
    return Report(not ope, ope)


def charge_of_q(C: ReductionComplex):
    """J_(0)Q / Q, or None when Q is not a charge eigenvector."""
    if not C.Q:
        return Fraction(1)
    img = nth_product(C.J, C.Q, 0)
    key = next(iter(C.Q.t))
    h = img.t.get(key, Fraction(0)) / C.Q.t[key]
    return h if img == C.Q * h else None


# ---------------------------------------------------------------------------
# weight-charge bases of the subcomplex
# ---------------------------------------------------------------------------

@dataclass
class CminusBasis:
    blocks: dict  # (weight, charge) -> list of (label, State)
    max_weight: Fraction

    def dims(self) -> dict:
        return {b: len(v) for b, v in sorted(self.blocks.items())}


def _modes(C: ReductionComplex, max_weight: Fraction) -> list:
    modes = []
    for i, gen in enumerate(C.generators):
        if gen.weight <= 0:
            raise AlgebraError(f"subcomplex generator {gen.name} has non-positive weight")
        r = 0
        while gen.weight + r <= max_weight:
            modes.append((i, r))
            r += 1
    return modes


def cminus_basis(C: ReductionComplex, max_weight) -> CminusBasis:
    """Ordered words in the subcomplex generators, grouped by (weight, charge)."""
    max_weight = Fraction(max_weight)
    modes = _modes(C, max_weight)
    gens = C.generators
    derived = {}

    def field_state(i, r):
        if (i, r) not in derived:
            derived[(i, r)] = dpow(gens[i].state, r) if r else gens[i].state
        return derived[(i, r)]

    blocks: dict = {}

    def rec(start, word, w, m):
        label = " ".join(f"d{r}:{gens[i].name}" if r else gens[i].name for i, r in word)
        st = nprod(*[field_state(i, r) for i, r in word]) if word else C.alg.vacuum()
        blocks.setdefault((w, m), []).append((label or "1", st))
        for j in range(start, len(modes)):
            i, r = modes[j]
            gw = gens[i].weight + r
            if w + gw > max_weight:
                continue
            nxt = j + 1 if gens[i].parity else j
            rec(nxt, word + [(i, r)], w + gw, m + gens[i].charge)

    rec(0, [], Fraction(0), 0)
    for blk, elems in blocks.items():
        e = Echelon()
        for label, st in elems:
            if not e.add(dict(st.t)):
                raise AlgebraError(f"subcomplex words are dependent in block {blk} at {label}")
    return CminusBasis(dict(sorted(blocks.items())), max_weight)


def q0_matrix(C: ReductionComplex, basis: CminusBasis, weight, charge) -> dict:
    """Sparse matrix {(row, col): value} of Q_0 from (weight, charge) to charge + 1."""
    weight = Fraction(weight)
    src = basis.blocks.get((weight, charge), [])
    dst = basis.blocks.get((weight, charge + 1), [])
    e = Echelon()
    for _, st in dst:
        e.add(dict(st.t))
    out = {}
    for col, (label, st) in enumerate(src):
        img = nth_product(C.Q, st, 0)
        if not img:
            continue
        res, combo = e.reduce(dict(img.t))
        if res:
            raise AlgebraError(f"Q_0({label}) leaves the subcomplex")
        for key, v in combo.items():
            out[(key[1], col)] = -v
    return out


def _rank(matrix: dict) -> int:
    rows: dict = {}
    for (r, c), v in matrix.items():
        rows.setdefault(r, {})[c] = v
    e = Echelon()
    for r in sorted(rows):
        e.add(rows[r])
    return e.rank


@dataclass
class CohomologyTable:
    dims: dict  # (weight, charge) -> dim H
    chain_dims: dict
    square_zero: bool

    def nonzero_charge_vanishes(self) -> bool:
        return all(d == 0 for (w, m), d in self.dims.items() if m != 0)

    def charge_zero(self) -> dict:
        return {w: d for (w, m), d in sorted(self.dims.items()) if m == 0}

    def to_dict(self) -> dict:
        return {"square_zero": self.square_zero,
                "dims": [[fmt(w), m, d] for (w, m), d in sorted(self.dims.items())],
                "chain_dims": [[fmt(w), m, d] for (w, m), d in sorted(self.chain_dims.items())]}


def _compose(a: dict, b: dict) -> dict:
    """Sparse product a*b."""
    by_row: dict = {}
    for (r, c), v in b.items():
        by_row.setdefault(r, []).append((c, v))
    out: dict = {}
    for (r, m), v in a.items():
        for c, w in by_row.get(m, []):
            out[(r, c)] = out.get((r, c), 0) + v * w
    return {k: v for k, v in out.items() if v != 0}


def cohomology_dims(C: ReductionComplex, max_weight=2) -> CohomologyTable:
    basis = cminus_basis(C, max_weight)
    chain = basis.dims()
    weights = sorted({w for w, _ in chain})
    dims, ok = {}, True
    for w in weights:
        charges = sorted(m for ww, m in chain if ww == w)
        lo, hi = charges[0] - 1, charges[-1]
        mats = {m: q0_matrix(C, basis, w, m) for m in range(lo, hi + 1)}
        ranks = {m: _rank(mat) for m, mat in mats.items()}
        for m in range(lo + 1, hi + 1):
            if _compose(mats[m], mats[m - 1]):
                ok = False
        for m in charges:
            dims[(w, m)] = chain[(w, m)] - ranks[m] - ranks[m - 1]
    return CohomologyTable(dims, chain, ok)


def w_virasoro(C: ReductionComplex, basis: CminusBasis | None = None):
    """Central charge of the weight-2 charge-0 class when it is unique.

    The class is normalized by L_(1)L = 2L; returns (c, L).
    """
    basis = basis or cminus_basis(C, 2)
    src = basis.blocks.get((Fraction(2), 0), [])
    mat = q0_matrix(C, basis, 2, 0)
    cols: dict = {}
    for (r, c), v in mat.items():
        cols.setdefault(c, {})[r] = v
    ker = nullspace([cols.get(i, {}) for i in range(len(src))], len(src))
    if len(ker) != 1:
        raise AlgebraError(f"weight-2 charge-0 kernel has dimension {len(ker)}")
    L = State(C.alg)
    for i, v in ker[0].items():
        L = L + src[i][1] * v
    LL = nth_product(L, L, 1)
    key = next(iter(L.t))
    lam = LL.t.get(key, Fraction(0)) / L.t[key]
    if LL != L * lam or lam == 0:
        raise AlgebraError("kernel vector is not an L_(1)-eigenvector")
    L = L * (2 / lam)
    vac = ((), ())
    c = nth_product(L, L, 3).t.get(vac, Fraction(0)) * 2
    return c, L
