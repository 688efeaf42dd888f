"""Builders for free-field and affine algebras and Lie superalgebra data."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from pathlib import Path

from sympy import Matrix, Rational

from .coeff import as_scalar, inverse
from .linalg import solve_in_span, Echelon
from .state import (
    AlgebraDef, AlgebraError, GeneratorDecl, State, enumerate_keys, skew_complete,
)


# ---------------------------------------------------------------------------
# generic construction
# ---------------------------------------------------------------------------

def make_algebra(name: str, gens: list, products: dict, coords: dict | None = None,
                 meta: dict | None = None) -> AlgebraDef:
    """Build an algebra from named generator products.

    ``products[(a, b)] = {j: [(coeff, gen_name | None, r), ...]}`` lists
    a_(j)b for one ordering of each pair; ``None`` stands for the vacuum.
    The opposite orderings are completed by skew-symmetry.
    """
    index = {g.name: i for i, g in enumerate(gens)}
    table = {}
    for (a, b), ent in products.items():
        if a not in index or b not in index:
            raise AlgebraError(f"unknown generator in pair ({a}, {b})")
        row = {}
        for j, terms in ent.items():
            conv = []
            for c, g, r in terms:
                c = as_scalar(c)
                if c == 0:
                    continue
                conv.append((c, -1 if g is None else index[g], r))
            if conv:
                row[j] = tuple(conv)
        if row:
            table[(index[a], index[b])] = row
    table = skew_complete(table, [g.parity for g in gens])
    coord_idx = {index[g]: i for g, i in (coords or {}).items()}
    dim = len(coord_idx)
    return AlgebraDef(name, list(gens), table, coords=coord_idx, dim=dim, meta=dict(meta or {}))


def _check_square(matrix, dim):
    if len(matrix) != dim or any(len(r) != dim for r in matrix):
        raise AlgebraError(f"expected a {dim}x{dim} matrix")


def free_fermions(dim: int, pairing, names=None, weight=Fraction(1, 2)) -> AlgebraDef:
    """Odd generators with v_i(z)v_j(w) ~ pairing[i][j]/(z-w)."""
    _check_square(pairing, dim)
    P = [[as_scalar(x) for x in row] for row in pairing]
    for i in range(dim):
        for j in range(dim):
            if P[i][j] != P[j][i]:
                raise AlgebraError("fermion pairing must be symmetric")
    names = list(names or [f"psi{i + 1}" for i in range(dim)])
    gens = [GeneratorDecl(n, 1, None, Fraction(weight)) for n in names]
    prods = {}
    for i in range(dim):
        for j in range(i, dim):
            if P[i][j] != 0:
                prods[(names[i], names[j])] = {0: [(P[i][j], None, 0)]}
    return make_algebra(f"fermions{dim}", gens, prods, meta={"pairing": P})


def symplectic_bosons(dim: int, form, names=None, weight=Fraction(1, 2)) -> AlgebraDef:
    """Even generators with v_i(z)v_j(w) ~ form[i][j]/(z-w), form antisymmetric."""
    _check_square(form, dim)
    P = [[as_scalar(x) for x in row] for row in form]
    for i in range(dim):
        for j in range(dim):
            if P[i][j] != -P[j][i]:
                raise AlgebraError("symplectic form must be antisymmetric")
    names = list(names or [f"v{i + 1}" for i in range(dim)])
    gens = [GeneratorDecl(n, 0, None, Fraction(weight)) for n in names]
    prods = {}
    for i in range(dim):
        for j in range(i + 1, dim):
            if P[i][j] != 0:
                prods[(names[i], names[j])] = {0: [(P[i][j], None, 0)]}
    return make_algebra(f"bosons{dim}", gens, prods, meta={"form": P})


def tensor(*algs: AlgebraDef, name: str | None = None) -> AlgebraDef:
    """Tensor product; generator names must be distinct across factors."""
    gens, table, coords, offset = [], {}, {}, 0
    for alg in algs:
        gens.extend(alg.gens)
        for (i, j), ent in alg.table.items():
            table[(i + offset, j + offset)] = {
                n: tuple((c, g + offset if g >= 0 else -1, r) for c, g, r in terms)
                for n, terms in ent.items()
            }
        for g, i in alg.coord_of.items():
            coords[g + offset] = i
        offset += len(alg.gens)
    return AlgebraDef(name or "x".join(a.name for a in algs), gens, table, coords=coords,
                      dim=len(coords))


# ---------------------------------------------------------------------------
# Lie superalgebra data
# ---------------------------------------------------------------------------

@dataclass
class LieSuperData:
    """Basis, super brackets and invariant form of a finite Lie superalgebra.

    Vectors are dicts {basis name: coefficient}.  ``triples`` maps a label to
    an sl2 triple (f, h, e) given as vectors.
    """

    name: str
    basis: list
    parity: dict
    brackets: dict  # (a, b) -> vector, both orders stored
    form: dict  # (a, b) -> scalar, both orders stored
    triples: dict = field(default_factory=dict)

    def bracket(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for a, ca in x.items():
            for b, cb in y.items():
                for g, v in self.brackets.get((a, b), {}).items():
                    out[g] = out.get(g, 0) + ca * cb * v
        return {g: v for g, v in out.items() if v != 0}

    def pair(self, x: dict, y: dict):
        s = Fraction(0)
        for a, ca in x.items():
            for b, cb in y.items():
                s = s + ca * cb * self.form.get((a, b), 0)
        return s

    def vec(self, name: str) -> dict:
        return {name: Fraction(1)}

    def vparity(self, x: dict) -> int:
        ps = {self.parity[a] for a in x}
        if len(ps) > 1:
            raise AlgebraError("vector is not parity-homogeneous")
        return ps.pop() if ps else 0

    def jacobi_violations(self) -> list:
        bad = []
        B = self.basis
        for a, b, c in iproduct(B, B, B):
            pa, pb = self.parity[a], self.parity[b]
            lhs = self.bracket(self.vec(a), self.bracket(self.vec(b), self.vec(c)))
            r1 = self.bracket(self.bracket(self.vec(a), self.vec(b)), self.vec(c))
            r2 = self.bracket(self.vec(b), self.bracket(self.vec(a), self.vec(c)))
            s = (-1) ** (pa * pb)
            diff = dict(lhs)
            for g, v in r1.items():
                diff[g] = diff.get(g, 0) - v
            for g, v in r2.items():
                diff[g] = diff.get(g, 0) - s * v
            if any(v != 0 for v in diff.values()):
                bad.append((a, b, c))
        return bad

    def antisymmetry_violations(self) -> list:
        bad = []
        for a, b in iproduct(self.basis, self.basis):
            s = -((-1) ** (self.parity[a] * self.parity[b]))
            x = self.brackets.get((a, b), {})
            y = self.brackets.get((b, a), {})
            if any(x.get(g, 0) != s * y.get(g, 0) for g in set(x) | set(y)):
                bad.append((a, b))
        return bad

    def invariance_violations(self) -> list:
        bad = []
        for a, b, c in iproduct(self.basis, self.basis, self.basis):
            lhs = self.pair(self.bracket(self.vec(a), self.vec(b)), self.vec(c))
            rhs = self.pair(self.vec(a), self.bracket(self.vec(b), self.vec(c)))
            if lhs != rhs:
                bad.append((a, b, c))
        return bad

    def form_matrix(self):
        return Matrix([[_rat(self.form.get((a, b), 0)) for b in self.basis] for a in self.basis])

    def is_nondegenerate(self) -> bool:
        return self.form_matrix().det() != 0

    def dual_basis(self) -> dict:
        """b -> vector b^ with (b_i, b^j) = delta_ij."""
        M = self.form_matrix()
        if M.det() == 0:
            raise AlgebraError("degenerate invariant form")
        Minv = M.inv()
        out = {}
        for j, b in enumerate(self.basis):
            # (b_i, sum_l x_l b_l) = sum_l M[i,l] x_l = delta_ij
            v = {self.basis[l]: Fraction(int(Minv[l, j].p), int(Minv[l, j].q))
                 for l in range(len(self.basis)) if Minv[l, j] != 0}
            out[b] = v
        return out

    def ad_matrix(self, x: dict):
        return [[self.bracket(x, self.vec(b)).get(a, 0) for b in self.basis] for a in self.basis]

    def dual_coxeter(self):
        """h^vee from str(ad x ad y) = 2 h^vee (x, y), read on a pairing pair."""
        for a, b in iproduct(self.basis, self.basis):
            f = self.form.get((a, b), 0)
            if f != 0:
                kil = Fraction(0)
                for g in self.basis:
                    inner = self.bracket(self.vec(b), self.vec(g))
                    outer = self.bracket(self.vec(a), inner)
                    sg = -1 if self.parity[g] else 1
                    kil += sg * outer.get(g, 0)
                return kil / (2 * f)
        raise AlgebraError("zero invariant form")

    def sdim(self) -> int:
        return sum(-1 if self.parity[a] else 1 for a in self.basis)


def _rat(x):
    x = Fraction(x)
    return Rational(x.numerator, x.denominator)


def _vec_from_matrix(M, mats: dict, basis: list):
    """Coordinates of supermatrix M in the basis given by ``mats``."""
    cols = []
    for b in basis:
        cols.append({(i, j): Fraction(v) for (i, j), v in mats[b].items()})
    target = {k: Fraction(v) for k, v in M.items() if v != 0}
    x = solve_in_span(cols, target)
    if x is None:
        raise AlgebraError("bracket leaves the span of the basis")
    return {b: c for b, c in zip(basis, x) if c != 0}


def from_supermatrices(name: str, mats: dict, row_parity: list, triples: dict | None = None,
                       form_scale=1) -> LieSuperData:
    """Lie superalgebra spanned by supermatrices (dict {(i,j): value}).

    Brackets are supercommutators, the form is ``form_scale * str(XY)``.
    """
    basis = list(mats)

    def mpar(m):
        ps = {(row_parity[i] + row_parity[j]) % 2 for (i, j) in m}
        if len(ps) != 1:
            raise AlgebraError("basis matrix is not homogeneous")
        return ps.pop()

    def mul(x, y):
        out: dict = {}
        for (i, j), v in x.items():
            for (j2, l), w in y.items():
                if j == j2:
                    out[(i, l)] = out.get((i, l), 0) + v * w
        return out

    def strace(m):
        return sum((v * (-1 if row_parity[i] else 1) for (i, j), v in m.items() if i == j), Fraction(0))

    parity = {b: mpar(mats[b]) for b in basis}
    brackets, form = {}, {}
    for a, b in iproduct(basis, basis):
        xa, xb = mats[a], mats[b]
        s = (-1) ** (parity[a] * parity[b])
        ab, ba = mul(xa, xb), mul(xb, xa)
        comm = {k: ab.get(k, 0) - s * ba.get(k, 0) for k in set(ab) | set(ba)}
        vec = _vec_from_matrix(comm, mats, basis)
        if vec:
            brackets[(a, b)] = vec
        f = strace(ab) * form_scale
        if f != 0:
            form[(a, b)] = Fraction(f)
    return LieSuperData(name, basis, parity, brackets, form, dict(triples or {}))


def lie_sl2() -> LieSuperData:
    mats = {"e": {(0, 1): 1}, "h": {(0, 0): 1, (1, 1): -1}, "f": {(1, 0): 1}}
    V = lambda n: {n: Fraction(1)}
    return from_supermatrices("sl2", mats, [0, 0],
                              triples={"principal": (V("f"), {"h": Fraction(1)}, V("e"))})


def lie_gl11() -> LieSuperData:
    mats = {"E11": {(0, 0): 1}, "E22": {(1, 1): 1}, "psi": {(0, 1): 1}, "chi": {(1, 0): 1}}
    return from_supermatrices("gl(1|1)", mats, [0, 1])


def lie_sl21() -> LieSuperData:
    """sl(2|1) with even indices 1,2 and odd index 3."""
    mats = {
        "e": {(0, 1): 1}, "h": {(0, 0): 1, (1, 1): -1}, "f": {(1, 0): 1},
        "z": {(0, 0): 1, (1, 1): 1, (2, 2): 2},
        "p13": {(0, 2): 1}, "p23": {(1, 2): 1}, "p31": {(2, 0): 1}, "p32": {(2, 1): 1},
    }
    V = lambda n: {n: Fraction(1)}
    trip = (V("f"), {"h": Fraction(1)}, V("e"))
    return from_supermatrices("sl(2|1)", mats, [0, 0, 1],
                              triples={"minimal": trip, "superprincipal": trip})


BUILTIN_LIE = {"sl2": lie_sl2, "gl(1|1)": lie_gl11, "gl11": lie_gl11, "sl(2|1)": lie_sl21, "sl21": lie_sl21}


def lie_builtin(name: str) -> LieSuperData:
    try:
        return BUILTIN_LIE[name]()
    except KeyError:
        raise AlgebraError(f"unknown Lie superalgebra {name!r}") from None


_TERM = re.compile(r"\s*([+-])?\s*([0-9]+(?:/[0-9]+)?)?\s*\*?\s*([A-Za-z][\w]*)")


def _parse_vector(text: str, basis) -> dict:
    text = text.strip()
    out: dict = {}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse vector {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        name = m.group(3)
        if name not in basis:
            raise ValueError(f"unknown basis element {name!r}")
        out[name] = out.get(name, 0) + sign * coeff
        pos = m.end()
    return {k: v for k, v in out.items() if v != 0}


def parse_lie_data(text: str) -> LieSuperData:
    """Parse the plain-text Lie superalgebra format.

    Lines (any order, ``#`` comments)::

        name sl2
        even e h f
        odd  x y
        bracket h e = 2 e          # [h, e]; [e, h] follows by antisymmetry
        form e f = 1               # symmetric counterpart is implied
        triple principal f = f ; h = h ; e = e
    """
    name, even, odd = "lie", [], []
    brackets_raw, form_raw, triples_raw = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "name":
            name = rest
        elif head == "even":
            even.extend(rest.split())
        elif head == "odd":
            odd.extend(rest.split())
        elif head == "bracket":
            brackets_raw.append((lineno, rest))
        elif head == "form":
            form_raw.append((lineno, rest))
        elif head == "triple":
            triples_raw.append((lineno, rest))
        else:
            raise ValueError(f"line {lineno}: unknown directive {head!r}")
    basis = even + odd
    if len(set(basis)) != len(basis):
        raise ValueError("duplicate basis names")
    parity = {b: 0 for b in even} | {b: 1 for b in odd}
    brackets: dict = {}
    for lineno, rest in brackets_raw:
        lhs, _, rhs = rest.partition("=")
        a, b = lhs.split()
        if a not in parity or b not in parity:
            raise ValueError(f"line {lineno}: unknown basis element")
        vec = _parse_vector(rhs, parity) if rhs.strip() not in ("", "0") else {}
        s = -((-1) ** (parity[a] * parity[b]))
        brackets[(a, b)] = vec
        rev = {g: s * v for g, v in vec.items()}
        if (b, a) in brackets and brackets[(b, a)] != rev:
            raise ValueError(f"line {lineno}: inconsistent bracket [{b}, {a}]")
        brackets[(b, a)] = rev
    form: dict = {}
    for lineno, rest in form_raw:
        lhs, _, rhs = rest.partition("=")
        a, b = lhs.split()
        v = Fraction(rhs.strip())
        form[(a, b)] = v
        form[(b, a)] = v * (-1) ** (parity[a] * parity[b])
    triples = {}
    for lineno, rest in triples_raw:
        label, _, body = rest.partition(" ")
        parts = dict(p.split("=", 1) for p in body.split(";"))
        parts = {k.strip(): _parse_vector(v, parity) for k, v in parts.items()}
        triples[label] = (parts["f"], parts["h"], parts["e"])
    brackets = {k: v for k, v in brackets.items() if v}
    form = {k: v for k, v in form.items() if v != 0}
    return LieSuperData(name, basis, parity, brackets, form, triples)


def load_lie_data(path) -> LieSuperData:
    p = Path(path)
    if not p.exists() and str(path) in BUILTIN_LIE:
        return lie_builtin(str(path))
    return parse_lie_data(p.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# gradings by an sl2 triple
# ---------------------------------------------------------------------------

@dataclass
class Grading:
    blocks: dict  # j (Fraction) -> list of basis names
    f: dict
    h: dict
    e: dict

    def degree(self, name: str) -> Fraction:
        for j, names in self.blocks.items():
            if name in names:
                return j
        raise KeyError(name)

    @property
    def n_plus(self) -> list:
        return [b for j in sorted(self.blocks) if j > 0 for b in self.blocks[j]]

    @property
    def n_minus(self) -> list:
        return [b for j in sorted(self.blocks) if j < 0 for b in self.blocks[j]]

    @property
    def half(self) -> list:
        return list(self.blocks.get(Fraction(1, 2), []))

    def shape(self) -> list:
        return [(j, len(self.blocks[j])) for j in sorted(self.blocks)]


def sl2_grading(g: LieSuperData, f: dict | None) -> Grading:
    """Eigenspace decomposition of ad(h/2) for the stored triple through f."""
    f = {k: Fraction(v) for k, v in (f or {}).items() if v != 0}
    if not f:
        return Grading({Fraction(0): list(g.basis)}, {}, {}, {})
    for label, (tf, th, te) in g.triples.items():
        if tf == f:
            break
    else:
        raise AlgebraError("no sl2 triple through this nilpotent in the data")
    if g.vparity(f) != 0:
        raise AlgebraError("nilpotent must be even")
    hf = g.bracket(th, f)
    if hf != {k: -2 * v for k, v in f.items()} or g.bracket(te, f) != th:
        raise AlgebraError("stored triple does not satisfy [h,f]=-2f, [e,f]=h")
    blocks: dict = {}
    for b in g.basis:
        img = g.bracket(th, g.vec(b))
        if set(img) - {b}:
            raise AlgebraError("basis is not an ad(h) eigenbasis")
        j = Fraction(img.get(b, 0)) / 2
        blocks.setdefault(j, []).append(b)
    return Grading(dict(sorted(blocks.items())), f, th, te)


# ---------------------------------------------------------------------------
# affine algebras
# ---------------------------------------------------------------------------

def affine(g: LieSuperData, k, weights: dict | None = None, name: str | None = None) -> AlgebraDef:
    """Currents a(z)b(w) ~ [a,b](w)/(z-w) + k(a,b)/(z-w)^2."""
    k = as_scalar(k)
    if not g.is_nondegenerate():
        raise AlgebraError("degenerate invariant form")
    weights = weights or {}
    gens = [GeneratorDecl(b, g.parity[b], None, Fraction(weights.get(b, 1))) for b in g.basis]
    prods = {}
    for i, a in enumerate(g.basis):
        for b in g.basis[i:]:
            ent = {}
            br = g.brackets.get((a, b), {})
            if br:
                ent[0] = [(v, x, 0) for x, v in br.items()]
            fv = g.form.get((a, b), 0)
            if fv != 0:
                ent[1] = [(k * fv, None, 0)]
            if ent:
                prods[(a, b)] = ent
    return make_algebra(name or f"V_k({g.name})", gens, prods, meta={"lie": g, "level": k})


def bar(name: str) -> str:
    return name + "bar"


def vg_super(g: LieSuperData, k) -> AlgebraDef:
    """Supersymmetric affine algebra: abar of reversed parity and a = D abar.

    Level k means the displayed pairing is (k + h^vee)(,)_0, so that the
    bosonic currents decoupled from the fermions have level k and the
    critical level is k = -h^vee.
    """
    level = as_scalar(k)
    if not g.is_nondegenerate():
        raise AlgebraError("degenerate invariant form")
    k = level + g.dual_coxeter()
    gens = []
    for b in g.basis:
        gens.append(GeneratorDecl(bar(b), 1 - g.parity[b], b, Fraction(1, 2)))
    for b in g.basis:
        gens.append(GeneratorDecl(b, g.parity[b], None, Fraction(1)))
    prods = {}
    B = g.basis
    for i, a in enumerate(B):
        for b in B[i:]:
            fv = g.form.get((a, b), 0)
            if fv != 0:
                prods[(bar(a), bar(b))] = {0: [(k * fv, None, 0)]}
            ent = {}
            br = g.brackets.get((a, b), {})
            if br:
                ent[0] = [(v, x, 0) for x, v in br.items()]
            if fv != 0:
                ent[1] = [(k * fv, None, 0)]
            if ent:
                prods[(a, b)] = ent
        for b in B:
            br = g.brackets.get((a, b), {})
            if br:
                prods[(a, bar(b))] = {0: [(v, bar(x), 0) for x, v in br.items()]}
    return make_algebra(f"SV_k({g.name})", gens, prods,
                        meta={"lie": g, "level": level, "form_level": k})


@dataclass
class KacTodorov:
    G: State
    L: State
    unknowns: int
    solution_dim: int


def kac_todorov(alg: AlgebraDef, level=None) -> KacTodorov:
    """N=1 vector of a supersymmetric affine algebra, found by solving.

    The ansatz is the full space of odd weight-3/2 PBW monomials; the
    conditions are G_(0)abar = a and G_(1)abar = 0 for every generator
    abar.  Closure of the N=1 table is left to ``superconf.verify``.
    """
    from .ope import nth_product
    g: LieSuperData = alg.meta["lie"]
    if alg.meta["form_level"] == 0:
        raise AlgebraError("critical level: no N=1 structure")
    keys = enumerate_keys(alg, Fraction(3, 2), parity=1)
    monos = [State(alg, {key: Fraction(1)}) for key in keys]
    # each condition: a state equation, linear in the unknown coefficients
    cols = []
    target: dict = {}
    for b in g.basis:
        ab = alg.gen(bar(b))
        for n, rhs in ((0, alg.gen(b)), (1, State(alg))):
            tag = (b, n)
            for kk, v in rhs.t.items():
                target[(tag, kk)] = v
    for m in monos:
        col = {}
        for b in g.basis:
            ab = alg.gen(bar(b))
            for n in (0, 1):
                r = nth_product(m, ab, n)
                for kk, v in r.t.items():
                    col[((b, n), kk)] = v
        cols.append(col)
    x = solve_in_span(cols, target)
    if x is None:
        raise AlgebraError("no N=1 vector of the supersymmetric affine form")
    G = State(alg)
    for m, c in zip(monos, x):
        if c != 0:
            G = G + m * c
    # dimension of the solution space = kernel dimension
    e = Echelon()
    for col in cols:
        e.add(col)
    from .state import susy_D
    L = susy_D(G) * Fraction(1, 2)
    return KacTodorov(G, L, len(monos), len(monos) - e.rank)
