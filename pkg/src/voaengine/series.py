"""Weight bases, mode matrices, graded traces and zero-mode cohomology."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .coeff import as_scalar, fmt
from .linalg import Echelon, rank
from .ope import nth_product
from .state import AlgebraDef, AlgebraError, State, _coord_monomials, mono_parity


# ---------------------------------------------------------------------------
# generator gradings read off from L and J
# ---------------------------------------------------------------------------

def _eigen(field_: State, n: int, alg: AlgebraDef, g: int, what: str):
    """Scalar h with field_(n) gen = h * gen (generator g)."""
    st = alg.gen(alg.gens[g].name) if g not in alg.coord_of else alg.gen(alg.gens[g].name)
    img = nth_product(field_, st, n)
    if not img:
        return Fraction(0)
    key = next(iter(st.t))
    h = img.t.get(key, Fraction(0)) / st.t[key]
    if img != st * h:
        raise AlgebraError(f"{what} is not diagonal on generator {alg.gens[g].name}")
    return h


def generator_gradings(alg: AlgebraDef, L: State | None, J: State | None = None) -> dict:
    """{gen index: (weight, charge)} from L_(1) and J_(0).

    Without L the declared generator weights are used.
    """
    out = {}
    for g in range(len(alg.gens)):
        w = _eigen(L, 1, alg, g, "L_(1)") if L is not None else alg.weight[g]
        m = _eigen(J, 0, alg, g, "J_(0)") if J is not None else Fraction(0)
        out[g] = (Fraction(w), m)
    return out


# ---------------------------------------------------------------------------
# weight bases
# ---------------------------------------------------------------------------

@dataclass
class WeightBasis:
    alg: AlgebraDef
    cutoff: Fraction
    blocks: dict  # (weight, charge, degree) -> list of (key, fmono)
    gradings: dict
    degree_bound: int | None = None
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {}
        for blk, elems in self.blocks.items():
            for pos, e in enumerate(elems):
                self.index[e] = (blk, pos)

    def dims(self) -> dict:
        """{weight: dimension} summed over charges and degrees."""
        out: dict = {}
        for (w, _, _), elems in self.blocks.items():
            out[w] = out.get(w, 0) + len(elems)
        return dict(sorted(out.items()))

    def dims_by(self, with_charge=True, with_degree=False) -> dict:
        out: dict = {}
        for (w, m, d), elems in self.blocks.items():
            key = (w,) + ((m,) if with_charge else ()) + ((d,) if with_degree else ())
            out[key] = out.get(key, 0) + len(elems)
        return dict(sorted(out.items()))

    def state(self, elem) -> State:
        return State(self.alg, {elem: Fraction(1)})

    def block_keys(self):
        return sorted(self.blocks)


def weight_basis(alg: AlgebraDef, L: State | None, J: State | None = None, cutoff=2,
                 degree: dict | None = None, degree_bound: int | None = None) -> WeightBasis:
    """PBW monomials of weight <= cutoff grouped by (weight, charge, degree).

    ``degree`` assigns an integer degree to generator names (coordinate
    monomials count with the degree of their generator); with
    ``degree_bound`` only monomials of degree <= bound are kept.  Zero-weight
    modes must have positive degree so that the bounded sector is finite.
    """
    cutoff = Fraction(cutoff)
    gr = generator_gradings(alg, L, J)
    deg = {g: (degree or {}).get(alg.gens[g].name, 0) for g in range(len(alg.gens))}
    if degree is None and degree_bound is not None:
        deg = {g: int(gr[g][0] == 0) for g in gr}
    modes = []
    zero_modes = []
    for g, (w, m) in gr.items():
        if w < 0:
            raise AlgebraError(f"generator {alg.gens[g].name} has negative weight")
        k = 0
        while w + k <= cutoff:
            md = ((g, -1 - k), w + k, m, deg[g])
            if w + k == 0:
                if deg[g] <= 0 or degree_bound is None:
                    raise AlgebraError("infinite zero-weight sector: give a degree grading and bound")
                zero_modes.append(md)
            elif not (k == 0 and g in alg.coord_of):
                modes.append(md)
            k += 1
    coords = sorted(alg.gen_of_coord)
    coord_gen = {i: g for i, g in alg.gen_of_coord.items()}
    zero_coord = [i for i in coords if gr[coord_gen[i]][0] == 0]
    zero_plain = [z for z in zero_modes if z[0][0] not in alg.coord_of]
    modes.sort()
    blocks: dict = {}

    def emit(key, w, m, d):
        for extra, zw, zm, zd in _zero_words(alg, zero_plain, degree_bound - d if degree_bound is not None else None):
            full = tuple(sorted(key + extra))
            budget = None if degree_bound is None else degree_bound - d - zd
            if budget is not None and budget < 0:
                continue
            polys = [()]
            if zero_coord:
                polys = []
                for total in range(0, (budget or 0) + 1):
                    for fm in _coord_monomials(zero_coord, total):
                        if sum(deg[coord_gen[a[1][0]]] for a in fm) <= budget:
                            polys.append(fm)
            for fm in polys:
                dd = d + zd + sum(deg[coord_gen[a[1][0]]] for a in fm)
                mm = m + zm + sum(gr[coord_gen[a[1][0]]][1] for a in fm)
                blocks.setdefault((w, mm, dd), []).append((full, fm))

    def rec(idx, w, m, d, key):
        emit(tuple(key), w, m, d)
        for j in range(idx, len(modes)):
            mode, mw, mm, md = modes[j]
            if w + mw > cutoff:
                continue
            odd = alg.parity[mode[0]]
            if odd and key and key[-1] == mode:
                continue
            key.append(mode)
            rec(j + 1 if odd else j, w + mw, m + mm, d + md, key)
            key.pop()

    rec(0, Fraction(0), Fraction(0), 0, [])
    blocks = {k: sorted(set(v)) for k, v in sorted(blocks.items())}
    return WeightBasis(alg, cutoff, blocks, gr, degree_bound)


def _zero_words(alg, zero_plain, budget):
    """Products of distinct zero-weight odd modes (even ones need coordinates)."""
    out = [((), 0, Fraction(0), 0)]
    for mode, _, m, d in zero_plain:
        if not alg.parity[mode[0]]:
            raise AlgebraError("even zero-weight non-coordinate generator")
        nxt = []
        for key, zw, zm, zd in out:
            nxt.append((key, zw, zm, zd))
            if budget is None or zd + d <= budget:
                nxt.append((key + (mode,), zw, zm + m, zd + d))
        out = nxt
    return out


# ---------------------------------------------------------------------------
# mode matrices
# ---------------------------------------------------------------------------

def field_weight(field_: State, basis: WeightBasis) -> Fraction:
    ws = set()
    for (key, fm) in field_.t:
        w = sum((basis.gradings[g][0] - m - 1 for g, m in key), Fraction(0))
        w += sum(basis.gradings[basis.alg.gen_of_coord[a[1][0]]][0] for a in fm)
        ws.add(w)
    if len(ws) != 1:
        raise AlgebraError("field has no definite weight")
    return ws.pop()


def mode_matrix(field_: State, basis: WeightBasis, shift: int = 0, weight=None) -> dict:
    """Sparse matrix {(row elem, col elem): value} of field_{shift}.

    The mode field_{n} lowers weight by n; it is the product field_(n + h - 1).
    """
    h = Fraction(weight) if weight is not None else field_weight(field_, basis)
    n = h - 1 + shift
    if n.denominator != 1:
        raise AlgebraError("mode index is not an integer")
    out = {}
    for elems in basis.blocks.values():
        for e in elems:
            img = nth_product(field_, basis.state(e), int(n))
            for k, v in img.t.items():
                if k not in basis.index:
                    raise AlgebraError("image leaves the truncated basis")
                out[(k, e)] = v
    return out


def matmul(a: dict, b: dict) -> dict:
    by_row: dict = {}
    for (i, k), v in b.items():
        by_row.setdefault(i, []).append((k, v))
    out: dict = {}
    for (i, j), v in a.items():
        for k, w in by_row.get(j, ()):
            s = out.get((i, k), 0) + v * w
            if s == 0:
                out.pop((i, k), None)
            else:
                out[(i, k)] = s
    return out


def matadd(a: dict, b: dict, s=1) -> dict:
    out = dict(a)
    for k, v in b.items():
        t = out.get(k, 0) + s * v
        if t == 0:
            out.pop(k, None)
        else:
            out[k] = t
    return out


def supercommutator(a: dict, b: dict, odd_a: bool, odd_b: bool) -> dict:
    sign = -1 if (odd_a and odd_b) else 1
    return matadd(matmul(a, b), matmul(b, a), -sign)


# ---------------------------------------------------------------------------
# cohomology
# ---------------------------------------------------------------------------

def _columns(mat: dict, elems) -> list:
    cols = {e: {} for e in elems}
    for (r, c), v in mat.items():
        if c in cols:
            cols[c][r] = v
    return [cols[e] for e in elems]


def complex_cohomology(basis: WeightBasis, Q0: dict) -> dict:
    """Dimensions of ker/im per block for a differential raising charge by one."""
    if matmul(Q0, Q0):
        raise AlgebraError("the differential does not square to zero")
    ranks = {blk: rank(_columns(Q0, elems)) for blk, elems in basis.blocks.items()}
    out = {}
    for (w, m, d), elems in basis.blocks.items():
        ker = len(elems) - ranks[(w, m, d)]
        incoming = 0
        for (w2, m2, d2), r in ranks.items():
            if w2 == w and m2 == m - 1 and d2 == d:
                incoming += r
        out[(w, m, d)] = ker - incoming
    return out


# ---------------------------------------------------------------------------
# q-series
# ---------------------------------------------------------------------------

class QSeries:
    """Truncated series sum c * q^a * y^b, exponents a <= order kept."""

    def __init__(self, terms: dict | None = None, order=None):
        self.order = Fraction(order) if order is not None else None
        self.t = {}
        for (a, b), c in (terms or {}).items():
            a = Fraction(a)
            if c != 0 and (self.order is None or a <= self.order):
                self.t[(a, int(b))] = self.t.get((a, int(b)), 0) + c

    def _ord(self, o):
        cands = [x for x in (self.order, o.order) if x is not None]
        return min(cands) if cands else None

    def shift(self, offset) -> "QSeries":
        off = Fraction(offset)
        return QSeries({(a + off, b): c for (a, b), c in self.t.items()},
                       None if self.order is None else self.order + off)

    def __add__(self, o: "QSeries") -> "QSeries":
        r = dict(self.t)
        for k, v in o.t.items():
            r[k] = r.get(k, 0) + v
        return QSeries(r, self._ord(o))

    def __mul__(self, o: "QSeries") -> "QSeries":
        order = self._ord(o)
        r: dict = {}
        for (a1, b1), c1 in self.t.items():
            for (a2, b2), c2 in o.t.items():
                if order is not None and a1 + a2 > order:
                    continue
                k = (a1 + a2, b1 + b2)
                r[k] = r.get(k, 0) + c1 * c2
        return QSeries(r, order)

    def truncate(self, order) -> "QSeries":
        return QSeries(self.t, order)

    def __eq__(self, o):
        return isinstance(o, QSeries) and {k: v for k, v in self.t.items() if v} == \
            {k: v for k, v in o.t.items() if v}

    def coefficients(self) -> list:
        return [(a, b, c) for (a, b), c in sorted(self.t.items())]

    def to_dict(self) -> dict:
        return {"order": None if self.order is None else str(self.order),
                "terms": [[str(a), b, fmt(as_scalar(c))] for a, b, c in self.coefficients()]}

    def __repr__(self):
        parts = [f"{fmt(as_scalar(c))}*q^{a}*y^{b}" for a, b, c in self.coefficients()]
        return "QSeries(" + " + ".join(parts or ["0"]) + ")"


def graded_trace(basis: WeightBasis, offset=0) -> QSeries:
    """Sum over the basis of q^(weight + offset) y^charge."""
    terms: dict = {}
    for (w, m, _), elems in basis.blocks.items():
        terms[(w, m)] = terms.get((w, m), 0) + len(elems)
    return QSeries(terms, basis.cutoff).shift(offset)


# ---------------------------------------------------------------------------
# twist complex checks
# ---------------------------------------------------------------------------

def twist_blocks(alg, T: State, J: State, Q: State, H: State, cutoff=2, degree: dict | None = None,
                 degree_bound: int = 3) -> dict:
    """Matrices of Q_0, H_0, T_0 and the identity [Q_0, H_0] = T_0 on a truncated basis."""
    basis = weight_basis(alg, T, J, cutoff, degree, degree_bound)
    Q0 = mode_matrix(Q, basis, 0, weight=1)
    H0 = mode_matrix(H, basis, 0, weight=2)
    T0 = mode_matrix(T, basis, 0, weight=2)
    comm = supercommutator(Q0, H0, True, True)
    return {"basis": basis, "Q0": Q0, "H0": H0, "T0": T0, "identity": comm == T0,
            "residual": matadd(comm, T0, -1)}
