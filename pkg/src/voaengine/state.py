"""States of a free-field or linearly generated vertex superalgebra.

A state is stored in PBW (Fock) form: a finite sum of ordered products of
creation modes ``a_(m)``, m <= -1, applied to the vacuum.  The mode a_(-1-k)
applied to a state is the normally ordered product with (d^k a)/k!, so a
sorted key is exactly a right-nested normally ordered word.  Entries are
sorted by generator declaration order, then by derivative order descending.

In chart algebras (bc-beta-gamma with function coefficients) the zero-weight
coordinate modes gamma^i_(-1) commute with every creation mode and are kept
apart as an ``FnElement`` monomial; it is the innermost factor of the word.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable

from .coeff import (
    FnElement, Scalar, as_scalar, binom, canon_atom, fmt, fn_fmt, mono_partial,
)


class AlgebraError(Exception):
    pass


@dataclass(frozen=True)
class GeneratorDecl:
    name: str
    parity: int
    partner: str | None = None
    weight: Fraction = Fraction(0)


@dataclass
class AlgebraDef:
    """Generators plus the table of generator products a_(j)b.

    ``table[(i, j)]`` maps a pole order to a tuple of ``(coeff, gen, r)``
    entries standing for coeff * (d^r gen)/r!; ``gen = -1`` is the vacuum.
    """

    name: str
    gens: list
    table: dict
    coords: dict = field(default_factory=dict)
    dim: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {g.name: i for i, g in enumerate(self.gens)}
        if len(self.index) != len(self.gens):
            raise AlgebraError("generator names must be unique")
        self.parity = [g.parity for g in self.gens]
        self.weight = [Fraction(g.weight) for g in self.gens]
        self.coord_of = dict(self.coords)
        self.gen_of_coord = {i: g for g, i in self.coords.items()}
        self.free = all(
            gg == -1 for ent in self.table.values() for terms in ent.values() for _, gg, _ in terms
        )
        self._dmap = self._build_dmap()
        self._bracket_cache: dict = {}
        self._act_cache: dict = {}
        self.nprod_cache: dict = {}
        if self.coords and not self.free:
            raise AlgebraError("function coefficients need a free-field table")

    def _build_dmap(self):
        dmap = {}
        for i, g in enumerate(self.gens):
            if g.partner is not None:
                p = self.index.get(g.partner)
                if p is None:
                    raise AlgebraError(f"unknown superpartner {g.partner!r}")
                if self.parity[p] == g.parity:
                    raise AlgebraError(f"superpartner of {g.name} has the same parity")
                dmap[i] = ((Fraction(1), p, 0),)
        for i, g in enumerate(self.gens):
            if g.partner is not None:
                p = self.index[g.partner]
                if p not in dmap:
                    dmap[p] = ((Fraction(1), i, 1),)
        return dmap

    @property
    def has_susy(self) -> bool:
        return len(self._dmap) == len(self.gens)

    def gen(self, name: str, k: int = 0) -> "State":
        if name not in self.index:
            raise AlgebraError(f"unknown generator {name!r}")
        return gen_state(self, self.index[name], k)

    def vacuum(self) -> "State":
        return State(self, {((), ()): Fraction(1)})

    def fn(self, f) -> "State":
        if not isinstance(f, FnElement):
            f = FnElement.const(f)
        return State(self, {((), m): c for m, c in f.t.items()})

    def scalar(self, c) -> "State":
        return State(self, {((), ()): as_scalar(c)})

    def gen_names(self):
        return [g.name for g in self.gens]

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        return f"AlgebraDef({self.name}, {len(self.gens)} generators)"


def skew_complete(table: dict, parity: list) -> dict:
    """Fill b_(n)a from a_(n)b by skew-symmetry where missing."""
    out = {key: dict(v) for key, v in table.items()}
    for (i, j), ent in table.items():
        if (j, i) in table:
            continue
        p = (-1) ** (parity[i] * parity[j])
        rev: dict = {}
        maxn = max(ent) if ent else -1
        for n in range(maxn + 1):
            acc: dict = {}
            for jj in range(0, maxn - n + 1):
                for c, g, r in ent.get(n + jj, ()):
                    if g == -1 and jj > 0:
                        continue
                    key = (g, r + jj)
                    acc[key] = acc.get(key, 0) - p * (-1) ** (n + jj) * c * binom(r + jj, jj)
            terms = tuple((c, g, r) for (g, r), c in sorted(acc.items()) if c != 0)
            if terms:
                rev[n] = terms
        out[(j, i)] = rev
    return out


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

def _coeff_ok(c):
    return c != 0


class State:
    """Finite linear combination of PBW monomials with exact coefficients."""

    __slots__ = ("alg", "t", "_h")

    def __init__(self, alg: AlgebraDef, terms: dict | None = None):
        self.alg = alg
        self.t = {k: v for k, v in (terms or {}).items() if v != 0}
        self._h = None

    # vector space structure
    def _check(self, o: "State"):
        if not isinstance(o, State):
            raise TypeError("expected State")
        if o.alg is not self.alg:
            raise AlgebraError("states over different algebras")

    def __add__(self, o):
        if isinstance(o, (int, Fraction, Scalar)) and o == 0:
            return self
        self._check(o)
        r = dict(self.t)
        for k, v in o.t.items():
            r[k] = r.get(k, 0) + v
        return State(self.alg, r)

    def __radd__(self, o):
        if isinstance(o, (int, Fraction, Scalar)) and o == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return State(self.alg, {k: -v for k, v in self.t.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, c):
        if isinstance(c, State):
            raise TypeError("use norm_product for products of states")
        if isinstance(c, FnElement):
            return self.times_fn(c)
        c = as_scalar(c)
        return State(self.alg, {k: v * c for k, v in self.t.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        from .coeff import inverse
        return self * inverse(as_scalar(c))

    def times_fn(self, f: FnElement) -> "State":
        """Multiply by a function of the coordinates in the innermost slot."""
        r: dict = {}
        for (key, fm), v in self.t.items():
            for m, c in f.t.items():
                nk = (key, tuple(sorted(fm + m)))
                r[nk] = r.get(nk, 0) + v * c
        return State(self.alg, r)

    def __eq__(self, o):
        if isinstance(o, (int, Fraction)) and o == 0:
            return not self.t
        if not isinstance(o, State):
            return NotImplemented
        return self.alg is o.alg and self.t == o.t

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self.t.items()))
        return self._h

    def __bool__(self):
        return bool(self.t)

    def is_zero(self) -> bool:
        return not self.t

    def __len__(self):
        return len(self.t)

    def items(self):
        return sorted(self.t.items(), key=lambda kv: kv[0])

    def monomials(self):
        return [State(self.alg, {k: v}) for k, v in self.items()]

    # gradings
    def parity(self) -> int:
        ps = {mono_parity(self.alg, k) for k, _ in self.t}
        if len(ps) > 1:
            raise AlgebraError("state is not parity-homogeneous")
        return ps.pop() if ps else 0

    def weights(self) -> set:
        return {mono_weight(self.alg, k) for k, _ in self.t}

    def max_weight(self) -> Fraction:
        return max(self.weights(), default=Fraction(0))

    def map_fn(self, func) -> "State":
        """Apply ``func`` to the function coefficient of each PBW word."""
        groups: dict = {}
        for (key, fm), v in self.t.items():
            groups.setdefault(key, {})
            groups[key][fm] = groups[key].get(fm, 0) + v
        r: dict = {}
        for key, d in groups.items():
            f = func(FnElement(d))
            for m, c in f.t.items():
                r[(key, m)] = r.get((key, m), 0) + c
        return State(self.alg, r)

    def coefficient_fn(self, word: "State") -> FnElement:
        """Function coefficient of a constant-coefficient PBW word."""
        ((key, _),) = word.t.keys()
        (c,) = word.t.values()
        d = {fm: v for (k, fm), v in self.t.items() if k == key}
        from .coeff import inverse
        return FnElement(d) * inverse(c)

    def __repr__(self):
        return f"State({render(self)})"

    def __str__(self):
        return render(self)


def mono_parity(alg: AlgebraDef, key) -> int:
    return sum(alg.parity[g] for g, _ in key) % 2


def mono_weight(alg: AlgebraDef, key) -> Fraction:
    return sum((alg.weight[g] - m - 1 for g, m in key), Fraction(0))


def gen_state(alg: AlgebraDef, g: int, k: int = 0) -> State:
    """(d^k g) as a state."""
    if g in alg.coord_of and k == 0:
        i = alg.coord_of[g]
        return State(alg, {((), (("x", (i,), ()),)): Fraction(1)})
    return State(alg, {(((g, -1 - k),), ()): Fraction(factorial(k))})


# ---------------------------------------------------------------------------
# mode algebra
# ---------------------------------------------------------------------------

def linear_mode(c, g: int, r: int, t: int):
    """Mode t of c*(d^r g)/r! as [(coeff, mode)], mode None for the vacuum."""
    if g == -1:
        return [(c, None)] if t == -1 else []
    coef = (-1) ** r * binom(t, r)
    if coef == 0:
        return []
    return [(c * coef, (g, t - r))]


def bracket(alg: AlgebraDef, x, y):
    """[x, y] for modes x=(a,m), y=(b,q): list of (coeff, mode|None)."""
    key = (x, y)
    hit = alg._bracket_cache.get(key)
    if hit is not None:
        return hit
    (a, m), (b, q) = x, y
    ent = alg.table.get((a, b), {})
    acc: dict = {}
    for j, terms in ent.items():
        bj = binom(m, j)
        if bj == 0:
            continue
        for c, g, r in terms:
            for cc, mode in linear_mode(c * bj, g, r, m + q - j):
                acc[mode] = acc.get(mode, 0) + cc
    res = [(c, md) for md, c in acc.items() if c != 0]
    res.sort(key=lambda e: (e[1] is not None, e[1] or (0, 0)))
    alg._bracket_cache[key] = res
    return res


def _is_coord_mode(alg, mode):
    return mode[1] == -1 and mode[0] in alg.coord_of


def _add(d: dict, k, v):
    s = d.get(k, 0) + v
    if s == 0:
        d.pop(k, None)
    else:
        d[k] = s


def act(alg: AlgebraDef, x, key: tuple) -> dict:
    """Apply mode x to the PBW monomial ``key`` (constant coefficient).

    Returns {(key, fmono): coeff}.
    """
    ck = (x, key)
    hit = alg._act_cache.get(ck)
    if hit is not None:
        return hit
    res = _act(alg, x, key)
    alg._act_cache[ck] = res
    return res


def _act(alg, x, key):
    a, m = x
    creation = m < 0
    if creation and _is_coord_mode(alg, x):
        return {(key, (("x", (alg.coord_of[a],), ()),)): Fraction(1)}
    if not key:
        if creation:
            return {(((a, m),), ()): Fraction(1)}
        return {}
    y = key[0]
    rest = key[1:]
    if creation:
        if x < y:
            return {((x,) + key, ()): Fraction(1)}
        if x == y:
            if alg.parity[a] == 0:
                return {((x,) + key, ()): Fraction(1)}
            # x odd: x*x = [x,x]/2
            out: dict = {}
            for c, md in bracket(alg, x, x):
                for k2, v in _apply_mode(alg, md, rest).items():
                    _add(out, k2, v * c / 2)
            return out
    out = {}
    sign = (-1) ** (alg.parity[a] * alg.parity[y[0]])
    for (k2, fm2), v in act(alg, x, rest).items():
        for (k3, fm3), w in act(alg, y, k2).items():
            fm = tuple(sorted(fm2 + fm3)) if fm2 and fm3 else (fm2 or fm3)
            _add(out, (k3, fm), sign * v * w)
    for c, md in bracket(alg, x, y):
        for k2, v in _apply_mode(alg, md, rest).items():
            _add(out, k2, v * c)
    return out


def _apply_mode(alg, md, key):
    if md is None:
        return {(key, ()): Fraction(1)}
    return act(alg, md, key)


def act_state(alg: AlgebraDef, x, st: dict) -> dict:
    """Apply mode x to a term dict {(key, fmono): coeff}."""
    out: dict = {}
    creation = x[1] < 0
    if creation and _is_coord_mode(alg, x):
        atom = ("x", (alg.coord_of[x[0]],), ())
        for (key, fm), v in st.items():
            _add(out, (key, tuple(sorted(fm + (atom,)))), v)
        return out
    coord_br = None
    if not creation and alg.coords:
        coord_br = []
        for i, g in alg.gen_of_coord.items():
            c = sum((cc for cc, md in bracket(alg, x, (g, -1)) if md is None), Fraction(0))
            if c != 0:
                coord_br.append((i, c))
    for (key, fm), v in st.items():
        for (k2, fm2), w in act(alg, x, key).items():
            nfm = tuple(sorted(fm + fm2)) if fm2 else fm
            _add(out, (k2, nfm), v * w)
        if coord_br and fm:
            sign = (-1) ** (alg.parity[x[0]] * mono_parity(alg, key))
            for i, c in coord_br:
                for mult, fm2 in mono_partial(fm, i):
                    _add(out, (key, fm2), sign * v * c * mult)
    return out


# ---------------------------------------------------------------------------
# derivations: translation and SUSY
# ---------------------------------------------------------------------------

def _fn_derivation(alg, fm, kind):
    """d or D applied to the function part f(gamma)|0>."""
    out: dict = {}
    if not fm:
        return out
    for i, g in sorted(alg.gen_of_coord.items()):
        for mult, fm2 in mono_partial(fm, i):
            if kind == "T":
                _add(out, (((g, -2),), fm2), Fraction(mult))
            else:
                for c, h, r in alg._dmap[g]:
                    st = gen_state(alg, h, r)
                    for (k3, fm3), w in st.t.items():
                        nfm = tuple(sorted(fm2 + fm3))
                        _add(out, (k3, nfm), c * w * mult)
    return out


def _derive(st: State, kind: str) -> State:
    alg = st.alg
    if kind == "D" and not alg.has_susy:
        missing = [g.name for i, g in enumerate(alg.gens) if i not in alg._dmap]
        raise AlgebraError(f"no superpartner declared for {missing}")
    out: dict = {}
    for (key, fm), v in st.t.items():
        cur = {((), fm): Fraction(1)}
        dcur = _fn_derivation(alg, fm, kind)
        for y in reversed(key):
            g, m = y
            if kind == "T":
                images = [(-m, (g, m - 1))]
                sign = 1
            else:
                images = []
                for c, h, r in alg._dmap[g]:
                    images.extend(linear_mode(c, h, r, m))
                sign = (-1) ** alg.parity[g]
            nd: dict = {}
            for c, md in images:
                for k2, w in act_state(alg, md, cur).items():
                    _add(nd, k2, c * w)
            for k2, w in act_state(alg, y, dcur).items():
                _add(nd, k2, sign * w)
            cur = act_state(alg, y, cur)
            dcur = nd
        for k2, w in dcur.items():
            _add(out, k2, v * w)
    return State(alg, out)


def translate(st: State) -> State:
    """The translation operator d."""
    return _derive(st, "T")


def susy_D(st: State) -> State:
    """The odd derivation D with D^2 = d."""
    return _derive(st, "D")


def dpow(st: State, k: int) -> State:
    for _ in range(k):
        st = translate(st)
    return st


# ---------------------------------------------------------------------------
# raw words and canonical form
# ---------------------------------------------------------------------------

def canonicalize(alg: AlgebraDef, word: Iterable, coeff=1, fn: FnElement | None = None) -> State:
    """Normal form of the right-nested word a1(a2(...(ak f)...)).

    ``word`` is a sequence of (generator name, derivative order) entries in
    any order; reordering corrections come from the mode commutators.
    """
    st = {((), ()): Fraction(1)}
    if fn is not None:
        st = {((), m): c for m, c in fn.t.items()}
    scale = as_scalar(coeff)
    for name, k in reversed(list(word)):
        if name not in alg.index:
            raise AlgebraError(f"unknown generator {name!r}")
        g = alg.index[name]
        st = act_state(alg, (g, -1 - k), st)
        scale = scale * factorial(k)
    return State(alg, st) * scale


def canonicalize_state(st: State) -> State:
    """States are stored canonically; this re-evaluates every word."""
    out = State(st.alg)
    for (key, fm), v in st.t.items():
        word = [(st.alg.gens[g].name, -1 - m) for g, m in key]
        norm = 1
        for _, k in word:
            norm *= factorial(k)
        out = out + canonicalize(st.alg, word, Fraction(v) / norm if not isinstance(v, Scalar) else v / norm,
                                 FnElement({fm: Fraction(1)}))
    return out


# ---------------------------------------------------------------------------
# plain-text rendering and parsing
# ---------------------------------------------------------------------------

def _entry_text(alg, g, m):
    k = -1 - m
    name = alg.gens[g].name
    if k == 0:
        return name
    return ("∂" if k == 1 else f"∂^{k}") + name


def word_text(alg, key) -> str:
    if not key:
        return "1"
    parts = [_entry_text(alg, g, m) for g, m in key]
    s = parts[-1]
    for p in reversed(parts[:-1]):
        s = f"{p}({s})"
    return s


def render(st: State) -> str:
    """Terms ``coeff [{fn}] word`` joined by ' + '; '0' for the zero state."""
    if not st.t:
        return "0"
    groups: dict = {}
    for (key, fm), v in st.t.items():
        norm = 1
        for _, m in key:
            norm *= factorial(-1 - m)
        groups.setdefault(key, {})[fm] = v / norm
    out = []
    for key in sorted(groups):
        d = groups[key]
        w = word_text(st.alg, key)
        if set(d) == {()}:
            cs = fmt(d[()])
            if cs == "1":
                out.append(w)
            else:
                out.append((cs if " " not in cs else f"({cs})") + " " + w)
        else:
            out.append("1 {" + fn_fmt(FnElement(d)) + "} " + w)
    return " + ".join(out)


def _split_top(s: str, sep: str):
    parts, depth, cur, i = [], 0, [], 0
    while i < len(s):
        ch = s[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if depth == 0 and s.startswith(sep, i):
            parts.append("".join(cur))
            cur = []
            i += len(sep)
            continue
        cur.append(ch)
        i += 1
    parts.append("".join(cur))
    return parts


def _parse_atom(txt: str):
    txt = txt.strip()
    der: tuple = ()
    if txt.startswith("d") and "(" in txt and txt.endswith(")") and txt[1:txt.index("(")].isdigit():
        der = tuple(int(ch) for ch in txt[1:txt.index("(")])
        txt = txt[txt.index("(") + 1:-1]
    if "_" in txt:
        name, idx = txt.split("_", 1)
        idx = tuple(int(p) for p in idx.split("."))
    else:
        name, idx = txt, ()
    r = canon_atom(name, idx, der)
    if r is None:
        return FnElement()
    s, atom = r
    return FnElement({(atom,): Fraction(s)})


def parse_fn(text: str) -> FnElement:
    text = text.strip()
    if text == "0":
        return FnElement()
    total = FnElement()
    for term in _split_top(text, " + "):
        prod = FnElement.const(1)
        for fac in _split_top(term.strip(), "*"):
            fac = fac.strip()
            if fac.startswith("(") and fac.endswith(")"):
                prod = prod * as_scalar(fac[1:-1])
            elif fac and (fac[0].isdigit() or fac[0] == "-"):
                prod = prod * as_scalar(fac)
            else:
                prod = prod * _parse_atom(fac)
        total = total + prod
    return total


def parse_word(alg: AlgebraDef, text: str):
    text = text.strip()
    if text == "1":
        return []
    entries = []
    while True:
        if "(" in text:
            head, inner = text.split("(", 1)
            if not inner.endswith(")"):
                raise ValueError(f"unbalanced word {text!r}")
            inner = inner[:-1]
        else:
            head, inner = text, None
        k = 0
        if head.startswith("∂^"):
            j = 2
            while head[j].isdigit():
                j += 1
            k = int(head[2:j])
            head = head[j:]
        elif head.startswith("∂"):
            k, head = 1, head[1:]
        entries.append((head, k))
        if inner is None:
            return entries
        text = inner


def parse_state(alg: AlgebraDef, text: str) -> State:
    """Inverse of ``render``; words may be given in any order."""
    text = text.strip()
    if text == "0":
        return State(alg)
    total = State(alg)
    for term in _split_top(text, " + "):
        pieces = [p for p in _split_top(term.strip(), " ") if p]
        if len(pieces) == 1:
            cs, w, fn = "1", pieces[0], None
        elif len(pieces) == 2 and pieces[0].startswith("{"):
            cs, w = "1", pieces[1]
            fn = parse_fn(pieces[0].strip()[1:-1])
        elif len(pieces) == 2:
            cs, w = pieces
            fn = None
        elif len(pieces) == 3:
            cs, fs, w = pieces
            fn = parse_fn(fs.strip()[1:-1])
        else:
            raise ValueError(f"cannot parse term {term!r}")
        if cs.startswith("(") and cs.endswith(")"):
            cs = cs[1:-1]
        total = total + canonicalize(alg, parse_word(alg, w), as_scalar(cs), fn)
    return total


# ---------------------------------------------------------------------------
# PBW enumeration
# ---------------------------------------------------------------------------

def _coord_monomials(coords: list, degree: int):
    if degree == 0:
        yield ()
        return
    if not coords:
        return
    first, rest = coords[0], coords[1:]
    for e in range(degree, -1, -1):
        for tail in _coord_monomials(rest, degree - e):
            yield (("x", (first,), ()),) * e + tail


def enumerate_keys(alg: AlgebraDef, weight, zero_bound: int = 0, parity: int | None = None):
    """All PBW monomials (key, fmono) of the given weight.

    Weight-zero modes (coordinates and other weight-0 generators) are
    unbounded in number; at most ``zero_bound`` of them are used.
    """
    weight = Fraction(weight)
    modes = []
    for g in range(len(alg.gens)):
        w0 = alg.weight[g]
        if w0 < 0:
            raise AlgebraError("negative generator weight")
        k = 0
        while w0 + k <= weight:
            if not (k == 0 and g in alg.coord_of):
                modes.append(((g, -1 - k), w0 + k))
            k += 1
    modes.sort()
    coords = sorted(alg.gen_of_coord)
    out = []

    def rec(idx, remaining, zeros, key):
        if remaining == 0:
            for deg in range(0, zero_bound - zeros + 1):
                for fm in _coord_monomials(coords, deg):
                    out.append((tuple(key), fm))
            # zero-weight non-coordinate modes can still follow
        if idx >= len(modes):
            return
        for j in range(idx, len(modes)):
            mode, w = modes[j]
            if w > remaining:
                continue
            if w == 0 and zeros >= zero_bound:
                continue
            odd = alg.parity[mode[0]]
            if odd and key and key[-1] == mode:
                continue
            key.append(mode)
            rec(j if not odd else j + 1, remaining - w, zeros + (w == 0), key)
            key.pop()

    rec(0, weight, 0, [])
    if parity is not None:
        out = [e for e in out if (mono_parity(alg, e[0]) + 0) % 2 == parity]
    return sorted(set(out))
