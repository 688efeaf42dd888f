"""Exact coefficients.

Two layers live here:

* ``Scalar``: elements of Q(c, k)[sqrt2, i], i.e. rational functions in the
  declared parameters extended by the formal square roots of 2 and -1.  Pure
  rationals are kept as ``fractions.Fraction`` for speed; ``mk`` downcasts.
* ``FnElement``: polynomials in formal function symbols of the coordinates
  (metric, inverse metric, Christoffel symbols, form coefficients, generic
  functions and the coordinates themselves) with derivative multi-indices.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Iterable, Union

from sympy import QQ, symbols, sympify, Rational, sqrt, I as SYMI, Symbol

PARAMS = ("c", "k")
_PSYMS = symbols(PARAMS)
PFIELD = QQ.frac_field(*_PSYMS)

Number = Union[int, Fraction, "Scalar"]


def _is_frac(x) -> bool:
    return isinstance(x, (int, Fraction))


def _badd(a, b):
    if _is_frac(a) and _is_frac(b):
        return a + b
    return _bdown(_bup(a) + _bup(b))


def _bmul(a, b):
    if _is_frac(a) and _is_frac(b):
        return a * b
    return _bdown(_bup(a) * _bup(b))


def _binv(a):
    if _is_frac(a):
        return 1 / Fraction(a)
    return _bdown(1 / a)


def _bup(a):
    if _is_frac(a):
        return PFIELD.convert(Fraction(a))
    return a


def _bdown(a):
    # collapse constant rational functions back to Fraction
    if _is_frac(a):
        return Fraction(a)
    if a.numer.is_ground and a.denom.is_ground:
        n = PFIELD.to_sympy(a)
        return Fraction(int(n.p), int(n.q))
    return a


def _bzero(a) -> bool:
    return a == 0


class Scalar:
    """a + b*sqrt2 + c*i + d*sqrt2*i with a..d in Q(params)."""

    __slots__ = ("t", "_h")

    def __init__(self, terms: dict):
        self.t = terms
        self._h = None

    # -- construction -----------------------------------------------------
    @staticmethod
    def param(name: str) -> "Scalar":
        if name not in PARAMS:
            raise KeyError(f"undeclared parameter {name!r}")
        return Scalar({(0, 0): PFIELD.convert(_PSYMS[PARAMS.index(name)])})

    # -- arithmetic -------------------------------------------------------
    def _terms(self):
        return self.t

    def __add__(self, o):
        o = _as_terms(o)
        if o is None:
            return NotImplemented
        r = dict(self.t)
        for key, v in o.items():
            s = _badd(r.get(key, 0), v)
            if _bzero(s):
                r.pop(key, None)
            else:
                r[key] = s
        return mk(r)

    __radd__ = __add__

    def __neg__(self):
        return mk({key: _bmul(-1, v) for key, v in self.t.items()})

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = _as_terms(o)
        if o is None:
            return NotImplemented
        return mk(_tmul(self.t, o))

    __rmul__ = __mul__

    def conj(self, flip_sqrt2: bool, flip_i: bool) -> "Scalar":
        r = {}
        for (s, j), v in self.t.items():
            sg = (-1) ** ((s and flip_sqrt2) + (j and flip_i))
            r[(s, j)] = _bmul(sg, v)
        return Scalar(r)

    def inverse(self):
        # product of the three nontrivial Galois conjugates over Q(params)
        c1 = self.conj(True, False)
        c2 = self.conj(False, True)
        c3 = self.conj(True, True)
        num = _tmul(_tmul(c1.t, c2.t), c3.t)
        norm = _tmul(self.t, num)
        assert set(norm) <= {(0, 0)}
        if not norm:
            raise ZeroDivisionError("Scalar division by zero")
        inv = _binv(norm[(0, 0)])
        return mk({key: _bmul(v, inv) for key, v in num.items()})

    def __truediv__(self, o):
        return self * inverse(o)

    def __rtruediv__(self, o):
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return inverse(self) ** (-n)
        r: Number = Fraction(1)
        for _ in range(n):
            r = r * self
        return r

    # -- comparison -------------------------------------------------------
    def __eq__(self, o):
        o = _as_terms(o)
        if o is None:
            return NotImplemented
        return self.t == o

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self.t.items()))
        return self._h

    def __bool__(self):
        return bool(self.t)

    def __repr__(self):
        return f"Scalar({fmt(self)})"

    def to_sympy(self):
        return to_sympy(self)


def _as_terms(o):
    if isinstance(o, Scalar):
        return o.t
    if isinstance(o, (int, Fraction)):
        return {(0, 0): Fraction(o)} if o != 0 else {}
    return None


def _tmul(a: dict, b: dict) -> dict:
    r: dict = {}
    for (s1, j1), v1 in a.items():
        for (s2, j2), v2 in b.items():
            v = _bmul(v1, v2)
            if s1 and s2:
                v = _bmul(2, v)
            if j1 and j2:
                v = _bmul(-1, v)
            key = (s1 ^ s2, j1 ^ j2)
            s = _badd(r.get(key, 0), v)
            if _bzero(s):
                r.pop(key, None)
            else:
                r[key] = s
    return r


def mk(terms: dict) -> Number:
    terms = {key: _bdown(v) for key, v in terms.items() if not _bzero(v)}
    if not terms:
        return Fraction(0)
    if set(terms) == {(0, 0)} and _is_frac(terms[(0, 0)]):
        return terms[(0, 0)]
    return Scalar(terms)


def inverse(x: Number) -> Number:
    if isinstance(x, Scalar):
        return x.inverse()
    return 1 / Fraction(x)


def as_scalar(x) -> Number:
    """Coerce ints, Fractions, strings and sympy numbers to the scalar type."""
    if isinstance(x, (Scalar, Fraction)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return from_sympy(sympify(x, locals={"sqrt2": sqrt(2), "I": SYMI, "i": SYMI}))


SQRT2 = Scalar({(1, 0): Fraction(1)})
IMAG = Scalar({(0, 1): Fraction(1)})


def sqrt_pm2(sign: int) -> Number:
    """sqrt(2) for sign=+1, sqrt(-2) = i*sqrt(2) for sign=-1."""
    return SQRT2 if sign > 0 else SQRT2 * IMAG


def is_zero(x) -> bool:
    return x == 0


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def to_sympy(x: Number):
    if isinstance(x, (int, Fraction)):
        return Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else Rational(x)
    out = 0
    for (s, j), v in x.t.items():
        base = Rational(v.numerator, v.denominator) if _is_frac(v) else PFIELD.to_sympy(v)
        out += base * (sqrt(2) if s else 1) * (SYMI if j else 1)
    return out


def from_sympy(e) -> Number:
    e = sympify(e).expand()
    total: Number = Fraction(0)
    for term in e.as_ordered_terms() if e != 0 else []:
        coeff = Fraction(1)
        s = j = 0
        rest = 1
        for f in term.as_ordered_factors():
            if f == sqrt(2):
                s ^= 1
            elif f == SYMI:
                j ^= 1
            elif f.is_Rational:
                coeff *= Fraction(int(f.p), int(f.q))
            elif f.is_Pow and f.base == 2 and f.exp == Rational(-1, 2):
                s ^= 1
                coeff /= 2
            else:
                rest *= f
        if rest == 1:
            base = coeff
        else:
            free = {str(x) for x in sympify(rest).free_symbols}
            if not free <= set(PARAMS):
                raise ValueError(f"unknown symbols {sorted(free - set(PARAMS))}")
            base = _bdown(PFIELD.from_sympy(rest) * PFIELD.convert(coeff))
        total = total + mk({(s, j): base})
    return total


def fmt(x: Number) -> str:
    """Plain-text form accepted by ``as_scalar``."""
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    parts = []
    for (s, j) in sorted(x.t):
        v = x.t[(s, j)]
        b = str(v) if _is_frac(v) else f"({PFIELD.to_sympy(v)})"
        if _is_frac(v) and Fraction(v).denominator != 1:
            b = f"({b})"
        tail = ("*sqrt2" if s else "") + ("*I" if j else "")
        parts.append(b + tail)
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# formal function ring
# ---------------------------------------------------------------------------

# symbol kinds: index symmetry of each named function family
SYMBOL_KINDS = {
    "x": "coord",
    "g": "sym",        # g_{ij}
    "ginv": "sym",     # g^{ij}
    "Gamma": "christoffel",  # Gamma^k_{ij}, symmetric in i, j
    "omega": "antisym",
    "f": "plain",
}


def register_symbol(name: str, kind: str = "plain") -> None:
    if kind not in ("plain", "sym", "antisym", "christoffel"):
        raise ValueError(kind)
    SYMBOL_KINDS[name] = kind


def canon_atom(name: str, idx: tuple, der: tuple = ()):
    """Return (sign, atom) with indices in canonical order, or None if zero."""
    kind = SYMBOL_KINDS.get(name, "plain")
    der = tuple(sorted(der))
    sign = 1
    if kind == "sym":
        idx = tuple(sorted(idx))
    elif kind == "christoffel":
        idx = (idx[0],) + tuple(sorted(idx[1:]))
    elif kind == "antisym":
        if len(set(idx)) < len(idx):
            return None
        perm = sorted(range(len(idx)), key=lambda p: idx[p])
        sign = _perm_sign(perm)
        idx = tuple(sorted(idx))
    return sign, (name, tuple(idx), der)


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def atom_name(atom) -> str:
    name, idx, der = atom
    s = name + "_" + ".".join(map(str, idx)) if idx else name
    if der:
        s = "d" + "".join(map(str, der)) + "(" + s + ")"
    return s


def mono_partial(mono: tuple, i: int):
    """Leibniz rule on a product of atoms; yields (coeff, mono)."""
    out = []
    for pos, (name, idx, der) in enumerate(mono):
        if pos and mono[pos - 1] == mono[pos]:
            continue
        mult = mono.count(mono[pos])
        rest = mono[:pos] + mono[pos + 1:]
        if name == "x":
            if idx[0] == i:
                out.append((mult, rest))
            continue
        new = (name, idx, tuple(sorted(der + (i,))))
        out.append((mult, tuple(sorted(rest + (new,)))))
    return out


class FnElement:
    """Finite sum of Scalar coefficients times commutative atom products."""

    __slots__ = ("t", "_h")

    def __init__(self, terms: dict | None = None):
        self.t = {m: c for m, c in (terms or {}).items() if c != 0}
        self._h = None

    @staticmethod
    def const(c) -> "FnElement":
        return FnElement({(): as_scalar(c)})

    @staticmethod
    def symbol(name: str, *idx: int, der: Iterable[int] = ()) -> "FnElement":
        r = canon_atom(name, tuple(idx), tuple(der))
        if r is None:
            return FnElement()
        s, atom = r
        return FnElement({(atom,): Fraction(s)})

    @staticmethod
    def coord(i: int) -> "FnElement":
        return FnElement({(("x", (i,), ()),): Fraction(1)})

    def __add__(self, o):
        o = _fn(o)
        r = dict(self.t)
        for m, c in o.t.items():
            r[m] = r.get(m, 0) + c
        return FnElement(r)

    __radd__ = __add__

    def __neg__(self):
        return FnElement({m: -c for m, c in self.t.items()})

    def __sub__(self, o):
        return self + (-_fn(o))

    def __rsub__(self, o):
        return _fn(o) - self

    def __mul__(self, o):
        o = _fn(o)
        r: dict = {}
        for m1, c1 in self.t.items():
            for m2, c2 in o.t.items():
                m = tuple(sorted(m1 + m2))
                r[m] = r.get(m, 0) + c1 * c2
        return FnElement(r)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        r = FnElement.const(1)
        for _ in range(n):
            r = r * self
        return r

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, Scalar)):
            o = FnElement.const(o)
        if not isinstance(o, FnElement):
            return NotImplemented
        return self.t == o.t

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self.t.items()))
        return self._h

    def is_const(self) -> bool:
        return all(m == () for m in self.t)

    def const_value(self):
        return self.t.get((), Fraction(0))

    def atoms(self) -> set:
        return {a for m in self.t for a in m}

    def partial(self, i: int, dim: int | None = None) -> "FnElement":
        return partial(self, i, dim)

    def subs(self, table) -> "FnElement":
        """Replace atoms by FnElements; ``table(atom)`` returns None to keep."""
        out = FnElement()
        cache: dict = {}
        for m, c in self.t.items():
            term = FnElement.const(c)
            for a in m:
                if a not in cache:
                    v = table(a)
                    cache[a] = FnElement({(a,): Fraction(1)}) if v is None else _fn(v)
                term = term * cache[a]
            out = out + term
        return out

    def __repr__(self):
        return f"FnElement({fn_fmt(self)})"


def _fn(o) -> FnElement:
    if isinstance(o, FnElement):
        return o
    return FnElement.const(o)


def fn_fmt(f: FnElement) -> str:
    if not f.t:
        return "0"
    parts = []
    for m in sorted(f.t):
        c = f.t[m]
        body = "*".join(atom_name(a) for a in m)
        cs = fmt(c)
        if not body:
            parts.append(cs if " " not in cs else f"({cs})")
        elif c == 1:
            parts.append(body)
        else:
            parts.append((cs if " " not in cs else f"({cs})") + "*" + body)
    return " + ".join(parts)


def partial(f, i: int, dim: int | None = None) -> FnElement:
    """Formal derivative with respect to coordinate ``i`` (1-based)."""
    f = _fn(f)
    if i < 1 or (dim is not None and i > dim):
        raise IndexError(f"coordinate index {i} out of range (dim={dim})")
    r: dict = {}
    for m, c in f.t.items():
        for k, m2 in mono_partial(m, i):
            r[m2] = r.get(m2, 0) + c * k
    return FnElement(r)


def partial_multi(f, idx: Iterable[int], dim: int | None = None) -> FnElement:
    f = _fn(f)
    for i in idx:
        f = partial(f, i, dim)
    return f


# ---------------------------------------------------------------------------
# rewrite rules
# ---------------------------------------------------------------------------

class RewriteRules:
    """Named rule set bound to a coordinate dimension.

    ``nabla-g``: derivatives of g_{ij} and g^{ij} are traded for Christoffel
    terms (metric compatibility).  ``inverse-contraction``: sum_j g^{ij} g_{kj}
    collapses to a Kronecker delta.  ``all`` applies both to a fixed point.
    Kronecker deltas never survive as atoms: indices are explicit integers.
    """

    NAMES = ("nabla-g", "inverse-contraction", "all")

    def __init__(self, name: str, dim: int):
        if name not in self.NAMES:
            raise KeyError(f"unknown rule set {name!r}")
        self.name = name
        self.dim = dim

    def __repr__(self):
        return f"RewriteRules({self.name!r}, dim={self.dim})"


def _metric_derivative(atom, dim: int) -> FnElement | None:
    name, idx, der = atom
    if not der or name not in ("g", "ginv"):
        return None
    l, rest = der[0], der[1:]
    i, j = idx
    G = FnElement.symbol
    if name == "g":
        repl = FnElement()
        for k in range(1, dim + 1):
            repl = repl + G("g", k, j) * G("Gamma", k, i, l) + G("g", i, k) * G("Gamma", k, j, l)
    else:
        repl = FnElement()
        for k in range(1, dim + 1):
            repl = repl - G("Gamma", i, l, k) * G("ginv", k, j) - G("Gamma", j, l, k) * G("ginv", i, k)
    return partial_multi(repl, rest)


def _apply_nabla(f: FnElement, dim: int) -> FnElement:
    while True:
        hit = [a for a in f.atoms() if _metric_derivative(a, dim) is not None]
        if not hit:
            return f
        f = f.subs(lambda a: _metric_derivative(a, dim))


def _apply_contraction(f: FnElement, dim: int) -> FnElement:
    changed = True
    while changed:
        changed = False
        terms = dict(f.t)
        for m in sorted(terms):
            if m not in terms:
                continue
            c = terms[m]
            for a in set(m):
                if a[0] != "ginv" or a[2]:
                    continue
                for b in set(m):
                    if b[0] != "g" or b[2]:
                        continue
                    found = _contraction_group(terms, m, a, b, c, dim)
                    if found is None:
                        continue
                    members, i, k, rest = found
                    for mm in members:
                        del terms[mm]
                    if i == k:
                        terms[rest] = terms.get(rest, 0) + c
                        if terms[rest] == 0:
                            del terms[rest]
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
        f = FnElement(terms)
    return f


def _contraction_group(terms, m, a, b, c, dim):
    # does m = rest * g^{i j} g_{k j} with all j = 1..dim present at coefficient c?
    for j in set(a[1]) & set(b[1]):
        ia = list(a[1])
        ia.remove(j)
        ib = list(b[1])
        ib.remove(j)
        i, k = ia[0], ib[0]
        rest = list(m)
        rest.remove(a)
        rest.remove(b)
        members = []
        ok = True
        for jj in range(1, dim + 1):
            aa = canon_atom("ginv", (i, jj))[1]
            bb = canon_atom("g", (k, jj))[1]
            mm = tuple(sorted(rest + [aa, bb]))
            if terms.get(mm) != c or mm in members:
                ok = False
                break
            members.append(mm)
        if ok:
            return members, i, k, tuple(sorted(rest))
    return None


def reduce(f, rules: RewriteRules) -> FnElement:
    """Rewrite to the fixed point of the named rule set (idempotent)."""
    f = _fn(f)
    if rules.name in ("nabla-g", "all"):
        f = _apply_nabla(f, rules.dim)
    if rules.name in ("inverse-contraction", "all"):
        f = _apply_contraction(f, rules.dim)
    return f


def flat_metric_table(matrix, inverse_matrix=None):
    """Substitution table sending g, g^{-1} to constants and Gamma to zero."""
    n = len(matrix)
    if inverse_matrix is None:
        from sympy import Matrix
        inv = Matrix([[to_sympy(as_scalar(v)) for v in row] for row in matrix]).inv()
        inverse_matrix = [[from_sympy(inv[i, j]) for j in range(n)] for i in range(n)]

    def table(atom):
        name, idx, der = atom
        if name == "g":
            return 0 if der else as_scalar(matrix[idx[0] - 1][idx[1] - 1])
        if name == "ginv":
            return 0 if der else as_scalar(inverse_matrix[idx[0] - 1][idx[1] - 1])
        if name == "Gamma":
            return 0
        return None

    return table


@lru_cache(maxsize=None)
def binom(n: int, k: int) -> int:
    """Generalized binomial coefficient for integer n (possibly negative)."""
    if k < 0:
        return 0
    num = 1
    for t in range(k):
        num *= n - t
    den = 1
    for t in range(2, k + 1):
        den *= t
    return num // den


__all__ = [
    "Scalar", "FnElement", "RewriteRules", "reduce", "partial", "partial_multi",
    "SQRT2", "IMAG", "sqrt_pm2", "as_scalar", "fmt", "fn_fmt", "mk", "inverse",
    "binom", "PARAMS", "flat_metric_table", "register_symbol", "canon_atom",
    "to_sympy", "from_sympy", "is_zero",
]
