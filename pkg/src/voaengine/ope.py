"""n-th products, singular OPEs and the checks built on them.

Two independent evaluation routes exist for a_(n)b:

* ``wick``: for constant-coefficient monomials of a free-field algebra the
  field of a PBW word is the mode-normal-ordered product of its factors, so
  a_(n)b is a sum over contraction patterns (Wick's theorem).
* ``borcherds``: the general route.  A word a_(m)A' is peeled with the
  associativity identity
      (a_(m)A')_(n) = sum_j (-1)^j C(m,j) [a_(m-j) A'_(n+j) - (-1)^m p A'_(m+n-j) a_(j)]
  down to the vacuum or a function f(gamma), whose field is expanded by
  Taylor's formula in the creation and annihilation parts of gamma(z).

``nth_product`` uses Wick when it applies and Borcherds otherwise; the test
suite compares the two.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, floor
from typing import Dict

from .coeff import FnElement, as_scalar, binom, mono_partial
from .state import (
    AlgebraDef, AlgebraError, State, _add, act, act_state, mono_parity, mono_weight,
    translate, susy_D,
)

SingularOPE = Dict[int, State]


def _wmax(alg, terms: dict) -> Fraction:
    return max((mono_weight(alg, k) for k, _ in terms), default=Fraction(0))


# ---------------------------------------------------------------------------
# Borcherds route
# ---------------------------------------------------------------------------

def _nprod_mono(alg: AlgebraDef, akey, afm, n: int, ckey, cfm) -> dict:
    ck = ("B", akey, afm, n, ckey, cfm)
    hit = alg.nprod_cache.get(ck)
    if hit is not None:
        return hit
    res = _nprod_mono_raw(alg, akey, afm, n, ckey, cfm)
    alg.nprod_cache[ck] = res
    return res


def _nprod_terms(alg, akey, afm, n, cterms: dict) -> dict:
    out: dict = {}
    for (ckey, cfm), v in cterms.items():
        for k2, w in _nprod_mono(alg, akey, afm, n, ckey, cfm).items():
            _add(out, k2, v * w)
    return out


def _nprod_mono_raw(alg, akey, afm, n, ckey, cfm) -> dict:
    if not akey:
        if not afm:
            return {(ckey, cfm): Fraction(1)} if n == -1 else {}
        return _fn_product(alg, afm, n, ckey, cfm)
    (a, m) = akey[0]
    rest = akey[1:]
    k = -1 - m
    pa = alg.parity[a]
    eps = (-1) ** (pa * mono_parity(alg, rest))
    wc = mono_weight(alg, ckey)
    wr = mono_weight(alg, rest)
    out: dict = {}
    cmono = {(ckey, cfm): Fraction(1)}
    j1 = floor(wr + wc - n - 1)
    for j in range(0, j1 + 1):
        inner = _nprod_mono(alg, rest, afm, n + j, ckey, cfm)
        if not inner:
            continue
        coef = binom(k + j, j)
        for k2, w in act_state(alg, (a, m - j), inner).items():
            _add(out, k2, coef * w)
    j2 = floor(alg.weight[a] + wc - 1)
    sgn = -(1 - 2 * (m % 2)) * eps
    for j in range(0, j2 + 1):
        hit = act_state(alg, (a, j), cmono)
        if not hit:
            continue
        coef = sgn * binom(k + j, j)
        for k2, w in _nprod_terms(alg, rest, afm, m + n - j, hit).items():
            _add(out, k2, coef * w)
    return out


def _compositions(total: int, coords: list):
    """Multisets of (coordinate, r>=1) with sum r = total, with 1/prod(mult!)."""
    pairs = [(i, r) for i in coords for r in range(1, total + 1)]

    def rec(start, remaining):
        if remaining == 0:
            yield ()
            return
        for idx in range(start, len(pairs)):
            i, r = pairs[idx]
            if r > remaining:
                continue
            for tail in rec(idx, remaining - r):
                yield ((i, r),) + tail

    for ms in rec(0, total):
        w = 1
        for e in set(ms):
            w *= factorial(ms.count(e))
        yield ms, Fraction(1, w)


def _fn_product(alg, afm, n, ckey, cfm) -> dict:
    """f(gamma)_(n) applied to a monomial via the Taylor expansion of f(gamma(z))."""
    coords = sorted(alg.gen_of_coord)
    f = FnElement({afm: Fraction(1)})
    # annihilation part: Gamma_-(z)^alpha C, tracked with its z power
    layers = [((), 0, {(ckey, cfm): Fraction(1)})]
    frontier = list(layers)
    while frontier:
        nxt = []
        for alpha, zp, st in frontier:
            last = alpha[-1] if alpha else coords[0]
            for i in coords:
                if i < last:
                    continue
                g = alg.gen_of_coord[i]
                wmax = _wmax(alg, st)
                for j in range(0, floor(wmax - 1) + 1 if wmax >= 1 else 0):
                    hit = act_state(alg, (g, j), st)
                    if hit:
                        nxt.append((alpha + (i,), zp - j - 1, hit))
        layers.extend(nxt)
        frontier = nxt
    out: dict = {}
    for alpha, zp, st in layers:
        t = -n - 1 - zp
        if t < 0:
            continue
        afac = 1
        for i in set(alpha):
            afac *= factorial(alpha.count(i))
        fa = f
        for i in alpha:
            fa = fa.partial(i)
        if not fa.t:
            continue
        for ms, w in _compositions(t, coords):
            fb = fa
            for i, _ in ms:
                fb = fb.partial(i)
            if not fb.t:
                continue
            cur = st
            for i, r in ms:
                cur = act_state(alg, (alg.gen_of_coord[i], -r - 1), cur)
            scale = w / afac
            for m2, c2 in fb.t.items():
                for (k3, fm3), v in cur.items():
                    _add(out, (k3, tuple(sorted(fm3 + m2))), v * c2 * scale)
    return out


# ---------------------------------------------------------------------------
# Wick route
# ---------------------------------------------------------------------------

def _pairing(alg, a, b):
    """(pole p, kappa) with a_(p)b = kappa*1 for generators, or None."""
    ent = alg.table.get((a, b))
    if not ent:
        return None
    ((p, terms),) = ent.items()
    ((c, g, r),) = terms
    return p, c


def _wick_mono(alg, akey, n, ckey) -> dict:
    ck = ("W", akey, n, ckey)
    hit = alg.nprod_cache.get(ck)
    if hit is not None:
        return hit
    res = _wick_raw(alg, akey, n, ckey)
    alg.nprod_cache[ck] = res
    return res


def _wick_raw(alg, akey, n, ckey) -> dict:
    if not akey:
        return {(ckey, ()): Fraction(1)} if n == -1 else {}
    r = len(akey)
    par = alg.parity
    out: dict = {}
    # choose annihilation assignments right-to-left: each A-factor either
    # stays (creation part) or contracts with a distinct C-factor
    results = []

    def rec(idx, cur_key, used_sign, zpow, coef, stay):
        if idx < 0:
            results.append((cur_key, zpow, coef, stay))
            return
        a, m = akey[idx]
        k = -1 - m
        # stay in creation part
        rec(idx - 1, cur_key, used_sign, zpow, coef, (idx,) + stay)
        # contract with some factor of cur_key
        seen = set()
        before = 0
        for pos, (b, mb) in enumerate(cur_key):
            if (b, mb) in seen:
                before += par[b]
                continue
            seen.add((b, mb))
            pk = _pairing(alg, a, b)
            if pk is not None:
                p, kap = pk
                s = -1 - mb
                mult = cur_key.count((b, mb)) if par[b] == 0 else 1
                jj = p + s  # a_(jj) hits b_(-1-s)
                val = kap * binom(jj, p) * ((-1) ** k) * binom(jj + k, k) * mult
                sign = (-1) ** (par[a] * before)
                nk = cur_key[:pos] + cur_key[pos + 1:]
                rec(idx - 1, nk, used_sign, zpow - (jj + k) - 1, coef * val * sign, stay)
            before += par[b]

    rec(r - 1, ckey, 1, 0, Fraction(1), ())
    for cur_key, zpow, coef, stay in results:
        total = -n - 1 - zpow
        if total < 0:
            continue
        # Koszul sign of moving stayed factors left past contracted ones
        contracted = [i for i in range(r) if i not in stay]
        sign = 1
        for i in contracted:
            for j in stay:
                if j > i and par[akey[i][0]] and par[akey[j][0]]:
                    sign = -sign
        for dist in _distribute(total, len(stay)):
            c = coef * sign
            st = {(cur_key, ()): Fraction(1)}
            for idx, rr in reversed(list(zip(stay, dist))):
                a, m = akey[idx]
                k = -1 - m
                c = c * binom(rr + k, k)
                st = act_state(alg, (a, -1 - rr - k), st)
            for k2, v in st.items():
                _add(out, k2, c * v)
    return out


def _distribute(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for x in range(total + 1):
        for tail in _distribute(total - x, parts - 1):
            yield (x,) + tail


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def nth_product(a: State, b: State, n: int, route: str = "auto") -> State:
    """a_(n)b for any integer n."""
    if a.alg is not b.alg:
        raise AlgebraError("states over different algebras")
    alg = a.alg
    out: dict = {}
    for (akey, afm), va in a.t.items():
        for (bkey, bfm), vb in b.t.items():
            use_wick = route == "wick" or (
                route == "auto" and alg.free and not afm and not bfm)
            if use_wick:
                if afm or bfm or not alg.free:
                    raise AlgebraError("Wick route needs constant free-field monomials")
                res = _wick_mono(alg, akey, n, bkey)
            else:
                res = _nprod_mono(alg, akey, afm, n, bkey, bfm)
            for k2, w in res.items():
                _add(out, k2, va * vb * w)
    return State(alg, out)


def norm_product(a: State, b: State) -> State:
    """The normally ordered product a_(-1)b."""
    return nth_product(a, b, -1)


def nprod(*states: State) -> State:
    """Right-nested normally ordered product s1(s2(...sk))."""
    out = states[-1]
    for s in reversed(states[:-1]):
        out = norm_product(s, out)
    return out


def singular_ope(a: State, b: State) -> SingularOPE:
    """{j: a_(j)b} for j >= 0, nonzero entries only."""
    if a.alg is not b.alg:
        raise AlgebraError("states over different algebras")
    if not a.t or not b.t:
        return {}
    top = a.max_weight() + b.max_weight() - 1
    out = {}
    for j in range(0, max(floor(top), 0) + 1):
        r = nth_product(a, b, j)
        if r:
            out[j] = r
    return out


def skew_ope(a: State, b: State, ope_ab: SingularOPE | None = None) -> SingularOPE:
    """b_(n)a predicted from a_(j)b by the skew-symmetry rule."""
    if ope_ab is None:
        ope_ab = singular_ope(a, b)
    p = (-1) ** (a.parity() * b.parity())
    top = max(ope_ab, default=-1)
    out = {}
    for n in range(top + 1):
        acc = State(a.alg)
        for j in range(0, top - n + 1):
            if n + j not in ope_ab:
                continue
            term = ope_ab[n + j]
            for _ in range(j):
                term = translate(term)
            acc = acc + term * (Fraction((-1) ** (n + j), factorial(j)))
        acc = acc * (-p)
        if acc:
            out[n] = acc
    return out


@dataclass
class CommuteResult:
    ok: bool
    witness: dict

    def __bool__(self):
        return self.ok


def commute_check(a: State, b: State) -> CommuteResult:
    ab = singular_ope(a, b)
    ba = singular_ope(b, a)
    return CommuteResult(not ab and not ba, {"ab": ab, "ba": ba})


def _expected_virasoro(L: State):
    return {0: translate(L), 1: L * 2}


def is_virasoro(L: State) -> bool:
    if not L:
        return False
    ope = singular_ope(L, L)
    exp = _expected_virasoro(L)
    for j in set(ope) | {0, 1, 2, 3}:
        got = ope.get(j, State(L.alg))
        if j in exp:
            if got != exp[j]:
                return False
        elif j == 3:
            if any(k != ((), ()) for k in got.t):
                return False
        elif got:
            return False
    return True


def central_charge(L: State):
    if not is_virasoro(L):
        raise AlgebraError("not a Virasoro vector")
    q = nth_product(L, L, 3)
    return 2 * q.t.get(((), ()), Fraction(0))


def is_primary(a: State, L: State, weight) -> bool:
    weight = as_scalar(weight)
    ope = singular_ope(L, a)
    exp = {0: translate(a), 1: a * weight}
    keys = set(ope) | set(exp)
    return all(ope.get(j, State(a.alg)) == exp.get(j, State(a.alg)) for j in keys)


def is_primary_n1(a: State, L: State, G: State, weight) -> bool:
    if not is_primary(a, L, weight):
        return False
    ope = singular_ope(G, a)
    return set(ope) <= {0} and ope.get(0, State(a.alg)) == susy_D(a)

