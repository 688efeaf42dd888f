"""Exact sparse Gaussian elimination over the scalar field.

Vectors are dicts {column: value}; matrices are lists of such rows.
"""
from __future__ import annotations

from fractions import Fraction

from .coeff import inverse


def _axpy(row: dict, c, other: dict) -> dict:
    out = dict(row)
    for j, v in other.items():
        s = out.get(j, 0) + c * v
        if s == 0:
            out.pop(j, None)
        else:
            out[j] = s
    return out


class Echelon:
    """Incrementally built reduced basis of a row space.

    ``add`` returns the residual of a new vector after reduction (empty when
    the vector already lies in the span) together with its coordinates
    in terms of the vectors inserted so far.
    """

    def __init__(self):
        self.pivots: dict = {}  # pivot column -> (row, combo)
        self.count = 0

    def reduce(self, vec: dict):
        vec = {j: v for j, v in vec.items() if v != 0}
        combo: dict = {}
        changed = True
        while changed and vec:
            changed = False
            for j in sorted(vec, key=_colkey):
                if j in self.pivots:
                    prow, pcombo = self.pivots[j]
                    c = -vec[j]
                    vec = _axpy(vec, c, prow)
                    combo = _axpy(combo, c, pcombo)
                    changed = True
                    break
        return vec, combo

    def add(self, vec: dict) -> bool:
        """Insert ``vec``; True if it was independent of earlier inserts."""
        idx = self.count
        self.count += 1
        res, combo = self.reduce(vec)
        if not res:
            return False
        combo = _axpy(combo, 1, {("in", idx): Fraction(1)})
        j = min(res, key=_colkey)
        inv = inverse(res[j])
        res = {k: v * inv for k, v in res.items()}
        combo = {k: v * inv for k, v in combo.items()}
        self.pivots[j] = (res, combo)
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _colkey(j):
    return (str(type(j)), j) if not isinstance(j, tuple) else ("t", repr(j))


def rank(rows) -> int:
    e = Echelon()
    for r in rows:
        e.add(r)
    return e.rank


def solve_in_span(basis: list, target: dict):
    """Coefficients x with sum x_i basis_i = target, or None if impossible."""
    e = Echelon()
    for b in basis:
        e.add(b)
    res, combo = e.reduce(target)
    if res:
        return None
    # combo expresses -(target - residual) through inserted vectors
    x = [Fraction(0)] * len(basis)
    for key, v in combo.items():
        x[key[1]] = x[key[1]] - v
    return x


def nullspace(columns: list, ncols: int | None = None) -> list:
    """Kernel of the map whose i-th column is ``columns[i]`` (dict rows)."""
    e = Echelon()
    kernel = []
    for i, col in enumerate(columns):
        res, combo = e.reduce(col)
        if not res:
            vec = {i: Fraction(1)}
            for key, v in combo.items():
                vec[key[1]] = vec.get(key[1], 0) + v
            kernel.append({k: v for k, v in vec.items() if v != 0})
            e.count += 1
        else:
            idx = e.count
            e.count += 1
            combo = _axpy(combo, 1, {("in", idx): Fraction(1)})
            j = min(res, key=_colkey)
            inv = inverse(res[j])
            e.pivots[j] = ({k: v * inv for k, v in res.items()}, {k: v * inv for k, v in combo.items()})
    return kernel
