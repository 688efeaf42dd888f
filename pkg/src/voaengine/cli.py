"""Scenario files, the job runner and report output.

A scenario file is a sequence of parenthesized directives::

    (algebra bcbg 2)                       ; comment
    (let Gs (std G))
    (verify n2 :J std :G Gs :expect-c 6)
    (scenario flat_g2)
    (verify svg2 :seed phi+)
    (commute + -)
    (trace :cutoff 2 :offset -1/48)
    (reduce sl2 :f principal :k generic :max-weight 2)

State expressions are either quoted plain-text states (the ``render``
syntax) or forms ``(+ a b ...)``, ``(- a b)``, ``(* r a)``, ``(D a)``,
``(d a)``, ``(. a b ...)`` (right-nested normally ordered product),
``(prod n a b)`` (n-th product) and ``(std X)``.
"""
from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import algebras, cdr, hamred, series, superconf
from .coeff import as_scalar, fmt
from .ope import commute_check, nprod, nth_product, singular_ope
from .state import AlgebraError, State, parse_state, render, susy_D, translate

REPORT_SCHEMA = "voaengine-report"
REPORT_VERSION = 1


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

class ScenarioError(Exception):
    category = "scenario"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message, self.line, self.col = message, line, col

    def diagnostic(self, source: str = "<input>") -> str:
        return f"{source}:{self.line}:{self.col}: {self.category} error: {self.message}"


class LexError(ScenarioError):
    category = "lexical"


class ParseError(ScenarioError):
    category = "syntax"


class UnresolvedName(ScenarioError):
    category = "unresolved-name"


class ConfigError(ScenarioError):
    category = "config"


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

@dataclass
class Token:
    kind: str  # "(", ")", "str", "kw", "atom"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def adv(s):
        nonlocal line, col
        for ch in s:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            adv(ch)
            i += 1
        elif ch == ";":
            j = text.find("\n", i)
            j = n if j < 0 else j
            adv(text[i:j])
            i = j
        elif ch in "()":
            toks.append(Token(ch, ch, line, col))
            adv(ch)
            i += 1
        elif ch == '"':
            j, buf = i + 1, []
            while True:
                if j >= n:
                    raise LexError("unterminated string", line, col)
                c = text[j]
                if c == "\\":
                    if j + 1 >= n or text[j + 1] not in '"\\n':
                        raise LexError(f"bad escape in string", line, col)
                    buf.append({"n": "\n"}.get(text[j + 1], text[j + 1]))
                    j += 2
                    continue
                if c == '"':
                    break
                buf.append(c)
                j += 1
            toks.append(Token("str", "".join(buf), line, col))
            adv(text[i:j + 1])
            i = j + 1
        elif ch.isprintable():
            j = i
            while j < n and text[j] not in ' \t\r\n();"':
                if not text[j].isprintable():
                    raise LexError(f"illegal character {text[j]!r}", line, col + (j - i))
                j += 1
            word = text[i:j]
            kind = "kw" if word.startswith(":") and len(word) > 1 else "atom"
            toks.append(Token(kind, word, line, col))
            adv(word)
            i = j
        else:
            raise LexError(f"illegal character {ch!r}", line, col)
    return toks


# ---------------------------------------------------------------------------
# syntax tree
# ---------------------------------------------------------------------------

@dataclass
class Node:
    kind: str  # "atom", "str", "list"
    value: object  # text or list of nodes
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class Directive:
    head: str
    args: list
    kwargs: dict
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class ScenarioDoc:
    directives: list


DIRECTIVES = ("algebra", "let", "verify", "commute", "trace", "reduce", "scenario")
ALGEBRA_BUILDERS = ("bcbg", "fermions", "bosons", "affine", "vg-super")
EXPR_HEADS = ("+", "-", "*", "D", "d", ".", "prod", "std")

# names each scenario exposes: sign tags and slot names
SCENARIO_SLOTS = {
    "bcbg": (("",), ("G", "J")),
    "flat_kahler": (("+", "-"), ("G", "J")),
    "flat_hyperkahler": (("+", "-"), ("G", "J1", "J2", "J3")),
    "darboux_n4": (("",), ("G", "J", "E", "F")),
    "flat_g2": (("+", "-"), ("G", "Phi", "X")),
    "flat_spin7": (("+", "-"), ("G", "X")),
}


def _parse_node(toks, pos):
    t = toks[pos]
    if t.kind == "(":
        items, pos = [], pos + 1
        while True:
            if pos >= len(toks):
                raise ParseError("unclosed '('", t.line, t.col)
            if toks[pos].kind == ")":
                return Node("list", items, t.line, t.col), pos + 1
            node, pos = _parse_node(toks, pos)
            items.append(node)
    if t.kind == ")":
        raise ParseError("unexpected ')'", t.line, t.col)
    return Node("str" if t.kind == "str" else ("kw" if t.kind == "kw" else "atom"), t.text, t.line, t.col), pos + 1


def _directive(node: Node) -> Directive:
    if node.kind != "list":
        raise ParseError("expected a parenthesized directive", node.line, node.col)
    if not node.value or node.value[0].kind != "atom":
        raise ParseError("directive needs a name", node.line, node.col)
    head = node.value[0].value
    if head not in DIRECTIVES:
        raise ParseError(f"unknown directive {head!r}", node.line, node.col)
    args, kwargs = [], {}
    items = node.value[1:]
    i = 0
    while i < len(items):
        it = items[i]
        if it.kind == "kw":
            key = it.value[1:]
            if i + 1 >= len(items) or items[i + 1].kind == "kw":
                raise ParseError(f"keyword :{key} needs a value", it.line, it.col)
            if key in kwargs:
                raise ParseError(f"duplicate keyword :{key}", it.line, it.col)
            kwargs[key] = items[i + 1]
            i += 2
            continue
        if kwargs:
            raise ParseError("positional argument after keywords", it.line, it.col)
        args.append(it)
        i += 1
    d = Directive(head, args, kwargs, node.line, node.col)
    _check_shape(d)
    return d


def _need(d: Directive, lo: int, hi: int | None = None):
    n = len(d.args)
    if n < lo or (hi is not None and n > hi):
        want = f"{lo}" if hi == lo else (f"at least {lo}" if hi is None else f"{lo}..{hi}")
        raise ParseError(f"({d.head}) takes {want} positional argument(s), got {n}", d.line, d.col)


def _atom(node: Node, what: str) -> str:
    if node.kind != "atom":
        raise ParseError(f"expected {what}", node.line, node.col)
    return node.value


def _check_shape(d: Directive):
    h = d.head
    if h == "algebra":
        _need(d, 1)
        b = _atom(d.args[0], "an algebra builder")
        if b not in ALGEBRA_BUILDERS:
            raise ParseError(f"unknown algebra builder {b!r}", d.args[0].line, d.args[0].col)
    elif h == "let":
        _need(d, 2, 2)
        _atom(d.args[0], "a name")
    elif h == "verify":
        _need(d, 1, 1)
        _atom(d.args[0], "a relation name")
    elif h == "commute":
        _need(d, 2, 2)
    elif h == "trace":
        _need(d, 0, 0)
    elif h == "reduce":
        _need(d, 1, 1)
    elif h == "scenario":
        _need(d, 1, 2)
        name = _atom(d.args[0], "a scenario name")
        if name not in SCENARIO_SLOTS:
            raise ParseError(f"unknown scenario {name!r}", d.args[0].line, d.args[0].col)


def _resolve(doc: ScenarioDoc):
    """Static check that every referenced name is defined before use."""
    names: set = set()
    tags: set = set()

    def expr(node: Node):
        if node.kind == "atom":
            if node.value not in names and node.value.lower() not in names:
                raise UnresolvedName(f"undefined name {node.value!r}", node.line, node.col)
        elif node.kind == "list":
            items = node.value
            if not items or items[0].kind != "atom" or items[0].value not in EXPR_HEADS:
                raise ParseError("expected a state expression form", node.line, node.col)
            head = items[0].value
            if head == "std":
                if len(items) != 2:
                    raise ParseError("(std X) takes one slot name", node.line, node.col)
                return
            rest = items[1:]
            if head == "*":
                rest = rest[1:]
            if head == "prod":
                rest = rest[1:]
            for it in rest:
                expr(it)

    for d in doc.directives:
        if d.head == "scenario":
            signs, slots = SCENARIO_SLOTS[d.args[0].value]
            for s in signs:
                tags.add(s)
                for sl in slots:
                    names.add(sl + s)
                    names.add((sl + s).lower())
        elif d.head == "let":
            expr(d.args[1])
            names.add(d.args[0].value)
        elif d.head == "verify":
            for key, v in d.kwargs.items():
                if key in VERIFY_OPTIONS:
                    if key == "seed" and v.kind == "atom":
                        tag = v.value[-1] if v.value[-1:] in "+-" else ""
                        if tag not in tags:
                            raise UnresolvedName(f"no scenario copy for seed {v.value!r}", v.line, v.col)
                    continue
                if v.kind == "atom" and v.value == "std":
                    continue
                expr(v)
        elif d.head == "commute":
            for v in d.args:
                if v.kind == "atom" and v.value in ("+", "-") and v.value in tags:
                    continue
                expr(v)
        elif d.head == "trace":
            for key in ("L", "J"):
                if key in d.kwargs:
                    expr(d.kwargs[key])


VERIFY_OPTIONS = ("expect-c", "seed", "basis", "phase", "xx-quartic")


def parse(text: str) -> ScenarioDoc:
    toks = tokenize(text)
    pos, directives = 0, []
    while pos < len(toks):
        node, pos = _parse_node(toks, pos)
        directives.append(_directive(node))
    doc = ScenarioDoc(directives)
    _resolve(doc)
    return doc


def _render_node(node: Node) -> str:
    if node.kind == "list":
        return "(" + " ".join(_render_node(x) for x in node.value) + ")"
    if node.kind == "str":
        return '"' + node.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    return node.value


def render_directive(d: Directive) -> str:
    parts = [d.head] + [_render_node(a) for a in d.args]
    for k, v in d.kwargs.items():
        parts += [f":{k}", _render_node(v)]
    return "(" + " ".join(parts) + ")"


def render_doc(doc: ScenarioDoc) -> str:
    return "".join(render_directive(d) + "\n" for d in doc.directives)


# ---------------------------------------------------------------------------
# evaluation context
# ---------------------------------------------------------------------------

@dataclass
class Context:
    base: Path
    max_weight: int = 2
    alg: object = None
    chart: object = None
    scenario: object = None
    names: dict = field(default_factory=dict)


def _rational(node: Node, what: str):
    if node.kind != "atom":
        raise ConfigError(f"expected {what}", node.line, node.col)
    try:
        return as_scalar(node.value)
    except Exception:
        raise ConfigError(f"expected {what}, got {node.value!r}", node.line, node.col) from None


def _int(node: Node, what: str) -> int:
    try:
        return int(node.value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected {what}, got {node.value!r}", node.line, node.col) from None


def _need_alg(ctx: Context, node) -> object:
    if ctx.alg is None:
        raise ConfigError("no algebra declared yet", node.line, node.col)
    return ctx.alg


def _lookup(ctx: Context, node: Node) -> State:
    v = node.value
    if v in ctx.names:
        return ctx.names[v]
    low = {k.lower(): k for k in ctx.names}
    if v.lower() in low:
        return ctx.names[low[v.lower()]]
    raise UnresolvedName(f"undefined name {v!r}", node.line, node.col)


def _std(ctx: Context, slot: str, node: Node) -> State:
    if ctx.chart is None:
        raise ConfigError("std sections need a bcbg algebra", node.line, node.col)
    secs = cdr.std_sections(ctx.chart)
    if slot not in secs:
        raise ConfigError(f"no standard section {slot!r}", node.line, node.col)
    return secs[slot]


def eval_expr(ctx: Context, node: Node) -> State:
    if node.kind == "atom":
        return _lookup(ctx, node)
    if node.kind == "str":
        alg = _need_alg(ctx, node)
        try:
            return parse_state(alg, node.value)
        except (ValueError, KeyError, AlgebraError) as exc:
            raise ConfigError(f"cannot read state: {exc}", node.line, node.col) from None
    items = node.value
    head = items[0].value
    try:
        if head == "std":
            return _std(ctx, items[1].value, node)
        if head == "+":
            out = eval_expr(ctx, items[1])
            for it in items[2:]:
                out = out + eval_expr(ctx, it)
            return out
        if head == "-":
            first = eval_expr(ctx, items[1])
            if len(items) == 2:
                return first * -1
            for it in items[2:]:
                first = first - eval_expr(ctx, it)
            return first
        if head == "*":
            return eval_expr(ctx, items[2]) * _rational(items[1], "a coefficient")
        if head == "D":
            return susy_D(eval_expr(ctx, items[1]))
        if head == "d":
            return translate(eval_expr(ctx, items[1]))
        if head == ".":
            return nprod(*[eval_expr(ctx, it) for it in items[1:]])
        if head == "prod":
            return nth_product(eval_expr(ctx, items[2]), eval_expr(ctx, items[3]), _int(items[1], "an integer"))
    except (IndexError, AttributeError):
        raise ParseError(f"malformed ({head} ...) form", node.line, node.col) from None
    except AlgebraError as exc:
        raise ConfigError(str(exc), node.line, node.col) from None
    raise ParseError(f"unknown form {head!r}", node.line, node.col)


def _build_algebra(ctx: Context, d: Directive) -> dict:
    b = d.args[0].value
    rest = d.args[1:]
    ctx.chart = None
    ctx.scenario = None
    try:
        if b == "bcbg":
            n = _int(rest[0], "a dimension") if rest else 1
            ctx.chart = cdr.bcbg(n)
            ctx.alg = ctx.chart.alg
        elif b in ("fermions", "bosons"):
            n = _int(rest[0], "a dimension") if rest else 1
            if b == "fermions":
                ctx.alg = algebras.free_fermions(n, [[int(i == j) for j in range(n)] for i in range(n)])
            else:
                form = [[0] * (2 * n) for _ in range(2 * n)]
                for i in range(n):
                    form[i][n + i], form[n + i][i] = 1, -1
                ctx.alg = algebras.symplectic_bosons(2 * n, form)
        else:
            if len(rest) != 2:
                raise ParseError(f"({b}) takes a Lie superalgebra and a level", d.line, d.col)
            lie = _lie(ctx, rest[0])
            k = "k" if rest[1].value == "generic" else _rational(rest[1], "a level")
            ctx.alg = algebras.affine(lie, as_scalar(k)) if b == "affine" else algebras.vg_super(lie, k)
    except AlgebraError as exc:
        raise ConfigError(str(exc), d.line, d.col) from None
    return {"algebra": ctx.alg.name, "generators": [g.name for g in ctx.alg.gens]}


def _lie(ctx: Context, node: Node):
    name = node.value
    try:
        if name in algebras.BUILTIN_LIE:
            return algebras.lie_builtin(name)
        path = (ctx.base / name)
        if not path.exists():
            raise ConfigError(f"no Lie superalgebra {name!r} (builtin or file)", node.line, node.col)
        return algebras.load_lie_data(path)
    except AlgebraError as exc:
        raise ConfigError(str(exc), node.line, node.col) from None


def _setup_scenario(ctx: Context, d: Directive) -> dict:
    name = d.args[0].value
    size = _int(d.args[1], "a size") if len(d.args) > 1 else None
    try:
        S = cdr.scenario(name, size)
    except (AlgebraError, ValueError) as exc:
        raise ConfigError(str(exc), d.line, d.col) from None
    ctx.scenario = S
    ctx.chart = S.chart
    ctx.alg = S.chart.alg
    for sign, slots in S.sections.items():
        for slot, st in slots.items():
            ctx.names[slot + sign] = st
    return {"scenario": name, "size": size, "expected_c": fmt(S.expected_c),
            "signs": sorted(S.sections), "info": {k: _plain(v) for k, v in sorted(S.info.items())}}


def _plain(v):
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    try:
        return fmt(v)
    except Exception:
        return str(v)


# ---------------------------------------------------------------------------
# check jobs
# ---------------------------------------------------------------------------

@dataclass
class Job:
    index: int
    kind: str
    run: object  # zero-argument callable returning (passed, details)


def _relation(ctx: Context, d: Directive):
    name = d.args[0].value
    S = ctx.scenario
    opts = {}
    if "basis" in d.kwargs:
        opts["basis"] = d.kwargs["basis"].value
    if "phase" in d.kwargs:
        opts["phase"] = d.kwargs["phase"].value
    if "xx-quartic" in d.kwargs:
        opts["xx_quartic"] = d.kwargs["xx-quartic"].value
    if S is not None and S.relation.name == name and not opts:
        return S.relation
    try:
        return superconf.builtin(name, **opts)
    except (KeyError, ValueError, AlgebraError) as exc:
        raise ConfigError(f"relation {name!r}: {exc}", d.args[0].line, d.args[0].col) from None


def _verify_job(ctx: Context, d: Directive):
    rel = _relation(ctx, d)
    expect = _rational(d.kwargs["expect-c"], "a central charge") if "expect-c" in d.kwargs else None
    slots = {k: v for k, v in d.kwargs.items() if k not in VERIFY_OPTIONS}
    S = ctx.scenario
    runs = []  # (label, thunk giving an assignment)
    if "seed" in d.kwargs:
        if S is None:
            raise ConfigError(":seed needs a scenario", d.line, d.col)
        tok = d.kwargs["seed"].value
        sign = tok[-1] if tok[-1:] in "+-" else ""
        seeds = S.seeds.get(sign)
        if not seeds:
            raise ConfigError(f"scenario has no seeds for {tok!r}", d.line, d.col)
        family = rel.name

        def from_seed(seeds=seeds, family=family):
            boot = superconf.bootstrap(seeds, family)
            if not boot.ok:
                raise AlgebraError(f"bootstrap of {family} found extra poles")
            return boot.slots
        runs.append((sign or "copy", from_seed))
        expect = expect if expect is not None else S.expected_c
    elif slots:
        assignment = {}
        for k, v in slots.items():
            assignment[k] = _std(ctx, k, v) if (v.kind == "atom" and v.value == "std") else eval_expr(ctx, v)
        algs = {id(s.alg) for s in assignment.values()}
        if len(algs) > 1:
            raise ConfigError("slots live on different algebras", d.line, d.col)
        runs.append(("slots", lambda a=assignment: a))
    elif S is not None:
        for sign in sorted(S.sections):
            runs.append((sign or "copy", lambda s=S.sections[sign]: s))
        expect = expect if expect is not None else S.expected_c
    else:
        raise ConfigError("verify needs slot assignments, a :seed or a scenario", d.line, d.col)

    def run():
        out, ok = [], True
        for label, thunk in runs:
            rep = superconf.verify(thunk(), rel, expect_c=expect)
            if expect is not None and rep.c is not None and rep.c != expect:
                rep.passed = False
            ok = ok and rep.passed
            out.append({"copy": label, **rep.to_dict()})
        return ok, {"relation": rel.name, "expect_c": None if expect is None else fmt(expect), "copies": out}
    return run


def _commute_job(ctx: Context, d: Directive):
    a, b = d.args
    S = ctx.scenario
    if a.kind == "atom" and b.kind == "atom" and {a.value, b.value} == {"+", "-"} and S is not None:
        left, right = S.sections[a.value], S.sections[b.value]
        pairs = [(f"{x}{a.value}", left[x], f"{y}{b.value}", right[y]) for x in left for y in right]
    else:
        pairs = [(_render_node(a), eval_expr(ctx, a), _render_node(b), eval_expr(ctx, b))]

    def run():
        bad = []
        for la, sa, lb, sb in pairs:
            res = commute_check(sa, sb)
            if not res.ok:
                wit = {k: {str(j): render(v) for j, v in sorted(ope.items())} for k, ope in sorted(res.witness.items())}
                bad.append({"left": la, "right": lb, "witness": wit})
        return not bad, {"pairs_checked": len(pairs), "failures": bad}
    return run


def _trace_job(ctx: Context, d: Directive):
    alg = _need_alg(ctx, d)
    cutoff = _rational(d.kwargs["cutoff"], "a cutoff") if "cutoff" in d.kwargs else Fraction(ctx.max_weight)
    offset = _rational(d.kwargs["offset"], "an offset") if "offset" in d.kwargs else Fraction(0)
    L = eval_expr(ctx, d.kwargs["L"]) if "L" in d.kwargs else None
    J = eval_expr(ctx, d.kwargs["J"]) if "J" in d.kwargs else None
    bound = _int(d.kwargs["degree-bound"], "a degree bound") if "degree-bound" in d.kwargs else None

    def run():
        basis = series.weight_basis(alg, L, J, cutoff, degree_bound=bound)
        qs = series.graded_trace(basis, offset)
        dims = [[fmt(w), n] for w, n in basis.dims().items()]
        return True, {"cutoff": fmt(cutoff), "offset": fmt(offset), "dims": dims, "series": qs.to_dict()}
    return run


def _reduce_job(ctx: Context, d: Directive):
    lie = _lie(ctx, d.args[0])
    label = d.kwargs["f"].value if "f" in d.kwargs else "0"
    if label in ("0", "zero"):
        f = None
    elif label in lie.triples:
        f = lie.triples[label][0]
    else:
        node = d.kwargs["f"]
        raise ConfigError(f"no nilpotent {label!r} in {lie.name}", node.line, node.col)
    knode = d.kwargs.get("k")
    k = "k" if knode is None or knode.value == "generic" else _rational(knode, "a level")
    mw = _int(d.kwargs["max-weight"], "a weight") if "max-weight" in d.kwargs else ctx.max_weight

    def run():
        C = hamred.build(lie, f, k)
        qq = hamred.q_square_zero(C)
        table = hamred.cohomology_dims(C, mw)
        charge = hamred.charge_of_q(C)
        ok = qq.passed and table.square_zero and table.nonzero_charge_vanishes()
        det = {"lie": lie.name, "nilpotent": label, "k": fmt(as_scalar(k)), "max_weight": mw,
               "q_square_zero": qq.to_dict(), "charge_of_Q": None if charge is None else fmt(charge),
               "cohomology": table.to_dict(),
               "charge_zero_dims": [[fmt(w), n] for w, n in table.charge_zero().items()]}
        return ok, det
    return run


JOB_BUILDERS = {"verify": _verify_job, "commute": _commute_job, "trace": _trace_job, "reduce": _reduce_job}


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

_PENDING: list = []


def _run_one(i: int):
    job = _PENDING[i]
    t0 = time.perf_counter()
    try:
        ok, det = job.run()
        status = "pass" if ok else "fail"
    except (AlgebraError, ValueError, KeyError, ZeroDivisionError) as exc:
        status, det = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    return job.index, status, det, time.perf_counter() - t0


def prepare(doc: ScenarioDoc, ctx: Context, only: tuple | None = None):
    """Run setup directives in order; return report stubs and pending jobs."""
    entries, jobs = [], []
    for i, d in enumerate(doc.directives):
        entry = {"index": i + 1, "line": d.line, "column": d.col, "directive": render_directive(d)}
        entries.append(entry)
        t0 = time.perf_counter()
        if d.head == "algebra":
            entry.update(status="ok", details=_build_algebra(ctx, d))
        elif d.head == "scenario":
            entry.update(status="ok", details=_setup_scenario(ctx, d))
        elif d.head == "let":
            ctx.names[d.args[0].value] = eval_expr(ctx, d.args[1])
            entry.update(status="ok", details={"name": d.args[0].value})
        elif only is not None and d.head not in only:
            entry.update(status="skipped", details={})
        else:
            jobs.append(Job(i, d.head, JOB_BUILDERS[d.head](ctx, d)))
            entry.update(status="pending", details={})
        entry["seconds"] = time.perf_counter() - t0
    return entries, jobs


def run(doc: ScenarioDoc, base: Path | str = ".", max_weight: int = 2, jobs: int = 1,
        only: tuple | None = None) -> dict:
    """Execute a parsed document; returns the report dictionary."""
    global _PENDING
    ctx = Context(Path(base), max_weight)
    entries, pending = prepare(doc, ctx, only)
    _PENDING = pending
    try:
        if jobs > 1 and len(pending) > 1:
            mp = multiprocessing.get_context("fork")
            with mp.Pool(min(jobs, len(pending))) as pool:
                results = pool.map(_run_one, range(len(pending)))
        else:
            results = [_run_one(i) for i in range(len(pending))]
    finally:
        _PENDING = []
    for idx, status, det, secs in results:
        entries[idx].update(status=status, details=det, seconds=entries[idx]["seconds"] + secs)
    passed = all(e["status"] in ("ok", "pass", "skipped") for e in entries)
    return {"schema": REPORT_SCHEMA, "version": REPORT_VERSION, "passed": passed, "results": entries}


def _strip_timings(report: dict) -> dict:
    out = dict(report)
    out["results"] = [{k: v for k, v in e.items() if k != "seconds"} for e in report["results"]]
    return out


def format_json(report: dict, timings: bool = False) -> str:
    rep = report if timings else _strip_timings(report)
    return json.dumps(rep, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _summary(e: dict) -> str:
    det = e.get("details", {})
    if "error" in det:
        return det["error"]
    if "copies" in det:
        parts = []
        for c in det["copies"]:
            text = f"{c['copy']}: c = {c['c']}"
            if c["info"].get("c_mismatch"):
                text += f" (expected {c['info']['expected_c']})"
            if c["info"].get("zero_slots"):
                text += f" (zero slots {', '.join(c['info']['zero_slots'])})"
            parts.append(text)
        return "; ".join(parts)
    if "pairs_checked" in det:
        return f"{det['pairs_checked']} pair(s), {len(det['failures'])} non-commuting"
    if "series" in det:
        terms = det["series"]["terms"]
        return " + ".join(f"{c}*q^{a}" + (f"*y^{b}" if b else "") for a, b, c in terms) or "0"
    if "charge_zero_dims" in det:
        dims = ", ".join(f"{w}:{n}" for w, n in det["charge_zero_dims"])
        return f"Q.Q~0 {det['q_square_zero']['passed']}; charge-0 dims {dims}"
    if "scenario" in det:
        return f"expected c = {det['expected_c']}"
    if "algebra" in det:
        return det["algebra"]
    return ""


def format_text(report: dict, timings: bool = False) -> str:
    lines = []
    for e in report["results"]:
        head = f"[{e['index']}] {e['line']}:{e['column']} {e['directive']}  {e['status'].upper()}"
        if timings:
            head += f"  ({e['seconds']:.2f}s)"
        lines.append(head)
        s = _summary(e)
        if s:
            lines.append(f"    {s}")
        det = e.get("details", {})
        for c in det.get("copies", []):
            for r in c["residuals"]:
                lines.append(f"    residual {c['copy']} {r['pair']} pole {r['pole']}: {r['residual']}")
        for f in det.get("failures", []):
            lines.append(f"    {f['left']} x {f['right']} do not commute")
    lines.append("PASS" if report["passed"] else "FAIL")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _load(path: str) -> ScenarioDoc:
    text = Path(path).read_text(encoding="utf-8")
    return parse(text)


def _emit(report: dict, fmt_name: str, timings: bool):
    out = format_json(report, timings) if fmt_name == "json" else format_text(report, timings)
    sys.stdout.write(out)


def main(argv: list | None = None) -> int:
    ap = argparse.ArgumentParser(prog="voaengine", description="Symbolic super vertex algebra checks.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-weight", type=int, default=2)
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    p_run = sub.add_parser("run", parents=[common], help="execute a scenario file")
    p_run.add_argument("file")
    p_run.add_argument("--jobs", type=int, default=1)
    p_ope = sub.add_parser("ope", parents=[common], help="singular OPE of two named states")
    p_ope.add_argument("file")
    p_ope.add_argument("a")
    p_ope.add_argument("b")
    p_tr = sub.add_parser("trace", parents=[common], help="run only the trace directives")
    p_tr.add_argument("file")
    p_tr.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)

    try:
        doc = _load(args.file)
        base = Path(args.file).resolve().parent
        if args.cmd == "ope":
            ctx = Context(base, args.max_weight)
            prepare(doc, ctx, only=())
            a = eval_expr(ctx, _parse_node(tokenize(args.a), 0)[0])
            b = eval_expr(ctx, _parse_node(tokenize(args.b), 0)[0])
            if a.alg is not b.alg:
                raise ConfigError("states live on different algebras")
            ope = singular_ope(a, b)
            poles = {str(j): render(v) for j, v in sorted(ope.items())}
            if args.format == "json":
                sys.stdout.write(json.dumps({"schema": REPORT_SCHEMA, "version": REPORT_VERSION,
                                             "a": args.a, "b": args.b, "poles": poles},
                                            sort_keys=True, indent=2, ensure_ascii=False) + "\n")
            else:
                if not poles:
                    sys.stdout.write("~ 0\n")
                for j, v in poles.items():
                    sys.stdout.write(f"({j}): {v}\n")
            return 0
        only = ("trace",) if args.cmd == "trace" else None
        report = run(doc, base, args.max_weight, max(1, args.jobs), only)
    except ScenarioError as exc:
        sys.stderr.write(exc.diagnostic(getattr(args, "file", "<input>")) + "\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"{args.file}: {exc.strerror or exc}\n")
        return 2
    _emit(report, args.format, args.timings)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
