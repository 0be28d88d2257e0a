"""S-expression surface syntax for terms, formulas and sequents."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import prims
from .syntax import (
    BOT, ZERO, And, Bot, Eq, ExistsF, ExistsN, ForallF, ForallN, FunApp, FunVar, Imp,
    Lambda, NumVar, PrimApp, Rec, Succ, Zero, binders, elaborate_disjunction, free_vars,
    lambda_binders, neg, num,
)


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} (at offset {pos})")


@dataclass(frozen=True)
class Atom:
    text: str
    pos: int


@dataclass(frozen=True)
class SList:
    items: tuple
    pos: int


_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


def read_all(text: str) -> list:
    """Read every top-level s-expression in ``text``."""
    stack: list[list] = [[]]
    starts: list[int] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError("unexpected character", pos)
        comment, lp, rp, atom = m.groups()
        start = m.start(2) if lp else m.start(3) if rp else m.start(4) if atom else pos
        pos = m.end()
        if comment:
            continue
        if lp:
            stack.append([])
            starts.append(start)
        elif rp:
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", start)
            items = stack.pop()
            stack[-1].append(SList(tuple(items), starts.pop()))
        elif atom:
            stack[-1].append(Atom(atom, start))
    if len(stack) != 1:
        raise ParseError("unbalanced '('", starts[-1])
    return stack[0]


def read_one(text: str):
    items = read_all(text)
    if len(items) != 1:
        raise ParseError(f"expected one expression, found {len(items)}", 0)
    return items[0]


def head(e) -> str | None:
    if isinstance(e, SList) and e.items and isinstance(e.items[0], Atom):
        return e.items[0].text
    return None


_VAR = re.compile(r"^([xa])(\d+)$")
_BINDER_INT = re.compile(r"\((?:alln|exn|lam)\s+x?(\d+)")
_XVAR = re.compile(r"\bx(\d+)\b")


class _Fresh:
    def __init__(self, text: str):
        used = [int(m) for m in _XVAR.findall(text)] + [int(m) for m in _BINDER_INT.findall(text)]
        self.next = max(used, default=0) + 1

    def __call__(self) -> int:
        n = self.next
        self.next += 1
        return n


def _index(e, prefix: str) -> int:
    if not isinstance(e, Atom):
        raise ParseError("expected a variable index", e.pos)
    t = e.text
    if t.isdigit():
        return int(t)
    m = _VAR.match(t)
    if not m or m.group(1) != prefix:
        raise ParseError(f"expected {prefix}-variable, got {t!r}", e.pos)
    return int(m.group(2))


def _expect(e, n: int):
    if len(e.items) != n:
        raise ParseError(f"{head(e)} expects {n - 1} arguments", e.pos)


def _is_fun_expr(e) -> bool:
    if isinstance(e, Atom):
        return e.text.startswith("a") and bool(_VAR.match(e.text))
    return head(e) in ("lam", "rec")


def parse_num_term(e, fresh=None):
    if isinstance(e, Atom):
        t = e.text
        if t.isdigit():
            return num(int(t))
        m = _VAR.match(t)
        if m and m.group(1) == "x":
            return NumVar(int(m.group(2)))
        raise ParseError(f"bad number term {t!r}", e.pos)
    h = head(e)
    if h == "succ":
        _expect(e, 2)
        return Succ(parse_num_term(e.items[1]))
    if h == "prim":
        if len(e.items) < 2 or not isinstance(e.items[1], Atom):
            raise ParseError("prim needs a symbol name", e.pos)
        name = e.items[1].text
        try:
            sym = prims.lookup(name)
        except KeyError as exc:
            raise ParseError(str(exc), e.pos) from None
        args = tuple(parse_num_term(a) for a in e.items[2:])
        if len(args) != sym.arity:
            raise ParseError(f"arity mismatch: {name} takes {sym.arity}, got {len(args)}", e.pos)
        return PrimApp(name, args)
    if h == "app":
        _expect(e, 3)
        return FunApp(parse_fun_term(e.items[1]), parse_num_term(e.items[2]))
    raise ParseError(f"bad number term head {h!r}", e.pos)


def parse_fun_term(e):
    if isinstance(e, Atom):
        m = _VAR.match(e.text)
        if m and m.group(1) == "a":
            return FunVar(int(m.group(2)))
        raise ParseError(f"bad function term {e.text!r}", e.pos)
    h = head(e)
    if h == "lam":
        _expect(e, 3)
        return Lambda(_index(e.items[1], "x"), parse_num_term(e.items[2]))
    if h == "rec":
        _expect(e, 3)
        return Rec(parse_num_term(e.items[1]), parse_fun_term(e.items[2]))
    raise ParseError(f"bad function term head {h!r}", e.pos)


def parse_term(e):
    if isinstance(e, str):
        e = read_one(e)
    return parse_fun_term(e) if _is_fun_expr(e) else parse_num_term(e)


def _formula(e, fresh: _Fresh):
    if isinstance(e, Atom):
        if e.text == "bot":
            return BOT
        raise ParseError(f"bad formula {e.text!r}", e.pos)
    h = head(e)
    if h == "eq":
        _expect(e, 3)
        l, r = e.items[1], e.items[2]
        if _is_fun_expr(l) and _is_fun_expr(r):
            x = fresh()
            return ForallN(x, Eq(FunApp(parse_fun_term(l), NumVar(x)), FunApp(parse_fun_term(r), NumVar(x))))
        return Eq(parse_num_term(l), parse_num_term(r))
    if h in ("and", "imp", "or"):
        _expect(e, 3)
        a, b = _formula(e.items[1], fresh), _formula(e.items[2], fresh)
        if h == "and":
            return And(a, b)
        if h == "imp":
            return Imp(a, b)
        return elaborate_disjunction(a, b, fresh())
    if h == "not":
        _expect(e, 2)
        return neg(_formula(e.items[1], fresh))
    if h in ("alln", "exn"):
        _expect(e, 3)
        cls = ForallN if h == "alln" else ExistsN
        return cls(_index(e.items[1], "x"), _formula(e.items[2], fresh))
    if h in ("allf", "exf"):
        _expect(e, 3)
        cls = ForallF if h == "allf" else ExistsF
        return cls(_index(e.items[1], "a"), _formula(e.items[2], fresh))
    raise ParseError(f"unknown formula head {h!r}", e.pos)


def formula_from_sexpr(e, text: str = ""):
    return _formula(e, _Fresh(text))


def parse_formula(text: str):
    phi = _formula(read_one(text), _Fresh(text))
    _check_conventions(phi)
    return phi


def _var_name(v) -> str:
    return ("x" if v[0] == "n" else "a") + str(v[1])


def _check_conventions(phi):
    bound = binders(phi) + lambda_binders(phi)
    seen = set()
    for v in bound:
        if v in seen:
            raise ParseError(f"{_var_name(v)} is bound more than once")
        seen.add(v)
    both = seen & free_vars(phi)
    if both:
        v = min(both)
        raise ParseError(f"{_var_name(v)} is both bound and free")


def parse_sequent(text: str):
    return sequent_from_sexpr(read_one(text), text)


def sequent_from_sexpr(e, text: str = ""):
    from .calculus import Sequent

    fresh = _Fresh(text)
    if head(e) != "seq" or len(e.items) != 3 or not isinstance(e.items[1], SList):
        raise ParseError("expected (seq (f ...) f)", e.pos)
    ante = tuple(_formula(f, fresh) for f in e.items[1].items)
    return Sequent(ante, _formula(e.items[2], fresh))


# -------------------------------------------------------------------- printing


def _numeral(t) -> int | None:
    k = 0
    while isinstance(t, Succ):
        t, k = t.arg, k + 1
    return k if isinstance(t, Zero) else None


def show_term(t) -> str:
    if isinstance(t, NumVar):
        return f"x{t.index}"
    if isinstance(t, FunVar):
        return f"a{t.index}"
    k = _numeral(t)
    if k is not None:
        return str(k)
    if isinstance(t, Succ):
        return f"(succ {show_term(t.arg)})"
    if isinstance(t, PrimApp):
        return "(prim " + " ".join([t.name] + [show_term(a) for a in t.args]) + ")"
    if isinstance(t, FunApp):
        return f"(app {show_term(t.fun)} {show_term(t.arg)})"
    if isinstance(t, Lambda):
        return f"(lam x{t.binder} {show_term(t.body)})"
    if isinstance(t, Rec):
        return f"(rec {show_term(t.base)} {show_term(t.step)})"
    raise TypeError(t)


def show(phi) -> str:
    if isinstance(phi, Eq):
        return f"(eq {show_term(phi.left)} {show_term(phi.right)})"
    if isinstance(phi, Bot):
        return "bot"
    if isinstance(phi, And):
        return f"(and {show(phi.left)} {show(phi.right)})"
    if isinstance(phi, Imp):
        return f"(imp {show(phi.left)} {show(phi.right)})"
    tag = {ForallN: "alln", ExistsN: "exn", ForallF: "allf", ExistsF: "exf"}[type(phi)]
    prefix = "x" if phi.sort == "n" else "a"
    return f"({tag} {prefix}{phi.var} {show(phi.body)})"


def show_sequent(s) -> str:
    return "(seq (" + " ".join(show(f) for f in s.antecedent) + ") " + show(s.succedent) + ")"


def pretty(phi) -> str:
    """Human-oriented rendering used in reports."""
    if isinstance(phi, Eq):
        return f"{show_term(phi.left)} = {show_term(phi.right)}"
    if isinstance(phi, Bot):
        return "⊥"
    if isinstance(phi, And):
        return f"({pretty(phi.left)} ∧ {pretty(phi.right)})"
    if isinstance(phi, Imp):
        if isinstance(phi.right, Bot):
            return f"¬{pretty(phi.left)}"
        return f"({pretty(phi.left)} → {pretty(phi.right)})"
    q = "∀" if phi.kind == "forall" else "∃"
    prefix = "x" if phi.sort == "n" else "α"
    return f"{q}{prefix}{phi.var} {pretty(phi.body)}"
