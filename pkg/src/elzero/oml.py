"""A small oracle-machine language standing in for Kleene indices.

A :class:`CodeStore` maps indices ``e`` to programs with a signature
``(n, m)``: ``Phi_e(f_1..f_n, a_1..a_m)(input)``.  Evaluation is big-step
with a shared fuel counter; running out of fuel is reported as
``FuelExhausted`` and never conflated with a wrong value.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable

from . import prims
from .syntax import (
    And, Bot, Eq, FunApp, FunVar, Imp, Lambda, NotConverged, NumVar, PrimApp, Rec, Succ,
    Zero, fv, is_quantifier_free, nv,
)

DEFAULT_FUEL = int(os.environ.get("ELZERO_FUEL", 100_000))


# ------------------------------------------------------------------ programs


@dataclass(frozen=True)
class ConstNat:
    value: int


@dataclass(frozen=True)
class Local:
    """The ``k``-th innermost local; at top level local 0 is the input."""

    k: int


@dataclass(frozen=True)
class ProjNum:
    k: int


@dataclass(frozen=True)
class ProjFunQuery:
    k: int
    arg: object


@dataclass(frozen=True)
class PrimOp:
    name: str
    args: tuple


@dataclass(frozen=True)
class Apply:
    fun: object
    arg: object


@dataclass(frozen=True)
class MuSearch:
    """Least ``m`` (pushed as local 0) with ``body == 0``."""

    body: object


@dataclass(frozen=True)
class Call:
    e: int
    funs: tuple
    nums: tuple
    input: object


@dataclass(frozen=True)
class IgnoreAndReplace:
    """``inner`` with one argument slot filled lazily by ``Phi_replacement`` of the others."""

    inner: int
    sort: str  # "f" or "n"
    position: int
    replacement: int


@dataclass(frozen=True)
class FunArg:
    k: int


@dataclass(frozen=True)
class FunLambda:
    body: object


@dataclass(frozen=True)
class FunRec:
    base: object
    step: object


@dataclass(frozen=True)
class FunCall:
    e: int
    funs: tuple
    nums: tuple


PROGRAMS = (ConstNat, Local, ProjNum, ProjFunQuery, PrimOp, Apply, MuSearch, Call, IgnoreAndReplace)
FUNEXPRS = (FunArg, FunLambda, FunRec, FunCall)


@dataclass(frozen=True)
class Value:
    value: int


@dataclass(frozen=True)
class FuelExhausted:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str


Outcome = object


class _OutOfFuel(Exception):
    pass


class _Stuck(Exception):
    pass


class Fuel:
    __slots__ = ("left", "used")

    def __init__(self, amount: int):
        self.left = amount
        self.used = 0

    def tick(self, n: int = 1):
        self.left -= n
        self.used += n
        if self.left < 0:
            raise _OutOfFuel


# ------------------------------------------------------------------ store


class CodeStore:
    """Append-only table ``e -> (program, (n, m))``.  Indices start at 1."""

    MEMO_LIMIT = 8192

    def __init__(self):
        self._codes: list = []
        self.memo: dict = {}

    def add(self, program, n: int, m: int) -> int:
        self._validate(program, n, m)
        self._codes.append((program, (n, m)))
        return len(self._codes)

    def __len__(self):
        return len(self._codes)

    def __contains__(self, e) -> bool:
        return isinstance(e, int) and 1 <= e <= len(self._codes)

    def get(self, e: int):
        if e not in self:
            raise KeyError(f"no code with index {e}")
        return self._codes[e - 1]

    def program(self, e: int):
        return self.get(e)[0]

    def signature(self, e: int) -> tuple:
        return self.get(e)[1]

    def items(self):
        return [(k + 1, prog, sig) for k, (prog, sig) in enumerate(self._codes)]

    def _validate(self, program, n, m):
        nxt = len(self._codes) + 1
        for node in walk(program):
            if isinstance(node, ProjNum) and not 0 <= node.k < m:
                raise ValueError(f"number slot {node.k} outside signature ({n},{m})")
            if isinstance(node, (ProjFunQuery, FunArg)) and not 0 <= node.k < n:
                raise ValueError(f"function slot {node.k} outside signature ({n},{m})")
            if isinstance(node, (Call, FunCall)):
                if node.e not in self or node.e >= nxt:
                    raise ValueError(f"reference to unknown index {node.e}")
                cn, cm = self.signature(node.e)
                if (len(node.funs), len(node.nums)) != (cn, cm):
                    raise ValueError(f"call to {node.e} with wrong arity")
            if isinstance(node, IgnoreAndReplace):
                for ref in (node.inner, node.replacement):
                    if ref not in self:
                        raise ValueError(f"reference to unknown index {ref}")
                inn, inm = self.signature(node.inner)
                want = (inn - 1, inm) if node.sort == "f" else (inn, inm - 1)
                if want != (n, m) or self.signature(node.replacement) != (n, m):
                    raise ValueError("IgnoreAndReplace signature mismatch")


def walk(node):
    yield node
    if isinstance(node, (ProjFunQuery,)):
        yield from walk(node.arg)
    elif isinstance(node, PrimOp):
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, Apply):
        yield from walk(node.fun)
        yield from walk(node.arg)
    elif isinstance(node, MuSearch):
        yield from walk(node.body)
    elif isinstance(node, Call):
        for a in node.funs + node.nums:
            yield from walk(a)
        yield from walk(node.input)
    elif isinstance(node, FunLambda):
        yield from walk(node.body)
    elif isinstance(node, FunRec):
        yield from walk(node.base)
        yield from walk(node.step)
    elif isinstance(node, FunCall):
        for a in node.funs + node.nums:
            yield from walk(a)


# ------------------------------------------------------------------ evaluation


class _Lazy:
    """A number argument computed on first use."""

    __slots__ = ("thunk", "value", "done")

    def __init__(self, thunk):
        self.thunk, self.value, self.done = thunk, None, False

    def force(self) -> int:
        if not self.done:
            self.value = self.thunk()
            self.done = True
        return self.value


def _num(x) -> int:
    return x.force() if isinstance(x, _Lazy) else x


def _query(f, a: int) -> int:
    try:
        return f(a)
    except NotConverged:
        raise _OutOfFuel from None


class _Machine:
    def __init__(self, store: CodeStore, fuel: Fuel):
        self.store = store
        self.fuel = fuel

    def run(self, e: int, funs: tuple, nums: tuple, a: int) -> int:
        prog, (n, m) = self.store.get(e)
        if len(funs) != n or len(nums) != m:
            raise _Stuck(f"index {e} expects ({n},{m}) arguments, got ({len(funs)},{len(nums)})")
        if isinstance(prog, IgnoreAndReplace):
            return self._ignore(prog, funs, nums, a)
        return self.ev(prog, funs, nums, (a,))

    def _ignore(self, prog: IgnoreAndReplace, funs, nums, a):
        r = prog.replacement
        if prog.sort == "f":
            filled = self.function(r, funs, nums)
            funs2 = funs[: prog.position] + (filled,) + funs[prog.position:]
            return self.run(prog.inner, funs2, nums, a)
        lazy = _Lazy(lambda: self.run(r, funs, nums, 0))
        nums2 = nums[: prog.position] + (lazy,) + nums[prog.position:]
        return self.run(prog.inner, funs, nums2, a)

    def function(self, e: int, funs, nums) -> Callable[[int], int]:
        cache: dict = {}

        def f(x: int) -> int:
            if x not in cache:
                cache[x] = self.run(e, funs, nums, x)
            return cache[x]

        return f

    def ev(self, p, funs, nums, loc) -> int:
        self.fuel.tick()
        if isinstance(p, ConstNat):
            return p.value
        if isinstance(p, Local):
            if p.k >= len(loc):
                raise _Stuck(f"local {p.k} out of scope")
            return loc[p.k]
        if isinstance(p, ProjNum):
            return _num(nums[p.k])
        if isinstance(p, ProjFunQuery):
            return _query(funs[p.k], self.ev(p.arg, funs, nums, loc))
        if isinstance(p, PrimOp):
            vals = [self.ev(x, funs, nums, loc) for x in p.args]
            if p.name == "succ":
                return vals[0] + 1
            return prims.apply(p.name, vals)
        if isinstance(p, Apply):
            return self.apply(p.fun, self.ev(p.arg, funs, nums, loc), funs, nums, loc)
        if isinstance(p, MuSearch):
            m = 0
            while True:
                self.fuel.tick()
                if self.ev(p.body, funs, nums, (m,) + loc) == 0:
                    return m
                m += 1
        if isinstance(p, Call):
            fs = tuple(self.fun_value(x, funs, nums, loc) for x in p.funs)
            ns = tuple(_Lazy(lambda x=x: self.ev(x, funs, nums, loc)) for x in p.nums)
            return self.run(p.e, fs, ns, self.ev(p.input, funs, nums, loc))
        if isinstance(p, IgnoreAndReplace):
            raise _Stuck("IgnoreAndReplace must be a top-level program")
        raise _Stuck(f"not a program: {p!r}")

    def apply(self, fe, a: int, funs, nums, loc) -> int:
        if isinstance(fe, FunArg):
            return _query(funs[fe.k], a)
        if isinstance(fe, FunLambda):
            return self.ev(fe.body, funs, nums, (a,) + loc)
        if isinstance(fe, FunRec):
            v = self.ev(fe.base, funs, nums, loc)
            for _ in range(a):
                self.fuel.tick()
                v = self.apply(fe.step, v, funs, nums, loc)
            return v
        if isinstance(fe, FunCall):
            fs = tuple(self.fun_value(x, funs, nums, loc) for x in fe.funs)
            ns = tuple(_Lazy(lambda x=x: self.ev(x, funs, nums, loc)) for x in fe.nums)
            return self.run(fe.e, fs, ns, a)
        raise _Stuck(f"not a function expression: {fe!r}")

    def fun_value(self, fe, funs, nums, loc) -> Callable[[int], int]:
        if isinstance(fe, FunArg):
            return funs[fe.k]
        return lambda a: self.apply(fe, a, funs, nums, loc)


def apply_functional(store: CodeStore, e: int, funs, nums, a: int, fuel: int = DEFAULT_FUEL) -> Outcome:
    """``Phi_e(funs, nums)(a)`` within ``fuel`` steps."""
    o, _ = apply_with_usage(store, e, funs, nums, a, fuel)
    return o


def apply_with_usage(store: CodeStore, e: int, funs, nums, a: int, fuel: int = DEFAULT_FUEL):
    """``(outcome, fuel used)``; memoized per store, since indices never change meaning."""
    key = (e, tuple(funs), tuple(nums), a, fuel)
    try:
        hit = store.memo.get(key)
    except TypeError:  # an unhashable argument
        return _run(store, e, funs, nums, a, fuel)
    if hit is None:
        if len(store.memo) >= store.MEMO_LIMIT:
            store.memo.clear()
        hit = store.memo[key] = _run(store, e, funs, nums, a, fuel)
    return hit


def _run(store: CodeStore, e: int, funs, nums, a: int, fuel: int):
    f = Fuel(fuel)
    try:
        return Value(_Machine(store, f).run(e, tuple(funs), tuple(nums), a)), f.used
    except _OutOfFuel:
        return FuelExhausted(), f.used
    except _Stuck as exc:
        return Stuck(str(exc)), f.used
    except (IndexError, RecursionError) as exc:
        return Stuck(f"{type(exc).__name__}: {exc}"), f.used


def apply_number(store: CodeStore, e: int, funs, nums, fuel: int = DEFAULT_FUEL) -> Outcome:
    """The number-valued reading ``Phi_e(...) = c``: evaluation at input 0."""
    return apply_functional(store, e, funs, nums, 0, fuel)


class ComputedFunction:
    """``Phi_e(funs, nums)`` as a total-looking callable; raises NotConverged when out of fuel."""

    def __init__(self, store: CodeStore, e: int, funs, nums, fuel: int = DEFAULT_FUEL):
        self.store, self.e, self.funs, self.nums, self.fuel = store, e, tuple(funs), tuple(nums), fuel
        self._cache: dict = {}

    def outcome(self, a: int) -> Outcome:
        if a not in self._cache:
            self._cache[a] = apply_functional(self.store, self.e, self.funs, self.nums, a, self.fuel)
        return self._cache[a]

    def __call__(self, a: int) -> int:
        o = self.outcome(a)
        if isinstance(o, Value):
            return o.value
        raise NotConverged(f"Phi_{self.e} at {a}: {o}")

    def __repr__(self):
        return f"ComputedFunction(e={self.e})"


def agrees_pointwise(store, e, funs, nums, target, points, fuel: int = DEFAULT_FUEL) -> Outcome:
    """``Phi_e(...) = target`` on ``points``: Value(1) agree, Value(0) mismatch, else the failure."""
    for a in points:
        o = apply_functional(store, e, funs, nums, a, fuel)
        if not isinstance(o, Value):
            return o
        if o.value != target(a):
            return Value(0)
    return Value(1)


# ------------------------------------------------------------------ minting


class UnboundTermVariable(ValueError):
    pass


def _compile_num(t, fpos: dict, npos: dict, locals_: tuple):
    if isinstance(t, NumVar):
        if t.index in locals_:
            return Local(locals_.index(t.index))
        if t.index not in npos:
            raise UnboundTermVariable(f"x{t.index} is not covered by the signature")
        return ProjNum(npos[t.index])
    if isinstance(t, Zero):
        return ConstNat(0)
    if isinstance(t, Succ):
        return PrimOp("succ", (_compile_num(t.arg, fpos, npos, locals_),))
    if isinstance(t, PrimApp):
        return PrimOp(t.name, tuple(_compile_num(a, fpos, npos, locals_) for a in t.args))
    if isinstance(t, FunApp):
        arg = _compile_num(t.arg, fpos, npos, locals_)
        if isinstance(t.fun, FunVar):
            if t.fun.index not in fpos:
                raise UnboundTermVariable(f"a{t.fun.index} is not covered by the signature")
            return ProjFunQuery(fpos[t.fun.index], arg)
        return Apply(_compile_fun(t.fun, fpos, npos, locals_), arg)
    raise TypeError(t)


def _compile_fun(tau, fpos, npos, locals_):
    if isinstance(tau, FunVar):
        if tau.index not in fpos:
            raise UnboundTermVariable(f"a{tau.index} is not covered by the signature")
        return FunArg(fpos[tau.index])
    if isinstance(tau, Lambda):
        return FunLambda(_compile_num(tau.body, fpos, npos, (tau.binder,) + locals_))
    if isinstance(tau, Rec):
        return FunRec(_compile_num(tau.base, fpos, npos, locals_), _compile_fun(tau.step, fpos, npos, locals_))
    raise TypeError(tau)


def _positions(binding) -> tuple[dict, dict, int, int]:
    fs = [i for s, i in binding if s == "f"]
    ns = [j for s, j in binding if s == "n"]
    return {i: k for k, i in enumerate(fs)}, {j: k for k, j in enumerate(ns)}, len(fs), len(ns)


def mint_term_index(store: CodeStore, term, binding) -> int:
    """Index computing ``term`` from the variables in ``binding`` (functions first, then numbers).

    A number term ignores the input; a function term is applied to it.
    """
    fpos, npos, n, m = _positions(binding)
    if isinstance(term, (FunVar, Lambda, Rec)):
        # the input sits below every lambda local; index it from the outside
        prog = Apply(_compile_fun(term, fpos, npos, ()), Local(0))
    else:
        prog = _compile_num(term, fpos, npos, ())
    return store.add(prog, n, m)


def truth_program(phi, fpos, npos, locals_):
    """A program computing 1 if the quantifier-free ``phi`` holds and 0 otherwise."""
    if isinstance(phi, Eq):
        return PrimOp("eqc", (_compile_num(phi.left, fpos, npos, locals_), _compile_num(phi.right, fpos, npos, locals_)))
    if isinstance(phi, Bot):
        return ConstNat(0)
    if isinstance(phi, And):
        return PrimOp("mul", (truth_program(phi.left, fpos, npos, locals_), truth_program(phi.right, fpos, npos, locals_)))
    if isinstance(phi, Imp):
        a = truth_program(phi.left, fpos, npos, locals_)
        b = truth_program(phi.right, fpos, npos, locals_)
        return PrimOp("sg", (PrimOp("add", (PrimOp("monus", (ConstNat(1), a)), b)),))
    raise ValueError("formula is not quantifier-free")


def mint_mu_index(store: CodeStore, psi, binding, target: int, input_var: int | None = None) -> int:
    """Index searching the least ``m`` with ``psi[x_target := m]``.

    With ``input_var`` the program reads that variable from its input, giving
    the pointwise choice function of the choice axiom.
    """
    if not is_quantifier_free(psi):
        raise ValueError("mu-search needs a quantifier-free matrix")
    fpos, npos, n, m = _positions(binding)
    # locals under the search: (m, input)
    locals_ = (target,) + ((input_var,) if input_var is not None else (-1,))
    body = PrimOp("monus", (ConstNat(1), truth_program(psi, fpos, npos, locals_)))
    return store.add(MuSearch(body), n, m)


def mint_substituted_index(store: CodeStore, e: int, slot: tuple, replacement: int) -> int:
    """``e`` with argument ``slot = (sort, position)`` filled lazily by ``Phi_replacement``."""
    sort, position = slot
    n, m = store.signature(e)
    if sort == "f" and not 0 <= position < n or sort == "n" and not 0 <= position < m:
        raise ValueError(f"slot {slot} outside signature ({n},{m})")
    want = (n - 1, m) if sort == "f" else (n, m - 1)
    if store.signature(replacement) != want:
        raise ValueError(f"replacement signature {store.signature(replacement)} != {want}")
    return store.add(IgnoreAndReplace(e, sort, position, replacement), *want)


def mint_rewired(store: CodeStore, e: int, source_binding, target_binding) -> int:
    """Index computing ``Phi_e`` while taking arguments in ``target_binding`` order.

    Variables of ``source_binding`` absent from the target are passed as 0.
    """
    fpos, npos, n, m = _positions(target_binding)
    funs, nums = [], []
    for s, i in source_binding:
        if s == "f":
            funs.append(FunArg(fpos[i]) if i in fpos else FunLambda(ConstNat(0)))
        else:
            nums.append(ProjNum(npos[i]) if i in npos else ConstNat(0))
    return store.add(Call(e, tuple(funs), tuple(nums), Local(0)), n, m)


# ------------------------------------------------------------------ analysis


def reachable_slots(store: CodeStore, e: int) -> frozenset:
    """Argument slots ``("f", k)`` / ``("n", k)`` that evaluation of ``e`` may read."""
    memo: dict = {}

    def of_index(idx: int) -> frozenset:
        if idx in memo:
            return memo[idx]
        prog, (n, m) = store.get(idx)
        if isinstance(prog, IgnoreAndReplace):
            inner = of_index(prog.inner)
            out = set()
            for s, k in inner:
                if s == prog.sort:
                    if k == prog.position:
                        out |= of_index(prog.replacement)
                        continue
                    if k > prog.position:
                        k -= 1
                out.add((s, k))
            res = frozenset(out)
        else:
            res = frozenset(of_prog(prog))
        memo[idx] = res
        return res

    def of_prog(p) -> set:
        out = set()
        if isinstance(p, ProjNum):
            out.add(("n", p.k))
        elif isinstance(p, ProjFunQuery):
            out.add(("f", p.k))
            out |= of_prog(p.arg)
        elif isinstance(p, FunArg):
            out.add(("f", p.k))
        elif isinstance(p, (Call, FunCall)):
            callee = of_index(p.e)
            for s, k in callee:
                out |= of_prog((p.funs if s == "f" else p.nums)[k])
            if isinstance(p, Call):
                out |= of_prog(p.input)
        else:
            for child in _children(p):
                out |= of_prog(child)
        return out

    return of_index(e)


def _children(p) -> tuple:
    if isinstance(p, PrimOp):
        return p.args
    if isinstance(p, Apply):
        return (p.fun, p.arg)
    if isinstance(p, MuSearch):
        return (p.body,)
    if isinstance(p, FunLambda):
        return (p.body,)
    if isinstance(p, FunRec):
        return (p.base, p.step)
    return ()


# ------------------------------------------------------------------ serialization


def show_program(p) -> str:
    if isinstance(p, ConstNat):
        return f"(const {p.value})"
    if isinstance(p, Local):
        return f"(local {p.k})"
    if isinstance(p, ProjNum):
        return f"(num {p.k})"
    if isinstance(p, ProjFunQuery):
        return f"(query {p.k} {show_program(p.arg)})"
    if isinstance(p, PrimOp):
        return "(op " + " ".join([p.name] + [show_program(a) for a in p.args]) + ")"
    if isinstance(p, Apply):
        return f"(apply {show_program(p.fun)} {show_program(p.arg)})"
    if isinstance(p, MuSearch):
        return f"(mu {show_program(p.body)})"
    if isinstance(p, Call):
        return (f"(call {p.e} (" + " ".join(map(show_program, p.funs)) + ") ("
                + " ".join(map(show_program, p.nums)) + f") {show_program(p.input)})")
    if isinstance(p, IgnoreAndReplace):
        return f"(replace {p.inner} {p.sort} {p.position} {p.replacement})"
    if isinstance(p, FunArg):
        return f"(arg {p.k})"
    if isinstance(p, FunLambda):
        return f"(lam {show_program(p.body)})"
    if isinstance(p, FunRec):
        return f"(rec {show_program(p.base)} {show_program(p.step)})"
    if isinstance(p, FunCall):
        return (f"(fcall {p.e} (" + " ".join(map(show_program, p.funs)) + ") ("
                + " ".join(map(show_program, p.nums)) + "))")
    raise TypeError(p)


def read_program(e):
    from .sexpr import Atom, ParseError, head

    h = head(e)
    it = e.items if h else ()
    ints = lambda k: int(it[k].text)  # noqa: E731
    if h == "const":
        return ConstNat(ints(1))
    if h == "local":
        return Local(ints(1))
    if h == "num":
        return ProjNum(ints(1))
    if h == "query":
        return ProjFunQuery(ints(1), read_program(it[2]))
    if h == "op":
        return PrimOp(it[1].text, tuple(read_program(x) for x in it[2:]))
    if h == "apply":
        return Apply(read_program(it[1]), read_program(it[2]))
    if h == "mu":
        return MuSearch(read_program(it[1]))
    if h == "call":
        return Call(ints(1), tuple(read_program(x) for x in it[2].items),
                    tuple(read_program(x) for x in it[3].items), read_program(it[4]))
    if h == "replace":
        return IgnoreAndReplace(ints(1), it[2].text, ints(3), ints(4))
    if h == "arg":
        return FunArg(ints(1))
    if h == "lam":
        return FunLambda(read_program(it[1]))
    if h == "rec":
        return FunRec(read_program(it[1]), read_program(it[2]))
    if h == "fcall":
        return FunCall(ints(1), tuple(read_program(x) for x in it[2].items),
                       tuple(read_program(x) for x in it[3].items))
    raise ParseError(f"bad program {h!r}", getattr(e, "pos", None))


def dump_store(store: CodeStore) -> str:
    return "".join(f"(code {e} (sig {n} {m}) {show_program(p)})\n" for e, p, (n, m) in store.items())


def load_store(text: str) -> CodeStore:
    from .sexpr import ParseError, head, read_all

    store = CodeStore()
    for rec in read_all(text):
        if head(rec) != "code":
            raise ParseError("expected (code e (sig n m) program)", rec.pos)
        e = int(rec.items[1].text)
        sig = rec.items[2]
        n, m = int(sig.items[1].text), int(sig.items[2].text)
        got = store.add(read_program(rec.items[3]), n, m)
        if got != e:
            raise ParseError(f"store records must be numbered consecutively (expected {got}, got {e})", rec.pos)
    return store
