"""Terms and formulas of the two-sorted language.

Variables are globally indexed.  A variable is identified by a pair
``(sort, index)`` where sort is ``"n"`` for numbers and ``"f"`` for
functions; see :func:`nv` and :func:`fv`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Union

from . import prims

Var = tuple  # ("n", j) or ("f", i)


def nv(j: int) -> Var:
    return ("n", j)


def fv(i: int) -> Var:
    return ("f", i)


class SyntaxError_(ValueError):
    """Malformed term or formula."""


class CaptureError(ValueError):
    pass


class NotConverged(Exception):
    """Raised when a computed function runs out of fuel at some point."""


# ---------------------------------------------------------------- number terms


@dataclass(frozen=True)
class NumVar:
    index: int


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Succ:
    arg: "NumTerm"


@dataclass(frozen=True)
class PrimApp:
    name: str
    args: tuple

    def __post_init__(self):
        sym = prims.lookup(self.name)
        if sym.arity != len(self.args):
            raise SyntaxError_(f"{self.name} has arity {sym.arity}, got {len(self.args)} arguments")


@dataclass(frozen=True)
class FunApp:
    fun: "FunTerm"
    arg: "NumTerm"


# -------------------------------------------------------------- function terms


@dataclass(frozen=True)
class FunVar:
    index: int


@dataclass(frozen=True)
class Lambda:
    binder: int
    body: "NumTerm"


@dataclass(frozen=True)
class Rec:
    base: "NumTerm"
    step: "FunTerm"


NumTerm = Union[NumVar, Zero, Succ, PrimApp, FunApp]
FunTerm = Union[FunVar, Lambda, Rec]
NUM_TERMS = (NumVar, Zero, Succ, PrimApp, FunApp)
FUN_TERMS = (FunVar, Lambda, Rec)

# -------------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Eq:
    left: NumTerm
    right: NumTerm


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ExistsN:
    var: int
    body: "Formula"
    sort = "n"
    kind = "exists"


@dataclass(frozen=True)
class ForallN:
    var: int
    body: "Formula"
    sort = "n"
    kind = "forall"


@dataclass(frozen=True)
class ExistsF:
    var: int
    body: "Formula"
    sort = "f"
    kind = "exists"


@dataclass(frozen=True)
class ForallF:
    var: int
    body: "Formula"
    sort = "f"
    kind = "forall"


Formula = Union[Eq, Bot, And, Imp, ExistsN, ForallN, ExistsF, ForallF]
QUANTIFIERS = (ExistsN, ForallN, ExistsF, ForallF)
BINARY = (And, Imp)
_QUANT_BY = {("n", "exists"): ExistsN, ("n", "forall"): ForallN,
             ("f", "exists"): ExistsF, ("f", "forall"): ForallF}


def quantifier(sort: str, kind: str, var: int, body: Formula) -> Formula:
    return _QUANT_BY[(sort, kind)](var, body)


def is_quant(phi) -> bool:
    return isinstance(phi, QUANTIFIERS)


def bound_var(phi) -> Var:
    return (phi.sort, phi.var)


BOT = Bot()
ZERO = Zero()


def neg(phi: Formula) -> Formula:
    return Imp(phi, BOT)


def num(k: int) -> NumTerm:
    t: NumTerm = ZERO
    for _ in range(k):
        t = Succ(t)
    return t


def is_atomic(phi: Formula) -> bool:
    # bottom counts as atomic for (I) and the bottom rule
    return isinstance(phi, (Eq, Bot))


# -------------------------------------------------------------------- traversal


def children(phi: Formula) -> tuple:
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if is_quant(phi):
        return (phi.body,)
    return ()


def with_children(phi: Formula, kids) -> Formula:
    if isinstance(phi, BINARY):
        return type(phi)(kids[0], kids[1])
    if is_quant(phi):
        return type(phi)(phi.var, kids[0])
    return phi


def subformulas(phi: Formula) -> Iterator[tuple[tuple, Formula]]:
    """Yield ``(path, subformula)`` in pre-order."""
    stack = [((), phi)]
    while stack:
        path, f = stack.pop()
        yield path, f
        kids = children(f)
        for k in reversed(range(len(kids))):
            stack.append((path + (k,), kids[k]))


def at_path(phi: Formula, path) -> Formula:
    for k in path:
        kids = children(phi)
        if k >= len(kids):
            raise IndexError(f"invalid path {path}")
        phi = kids[k]
    return phi


def replace_at(phi: Formula, path, new: Formula) -> Formula:
    if not path:
        return new
    kids = list(children(phi))
    if path[0] >= len(kids):
        raise IndexError(f"invalid path {path}")
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(phi, kids)


def size(phi: Formula) -> int:
    return sum(1 for _ in subformulas(phi))


def term_children(t) -> tuple:
    if isinstance(t, Succ):
        return (t.arg,)
    if isinstance(t, PrimApp):
        return t.args
    if isinstance(t, FunApp):
        return (t.fun, t.arg)
    if isinstance(t, Lambda):
        return (t.body,)
    if isinstance(t, Rec):
        return (t.base, t.step)
    return ()


def formula_terms(phi: Formula) -> Iterator:
    for _, f in subformulas(phi):
        if isinstance(f, Eq):
            yield f.left
            yield f.right


# ------------------------------------------------------------------- variables


def term_free_vars(t) -> frozenset:
    if isinstance(t, NumVar):
        return frozenset({nv(t.index)})
    if isinstance(t, FunVar):
        return frozenset({fv(t.index)})
    if isinstance(t, Lambda):
        return term_free_vars(t.body) - {nv(t.binder)}
    out: frozenset = frozenset()
    for c in term_children(t):
        out |= term_free_vars(c)
    return out


def free_vars(phi) -> frozenset:
    if isinstance(phi, NUM_TERMS + FUN_TERMS):
        return term_free_vars(phi)
    if isinstance(phi, Eq):
        return term_free_vars(phi.left) | term_free_vars(phi.right)
    if isinstance(phi, Bot):
        return frozenset()
    if isinstance(phi, BINARY):
        return free_vars(phi.left) | free_vars(phi.right)
    return free_vars(phi.body) - {bound_var(phi)}


def binders(phi: Formula) -> list:
    """Quantifier-bound variables in pre-order (repeats kept)."""
    return [bound_var(f) for _, f in subformulas(phi) if is_quant(f)]


def lambda_binders(phi) -> list:
    out = []

    def walk(t):
        if isinstance(t, Lambda):
            out.append(nv(t.binder))
        for c in term_children(t):
            walk(c)

    for t in (formula_terms(phi) if not isinstance(phi, NUM_TERMS + FUN_TERMS) else [phi]):
        walk(t)
    return out


def all_vars(phi) -> frozenset:
    return free_vars(phi) | frozenset(binders(phi)) | frozenset(lambda_binders(phi))


def max_index(objs, sort: str | None = None) -> int:
    m = 0
    for o in objs:
        for s, i in all_vars(o):
            if sort is None or s == sort:
                m = max(m, i)
    return m


# ---------------------------------------------------------------- substitution


def subst_term(t, var: Var, repl):
    """Substitute ``repl`` for the free variable ``var`` in term ``t``."""
    sort, idx = var
    if isinstance(t, NumVar):
        return repl if sort == "n" and t.index == idx else t
    if isinstance(t, FunVar):
        return repl if sort == "f" and t.index == idx else t
    if isinstance(t, Zero):
        return t
    if isinstance(t, Succ):
        return Succ(subst_term(t.arg, var, repl))
    if isinstance(t, PrimApp):
        return PrimApp(t.name, tuple(subst_term(a, var, repl) for a in t.args))
    if isinstance(t, FunApp):
        return FunApp(subst_term(t.fun, var, repl), subst_term(t.arg, var, repl))
    if isinstance(t, Lambda):
        if var == nv(t.binder):
            return t
        if nv(t.binder) in term_free_vars(repl) and var in term_free_vars(t.body):
            raise CaptureError(f"substitution captured by lambda binder x{t.binder}")
        return Lambda(t.binder, subst_term(t.body, var, repl))
    if isinstance(t, Rec):
        return Rec(subst_term(t.base, var, repl), subst_term(t.step, var, repl))
    raise TypeError(t)


def subst(phi: Formula, var: Var, repl) -> Formula:
    """``phi[var := repl]`` on free occurrences; raises on capture."""
    if var[0] == "n" and not isinstance(repl, NUM_TERMS):
        raise TypeError("number variable needs a number term")
    if var[0] == "f" and not isinstance(repl, FUN_TERMS):
        raise TypeError("function variable needs a function term")
    rfree = term_free_vars(repl)

    def go(f):
        if isinstance(f, Eq):
            return Eq(subst_term(f.left, var, repl), subst_term(f.right, var, repl))
        if isinstance(f, Bot):
            return f
        if isinstance(f, BINARY):
            return type(f)(go(f.left), go(f.right))
        b = bound_var(f)
        if b == var:
            return f
        if b in rfree and var in free_vars(f.body):
            raise CaptureError(f"substitution captured by binder {b}")
        return type(f)(f.var, go(f.body))

    return go(phi)


def rename_term(t, mapping: Mapping):
    if isinstance(t, NumVar):
        return NumVar(mapping.get(nv(t.index), nv(t.index))[1])
    if isinstance(t, FunVar):
        return FunVar(mapping.get(fv(t.index), fv(t.index))[1])
    if isinstance(t, Zero):
        return t
    if isinstance(t, Succ):
        return Succ(rename_term(t.arg, mapping))
    if isinstance(t, PrimApp):
        return PrimApp(t.name, tuple(rename_term(a, mapping) for a in t.args))
    if isinstance(t, FunApp):
        return FunApp(rename_term(t.fun, mapping), rename_term(t.arg, mapping))
    if isinstance(t, Lambda):
        return Lambda(mapping.get(nv(t.binder), nv(t.binder))[1], rename_term(t.body, mapping))
    if isinstance(t, Rec):
        return Rec(rename_term(t.base, mapping), rename_term(t.step, mapping))
    raise TypeError(t)


def rename(phi: Formula, mapping: Mapping) -> Formula:
    """Rename every occurrence (free, bound, binder) of variables in ``mapping``."""
    if isinstance(phi, Eq):
        return Eq(rename_term(phi.left, mapping), rename_term(phi.right, mapping))
    if isinstance(phi, Bot):
        return phi
    if isinstance(phi, BINARY):
        return type(phi)(rename(phi.left, mapping), rename(phi.right, mapping))
    b = bound_var(phi)
    return type(phi)(mapping.get(b, b)[1], rename(phi.body, mapping))


def canonical(phi: Formula) -> Formula:
    """Alpha-normal form: bound variables renumbered -1, -2, ... in pre-order."""
    counter = [0]

    def go(f, env):
        if isinstance(f, Eq):
            return Eq(_canon_term(f.left, env, counter), _canon_term(f.right, env, counter))
        if isinstance(f, Bot):
            return f
        if isinstance(f, BINARY):
            return type(f)(go(f.left, env), go(f.right, env))
        counter[0] += 1
        new = -counter[0]
        env2 = dict(env)
        env2[bound_var(f)] = (f.sort, new)
        return type(f)(new, go(f.body, env2))

    return go(phi, {})


def _canon_term(t, env, counter):
    if isinstance(t, Lambda):
        counter[0] += 1
        env2 = dict(env)
        env2[nv(t.binder)] = nv(-counter[0])
        return Lambda(-counter[0], _canon_term(t.body, env2, counter))
    if isinstance(t, (NumVar, FunVar)):
        return rename_term(t, env)
    if isinstance(t, Zero):
        return t
    if isinstance(t, Succ):
        return Succ(_canon_term(t.arg, env, counter))
    if isinstance(t, PrimApp):
        return PrimApp(t.name, tuple(_canon_term(a, env, counter) for a in t.args))
    if isinstance(t, FunApp):
        return FunApp(_canon_term(t.fun, env, counter), _canon_term(t.arg, env, counter))
    if isinstance(t, Rec):
        return Rec(_canon_term(t.base, env, counter), _canon_term(t.step, env, counter))
    raise TypeError(t)


def alpha_eq(a: Formula, b: Formula) -> bool:
    return a == b or canonical(a) == canonical(b)


def fresh_copy(phi: Formula, counter: Callable[[str], int]) -> Formula:
    """Alpha-variant of ``phi`` whose binders come from ``counter(sort)``."""
    mapping = {}
    for b in binders(phi) + lambda_binders(phi):
        if b not in mapping:
            mapping[b] = (b[0], counter(b[0]))
    return rename(phi, mapping)


# -------------------------------------------------------------- classification


def is_quantifier_free(phi: Formula) -> bool:
    return not any(is_quant(f) for _, f in subformulas(phi))


def has_function_quantifier(phi: Formula) -> bool:
    return any(isinstance(f, (ExistsF, ForallF)) for _, f in subformulas(phi))


def has_exists_f(phi: Formula) -> bool:
    return any(isinstance(f, ExistsF) for _, f in subformulas(phi))


def is_arithmetical(phi: Formula) -> bool:
    return not has_function_quantifier(phi)


@dataclass(frozen=True)
class Pi12Parts:
    alpha: int
    xi: Formula
    beta: int
    psi: Formula

    def formula(self) -> Formula:
        return ForallF(self.alpha, Imp(self.xi, ExistsF(self.beta, self.psi)))


def classify_pi12(phi: Formula) -> Pi12Parts | None:
    if not isinstance(phi, ForallF) or not isinstance(phi.body, Imp):
        return None
    xi, rest = phi.body.left, phi.body.right
    if not isinstance(rest, ExistsF):
        return None
    if not (is_arithmetical(xi) and is_arithmetical(rest.body)):
        return None
    return Pi12Parts(phi.var, xi, rest.var, rest.body)


def quantifiers_under_negation(phi: Formula) -> list:
    """Paths of first-order quantifiers in ``phi`` NOT beneath any Imp(., Bot)."""
    bad = []

    def go(f, path, covered):
        if isinstance(f, (ExistsN, ForallN)) and not covered:
            bad.append(path)
        if isinstance(f, Imp) and isinstance(f.right, Bot):
            go(f.left, path + (0,), True)
            return
        for k, c in enumerate(children(f)):
            go(c, path + (k,), covered)

    go(phi, (), False)
    return bad


def number_negative_violations(antecedent, succedent) -> list:
    """List of (where, path) for first-order quantifiers violating number-negativity."""
    zero = classify_pi12(succedent)
    if zero is None:
        raise ValueError("succedent is not a Pi^1_2 formula")
    out = [("xi0", p) for p in quantifiers_under_negation(zero.xi)]
    for k, g in enumerate(antecedent):
        parts = classify_pi12(g)
        if parts is None:
            raise ValueError(f"antecedent formula {k} is not a Pi^1_2 formula")
        out += [(f"psi{k + 1}", p) for p in quantifiers_under_negation(parts.psi)]
    return out


def is_number_negative(antecedent, succedent) -> bool:
    return not number_negative_violations(antecedent, succedent)


def polarity_of_occurrence(phi: Formula, path) -> str:
    """``"positive"`` or ``"negative"``; flips once per left branch of Imp."""
    positive = True
    f = phi
    for k in path:
        kids = children(f)
        if k >= len(kids):
            raise IndexError(f"invalid path {path}")
        if isinstance(f, Imp) and k == 0:
            positive = not positive
        f = kids[k]
    return "positive" if positive else "negative"


def quantifier_polarities(phi: Formula, positive: bool = True) -> list:
    """(path, quantifier, polarity) for every quantifier occurrence."""
    out = []

    def go(f, path, pos):
        if is_quant(f):
            out.append((path, f, "positive" if pos else "negative"))
        for k, c in enumerate(children(f)):
            go(c, path + (k,), (not pos) if isinstance(f, Imp) and k == 0 else pos)

    go(phi, (), positive)
    return out


def elaborate_disjunction(phi: Formula, psi: Formula, fresh: int) -> Formula:
    if nv(fresh) in all_vars(phi) | all_vars(psi):
        raise ValueError(f"x{fresh} is not fresh")
    z = Eq(NumVar(fresh), ZERO)
    return ExistsN(fresh, And(Imp(z, phi), Imp(neg(z), psi)))


# ------------------------------------------------------------------ evaluation


class FiniteTable:
    """A total function given by a finite table, 0 outside it."""

    __slots__ = ("values",)

    def __init__(self, values=()):
        self.values = tuple(int(v) for v in values)

    def __call__(self, a: int) -> int:
        return self.values[a] if 0 <= a < len(self.values) else 0

    def __eq__(self, other):
        if not isinstance(other, FiniteTable):
            return NotImplemented
        n = max(len(self.values), len(other.values))
        return all(self(i) == other(i) for i in range(n))

    def __hash__(self):
        vals = list(self.values)
        while vals and vals[-1] == 0:
            vals.pop()
        return hash(tuple(vals))

    def __repr__(self):
        return f"FiniteTable({list(self.values)})"


@dataclass
class Valuation:
    funs: dict
    nums: dict

    def with_num(self, j: int, a: int) -> "Valuation":
        nums = dict(self.nums)
        nums[j] = a
        return Valuation(self.funs, nums)

    def with_fun(self, i: int, f) -> "Valuation":
        funs = dict(self.funs)
        funs[i] = f
        return Valuation(funs, self.nums)


class UnboundVariable(KeyError):
    pass


def eval_num_term(t: NumTerm, sigma: Valuation) -> int:
    if isinstance(t, NumVar):
        try:
            return sigma.nums[t.index]
        except KeyError:
            raise UnboundVariable(f"x{t.index}") from None
    if isinstance(t, Zero):
        return 0
    if isinstance(t, Succ):
        return eval_num_term(t.arg, sigma) + 1
    if isinstance(t, PrimApp):
        return prims.apply(t.name, [eval_num_term(a, sigma) for a in t.args])
    if isinstance(t, FunApp):
        return apply_fun_term(t.fun, eval_num_term(t.arg, sigma), sigma)
    raise TypeError(t)


def apply_fun_term(tau: FunTerm, a: int, sigma: Valuation) -> int:
    if isinstance(tau, FunVar):
        try:
            f = sigma.funs[tau.index]
        except KeyError:
            raise UnboundVariable(f"a{tau.index}") from None
        return f(a)
    if isinstance(tau, Lambda):
        return eval_num_term(tau.body, sigma.with_num(tau.binder, a))
    if isinstance(tau, Rec):
        # (R t tau)(0) = t, (R t tau)(S n) = tau((R t tau)(n))
        v = eval_num_term(tau.base, sigma)
        for _ in range(a):
            v = apply_fun_term(tau.step, v, sigma)
        return v
    raise TypeError(tau)


def eval_fun_term(tau: FunTerm, sigma: Valuation) -> Callable[[int], int]:
    return lambda a: apply_fun_term(tau, a, sigma)
