"""Bounded truth over the standard model.

Number quantifiers range over ``0..B`` together with the numbers the
valuation already mentions and the point where each of its tables turns
to the default 0.  Function quantifiers range over a fixed pool:
the valuation's own functions, the constant tables ``0..B`` and a few
seeded random tables.  Evaluation is two-valued; a computed function that
runs out of fuel raises :class:`NotConverged`, which callers report as
``Unknown``.
"""

from __future__ import annotations

import enum
import random
from functools import lru_cache

from .syntax import (
    And, Bot, Eq, ExistsF, ExistsN, FiniteTable, ForallF, ForallN, FunApp, FunVar, Imp, Lambda,
    NotConverged, NumVar, PrimApp, Rec, Succ, Valuation, eval_num_term, free_vars,
    is_quantifier_free, max_index,
)

DEFAULT_BOUND = 8
POOL_RANDOM = 4


class Ternary(enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"

    def __and__(self, other: "Ternary") -> "Ternary":
        if self is Ternary.FAILS or other is Ternary.FAILS:
            return Ternary.FAILS
        if self is Ternary.UNKNOWN or other is Ternary.UNKNOWN:
            return Ternary.UNKNOWN
        return Ternary.HOLDS

    @staticmethod
    def of(b: bool) -> "Ternary":
        return Ternary.HOLDS if b else Ternary.FAILS

    @staticmethod
    def all(items) -> "Ternary":
        out = Ternary.HOLDS
        for t in items:
            out = out & t
            if out is Ternary.FAILS:
                break
        return out


HOLDS, FAILS, UNKNOWN = Ternary.HOLDS, Ternary.FAILS, Ternary.UNKNOWN


@lru_cache(maxsize=None)
def _random_tables(bound: int) -> tuple:
    rng = random.Random(0xE10 + bound)
    return tuple(
        FiniteTable([rng.randint(0, bound) for _ in range(bound + 1)]) for _ in range(POOL_RANDOM)
    )


def number_domain(sigma: Valuation, bound: int) -> list[int]:
    """``0..bound``, the valuation's numbers, and where each of its tables turns default."""
    extra = {a for a in sigma.nums.values() if a > bound}
    extra |= {len(f.values) for f in sigma.funs.values() if isinstance(f, FiniteTable) and len(f.values) > bound}
    return list(range(bound + 1)) + sorted(extra)


def function_pool(sigma: Valuation, bound: int) -> list:
    pool = [FiniteTable([c]) if c else FiniteTable() for c in range(bound + 1)]
    pool += list(_random_tables(bound))
    seen = set()
    out = []
    for f in list(sigma.funs.values()) + pool:
        key = id(f) if not isinstance(f, FiniteTable) else ("t", hash(f), f.values)
        if key not in seen:
            seen.add(key)
            out.append(f)
    return out


def _strip_dneg(phi):
    while isinstance(phi, Imp) and phi.right == Bot() and isinstance(phi.left, Imp) and phi.left.right == Bot():
        phi = phi.left.left
    return phi


class _NoSkolem(Exception):
    pass


def _replace_app(t, beta: int, x: int, y: int):
    if isinstance(t, FunApp) and t.fun == FunVar(beta) and t.arg == NumVar(x):
        return NumVar(y)
    if isinstance(t, Succ):
        return Succ(_replace_app(t.arg, beta, x, y))
    if isinstance(t, PrimApp):
        return PrimApp(t.name, tuple(_replace_app(a, beta, x, y) for a in t.args))
    if isinstance(t, FunApp):
        return FunApp(_replace_app(t.fun, beta, x, y), _replace_app(t.arg, beta, x, y))
    if isinstance(t, (Lambda, Rec)):
        raise _NoSkolem
    return t


def _replace_in(phi, beta: int, x: int, y: int):
    if isinstance(phi, Eq):
        return Eq(_replace_app(phi.left, beta, x, y), _replace_app(phi.right, beta, x, y))
    if isinstance(phi, Bot):
        return phi
    return type(phi)(_replace_in(phi.left, beta, x, y), _replace_in(phi.right, beta, x, y))


@lru_cache(maxsize=4096)
def skolem_shape(phi):
    """For ``exists b (~~) forall x (~~) theta(x, b x)`` with ``theta`` quantifier-free: ``(x, y, theta')``.

    ``theta'`` has ``b x`` replaced by the fresh number variable ``y``; ``None`` for other shapes.
    """
    if not isinstance(phi, ExistsF):
        return None
    body = _strip_dneg(phi.body)
    if not isinstance(body, ForallN):
        return None
    theta = _strip_dneg(body.body)
    if not is_quantifier_free(theta):
        return None
    y = max_index([phi], "n") + 1
    try:
        theta2 = _replace_in(theta, phi.var, body.var, y)
    except _NoSkolem:
        return None
    if ("f", phi.var) in free_vars(theta2):
        return None
    return body.var, y, theta2


def bounded_truth(phi, sigma: Valuation, bound: int = DEFAULT_BOUND, hints=None) -> bool:
    """Truth of ``phi`` under ``sigma`` with bounded quantifiers.

    ``hints(sort, var, s)`` may propose extra existential witnesses (for
    instance a realizer's computed value); a hint that fails is skipped.
    Raises :class:`NotConverged` if a computed function diverges within fuel.
    """
    nums = number_domain(sigma, bound)
    funs = function_pool(sigma, bound)

    def go(f, s: Valuation) -> bool:
        if isinstance(f, Eq):
            return eval_num_term(f.left, s) == eval_num_term(f.right, s)
        if isinstance(f, Bot):
            return False
        if isinstance(f, And):
            return go(f.left, s) and go(f.right, s)
        if isinstance(f, Imp):
            return (not go(f.left, s)) or go(f.right, s)
        if isinstance(f, ForallN):
            return all(go(f.body, s.with_num(f.var, a)) for a in nums)
        if isinstance(f, ExistsN):
            return any(go(f.body, s.with_num(f.var, a)) for a in nums) or _hinted(f, s)
        if isinstance(f, ForallF):
            return all(go(f.body, s.with_fun(f.var, g)) for g in funs)
        if isinstance(f, ExistsF):
            return any(go(f.body, s.with_fun(f.var, g)) for g in funs) or _hinted(f, s) or _skolem(f, s)
        raise TypeError(f)

    def _skolem(f, s) -> bool:
        shape = skolem_shape(f)
        if shape is None:
            return False
        x, y, theta = shape
        table = []
        for a in nums:
            s2 = s.with_num(x, a)
            table.append(next((b for b in nums if go(theta, s2.with_num(y, b))), 0))
        g = _Skolem(dict(zip(nums, table)))
        return go(f.body, s.with_fun(f.var, g))

    def _hinted(f, s) -> bool:
        if hints is None:
            return False
        stuck = None
        for c in hints(f.sort, f.var, s):
            try:
                if go(f.body, s.with_fun(f.var, c) if f.sort == "f" else s.with_num(f.var, c)):
                    return True
            except NotConverged as exc:
                stuck = exc
        if stuck is not None:
            raise stuck
        return False

    return go(phi, sigma)


class _Skolem:
    """A least-witness choice function tabulated on the number domain, 0 elsewhere."""

    def __init__(self, table: dict):
        self.table = table

    def __call__(self, a: int) -> int:
        return self.table.get(a, 0)


def truth(phi, sigma: Valuation, bound: int = DEFAULT_BOUND, hints=None) -> Ternary:
    try:
        return Ternary.of(bounded_truth(phi, sigma, bound, hints))
    except NotConverged:
        return UNKNOWN


def closure_truth(phi, sigma: Valuation, bound: int = DEFAULT_BOUND, hints=None) -> Ternary:
    """Truth of the universal closure over the variables ``sigma`` leaves open."""
    open_vars = sorted(v for v in free_vars(phi) if v[1] not in (sigma.nums if v[0] == "n" else sigma.funs))
    body = phi
    for sort, idx in reversed(open_vars):
        body = (ForallN if sort == "n" else ForallF)(idx, body)
    return truth(body, sigma, bound, hints)


def random_valuation(rng: random.Random, fun_vars, num_vars, bound: int = DEFAULT_BOUND) -> Valuation:
    funs = {i: FiniteTable([rng.randint(0, bound) for _ in range(rng.randint(0, bound))]) for i in fun_vars}
    nums = {j: rng.randint(0, bound) for j in num_vars}
    return Valuation(funs, nums)
