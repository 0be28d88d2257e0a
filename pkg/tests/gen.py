"""Seeded random generators for terms and formulas.

Every generator takes a ``random.Random`` so hypothesis can drive it through a
seed and shrink on failure.  Binders are drawn from a shared counter, which
keeps bound indices globally unique and disjoint from the free ones.
"""

from __future__ import annotations

import itertools
import random

from elzero.syntax import (
    BOT, And, Eq, ExistsF, ExistsN, ForallF, ForallN, FunApp, FunVar, Imp, Lambda,
    NumVar, PrimApp, Rec, Succ, ZERO, num,
)

FREE_NUMS = (1, 2, 3)
FREE_FUNS = (1, 2)
SMALL_PRIMS = (("add", 2), ("monus", 2), ("pred", 1), ("sg", 1), ("mul", 2))


class Gen:
    def __init__(self, rng: random.Random, first_binder: int = 10):
        self.rng = rng
        self._next = itertools.count(first_binder)

    def fresh(self) -> int:
        return next(self._next)

    def num_term(self, depth: int, nums=FREE_NUMS, funs=FREE_FUNS):
        r = self.rng
        if depth <= 0 or r.random() < 0.25:
            pick = r.randrange(3)
            if pick == 0 and nums:
                return NumVar(r.choice(nums))
            return num(r.randrange(3))
        kind = r.choice(("succ", "prim", "app", "app"))
        if kind == "succ":
            return Succ(self.num_term(depth - 1, nums, funs))
        if kind == "prim":
            name, arity = r.choice(SMALL_PRIMS)
            return PrimApp(name, tuple(self.num_term(depth - 1, nums, funs) for _ in range(arity)))
        fun = self.fun_term(depth - 1, nums, funs)
        if isinstance(fun, Rec):
            # keep iteration counts small
            return FunApp(fun, num(r.randrange(4)))
        return FunApp(fun, self.num_term(depth - 1, nums, funs))

    def fun_term(self, depth: int, nums=FREE_NUMS, funs=FREE_FUNS):
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            if funs:
                return FunVar(r.choice(funs))
            b = self.fresh()
            return Lambda(b, Succ(NumVar(b)))
        if r.random() < 0.6:
            b = self.fresh()
            return Lambda(b, self.num_term(depth - 1, nums + (b,), funs))
        return Rec(self.num_term(depth - 1, nums, funs), self.fun_term(depth - 1, nums, funs))

    def atom(self, nums=FREE_NUMS, funs=FREE_FUNS, term_depth: int = 2):
        if self.rng.random() < 0.15:
            return BOT
        return Eq(self.num_term(term_depth, nums, funs), self.num_term(term_depth, nums, funs))

    def formula(self, depth: int, nums=FREE_NUMS, funs=FREE_FUNS, fun_quants: bool = True,
                term_depth: int = 2):
        r = self.rng
        if depth <= 0 or r.random() < 0.2:
            return self.atom(nums, funs, term_depth)
        choices = ["and", "imp", "not", "alln", "exn"] + (["allf", "exf"] if fun_quants else [])
        kind = r.choice(choices)
        sub = lambda n=nums, f=funs: self.formula(depth - 1, n, f, fun_quants, term_depth)
        if kind == "and":
            return And(sub(), sub())
        if kind == "imp":
            return Imp(sub(), sub())
        if kind == "not":
            return Imp(sub(), BOT)
        b = self.fresh()
        if kind in ("alln", "exn"):
            cls = ForallN if kind == "alln" else ExistsN
            return cls(b, sub(nums + (b,), funs))
        cls = ForallF if kind == "allf" else ExistsF
        return cls(b, sub(nums, funs + (b,)))


def gen(seed: int, first_binder: int = 10) -> Gen:
    return Gen(random.Random(seed), first_binder)


def formula(seed: int, depth: int = 4, **kw):
    return gen(seed).formula(depth, **kw)


def num_term(seed: int, depth: int = 6):
    return gen(seed).num_term(depth)


def seeds(n: int, base: int = 0):
    return range(base, base + n)
