"""Registry of primitive recursive function symbols.

The built-in core covers arithmetic, pairing and a small sequence
encoding.  Further symbols can be added with :func:`register`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable


@dataclass(frozen=True)
class PrimSymbol:
    name: str
    arity: int
    impl: Callable[..., int]
    # defining equations as (lhs-args, rhs) pairs over small closed inputs are
    # generated on demand; recursive schemas live in `schemas`
    schemas: tuple[str, ...] = field(default=())


def _pair(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + y


def _unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    t = w * (w + 1) // 2
    y = z - t
    return w - y, y


def _seq_len(s: int) -> int:
    return _unpair(s)[0]


def _seq_at(s: int, i: int) -> int:
    n, body = _unpair(s)
    if i >= n:
        return 0
    # body encodes the list as nested pairs, head first
    for _ in range(i):
        body = _unpair(body)[1]
    return _unpair(body)[0]


def _seq_cons(x: int, s: int) -> int:
    n, body = _unpair(s)
    return _pair(n + 1, _pair(x, body))


_REGISTRY: dict[str, PrimSymbol] = {}


def register(name: str, arity: int, impl: Callable[..., int], schemas: tuple[str, ...] = ()) -> PrimSymbol:
    if name in _REGISTRY:
        raise ValueError(f"prim symbol {name!r} already registered")
    if name in ("succ", "app", "lam", "rec", "prim"):
        raise ValueError(f"{name!r} is reserved")
    sym = PrimSymbol(name, arity, impl, schemas)
    _REGISTRY[name] = sym
    return sym


def lookup(name: str) -> PrimSymbol:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown prim symbol {name!r}") from None


def names() -> list[str]:
    return sorted(_REGISTRY)


def apply(name: str, args: list[int]) -> int:
    sym = lookup(name)
    if len(args) != sym.arity:
        raise ValueError(f"{name} expects {sym.arity} arguments, got {len(args)}")
    return sym.impl(*args)


register("add", 2, lambda x, y: x + y, ("add-zero", "add-succ"))
register("mul", 2, lambda x, y: x * y, ("mul-zero", "mul-succ"))
register("monus", 2, lambda x, y: max(x - y, 0), ("monus-zero", "monus-succ"))
register("pred", 1, lambda x: max(x - 1, 0), ("pred-zero", "pred-succ"))
register("eqc", 2, lambda x, y: int(x == y))
register("ltc", 2, lambda x, y: int(x < y))
register("sg", 1, lambda x: int(x > 0))
register("pair", 2, _pair)
register("fst", 1, lambda z: _unpair(z)[0])
register("snd", 1, lambda z: _unpair(z)[1])
register("nil", 0, lambda: 0)
register("cons", 2, _seq_cons)
register("len", 1, _seq_len)
register("at", 2, _seq_at)
