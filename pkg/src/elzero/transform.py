"""Contraction-similarity, the Kuroda negative translation and the primed map.

Affinization of proofs lives in :mod:`elzero.affinize` and is re-exported here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    And, Bot, Eq, ExistsF, ExistsN, ForallF, ForallN, Imp, Pi12Parts, _canon_term, alpha_eq,
    canonical, children, is_quant, neg, rename_term, replace_at, at_path,
)


@dataclass(frozen=True)
class SimilarityChain:
    """Thickening steps ``(path, chi)``: the subformula at ``path`` is replaced by ``chi & chi``."""

    steps: tuple = ()

    def __len__(self):
        return len(self.steps)

    def replay(self, psi):
        phi = psi
        for path, _chi in self.steps:
            sub = at_path(phi, path)
            phi = replace_at(phi, path, And(sub, sub))
        return phi


def _terms_match(s, t, env) -> bool:
    return _canon_term(rename_term(s, env), {}, [0]) == _canon_term(t, {}, [0])


def _sim(phi, psi, env) -> list | None:
    """Steps turning ``psi`` into (an alpha-variant of) ``phi``; paths relative to here."""
    if type(phi) is type(psi):
        steps = _structural(phi, psi, env)
        if steps is not None:
            return steps
    if isinstance(phi, And):
        a = _sim(phi.left, psi, env)
        if a is not None:
            b = _sim(phi.right, psi, env)
            if b is not None:
                return [((), psi)] + [((0,) + p, c) for p, c in a] + [((1,) + p, c) for p, c in b]
    return None


def _structural(phi, psi, env) -> list | None:
    if isinstance(phi, Eq):
        ok = _terms_match(phi.left, psi.left, env) and _terms_match(phi.right, psi.right, env)
        return [] if ok else None
    if isinstance(phi, Bot):
        return []
    if isinstance(phi, (And, Imp)):
        a = _sim(phi.left, psi.left, env)
        if a is None:
            return None
        b = _sim(phi.right, psi.right, env)
        if b is None:
            return None
        return [((0,) + p, c) for p, c in a] + [((1,) + p, c) for p, c in b]
    if is_quant(phi):
        env2 = dict(env)
        env2[(phi.sort, phi.var)] = (psi.sort, psi.var)
        body = _sim(phi.body, psi.body, env2)
        return None if body is None else [((0,) + p, c) for p, c in body]
    return None


def contraction_similar(phi, psi) -> SimilarityChain | None:
    """A chain from ``psi`` to ``phi`` if ``phi`` is contraction-similar to ``psi``."""
    steps = _sim(phi, psi, {})
    return None if steps is None else SimilarityChain(tuple(steps))


def binder_alignment(phi, psi) -> dict | None:
    """Map each binder of ``phi`` to the binder of ``psi`` it copies, if ``phi`` is similar to ``psi``."""
    out: dict = {}

    def go(f, g, env) -> bool:
        if type(f) is type(g) and _structural(f, g, env) is not None:
            if is_quant(f):
                out[(f.sort, f.var)] = (g.sort, g.var)
                env2 = dict(env)
                env2[(f.sort, f.var)] = (g.sort, g.var)
                return go(f.body, g.body, env2)
            if isinstance(f, (And, Imp)):
                return go(f.left, g.left, env) and go(f.right, g.right, env)
            return True
        if isinstance(f, And):
            return go(f.left, g, env) and go(f.right, g, env)
        return False

    return out if go(phi, psi, {}) else None


def collapse_once(phi):
    """Every formula obtained by collapsing one ``chi & chi'`` (alpha-equal halves) to ``chi``."""
    out = []

    def go(f, path):
        if isinstance(f, And) and alpha_eq(f.left, f.right):
            out.append(replace_at(phi, path, f.left))
        for k, c in enumerate(children(f)):
            go(c, path + (k,))

    go(phi, ())
    return out


def sigma_base(phi, markov: bool = False):
    """``(schema, base, chain)`` when ``phi`` is contraction-similar to an axiom instance."""
    from .axioms import match_axiom

    seen = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        key = canonical(f)
        if key in seen:
            continue
        seen.add(key)
        schema = match_axiom(f, markov=markov)
        if schema is not None:
            chain = contraction_similar(phi, f)
            if chain is not None:
                return schema, f, chain
        stack.extend(collapse_once(f))
    return None


def collapse(phi):
    """Fully un-thicken ``phi`` (collapse innermost duplicates until none remain)."""
    while True:
        nxt = collapse_once(phi)
        if not nxt:
            return phi
        phi = nxt[-1]


# ------------------------------------------------------------ Kuroda translation


def kuroda_star(phi):
    if isinstance(phi, (Eq, Bot)):
        return phi
    if isinstance(phi, (And, Imp)):
        return type(phi)(kuroda_star(phi.left), kuroda_star(phi.right))
    if isinstance(phi, (ExistsN, ExistsF)):
        return type(phi)(phi.var, kuroda_star(phi.body))
    if isinstance(phi, (ForallN, ForallF)):
        return type(phi)(phi.var, neg(neg(kuroda_star(phi.body))))
    raise TypeError(phi)


def kuroda(phi):
    return neg(neg(kuroda_star(phi)))


def prime_pi12(parts: Pi12Parts) -> Pi12Parts:
    """Translate the matrices of a Pi^1_2 formula, keeping its skeleton."""
    return Pi12Parts(parts.alpha, kuroda(parts.xi), parts.beta, kuroda(parts.psi))


def __getattr__(name):
    if name in ("affinize", "LinkageMap", "AffinizeError"):
        from . import affinize as _aff

        return getattr(_aff, name)
    raise AttributeError(name)
