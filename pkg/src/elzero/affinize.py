"""Removing contractions from free-cut free proofs.

Each antecedent position of the input is represented in the output by a
block of one or more formulas, each contraction-similar to it.  A
contraction on a formula without existential function quantifiers becomes
a conjunction (one AndL); on any other formula the two blocks are simply
kept side by side and declared linked.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import build as B
from .calculus import EL0, EL0_MP, ProofTree, check_free_cut_free, cut_formula
from .syntax import (
    And, Eq, Bot, Imp, FunVar, NumVar, has_exists_f, is_quant, max_index, rename, subst,
)
from .transform import SimilarityChain, contraction_similar, sigma_base


class AffinizeError(Exception):
    pass


@dataclass(frozen=True)
class LinkageMap:
    """Output antecedent position ``k`` is linked to input position ``links[k][0]``."""

    links: tuple  # ((input position, SimilarityChain), ...)
    succedent: SimilarityChain

    def surjective_onto(self, n: int) -> bool:
        return {i for i, _ in self.links} == set(range(n))

    def table(self) -> list[tuple[int, int, int]]:
        return [(k, i, len(ch)) for k, (i, ch) in enumerate(self.links)]


class _Fresh:
    def __init__(self, proof: ProofTree):
        forms = [f for _, n in proof.nodes() for f in n.conclusion.formulas()]
        self.next = {"n": max_index(forms, "n") + 1, "f": max_index(forms, "f") + 1}
        # reserve indices used by witnesses and eigenvariables too
        for _, n in proof.nodes():
            if n.eigen is not None:
                for s in "nf":
                    self.next[s] = max(self.next[s], n.eigen + 1)

    def __call__(self, sort: str) -> int:
        k = self.next[sort]
        self.next[sort] += 1
        return k


# ------------------------------------------------------------------ lifting


def _var_term(sort: str, k: int):
    return NumVar(k) if sort == "n" else FunVar(k)


def lift(M, body, var: tuple, t, new_var: int, env=None):
    """``N`` with ``N[new_var := t] == M``, following ``body``'s occurrences of ``var``.

    ``M`` must be contraction-similar to (an alpha-variant of) ``body[var := t]``.
    """
    env = dict(env or {})
    env[var] = (var[0], new_var)
    return _lift(M, body, env, (var[0], new_var), t)


def _lift(M, Bf, env, nv_, t):
    if type(M) is type(Bf):
        try:
            return _lift_same(M, Bf, env, nv_, t)
        except AffinizeError:
            if not isinstance(M, And):
                raise
    if isinstance(M, And):
        return And(_lift(M.left, Bf, env, nv_, t), _lift(M.right, Bf, env, nv_, t))
    raise AffinizeError("cannot lift formula through the rule")


def _lift_same(M, Bf, env, nv_, t):
    if isinstance(M, (Eq, Bot)):
        cand = rename(Bf, env)
        if subst(cand, nv_, t) != M:
            raise AffinizeError("atom does not match the instance")
        return cand
    if isinstance(M, (And, Imp)):
        return type(M)(_lift(M.left, Bf.left, env, nv_, t), _lift(M.right, Bf.right, env, nv_, t))
    if is_quant(M):
        env2 = dict(env)
        env2[(Bf.sort, Bf.var)] = (M.sort, M.var)
        return type(M)(M.var, _lift(M.body, Bf.body, env2, nv_, t))
    raise AffinizeError(f"unexpected formula {type(M).__name__}")


# ------------------------------------------------------------------ core


class _Affinizer:
    def __init__(self, proof: ProofTree, markov: bool):
        self.fresh = _Fresh(proof)
        self.markov = markov

    # q's antecedent is the concatenation of blocks; counts[i] = size of block i
    def run(self, p: ProofTree):
        r = p.rule
        if r in ("I", "AxiomLeaf"):
            return p, [1] * len(p.conclusion.antecedent)
        if r == "W":
            q, counts = self.run(p.premises[0])
            return B.weaken(q, p.conclusion.antecedent[-1]), counts + [1]
        if r == "P":
            q, counts = self.run(p.premises[0])
            (k,) = p.principal
            starts = _starts(counts)
            order = []
            new_counts = list(counts)
            new_counts[k], new_counts[k + 1] = counts[k + 1], counts[k]
            for blk in range(len(counts)):
                src = {k: k + 1, k + 1: k}.get(blk, blk)
                order += list(range(starts[src], starts[src] + counts[src]))
            return B.reorder(q, order), new_counts
        if r == "C":
            q, counts = self.run(p.premises[0])
            psi = p.conclusion.antecedent[-1]
            if has_exists_f(psi):
                return q, counts[:-2] + [counts[-2] + counts[-1]]
            q, counts = self.merge_last(q, counts)
            q, counts = self.merge_block(q, counts, len(counts) - 2, to_end=False)
            return B.andl(q), counts[:-2] + [1]
        if r == "AndL":
            q, counts = self.run(p.premises[0])
            q, counts = self.merge_last(q, counts)
            q, counts = self.merge_block(q, counts, len(counts) - 2, to_end=False)
            return B.andl(q), counts[:-2] + [1]
        if r == "ImpR":
            q, counts = self.run(p.premises[0])
            q, counts = self.merge_last(q, counts)
            return B.impr(q), counts[:-1]
        if r == "BotRule":
            q, counts = self.run(p.premises[0])
            return B.bot_rule(q, p.conclusion.succedent), counts
        if r == "AndR":
            (q1, c1), (q2, c2) = self.run(p.premises[0]), self.run(p.premises[1])
            return B.andr(q1, q2), c1 + c2
        if r == "ImpL":
            (q1, c1), (q2, c2) = self.run(p.premises[0]), self.run(p.premises[1])
            q2, c2 = self.merge_last(q2, c2)
            return B.impl(q1, q2), c1 + c2[:-1] + [1]
        if r.endswith("R") and r.startswith(("Forall", "Exists")):
            q, counts = self.run(p.premises[0])
            return self.quant_right(p, q), counts
        if r.startswith(("Forall", "Exists")):
            q, counts = self.run(p.premises[0])
            return self.quant_left(p, q, counts)
        if r == "Cut":
            return self.cut(p)
        raise AffinizeError(f"unsupported rule {r}")

    # -- blocks

    def merge_last(self, q, counts):
        """Fold the last block into one right-nested conjunction."""
        while counts and counts[-1] > 1:
            q = B.andl(q)
            counts = counts[:-1] + [counts[-1] - 1]
        return q, counts

    def merge_block(self, q, counts, blk: int, to_end: bool):
        if counts[blk] == 1:
            return q, counts
        starts = _starts(counts)
        n = sum(counts)
        a, b = starts[blk], starts[blk] + counts[blk]
        order = [k for k in range(n) if not a <= k < b] + list(range(a, b))
        q = B.reorder(q, order)
        moved = [c for i, c in enumerate(counts) if i != blk] + [counts[blk]]
        q, moved = self.merge_last(q, moved)
        if to_end:
            return q, moved
        # move the merged formula back to block position blk
        n2 = sum(moved)
        pos = sum(c for c in counts[:blk])
        back = list(range(pos)) + [n2 - 1] + list(range(pos, n2 - 1))
        q = B.reorder(q, back)
        return q, counts[:blk] + [1] + counts[blk + 1:]

    # -- quantifier rules

    def _lifted(self, Q, M, witness, eigen, new_var: int):
        sort = Q.sort
        if witness is not None:
            t = witness
        else:
            y = Q.var if eigen is None else eigen
            t = _var_term(sort, y)
        body = lift(M, Q.body, (sort, Q.var), t, new_var)
        return type(Q)(new_var, body)

    def quant_right(self, p, q):
        Q = p.conclusion.succedent
        M = q.conclusion.succedent
        Q2 = self._lifted(Q, M, p.witness, p.eigen, Q.var)
        return B.quant_right(q, Q2, witness=p.witness, eigen=p.eigen)

    def quant_left(self, p, q, counts):
        Q = p.conclusion.antecedent[-1]
        replicate = p.rule in ("ForallNL", "ForallFL") and counts[-1] > 1
        if not replicate:
            q, counts = self.merge_last(q, counts)
            M = q.conclusion.antecedent[-1]
            Q2 = self._lifted(Q, M, p.witness, p.eigen, Q.var)
            return B.quant_left(q, Q2, witness=p.witness, eigen=p.eigen), counts
        k = counts[-1]
        n = sum(counts)
        for j in range(k):
            pos = n - k + j
            q = B.to_last(q, pos)
            M = q.conclusion.antecedent[-1]
            new_var = Q.var if j == 0 else self.fresh(Q.sort)
            Q2 = self._lifted(Q, M, p.witness, None, new_var)
            q = B.quant_left(q, Q2, witness=p.witness)
            q = B.reorder(q, list(range(pos)) + [n - 1] + list(range(pos, n - 1)))
        return q, counts

    # -- cuts

    def cut(self, p):
        left, right = p.premises
        phi = cut_formula(p)
        ql, cl = self.run(left)
        qr, cr = self.run(right)
        k = cr[-1]
        n = sum(cr)
        copies = qr.conclusion.antecedent[n - k:]
        if k == 1 and copies[0] == ql.conclusion.succedent:
            return B.cut(ql, qr), cl + cr[:-1]
        if ql.conclusion.antecedent:
            raise AffinizeError("cut with a non-empty left context on a contracted formula")
        found = sigma_base(phi, markov=self.markov)
        if found is None:
            raise AffinizeError("cut formula is not contraction-similar to an axiom")
        schema, base, _ = found
        for _ in range(k):
            c = qr.conclusion.antecedent[-1]
            chain = contraction_similar(c, base)
            if chain is None:
                raise AffinizeError("copy of the cut formula is not similar to its axiom")
            leaf = B.sigma_leaf(c, schema, base, chain)
            qr = B.cut(leaf, qr)
        return qr, cr[:-1]


def _starts(counts) -> list:
    out, acc = [], 0
    for c in counts:
        out.append(acc)
        acc += c
    return out


def affinize(p: ProofTree, markov: bool = True) -> tuple[ProofTree, LinkageMap]:
    """An affine proof of a sequent contraction-similar to ``p``'s conclusion."""
    if not check_free_cut_free(p, EL0_MP if markov else EL0):
        raise AffinizeError("input proof is not free-cut free")
    q, counts = _Affinizer(p, markov).run(p)
    A = p.conclusion.antecedent
    links = []
    for i, c in enumerate(counts):
        for _ in range(c):
            links.append(i)
    chains = []
    for k, i in enumerate(links):
        ch = contraction_similar(q.conclusion.antecedent[k], A[i])
        if ch is None:
            raise AffinizeError(f"output position {k} is not similar to input position {i}")
        chains.append((i, ch))
    sc = contraction_similar(q.conclusion.succedent, p.conclusion.succedent)
    if sc is None:
        raise AffinizeError("succedent is not contraction-similar")
    return q, LinkageMap(tuple(chains), sc)
