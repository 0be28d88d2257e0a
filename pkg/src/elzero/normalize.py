"""Moving axiom cuts up to the rule that introduces the cut formula.

After :func:`hoist_cuts` the right premise of every cut ends with a rule whose
principal formula is the cut formula (or is an identity leaf).
:func:`prune_weakened_cuts` then drops cuts whose formula was only weakly
introduced.
"""

from __future__ import annotations

from . import build as B
from .calculus import ProofTree, cut_formula

LEFT_UNARY = ("AndL", "ForallNL", "ExistsNL", "ForallFL", "ExistsFL", "W", "C")


class IrreducibleCut(Exception):
    """A cut cannot pass a rule (an eigenvariable of that rule occurs in the cut's context)."""


def _place(p: ProofTree, i: int, k: int, target_len: int) -> ProofTree:
    """``p`` proves ``G_L + rest``; move the ``k``-block ``G_L`` to start at position ``i``."""
    n = len(p.conclusion.antecedent)
    assert n == target_len
    rest = list(range(k, n))
    order = rest[:i] + list(range(k)) + rest[i:]
    return B.reorder(p, order)


def _is_principal(q: ProofTree, i: int) -> bool:
    n = len(q.conclusion.antecedent)
    if q.rule in LEFT_UNARY or q.rule == "ImpL":
        return i == n - 1
    return q.rule == "I"


def push_cut(left: ProofTree, q: ProofTree, i: int) -> ProofTree:
    """A proof of ``q.ante[:i] + left.ante + q.ante[i+1:] |- q.succ``.

    The formula at position ``i`` of ``q`` must equal ``left``'s succedent.
    """
    phi = left.conclusion.succedent
    A = q.conclusion.antecedent
    assert A[i] == phi, "position does not hold the cut formula"
    k = len(left.conclusion.antecedent)
    target = len(A) - 1 + k
    if _is_principal(q, i):
        return _place(B.cut(left, B.to_last(q, i)), i, k, target)
    r = q.rule
    if r == "P":
        (s,) = q.principal
        swapped = {s: s + 1, s + 1: s}
        j = swapped.get(i, i)
        inner = push_cut(left, q.premises[0], j)
        have = []
        for idx in range(len(A)):
            have += [("G", g) for g in range(k)] if idx == j else [("A", swapped.get(idx, idx))]
        want = []
        for idx in range(len(A)):
            want += [("G", g) for g in range(k)] if idx == i else [("A", idx)]
        return B.reorder(inner, [have.index(x) for x in want])
    if r in LEFT_UNARY:
        inner = push_cut(left, q.premises[0], i)
        return _rebuild_unary(q, inner)
    if r in ("ImpL", "AndR", "Cut"):
        p1, p2 = q.premises
        n1 = len(p1.conclusion.antecedent)
        if i < n1:
            p1 = push_cut(left, p1, i)
        else:
            p2 = push_cut(left, p2, i - n1)
        if r == "ImpL":
            return B.impl(p1, p2)
        if r == "AndR":
            return B.andr(p1, p2)
        return B.cut(p1, p2)
    if r in ("ImpR", "BotRule") or r.endswith("R"):
        inner = push_cut(left, q.premises[0], i)
        return _rebuild_unary(q, inner)
    raise IrreducibleCut(f"cannot move a cut through {r}")


def _rebuild_unary(q: ProofTree, inner: ProofTree) -> ProofTree:
    r = q.rule
    c = q.conclusion
    if r == "AndL":
        return B.andl(inner)
    if r == "W":
        return B.weaken(inner, c.antecedent[-1])
    if r == "C":
        pa = q.premises[0].conclusion.antecedent
        return B.contract(inner, keep=0 if pa[-2] == c.antecedent[-1] else 1)
    if r == "ImpR":
        return B.impr(inner)
    if r == "BotRule":
        return B.bot_rule(inner, c.succedent)
    if r.endswith("L"):
        out = B.quant_left(inner, c.antecedent[-1], q.witness, q.eigen)
    else:
        out = B.quant_right(inner, c.succedent, q.witness, q.eigen)
    _eigen_ok(out)
    return out


def _eigen_ok(node: ProofTree):
    from .calculus import EL0_MP, RuleError, check_rule

    if node.rule in ("ForallNR", "ForallFR", "ExistsNL", "ExistsFL"):
        try:
            check_rule(node, EL0_MP)
        except RuleError as exc:
            raise IrreducibleCut(f"{node.rule}: {exc}") from None


def hoist_cuts(p: ProofTree) -> ProofTree:
    """Move every cut up until its right premise introduces the cut formula."""
    prem = tuple(hoist_cuts(q) for q in p.premises)
    if p.rule != "Cut":
        return p.with_premises(prem) if prem != p.premises else p
    left, right = prem
    return push_cut(left, right, len(right.conclusion.antecedent) - 1)


def prune_weakened_cuts(p: ProofTree) -> ProofTree:
    """Drop ``Cut(L, W(q))`` pairs where the weakened formula is the cut formula."""
    prem = tuple(prune_weakened_cuts(q) for q in p.premises)
    p = p.with_premises(prem) if prem != p.premises else p
    if p.rule == "Cut":
        left, right = p.premises
        if right.rule == "W" and right.principal == (len(right.conclusion.antecedent) - 1,) \
                and not left.conclusion.antecedent and right.conclusion.antecedent[-1] == cut_formula(p):
            return right.premises[0]
    return p


def normalize(p: ProofTree) -> ProofTree:
    """Hoist and prune to a fixpoint."""
    while True:
        q = prune_weakened_cuts(hoist_cuts(p))
        if q == p:
            return q
        p = q


def weak_positions(p: ProofTree) -> list:
    """Antecedent positions of ``p``'s conclusion whose formula is introduced only by weakening."""
    return [i for i in range(len(p.conclusion.antecedent)) if _origin(p, i) == "W"]


def _origin(q: ProofTree, i: int) -> str:
    r = q.rule
    n = len(q.conclusion.antecedent)
    if r in LEFT_UNARY or r == "ImpL":
        if i == n - 1:
            return r
    if r in ("I", "AxiomLeaf"):
        return r
    if r == "P":
        (s,) = q.principal
        return _origin(q.premises[0], {s: s + 1, s + 1: s}.get(i, i))
    if len(q.premises) == 2:
        n1 = len(q.premises[0].conclusion.antecedent)
        return _origin(q.premises[0], i) if i < n1 else _origin(q.premises[1], i - n1)
    return _origin(q.premises[0], i)


def drop_position(q: ProofTree, i: int) -> ProofTree:
    """Remove a weakly introduced antecedent formula (and its weakening)."""
    r = q.rule
    n = len(q.conclusion.antecedent)
    if r == "W" and i == n - 1:
        return q.premises[0]
    if r == "P":
        (s,) = q.principal
        inner = drop_position(q.premises[0], {s: s + 1, s + 1: s}.get(i, i))
        if i in (s, s + 1):
            return inner
        return B.swap(inner, s - 1 if i < s else s)
    if len(q.premises) == 2:
        p1, p2 = q.premises
        n1 = len(p1.conclusion.antecedent)
        if i < n1:
            p1 = drop_position(p1, i)
        else:
            p2 = drop_position(p2, i - n1)
        return {"ImpL": B.impl, "AndR": B.andr, "Cut": B.cut}[r](p1, p2)
    if not q.premises or ((r in LEFT_UNARY or r == "ImpL") and i == n - 1):
        raise ValueError(f"position {i} is not weakly introduced")
    return _rebuild_unary(q, drop_position(q.premises[0], i))
