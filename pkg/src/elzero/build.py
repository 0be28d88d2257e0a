"""Small combinators that build proof trees bottom-up, computing conclusions.

Every helper returns a :class:`ProofTree` whose conclusion follows from its
premises by the named rule.  Nothing here checks side conditions; run
:func:`elzero.calculus.check_proof` on the result.
"""

from __future__ import annotations

from .axioms import match_axiom
from .calculus import ProofTree, Sequent
from .syntax import And, Imp, is_quant


def _seq(ante, succ) -> Sequent:
    return Sequent(tuple(ante), succ)


def ident(A) -> ProofTree:
    return ProofTree("I", _seq((A,), A))


def axiom(phi, schema: str | None = None) -> ProofTree:
    return ProofTree("AxiomLeaf", _seq((), phi), schema=schema or match_axiom(phi, markov=True))


def sigma_leaf(phi, schema: str, base, chain) -> ProofTree:
    return ProofTree("AxiomLeaf", _seq((), phi), schema=schema, base=base, chain=tuple(chain.steps))


def _last(p: ProofTree) -> tuple:
    return (len(p.conclusion.antecedent) - 1,)


def andl(p: ProofTree) -> ProofTree:
    A = p.conclusion.antecedent
    c = _seq(A[:-2] + (And(A[-2], A[-1]),), p.conclusion.succedent)
    return ProofTree("AndL", c, (p,), principal=(len(A) - 2,))


def andr(p: ProofTree, q: ProofTree) -> ProofTree:
    c = _seq(p.conclusion.antecedent + q.conclusion.antecedent, And(p.conclusion.succedent, q.conclusion.succedent))
    return ProofTree("AndR", c, (p, q))


def impl(p: ProofTree, q: ProofTree) -> ProofTree:
    """From G1 |- a and G2, b |- c conclude G1, G2, a -> b |- c."""
    B = q.conclusion.antecedent
    imp = Imp(p.conclusion.succedent, B[-1])
    A = p.conclusion.antecedent + B[:-1] + (imp,)
    return ProofTree("ImpL", _seq(A, q.conclusion.succedent), (p, q), principal=(len(A) - 1,))


def impr(p: ProofTree) -> ProofTree:
    A = p.conclusion.antecedent
    return ProofTree("ImpR", _seq(A[:-1], Imp(A[-1], p.conclusion.succedent)), (p,))


def _rule_for(Q, side: str) -> str:
    kind = "Forall" if Q.kind == "forall" else "Exists"
    return f"{kind}{'N' if Q.sort == 'n' else 'F'}{side}"


def quant_left(p: ProofTree, Q, witness=None, eigen: int | None = None) -> ProofTree:
    """Replace the last antecedent formula (an instance of ``Q``) by ``Q``."""
    assert is_quant(Q)
    A = p.conclusion.antecedent
    c = _seq(A[:-1] + (Q,), p.conclusion.succedent)
    return ProofTree(_rule_for(Q, "L"), c, (p,), principal=_last(p), witness=witness, eigen=eigen)


def quant_right(p: ProofTree, Q, witness=None, eigen: int | None = None) -> ProofTree:
    assert is_quant(Q)
    c = _seq(p.conclusion.antecedent, Q)
    return ProofTree(_rule_for(Q, "R"), c, (p,), witness=witness, eigen=eigen)


def weaken(p: ProofTree, psi) -> ProofTree:
    A = p.conclusion.antecedent + (psi,)
    return ProofTree("W", _seq(A, p.conclusion.succedent), (p,), principal=(len(A) - 1,))


def contract(p: ProofTree, keep: int = 0) -> ProofTree:
    """Contract the last two antecedent formulas, keeping copy ``keep`` (0 or 1)."""
    A = p.conclusion.antecedent
    kept = A[-2] if keep == 0 else A[-1]
    c = _seq(A[:-2] + (kept,), p.conclusion.succedent)
    return ProofTree("C", c, (p,), principal=(len(A) - 2,))


def swap(p: ProofTree, k: int) -> ProofTree:
    A = list(p.conclusion.antecedent)
    A[k], A[k + 1] = A[k + 1], A[k]
    return ProofTree("P", _seq(A, p.conclusion.succedent), (p,), principal=(k,))


def reorder(p: ProofTree, order) -> ProofTree:
    """Permute the antecedent so that new position ``n`` holds old position ``order[n]``."""
    order = list(order)
    n = len(p.conclusion.antecedent)
    assert sorted(order) == list(range(n)), order
    rank = {old: new for new, old in enumerate(order)}
    cur = list(range(n))
    changed = True
    while changed:
        changed = False
        for k in range(n - 1):
            if rank[cur[k]] > rank[cur[k + 1]]:
                cur[k], cur[k + 1] = cur[k + 1], cur[k]
                p = swap(p, k)
                changed = True
    return p


def to_last(p: ProofTree, i: int) -> ProofTree:
    n = len(p.conclusion.antecedent)
    if i < 0:
        i += n
    return reorder(p, [k for k in range(n) if k != i] + [i])


def bot_rule(p: ProofTree, A) -> ProofTree:
    return ProofTree("BotRule", _seq(p.conclusion.antecedent, A), (p,))


def cut(p: ProofTree, q: ProofTree) -> ProofTree:
    B = q.conclusion.antecedent
    c = _seq(p.conclusion.antecedent + B[:-1], q.conclusion.succedent)
    return ProofTree("Cut", c, (p, q))


def cut_axiom(q: ProofTree, position: int = -1, schema: str | None = None) -> ProofTree:
    """Cut the antecedent formula at ``position`` of ``q`` against its axiom leaf."""
    q = to_last(q, position)
    return cut(axiom(q.conclusion.antecedent[-1], schema), q)
