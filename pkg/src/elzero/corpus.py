"""The golden corpus: small proofs with expected verdicts per system.

Every entry is built programmatically (so the files under ``corpus/`` can be
regenerated) and carries its expected ``check_proof`` verdict for EL0,
EL0+MP, the affine system and the existential-affine system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import axioms as AX
from .build import (
    andl, andr, axiom, bot_rule, contract, cut, cut_axiom, ident, impl, impr, quant_left,
    quant_right, reorder, swap, to_last, weaken,
)
from .calculus import ProofTree, SystemId
from .sexpr import parse_formula as F
from .syntax import (
    ZERO, And, Bot, Eq, ExistsF, ExistsN, ForallF, ForallN, FunApp, FunVar, Imp, NumVar, Succ,
    neg, subst,
)

SYSTEMS = ("el0", "el0+mp", "el0a", "el0-exa")


def idp(A, B) -> ProofTree:
    """``A |- B`` for alpha-variants ``A`` and ``B`` with disjoint binders."""
    if isinstance(A, (Eq, Bot)):
        assert A == B, (A, B)
        return ident(A)
    if isinstance(A, And):
        return andl(andr(idp(A.left, B.left), idp(A.right, B.right)))
    if isinstance(A, Imp):
        return impr(swap(impl(idp(B.left, A.left), idp(A.right, B.right)), 0))
    s = A.sort
    mk = NumVar if s == "n" else FunVar
    if A.kind == "forall":
        inner = idp(subst(A.body, (s, A.var), mk(B.var)), B.body)
        return quant_right(quant_left(inner, A, witness=mk(B.var)), B)
    inner = idp(A.body, subst(B.body, (s, B.var), mk(A.var)))
    return quant_left(quant_right(inner, B, witness=mk(A.var)), A)


def dneg_intro(p: ProofTree) -> ProofTree:
    """From ``G |- A`` conclude ``G |- ~~A``."""
    return impr(impl(p, ident(Bot())))


# ------------------------------------------------------------- the identity problem


def psi_id(a: int, b: int, x: int):
    """``~~ forall x ~~ (b x = a x)``."""
    return neg(neg(ForallN(x, neg(neg(Eq(FunApp(FunVar(b), NumVar(x)), FunApp(FunVar(a), NumVar(x))))))))


def zeta_id(a: int, b: int, x: int):
    return ForallF(a, Imp(Eq(ZERO, ZERO), ExistsF(b, psi_id(a, b, x))))


def _answer(src_beta: int, src_x: int, a: int = 1, b: int = 2, x: int = 6) -> ProofTree:
    """``exists b' psi(a, b') |- exists b psi(a, b)`` by passing the answer through."""
    src = ExistsF(src_beta, psi_id(a, src_beta, src_x))
    goal = ExistsF(b, psi_id(a, b, x))
    inner = idp(psi_id(a, src_beta, src_x), psi_id(a, src_beta, x))
    return quant_left(quant_right(inner, goal, witness=FunVar(src_beta)), src, eigen=src_beta)


def identity_proof() -> ProofTree:
    """``zeta_1 |- zeta_0`` for the identity problem: ask once, return the answer."""
    z1, z0 = zeta_id(3, 4, 5), zeta_id(1, 2, 6)
    p = impl(ident(Eq(ZERO, ZERO)), _answer(4, 5))
    p = quant_left(p, z1, witness=FunVar(1))
    p = impr(swap(p, 0))
    return quant_right(p, z0, eigen=1)


def identity_weakened_proof() -> ProofTree:
    """``zeta_1 |- zeta_0`` without consulting ``zeta_1``."""
    z1, z0 = zeta_id(3, 4, 5), zeta_id(1, 2, 6)
    core = dneg_intro(quant_right(dneg_intro(axiom(AX.refl(FunApp(FunVar(1), NumVar(6))))),
                                  ForallN(6, neg(neg(Eq(FunApp(FunVar(1), NumVar(6)), FunApp(FunVar(1), NumVar(6)))))),
                                  eigen=6))
    p = quant_right(core, ExistsF(2, psi_id(1, 2, 6)), witness=FunVar(1))
    p = impr(weaken(p, Eq(ZERO, ZERO)))
    p = quant_right(p, z0, eigen=1)
    return weaken(p, z1)


def double_use_proof() -> ProofTree:
    """Two linked copies of ``zeta_1`` merged by one contraction; the second answer is returned."""
    z1a, z1b, z0 = zeta_id(3, 4, 5), zeta_id(7, 8, 9), zeta_id(1, 2, 6)
    s2 = quant_left(impl(axiom(AX.refl(ZERO)), _answer(8, 9)), z1b, witness=FunVar(1))
    s1 = impl(ident(Eq(ZERO, ZERO)), weaken(s2, ExistsF(4, psi_id(1, 4, 5))))
    s1 = quant_left(s1, z1a, witness=FunVar(1))  # 0=0, z1b, z1a
    p = contract(s1, keep=0)  # 0=0, z1b
    p = impr(swap(p, 0))
    return quant_right(p, z0, eigen=1)


# ------------------------------------------------------------- the choice problem


def _E(a: int, x, y):
    """``a(x + y) = 0``."""
    from .syntax import PrimApp

    return Eq(FunApp(FunVar(a), PrimApp("add", (x, y))), ZERO)


def xi_choice(a: int, x1: int, x2: int):
    """Kuroda form of ``forall x1 exists x2 a(x1 + x2) = 0``."""
    return neg(neg(ForallN(x1, neg(neg(ExistsN(x2, _E(a, NumVar(x1), NumVar(x2))))))))


def psi_choice(a: int, b: int, x: int):
    """Kuroda form of ``forall x a(x + b(x)) = 0``."""
    return neg(neg(ForallN(x, neg(neg(_E(a, NumVar(x), FunApp(FunVar(b), NumVar(x))))))))


def zeta_choice(a: int, b: int, x1: int, x2: int, x3: int):
    return ForallF(a, Imp(xi_choice(a, x1, x2), ExistsF(b, psi_choice(a, b, x3))))


def choice_core(x1: int = 1, x2: int = 2, x3: int = 3) -> ProofTree:
    """``xi(a1) |- exists a2 psi(a1, a2)`` through Markov's principle and choice."""
    c, d, d1, d2, b, i = 10, 11, 12, 13, 14, 5
    B = _E(1, NumVar(c), NumVar(d))
    # right: exists a_i forall x_b B(b, a_i b) |- exists a2 psi
    E3 = _E(1, NumVar(x3), FunApp(FunVar(i), NumVar(x3)))
    all_b = ForallN(b, _E(1, NumVar(b), FunApp(FunVar(i), NumVar(b))))
    t = impr(impl(quant_left(ident(E3), all_b, witness=NumVar(x3)), ident(Bot())))
    t = dneg_intro(quant_right(t, ForallN(x3, neg(neg(E3))), eigen=x3))
    t = quant_right(t, ExistsF(2, psi_choice(1, 2, x3)), witness=FunVar(i))
    right = quant_left(t, ExistsF(i, all_b), eigen=i)
    # left: xi |- forall x_c exists x_d B
    Bd1 = subst(B, ("n", d), NumVar(d1))
    u = impl(idp(neg(ExistsN(d1, Bd1)), neg(ExistsN(x2, _E(1, NumVar(c), NumVar(x2))))), ident(Bot()))
    u = quant_left(u, ForallN(x1, neg(neg(ExistsN(x2, _E(1, NumVar(x1), NumVar(x2)))))), witness=NumVar(c))
    u = impr(swap(impl(impr(u), ident(Bot())), 0))
    mp_inst = AX.mp(Bd1, d1, d2)
    v = impl(u, idp(mp_inst.right, ExistsN(d, B)))
    left = quant_right(cut_axiom(v), ForallN(c, ExistsN(d, B)), eigen=c)
    return cut_axiom(impl(left, right))


def choice_plain_proof() -> ProofTree:
    """``|- zeta_0``: the choice problem is solved outright by a mu-search."""
    return quant_right(impr(choice_core()), zeta_choice(1, 2, 1, 2, 3), eigen=1)


def choice_proof() -> ProofTree:
    """``zeta_1 |- zeta_0``: the query is passed on, the answer ignored, the choice function computed."""
    z1, z0 = zeta_choice(4, 6, 21, 22, 23), zeta_choice(1, 2, 1, 2, 3)
    d = idp(xi_choice(1, 31, 32), xi_choice(1, 21, 22))
    rw = weaken(choice_core(), ExistsF(6, psi_choice(1, 6, 23)))
    s = quant_left(impl(d, rw), z1, witness=FunVar(1))  # xi', xi, z1
    s = contract(reorder(s, [2, 0, 1]), keep=1)  # z1, xi
    return quant_right(impr(s), z0, eigen=1)


def triple_use_proof() -> ProofTree:
    """Three linked copies of ``zeta_1``, two contractions; only the last answer is used."""
    z1a, z1b, z1c, z0 = zeta_id(3, 4, 5), zeta_id(7, 8, 9), zeta_id(11, 12, 13), zeta_id(1, 2, 6)
    s3 = quant_left(impl(axiom(AX.refl(ZERO)), _answer(12, 13)), z1c, witness=FunVar(1))
    s2 = impl(axiom(AX.refl(ZERO)), weaken(s3, ExistsF(8, psi_id(1, 8, 9))))
    s2 = quant_left(s2, z1b, witness=FunVar(1))  # z1c, z1b
    s1 = impl(ident(Eq(ZERO, ZERO)), weaken(s2, ExistsF(4, psi_id(1, 4, 5))))
    s1 = quant_left(s1, z1a, witness=FunVar(1))  # 0=0, z1c, z1b, z1a
    p = contract(contract(s1, keep=0), keep=0)  # 0=0, z1c
    p = impr(swap(p, 0))
    return quant_right(p, z0, eigen=1)


# ------------------------------------------------------------- small calculus fixtures

P = Eq(NumVar(1), ZERO)
Q = Eq(NumVar(2), ZERO)


def _at(a: int, t):
    """``a(t) = 1``; a constant-zero answer never satisfies it."""
    return Eq(FunApp(FunVar(a), t), Succ(ZERO))


def illegal_contraction_proof() -> ProofTree:
    """Contraction on an existential function formula."""
    p = idp(ExistsF(1, _at(1, ZERO)), ExistsF(3, _at(3, ZERO)))
    return contract(weaken(p, ExistsF(2, _at(2, ZERO))), keep=0)


def legal_qf_contraction_proof() -> ProofTree:
    return contract(andr(ident(P), ident(P)))


def triple_conjunction_proof() -> ProofTree:
    return contract(contract(andr(ident(P), andr(ident(P), ident(P)))))


def forall_contraction_proof() -> ProofTree:
    """``forall x a1 x = 0 |- a1 0 = 0 & a1 1 = 0`` by one contraction on a number quantifier."""
    one = Succ(ZERO)
    left = quant_left(ident(_at(1, ZERO)), ForallN(1, _at(1, NumVar(1))), witness=ZERO)
    right = quant_left(ident(_at(1, one)), ForallN(2, _at(1, NumVar(2))), witness=one)
    return contract(andr(left, right))


def neg_contraction_proof() -> ProofTree:
    return contract(andr(idp(neg(P), neg(P)), idp(neg(P), neg(P))))


def forall_replicate_proof() -> ProofTree:
    """Contraction on a universal function formula, instantiated twice."""
    left = quant_left(ident(_at(1, ZERO)), ForallF(5, _at(5, ZERO)), witness=FunVar(1))
    right = quant_left(ident(_at(2, ZERO)), ForallF(6, _at(6, ZERO)), witness=FunVar(2))
    return contract(andr(left, right))


def bad_copies_proof() -> ProofTree:
    """Contraction of two different formulas."""
    return contract(andr(ident(P), ident(Q)))


def illegal_weakening_proof() -> ProofTree:
    return weaken(ident(P), Q)


def legal_weakening_proof() -> ProofTree:
    return weaken(axiom(AX.refl(ZERO)), ExistsF(1, _at(1, ZERO)))


def neg_left_violation_proof() -> ProofTree:
    """Negation on the left with a succedent other than bottom."""
    return impl(ident(P), bot_rule(ident(Bot()), Q))


def ex_falso_proof() -> ProofTree:
    return bot_rule(impl(ident(P), ident(Bot())), Q)


def double_negation_proof() -> ProofTree:
    return dneg_intro(ident(P))


def and_commute_proof() -> ProofTree:
    return andl(swap(andr(ident(Q), ident(P)), 0))


def _eq(i: int, j: int):
    return Eq(NumVar(i), NumVar(j))


def sym_cut_proof() -> ProofTree:
    return cut_axiom(impl(ident(_eq(1, 2)), ident(_eq(2, 1))))


def trans_cut_proof() -> ProofTree:
    q = impl(ident(_eq(2, 3)), ident(_eq(1, 3)))
    return cut_axiom(impl(ident(_eq(1, 2)), q))


def _ia_step(x: int):
    B = _at(1, NumVar(x))
    return ForallN(x, Imp(B, subst(B, ("n", x), Succ(NumVar(x)))))


def _ia_goal(x: int):
    return ForallN(x, Imp(_at(1, ZERO), _at(1, NumVar(x))))


def _ia_use(h: int, g: int, i: int, j: int) -> ProofTree:
    """``step(h), IA(i, j) |- goal(g)``."""
    ia = AX.qf_ia(_at(1, NumVar(9)), 9, i, j)
    return impl(idp(_ia_step(h), ia.left), idp(ia.right, _ia_goal(g)))


def qf_ia_cut_proof() -> ProofTree:
    """Induction through a cut with an induction axiom."""
    return cut_axiom(_ia_use(2, 3, 5, 6))


def ia_thickening_proof() -> ProofTree:
    """Two uses of the induction axiom merged by contraction before the cut; two contractions."""
    a = andr(_ia_use(2, 3, 5, 6), _ia_use(12, 4, 15, 16))  # H1, IA1, H2, IA2
    p = contract(reorder(a, [0, 2, 1, 3]), keep=0)  # H1, H2, IA1
    return contract(cut_axiom(p), keep=0)


def eigen_violation_proof() -> ProofTree:
    return quant_right(ident(P), ForallN(2, Eq(NumVar(2), ZERO)), eigen=1)


def wrong_witness_proof() -> ProofTree:
    return quant_right(axiom(AX.refl(ZERO)), ExistsN(1, Eq(NumVar(1), ZERO)), witness=Succ(ZERO))


def exists_witness_proof() -> ProofTree:
    """``|- exists x1 x1 = S x2`` with witness ``S x2``."""
    t = Succ(NumVar(2))
    return quant_right(axiom(AX.refl(t)), ExistsN(1, Eq(NumVar(1), t)), witness=t)


def mp_alone_proof() -> ProofTree:
    """Markov's principle for ``a1 x = 0`` through a cut."""
    inst = AX.mp(_at(1, NumVar(7)), 7, 8)
    src = neg(neg(ExistsN(1, _at(1, NumVar(1)))))
    return cut_axiom(impl(idp(src, inst.left), idp(inst.right, ExistsN(2, _at(1, NumVar(2))))))


# ------------------------------------------------------------- the table


@dataclass(frozen=True)
class Entry:
    name: str
    build: Callable[[], ProofTree]
    accepts: str  # one of "+"/"-" per system in SYSTEMS order
    problem: tuple | None = None  # (problem0, chain) for the pipeline
    contractions: int = 0
    note: str = ""

    @property
    def expect(self) -> dict:
        return {s: c == "+" for s, c in zip(SYSTEMS, self.accepts)}


CORPUS = (
    Entry("identity", identity_proof, "++++", ("id", "id")),
    Entry("identity-weakened", identity_weakened_proof, "+++-", ("id", "id"),
          note="weakens a whole problem formula"),
    Entry("double-use", double_use_proof, "++--", ("id", "id"), 1),
    Entry("triple-use", triple_use_proof, "++--", ("id", "id"), 2),
    Entry("choice-plain", choice_plain_proof, "-+--", ("choice", "choice"), note="needs MP"),
    Entry("choice", choice_proof, "-+--", ("choice", "choice"), 1, note="needs MP"),
    Entry("illegal-contraction", illegal_contraction_proof, "++--", None, 1),
    Entry("legal-qf-contraction", legal_qf_contraction_proof, "++-+", None, 1),
    Entry("triple-conjunction", triple_conjunction_proof, "++-+", None, 2),
    Entry("forall-contraction", forall_contraction_proof, "++-+", None, 1),
    Entry("neg-contraction", neg_contraction_proof, "++-+", None, 1),
    Entry("forall-replicate", forall_replicate_proof, "++--", None, 1),
    Entry("ia-thickening", ia_thickening_proof, "++-+", None, 2),
    Entry("bad-copies", bad_copies_proof, "----"),
    Entry("illegal-weakening", illegal_weakening_proof, "+++-"),
    Entry("legal-weakening", legal_weakening_proof, "++++"),
    Entry("neg-left-violation", neg_left_violation_proof, "----"),
    Entry("ex-falso", ex_falso_proof, "++++"),
    Entry("double-negation", double_negation_proof, "++++"),
    Entry("and-commute", and_commute_proof, "++++"),
    Entry("sym-cut", sym_cut_proof, "++++"),
    Entry("trans-cut", trans_cut_proof, "++++"),
    Entry("qf-ia-cut", qf_ia_cut_proof, "++++"),
    Entry("eigen-violation", eigen_violation_proof, "----"),
    Entry("wrong-witness", wrong_witness_proof, "----"),
    Entry("exists-witness", exists_witness_proof, "++++"),
    Entry("mp-alone", mp_alone_proof, "-+--", note="needs MP"),
)

BY_NAME = {e.name: e for e in CORPUS}


def get_entry(name: str) -> Entry:
    try:
        return BY_NAME[name]
    except KeyError:
        raise KeyError(f"no corpus proof named {name!r}") from None


def write_corpus(directory) -> list[Path]:
    """Write every entry as ``<name>.proof`` with its expected verdicts."""
    from .proofio import write_proof

    out = []
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for e in CORPUS:
        verdicts = {s: ("accept" if ok else "reject") for s, ok in e.expect.items()}
        path = d / f"{e.name}.proof"
        path.write_text(write_proof(e.build(), None, verdicts))
        out.append(path)
    return out
