from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

import gen
from elzero import axioms as AX
from elzero import build as B
from elzero.affinize import affinize
from elzero.calculus import (
    EL0, EL0_MP, SystemId, axiom_schema, check_free_cut_free, check_proof, cut_formula,
    is_axiom,
)
from elzero.corpus import CORPUS, SYSTEMS, P, Q, get_entry
from elzero.normalize import hoist_cuts, normalize, prune_weakened_cuts
from elzero.semantics import bounded_truth, random_valuation
from elzero.syntax import (
    And, Eq, ExistsN, FunApp, FunVar, Imp, NumVar, PrimApp, ZERO, is_quantifier_free, neg,
)

x = NumVar


def a(i, t):
    return FunApp(FunVar(i), t)


# ---------------------------------------------------------------- checking


@pytest.mark.parametrize("entry", CORPUS, ids=lambda e: e.name)
def test_corpus_matrix(entry):
    proof = entry.build()
    for name in SYSTEMS:
        result = check_proof(proof, SystemId.parse(name))
        assert result.accepted == entry.expect[name], (name, result)


def test_identity_accepted_everywhere():
    p = B.ident(Eq(x(1), x(1)))
    for name in SYSTEMS + ("iqc", "el0a+mp", "el0-exa+mp"):
        assert check_proof(p, SystemId.parse(name)).accepted


def test_exists_alpha_contraction_rejected_only_when_restricted():
    p = get_entry("illegal-contraction").build()
    bad = check_proof(p, SystemId.parse("el0-exa"))
    assert not bad.accepted and bad.rule == "C" and bad.node == "root"
    assert check_proof(p, EL0).accepted


def test_eigenvariable_free_in_context_rejected():
    res = check_proof(get_entry("eigen-violation").build(), EL0)
    assert not res.accepted and res.rule == "ForallNR"


def test_negation_left_needs_bot_succedent():
    res = check_proof(get_entry("neg-left-violation").build(), EL0)
    assert not res.accepted and res.rule == "ImpL"


def test_unknown_system_name():
    with pytest.raises(ValueError):
        SystemId.parse("el1")


def test_monotone_in_permissiveness():
    for entry in CORPUS:
        p = entry.build()
        ok = {n: check_proof(p, SystemId.parse(n)).accepted for n in SYSTEMS}
        if ok["el0-exa"]:
            assert ok["el0"], entry.name
        if ok["el0"]:
            assert ok["el0+mp"], entry.name


# ------------------------------------------------------------------ axioms


def test_markov_axiom_needs_markov():
    phi = Imp(neg(neg(ExistsN(1, Eq(x(1), ZERO)))), ExistsN(2, Eq(x(2), ZERO)))
    assert is_axiom(phi, EL0_MP)
    assert not is_axiom(phi, EL0)


def test_qf_ia_with_function_parameter():
    phi = AX.qf_ia(Eq(a(1, x(9)), ZERO), 9, 5, 6)
    assert axiom_schema(phi, EL0) == "qf-ia"


def test_qf_ac_rejects_quantified_matrix():
    B_ = ExistsN(20, Eq(x(20), PrimApp("add", (x(1), x(2)))))
    assert not is_axiom(AX.qf_ac(B_, 1, 2, 3, 4), EL0_MP)
    assert is_axiom(AX.qf_ac(Eq(x(2), x(1)), 1, 2, 3, 4), EL0)


def test_iqc_has_no_axioms():
    assert not is_axiom(AX.refl(ZERO), SystemId.parse("iqc"))


def _qf(g: gen.Gen, nums):
    while True:
        phi = g.formula(2, nums=nums, funs=(1,), fun_quants=False, term_depth=1)
        if is_quantifier_free(phi):
            return phi


def _qf_ac_holds(phi, sigma, bound):
    """Least-witness check of a choice instance: premise true at the bound implies the matrix for the table."""
    body = phi.left.body  # exists d B(c, d)
    c, d, Bcd = phi.left.var, body.var, body.body
    table = []
    for v in range(bound + 1):
        s = sigma.with_num(c, v)
        w = next((u for u in range(bound + 1) if bounded_truth(Bcd, s.with_num(d, u), bound)), None)
        if w is None:
            return True  # premise fails within the bound
        table.append(w)
    return all(bounded_truth(Bcd, sigma.with_num(c, v).with_num(d, w), bound) for v, w in enumerate(table))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_axiom_soundness_smoke(seed):
    g = gen.gen(seed, first_binder=30)
    rng = random.Random(seed)
    t, s = g.num_term(2, funs=(1,)), g.num_term(2, funs=(1,))
    instances = [
        AX.refl(t), AX.sym(t, s), AX.trans(t, s, g.num_term(1, funs=(1,))), AX.cong_succ(t, s),
        AX.sa(t, s), AX.con(25, PrimApp("add", (x(25), t)), s),
        AX.rec(t, FunVar(1), s),
        AX.qf_ia(_qf(g, (1, 9)), 9, 26, 27),
        AX.mp(_qf(g, (1, 20)), 20, 21),
    ]
    ac = AX.qf_ac(_qf(g, (22, 23)), 22, 23, 5, 24)
    bound = 8
    for phi in instances + [ac]:
        assert is_axiom(phi, EL0_MP), phi
    for _ in range(5):
        sigma = random_valuation(rng, [1], [1, 2, 3], bound)
        for phi in instances:
            assert bounded_truth(phi, sigma, bound), phi
        assert _qf_ac_holds(ac, sigma, bound)


# ------------------------------------------------------------- free cuts


def _qfac():
    return AX.qf_ac(Eq(x(2), x(1)), 1, 2, 3, 4)


def test_cut_on_axiom_is_free_cut_free():
    phi = _qfac()
    p = B.cut(B.axiom(phi), B.weaken(B.ident(Eq(x(9), ZERO)), phi))
    assert check_free_cut_free(p)


def test_cut_on_non_axiom_conjunction():
    left = B.andr(B.ident(P), B.ident(P))
    right = B.weaken(B.ident(Q), And(P, P))
    assert not check_free_cut_free(B.cut(left, right))


def test_cut_on_thickened_induction_axiom():
    q, _ = affinize(get_entry("ia-thickening").build())
    cuts = [cut_formula(n) for _, n in q.nodes() if n.rule == "Cut"]
    assert cuts and any(axiom_schema(c, EL0_MP) is None for c in cuts)
    assert check_free_cut_free(q)


# ------------------------------------------------------------ normalizers


def _trans_tree():
    e12, e23, e13 = Eq(x(1), x(2)), Eq(x(2), x(3)), Eq(x(1), x(3))
    inner = B.impl(B.ident(e12), B.impl(B.ident(e23), B.ident(e13)))
    return AX.trans(x(1), x(2), x(3)), inner


def test_hoist_exchanges_cut_and_permutation():
    phi, inner = _trans_tree()
    p = B.cut(B.axiom(phi), B.swap(inner, 0))
    want = B.swap(B.cut(B.axiom(phi), inner), 0)
    out = hoist_cuts(p)
    assert out == want
    assert check_proof(out, EL0).accepted


def test_hoist_fixed_points():
    phi, inner = _trans_tree()
    principal = B.cut(B.axiom(phi), inner)
    assert hoist_cuts(principal) == principal
    plain = get_entry("and-commute").build()
    assert hoist_cuts(plain) == plain


def test_prune_weakened_axiom_cut():
    phi = _qfac()
    p = B.cut(B.axiom(phi), B.weaken(B.ident(P), phi))
    out = prune_weakened_cuts(p)
    assert out == B.ident(P)
    assert len(out.conclusion.antecedent) == len(p.premises[1].conclusion.antecedent) - 1


def test_prune_leaves_used_cuts():
    for name in ("sym-cut", "qf-ia-cut", "identity"):
        p = get_entry(name).build()
        assert prune_weakened_cuts(p) == p


def _is_subsequence(short, long) -> bool:
    it = iter(long)
    return all(any(f == g for g in it) for f in short)


@pytest.mark.parametrize("entry", [e for e in CORPUS if e.expect["el0+mp"]], ids=lambda e: e.name)
def test_normalizers_preserve_checking(entry):
    p = entry.build()
    sys = EL0_MP
    fcf = check_free_cut_free(p, sys)
    h = hoist_cuts(p)
    assert h.conclusion == p.conclusion
    assert check_proof(h, sys).accepted
    assert check_free_cut_free(h, sys) == fcf
    assert hoist_cuts(h) == h
    n = normalize(p)
    assert check_proof(n, sys).accepted
    assert n.conclusion.succedent == p.conclusion.succedent
    assert _is_subsequence(n.conclusion.antecedent, p.conclusion.antecedent)
