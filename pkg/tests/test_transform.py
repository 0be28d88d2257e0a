from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import assume, given, settings, strategies as st

import gen
from elzero import build as B
from elzero.affinize import affinize
from elzero.calculus import SystemId, check_proof
from elzero.corpus import CORPUS, get_entry
from elzero.semantics import bounded_truth, random_valuation
from elzero.syntax import (
    And, Eq, ExistsF, ExistsN, ForallF, ForallN, FunApp, FunVar, Imp, NumVar, Pi12Parts,
    ZERO, alpha_eq, at_path, children, classify_pi12, fresh_copy, is_quant, neg, replace_at,
    subformulas,
)
from elzero.transform import collapse, contraction_similar, kuroda, kuroda_star, prime_pi12

SEEDS = st.integers(0, 2**32 - 1)
A = Eq(NumVar(1), ZERO)
Bf = Eq(NumVar(2), ZERO)
C = Eq(NumVar(3), ZERO)
AFFINE_SIGMA = SystemId.parse("el0a+mp+sigma")


def _a(i, t=ZERO):
    return FunApp(FunVar(i), t)


# ------------------------------------------------------- contraction-similar


def test_similar_examples():
    assert len(contraction_similar(A, A)) == 0
    assert contraction_similar(And(A, A), A).steps == (((), A),)
    one = contraction_similar(Imp(And(Bf, Bf), C), Imp(Bf, C))
    assert [p for p, _ in one.steps] == [(0,)]
    assert contraction_similar(Imp(Bf, C), Imp(And(Bf, Bf), C)) is None


def _counter(start):
    it = itertools.count(start)
    return lambda sort: next(it)


def thicken(phi, rng: random.Random, steps: int, start: int = 500):
    """Replace ``steps`` random subformulas by a conjunction with a renamed copy."""
    fresh = _counter(start)
    for _ in range(steps):
        paths = [p for p, _ in subformulas(phi)]
        path = rng.choice(paths)
        sub = at_path(phi, path)
        phi = replace_at(phi, path, And(sub, fresh_copy(sub, fresh)))
    return phi


@settings(max_examples=200, deadline=None)
@given(SEEDS, st.integers(0, 3))
def test_chain_replays_from_collapse(seed, k):
    psi = gen.formula(seed, depth=3)
    phi = thicken(psi, random.Random(seed), k)
    assert contraction_similar(phi, psi) is not None
    base = collapse(phi)
    chain = contraction_similar(phi, base)
    assert chain is not None
    assert alpha_eq(chain.replay(base), phi)


@settings(max_examples=40, deadline=None)
@given(SEEDS, st.integers(1, 2))
def test_similar_formulas_are_equivalent(seed, k):
    psi = gen.formula(seed, depth=3)
    phi = thicken(psi, random.Random(seed), k)
    rng = random.Random(seed ^ 0x5EED)
    for _ in range(3):
        sigma = random_valuation(rng, gen.FREE_FUNS, gen.FREE_NUMS, 8)
        assert bounded_truth(phi, sigma, 8) == bounded_truth(psi, sigma, 8)


# ---------------------------------------------------------------- affinize


def test_affinize_contraction_free_is_identity():
    for name in ("and-commute", "sym-cut", "double-negation"):
        p = get_entry(name).build()
        q, link = affinize(p)
        assert q == p
        assert link.table() == [(k, k, 0) for k in range(len(p.conclusion.antecedent))]


def test_affinize_merges_quantifier_free_contraction():
    P = Eq(NumVar(1), ZERO)
    q, link = affinize(get_entry("legal-qf-contraction").build())
    assert q == B.andl(B.andr(B.ident(P), B.ident(P)))
    assert link.table() == [(0, 0, 1)]


def test_affinize_links_exists_alpha_copies():
    p = get_entry("illegal-contraction").build()
    q, link = affinize(p)
    assert len(q.conclusion.antecedent) == 2
    assert all(isinstance(f, ExistsF) for f in q.conclusion.antecedent)
    assert [i for i, _ in link.links] == [0, 0]
    assert link.surjective_onto(1)
    assert check_proof(q, SystemId.parse("el0a")).accepted


AFFINIZABLE = [e for e in CORPUS if e.expect["el0+mp"]]


@pytest.mark.parametrize("entry", AFFINIZABLE, ids=lambda e: e.name)
def test_affinize_corpus(entry):
    p = entry.build()
    q, link = affinize(p)
    assert not any(n.rule == "C" for _, n in q.nodes())
    assert check_proof(q, AFFINE_SIGMA).accepted
    A_in, A_out = p.conclusion.antecedent, q.conclusion.antecedent
    assert len(link.links) == len(A_out)
    assert link.surjective_onto(len(A_in))
    for k, (i, chain) in enumerate(link.links):
        again = contraction_similar(A_out[k], A_in[i])
        assert again is not None and len(again) == len(chain)
    assert contraction_similar(q.conclusion.succedent, p.conclusion.succedent) is not None


# ------------------------------------------------------------------ Kuroda


def test_kuroda_examples():
    assert kuroda(A) == neg(neg(A))
    assert kuroda(ForallN(1, A)) == neg(neg(ForallN(1, neg(neg(A)))))
    assert kuroda(ExistsN(1, A)) == neg(neg(ExistsN(1, A)))
    assert kuroda_star(ForallF(4, A)) == ForallF(4, neg(neg(A)))


def test_kuroda_star_distributes_on_500_formulas():
    for seed in gen.seeds(500):
        phi, psi = gen.formula(seed, depth=3), gen.formula(seed + 10_000, depth=3)
        assert kuroda_star(And(phi, psi)) == And(kuroda_star(phi), kuroda_star(psi))
        assert kuroda_star(Imp(phi, psi)) == Imp(kuroda_star(phi), kuroda_star(psi))


def _qdepth(phi) -> int:
    kids = [_qdepth(c) for c in children(phi)]
    return (1 if is_quant(phi) else 0) + max(kids, default=0)


@settings(max_examples=150, deadline=None)
@given(SEEDS)
def test_kuroda_preserves_classical_truth(seed):
    phi = gen.formula(seed, depth=3)
    assume(_qdepth(phi) <= 2)
    rng = random.Random(seed)
    for _ in range(3):
        sigma = random_valuation(rng, gen.FREE_FUNS, gen.FREE_NUMS, 8)
        assert bounded_truth(kuroda(phi), sigma, 8) == bounded_truth(phi, sigma, 8)


def test_prime_pi12():
    xi, psi = Eq(_a(1), ZERO), Eq(_a(2), ZERO)
    z = Pi12Parts(1, xi, 2, psi)
    zp = prime_pi12(z)
    assert zp == Pi12Parts(1, neg(neg(xi)), 2, neg(neg(psi)))
    xi2 = ForallN(5, Eq(_a(1, NumVar(5)), ZERO))
    assert prime_pi12(Pi12Parts(1, xi2, 2, psi)).xi == neg(neg(ForallN(5, neg(neg(xi2.body)))))
    assert classify_pi12(zp.formula()) == zp
    assert classify_pi12(prime_pi12(zp).formula()) is not None
