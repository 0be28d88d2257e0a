"""Acceptance suite: one test per criterion, summarized at the end of the run."""

from __future__ import annotations

import random
import time

import pytest

import gen
from helpers import EXTRACTABLE, extracted, pad_permutations
from test_oml import BINDING, _random_programs, tables
from elzero.affinize import affinize
from elzero.calculus import SystemId, check_proof
from elzero.corpus import CORPUS, get_entry
from elzero.oml import CodeStore, Value, apply_functional, mint_term_index
from elzero.realizability import (
    MUTATIONS, Plain, Ternary, check_monotone_universal, check_realizes, check_self_contained,
    extract_realizer, extract_strong_realizer, mutate, standard_suite,
)
from elzero.semantics import bounded_truth, random_valuation
from elzero.syntax import (
    And, Bot, Eq, ExistsF, ExistsN, ForallF, ForallN, Imp, Valuation, children, eval_num_term,
    free_vars, is_quant, neg, subformulas,
)
from elzero.transform import contraction_similar, kuroda, kuroda_star
from elzero.weihrauch import get_problem, run_affine_pipeline, run_pipeline

HOLDS, FAILS = Ternary.HOLDS, Ternary.FAILS

# pinned budgets and sample sizes
BOUND = 8
FUEL = 10**5
SYSTEMS = ("el0", "el0+mp", "el0a", "el0-exa")
MATRIX_SECONDS = 5.0
PIPELINE_SECONDS = 10.0
TRIALS = 100
SUITE = 50
PADDINGS = 5
TERMS, INPUTS, PROGRAMS = 500, 20, 1000
KURODA_FORMULAS = 500

CONTRACTING = ("double-use", "triple-use", "choice", "illegal-contraction", "legal-qf-contraction",
               "triple-conjunction", "forall-contraction", "neg-contraction", "forall-replicate",
               "ia-thickening")


def _detail(request, text):
    request.node.criterion_detail = text


@pytest.mark.criterion(1, "calculus fixture matrix")
def test_calculus_matrix(request):
    assert len(CORPUS) >= 20
    systems = [SystemId.parse(s) for s in SYSTEMS]
    t0 = time.perf_counter()
    wrong = [(e.name, s.name()) for e in CORPUS for s in systems
             if check_proof(e.build(), s).accepted is not e.expect[s.name()]]
    dt = time.perf_counter() - t0
    _detail(request, f"{len(CORPUS)}x{len(systems)} cells, {len(wrong)} wrong, {dt:.2f}s")
    assert wrong == []
    assert dt < MATRIX_SECONDS
    # the restriction cases are part of the matrix
    for name in ("illegal-contraction", "illegal-weakening", "neg-left-violation"):
        assert not all(get_entry(name).expect.values())


def _pair_equivalent(a, b, rng, n):
    fv = free_vars(a) | free_vars(b)
    funs = sorted(i for s, i in fv if s == "f")
    nums = sorted(j for s, j in fv if s == "n")
    for _ in range(n):
        sigma = random_valuation(rng, funs, nums, BOUND)
        if bounded_truth(a, sigma, BOUND) != bounded_truth(b, sigma, BOUND):
            return False
    return True


@pytest.mark.criterion(2, "affinization")
def test_affinization(request):
    affine = SystemId.parse("el0a+mp+sigma")
    for name in CONTRACTING:
        p = get_entry(name).build()
        c = sum(n.rule == "C" for _, n in p.nodes())
        assert 1 <= c <= 3, name
        q, link = affinize(p)
        assert check_proof(q, affine).accepted, name
        assert not any(n.rule == "C" for _, n in q.nodes()), name
        A_in, A_out = p.conclusion.antecedent, q.conclusion.antecedent
        assert len(link.links) == len(A_out) and link.surjective_onto(len(A_in))
        rng = random.Random(name)
        pairs = [(A_out[k], A_in[i]) for k, (i, _) in enumerate(link.links)]
        pairs.append((q.conclusion.succedent, p.conclusion.succedent))
        for k, (out, inp) in enumerate(pairs):
            chain = contraction_similar(out, inp)
            assert chain is not None, (name, k)
            if k < len(link.links):
                assert len(chain) == len(link.links[k][1]), (name, k)
            assert _pair_equivalent(out, inp, rng, SUITE), (name, k)
    _detail(request, f"{len(CONTRACTING)} proofs, B={BOUND}, {SUITE} valuations per linked pair")


@pytest.mark.criterion(3, "extraction invariants")
def test_extraction_invariants(request):
    padded_total = 0
    for entry in EXTRACTABLE:
        q, r, s = extracted(entry)
        free = set().union(*(free_vars(f) for f in s.formulas()))
        for var in r.variables():
            assert (r.entry(var) == Plain(0)) if var in free else r.level(var) > 0, (entry.name, var)
        assert check_self_contained(r), entry.name
        assert check_monotone_universal(r, s), entry.name
        for seed in range(PADDINGS):
            padded = pad_permutations(q, seed)
            if padded is None:
                break
            padded_total += 1
            again = extract_realizer(padded)
            assert (again.v, again.w) == (r.v, r.w), entry.name
    _detail(request, f"{len(EXTRACTABLE)} proofs, {padded_total} padded variants")


@pytest.mark.criterion(4, "realizer falsification")
def test_falsification(request):
    detected = applicable = 0
    for entry in EXTRACTABLE:
        q, r, s = extracted(entry)
        rep = check_realizes(r, s, standard_suite(r, s, SUITE))
        assert rep is HOLDS, entry.name
        for kind in MUTATIONS:
            m = mutate(r, s, kind)
            if m is None:
                continue
            applicable += 1
            if check_realizes(m, s, standard_suite(m, s, SUITE)) is FAILS:
                detected += 1
    _detail(request, f"{detected}/{applicable} applicable mutations detected")
    assert applicable > 0 and detected == applicable


def _timed(fn, *args):
    t0 = time.perf_counter()
    res = fn(*args, TRIALS, BOUND, FUEL)
    return res, time.perf_counter() - t0


@pytest.mark.criterion(5, "end-to-end pipelines")
def test_end_to_end(request):
    ident, choice = get_problem("id"), get_problem("choice")
    res, t1 = _timed(run_pipeline, get_entry("identity").build(), ident, ident)
    assert res.witness.n == 1 and res.report.count(HOLDS) == TRIALS
    res, t2 = _timed(run_pipeline, get_entry("double-use").build(), ident, ident)
    assert res.witness.n == 2 and len(res.witness.indices) == 3
    assert res.report.count(HOLDS) == TRIALS
    res, t3 = _timed(run_affine_pipeline, get_entry("choice").build(), choice, choice)
    assert len(res.witness.indices) == 2 and res.report.count(HOLDS) == TRIALS
    _detail(request, f"{t1:.2f}s / {t2:.2f}s / {t3:.2f}s")
    assert max(t1, t2, t3) < PIPELINE_SECONDS


@pytest.mark.criterion(6, "functional model oracle")
def test_functional_model(request):
    rng = random.Random(60)
    store = CodeStore()
    mismatches = 0
    for seed in gen.seeds(TERMS, base=6000):
        t = gen.num_term(seed, depth=4)
        e = mint_term_index(store, t, BINDING)
        for _ in range(INPUTS):
            fs, ns = tables(rng, 2), [rng.randrange(6) for _ in range(3)]
            want = eval_num_term(t, Valuation({1: fs[0], 2: fs[1]}, {1: ns[0], 2: ns[1], 3: ns[2]}))
            mismatches += apply_functional(store, e, fs, ns, 0) != Value(want)
    violations = 0
    for e in _random_programs(store, PROGRAMS, rng):
        fs, ns, a = tables(rng, 2), [rng.randrange(6) for _ in range(3)], rng.randrange(6)
        low = apply_functional(store, e, fs, ns, a, fuel=200)
        high = apply_functional(store, e, fs, ns, a, fuel=20_000)
        violations += isinstance(low, Value) and high != low
    _detail(request, f"{mismatches} mismatches on {TERMS}x{INPUTS}, {violations} fuel violations on {PROGRAMS}")
    assert mismatches == 0 and violations == 0


def _qdepth(phi) -> int:
    return (1 if is_quant(phi) else 0) + max((_qdepth(c) for c in children(phi)), default=0)


_CLAUSE = {ForallN: "Forall", ForallF: "Forall", ExistsN: "Exists", ExistsF: "Exists"}


def _kuroda_clause_holds(phi) -> bool:
    out = kuroda_star(phi)
    if isinstance(phi, (Eq, Bot)):
        return out == phi
    if isinstance(phi, (And, Imp)):
        return out == type(phi)(kuroda_star(phi.left), kuroda_star(phi.right))
    if isinstance(phi, (ExistsN, ExistsF)):
        return out == type(phi)(phi.var, kuroda_star(phi.body))
    return out == type(phi)(phi.var, neg(neg(kuroda_star(phi.body))))


@pytest.mark.criterion(7, "Kuroda translation")
def test_kuroda(request):
    clauses = set()
    counterexamples = checked = 0
    seed = 7000
    while checked < KURODA_FORMULAS:
        seed += 1
        phi = gen.formula(seed, depth=3)
        for _, sub in subformulas(phi):
            assert _kuroda_clause_holds(sub), sub
            clauses.add(_CLAUSE.get(type(sub), type(sub).__name__))
        if _qdepth(phi) > 2:
            continue
        checked += 1
        assert kuroda(phi) == neg(neg(kuroda_star(phi)))
        rng = random.Random(seed)
        sigma = random_valuation(rng, gen.FREE_FUNS, gen.FREE_NUMS, BOUND)
        counterexamples += bounded_truth(kuroda(phi), sigma, BOUND) != bounded_truth(phi, sigma, BOUND)
    _detail(request, f"clauses seen {sorted(clauses)}, {counterexamples} counterexamples on {checked}")
    assert {"Eq", "And", "Imp", "Exists", "Forall"} <= clauses
    assert counterexamples == 0


@pytest.mark.criterion(8, "affine guarantee")
def test_affine_guarantee(request):
    exa = SystemId.parse("el0-exa+mp")
    stages = {}
    for entry in CORPUS:
        p = entry.build()
        if not check_proof(p, exa).accepted or entry.problem is None:
            continue
        q = affinize(p)[0] if any(n.rule == "C" for _, n in p.nodes()) else p
        stages[entry.name] = extract_strong_realizer(q, bound=BOUND, fuel=FUEL).n
    # contracting proofs outside the fragment do reach n > 1
    assert extract_strong_realizer(affinize(get_entry("triple-use").build())[0]).n == 3
    _detail(request, ", ".join(f"{k} n={v}" for k, v in sorted(stages.items())))
    assert len(stages) >= 3
    assert all(n <= 1 for n in stages.values())
