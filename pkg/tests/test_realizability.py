from __future__ import annotations

import pytest

from helpers import EXTRACTABLE, extracted, pad_permutations
from elzero import axioms as AX
from elzero import build as B
from elzero.calculus import Sequent
from elzero.corpus import get_entry
from elzero.oml import (
    CodeStore, ConstNat, Local, ProjFunQuery, apply_functional, mint_rewired,
    mint_substituted_index, mint_term_index,
)
from elzero.realizability import (
    MUTATIONS, Coded, Plain, RealizerMap, StrongRealizerError, Ternary, check_monotone_universal,
    check_realizes, check_realizes_report, check_self_contained, check_valid_at, dump_realizer,
    extract_realizer, extract_strong_realizer, load_realizer, mutate, real_check, standard_suite,
    strong_violations,
)
from elzero.syntax import (
    Eq, ExistsF, ExistsN, FiniteTable, ForallF, ForallN, FunApp, FunVar, Imp, Lambda, NumVar,
    Succ, Valuation, ZERO, free_vars,
)

HOLDS, FAILS = Ternary.HOLDS, Ternary.FAILS
x = NumVar


def _app(i, t):
    return FunApp(FunVar(i), t)


def _passthrough(store):
    return mint_term_index(store, Lambda(7, _app(1, x(7))), [("f", 1)])


# ---------------------------------------------------------------- validity


def test_all_plain_is_valid():
    r = RealizerMap({1: Plain(1), 2: Plain(2)}, {3: Plain(0)})
    sigma = Valuation({1: FiniteTable([1]), 2: FiniteTable([2])}, {3: 4})
    for var in r.variables():
        assert check_valid_at(r, sigma, var) is HOLDS


def test_coded_passthrough_validity():
    store = CodeStore()
    r = RealizerMap({1: Plain(0), 2: Coded(5, _passthrough(store))}, {}, store)
    f = FiniteTable([2, 7, 1])
    same = Valuation({1: f, 2: f}, {})
    assert check_valid_at(r, same, ("f", 2)) is HOLDS
    assert check_valid_at(r, same, ("f", 2), strong=True) is HOLDS
    other = Valuation({1: f, 2: FiniteTable([3, 7, 1])}, {})
    assert check_valid_at(r, other, ("f", 2)) is FAILS


# ------------------------------------------------------- self-containment


def test_self_contained_examples():
    assert check_self_contained(RealizerMap({1: Plain(0), 2: Plain(1)}, {}))
    store = CodeStore()
    c0 = store.add(ConstNat(4), 1, 0)
    reads_coded = store.add(ProjFunQuery(1, Local(0)), 2, 0)
    r = RealizerMap({1: Plain(0), 3: Coded(1, c0), 2: Coded(3, reads_coded)}, {}, store)
    assert not check_self_contained(r)
    # fill the coded slot from a replacement instead of reading it
    rep = store.add(ConstNat(0), 1, 0)
    ignored = mint_substituted_index(store, reads_coded, ("f", 1), rep)
    wrapped = mint_rewired(store, ignored, [("f", 1)], [("f", 1), ("f", 3)])
    r2 = RealizerMap({1: Plain(0), 3: Coded(1, c0), 2: Coded(3, wrapped)}, {}, store)
    assert check_self_contained(r2)


# --------------------------------------------------- monotone and universal


def _nested_sequent():
    body = Eq(_app(2, ZERO), _app(1, ZERO))
    return Sequent((), ForallF(1, Imp(Eq(ZERO, ZERO), ExistsF(2, body))))


def test_monotone_universal_examples():
    s = _nested_sequent()
    store = CodeStore()
    e = _passthrough(store)
    assert check_monotone_universal(RealizerMap({1: Plain(1), 2: Coded(2, e)}, {}, store), s)
    assert not check_monotone_universal(RealizerMap({1: Plain(2), 2: Coded(1, e)}, {}, store), s)
    assert not check_monotone_universal(RealizerMap({1: Coded(1, e), 2: Plain(2)}, {}, store), s)


# ------------------------------------------------------------- real+/real-


def test_real_check_atom():
    r = RealizerMap({}, {1: Plain(0)})
    sigma = Valuation({}, {1: 3})
    for sign in (True, False):
        assert real_check(r, sigma, Eq(x(1), x(1)), sign) is HOLDS


def test_real_check_positive_exists():
    phi = ExistsN(2, Eq(x(2), x(1)))
    sigma = Valuation({}, {1: 4, 2: 4})
    store = CodeStore()
    proj = mint_term_index(store, x(1), [("n", 1)])
    r = RealizerMap({}, {1: Plain(0), 2: Coded(1, proj)}, store)
    assert real_check(r, sigma, phi, True) is HOLDS
    off = mint_term_index(store, Succ(x(1)), [("n", 1)])
    bad = RealizerMap({}, {1: Plain(0), 2: Coded(1, off)}, store)
    assert real_check(bad, sigma, phi, True) is FAILS


def test_identity_realizer_and_empty_suite():
    A = Eq(x(1), ZERO)
    r = extract_realizer(B.ident(A))
    s = Sequent((A,), A)
    assert check_realizes(r, s, standard_suite(r, s, 50)) is HOLDS
    rep = check_realizes_report(r, s, [])
    assert rep.verdict is HOLDS and rep.empty


def test_bumped_index_is_caught():
    q, r, s = extracted(get_entry("exists-witness"))
    bumped = mutate(r, s, "bump-index")
    assert check_realizes(bumped, s, standard_suite(bumped, s, 50)) is FAILS


# ------------------------------------------------------------- extraction


def test_extract_identity():
    r = extract_realizer(B.ident(Eq(x(1), ZERO)))
    assert r.v == {} and r.w == {1: Plain(0)}


def _nested_proof():
    top = Eq(ZERO, ZERO)
    con = AX.con(4, _app(1, x(4)), x(3))
    body = ForallN(3, Eq(_app(2, x(3)), _app(1, x(3))))
    p = B.quant_right(B.axiom(con), ForallN(3, con), eigen=3)
    p = B.quant_right(p, ExistsF(2, body), witness=Lambda(4, _app(1, x(4))))
    p = B.impr(B.weaken(p, top))
    return B.quant_right(p, ForallF(1, Imp(top, ExistsF(2, body))), eigen=1)


def test_extract_nested_function_witness():
    r = extract_realizer(_nested_proof())
    # the answer sits one level above the universal it is computed from
    assert r.v[1] == Plain(1)
    assert isinstance(r.v[2], Coded) and r.v[2].k == 2
    f = FiniteTable([3, 1, 4])
    out = [apply_functional(r.store, r.v[2].e, [f], [], a).value for a in range(6)]
    assert out == [f(a) for a in range(6)]


def test_extract_choice_leaf():
    r = extract_realizer(B.axiom(AX.qf_ac(Eq(x(2), x(1)), 1, 2, 3, 4)))
    assert (r.w[1], r.w[2], r.w[4]) == (Plain(3), Plain(4), Plain(2))
    assert isinstance(r.v[3], Coded) and r.v[3].k == 1


@pytest.mark.parametrize("entry", EXTRACTABLE, ids=lambda e: e.name)
def test_extraction_invariants(entry):
    q, r, s = extracted(entry)
    free = set().union(*(free_vars(f) for f in s.formulas()))
    for var in r.variables():
        if var in free:
            assert r.entry(var) == Plain(0), var
        else:
            assert r.level(var) > 0, var
    assert check_self_contained(r)
    assert check_monotone_universal(r, s)
    for seed in range(5):
        padded = pad_permutations(q, seed)
        if padded is not None:
            again = extract_realizer(padded)
            assert (again.v, again.w) == (r.v, r.w)


@pytest.mark.parametrize("entry", EXTRACTABLE, ids=lambda e: e.name)
def test_mutations_detected(entry):
    q, r, s = extracted(entry)
    assert check_realizes(r, s, standard_suite(r, s, 50)) is HOLDS
    for kind in MUTATIONS:
        m = mutate(r, s, kind)
        if m is not None:
            assert check_realizes(m, s, standard_suite(m, s, 50)) is FAILS, kind


def test_verdicts_stable_under_doubling():
    for name in ("identity", "choice-plain", "qf-ia-cut", "exists-witness", "forall-contraction"):
        q, r, s = extracted(get_entry(name))
        for sigma in standard_suite(r, s, 10, bound=8, fuel=10_000):
            for phi in s.formulas():
                for sign in (True, False):
                    lo = real_check(r, sigma, phi, sign, 8, 10_000)
                    hi = real_check(r, sigma, phi, sign, 16, 20_000)
                    if lo is not Ternary.UNKNOWN and hi is not Ternary.UNKNOWN:
                        assert lo == hi, (name, phi, sign)


def test_serialization_round_trip():
    for entry in EXTRACTABLE:
        q, r, s = extracted(entry)
        again = load_realizer(dump_realizer(r), r.store)
        assert (again.v, again.w) == (r.v, r.w)


# ------------------------------------------------------- strong realizers


def test_strong_identity():
    sr = extract_strong_realizer(get_entry("identity").build())
    assert sr.n == 1
    assert strong_violations(sr.r, sr.stages, sr.zero) == []
    chain = [sr.r.level(("f", sr.zero.alpha))] + [sr.r.level(("f", st.alpha)) for st in sr.stages]
    assert chain == sorted(chain) and len(set(chain)) == len(chain)


def test_strong_weakened_premise_dropped():
    sr = extract_strong_realizer(get_entry("identity-weakened").build())
    assert sr.n == 0 and sr.positions == ()
    assert sr.sequent.antecedent == ()


def test_strong_swapped_levels_fail_ordering():
    sr = extract_strong_realizer(get_entry("identity").build())
    a0, a1 = ("f", sr.zero.alpha), ("f", sr.stages[0].alpha)
    r = sr.r
    v = dict(r.v)
    e0, e1 = r.entry(a0), r.entry(a1)
    v[a0[1]] = Plain(e1.k)
    v[a1[1]] = Coded(e0.k, e1.e)
    swapped = RealizerMap(v, dict(r.w), r.store)
    assert any(b[0] == "ordering" for b in strong_violations(swapped, sr.stages, sr.zero))


def test_strong_needs_number_negative():
    with pytest.raises(StrongRealizerError):
        extract_strong_realizer(get_entry("exists-witness").build())
    zeta = ForallF(1, Imp(Eq(ZERO, ZERO), ExistsF(2, ExistsN(5, Eq(_app(2, x(5)), ZERO)))))
    with pytest.raises(StrongRealizerError, match="number-negative"):
        extract_strong_realizer(B.ident(zeta))
