from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

import gen
from elzero import build as B
from elzero.calculus import check_variable_conventions
from elzero.sexpr import ParseError, parse_formula, show
from elzero.syntax import (
    BOT, And, Bot, Eq, ExistsF, ExistsN, FiniteTable, ForallF, ForallN, FunApp, FunVar, Imp,
    Lambda, NumVar, PrimApp, Rec, Succ, Valuation, ZERO, classify_pi12, elaborate_disjunction,
    eval_num_term, is_number_negative, num, polarity_of_occurrence, quantifier_polarities,
    subformulas,
)

x = NumVar
SEEDS = st.integers(0, 2**32 - 1)


# ---------------------------------------------------------------- parsing


def test_parse_imp_bot_bot():
    assert parse_formula("(imp bot bot)") == Imp(Bot(), Bot())


def test_parse_or_elaborates_with_fresh_index():
    z = Eq(x(3), ZERO)
    want = ExistsN(3, And(Imp(z, Eq(x(1), ZERO)), Imp(Imp(z, BOT), Eq(x(2), ZERO))))
    assert parse_formula("(or (eq x1 0) (eq x2 0))") == want


def test_parse_lambda_application():
    want = Eq(FunApp(Lambda(1, Succ(x(1))), ZERO), Succ(ZERO))
    assert parse_formula("(eq (app (lam x1 (succ x1)) 0) 1)") == want


def test_parse_not_is_imp_bot():
    assert parse_formula("(not (eq x1 0))") == Imp(Eq(x(1), ZERO), BOT)


@pytest.mark.parametrize("text", [
    "(eq x1",
    "(and bot)",
    "(prim add 0)",
    "(frob bot bot)",
    "(alln x1 (alln x1 (eq x1 0)))",
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text)


@settings(max_examples=1000, deadline=None)
@given(SEEDS)
def test_print_parse_round_trip(seed):
    phi = gen.formula(seed, depth=4)
    assert parse_formula(show(phi)) == phi


# ------------------------------------------------------------ disjunction


def test_elaborate_bot_bot():
    z = Eq(x(7), ZERO)
    assert elaborate_disjunction(BOT, BOT, 7) == ExistsN(7, And(Imp(z, BOT), Imp(Imp(z, BOT), BOT)))


def test_elaborate_matches_parse():
    got = elaborate_disjunction(Eq(x(1), ZERO), Eq(x(2), ZERO), 3)
    assert got == parse_formula("(or (eq x1 0) (eq x2 0))")


def test_elaborate_rejects_used_index():
    with pytest.raises(ValueError):
        elaborate_disjunction(Eq(x(3), ZERO), BOT, 3)


def _count_exists_n(phi) -> int:
    return sum(isinstance(f, ExistsN) for _, f in subformulas(phi))


@settings(max_examples=200, deadline=None)
@given(SEEDS)
def test_elaborate_adds_exactly_one_exists(seed):
    g = gen.gen(seed)
    phi, psi = g.formula(3), g.formula(3)
    out = elaborate_disjunction(phi, psi, g.fresh())
    assert _count_exists_n(out) == _count_exists_n(phi) + _count_exists_n(psi) + 1


# ------------------------------------------------------ variable conventions


def _refl(j):
    e = Eq(x(j), x(j))
    return B.impr(B.ident(e)), Imp(e, e)


def test_conventions_identity_clean():
    assert check_variable_conventions(B.ident(Eq(ZERO, ZERO))).ok


def test_conventions_bound_twice_flagged_once_at_lower_step():
    p, body = _refl(1)
    q = B.quant_right(p, ForallN(1, body), eigen=1)
    root = B.andr(q, q)
    report = check_variable_conventions(root)
    assert [(v.node, v.kind) for v in report.violations] == [("root", "bound-twice")]


def test_conventions_reuse_after_cut():
    ex = ExistsN(1, Eq(x(1), ZERO))
    zz = Eq(ZERO, ZERO)
    left = B.quant_right(B.ident(zz), ex, witness=ZERO)
    right = B.weaken(B.ident(zz), ex)
    cut = B.cut(left, right)
    root = B.quant_right(cut, ex, witness=ZERO)
    report = check_variable_conventions(root)
    assert check_variable_conventions(cut).ok
    assert [(v.node, v.kind, v.var) for v in report.violations] == [("root", "reuse-after-cut", ("n", 1))]


# ---------------------------------------------------------- classification


def _a(i, t=ZERO):
    return FunApp(FunVar(i), t)


def test_classify_pi12_match():
    xi, psi = Eq(_a(1), ZERO), Eq(_a(2), ZERO)
    parts = classify_pi12(ForallF(1, Imp(xi, ExistsF(2, psi))))
    assert (parts.alpha, parts.xi, parts.beta, parts.psi) == (1, xi, 2, psi)


def test_classify_pi12_rejects():
    assert classify_pi12(BOT) is None
    inner = ExistsF(3, Eq(_a(3), ZERO))
    assert classify_pi12(ForallF(1, Imp(inner, ExistsF(2, Eq(_a(2), ZERO))))) is None


def _pi12(xi, psi, a=1, b=2):
    return ForallF(a, Imp(xi, ExistsF(b, psi)))


def test_number_negative_examples():
    ex = ExistsN(5, Eq(x(5), ZERO))
    qf = Eq(_a(1), ZERO)
    assert is_number_negative((), _pi12(Imp(ex, BOT), qf))
    assert not is_number_negative((_pi12(qf, ex, 3, 4),), _pi12(qf, qf))
    # psi of the succedent is unrestricted
    assert is_number_negative((), _pi12(qf, ExistsN(6, Eq(x(6), ZERO))))
    assert is_number_negative((_pi12(qf, qf, 3, 4),), _pi12(qf, qf))


def test_number_negative_needs_pi12():
    with pytest.raises(ValueError):
        is_number_negative((), BOT)


# -------------------------------------------------------------- evaluation


def _ref_prim(name, args):
    a = args
    if name == "add":
        return a[0] + a[1]
    if name == "mul":
        return a[0] * a[1]
    if name == "monus":
        return max(a[0] - a[1], 0)
    if name == "pred":
        return max(a[0] - 1, 0)
    if name == "sg":
        return 1 if a[0] else 0
    raise KeyError(name)


def ref_eval(t, funs, env):
    """Environment-passing evaluator, independent of the substitution-based one."""
    if isinstance(t, NumVar):
        return env[t.index]
    if isinstance(t, Succ):
        return ref_eval(t.arg, funs, env) + 1
    if isinstance(t, PrimApp):
        return _ref_prim(t.name, [ref_eval(s, funs, env) for s in t.args])
    if isinstance(t, FunApp):
        return ref_apply(t.fun, ref_eval(t.arg, funs, env), funs, env)
    return 0


def ref_apply(f, a, funs, env):
    if isinstance(f, FunVar):
        return funs[f.index](a)
    if isinstance(f, Lambda):
        return ref_eval(f.body, funs, {**env, f.binder: a})
    acc = ref_eval(f.base, funs, env)
    for _ in range(a):
        acc = ref_apply(f.step, acc, funs, env)
    return acc


def test_eval_examples():
    sigma = Valuation({}, {})
    assert eval_num_term(Succ(ZERO), sigma) == 1
    step = Lambda(9, PrimApp("add", (x(9), num(2))))
    assert eval_num_term(FunApp(Rec(ZERO, step), num(3)), sigma) == 6
    assert eval_num_term(FunApp(Lambda(1, Succ(x(1))), num(4)), sigma) == 5


def test_finite_table_defaults_to_zero():
    f = FiniteTable([3, 1])
    assert [f(0), f(1), f(2), f(100)] == [3, 1, 0, 0]


@settings(max_examples=1000, deadline=None)
@given(SEEDS, st.lists(st.integers(0, 5), min_size=3, max_size=3),
       st.lists(st.lists(st.integers(0, 4), max_size=4), min_size=2, max_size=2))
def test_eval_agrees_with_reference(seed, nums, tables):
    t = gen.num_term(seed, depth=6)
    funs = {i + 1: FiniteTable(v) for i, v in enumerate(tables)}
    env = {j: nums[j - 1] for j in gen.FREE_NUMS}
    assert eval_num_term(t, Valuation(funs, env)) == ref_eval(t, funs, env)


# ---------------------------------------------------------------- polarity


def test_polarity_examples():
    A = Eq(x(1), ZERO)
    assert polarity_of_occurrence(ForallN(1, A), ()) == "positive"
    assert polarity_of_occurrence(Imp(ExistsN(1, A), BOT), (0,)) == "negative"
    assert polarity_of_occurrence(Imp(Imp(ForallN(1, A), BOT), BOT), (0, 0)) == "positive"


def test_polarity_bad_path():
    with pytest.raises(IndexError):
        polarity_of_occurrence(BOT, (0,))


@settings(max_examples=300, deadline=None)
@given(SEEDS)
def test_negation_flips_every_polarity(seed):
    phi = gen.formula(seed, depth=4)
    before = quantifier_polarities(phi)
    after = {path[1:]: pol for path, _, pol in quantifier_polarities(Imp(phi, BOT))}
    assert len(after) == len(before)
    for path, _, pol in before:
        assert polarity_of_occurrence(phi, path) == pol
        assert after[path] == ("negative" if pol == "positive" else "positive")
