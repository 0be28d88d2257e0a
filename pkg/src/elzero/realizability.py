"""Realizers for sequents: level maps with coded witnesses.

A realizer assigns each variable of a sequent an entry: ``Plain(k)`` (a level)
or ``Coded(k, e)`` (a level and an index computing the variable from all
variables of smaller level).  Arguments of ``Coded(k, e)`` are passed as
functions with ``v1 < k`` in increasing index order, then numbers with
``w1 < k`` likewise.

Semantic checks are finite: quantifiers range over a bounded domain and a
function pool, and programs run under fuel.  Every check therefore answers
with a :class:`~elzero.semantics.Ternary`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .calculus import Sequent
from .oml import (
    DEFAULT_FUEL, CodeStore, ComputedFunction, FuelExhausted, Stuck, Value,
    apply_functional, apply_number, reachable_slots,
)
from .semantics import (
    DEFAULT_BOUND, FAILS, HOLDS, UNKNOWN, Ternary, closure_truth, function_pool,
    number_domain, random_valuation,
)
from .syntax import (
    And, Bot, Eq, ExistsF, ExistsN, FiniteTable, ForallF, ForallN, Imp, NotConverged,
    Valuation, all_vars, binders, free_vars, is_quant, quantifier_polarities,
)

PROBES = 8


@dataclass(frozen=True)
class Plain:
    k: int


@dataclass(frozen=True)
class Coded:
    k: int
    e: int


def level(entry) -> int:
    return entry.k


@dataclass
class RealizerMap:
    """Entries for function variables (``v``) and number variables (``w``)."""

    v: dict
    w: dict
    store: CodeStore = field(default_factory=CodeStore)

    def entry(self, var):
        sort, i = var
        return (self.v if sort == "f" else self.w)[i]

    def level(self, var) -> int:
        return self.entry(var).k

    def domain(self) -> set:
        return {("f", i) for i in self.v} | {("n", j) for j in self.w}

    def variables(self):
        """All variables, functions first, each in index order."""
        return [("f", i) for i in sorted(self.v)] + [("n", j) for j in sorted(self.w)]

    def args_below(self, k: int) -> list:
        """The argument list of a ``Coded(k, .)`` entry."""
        return [x for x in self.variables() if self.level(x) < k]

    def coded(self):
        return [(x, self.entry(x)) for x in self.variables() if isinstance(self.entry(x), Coded)]

    def by_level(self) -> list:
        return sorted(self.variables(), key=lambda x: (self.level(x), x))


# ------------------------------------------------------------- structural checks


def reads(r: RealizerMap, x) -> list:
    """Variables a coded entry may actually read."""
    ent = r.entry(x)
    if not isinstance(ent, Coded):
        return []
    args = r.args_below(ent.k)
    fs = [a for a in args if a[0] == "f"]
    ns = [a for a in args if a[0] == "n"]
    return [fs[k] if s == "f" else ns[k] for s, k in sorted(reachable_slots(r.store, ent.e))]


def _quants(s: Sequent):
    out = [(q, pol) for g in s.antecedent for _, q, pol in quantifier_polarities(g, positive=False)]
    return out + [(q, pol) for _, q, pol in quantifier_polarities(s.succedent, positive=True)]


def monotone_universal_violations(r: RealizerMap, s: Sequent) -> list:
    """Violations of domain exactness, free-at-zero, monotonicity and universality."""
    bad = []
    want = set()
    for g in s.formulas():
        want |= set(all_vars(g))
    if r.domain() != want:
        bad.append(("domain", sorted(r.domain() ^ want)))
        return bad
    fv = set()
    for g in s.formulas():
        fv |= set(free_vars(g))
    for x in fv:
        if r.level(x) != 0:
            bad.append(("free", x))
    for q, pol in _quants(s):
        x = (q.sort, q.var)
        if r.level(x) == 0:
            bad.append(("bound-at-zero", x))
        for y in binders(q.body):
            if r.level(y) <= r.level(x):
                bad.append(("monotone", x, y))
        universal = (q.kind == "forall") == (pol == "positive")
        if universal and not isinstance(r.entry(x), Plain):
            bad.append(("universal", x))
    return bad


def check_monotone_universal(r: RealizerMap, s: Sequent) -> bool:
    return not monotone_universal_violations(r, s)


# ------------------------------------------------------------- validity


def _call_args(r: RealizerMap, sigma: Valuation, k: int):
    funs, nums = [], []
    for s, i in r.args_below(k):
        if s == "f":
            funs.append(sigma.funs.get(i, FiniteTable()))
        else:
            nums.append(sigma.nums.get(i, 0))
    return funs, nums


def _points(f) -> list:
    pts = list(range(PROBES))
    if isinstance(f, FiniteTable):
        pts = sorted(set(pts) | set(range(len(f.values))))
    return pts


def check_valid_at(r: RealizerMap, sigma: Valuation, x, strong: bool = False,
                   fuel: int = DEFAULT_FUEL) -> Ternary:
    """Does ``sigma`` agree with the code at ``x`` (where it converges)?

    With ``strong`` the code must also converge.  Plain entries are
    vacuously (strongly) valid.
    """
    ent = r.entry(x)
    if isinstance(ent, Plain):
        return HOLDS
    funs, nums = _call_args(r, sigma, ent.k)
    sort, i = x
    if sort == "n":
        o = apply_number(r.store, ent.e, funs, nums, fuel)
        if isinstance(o, Value):
            return HOLDS if o.value == sigma.nums.get(i, 0) else FAILS
        if isinstance(o, Stuck):
            return FAILS
        return UNKNOWN if strong else HOLDS
    target = sigma.funs.get(i, FiniteTable())
    result = HOLDS
    for a in _points(target):
        o = apply_functional(r.store, ent.e, funs, nums, a, fuel)
        if isinstance(o, Stuck):
            return FAILS
        if isinstance(o, FuelExhausted):
            if strong:
                result = UNKNOWN
            continue
        try:
            if o.value != target(a):
                return FAILS
        except NotConverged:
            result = UNKNOWN
    return result


def check_valid(r: RealizerMap, sigma: Valuation, fuel: int = DEFAULT_FUEL) -> Ternary:
    return Ternary.all(check_valid_at(r, sigma, x, fuel=fuel) for x in r.variables())


def check_codes(r: RealizerMap) -> list:
    """Problems with codes: unknown indices and signature mismatches."""
    bad = []
    for x, ent in r.coded():
        if ent.e not in r.store:
            bad.append((x, f"index {ent.e} is not in the store"))
            continue
        args = r.args_below(ent.k)
        want = (sum(1 for s, _ in args if s == "f"), sum(1 for s, _ in args if s == "n"))
        if r.store.signature(ent.e) != want:
            bad.append((x, f"signature {r.store.signature(ent.e)} != {want}"))
    return bad


def check_self_contained(r: RealizerMap) -> bool:
    """No code reads an argument whose own entry is coded."""
    if check_codes(r):
        return False
    return not any(isinstance(r.entry(y), Coded) for x, _ in r.coded() for y in reads(r, x))


# ------------------------------------------------------------- real+ / real-


def realizer_hints(r: RealizerMap, fuel: int = DEFAULT_FUEL):
    """Existential witnesses proposed by the realizer itself, recomputed at the current valuation."""

    def hints(sort, i, s):
        ent = r.entry((sort, i))
        if not isinstance(ent, Coded):
            return []
        funs, nums = _call_args(r, s, ent.k)
        if sort == "f":
            return [ComputedFunction(r.store, ent.e, funs, nums, fuel)]
        o = apply_number(r.store, ent.e, funs, nums, fuel)
        return [o.value] if isinstance(o, Value) else []

    return hints


def real_check(r: RealizerMap, sigma: Valuation, phi, positive: bool = True,
               bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL) -> Ternary:
    """``(v,w) real+ phi`` (or ``real-`` when ``positive`` is false) at ``sigma``."""
    t = closure_truth(phi, sigma, bound, realizer_hints(r, fuel))
    if t is FAILS or isinstance(phi, (Eq, Bot)):
        return t
    if isinstance(phi, And):
        return t & real_check(r, sigma, phi.left, positive, bound, fuel) \
            & real_check(r, sigma, phi.right, positive, bound, fuel)
    if isinstance(phi, Imp):
        a = real_check(r, sigma, phi.left, not positive, bound, fuel)
        if a is FAILS:
            return t
        b = real_check(r, sigma, phi.right, positive, bound, fuel)
        if a is HOLDS:
            return t & b
        return t & (HOLDS if b is HOLDS else UNKNOWN)
    if is_quant(phi):
        out = t & real_check(r, sigma, phi.body, positive, bound, fuel)
        if positive and phi.kind == "exists" and out is not FAILS:
            out = out & check_valid_at(r, sigma, (phi.sort, phi.var), strong=True, fuel=fuel)
        return out
    raise TypeError(phi)


@dataclass
class RealReport:
    verdict: Ternary
    checked: int = 0
    vacuous: int = 0
    unknown: int = 0
    counterexample: Valuation | None = None
    reasons: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.checked == 0


def realizes_at(r: RealizerMap, s: Sequent, sigma: Valuation, bound: int = DEFAULT_BOUND,
                fuel: int = DEFAULT_FUEL) -> tuple[str, Ternary]:
    """Classify one valuation: ``invalid``, ``vacuous`` or ``tested`` with the succedent verdict."""
    valid = check_valid(r, sigma, fuel)
    if valid is FAILS:
        return "invalid", HOLDS
    if valid is UNKNOWN:
        return "tested", UNKNOWN
    ante = HOLDS
    for g in s.antecedent:
        ante = ante & real_check(r, sigma, g, False, bound, fuel)
        if ante is FAILS:
            return "vacuous", HOLDS
    succ = real_check(r, sigma, s.succedent, True, bound, fuel)
    if ante is UNKNOWN:
        return "tested", HOLDS if succ is HOLDS else UNKNOWN
    return "tested", succ


def check_realizes_report(r: RealizerMap, s: Sequent, suite, bound: int = DEFAULT_BOUND,
                          fuel: int = DEFAULT_FUEL) -> RealReport:
    reasons = monotone_universal_violations(r, s) + check_codes(r)
    if reasons:
        return RealReport(FAILS, reasons=reasons)
    rep = RealReport(HOLDS)
    for sigma in suite:
        kind, verdict = realizes_at(r, s, sigma, bound, fuel)
        rep.checked += 1
        if kind != "tested":
            rep.vacuous += 1
        elif verdict is FAILS:
            rep.verdict, rep.counterexample = FAILS, sigma
            return rep
        elif verdict is UNKNOWN:
            rep.unknown += 1
    if rep.unknown:
        rep.verdict = UNKNOWN
    return rep


def check_realizes(r: RealizerMap, s: Sequent, suite, bound: int = DEFAULT_BOUND,
                   fuel: int = DEFAULT_FUEL) -> Ternary:
    """Falsifier over ``suite``: Fails on a counterexample, Holds when none and nothing was Unknown."""
    return check_realizes_report(r, s, suite, bound, fuel).verdict


# ------------------------------------------------------------- suites


def complete(r: RealizerMap, sigma: Valuation, s: Sequent | None = None, bound: int = DEFAULT_BOUND,
             fuel: int = DEFAULT_FUEL, chooser=None) -> Valuation:
    """Validity-completion: overwrite coded positions, in level order, by their computed values.

    With a sequent, plain variables bound by a negative existential (or a
    positive universal inside a negative formula) are first moved to the least
    witness of their body; ``chooser(var, sigma)`` may override any plain choice.
    """
    witnesses = {}
    if s is not None:
        for q, pol in _quants(s):
            if q.kind == "exists" and pol == "negative":
                witnesses[(q.sort, q.var)] = q.body
    for x in r.by_level():
        ent = r.entry(x)
        sort, i = x
        if isinstance(ent, Coded):
            funs, nums = _call_args(r, sigma, ent.k)
            if sort == "f":
                sigma = sigma.with_fun(i, ComputedFunction(r.store, ent.e, funs, nums, fuel))
            else:
                o = apply_number(r.store, ent.e, funs, nums, fuel)
                if isinstance(o, Value):
                    sigma = sigma.with_num(i, o.value)
            continue
        if ent.k == 0:
            continue
        picked = chooser(x, sigma) if chooser is not None else None
        if picked is None and x in witnesses:
            picked = _least_witness(witnesses[x], x, sigma, bound)
        if picked is not None:
            sigma = sigma.with_fun(i, picked) if sort == "f" else sigma.with_num(i, picked)
    return sigma


def _least_witness(body, x, sigma: Valuation, bound: int):
    sort, i = x
    cands = function_pool(sigma, bound) if sort == "f" else number_domain(sigma, bound)
    for c in cands:
        s2 = sigma.with_fun(i, c) if sort == "f" else sigma.with_num(i, c)
        if closure_truth(body, s2, bound) is HOLDS:
            return c
    return None


def corner_valuations(fun_vars, num_vars, bound: int = DEFAULT_BOUND) -> list:
    """All-zero, all-one and a single spike at each position."""
    out = [
        Valuation({i: FiniteTable() for i in fun_vars}, {j: 0 for j in num_vars}),
        Valuation({i: FiniteTable([1] * (bound + 1)) for i in fun_vars}, {j: 1 for j in num_vars}),
    ]
    spike = FiniteTable([0] * (bound // 2) + [bound])
    for i in fun_vars:
        out.append(Valuation({k: spike if k == i else FiniteTable() for k in fun_vars},
                             {j: 0 for j in num_vars}))
    for j in num_vars:
        out.append(Valuation({i: FiniteTable() for i in fun_vars},
                             {k: bound if k == j else 0 for k in num_vars}))
    return out


def standard_suite(r: RealizerMap, s: Sequent | None = None, n: int = 50, seed: int = 0,
                   bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL) -> list:
    """``n`` valuations: corner cases then seeded random ones, alternately raw-completed and witness-completed."""
    fun_vars = sorted(r.v)
    num_vars = sorted(r.w)
    rng = random.Random(seed)
    base = corner_valuations(fun_vars, num_vars, bound)
    while len(base) < (n + 1) // 2:
        base.append(random_valuation(rng, fun_vars, num_vars, bound))
    out = []
    for sigma in base:
        out.append(complete(r, sigma, None, bound, fuel))
        if s is not None:
            out.append(complete(r, sigma, s, bound, fuel))
        else:
            out.append(complete(r, random_valuation(rng, fun_vars, num_vars, bound), None, bound, fuel))
    return out[:n]


# ------------------------------------------------------------- extraction


class ExtractionError(Exception):
    pass


@dataclass(frozen=True)
class _Ent:
    """Working entry: level plus (index, binding) for coded ones."""

    k: int
    code: tuple | None = None


def _vars_of(seq: Sequent) -> set:
    out = set()
    for g in seq.formulas():
        out |= set(all_vars(g))
    return out


def _max_level(R: dict) -> int:
    return max((e.k for e in R.values()), default=0)


def _shift(R: dict, by: int) -> dict:
    return {x: (_Ent(e.k + by, e.code) if e.k else e) for x, e in R.items()}


def _sorted_binding(vs) -> tuple:
    return tuple(sorted(set(vs), key=lambda x: (x[0] != "f", x[1])))


class _Extractor:
    def __init__(self, store: CodeStore, markov: bool = True):
        self.store = store
        self.markov = markov

    # -- code surgery

    def rebind(self, ent: _Ent, binding) -> _Ent:
        e, old = ent.code
        binding = _sorted_binding(binding)
        if tuple(old) == binding:
            return ent
        from .oml import mint_rewired

        return _Ent(ent.k, (mint_rewired(self.store, e, old, binding), binding))

    def forget(self, R: dict, var) -> dict:
        """Coded entries stop reading ``var`` (it is passed as 0)."""
        out = {}
        for x, ent in R.items():
            if ent.code is not None and var in ent.code[1]:
                ent = self.rebind(ent, [y for y in ent.code[1] if y != var])
            out[x] = ent
        return out

    def replace(self, R: dict, var, repl: tuple) -> dict:
        """Coded entries read ``var`` through the program ``repl = (index, binding)``."""
        from .oml import mint_rewired, mint_substituted_index

        e_r, b_r = repl
        out = {}
        for x, ent in R.items():
            if ent.code is None or var not in ent.code[1]:
                out[x] = ent
                continue
            rest = _sorted_binding([y for y in ent.code[1] if y != var] + [y for y in b_r if y != var])
            full = _sorted_binding(list(rest) + [var])
            wide = self.rebind(ent, full)
            r_idx = mint_rewired(self.store, e_r, b_r, rest)
            slot_sort = var[0]
            pos = [y for y in full if y[0] == slot_sort].index(var)
            e2 = mint_substituted_index(self.store, wide.code[0], (slot_sort, pos), r_idx)
            out[x] = _Ent(ent.k, (e2, rest))
        return out

    # -- combination

    def union(self, left: dict, right: dict, shared=frozenset()) -> dict:
        R = dict(right)
        for x, ent in _shift(left, _max_level(right)).items():
            if x in shared and x in R:
                continue
            if x in R and (R[x].k or ent.k):
                raise ExtractionError(f"variable {x} is bound on one side of a binary rule")
            R[x] = ent
        return R

    def fresh_binders(self, R: dict, phi) -> dict:
        """Plain levels above everything for the binders of a new formula, by nesting depth."""
        R = dict(R)
        top = _max_level(R)

        def go(f, depth):
            if is_quant(f):
                R[(f.sort, f.var)] = _Ent(top + depth + 1)
                depth += 1
            for c in _kids(f):
                go(c, depth)

        go(phi, 0)
        for x in free_vars(phi):
            R.setdefault(x, _Ent(0))
        return R

    # -- the recursion

    def run(self, p) -> dict:
        R = self._run(p)
        want = _vars_of(p.conclusion)
        return {x: R.get(x, _Ent(0)) for x in want}

    def _run(self, p) -> dict:
        r = p.rule
        if r == "I" or (r == "AxiomLeaf" and not _has_binders(p.conclusion.succedent)):
            return {x: _Ent(0) for x in sorted(_vars_of(p.conclusion))}
        if r == "AxiomLeaf":
            return self.sigma_leaf(p)
        if r == "C":
            raise ExtractionError("contraction in the proof: affinize it first")
        if r in ("W", "BotRule"):
            R = self.run(p.premises[0])
            new = p.conclusion.antecedent[-1] if r == "W" else p.conclusion.succedent
            return self.fresh_binders(R, new)
        if r in ("P", "AndL", "ImpR"):
            return self.run(p.premises[0])
        if r in ("AndR", "ImpL"):
            return self.union(self.run(p.premises[0]), self.run(p.premises[1]))
        if r == "Cut":
            return self.cut(p)
        if r in ("ExistsNR", "ForallNL", "ExistsFR", "ForallFL"):
            return self.witness_rule(p)
        if r in ("ForallNR", "ExistsNL", "ForallFR", "ExistsFL"):
            return self.eigen_rule(p)
        raise ExtractionError(f"unsupported rule {r}")

    def _principal_quant(self, p):
        return p.conclusion.succedent if p.rule.endswith("R") else p.conclusion.antecedent[-1]

    def witness_rule(self, p) -> dict:
        from .oml import mint_term_index

        Q = self._principal_quant(p)
        u = (Q.sort, Q.var)
        R = self.forget(self.run(p.premises[0]), u)
        R.pop(u, None)
        t = p.witness
        binding = _sorted_binding(free_vars(t))
        ent = _Ent(0, (mint_term_index(self.store, t, binding), binding))
        if u in binding:
            ent = self.rebind(ent, [y for y in binding if y != u])
        R = _shift(R, 1)
        R[u] = _Ent(1, ent.code)
        return R

    def eigen_rule(self, p) -> dict:
        Q = self._principal_quant(p)
        u = (Q.sort, Q.var)
        y = (Q.sort, Q.var if p.eigen is None else p.eigen)
        R = self.run(p.premises[0])
        if y != u:
            R = self.forget(R, u)
            R.pop(u, None)
            renamed = {}
            for x, ent in R.items():
                if ent.code is not None and y in ent.code[1]:
                    b = [u if z == y else z for z in ent.code[1]]
                    e = ent.code[0]
                    from .oml import mint_rewired

                    nb = _sorted_binding(b)
                    ent = _Ent(ent.k, (mint_rewired(self.store, e, ent.code[1], _rename_binding(nb, u, y)), nb))
                renamed[x] = ent
            R = renamed
            R.pop(y, None)
        R = _shift(R, 1)
        R[u] = _Ent(1)
        return R

    # -- axioms

    def sigma_leaf(self, p) -> dict:
        phi = p.conclusion.succedent
        base = p.base if p.base is not None else phi
        schema = _schema_of(p, base, self.markov)
        Rb = self.base_realizer(schema, base)
        align = {}
        if base is not phi:
            from .transform import binder_alignment

            align = binder_alignment(phi, base)
            if align is None:
                raise ExtractionError("Sigma leaf is not contraction-similar to its base")
        R = {x: _Ent(0) for x in sorted(_vars_of(p.conclusion))}
        for x in R:
            if x in Rb:
                R[x] = Rb[x]
            elif x in align:
                R[x] = Rb[align[x]]
        return R

    def base_realizer(self, schema: str, phi) -> dict:
        from .oml import mint_mu_index

        R = {x: _Ent(0) for x in all_vars(phi)}
        if schema == "qf-ia":
            R[("n", phi.left.var)] = _Ent(1)
            R[("n", phi.right.var)] = _Ent(2)
        elif schema == "qf-ac":
            c, d = phi.left.var, phi.left.body.var
            psi = phi.left.body.body
            i, b = phi.right.var, phi.right.body.var
            binding = _sorted_binding(free_vars(psi) - {("n", c), ("n", d)})
            e = mint_mu_index(self.store, psi, binding, target=d, input_var=c)
            R.update({("n", c): _Ent(3), ("n", d): _Ent(4), ("f", i): _Ent(1, (e, binding)), ("n", b): _Ent(2)})
        elif schema == "mp":
            inner = phi.left.left.left  # ~~Ex_b B: ((Ex_b B -> bot) -> bot)
            b = inner.var
            c = phi.right.var
            psi = phi.right.body
            binding = _sorted_binding(free_vars(psi) - {("n", c)})
            e = mint_mu_index(self.store, psi, binding, target=c)
            R.update({("n", b): _Ent(2), ("n", c): _Ent(1, (e, binding))})
        else:
            raise ExtractionError(f"no realizer for quantified axiom schema {schema}")
        return R

    # -- cuts

    def cut(self, p) -> dict:
        from .calculus import cut_formula
        from .transform import binder_alignment, sigma_base

        phi = cut_formula(p)
        R = self.union(self.run(p.premises[0]), self.run(p.premises[1]), frozenset(binders(phi)))
        if not _has_binders(phi):
            return R
        found = sigma_base(phi, markov=self.markov)
        if found is None:
            raise ExtractionError("quantified cut formula is not similar to an axiom")
        schema, base, _ = found
        align = binder_alignment(phi, base) or {}
        if schema in ("qf-ac", "mp"):
            R = self.consume(R, schema, base, align)
        for x in sorted(set(all_vars(phi)) - set(free_vars(phi)) - _vars_of(p.conclusion)):
            R = self.forget(R, x)
            R.pop(x, None)
        return R

    def consume(self, R: dict, schema: str, base, align: dict) -> dict:
        """Replace the eigen-bound choice (or Markov) variable by a mu-search."""
        from .oml import mint_mu_index

        if schema == "qf-ac":
            c, d = base.left.var, base.left.body.var
            psi = base.left.body.body
            target = ("f", base.right.var)
            binding = _sorted_binding(free_vars(psi) - {("n", c), ("n", d)})
            repl = (mint_mu_index(self.store, psi, binding, target=d, input_var=c), binding)
        else:
            c = base.right.var
            psi = base.right.body
            target = ("n", c)
            binding = _sorted_binding(free_vars(psi) - {("n", c)})
            repl = (mint_mu_index(self.store, psi, binding, target=c), binding)
        for x, y in list(align.items()) + [(target, target)]:
            if y == target:
                R = self.replace(R, x, repl)
        return R


def _rename_binding(binding, new, old) -> tuple:
    return tuple(old if z == new else z for z in binding)


def _kids(f):
    from .syntax import children

    return children(f)


def _has_binders(phi) -> bool:
    return bool(binders(phi))


def _schema_of(p, base, markov: bool) -> str:
    from .axioms import match_axiom

    s = match_axiom(base, markov=markov)
    if s is None:
        raise ExtractionError("axiom leaf does not match a schema")
    return s


def finalize(R: dict, store: CodeStore) -> RealizerMap:
    """Turn working entries into a map whose codes take the level-ordered argument lists."""
    from .oml import mint_rewired

    v = {i: (Plain(e.k) if e.code is None else Coded(e.k, -1)) for (s, i), e in R.items() if s == "f"}
    w = {j: (Plain(e.k) if e.code is None else Coded(e.k, -1)) for (s, j), e in R.items() if s == "n"}
    r = RealizerMap(v, w, store)
    for x, ent in R.items():
        if ent.code is None:
            continue
        e, binding = ent.code
        target = tuple(r.args_below(ent.k))
        idx = e if tuple(binding) == target else mint_rewired(store, e, binding, target)
        (r.v if x[0] == "f" else r.w)[x[1]] = Coded(ent.k, idx)
    return r


def extract_realizer(p, store: CodeStore | None = None, markov: bool = True,
                     check: bool = True) -> RealizerMap:
    """A realizer of ``p``'s conclusion, by recursion on the (affine, free-cut free) proof."""
    from .calculus import EL0, EL0_MP, check_free_cut_free

    if check and not check_free_cut_free(p, EL0_MP if markov else EL0):
        raise ExtractionError("proof is not free-cut free")
    store = store if store is not None else CodeStore()
    R = _Extractor(store, markov).run(p)
    r = finalize(R, store)
    bad = [x for x in r.variables() if (r.level(x) == 0) != (x in _free_of(p.conclusion))]
    if bad:
        raise ExtractionError(f"extraction invariant broken at {bad}")
    if not check_self_contained(r):
        raise ExtractionError("extracted realizer is not self-contained")
    return r


def _free_of(seq: Sequent) -> set:
    out = set()
    for g in seq.formulas():
        out |= set(free_vars(g))
    return out


# ------------------------------------------------------------- strong realizers


class StrongRealizerError(Exception):
    def __init__(self, msg: str, counterexample: Valuation | None = None):
        super().__init__(msg)
        self.counterexample = counterexample


@dataclass
class StrongRealizer:
    """A realizer of ``gamma |- zeta0`` with the stage layout it was verified against.

    ``positions[k]`` is the antecedent position (in the input proof's conclusion)
    of the ``k``-th stage; ``stages[k]`` its Pi^1_2 parts.
    """

    r: RealizerMap
    sequent: Sequent
    positions: tuple
    stages: tuple
    zero: object
    proof: object = None

    @property
    def n(self) -> int:
        return len(self.stages)


def strong_violations(r: RealizerMap, stages, zero) -> list:
    """Structural strong-realizer conditions for the given stage order."""
    bad = []
    a0, b0 = ("f", zero.alpha), ("f", zero.beta)
    if not isinstance(r.entry(a0), Plain):
        bad.append(("alpha0-coded",))
    if not isinstance(r.entry(b0), Coded):
        bad.append(("beta0-plain",))
    chain = [r.level(a0)]
    for st in stages:
        a, b = ("f", st.alpha), ("f", st.beta)
        if not isinstance(r.entry(a), Coded):
            bad.append(("stage-plain", a))
        if not isinstance(r.entry(b), Plain):
            bad.append(("answer-coded", b))
        if r.level(b) <= r.level(a):
            bad.append(("answer-below-query", a, b))
        chain.append(r.level(a))
    if any(x >= y for x, y in zip(chain, chain[1:])):
        bad.append(("ordering", tuple(chain)))
    top = r.level(b0)
    nums = [r.level(x) for x in r.variables() if x[0] == "n" and r.level(x) > 0]
    for x in r.variables():
        if x[0] == "f" and r.level(x) <= top and nums and r.level(x) >= min(nums):
            bad.append(("separation", x))
    return bad


def _choose_from_pool(formula, var, sigma, bound, prefer=None):
    i = var[1]
    pool = ([prefer] if prefer is not None else []) + function_pool(sigma, bound)
    for g in pool:
        if closure_truth(formula, sigma.with_fun(i, g), bound) is HOLDS:
            return g
    return None


def staged_check(sr: StrongRealizer, suite, bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL):
    """The staged truth and strong-validity conditions; returns ``(Ternary, counterexample)``."""
    r = sr.r
    zero = sr.zero
    answers = {("f", st.beta): st for st in sr.stages}
    verdict = HOLDS
    for raw in suite:
        def chooser(x, sigma, raw=raw):
            if x == ("f", zero.alpha):
                return _choose_from_pool(zero.xi, x, sigma, bound, prefer=raw.funs.get(zero.alpha))
            if x in answers:
                return _choose_from_pool(answers[x].psi, x, sigma, bound)
            return None

        sigma = complete(r, raw, sr.sequent, bound, fuel, chooser)
        ok = closure_truth(zero.xi, sigma, bound)
        if ok is not HOLDS:
            verdict = verdict & (UNKNOWN if ok is UNKNOWN else HOLDS)
            continue
        alive = HOLDS
        for st in sr.stages:
            a = ("f", st.alpha)
            t = closure_truth(st.xi, sigma, bound) & check_valid_at(r, sigma, a, strong=True, fuel=fuel)
            if t is FAILS:
                return FAILS, sigma
            verdict = verdict & t
            p = closure_truth(st.psi, sigma, bound)
            if p is not HOLDS:
                alive = p if p is UNKNOWN else FAILS
                break
        if alive is FAILS:
            continue
        t = check_valid_at(r, sigma, ("f", zero.beta), strong=True, fuel=fuel)
        if t is FAILS:
            return FAILS, sigma
        verdict = verdict & t & alive
    return verdict, None


def _stage_suite(r: RealizerMap, n: int, seed: int, bound: int) -> list:
    rng = random.Random(seed)
    fun_vars, num_vars = sorted(r.v), sorted(r.w)
    out = corner_valuations(fun_vars, num_vars, bound)[:2]
    while len(out) < n:
        out.append(random_valuation(rng, fun_vars, num_vars, bound))
    return out[:n]


def order_stages(r: RealizerMap, antecedent) -> list:
    """Antecedent positions sorted by the level of their outer function variable."""
    from .syntax import classify_pi12

    parts = [classify_pi12(g) for g in antecedent]
    return sorted(range(len(antecedent)), key=lambda k: (r.level(("f", parts[k].alpha)), k))


def verify_strong(sr: StrongRealizer, n: int = 50, seed: int = 0, bound: int = DEFAULT_BOUND,
                  fuel: int = DEFAULT_FUEL) -> Ternary:
    """All strong-realizer conditions; raises :class:`StrongRealizerError` on Fails."""
    bad = strong_violations(sr.r, sr.stages, sr.zero)
    if bad:
        raise StrongRealizerError(f"strong-realizer layout violated: {bad}")
    rep = check_realizes_report(sr.r, sr.sequent, standard_suite(sr.r, sr.sequent, n, seed, bound, fuel),
                                bound, fuel)
    if rep.verdict is FAILS:
        raise StrongRealizerError(f"realizability fails: {rep.reasons}", rep.counterexample)
    staged, cex = staged_check(sr, _stage_suite(sr.r, n, seed, bound), bound, fuel)
    if staged is FAILS:
        raise StrongRealizerError("staged strong-validity condition fails", cex)
    return rep.verdict & staged


def extract_strong_realizer(p, store: CodeStore | None = None, markov: bool = True, n: int = 50,
                            seed: int = 0, bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL,
                            verify: bool = True) -> StrongRealizer:
    """Strong realizer for a number-negative Pi^1_2 sequent, with weakened premises discarded."""
    from .normalize import drop_position, normalize, weak_positions
    from .syntax import classify_pi12, number_negative_violations

    seq = p.conclusion
    try:
        bad = number_negative_violations(seq.antecedent, seq.succedent)
    except ValueError as exc:
        raise StrongRealizerError(str(exc)) from None
    if bad:
        raise StrongRealizerError(f"sequent is not number-negative: {bad}")
    q = normalize(p)
    kept = list(range(len(q.conclusion.antecedent)))
    for i in sorted(weak_positions(q), reverse=True):
        q = drop_position(q, i)
        kept.pop(i)
    r = extract_realizer(q, store, markov)
    ante = q.conclusion.antecedent
    order = order_stages(r, ante)
    stages = tuple(classify_pi12(ante[k]) for k in order)
    sequent = Sequent(tuple(ante[k] for k in order), q.conclusion.succedent)
    sr = StrongRealizer(r, sequent, tuple(kept[k] for k in order), stages,
                        classify_pi12(q.conclusion.succedent), q)
    if verify:
        verify_strong(sr, n, seed, bound, fuel)
    return sr


# ------------------------------------------------------------- mutations

MUTATIONS = ("bump-index", "swap-levels", "drop-coded", "plain-to-coded", "zero-level")


def _with_entry(r: RealizerMap, x, ent) -> RealizerMap:
    v, w = dict(r.v), dict(r.w)
    (v if x[0] == "f" else w)[x[1]] = ent
    return RealizerMap(v, w, r.store)


def _const_zero(r: RealizerMap, k: int) -> int:
    from .oml import ConstNat

    args = r.args_below(k)
    return r.store.add(ConstNat(0), sum(1 for s, _ in args if s == "f"), sum(1 for s, _ in args if s == "n"))


def _answer_first(r: RealizerMap, s: Sequent) -> list:
    """Coded variables bound by a positive existential, those of the succedent first.

    Corrupting any other coded entry (a witness for a negative universal, say)
    may leave a genuine realizer, so only answers are targeted.
    """
    succ = [(q.sort, q.var) for _, q, pol in quantifier_polarities(s.succedent, positive=True)
            if q.kind == "exists" and pol == "positive"]
    every = [(q.sort, q.var) for q, pol in _quants(s) if q.kind == "exists" and pol == "positive"]
    coded = {x for x, _ in r.coded()}
    return [x for x in succ if x in coded] + [x for x in every if x in coded and x not in succ]


def mutate(r: RealizerMap, s: Sequent, kind: str) -> RealizerMap | None:
    """One systematic corruption of ``r``; ``None`` when ``r`` offers nothing to corrupt.

    The code store is shared and only appended to.
    """
    if kind not in MUTATIONS:
        raise ValueError(f"unknown mutation {kind!r}")
    nested = [(q, y) for q, _ in _quants(s) for y in binders(q.body)]
    if kind == "bump-index":
        targets = _answer_first(r, s)
        if not targets:
            return None
        x = targets[0]
        return _with_entry(r, x, Coded(r.level(x), _const_zero(r, r.level(x))))
    if kind == "drop-coded":
        targets = _answer_first(r, s)
        if not targets:
            return None
        return _with_entry(r, targets[0], Plain(r.level(targets[0])))
    if kind == "swap-levels":
        if not nested:
            return None
        q, y = nested[0]
        x = (q.sort, q.var)
        ex, ey = r.entry(x), r.entry(y)
        r2 = _with_entry(r, x, type(ex)(ey.k, *([ex.e] if isinstance(ex, Coded) else [])))
        return _with_entry(r2, y, type(ey)(ex.k, *([ey.e] if isinstance(ey, Coded) else [])))
    if kind == "plain-to-coded":
        for q, pol in _quants(s):
            x = (q.sort, q.var)
            if (q.kind == "forall") == (pol == "positive") and isinstance(r.entry(x), Plain):
                return _with_entry(r, x, Coded(r.level(x), _const_zero(r, r.level(x))))
        return None
    bound = [(q.sort, q.var) for q, _ in _quants(s)]
    if not bound:
        return None
    x = bound[0]
    ent = r.entry(x)
    return _with_entry(r, x, Plain(0) if isinstance(ent, Plain) else Coded(0, ent.e))


# ------------------------------------------------------------- serialization


def dump_realizer(r: RealizerMap) -> str:
    """``(realizer (v (i plain k | coded k e)...) (w ...))``; the store is written separately."""

    def part(tag, m):
        items = []
        for i in sorted(m):
            ent = m[i]
            items.append(f"({i} plain {ent.k})" if isinstance(ent, Plain) else f"({i} coded {ent.k} {ent.e})")
        return f"({tag}" + "".join(" " + t for t in items) + ")"

    return f"(realizer {part('v', r.v)} {part('w', r.w)})\n"


def load_realizer(text: str, store: CodeStore | None = None) -> RealizerMap:
    from .sexpr import ParseError, head, read_all

    recs = read_all(text)
    if len(recs) != 1 or head(recs[0]) != "realizer":
        raise ParseError("expected one (realizer (v ...) (w ...)) record", None)
    maps = {}
    for part in recs[0].items[1:]:
        tag = head(part)
        if tag not in ("v", "w") or tag in maps:
            raise ParseError("expected (v ...) then (w ...)", getattr(part, "pos", None))
        m = {}
        for it in part.items[1:]:
            toks = [a.text for a in it.items]
            i, kind = int(toks[0]), toks[1]
            if kind == "plain" and len(toks) == 3:
                m[i] = Plain(int(toks[2]))
            elif kind == "coded" and len(toks) == 4:
                m[i] = Coded(int(toks[2]), int(toks[3]))
            else:
                raise ParseError(f"bad realizer entry {toks}", getattr(it, "pos", None))
        maps[tag] = m
    if set(maps) != {"v", "w"}:
        raise ParseError("realizer needs both v and w", None)
    return RealizerMap(maps["v"], maps["w"], store if store is not None else CodeStore())
