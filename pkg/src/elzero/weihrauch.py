"""Weihrauch reductions to compositions of a problem, checked on sampled instances.

A problem is a Pi^1_2 statement ``forall a (xi(a) -> exists b psi(a, b))``
together with an instance generator and a solution oracle.  A witness is a
list of indices ``e_1 .. e_{n+1}``; ``e_j`` takes ``a_0, a_1, .., a_{j-1},
b_1, .., b_{j-1}`` (``2j - 1`` function arguments, no numbers).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .oml import (
    DEFAULT_FUEL, Call, CodeStore, ComputedFunction, ConstNat, FunArg, FunLambda, Local,
    apply_with_usage, reachable_slots,
)
from .semantics import DEFAULT_BOUND, FAILS, HOLDS, UNKNOWN, Ternary, truth
from .sexpr import parse_formula
from .syntax import FiniteTable, NotConverged, Valuation


class ReductionError(Exception):
    pass


# ------------------------------------------------------------------ problems


@dataclass(frozen=True)
class Problem:
    name: str
    alpha: int
    xi: object
    beta: int
    psi: object
    generate: Callable  # (rng, bound) -> function satisfying xi
    solve: Callable  # (alpha function, bound) -> function satisfying psi

    def xi_holds(self, f, bound: int = DEFAULT_BOUND) -> Ternary:
        return truth(self.xi, Valuation({self.alpha: f}, {}), bound)

    def psi_holds(self, f, g, bound: int = DEFAULT_BOUND) -> Ternary:
        return truth(self.psi, Valuation({self.alpha: f, self.beta: g}, {}), bound)


SEARCH_LIMIT = 4096


def _least(pred, limit: int = SEARCH_LIMIT) -> int:
    for y in range(limit):
        if pred(y):
            return y
    raise NotConverged("oracle search limit reached")


class _Memo:
    """A solution computed on demand and cached."""

    def __init__(self, fn):
        self.fn, self.cache = fn, {}

    def __call__(self, a: int) -> int:
        if a not in self.cache:
            self.cache[a] = self.fn(a)
        return self.cache[a]


def _random_table(rng: random.Random, bound: int) -> FiniteTable:
    return FiniteTable([rng.randint(0, bound) for _ in range(rng.randint(0, bound))])


def _zero_rich_table(rng: random.Random, bound: int) -> FiniteTable:
    return FiniteTable([rng.choice([0, rng.randint(1, bound)]) for _ in range(rng.randint(0, bound))])


def _first_zero(f, bound):
    z = _least(lambda y: f(y) == 0)
    return FiniteTable([z])


def _two_zeros(f, bound):
    z1 = _least(lambda y: f(y) == 0)
    z2 = _least(lambda y: y > z1 and f(y) == 0)
    return FiniteTable([z1, z2])


def _choice(f, bound):
    return _Memo(lambda x: _least(lambda y: f(x + y) == 0))


_LIBRARY = {
    "id": ("(eq 0 0)", "(alln x1 (eq (app a2 x1) (app a1 x1)))", _random_table,
           lambda f, bound: f),
    "first-zero": (
        "(exn x1 (eq (app a1 x1) 0))",
        "(and (eq (app a1 (app a2 0)) 0)"
        " (alln x1 (imp (eq (prim ltc x1 (app a2 0)) 1) (not (eq (app a1 x1) 0)))))",
        _zero_rich_table, _first_zero),
    "two-zeros": (
        "(exn x1 (exn x2 (and (eq (prim ltc x1 x2) 1) (and (eq (app a1 x1) 0) (eq (app a1 x2) 0)))))",
        "(and (eq (prim ltc (app a2 0) (app a2 1)) 1)"
        " (and (eq (app a1 (app a2 0)) 0) (eq (app a1 (app a2 1)) 0)))",
        _zero_rich_table, _two_zeros),
    "choice": ("(alln x1 (exn x2 (eq (app a1 (prim add x1 x2)) 0)))",
               "(alln x1 (eq (app a1 (prim add x1 (app a2 x1))) 0))",
               _zero_rich_table, _choice),
}


def get_problem(name: str) -> Problem:
    try:
        xi, psi, gen, solve = _LIBRARY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(sorted(_LIBRARY))}") from None
    return Problem(name, 1, parse_formula(xi), 2, parse_formula(psi), gen, solve)


def problem_names() -> list:
    return sorted(_LIBRARY)


# ------------------------------------------------------------------ witnesses


@dataclass
class WeihrauchWitness:
    store: CodeStore
    indices: tuple  # e_1 .. e_{n+1}

    @property
    def n(self) -> int:
        return len(self.indices) - 1

    def arity_problems(self) -> list:
        bad = []
        for j, e in enumerate(self.indices, start=1):
            if self.store.signature(e) != (2 * j - 1, 0):
                bad.append((j, self.store.signature(e)))
        return bad

    def dump(self) -> str:
        body = " ".join(f"(e {j} {e})" for j, e in enumerate(self.indices, start=1))
        return f"(witness (n {self.n}) {body})\n"


def load_witness(text: str, store: CodeStore) -> WeihrauchWitness:
    from .sexpr import head, read_one

    e = read_one(text)
    if head(e) != "witness":
        raise ValueError("expected (witness (n k) (e 1 idx) ...)")
    n = None
    idx = {}
    for item in e.items[1:]:
        if head(item) == "n":
            n = int(item.items[1].text)
        elif head(item) == "e":
            idx[int(item.items[1].text)] = int(item.items[2].text)
    if n is None or sorted(idx) != list(range(1, n + 2)):
        raise ValueError("witness must list e 1 .. e n+1")
    return WeihrauchWitness(store, tuple(idx[j] for j in range(1, n + 2)))


@dataclass
class StageRecord:
    alpha: tuple  # values on 0..B
    beta: tuple
    xi: Ternary
    fuel_used: int = 0


@dataclass
class RunTrace:
    trial: int
    alpha0: tuple
    stages: list = field(default_factory=list)
    beta0: tuple = ()
    verdict: Ternary = HOLDS
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "trial": self.trial, "verdict": self.verdict.value, "reason": self.reason,
            "alpha0": list(self.alpha0), "beta0": list(self.beta0),
            "stages": [{"alpha": list(s.alpha), "beta": list(s.beta), "xi": s.xi.value,
                        "fuel": s.fuel_used} for s in self.stages],
        }


@dataclass
class ReductionReport:
    traces: list

    def count(self, t: Ternary) -> int:
        return sum(1 for tr in self.traces if tr.verdict is t)

    @property
    def verdict(self) -> Ternary:
        return Ternary.all(tr.verdict for tr in self.traces)


def _sample(f, bound: int) -> tuple:
    out = []
    for a in range(bound + 1):
        try:
            out.append(f(a))
        except NotConverged:
            out.append(None)
    return tuple(out)


def _fuel_used(f: ComputedFunction, bound: int) -> int:
    total = 0
    for x in range(bound + 1):
        total += apply_with_usage(f.store, f.e, f.funs, f.nums, x, f.fuel)[1]
    return total


def run_trial(wit: WeihrauchWitness, p0: Problem, chain, alpha0, trial: int = 0,
              bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL, oracle=None) -> RunTrace:
    """One pass through the composition dataflow starting from ``alpha0``."""
    tr = RunTrace(trial, _sample(alpha0, bound))
    alphas, betas = [alpha0], []
    for i, P in enumerate(chain, start=1):
        a = ComputedFunction(wit.store, wit.indices[i - 1], alphas + betas, [], fuel)
        xi = P.xi_holds(a, bound)
        rec = StageRecord(_sample(a, bound), (), xi, _fuel_used(a, bound))
        tr.stages.append(rec)
        if xi is not HOLDS:
            tr.verdict = xi
            tr.reason = f"stage {i}: xi {'unknown' if xi is UNKNOWN else 'false'} on the query"
            return tr
        try:
            b = P.solve(a, bound) if oracle is None else oracle(i, a, bound)
            rec.beta = _sample(b, bound)
        except NotConverged as exc:
            tr.verdict, tr.reason = UNKNOWN, f"stage {i}: oracle did not converge ({exc})"
            return tr
        alphas.append(a)
        betas.append(b)
    b0 = ComputedFunction(wit.store, wit.indices[-1], alphas + betas, [], fuel)
    tr.beta0 = _sample(b0, bound)
    psi = p0.psi_holds(alpha0, b0, bound)
    tr.verdict = psi
    if psi is not HOLDS:
        tr.reason = "final answer does not solve the instance" if psi is FAILS else "final answer unknown"
    return tr


def check_reduction(wit: WeihrauchWitness, p0: Problem, chain, trials: int = 100,
                    bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL, seed: int = 0,
                    instances=None, jobs: int = 1) -> ReductionReport:
    """Run ``trials`` instances of ``p0`` through the witness and the chain's oracles.

    Instances are drawn up front from ``seed``, so the report does not depend on ``jobs``.
    """
    chain = list(chain)
    if len(chain) != wit.n:
        raise ReductionError(f"witness composes {wit.n} stages but the chain has {len(chain)}")
    if wit.arity_problems():
        raise ReductionError(f"witness signatures do not follow the convention: {wit.arity_problems()}")
    rng = random.Random(seed)
    pool = list(instances or [])
    alphas = [pool[t] if t < len(pool) else p0.generate(rng, bound) for t in range(trials)]

    def one(t):
        return run_trial(wit, p0, chain, alphas[t], t, bound, fuel)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            traces = list(ex.map(one, range(trials)))
    else:
        traces = [one(t) for t in range(trials)]
    return ReductionReport(traces)


# ------------------------------------------------------------------ compilation


class CompileError(Exception):
    pass


def _stage_program(sr, x, j: int) -> Call:
    """A call of ``x``'s code in the convention of stage ``j`` (``2j - 1`` function arguments)."""
    from .realizability import Coded

    r = sr.r
    position = {("f", sr.zero.alpha): 0}
    for i, st in enumerate(sr.stages[: j - 1], start=1):
        position[("f", st.alpha)] = i
        position[("f", st.beta)] = j - 1 + i

    def build(var, input_):
        ent = r.entry(var)
        if not isinstance(ent, Coded):
            raise CompileError(f"{var} has no code to compile")
        args = r.args_below(ent.k)
        fs = [a for a in args if a[0] == "f"]
        ns = [a for a in args if a[0] == "n"]
        live = reachable_slots(r.store, ent.e)
        funs = []
        for k, y in enumerate(fs):
            if ("f", k) not in live:
                funs.append(FunLambda(ConstNat(0)))
            elif y in position:
                funs.append(FunArg(position[y]))
            else:
                raise CompileError(f"stage {j} reads {y}, which is not available at that stage")
        nums = []
        for k, y in enumerate(ns):
            if ("n", k) not in live or r.level(y) == 0:
                nums.append(ConstNat(0))
            elif isinstance(r.entry(y), Coded):
                nums.append(build(y, ConstNat(0)))
            else:
                raise CompileError(f"stage {j} reads the plain number variable {y}")
        return Call(ent.e, tuple(funs), tuple(nums), input_)

    return build(x, Local(0))


def compile_witnesses(sr) -> WeihrauchWitness:
    """Indices ``e_1 .. e_{n+1}`` from a verified strong realizer."""
    store = sr.r.store
    out = []
    targets = [("f", st.alpha) for st in sr.stages] + [("f", sr.zero.beta)]
    for j, x in enumerate(targets, start=1):
        out.append(store.add(_stage_program(sr, x, j), 2 * j - 1, 0))
    wit = WeihrauchWitness(store, tuple(out))
    assert not wit.arity_problems()
    return wit


# ------------------------------------------------------------------ pipelines


class PipelineError(Exception):
    def __init__(self, stage: str, msg: str):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage


@dataclass
class PipelineResult:
    witness: WeihrauchWitness
    strong: object
    report: ReductionReport | None
    affine_proof: object = None


def _stage(name: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except PipelineError:
        raise
    except Exception as exc:  # tag and re-raise any stage failure
        raise PipelineError(name, f"{type(exc).__name__}: {exc}") from exc


def _finish(q, p0, chain, trials, bound, fuel, seed, affine_proof=None, max_n=None, jobs=1):
    from .realizability import extract_strong_realizer

    sr = _stage("extract", extract_strong_realizer, q, bound=bound, fuel=fuel)
    if max_n is not None and sr.n > max_n:
        raise PipelineError("affine", f"{sr.n} antecedent copies survive; an affine proof promises at most {max_n}")
    wit = _stage("compile", compile_witnesses, sr)
    report = None
    if p0 is not None:
        if isinstance(chain, Problem) or chain is None:
            chain = [chain] * wit.n if chain is not None else []
        report = _stage("check", check_reduction, wit, p0, chain, trials, bound, fuel, seed, jobs=jobs)
    return PipelineResult(wit, sr, report, affine_proof)


def run_pipeline(p, p0: Problem | None = None, chain=None, trials: int = 100,
                 bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL, seed: int = 0,
                 jobs: int = 1) -> PipelineResult:
    """Affinize, normalize, extract, compile and check a proof of ``zeta_1, .., zeta_1 |- zeta_0``.

    ``chain`` is one problem (repeated for every surviving copy) or a list.
    """
    from .affinize import affinize
    from .calculus import EL0_MP, check_proof
    from .syntax import number_negative_violations

    res = check_proof(p, EL0_MP)
    if not res.accepted:
        raise PipelineError("check", f"proof rejected at {res.node}: {res.reason}")
    bad = _stage("check", number_negative_violations, p.conclusion.antecedent, p.conclusion.succedent)
    if bad:
        raise PipelineError("check", f"not number-negative: first-order quantifier outside negation at {bad}")
    q, _links = _stage("affinize", affinize, p)
    return _finish(q, p0, chain, trials, bound, fuel, seed, affine_proof=q, jobs=jobs)


def run_affine_pipeline(p, p0: Problem | None = None, chain=None, trials: int = 100,
                        bound: int = DEFAULT_BOUND, fuel: int = DEFAULT_FUEL, seed: int = 0,
                        jobs: int = 1) -> PipelineResult:
    """The pipeline for proofs in the existential-affine system: no affinization and exactly one stage."""
    from .affinize import affinize
    from .calculus import SystemId, check_proof
    from .syntax import number_negative_violations

    res = check_proof(p, SystemId.parse("el0-exa+mp"))
    if not res.accepted:
        raise PipelineError("check", f"proof rejected at {res.node}: {res.reason}")
    bad = _stage("check", number_negative_violations, p.conclusion.antecedent, p.conclusion.succedent)
    if bad:
        raise PipelineError("check", f"not number-negative: first-order quantifier outside negation at {bad}")
    q = p
    if any(n.rule == "C" for _, n in p.nodes()):
        q, _links = _stage("affinize", affinize, p)
    return _finish(q, p0, chain, trials, bound, fuel, seed, affine_proof=q, max_n=1, jobs=jobs)
