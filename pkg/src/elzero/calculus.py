"""Sequents, proof trees and the rule checker for IQC, EL0 and its affine variants."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

from . import axioms
from .syntax import (
    FUN_TERMS, NUM_TERMS, And, Bot, ExistsF, ExistsN, ForallF, ForallN, FunVar, Imp,
    NumVar, CaptureError, alpha_eq, binders, canonical, free_vars, has_function_quantifier,
    is_atomic, subformulas, subst,
)

RULES = (
    "I", "AndL", "AndR", "ImpL", "ImpR", "ForallNL", "ForallNR", "ExistsNL", "ExistsNR",
    "ForallFL", "ForallFR", "ExistsFL", "ExistsFR", "W", "C", "P", "BotRule", "Cut", "AxiomLeaf",
)
ARITY = {r: 1 for r in RULES}
ARITY.update(I=0, AxiomLeaf=0, AndR=2, ImpL=2, Cut=2)
LEFT_RULES = ("AndL", "ImpL", "ForallNL", "ExistsNL", "ForallFL", "ExistsFL", "W", "C")
QUANT_RULES = {
    "ForallNL": (ForallN, "n"), "ForallNR": (ForallN, "n"), "ExistsNL": (ExistsN, "n"),
    "ExistsNR": (ExistsN, "n"), "ForallFL": (ForallF, "f"), "ForallFR": (ForallF, "f"),
    "ExistsFL": (ExistsF, "f"), "ExistsFR": (ExistsF, "f"),
}


@dataclass(frozen=True)
class Sequent:
    antecedent: tuple
    succedent: object

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(self.antecedent))

    def formulas(self) -> tuple:
        return self.antecedent + (self.succedent,)

    def free_vars(self) -> frozenset:
        out: frozenset = frozenset()
        for f in self.formulas():
            out |= free_vars(f)
        return out


@dataclass(frozen=True)
class SystemId:
    base: str = "EL0"  # "IQC" or "EL0"
    markov: bool = False
    restriction: str = "full"  # "full", "affine", "existsAlphaAffine"
    sigma: bool = False  # admit axiom leaves contraction-similar to an axiom

    @staticmethod
    def parse(name: str) -> "SystemId":
        parts = name.lower().split("+")
        head, flags = parts[0], set(parts[1:])
        table = {
            "iqc": ("IQC", "full"), "iqca": ("IQC", "affine"),
            "el0": ("EL0", "full"), "el0a": ("EL0", "affine"), "el0-exa": ("EL0", "existsAlphaAffine"),
        }
        if head not in table or not flags <= {"mp", "sigma"}:
            raise ValueError(f"unknown system {name!r}")
        base, restriction = table[head]
        return SystemId(base, "mp" in flags, restriction, "sigma" in flags)

    def name(self) -> str:
        head = {("IQC", "full"): "iqc", ("IQC", "affine"): "iqca", ("EL0", "full"): "el0",
                ("EL0", "affine"): "el0a", ("EL0", "existsAlphaAffine"): "el0-exa"}[(self.base, self.restriction)]
        return head + ("+mp" if self.markov else "") + ("+sigma" if self.sigma else "")


EL0 = SystemId()
EL0_MP = SystemId(markov=True)


@dataclass(frozen=True)
class ProofTree:
    rule: str
    conclusion: Sequent
    premises: tuple = ()
    principal: tuple = ()
    witness: object = None
    eigen: int | None = None
    schema: str | None = None  # axiom leaves: schema name
    base: object = None  # Sigma leaves: the axiom the formula is contraction-similar to
    chain: tuple | None = None  # Sigma leaves: thickening steps from base

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        object.__setattr__(self, "principal", tuple(self.principal))

    def nodes(self, path=()) -> Iterator[tuple[tuple, "ProofTree"]]:
        """Pre-order ``(path, node)`` pairs; premises are numbered from 0."""
        yield path, self
        for k, p in enumerate(self.premises):
            yield from p.nodes(path + (k,))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def with_premises(self, premises) -> "ProofTree":
        return replace(self, premises=tuple(premises))


def node_id(path) -> str:
    return "root" if not path else "root." + ".".join(map(str, path))


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    node: str | None = None
    rule: str | None = None
    reason: str | None = None

    def __bool__(self):
        return self.accepted


class RuleError(Exception):
    pass


# ------------------------------------------------------------------ axioms


def axiom_schema(phi, sys: SystemId) -> str | None:
    if sys.base == "IQC":
        return None
    return axioms.match_axiom(phi, markov=sys.markov)


def is_axiom(phi, sys: SystemId) -> bool:
    return axiom_schema(phi, sys) is not None


def sigma_member(phi, sys: SystemId):
    """``(schema, base, chain)`` if ``phi`` is contraction-similar to an axiom, else None."""
    from .transform import sigma_base

    if sys.base == "IQC":
        return None
    return sigma_base(phi, markov=sys.markov)


# ------------------------------------------------------------------ rule checking


def _need(cond: bool, msg: str):
    if not cond:
        raise RuleError(msg)


def _check_quant_rule(p: ProofTree, sys: SystemId):
    cls, sort = QUANT_RULES[p.rule]
    c = p.conclusion
    prem = p.premises[0].conclusion
    left = p.rule.endswith("L")
    if left:
        _need(len(c.antecedent) >= 1, "empty antecedent")
        q = c.antecedent[-1]
        _need(prem.antecedent[:-1] == c.antecedent[:-1], "side formulas differ")
        _need(prem.succedent == c.succedent, "succedent differs")
        got = prem.antecedent[-1] if prem.antecedent else None
    else:
        q = c.succedent
        _need(prem.antecedent == c.antecedent, "antecedent differs")
        got = prem.succedent
    _need(isinstance(q, cls), f"principal is not {cls.__name__}")
    var = (sort, q.var)
    instantiating = p.rule in ("ForallNL", "ForallFL", "ExistsNR", "ExistsFR")
    if instantiating:
        t = p.witness
        _need(t is not None, "missing witness term")
        _need(isinstance(t, NUM_TERMS if sort == "n" else FUN_TERMS), "witness has the wrong sort")
        try:
            want = subst(q.body, var, t)
        except CaptureError as exc:
            raise RuleError(f"witness substitution captures: {exc}") from None
        _need(got == want, "premise is not the instance body[x := t]")
        return
    y = q.var if p.eigen is None else p.eigen
    yv = (sort, y)
    term = NumVar(y) if sort == "n" else FunVar(y)
    try:
        want = q.body if y == q.var else subst(q.body, var, term)
    except CaptureError as exc:
        raise RuleError(f"eigenvariable substitution captures: {exc}") from None
    _need(got == want, "premise is not body[x := y]")
    if y != q.var:
        _need(yv not in free_vars(q), "eigenvariable occurs in the principal formula")
    ctx = c.antecedent[:-1] if left else c.antecedent
    for g in ctx:
        _need(yv not in free_vars(g), f"eigenvariable {sort}{y} free in the context")
    if p.rule in ("ExistsNL", "ExistsFL"):
        _need(yv not in free_vars(c.succedent), f"eigenvariable {sort}{y} free in the succedent")


def weakening_targets(proof: ProofTree) -> frozenset:
    """Canonical subformulas of every ExistsF(i, eta) with eta arithmetical in the proof."""
    targets = set()
    for _, node in proof.nodes():
        for g in node.conclusion.formulas():
            for _, h in subformulas(g):
                if isinstance(h, ExistsF) and not has_function_quantifier(h.body):
                    for _, k in subformulas(h):
                        targets.add(canonical(k))
    return frozenset(targets)


def check_rule(p: ProofTree, sys: SystemId, w_targets: frozenset = frozenset()):
    """Raise :class:`RuleError` unless ``p`` is a correct instance of its rule."""
    r = p.rule
    _need(r in ARITY, f"unknown rule {r!r}")
    _need(len(p.premises) == ARITY[r], f"{r} needs {ARITY[r]} premises, got {len(p.premises)}")
    c = p.conclusion
    A, phi = c.antecedent, c.succedent
    prem = [q.conclusion for q in p.premises]
    if r in LEFT_RULES and A and p.principal:
        _need(p.principal == (len(A) - 1,), "left rules act on the last antecedent formula")
    if r == "I":
        _need(len(A) == 1 and A[0] == phi and is_atomic(phi), "I needs A |- A with A atomic")
    elif r == "AxiomLeaf":
        _need(not A, "axiom leaf must have an empty antecedent")
        if axiom_schema(phi, sys) is None:
            _need(sys.sigma, "not an axiom of the system")
            _need(sigma_member(phi, sys) is not None, "not contraction-similar to an axiom")
    elif r == "AndL":
        _need(A and isinstance(A[-1], And), "principal is not a conjunction")
        _need(prem[0].antecedent == A[:-1] + (A[-1].left, A[-1].right), "premise antecedent mismatch")
        _need(prem[0].succedent == phi, "succedent differs")
    elif r == "AndR":
        _need(isinstance(phi, And), "succedent is not a conjunction")
        _need(prem[0].antecedent + prem[1].antecedent == A, "antecedent is not G1,G2")
        _need(prem[0].succedent == phi.left and prem[1].succedent == phi.right, "conjunct mismatch")
    elif r == "ImpL":
        _need(A and isinstance(A[-1], Imp), "principal is not an implication")
        imp = A[-1]
        n1 = len(prem[0].antecedent)
        _need(prem[0].antecedent == A[:n1], "left premise context mismatch")
        _need(prem[1].antecedent == A[n1:-1] + (imp.right,), "right premise antecedent mismatch")
        _need(prem[0].succedent == imp.left, "left premise must prove the antecedent")
        _need(prem[1].succedent == phi, "succedent differs")
        if isinstance(imp.right, Bot):
            _need(isinstance(phi, Bot), "negation on the left needs succedent bot")
    elif r == "ImpR":
        _need(isinstance(phi, Imp), "succedent is not an implication")
        _need(prem[0].antecedent == A + (phi.left,), "premise antecedent mismatch")
        _need(prem[0].succedent == phi.right, "premise succedent mismatch")
    elif r in QUANT_RULES:
        _check_quant_rule(p, sys)
    elif r == "W":
        _need(len(A) >= 1, "nothing weakened")
        _need(prem[0].antecedent == A[:-1] and prem[0].succedent == phi, "W premise mismatch")
        if sys.restriction == "existsAlphaAffine":
            _need(canonical(A[-1]) in w_targets,
                  "W only for subformulas of an existential function formula with arithmetical body")
    elif r == "C":
        _need(sys.restriction != "affine", "contraction is not allowed in an affine system")
        _need(len(A) >= 1, "nothing contracted")
        pa = prem[0].antecedent
        _need(len(pa) == len(A) + 1 and pa[:-2] == A[:-1], "C premise mismatch")
        _need(alpha_eq(pa[-2], A[-1]) and alpha_eq(pa[-1], A[-1]), "contracted copies differ")
        _need(prem[0].succedent == phi, "succedent differs")
        if sys.restriction == "existsAlphaAffine":
            _need(not has_function_quantifier(A[-1]), "contraction on a formula with function quantifiers")
    elif r == "P":
        _need(len(p.principal) == 1, "P needs the swapped position")
        k = p.principal[0]
        _need(0 <= k < len(A) - 1, "swap position out of range")
        pa = list(prem[0].antecedent)
        _need(len(pa) == len(A), "P premise length mismatch")
        pa[k], pa[k + 1] = pa[k + 1], pa[k]
        _need(tuple(pa) == A and prem[0].succedent == phi, "P premise mismatch")
    elif r == "BotRule":
        _need(is_atomic(phi), "bot rule concludes an atomic formula")
        _need(prem[0].antecedent == A and isinstance(prem[0].succedent, Bot), "bot rule premise mismatch")
    elif r == "Cut":
        cut = prem[0].succedent
        _need(prem[1].antecedent and prem[1].antecedent[-1] == cut, "cut formula must end the right premise")
        _need(prem[0].antecedent + prem[1].antecedent[:-1] == A, "cut conclusion is not G1,G2")
        _need(prem[1].succedent == phi, "succedent differs")


def check_proof(p: ProofTree, sys: SystemId) -> CheckResult:
    """Accept iff every node instantiates its rule; reject with the first offending node."""
    targets = weakening_targets(p) if sys.restriction == "existsAlphaAffine" else frozenset()
    for path, node in p.nodes():
        try:
            check_rule(node, sys, targets)
        except RuleError as exc:
            return CheckResult(False, node_id(path), node.rule, str(exc))
        except (TypeError, AttributeError, IndexError) as exc:
            return CheckResult(False, node_id(path), node.rule, f"malformed node: {exc}")
    return CheckResult(True)


def cut_formula(p: ProofTree):
    return p.premises[0].conclusion.succedent


def check_free_cut_free(p: ProofTree, sys: SystemId = EL0_MP) -> bool:
    for _, node in p.nodes():
        if node.rule == "Cut":
            phi = cut_formula(node)
            if axiom_schema(phi, sys) is None and sigma_member(phi, sys) is None:
                return False
    return True


# ------------------------------------------------------------ variable conventions


@dataclass(frozen=True)
class Violation:
    node: str
    kind: str  # "bound-twice", "bound-and-free", "reuse-after-cut"
    var: tuple

    def describe(self) -> str:
        return f"{self.node}: {self.kind} {self.var[0]}{self.var[1]}"


@dataclass
class ConventionReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _sequent_vars(s: Sequent) -> frozenset:
    out: frozenset = frozenset()
    for f in s.formulas():
        out |= free_vars(f) | frozenset(binders(f))
    return out


def _local_problems(s: Sequent) -> set:
    seen: dict = {}
    out = set()
    for f in s.formulas():
        for b in binders(f):
            seen[b] = seen.get(b, 0) + 1
    free = s.free_vars()
    for b, k in seen.items():
        if k > 1:
            out.add(("bound-twice", b))
        if b in free:
            out.add(("bound-and-free", b))
    return out


def _consumed(node: ProofTree) -> frozenset:
    cut = cut_formula(node)
    return frozenset(binders(cut)) - _sequent_vars(node.conclusion)


def check_variable_conventions(p: ProofTree) -> ConventionReport:
    report = ConventionReport()

    def go(node: ProofTree, path) -> tuple:
        # (local problems, indices consumed by cuts at or above node, reuses present here)
        results = [go(q, path + (k,)) for k, q in enumerate(node.premises)]
        probs = _local_problems(node.conclusion)
        inherited = set().union(*(r[0] for r in results)) if results else set()
        for kind, var in sorted(probs - inherited):
            report.violations.append(Violation(node_id(path), kind, var))
        forbidden: frozenset = frozenset().union(*(r[1] for r in results)) if results else frozenset()
        here = _sequent_vars(node.conclusion)
        for v in sorted(here & forbidden):
            if not any(v in r[2] for r in results):
                report.violations.append(Violation(node_id(path), "reuse-after-cut", v))
        bad_here = frozenset(here & forbidden)
        if node.rule == "Cut":
            forbidden = forbidden | _consumed(node)
        return probs, forbidden, bad_here

    go(p, ())
    return report
