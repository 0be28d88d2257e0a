"""Axiom schemas: recognition by syntactic matching and instantiation."""

from __future__ import annotations

from . import prims
from .syntax import (
    ZERO, And, Bot, Eq, ExistsF, ExistsN, ForallN, FunApp, FunVar, Imp, Lambda,
    NumVar, PrimApp, Rec, Succ, Zero, free_vars, fv, is_quantifier_free, neg, num, nv,
    subst, subst_term, term_children,
)

# schemas whose instances carry bound variables; all others are quantifier-free
QUANTIFIED = ("qf-ia", "qf-ac", "mp")


def _numeral_value(t):
    k = 0
    while isinstance(t, Succ):
        t, k = t.arg, k + 1
    return k if isinstance(t, Zero) else None


def _diff_ok(a, b, s, t) -> bool:
    """Is ``b`` obtained from ``a`` by replacing some occurrences of ``s`` by ``t``?"""
    if a == b:
        return True
    if a == s and b == t:
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, PrimApp) and (a.name != b.name or len(a.args) != len(b.args)):
        return False
    if isinstance(a, Lambda) and a.binder != b.binder:
        return False
    ka, kb = term_children(a), term_children(b)
    if len(ka) != len(kb) or not ka:
        return False
    return all(_diff_ok(x, y, s, t) for x, y in zip(ka, kb))


def _match_equality(phi) -> str | None:
    if isinstance(phi, Eq) and phi.left == phi.right:
        return "refl"
    if not isinstance(phi, Imp) or not isinstance(phi.left, Eq):
        return None
    s, t = phi.left.left, phi.left.right
    r = phi.right
    if isinstance(r, Eq):
        if r.left == t and r.right == s:
            return "sym"
        if isinstance(r.left, Succ) and isinstance(r.right, Succ) and r.left.arg == s and r.right.arg == t:
            return "cong-succ"
        if r.left != r.right and _diff_ok(r.left, r.right, s, t):
            # f(..s..) = f(..t..) over a shared context
            return "cong"
    if isinstance(r, Imp) and isinstance(r.left, Eq) and isinstance(r.right, Eq):
        if r.left.left == t and r.right == Eq(s, r.left.right):
            return "trans"
        a, b = r.left, r.right
        if _diff_ok(a.left, b.left, s, t) and _diff_ok(a.right, b.right, s, t):
            return "leibniz"
    return None


def _match_sa(phi) -> bool:
    if not isinstance(phi, And):
        return False
    l, r = phi.left, phi.right
    if not (isinstance(l, Imp) and isinstance(l.right, Bot) and isinstance(l.left, Eq)):
        return False
    if not (isinstance(l.left.left, Succ) and l.left.right == ZERO):
        return False
    t = l.left.left.arg
    if not (isinstance(r, Imp) and isinstance(r.left, Eq) and isinstance(r.right, Eq)):
        return False
    a, b = r.left.left, r.left.right
    return (isinstance(a, Succ) and isinstance(b, Succ) and a.arg == t
            and r.right == Eq(t, b.arg))


def _match_qf_ia(phi) -> bool:
    if not (isinstance(phi, Imp) and isinstance(phi.left, ForallN) and isinstance(phi.right, ForallN)):
        return False
    step, concl = phi.left, phi.right
    if not (isinstance(step.body, Imp) and isinstance(concl.body, Imp)):
        return False
    i, j = step.var, concl.var
    if i == j:
        return False
    B = concl.body.right  # B(x_j)
    if not is_quantifier_free(B):
        return False
    try:
        if concl.body.left != subst(B, nv(j), ZERO):
            return False
        if step.body.left != subst(B, nv(j), NumVar(i)):
            return False
        if step.body.right != subst(B, nv(j), Succ(NumVar(i))):
            return False
    except Exception:
        return False
    # x_i must not already occur in B
    return nv(i) not in free_vars(B)


def _match_con(phi) -> bool:
    if not (isinstance(phi, Eq) and isinstance(phi.left, FunApp) and isinstance(phi.left.fun, Lambda)):
        return False
    lam = phi.left.fun
    try:
        return phi.right == subst_term(lam.body, nv(lam.binder), phi.left.arg)
    except Exception:
        return False


def _match_rec(phi) -> bool:
    if not (isinstance(phi, And) and isinstance(phi.left, Eq) and isinstance(phi.right, Eq)):
        return False
    a, b = phi.left, phi.right
    if not (isinstance(a.left, FunApp) and isinstance(a.left.fun, Rec) and a.left.arg == ZERO):
        return False
    R = a.left.fun
    if a.right != R.base:
        return False
    if not (isinstance(b.left, FunApp) and b.left.fun == R and isinstance(b.left.arg, Succ)):
        return False
    t2 = b.left.arg.arg
    return b.right == FunApp(R.step, FunApp(R, t2))


def _match_qf_ac(phi) -> bool:
    if not (isinstance(phi, Imp) and isinstance(phi.left, ForallN) and isinstance(phi.left.body, ExistsN)):
        return False
    if not (isinstance(phi.right, ExistsF) and isinstance(phi.right.body, ForallN)):
        return False
    c, d = phi.left.var, phi.left.body.var
    B = phi.left.body.body
    i, b = phi.right.var, phi.right.body.var
    if not is_quantifier_free(B) or len({c, d, b}) != 3:
        return False
    if fv(i) in free_vars(B) or nv(b) in free_vars(B):
        return False
    try:
        target = subst(subst(B, nv(c), NumVar(b)), nv(d), FunApp(FunVar(i), NumVar(b)))
    except Exception:
        return False
    return phi.right.body.body == target


def _match_mp(phi) -> bool:
    if not isinstance(phi, Imp) or not isinstance(phi.right, ExistsN):
        return False
    l = phi.left
    if not (isinstance(l, Imp) and isinstance(l.right, Bot) and isinstance(l.left, Imp)
            and isinstance(l.left.right, Bot) and isinstance(l.left.left, ExistsN)):
        return False
    inner = l.left.left
    B = inner.body
    if not is_quantifier_free(B):
        return False
    b, c = inner.var, phi.right.var
    if b != c and nv(c) in free_vars(B):
        return False
    try:
        return phi.right.body == subst(B, nv(b), NumVar(c))
    except Exception:
        return False


def _match_prim(phi) -> str | None:
    if not isinstance(phi, Eq) or not isinstance(phi.left, PrimApp):
        return None
    lhs, rhs = phi.left, phi.right
    name = lhs.name
    vals = [_numeral_value(a) for a in lhs.args]
    if all(v is not None for v in vals) and _numeral_value(rhs) == prims.apply(name, vals):
        return f"{name}-eval"
    a = lhs.args
    if name in ("add", "mul", "monus") and len(a) == 2:
        t, s = a
        if s == ZERO:
            want = {"add": t, "mul": ZERO, "monus": t}[name]
            return f"{name}-zero" if rhs == want else None
        if isinstance(s, Succ):
            s0 = s.arg
            want = {
                "add": Succ(PrimApp("add", (t, s0))),
                "mul": PrimApp("add", (PrimApp("mul", (t, s0)), t)),
                "monus": PrimApp("pred", (PrimApp("monus", (t, s0)),)),
            }[name]
            return f"{name}-succ" if rhs == want else None
    if name == "pred" and len(a) == 1:
        if a[0] == ZERO and rhs == ZERO:
            return "pred-zero"
        if isinstance(a[0], Succ) and rhs == a[0].arg:
            return "pred-succ"
    return None


def match_axiom(phi, markov: bool = False) -> str | None:
    """Name of the schema ``phi`` instantiates, or None."""
    name = _match_equality(phi)
    if name:
        return name
    name = _match_prim(phi)
    if name:
        return name
    if _match_con(phi):
        return "con"
    if _match_rec(phi):
        return "rec"
    if _match_sa(phi):
        return "sa"
    if _match_qf_ia(phi):
        return "qf-ia"
    if _match_qf_ac(phi):
        return "qf-ac"
    if markov and _match_mp(phi):
        return "mp"
    return None


# ----------------------------------------------------------------- instantiation


def qf_ia(B, var: int, i: int, j: int):
    """Induction for ``B(x_var)``; bound variables ``x_i`` (step) and ``x_j``."""
    Bj = subst(B, nv(var), NumVar(j))
    return Imp(
        ForallN(i, Imp(subst(B, nv(var), NumVar(i)), subst(B, nv(var), Succ(NumVar(i))))),
        ForallN(j, Imp(subst(B, nv(var), ZERO), Bj)),
    )


def qf_ac(B, c: int, d: int, i: int, b: int):
    """Choice for ``B(x_c, x_d)``."""
    body = subst(subst(B, nv(c), NumVar(b)), nv(d), FunApp(FunVar(i), NumVar(b)))
    return Imp(ForallN(c, ExistsN(d, B)), ExistsF(i, ForallN(b, body)))


def mp(B, b: int, c: int):
    """Markov for ``B(x_b)``; the conclusion binds ``x_c``."""
    return Imp(neg(neg(ExistsN(b, B))), ExistsN(c, subst(B, nv(b), NumVar(c))))


def sa(t, s):
    return And(neg(Eq(Succ(t), ZERO)), Imp(Eq(Succ(t), Succ(s)), Eq(t, s)))


def con(x: int, body, arg):
    return Eq(FunApp(Lambda(x, body), arg), subst_term(body, nv(x), arg))


def rec(base, step, arg):
    R = Rec(base, step)
    return And(Eq(FunApp(R, ZERO), base), Eq(FunApp(R, Succ(arg)), FunApp(step, FunApp(R, arg))))


def refl(t):
    return Eq(t, t)


def sym(t, s):
    return Imp(Eq(t, s), Eq(s, t))


def trans(t, s, r):
    return Imp(Eq(t, s), Imp(Eq(s, r), Eq(t, r)))


def cong_succ(t, s):
    return Imp(Eq(t, s), Eq(Succ(t), Succ(s)))


def leibniz(t, s, atom, atom2):
    return Imp(Eq(t, s), Imp(atom, atom2))


def prim_eval(name: str, *values: int):
    return Eq(PrimApp(name, tuple(num(v) for v in values)), num(prims.apply(name, list(values))))


SCHEMAS = {
    "qf-ia": (qf_ia, ("B", "var", "i", "j")),
    "qf-ac": (qf_ac, ("B", "c", "d", "i", "b")),
    "mp": (mp, ("B", "b", "c")),
    "sa": (sa, ("t", "s")),
    "con": (con, ("x", "body", "arg")),
    "rec": (rec, ("base", "step", "arg")),
    "refl": (refl, ("t",)),
    "sym": (sym, ("t", "s")),
    "trans": (trans, ("t", "s", "r")),
    "cong-succ": (cong_succ, ("t", "s")),
    "leibniz": (leibniz, ("t", "s", "A", "A2")),
}


def instantiate(schema: str, binds: dict):
    """Build the instance of ``schema`` from named bindings."""
    if schema == "eval":
        name = binds["f"]
        args = [binds[k] for k in sorted(k for k in binds if k.startswith("a"))]
        return prim_eval(name, *args)
    if schema not in SCHEMAS:
        raise KeyError(f"unknown axiom schema {schema!r}")
    fn, params = SCHEMAS[schema]
    missing = [p for p in params if p not in binds]
    if missing:
        raise KeyError(f"schema {schema} missing bindings {missing}")
    return fn(*(binds[p] for p in params))
