"""Reading and writing proof files.

A proof file holds one node expression, optionally wrapped as
``(proof (system <name>) <node>)``::

    (rule <tag> (concl (seq (f ...) f)) (principal k ...) (witness t) (eigen n)
          (schema s) (base f) (chain (step (p ...) f) ...) <premise> ...)
    (axiom <schema> (bind <name> <value>) ...)

The ``axiom`` form builds the leaf from schema parameters.
"""

from __future__ import annotations

from .axioms import instantiate, match_axiom
from .calculus import ProofTree, SystemId
from .sexpr import (
    Atom, ParseError, formula_from_sexpr, head, parse_term, read_all,
    sequent_from_sexpr, show, show_sequent, show_term,
)

_FORMULA_PARAMS = {"B", "A", "A2"}
_INT_PARAMS = {"var", "i", "j", "c", "d", "b", "x"}


def _ints(e) -> tuple:
    return tuple(int(a.text) for a in e.items[1:])


def _bind_value(name: str, e, text: str):
    if name in _FORMULA_PARAMS:
        return formula_from_sexpr(e, text)
    if name in _INT_PARAMS or (name.startswith("a") and name[1:].isdigit()):
        if not isinstance(e, Atom):
            raise ParseError(f"parameter {name} takes an integer", e.pos)
        return int(e.text.lstrip("xa"))
    if name == "f":
        return e.text
    return parse_term(e)


def node_from_sexpr(e, text: str = "") -> ProofTree:
    h = head(e)
    if h == "axiom":
        if len(e.items) < 2 or not isinstance(e.items[1], Atom):
            raise ParseError("axiom needs a schema name", e.pos)
        schema = e.items[1].text
        binds = {}
        for b in e.items[2:]:
            if head(b) != "bind" or len(b.items) != 3:
                raise ParseError("expected (bind name value)", b.pos)
            name = b.items[1].text
            binds[name] = _bind_value(name, b.items[2], text)
        try:
            phi = instantiate(schema, binds)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad axiom instance: {exc}", e.pos) from None
        from .calculus import Sequent

        return ProofTree("AxiomLeaf", Sequent((), phi), schema=match_axiom(phi, markov=True) or schema)
    if h != "rule" or len(e.items) < 3:
        raise ParseError("expected (rule <tag> (concl ...) ...) or (axiom ...)", getattr(e, "pos", 0))
    tag = e.items[1].text
    fields: dict = {}
    premises = []
    for item in e.items[2:]:
        k = head(item)
        if k == "concl":
            fields["conclusion"] = sequent_from_sexpr(item.items[1], text)
        elif k == "principal":
            fields["principal"] = _ints(item)
        elif k == "witness":
            fields["witness"] = parse_term(item.items[1])
        elif k == "eigen":
            fields["eigen"] = int(item.items[1].text.lstrip("xa"))
        elif k == "schema":
            fields["schema"] = item.items[1].text
        elif k == "base":
            fields["base"] = formula_from_sexpr(item.items[1], text)
        elif k == "chain":
            steps = []
            for st in item.items[1:]:
                if head(st) != "step":
                    raise ParseError("expected (step (path ...) formula)", st.pos)
                path = tuple(int(a.text) for a in st.items[1].items)
                steps.append((path, formula_from_sexpr(st.items[2], text)))
            fields["chain"] = tuple(steps)
        elif k in ("rule", "axiom"):
            premises.append(node_from_sexpr(item, text))
        else:
            raise ParseError(f"unknown proof field {k!r}", getattr(item, "pos", 0))
    if "conclusion" not in fields:
        raise ParseError("rule node without (concl ...)", e.pos)
    return ProofTree(tag, premises=tuple(premises), **fields)


def read_proof(text: str) -> tuple[ProofTree, SystemId | None]:
    """Parse a proof file; returns the tree and the declared system, if any."""
    items = read_all(text)
    if len(items) != 1:
        raise ParseError(f"expected one proof expression, found {len(items)}", 0)
    e = items[0]
    system = None
    if head(e) == "proof":
        rest = []
        for x in e.items[1:]:
            if head(x) == "system":
                system = SystemId.parse(x.items[1].text)
            elif head(x) in ("comment", "expect"):
                continue
            else:
                rest.append(x)
        if len(rest) != 1:
            raise ParseError("proof wrapper must hold exactly one node", e.pos)
        e = rest[0]
    return node_from_sexpr(e, text), system


def proof_expectations(text: str) -> dict:
    """``(expect <system> accept|reject)`` annotations of a wrapped proof file."""
    out = {}
    for e in read_all(text):
        if head(e) == "proof":
            for x in e.items[1:]:
                if head(x) == "expect":
                    out[x.items[1].text] = x.items[2].text
    return out


def show_proof(p: ProofTree, indent: int = 0) -> str:
    pad = " " * indent
    parts = [f"(rule {p.rule} (concl {show_sequent(p.conclusion)})"]
    if p.principal:
        parts.append("(principal " + " ".join(map(str, p.principal)) + ")")
    if p.witness is not None:
        parts.append(f"(witness {show_term(p.witness)})")
    if p.eigen is not None:
        parts.append(f"(eigen {p.eigen})")
    if p.schema is not None:
        parts.append(f"(schema {p.schema})")
    if p.base is not None:
        parts.append(f"(base {show(p.base)})")
    if p.chain:
        steps = " ".join(f"(step ({' '.join(map(str, path))}) {show(chi)})" for path, chi in p.chain)
        parts.append(f"(chain {steps})")
    out = pad + " ".join(parts)
    for q in p.premises:
        out += "\n" + show_proof(q, indent + 2)
    return out + ")"


def write_proof(p: ProofTree, system: SystemId | None = None, expect: dict | None = None) -> str:
    if system is None and not expect:
        return show_proof(p) + "\n"
    lines = ["(proof"]
    if system is not None:
        lines.append(f"  (system {system.name()})")
    for name, verdict in (expect or {}).items():
        lines.append(f"  (expect {name} {verdict})")
    lines.append(show_proof(p, 2) + ")")
    return "\n".join(lines) + "\n"

