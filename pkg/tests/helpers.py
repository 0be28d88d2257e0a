"""Corpus plumbing shared by the realizability and acceptance tests."""

from __future__ import annotations

import random

from elzero import build as B
from elzero.affinize import affinize
from elzero.calculus import EL0_MP, ProofTree, check_proof
from elzero.corpus import CORPUS
from elzero.normalize import normalize
from elzero.realizability import extract_realizer

EXTRACTABLE = [e for e in CORPUS if e.expect["el0+mp"]]


def affine_form(p: ProofTree) -> ProofTree:
    """Affinize when needed, then hoist and prune."""
    if any(n.rule == "C" for _, n in p.nodes()):
        p, _ = affinize(p)
    return normalize(p)


def extracted(entry):
    """``(proof, realizer, sequent)`` for a corpus entry accepted under el0+mp."""
    p = entry.build()
    assert check_proof(p, EL0_MP).accepted
    q = affine_form(p)
    return q, extract_realizer(q), q.conclusion


def _insert(p: ProofTree, path, k: int) -> ProofTree:
    if not path:
        return B.swap(B.swap(p, k), k)
    i = path[0]
    prem = list(p.premises)
    prem[i] = _insert(prem[i], path[1:], k)
    return p.with_premises(tuple(prem))


def pad_permutations(p: ProofTree, seed: int) -> ProofTree | None:
    """``p`` with a swap-and-swap-back pair inserted below a random node with two or more antecedents."""
    sites = [(path, n) for path, n in p.nodes() if len(n.conclusion.antecedent) >= 2]
    if not sites:
        return None
    rng = random.Random(seed)
    path, node = rng.choice(sites)
    return _insert(p, path, rng.randrange(len(node.conclusion.antecedent) - 1))
