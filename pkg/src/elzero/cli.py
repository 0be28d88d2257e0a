"""Command-line frontend.

Machine-readable output is JSON lines on stdout (keys sorted, no timings);
human summaries go to stderr.  Exit codes: 0 Holds/accepted, 1 Fails/rejected,
2 Unknown, 3 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .oml import DEFAULT_FUEL
from .semantics import DEFAULT_BOUND, FAILS, HOLDS, Ternary

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _exit_for(t: Ternary) -> int:
    return {HOLDS: EXIT_OK, FAILS: EXIT_FAIL}.get(t, EXIT_UNKNOWN)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _note(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _header(cmd: str, args, **extra) -> dict:
    # --jobs is left out: reports must not depend on it
    cfg = {k: getattr(args, k) for k in ("bound", "fuel", "seed", "trials", "system") if hasattr(args, k)}
    cfg.update(extra)
    return {"header": {"command": cmd, **{k: v for k, v in sorted(cfg.items())}}}


def _load_proof(path: str):
    from .proofio import read_proof

    return read_proof(_read(path))


def _load_store(path: str):
    from .oml import load_store

    return load_store(_read(path))


def _store_path(out: str, given: str | None) -> str:
    return given if given else out + ".store"


def _problems(p0: str | None, chain: str | None):
    from .weihrauch import get_problem

    try:
        P0 = get_problem(p0) if p0 else None
        names = [c for c in (chain or "").split(",") if c]
        C = [get_problem(c) for c in names]
    except KeyError as exc:
        raise UsageError(str(exc).strip("'\"")) from None
    if len(C) == 1:
        return P0, C[0]
    return P0, C


def _has_contraction(p) -> bool:
    return any(n.rule == "C" for _, n in p.nodes())


# ------------------------------------------------------------------ commands


def cmd_parse(args) -> int:
    from .proofio import read_proof, show_proof
    from .sexpr import ParseError, head, read_one, show, show_sequent
    from .sexpr import parse_formula, sequent_from_sexpr

    text = _read(args.file)
    try:
        e = read_one(text)
        h = head(e)
        if h in ("proof", "rule", "axiom"):
            p, _ = read_proof(text)
            kind, out = "proof", show_proof(p)
        elif h == "seq":
            kind, out = "sequent", show_sequent(sequent_from_sexpr(e, text))
        else:
            kind, out = "formula", show(parse_formula(text))
    except (ParseError, ValueError) as exc:
        _emit({"file": args.file, "parsed": False, "error": str(exc)})
        return EXIT_FAIL
    _emit({"file": args.file, "parsed": True, "kind": kind})
    sys.stderr.write(out + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    from .calculus import SystemId, check_proof

    p, declared = _load_proof(args.file)
    if args.system:
        try:
            sys_id = SystemId.parse(args.system)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        sys_id = declared or SystemId()
    res = check_proof(p, sys_id)
    _emit({"file": args.file, "system": sys_id.name(), "accepted": res.accepted,
           "node": res.node, "rule": res.rule, "reason": res.reason})
    if res.accepted:
        _note(f"accepted under {sys_id.name()}")
        return EXIT_OK
    _note(f"rejected under {sys_id.name()} at node {res.node} ({res.rule}): {res.reason}")
    return EXIT_FAIL


def cmd_normalize(args) -> int:
    from .normalize import hoist_cuts, normalize, prune_weakened_cuts
    from .proofio import write_proof

    p, declared = _load_proof(args.file)
    if args.hoist and not args.prune:
        q = hoist_cuts(p)
    elif args.prune and not args.hoist:
        q = prune_weakened_cuts(p)
    else:
        q = normalize(p)
    text = write_proof(q, declared)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    _note(f"{sum(1 for _ in p.nodes())} nodes in, {sum(1 for _ in q.nodes())} nodes out")
    return EXIT_OK


def cmd_affinize(args) -> int:
    from .affinize import AffinizeError, affinize
    from .proofio import write_proof

    p, declared = _load_proof(args.file)
    try:
        q, links = affinize(p, markov=not args.no_markov)
    except AffinizeError as exc:
        _emit({"file": args.file, "affinized": False, "error": str(exc)})
        return EXIT_FAIL
    table = "".join(f"{k} -> {i} chain {n}\n" for k, i, n in links.table())
    _write(args.output, write_proof(q, declared))
    _write(args.output + ".links", table)
    _emit({"file": args.file, "affinized": True, "output": args.output,
           "links": [list(t) for t in links.table()]})
    return EXIT_OK


def _formula_arg(path: str):
    from .sexpr import parse_formula

    return parse_formula(_read(path))


def cmd_kuroda(args) -> int:
    from .sexpr import show
    from .transform import kuroda

    phi = _formula_arg(args.file)
    _emit({"file": args.file, "kuroda": show(kuroda(phi))})
    return EXIT_OK


def cmd_prime(args) -> int:
    from .sexpr import show
    from .syntax import classify_pi12
    from .transform import prime_pi12

    phi = _formula_arg(args.file)
    parts = classify_pi12(phi)
    if parts is None:
        _emit({"file": args.file, "pi12": False})
        _note("not of the form forall a (xi -> exists b psi)")
        return EXIT_FAIL
    q = prime_pi12(parts)
    _emit({"file": args.file, "pi12": True, "alpha": q.alpha, "beta": q.beta,
           "xi": show(q.xi), "psi": show(q.psi)})
    return EXIT_OK


def _sample(f, bound: int) -> list:
    from .syntax import NotConverged

    out = []
    for a in range(bound + 1):
        try:
            out.append(f(a))
        except NotConverged:
            out.append(None)
    return out


def _valuation(sigma, bound: int) -> dict | None:
    if sigma is None:
        return None
    return {"funs": {str(i): _sample(f, bound) for i, f in sorted(sigma.funs.items())},
            "nums": {str(j): a for j, a in sorted(sigma.nums.items())}}


def cmd_extract(args) -> int:
    from .affinize import AffinizeError, affinize
    from .normalize import normalize
    from .oml import dump_store
    from .sexpr import show_sequent
    from .realizability import (
        ExtractionError, StrongRealizerError, dump_realizer, extract_realizer, extract_strong_realizer,
    )

    p, _ = _load_proof(args.file)
    try:
        if _has_contraction(p):
            p, _links = affinize(p)
            _note("proof has contractions: affinized first")
        if args.strong:
            sr = extract_strong_realizer(p, bound=args.bound, fuel=args.fuel, seed=args.seed)
            r, seq, extra = sr.r, sr.sequent, {"positions": list(sr.positions), "n": sr.n}
        else:
            q = normalize(p)
            r, seq, extra = extract_realizer(q), q.conclusion, {}
    except (AffinizeError, ExtractionError, StrongRealizerError) as exc:
        _emit({"file": args.file, "extracted": False, "error": str(exc)})
        return EXIT_FAIL
    store = _store_path(args.output, args.store)
    _write(args.output, dump_realizer(r))
    _write(store, dump_store(r.store))
    _write(args.output + ".seq", show_sequent(seq) + "\n")
    _emit({"file": args.file, "extracted": True, "realizer": args.output, "store": store,
           "sequent": args.output + ".seq", **extra})
    return EXIT_OK


def _sequent_arg(path: str):
    from .proofio import read_proof
    from .sexpr import head, parse_sequent, read_one

    text = _read(path)
    if head(read_one(text)) in ("proof", "rule"):
        return read_proof(text)[0].conclusion
    return parse_sequent(text)


def cmd_check_real(args) -> int:
    from .realizability import check_realizes_report, load_realizer, standard_suite

    store = _load_store(_store_path(args.realizer, args.store))
    r = load_realizer(_read(args.realizer), store)
    s = _sequent_arg(args.sequent)
    suite = standard_suite(r, s, args.suite, args.seed, args.bound, args.fuel)
    rep = check_realizes_report(r, s, suite, args.bound, args.fuel)
    _emit(_header("check-real", args, suite=args.suite))
    _emit({"verdict": rep.verdict.value, "checked": rep.checked, "vacuous": rep.vacuous,
           "unknown": rep.unknown, "reasons": [list(map(str, x)) for x in rep.reasons],
           "counterexample": _valuation(rep.counterexample, args.bound)})
    _note(f"{rep.verdict.value}: {rep.checked} valuations, {rep.vacuous} vacuous, {rep.unknown} unknown")
    return _exit_for(rep.verdict)


def _pipeline_fn(affine: bool):
    from .weihrauch import run_affine_pipeline, run_pipeline

    return run_affine_pipeline if affine else run_pipeline


def cmd_compile(args) -> int:
    from .oml import dump_store
    from .weihrauch import PipelineError

    p, _ = _load_proof(args.file)
    try:
        res = _pipeline_fn(args.affine)(p, None, None, bound=args.bound, fuel=args.fuel, seed=args.seed)
    except PipelineError as exc:
        _emit({"file": args.file, "compiled": False, "stage": exc.stage, "error": str(exc)})
        return EXIT_FAIL
    store = _store_path(args.output, args.store)
    _write(args.output, res.witness.dump())
    _write(store, dump_store(res.witness.store))
    _emit({"file": args.file, "compiled": True, "n": res.witness.n, "witness": args.output, "store": store})
    return EXIT_OK


def _report(cmd: str, args, report, **extra) -> int:
    _emit(_header(cmd, args, **extra))
    for tr in report.traces:
        _emit(tr.as_dict())
    counts = {t.value: report.count(t) for t in Ternary}
    _emit({"summary": {"overall": report.verdict.value, **counts}})
    _note(f"{report.verdict.value}: " + ", ".join(f"{v} {k}" for k, v in counts.items()))
    return _exit_for(report.verdict)


def cmd_run(args) -> int:
    from .weihrauch import ReductionError, check_reduction, load_witness

    store = _load_store(_store_path(args.witness, args.store))
    wit = load_witness(_read(args.witness), store)
    P0, chain = _problems(args.problem0, args.chain)
    if P0 is None:
        raise UsageError("--problem0 is required")
    if not isinstance(chain, list):
        chain = [chain] * wit.n
    try:
        rep = check_reduction(wit, P0, chain, args.trials, args.bound, args.fuel, args.seed, jobs=args.jobs)
    except ReductionError as exc:
        _emit({"witness": args.witness, "error": str(exc)})
        return EXIT_FAIL
    return _report("run", args, rep, problem0=args.problem0, chain=args.chain, n=wit.n)


def cmd_pipeline(args) -> int:
    from .weihrauch import PipelineError

    p, _ = _load_proof(args.file)
    P0, chain = _problems(args.problem0, args.chain)
    if P0 is None:
        raise UsageError("--problem0 is required")
    try:
        res = _pipeline_fn(args.affine)(p, P0, chain, args.trials, args.bound, args.fuel, args.seed,
                                        jobs=args.jobs)
    except PipelineError as exc:
        _emit(_header("pipeline", args, problem0=args.problem0, chain=args.chain, affine=args.affine))
        _emit({"error": str(exc), "stage": exc.stage})
        _note(str(exc))
        return EXIT_FAIL
    return _report("pipeline", args, res.report, problem0=args.problem0, chain=args.chain,
                   affine=args.affine, n=res.witness.n, witness=res.witness.dump().strip())


# ------------------------------------------------------------------ argument parsing


def _default_fuel() -> int:
    raw = os.environ.get("ELZERO_FUEL")
    if raw is None:
        return DEFAULT_FUEL
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"ELZERO_FUEL must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="elzero", description="Proof checking, realizer extraction and Weihrauch witnesses.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def numeric(p, trials: bool = False, jobs: bool = False):
        p.add_argument("--bound", type=int, default=DEFAULT_BOUND, help="bound B for quantifiers")
        p.add_argument("--fuel", type=int, default=None, help="fuel per evaluation (default: $ELZERO_FUEL)")
        p.add_argument("--seed", type=int, default=0)
        if trials:
            p.add_argument("--trials", type=int, default=100)
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="trials run in parallel; output order is fixed")

    p = sub.add_parser("parse", help="parse a proof, sequent or formula file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("check", help="check a proof under a system")
    p.add_argument("file")
    p.add_argument("--system", help="el0, el0+mp, el0a, el0-exa, ... (default: as declared, else el0)")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("normalize", help="hoist cuts and prune weakened cuts")
    p.add_argument("file")
    p.add_argument("--hoist", action="store_true")
    p.add_argument("--prune", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("affinize", help="remove contractions; writes the proof and a .links table")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--no-markov", action="store_true", help="do not admit Markov's principle as a Sigma base")
    p.set_defaults(fn=cmd_affinize)

    for name, fn, what in (("kuroda", cmd_kuroda, "Kuroda translation of a formula"),
                           ("prime", cmd_prime, "primed form of a Pi^1_2 formula")):
        p = sub.add_parser(name, help=what)
        p.add_argument("file")
        p.set_defaults(fn=fn)

    p = sub.add_parser("extract", help="extract a realizer from a proof")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--store", help="code store path (default: OUTPUT.store)")
    p.add_argument("--strong", action="store_true", help="strong realizer for a Pi^1_2 sequent")
    numeric(p)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("check-real", help="falsification check of a realizer against a sequent")
    p.add_argument("realizer")
    p.add_argument("sequent", help="a (seq ...) file, or a proof file whose conclusion is used")
    p.add_argument("--store", help="code store path (default: REALIZER.store)")
    p.add_argument("--suite", type=int, default=50, help="number of valuations")
    numeric(p)
    p.set_defaults(fn=cmd_check_real)

    p = sub.add_parser("compile", help="compile a proof into Weihrauch witness indices")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--store")
    p.add_argument("--affine", action="store_true", help="existential-affine route (at most one stage)")
    numeric(p)
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="run a compiled witness against problems")
    p.add_argument("witness")
    p.add_argument("--store")
    p.add_argument("--problem0", required=True)
    p.add_argument("--chain", default="", help="comma-separated problems; one name is repeated")
    numeric(p, trials=True, jobs=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("pipeline", help="check, affinize, extract, compile and run")
    p.add_argument("file")
    p.add_argument("--problem0", required=True)
    p.add_argument("--chain", default="", help="comma-separated problems; one name is repeated")
    p.add_argument("--affine", action="store_true")
    numeric(p, trials=True, jobs=True)
    p.set_defaults(fn=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    from .sexpr import ParseError

    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if getattr(args, "fuel", 0) is None:
            args.fuel = _default_fuel()
        return args.fn(args)
    except UsageError as exc:
        _note(f"elzero: {exc}")
        return EXIT_USAGE
    except ParseError as exc:
        _note(f"elzero: {args.command}: parse error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
