"""Command-line front-end.

Subcommands:

    sat <formula|@file>           SAT/UNSAT via the tableau solver
    check --model m.json --formula <f>   TRUE/FALSE on a pointed model
    oracle-sat <formula|@file>    brute-force satisfiability verdict
    oracle-check --model m.json <f>      brute-force truth verdict
    fuzz --size N --atoms K (--count all | --count C --seed S)
                                  solver vs oracle agreement sweep
    reduce-k <psi>                emit the model-checking instance for a
                                  variable-free formula (top/bot grammar)
    export-dot --model m.json     DOT rendering of a model file

Exit codes: 0 SAT/TRUE/no divergence, 1 UNSAT/FALSE/divergence found,
2 usage or parse error, 3 resource limit.
"""

import argparse
import json
import multiprocessing
import sys

from . import gen, modelcheck, oracle, solver
from .errors import ResourceLimit
from .formula import FragmentViolation, ParseError, in_existential_fragment, parse, render
from .kripke import StateNotFound, load_model, model_to_dict, pointed_from_dict, to_dot

EXIT_YES = 0
EXIT_NO = 1
EXIT_USAGE = 2
EXIT_LIMIT = 3


class _UsageError(Exception):
    pass


def _read_formula(text):
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise _UsageError(f"cannot read formula file: {exc}") from exc
    try:
        f = parse(text)
    except ParseError as exc:
        raise _UsageError(f"parse error: {exc}") from exc
    if not in_existential_fragment(f):
        raise _UsageError("universal quantifier (Ar) is not supported")
    return f


def _read_pointed(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return pointed_from_dict(json.load(fh))
    except (OSError, ValueError, StateNotFound, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot load model: {exc}") from exc


def _solver_options(args):
    return solver.SolverOptions(
        trace=getattr(args, "trace", False),
        trace_out=sys.stdout if getattr(args, "trace", False) else None,
    )


def _cmd_sat(args):
    f = _read_formula(args.formula)
    result = solver.sat(f, _solver_options(args))
    if args.stats:
        print(result.stats.summary())
    if result.satisfiable:
        if args.witness:
            payload = result.models.to_dict(formula_text=render(f))
            with open(args.witness, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
        print("SAT")
        return EXIT_YES
    print("UNSAT")
    return EXIT_NO


def _cmd_check(args):
    f = _read_formula(args.formula)
    a = _read_pointed(args.model)
    verdict = modelcheck.check(a, f, _solver_options(args))
    print("TRUE" if verdict else "FALSE")
    return EXIT_YES if verdict else EXIT_NO


def _cmd_oracle_sat(args):
    f = _read_formula(args.formula)
    verdict = oracle.oracle_sat(f)
    print("SAT" if verdict else "UNSAT")
    return EXIT_YES if verdict else EXIT_NO


def _cmd_oracle_check(args):
    f = _read_formula(args.formula)
    a = _read_pointed(args.model)
    verdict = oracle.oracle_eval(a, f)
    print("TRUE" if verdict else "FALSE")
    return EXIT_YES if verdict else EXIT_NO


def _fuzz_one(text):
    f = parse(text)
    try:
        got = solver.sat(f).satisfiable
        want = oracle.oracle_sat(f)
    except ResourceLimit:
        return (text, None, None, True)
    return (text, got, want, False)


def _cmd_fuzz(args):
    names = tuple("pqrstuvwxy"[: args.atoms])
    if not names:
        raise _UsageError("--atoms must be at least 1")
    if args.count == "all":
        formulas = list(gen.enumerate_formulas(args.size, names))
    else:
        try:
            count = int(args.count)
        except ValueError:
            raise _UsageError("--count takes a number or 'all'") from None
        import random

        rng = random.Random(args.seed)
        formulas = [
            gen.random_formula(rng, rng.randint(1, args.size), names)
            for _ in range(count)
        ]
    texts = [render(f) for f in formulas]
    if args.jobs > 1:
        with multiprocessing.get_context("fork").Pool(args.jobs) as pool:
            rows = pool.map(_fuzz_one, texts, chunksize=64)
    else:
        rows = [_fuzz_one(t) for t in texts]
    divergences = 0
    limited = 0
    for text, got, want, hit_limit in rows:
        if hit_limit:
            limited += 1
            continue
        if got != want:
            divergences += 1
            if divergences == 1:
                print(f"divergence: {text} solver={'SAT' if got else 'UNSAT'}"
                      f" oracle={'SAT' if want else 'UNSAT'}")
    print(f"checked {len(rows)} formulas: {divergences} divergences"
          + (f" ({limited} resource-limited)" if limited else ""))
    if divergences:
        return EXIT_NO
    if limited:
        return EXIT_LIMIT
    return EXIT_YES


def _cmd_reduce_k(args):
    try:
        psi = modelcheck.parse_const(args.formula)
        pointed, f = modelcheck.reduce_k_sat(psi)
    except (ParseError, modelcheck.InvalidInput) as exc:
        raise _UsageError(str(exc)) from exc
    payload = {
        "model": model_to_dict(pointed.model, pointed.point),
        "formula": render(f),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_YES


def _cmd_export_dot(args):
    try:
        model, point = load_model(args.model)
    except (OSError, ValueError, StateNotFound, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot load model: {exc}") from exc
    sys.stdout.write(to_dot(model, point))
    return EXIT_YES


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rmlsat",
        description="Decision procedures for modal logic with existential refinement quantifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sat", help="decide satisfiability")
    p.add_argument("formula", help="formula text, or @file")
    p.add_argument("--witness", metavar="OUT.json", help="write the witness model chain")
    p.add_argument("--trace", action="store_true", help="stream rule applications")
    p.add_argument("--stats", action="store_true", help="print search statistics")
    p.set_defaults(func=_cmd_sat)

    p = sub.add_parser("check", help="model-check a formula on a pointed model")
    p.add_argument("--model", required=True, metavar="M.json")
    p.add_argument("--formula", required=True, help="formula text, or @file")
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("oracle-sat", help="brute-force satisfiability")
    p.add_argument("formula", help="formula text, or @file")
    p.set_defaults(func=_cmd_oracle_sat)

    p = sub.add_parser("oracle-check", help="brute-force model checking")
    p.add_argument("--model", required=True, metavar="M.json")
    p.add_argument("formula", help="formula text, or @file")
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("fuzz", help="compare solver and oracle verdicts")
    p.add_argument("--size", type=int, default=5, help="maximum formula size")
    p.add_argument("--atoms", type=int, default=2, help="number of distinct atoms")
    p.add_argument("--count", default="all", help="'all' or a number of random formulas")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=_cmd_fuzz)

    p = sub.add_parser("reduce-k", help="emit the model-checking instance for a variable-free formula")
    p.add_argument("formula", help="constant-grammar formula over top/bot")
    p.set_defaults(func=_cmd_reduce_k)

    p = sub.add_parser("export-dot", help="render a model file as DOT")
    p.add_argument("--model", required=True, metavar="M.json")
    p.set_defaults(func=_cmd_export_dot)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, FragmentViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
