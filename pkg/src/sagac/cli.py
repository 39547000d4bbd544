"""Command-line front end: ``sagac static|dynamic|lin|check|generate``.

Exit codes: 0 success, 1 a semantic check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import conformance
from .conformance import GenBounds, judgment_record, trace_record
from .dynamic import (
    DYNAMIC_RULES,
    CapExceeded,
    Computation,
    Config,
    CycleDetected,
    ProgressViolation,
    RandomScheduler,
    Stepper,
    iter_computations,
    run,
)
from .linearize import count_linearizations, linearizations
from .static import STATIC_RULES, TOP_OUTCOMES, big_steps
from .syntax import (
    EnvError,
    MissingVerdict,
    SagaSyntaxError,
    activities_of,
    parse_env,
    parse_process,
    parse_term,
    pretty,
    pretty_term,
)
from .terms import EMPTY, word_of

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _load(args):
    try:
        ptext = Path(args.process).read_text(encoding="utf-8")
        etext = Path(args.env).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(str(exc)) from None
    p = parse_process(ptext, source=args.process)
    env = parse_env(etext, source=args.env)
    names = activities_of(p)
    if getattr(args, "default_commit", False):
        env = env.with_default_commit(names)
    try:
        env.check_total(names)
    except MissingVerdict as exc:
        raise UsageError(f"{args.env}: {exc} (pass --default-commit to assume commit)") from None
    return p, env


def _emit_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


# ---------------------------------------------------------------- commands


def cmd_static(args) -> int:
    p, env = _load(args)
    judgments = big_steps(env, p)
    if not args.all_outcomes:
        judgments = [j for j in judgments if j.outcome in TOP_OUTCOMES]
    records = sorted((judgment_record(j) for j in judgments),
                     key=lambda r: (r["outcome"], r["label"], r["compensation"]))
    if args.json:
        _emit_json(records)
    else:
        for r in records:
            print(f"{r['outcome']} | label: {r['label']} | comp: {r['compensation']}")
    return EXIT_OK


def _computation_key(c: Computation):
    return ([str(label) for label in c.labels], [str(t) for _, t in c.steps])


def _print_computation(c: Computation, index: int) -> None:
    print(f"computation {index}: start {c.start}")
    for label, target in c.steps:
        print(f"  --{label}--> {target}")
    gamma = "; ".join(c.gamma) or "0"
    suffix = " (dagger observed)" if c.has_dagger else ""
    print(f"  gamma: {gamma} -> {c.outcome.value}, residual: {pretty_term(c.residual)}{suffix}")


def cmd_dynamic(args) -> int:
    p, env = _load(args)
    if args.all:
        cap = args.max_traces if args.max_traces is not None else _env_int("SAGAC_MAX_TRACES", 10**6)
        try:
            comps = sorted(iter_computations(Stepper(env), Config(p), max_computations=cap),
                           key=_computation_key)
        except CapExceeded as exc:
            print(f"sagac: {exc}", file=sys.stderr)
            return EXIT_FAILED
    else:
        seed = args.seed
        if seed is None:
            if "SAGAC_SEED" not in os.environ:
                raise UsageError("dynamic needs --all or --seed N (or SAGAC_SEED)")
            seed = _env_int("SAGAC_SEED", 0)
        comps = [run(env, p, RandomScheduler(seed))]
    if args.json:
        _emit_json([trace_record(c) for c in comps])
    else:
        for i, c in enumerate(comps, start=1):
            _print_computation(c, i)
    return EXIT_OK


def cmd_lin(args) -> int:
    t = parse_term(args.term, source="<term>")
    bound = count_linearizations(t)
    if args.count or bound > args.cap:
        print(f"{bound} linearization(s)" + ("" if args.count else f" (more than --cap {args.cap}; not listed)"))
        return EXIT_OK
    for w in sorted(linearizations(t, args.cap)):
        print("; ".join(w) or "0")
    return EXIT_OK


def _bounds(args) -> GenBounds:
    alphabet = tuple(a.strip() for a in args.alphabet.split(",") if a.strip())
    if not alphabet:
        raise UsageError("--alphabet must name at least one activity")
    seed = args.seed if args.seed is not None else _env_int("SAGAC_SEED", 0)
    try:
        return GenBounds(args.max_activities, args.max_depth, alphabet, args.env_samples, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _coverage_lines(coverage) -> list[str]:
    lines = []
    for title, rules in (("static", STATIC_RULES), ("dynamic", DYNAMIC_RULES)):
        cells = [f"{r}={coverage.get(r, 0)}" for r in rules]
        missing = [r for r in rules if not coverage.get(r)]
        lines.append(f"coverage ({title}): " + " ".join(cells))
        if missing:
            lines.append(f"  never fired: {', '.join(missing)}")
    return lines


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def cmd_check(args) -> int:
    beta = EMPTY
    if args.initial_comp:
        beta = parse_term(args.initial_comp, source="--initial-comp")
        try:
            word_of(beta)
        except ValueError:
            raise UsageError("--initial-comp must be a sequential term") from None
    if args.generate:
        if args.process or args.env:
            raise UsageError("--generate takes no process/env files")
        report = conformance.check_family(_bounds(args), beta=beta, jobs=args.jobs)
        if args.json:
            _emit_json(report.to_dict())
        else:
            print(f"subjects: {report.subjects}")
            for c in conformance.CHECKS:
                n = len(report.failures[c]) + report.stats.get(f"{c}_unreported_failures", 0)
                print(f"{c}: {_verdict(report.verdict(c))}" + (f" ({n} failing subjects)" if n else ""))
            for line in _coverage_lines(report.coverage):
                print(line)
            for c in conformance.CHECKS:
                for rep in report.failures[c]:
                    _print_failure(rep)
        return EXIT_OK if report.passed else EXIT_FAILED

    if not (args.process and args.env):
        raise UsageError("check needs <process> <env> or --generate")
    p, env = _load(args)
    reports = {c: conformance.run_check(c, env, p, beta) for c in conformance.CHECKS}
    strict = conformance.strictness_witnesses(env, p, beta)
    ok = all(r.passed for r in reports.values())
    if args.json:
        _emit_json({
            "process": pretty(p),
            "verdicts": {c: "pass" if r.passed else "fail" for c, r in reports.items()},
            "reports": [r.to_dict() for r in reports.values()],
            "strictness": strict.to_dict(),
        })
        return EXIT_OK if ok else EXIT_FAILED
    for c, r in reports.items():
        print(f"{c}: {_verdict(r.passed)}")
    n = strict.stats["unrealizable_words"]
    summary = [f"{c}: {_verdict(r.passed)}" for c, r in reports.items()]
    print(", ".join(summary) + f", strictness: {n} unrealizable linearization(s) found")
    for entry in strict.witnesses if strict.passed else []:
        for w in entry["unrealizable"]:
            print(f"  unrealizable: {w}  (for {entry['outcome']} | label: {entry['label']})")
    coverage = {}
    for r in reports.values():
        coverage.update(r.coverage)
    for line in _coverage_lines(coverage):
        print(line)
    for r in reports.values():
        if not r.passed:
            _print_failure(r)
    return EXIT_OK if ok else EXIT_FAILED


def _print_failure(rep) -> None:
    print(f"FAILED {rep.check} on {rep.process} with env {rep.env}")
    for w in rep.witnesses[:5]:
        print(f"  witness: {json.dumps(w)}")
    if rep.minimal:
        print(f"  minimal: {rep.minimal['process']} with env {rep.minimal['env']}")
        for w in rep.minimal["witnesses"][:3]:
            print(f"    witness: {json.dumps(w)}")


def cmd_generate(args) -> int:
    b = _bounds(args)
    count = 0
    for p in conformance.generate_process_terms(b):
        count += 1
        if not args.count:
            print(pretty(p))
    print(f"{count} term(s)", file=sys.stderr if not args.count else sys.stdout)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _add_bounds(sp, generate_flag: bool) -> None:
    if generate_flag:
        sp.add_argument("--generate", action="store_true", help="check a generated family of terms")
    sp.add_argument("--max-activities", type=int, default=3)
    sp.add_argument("--max-depth", type=int, default=2)
    sp.add_argument("--alphabet", default="a,b")
    sp.add_argument("--env-samples", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagac", description="Executable semantics for nested sagas.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("static", help="enumerate big-step judgments")
    sp.add_argument("process")
    sp.add_argument("env")
    sp.add_argument("--all-outcomes", action="store_true")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--default-commit", action="store_true")
    sp.set_defaults(func=cmd_static)

    sp = sub.add_parser("dynamic", help="enumerate or run small-step computations")
    sp.add_argument("process")
    sp.add_argument("env")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--all", action="store_true")
    mode.add_argument("--seed", type=int, default=None)
    sp.add_argument("--max-traces", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--default-commit", action="store_true")
    sp.set_defaults(func=cmd_dynamic)

    sp = sub.add_parser("lin", help="linearizations of an activity term")
    sp.add_argument("term")
    sp.add_argument("--count", action="store_true")
    sp.add_argument("--cap", type=int, default=10**5)
    sp.set_defaults(func=cmd_lin)

    sp = sub.add_parser("check", help="cross-check the two semantics")
    sp.add_argument("process", nargs="?")
    sp.add_argument("env", nargs="?")
    _add_bounds(sp, generate_flag=True)
    sp.add_argument("--initial-comp", default=None, help="sequential initial compensation")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--default-commit", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("generate", help="list the generated family of terms")
    _add_bounds(sp, generate_flag=False)
    sp.add_argument("--count", action="store_true")
    sp.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (SagaSyntaxError, EnvError, UsageError) as exc:
        print(f"sagac: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProgressViolation, CycleDetected) as exc:
        print(f"sagac: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
