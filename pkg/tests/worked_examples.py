"""Worked ship-loading scenarios and the checks built on them.

Each ``criterion_*`` function returns ``(ok, detail)`` so that the acceptance
suite and the mutation harness can share them.
"""
from __future__ import annotations

from pathlib import Path

from sagac.dynamic import DAGGER, SILENT, all_computations
from sagac.static import big_steps
from sagac.syntax import Env, parse_env, parse_process, parse_term
from sagac.terms import Outcome

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"


def load(process_file: str, env_file: str):
    p = parse_process((DATA / process_file).read_text(), source=process_file)
    env = parse_env((DATA / env_file).read_text(), source=env_file)
    return p, env


def has_judgment(judgments, label: str, outcome: Outcome, comp: str) -> bool:
    want = (parse_term(label), outcome, parse_term(comp))
    return any((j.label, j.outcome, j.final_comp) == want for j in judgments)


def criterion_1():
    p, env = load("ship.saga", "leave_aborts.env")
    wrapped, _ = load("ship_in_saga.saga", "leave_aborts.env")
    aborted = has_judgment(big_steps(env, p), "loadA | loadB", Outcome.ABORT, "unloadA | unloadB")
    compensated = has_judgment(big_steps(env, wrapped), "(loadA | loadB); (unloadA | unloadB)",
                               Outcome.COMMIT, "0")
    return aborted and compensated, f"abort judgment: {aborted}, compensated saga: {compensated}"


def criterion_2():
    p, env = load("ship.saga", "loadB_unloadA_abort.env")
    js = big_steps(env, p)
    early = has_judgment(js, "0", Outcome.ABORT, "0")
    late = has_judgment(js, "loadA", Outcome.FAIL, "0")
    return early and late, f"interrupted before loadA: {early}, after loadA: {late}"


def criterion_3():
    p, env = load("split_loads.saga", "loadB2_aborts.env")
    ok = has_judgment(big_steps(env, p), "(loadA1; unloadA1) | loadB1", Outcome.ABORT, "unloadB1")
    return ok, f"locally compensated judgment present: {ok}"


def _observed(p, env):
    return {(tuple(c.labels), c.outcome, c.residual) for c in all_computations(env, p)}


def criterion_4():
    p, env = load("ship.saga", "leave_aborts.env")
    wrapped, _ = load("ship_in_saga.saga", "leave_aborts.env")
    split, split_env = load("ship_split_a.saga", "loadB_aborts.env")
    first = (("loadA", "loadB", SILENT), Outcome.ABORT, parse_term("unloadB; unloadA")) in _observed(p, env)
    second = (("loadA", "loadB", SILENT, "unloadB", "unloadA"), Outcome.COMMIT,
              parse_term("0")) in _observed(wrapped, env)
    third = (("loadA1", DAGGER, "unloadA1"), Outcome.ABORT, parse_term("0")) in _observed(split, split_env)
    return first and second and third, f"abort trace: {first}, saga trace: {second}, delayed abort: {third}"


def criterion_5():
    p, env = load("split_loads.saga", "loadB2_aborts.env")
    comps = all_computations(env, p)
    found = any(c.gamma == ("loadA1", "loadB1", "unloadA1") and c.outcome is Outcome.ABORT
                and c.residual == parse_term("unloadB1") for c in comps)
    early = [c for c in comps if c.gamma[:2] == ("loadA1", "unloadA1")]
    return found and not early, f"delayed computation: {found}, early compensations: {len(early)}"


O = Outcome
# outcome operator, written out independently of the implementation
EXPECTED_COMBINE = {
    (O.COMMIT, O.COMMIT): O.COMMIT,
    (O.ABORT, O.COMMIT): O.ABORT,
    (O.FORCED_ABORT, O.COMMIT): O.FORCED_ABORT,
    (O.FORCED_ABORT, O.ABORT): O.ABORT,
    (O.FORCED_ABORT, O.FORCED_ABORT): O.FORCED_ABORT,
    (O.FAIL, O.COMMIT): O.FAIL,
    (O.FORCED_FAIL, O.COMMIT): O.FORCED_FAIL,
    (O.FORCED_FAIL, O.FAIL): O.FAIL,
    (O.FORCED_FAIL, O.FORCED_FAIL): O.FORCED_FAIL,
    (O.FORCED_ABORT_FAILED, O.COMMIT): O.FORCED_ABORT_FAILED,
    (O.FORCED_ABORT_FAILED, O.ABORT): O.FAIL,
    (O.FORCED_ABORT_FAILED, O.FORCED_FAIL): O.FORCED_ABORT_FAILED,
}


def expected_combine(a: Outcome, b: Outcome):
    return EXPECTED_COMBINE.get((a, b), EXPECTED_COMBINE.get((b, a)))


def criterion_6():
    from sagac.static import combine

    bad = [(a.value, b.value) for a in Outcome for b in Outcome if combine(a, b) != expected_combine(a, b)]
    return not bad, f"36 ordered pairs, mismatches: {bad}"


WORKED = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6}

__all__ = ["DATA", "Env", "WORKED", "load", "has_judgment", "expected_combine"]
