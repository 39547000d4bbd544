"""Acceptance criteria, one test (or pair of tests) per criterion.

Each test appends a ``criterion N: PASS|FAIL ...`` line that is printed in
the terminal summary.  Criteria that cannot hold for the rules as written
are kept faithful and marked as expected failures; see the reasons.
"""
import math
import time

import pytest

from conftest import ACCEPTANCE_LINES
from sagac.cli import main
from sagac.conformance import GenBounds, check_family
from sagac.dynamic import DYNAMIC_RULES
from sagac.linearize import is_linearization, linearizations
from sagac.static import STATIC_RULES
from sagac.syntax import parse_term
from test_linearize import arrangements, brute_lin, shapes
from worked_examples import DATA, WORKED

FAMILY = GenBounds(max_activities=3, max_depth=2, alphabet=("a", "b"))
# rules a family of three-leaf terms cannot reach (see test_rule_coverage_gap)
UNREACHABLE_AT_THREE_LEAVES = {"k-step-d", "k-par-d", "k-prot-d"}


def report(n, ok, detail, seconds, limit=None):
    status = "PASS" if ok and (limit is None or seconds < limit) else "FAIL"
    bound = "no time limit" if limit is None else f"limit {limit:g}s"
    line = f"criterion {n:>2}: {status}  {detail}  [{seconds:.2f}s, {bound}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return status == "PASS"


def timed(fn, *args):
    start = time.perf_counter()
    value = fn(*args)
    return value, time.perf_counter() - start


# --------------------------------------------------------------- examples


def test_criterion_1_ship_static(capsys):
    def run():
        main(["static", str(DATA / "ship.saga"), str(DATA / "leave_aborts.env")])
        plain = capsys.readouterr().out.splitlines()
        main(["static", str(DATA / "ship_in_saga.saga"), str(DATA / "leave_aborts.env")])
        wrapped = capsys.readouterr().out.splitlines()
        return plain, wrapped

    (plain, wrapped), secs = timed(run)
    ok = ("abort | label: loadA | loadB | comp: unloadA | unloadB" in plain
          and "commit | label: (loadA | loadB); (unloadA | unloadB) | comp: 0" in wrapped)
    ok_lib, detail = WORKED[1]()
    assert report(1, ok and ok_lib, detail, secs, 1.0)


@pytest.mark.xfail(strict=True, reason=(
    "the late-interruption judgment (loadA, fail, 0) needs a premise "
    "<loadA % unloadA, 0> --loadA--> <forced-abort, unloadA> that no rule derives: "
    "a lone activity commits atomically, so an interruption is only possible before it"))
def test_criterion_2_two_interruption_timings():
    (ok, detail), secs = timed(WORKED[2])
    assert report(2, ok, detail, secs, 1.0)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_worked_criteria(n):
    (ok, detail), secs = timed(WORKED[n])
    assert report(n, ok, detail, secs, 1.0)


def test_criterion_2_early_timing_holds():
    # the part of criterion 2 that the rules do derive
    ok, detail = WORKED[2]()
    assert "interrupted before loadA: True" in detail


# ------------------------------------------------------------ the family


@pytest.fixture(scope="module")
def family():
    return timed(check_family, FAMILY)


def _violations(r, check):
    return len(r.failures[check]) + r.stats.get(f"{check}_unreported_failures", 0)


@pytest.mark.slow
def test_criterion_7_theorem1_zero_violations(family):
    r, secs = family
    n = _violations(r, "theorem1")
    missing = sorted(set(DYNAMIC_RULES) - set(r.coverage))
    detail = f"{r.subjects} subjects, {n} violations; transition rules never fired: {missing or 'none'}"
    report(7, n == 0 and not missing, detail, secs, 600)
    assert n == 0 and secs < 600, [f.to_dict() for f in r.failures["theorem1"][:3]]


@pytest.mark.slow
def test_rule_coverage_gap(family):
    r, _ = family
    assert set(DYNAMIC_RULES) - set(r.coverage) == UNREACHABLE_AT_THREE_LEAVES


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason=(
    "k-step-d and k-par-d need a dagger under ';' or '|', which takes four leaves; "
    "k-prot-d needs a dagger from inside a killed block, whose body is always a compensation "
    "and never raises one"))
def test_criterion_7_every_transition_rule_fires(family):
    r, _ = family
    assert set(DYNAMIC_RULES) <= set(r.coverage)


@pytest.mark.slow
def test_criterion_8_theorem2(family):
    r, secs = family
    n = _violations(r, "theorem2")
    missing = sorted(set(STATIC_RULES) - set(r.coverage))
    detail = f"{n} violations; big-step rules never fired: {missing or 'none'}"
    assert report(8, n == 0 and not missing, detail, secs, 600)


@pytest.mark.slow
def test_criterion_9_dagger_lemma(family):
    r, secs = family
    n = _violations(r, "lemma1")
    detail = f"{n} violations over {r.coverage['a-par-d']} subjects with a dagger step"
    assert report(9, n == 0 and r.coverage["a-par-d"] > 0, detail, secs, 600)


@pytest.mark.slow
def test_criterion_11_progress_and_termination(family):
    r, secs = family
    n = _violations(r, "progress")
    detail = f"{n} stuck or non-terminating subjects, {r.stats['computations']} computations enumerated"
    assert report(11, n == 0, detail, secs, 600)


# ------------------------------------------------------- linearizations


def test_criterion_10_linearization_oracle():
    def run():
        checked = 0
        for n in range(1, 8):
            for t in shapes(n):
                lin = brute_lin(t)
                letters = next(iter(lin))
                for w in arrangements(letters):
                    if is_linearization(w, t) != (w in lin):
                        return False, checked
                    checked += 1
        for n in range(1, 7):
            t = parse_term(" | ".join(f"a{i}" for i in range(n)))
            if len(linearizations(t)) != math.factorial(n):
                return False, checked
        return True, checked

    (ok, checked), secs = timed(run)
    assert report(10, ok, f"{checked} membership queries agree; n! holds for n <= 6", secs, 60)


# -------------------------------------------------------------- mutants


@pytest.mark.slow
def test_criterion_12_mutants_killed(family):
    from mutation_harness import all_mutants, judge, prime_baseline

    prime_baseline(family[0])

    def run():
        return [judge(m, first_kill=True) for m in all_mutants()]

    verdicts, secs = timed(run)
    survivors = [str(v.mutant) for v in verdicts if not v.killed]
    rules = [f"{v.mutant}: {v.killed_by[0]}" for v in verdicts if v.mutant.kind == "rule" and v.killed]
    detail = (f"{len(verdicts) - len(survivors)}/{len(verdicts)} mutants killed; "
              f"rule mutants: {rules}; survivors: {survivors or 'none'}")
    assert report(12, not survivors, detail, secs)
