import json
import random
from importlib.resources import files

import jsonschema
import pytest

from sagac import static
from sagac.conformance import (
    CHECKS,
    GenBounds,
    check_dagger_lemma,
    check_dynamic_to_static,
    check_family,
    check_progress,
    check_static_to_dynamic,
    envs_for,
    generate_process_terms,
    generate_terms,
    is_killed_composition,
    minimize_failure,
    strictness_witnesses,
)
from sagac.syntax import ZERO, CompPair, Env, Killed, Par, Prot, Saga, activities_of, is_source_level, parse_process
from sagac.terms import Outcome, word_term
from worked_examples import load

REPORT_SCHEMA = json.loads(files("sagac").joinpath("schemas/report.schema.json").read_text())


def test_smallest_family():
    subjects = list(generate_terms(GenBounds(1, 0, ("a",))))
    assert (ZERO, Env()) in subjects
    assert (CompPair("a"), Env(a="commit")) in subjects
    assert (CompPair("a"), Env(a="abort")) in subjects


def test_depth_one_saga_present():
    assert Saga(CompPair("a", "b")) in set(generate_process_terms(GenBounds(2, 1)))


def test_family_size_snapshot():
    # frozen from the generator's first run
    terms = list(generate_process_terms(GenBounds(3, 1)))
    assert len(terms) == 15394
    assert len(set(terms)) == len(terms)
    assert sum(1 for _ in generate_terms(GenBounds(3, 1))) == 56532


def test_generated_terms_are_source_level_and_bounded():
    for p in generate_process_terms(GenBounds(3, 2)):
        assert is_source_level(p)


def test_one_representative_per_renaming():
    terms = set(generate_process_terms(GenBounds(2, 0)))
    assert CompPair("a", "b") in terms and CompPair("b", "a") not in terms


def test_sampled_envs_are_deterministic():
    b = GenBounds(2, 1, env_samples=1, seed=5)
    assert list(generate_terms(b)) == list(generate_terms(b))
    assert all(len(envs_for(activities_of(p), 1, random.Random(0))) == 1
               for p in generate_process_terms(GenBounds(2, 0)))


def test_bounds_validated():
    with pytest.raises(ValueError):
        GenBounds(-1, 0)


def test_split_loads_passes_and_is_strict():
    p, env = load("split_loads.saga", "loadB2_aborts.env")
    for check in (check_dynamic_to_static, check_static_to_dynamic, check_dagger_lemma, check_progress):
        assert check(env, p).passed
    strict = strictness_witnesses(env, p)
    assert strict.stats["unrealizable_words"] >= 1
    entry = next(e for e in strict.witnesses if e["label"] == "(loadA1; unloadA1) | loadB1")
    assert entry["unrealizable"] == ["loadA1; unloadA1; loadB1"]


def test_sequential_initial_compensation():
    env = Env(a="commit", b="abort", x="commit")
    for src in ["a % x; [a % x; 0] | b", "[a % x; b] | a"]:
        p = parse_process(src)
        for check in (check_dynamic_to_static, check_static_to_dynamic, check_dagger_lemma):
            assert check(env, p, word_term(["x", "x"])).passed


def test_killed_composition_shape():
    assert is_killed_composition(Par(Killed(ZERO), Par(Killed(CompPair("a")), Killed(ZERO))))
    assert not is_killed_composition(Par(Killed(ZERO), Prot(ZERO)))


def test_small_family_passes_with_coverage():
    r = check_family(GenBounds(2, 2))
    assert r.passed, {c: [f.to_dict() for f in r.failures[c]] for c in CHECKS}
    assert r.coverage["sub-forced-2"] > 0 and r.coverage["a-saga-d"] > 0
    jsonschema.validate(r.to_dict(), REPORT_SCHEMA)


def test_parallel_jobs_do_not_change_the_report():
    one = check_family(GenBounds(2, 1), jobs=1)
    two = check_family(GenBounds(2, 1), jobs=2)
    assert one.to_dict() == two.to_dict()


@pytest.fixture
def corrupted_table():
    table = static.COMBINE_TABLE
    saved = table[Outcome.ABORT, Outcome.COMMIT]
    table[Outcome.ABORT, Outcome.COMMIT] = table[Outcome.COMMIT, Outcome.ABORT] = None
    yield
    table[Outcome.ABORT, Outcome.COMMIT] = table[Outcome.COMMIT, Outcome.ABORT] = saved


def test_corruption_yields_minimal_witness(corrupted_table):
    env = Env(a="commit", b="abort", x="commit")
    p = parse_process("[a % x | b]; a")
    rep = check_dynamic_to_static(env, p)
    assert not rep.passed
    assert rep.minimal["process"] == "a % x | b"
    assert rep.witnesses[0]["kind"] == "uncovered-computation"
    jsonschema.validate({"process": rep.process, "verdicts": {c: "fail" for c in CHECKS},
                         "reports": [rep.to_dict()], "strictness": rep.to_dict()}, REPORT_SCHEMA)
    assert minimize_failure("theorem1", env, p) == rep.minimal


def test_corruption_detected_by_family(corrupted_table):
    r = check_family(GenBounds(2, 1))
    assert not r.passed
    first = r.failures["theorem1"][0]
    assert first.minimal is not None
