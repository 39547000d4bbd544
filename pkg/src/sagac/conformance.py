"""Mechanical cross-checks between the big-step and small-step semantics.

For a process and an environment:

* every dynamic computation must be matched by a big-step judgment with
  the same outcome whose label and compensation linearize to the
  computation's word and residual (:func:`check_dynamic_to_static`);
* every top-level judgment must be realized by at least one computation
  (:func:`check_static_to_dynamic`);
* every dagger step must lead to a parallel composition of killed blocks
  (:func:`check_dagger_lemma`);
* no reachable configuration is stuck (:func:`check_progress`).

:func:`check_family` runs all of them over a generated family of terms.
"""
from __future__ import annotations

import itertools
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .dynamic import (
    DAGGER,
    CapExceeded,
    Computation,
    Config,
    CycleDetected,
    InvariantError,
    ProgressViolation,
    Stepper,
    Terminal,
    iter_computations,
)
from .linearize import LinearizationCapExceeded, is_linearization, linearizations
from .static import TOP_OUTCOMES, BigStepEnumerator, Judgment
from .syntax import (
    ZERO,
    CompPair,
    Env,
    Killed,
    Par,
    Process,
    Saga,
    Seq,
    activities_of,
    is_source_level,
    pretty,
    pretty_term,
    size,
    subterms,
)
from .terms import EMPTY, ActivityTerm, Atom, TPar, TSeq, word_of

CHECKS = ("theorem1", "theorem2", "lemma1", "progress")


@dataclass
class Report:
    check: str
    process: str
    env: dict
    passed: bool
    witnesses: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    coverage: dict = field(default_factory=dict)
    minimal: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {
            "check": self.check,
            "process": self.process,
            "env": self.env,
            "verdict": "pass" if self.passed else "fail",
            "witnesses": self.witnesses,
            "stats": self.stats,
            "coverage": dict(sorted(self.coverage.items())),
        }
        if self.minimal is not None:
            out["minimal"] = self.minimal
        return out


# ------------------------------------------------------------ serialization


def judgment_record(j: Judgment) -> dict:
    return {
        "label": pretty_term(j.label),
        "outcome": j.outcome.value,
        "compensation": pretty_term(j.final_comp),
    }


def trace_record(c: Computation) -> list[dict]:
    records = []
    for label, target in c.steps:
        if isinstance(target, Config):
            records.append({
                "label": str(label),
                "process": pretty(target.process),
                "stored": pretty_term(target.stored),
            })
        else:
            records.append({"label": str(label), "process": target.outcome.value,
                            "stored": pretty_term(target.residual)})
    records.append({"outcome": c.outcome.value, "residual": pretty_term(c.residual)})
    return records


def _env_dict(env: Env) -> dict:
    return {k: v.value for k, v in env.items()}


# ---------------------------------------------------------------- subjects


class Semantics:
    """Both semantics for one environment, with shared memo tables."""

    def __init__(self, env: Env):
        self.env = env
        self.stepper = Stepper(env)
        self.static = BigStepEnumerator(env)



@dataclass
class Observations:
    computations: list
    failure: Optional[dict] = None  # progress/termination problem, if any
    rules: frozenset = frozenset()  # dynamic rules used from reachable configurations

    def triples(self) -> set:
        return {(c.gamma, c.outcome, word_of(c.residual)) for c in self.computations}


def observe(sem: Semantics, p: Process, beta: ActivityTerm = EMPTY,
            max_computations: int = 10**6) -> Observations:
    comps = []
    try:
        for c in iter_computations(sem.stepper, Config(p, beta), max_computations):
            comps.append(c)
    except ProgressViolation as exc:
        return Observations(comps, {"kind": "stuck", "config": str(exc.config),
                                    "prefix": [str(lab) for lab, _ in exc.prefix]})
    except CycleDetected as exc:
        return Observations(comps, {"kind": "cycle", "config": str(exc.config)})
    except (CapExceeded, InvariantError) as exc:
        return Observations(comps, {"kind": type(exc).__name__, "message": str(exc)})
    configs = {cfg for c in comps for cfg in c.configs()}
    rules = frozenset().union(*(sem.stepper.rules_used(cfg) for cfg in configs))
    return Observations(comps, rules=rules)


def coverage_of(sem: Semantics, p: Process, beta: ActivityTerm, obs: Observations) -> set[str]:
    return set(obs.rules) | set(sem.static.rules_used(p, beta))


def _matches(j: Judgment, gamma, outcome, residual) -> bool:
    return (j.outcome is outcome and is_linearization(gamma, j.label)
            and is_linearization(residual, j.final_comp))


def _theorem1(sem, p, beta, obs) -> tuple[list, dict]:
    judgments = sem.static.judgments(p, beta)
    witnesses = []
    triples = obs.triples()
    for gamma, outcome, residual in sorted(triples, key=str):
        if not any(_matches(j, gamma, outcome, residual) for j in judgments):
            witnesses.append({
                "kind": "uncovered-computation",
                "gamma": "; ".join(gamma),
                "outcome": outcome.value,
                "residual": "; ".join(residual) or "0",
                "trace": next(trace_record(c) for c in obs.computations
                              if (c.gamma, c.outcome, word_of(c.residual)) == (gamma, outcome, residual)),
            })
    stats = {"computations": len(obs.computations), "distinct_observations": len(triples),
             "judgments": len(judgments)}
    return witnesses, stats


def _theorem2(sem, p, beta, obs) -> tuple[list, dict]:
    top = [j for j in sem.static.judgments(p, beta) if j.outcome in TOP_OUTCOMES]
    triples = obs.triples()
    witnesses = []
    for j in sorted(top, key=lambda j: str(judgment_record(j))):
        if not any(_matches(j, g, o, r) for g, o, r in triples):
            witnesses.append({"kind": "unrealizable-judgment", **judgment_record(j)})
    return witnesses, {"judgments": len(top), "distinct_observations": len(triples)}


def is_killed_composition(p: Process) -> bool:
    if isinstance(p, Killed):
        return True
    if isinstance(p, Par):
        return is_killed_composition(p.left) and is_killed_composition(p.right)
    return False


def _lemma1(sem, p, beta, obs) -> tuple[list, dict]:
    witnesses, daggers = [], 0
    seen = set()
    for c in obs.computations:
        for label, target in c.steps:
            if label is not DAGGER:
                continue
            daggers += 1
            bad = isinstance(target, Terminal) or not is_killed_composition(target.process)
            if bad and target not in seen:
                seen.add(target)
                witnesses.append({"kind": "dagger-target", "target": str(target),
                                  "trace": trace_record(c)})
    return witnesses, {"dagger_steps": daggers}


def _progress(sem, p, beta, obs) -> tuple[list, dict]:
    witnesses = [] if obs.failure is None else [obs.failure]
    return witnesses, {"computations": len(obs.computations)}


_CHECKERS = {"theorem1": _theorem1, "theorem2": _theorem2, "lemma1": _lemma1, "progress": _progress}


def run_check(check: str, env: Env, p: Process, beta: ActivityTerm = EMPTY,
              sem: Optional[Semantics] = None, obs: Optional[Observations] = None,
              minimize: bool = True) -> Report:
    env.check_total(activities_of(p))
    sem = sem or Semantics(env)
    obs = obs or observe(sem, p, beta)
    witnesses, stats = _CHECKERS[check](sem, p, beta, obs)
    if obs.failure is not None and check != "progress" and not witnesses:
        # an incomplete enumeration cannot confirm anything
        witnesses = [obs.failure]
    report = Report(check, pretty(p), _env_dict(env), not witnesses, witnesses, stats,
                    {rule: 1 for rule in coverage_of(sem, p, beta, obs)})
    if not report.passed and minimize:
        report.minimal = minimize_failure(check, env, p, beta)
    return report


def check_dynamic_to_static(env: Env, p: Process, beta: ActivityTerm = EMPTY) -> Report:
    """Every computation is compatible with some big-step judgment."""
    return run_check("theorem1", env, p, beta)


def check_static_to_dynamic(env: Env, p: Process, beta: ActivityTerm = EMPTY) -> Report:
    """Every top-level judgment is realized by some computation."""
    return run_check("theorem2", env, p, beta)


def check_dagger_lemma(env: Env, p: Process, beta: ActivityTerm = EMPTY) -> Report:
    """Every dagger step targets a parallel composition of killed blocks."""
    return run_check("lemma1", env, p, beta)


def check_progress(env: Env, p: Process, beta: ActivityTerm = EMPTY) -> Report:
    """Enumeration terminates and never meets a stuck configuration."""
    return run_check("progress", env, p, beta)


def minimize_failure(check: str, env: Env, p: Process, beta: ActivityTerm = EMPTY) -> Optional[dict]:
    """Smallest source-level subterm of ``p`` on which ``check`` also fails."""
    candidates = sorted({q for q in subterms(p) if is_source_level(q)}, key=lambda q: (size(q), pretty(q)))
    for q in candidates:
        sub_env = Env({k: env[k] for k in activities_of(q)})
        rep = run_check(check, sub_env, q, beta, minimize=False)
        if not rep.passed:
            return {"process": rep.process, "env": rep.env, "witnesses": rep.witnesses}
    return None


# -------------------------------------------------------------- strictness


def sample_linearization(t: ActivityTerm, rng: random.Random) -> tuple[str, ...]:
    if isinstance(t, Atom):
        return (t.name,)
    if isinstance(t, TSeq):
        return sample_linearization(t.left, rng) + sample_linearization(t.right, rng)
    if isinstance(t, TPar):
        u, v = sample_linearization(t.left, rng), sample_linearization(t.right, rng)
        slots = set(rng.sample(range(len(u) + len(v)), len(u)))
        iu, iv = iter(u), iter(v)
        return tuple(next(iu) if i in slots else next(iv) for i in range(len(u) + len(v)))
    return ()


def strictness_witnesses(env: Env, p: Process, beta: ActivityTerm = EMPTY,
                         cap: int = 10**4, samples: int = 200, seed: int = 0) -> Report:
    """Split the linearizations of each top-level label into realizable and unrealizable words."""
    env.check_total(activities_of(p))
    sem = Semantics(env)
    obs = observe(sem, p, beta)
    gammas = {(c.gamma, c.outcome) for c in obs.computations}
    entries, unrealizable = [], 0
    top = [j for j in sem.static.judgments(p, beta) if j.outcome in TOP_OUTCOMES]
    for j in sorted(top, key=lambda j: str(judgment_record(j))):
        try:
            words, sampled = sorted(linearizations(j.label, cap)), False
        except LinearizationCapExceeded:
            rng = random.Random(seed)
            words, sampled = sorted({sample_linearization(j.label, rng) for _ in range(samples)}), True
        real = [w for w in words if (w, j.outcome) in gammas]
        unreal = [w for w in words if (w, j.outcome) not in gammas]
        unrealizable += len(unreal)
        entries.append({
            **judgment_record(j),
            "sampled": sampled,
            "realizable": ["; ".join(w) or "0" for w in real],
            "unrealizable": ["; ".join(w) or "0" for w in unreal],
        })
    passed = obs.failure is None
    return Report("strictness", pretty(p), _env_dict(env), passed,
                  entries if passed else [obs.failure],
                  {"judgments": len(top), "unrealizable_words": unrealizable})


# -------------------------------------------------------------- generation


@dataclass(frozen=True)
class GenBounds:
    """Bounds for :func:`generate_terms`.

    ``max_activities`` bounds the number of leaves (activities and ``0``);
    ``max_depth`` bounds saga nesting.  Environments are exhaustive over the
    names a term uses unless ``env_samples`` is set.
    """

    max_activities: int = 3
    max_depth: int = 2
    alphabet: tuple[str, ...] = ("a", "b")
    env_samples: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.max_activities < 0 or self.max_depth < 0:
            raise ValueError("bounds must be non-negative")
        if self.env_samples is not None and self.env_samples < 0:
            raise ValueError("env_samples must be non-negative")

    @property
    def env_mode(self) -> str:
        return "exhaustive" if self.env_samples is None else "sampled"


def _leaves(alphabet):
    yield ZERO
    for a in alphabet:
        yield CompPair(a)
        for b in alphabet:
            yield CompPair(a, b)


def _terms(n: int, depth: int, alphabet, memo) -> list:
    """Terms with exactly ``n`` leaves and saga depth at most ``depth``."""
    key = (n, depth)
    if key in memo:
        return memo[key]
    out = []
    if n == 1:
        out.extend(_leaves(alphabet))
    for k in range(1, n):
        for left in _terms(k, depth, alphabet, memo):
            for right in _terms(n - k, depth, alphabet, memo):
                out.append(Seq(left, right))
                out.append(Par(left, right))
    if depth > 0:
        out.extend(Saga(body) for body in _terms(n, depth - 1, alphabet, memo))
    memo[key] = out
    return out


def _first_occurrences(p: Process) -> list[str]:
    order = []
    for q in subterms(p):
        if isinstance(q, CompPair):
            for name in (q.forward, q.compensation):
                if name is not None and name not in order:
                    order.append(name)
    return order


def _canonical(p: Process, alphabet) -> bool:
    # one representative per renaming of the alphabet
    order = _first_occurrences(p)
    return order == list(alphabet[: len(order)])


def generate_process_terms(b: GenBounds) -> Iterator[Process]:
    memo: dict = {}
    alphabet = tuple(b.alphabet)
    for n in range(1, b.max_activities + 1):
        for p in _terms(n, b.max_depth, alphabet, memo):
            if _canonical(p, alphabet):
                yield p


def envs_for(names, env_samples: Optional[int] = None, rng: Optional[random.Random] = None) -> list[Env]:
    names = sorted(names)
    every = [Env(dict(zip(names, verdicts)))
             for verdicts in itertools.product(("commit", "abort"), repeat=len(names))]
    if env_samples is None or env_samples >= len(every):
        return every
    return rng.sample(every, env_samples)


def generate_terms(b: GenBounds) -> Iterator[tuple[Process, Env]]:
    """Source-level terms within the bounds, each paired with its environments."""
    rng = random.Random(b.seed)
    for p in generate_process_terms(b):
        for env in envs_for(activities_of(p), b.env_samples, rng):
            yield p, env


# ------------------------------------------------------------------ family


@dataclass
class FamilyReport:
    bounds: GenBounds
    subjects: int = 0
    failures: dict = field(default_factory=lambda: {c: [] for c in CHECKS})
    coverage: Counter = field(default_factory=Counter)
    stats: Counter = field(default_factory=Counter)

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())

    def verdict(self, check: str) -> bool:
        return not self.failures[check]

    def to_dict(self) -> dict:
        return {
            "bounds": {
                "max_activities": self.bounds.max_activities,
                "max_depth": self.bounds.max_depth,
                "alphabet": list(self.bounds.alphabet),
                "env_mode": self.bounds.env_mode,
            },
            "subjects": self.subjects,
            "verdicts": {c: "pass" if self.verdict(c) else "fail" for c in CHECKS},
            "failures": {c: [r.to_dict() for r in self.failures[c]] for c in CHECKS},
            "coverage": dict(sorted(self.coverage.items())),
            "stats": dict(sorted(self.stats.items())),
        }


def check_subjects(subjects, beta: ActivityTerm = EMPTY, checks=CHECKS,
                   max_failures: int = 20) -> FamilyReport:
    """Run ``checks`` over ``(process, env)`` pairs with per-environment memo tables."""
    report = FamilyReport(GenBounds())
    sems: dict[Env, Semantics] = {}
    for p, env in subjects:
        sem = sems.get(env)
        if sem is None:
            sem = sems[env] = Semantics(env)
        report.subjects += 1
        obs = observe(sem, p, beta)
        report.stats["computations"] += len(obs.computations)
        report.coverage.update(coverage_of(sem, p, beta, obs))
        for check in checks:
            rep = run_check(check, env, p, beta, sem=sem, obs=obs, minimize=False)
            if not rep.passed and len(report.failures[check]) < max_failures:
                rep.minimal = minimize_failure(check, env, p, beta)
                rep.coverage = {}
                report.failures[check].append(rep)
            elif not rep.passed:
                report.stats[f"{check}_unreported_failures"] += 1
    return report


def _check_chunk(args):
    subjects, beta, checks = args
    return check_subjects(subjects, beta, checks)


def check_family(b: GenBounds, beta: ActivityTerm = EMPTY, jobs: int = 1,
                 checks=CHECKS) -> FamilyReport:
    """Run every check over the family described by ``b``; ``jobs`` does not change the result."""
    subjects = list(generate_terms(b))
    if jobs <= 1:
        report = check_subjects(subjects, beta, checks)
    else:
        chunk = max(1, len(subjects) // (jobs * 8))
        parts = [(subjects[i:i + chunk], beta, checks) for i in range(0, len(subjects), chunk)]
        report = FamilyReport(b)
        with ProcessPoolExecutor(jobs) as pool:
            for part in pool.map(_check_chunk, parts):
                report.subjects += part.subjects
                report.coverage.update(part.coverage)
                report.stats.update(part.stats)
                for c in checks:
                    report.failures[c].extend(part.failures[c])
    report.bounds = b
    return report
