"""Small-step semantics of nested sagas.

A configuration ``<P, beta>`` pairs a (possibly running) process with the
sequential compensation stored so far.  :func:`steps` gives every single
transition, :func:`all_computations` every maximal computation and
:func:`run` one computation chosen by a scheduler.

Steps are labelled by an activity name, :data:`SILENT` or :data:`DAGGER`
(an abort that waits for running compensations before being re-raised).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .syntax import (
    CompPair,
    Env,
    Killed,
    NotAnActivityTerm,
    Par,
    Process,
    Prot,
    Saga,
    Seq,
    Zero,
    activities_of,
    is_source_level,
    pretty,
    pretty_term,
    process_to_term,
    term_to_process,
)
from .terms import EMPTY, ActivityTerm, Outcome, concat, is_sequential, prepend, tpar, tseq

DYNAMIC_RULES = (
    "zero-d", "s-act-d", "f-act-d", "step-d", "k-step-d", "s-step-d",
    "a-step-d", "f-step-d", "par-d", "k-par-d", "s-par-d", "a-par-d",
    "a-par-fin-d", "f-par-d", "saga-d", "k-saga-d", "s-saga-d", "a-saga-d",
    "f-saga-d", "prot-d", "k-prot-d", "s-prot-d", "s-killed-d", "a-prot-d",
)

DEFAULT_MAX_COMPUTATIONS = 10**6
DEFAULT_MAX_LENGTH = 10**4


class Mark(str, Enum):
    SILENT = "tau"
    DAGGER = "dagger"

    def __str__(self) -> str:
        return self.value


SILENT = Mark.SILENT
DAGGER = Mark.DAGGER

Label = Union[str, Mark]


@dataclass(frozen=True)
class Config:
    process: Process
    stored: ActivityTerm = EMPTY

    def __str__(self) -> str:
        return f"<{pretty(self.process)}, {pretty_term(self.stored)}>"


@dataclass(frozen=True)
class Terminal:
    outcome: Outcome
    residual: ActivityTerm = EMPTY

    def __str__(self) -> str:
        return f"<{self.outcome}, {pretty_term(self.residual)}>"


Target = Union[Config, Terminal]


class InvariantError(RuntimeError):
    """A configuration violates a structural invariant of the semantics."""


class ProgressViolation(RuntimeError):
    def __init__(self, config: Config, prefix: tuple = ()):
        super().__init__(f"stuck configuration {config}")
        self.config = config
        self.prefix = prefix


class CycleDetected(RuntimeError):
    def __init__(self, config: Config):
        super().__init__(f"configuration {config} repeats along a computation")
        self.config = config


class CapExceeded(RuntimeError):
    pass


# ----------------------------------------------------------------- extr, null


def extract(p: Process) -> ActivityTerm:
    """Compensations that keep running when ``p`` is interrupted."""
    if isinstance(p, (Zero, CompPair)):
        return EMPTY
    if isinstance(p, Seq):
        return extract(p.left)
    if isinstance(p, Par):
        return tpar(extract(p.left), extract(p.right))
    if isinstance(p, Saga):
        return tseq(extract(p.body), p.stored)
    if isinstance(p, (Prot, Killed)):
        try:
            return process_to_term(p.body)
        except NotAnActivityTerm as exc:
            raise InvariantError(f"protected block {pretty(p)} does not hold a compensation") from exc
    raise TypeError(f"not a process: {p!r}")


def is_null(p: Process) -> bool:
    """True when ``p`` has no behaviour left (contains no activity)."""
    if isinstance(p, Zero):
        return True
    if isinstance(p, CompPair):
        return False
    if isinstance(p, (Seq, Par)):
        return is_null(p.left) and is_null(p.right)
    if isinstance(p, (Saga, Prot, Killed)):
        return is_null(p.body)
    raise TypeError(f"not a process: {p!r}")


# ---------------------------------------------------------------------- steps


class Stepper:
    """Derives single transitions for one environment.

    With ``literal=True`` every premise that consumes an abort must be
    silent, exactly as in the rule table.  That reading gets stuck when a
    killed compensation re-raises its abort with an activity label inside a
    saga or next to another killed compensation; the default instead lets
    such premises carry the activity label, which is forwarded (in place of
    the dagger for ``a-par-d``, whose enclosing context is already
    interrupted).
    """

    enabled_rules = frozenset(DYNAMIC_RULES)

    def __init__(self, env: Env, literal: bool = False):
        self.env = env
        self.literal = literal
        self._memo: dict[tuple[Process, ActivityTerm], tuple] = {}

    def steps(self, config: Config) -> tuple[tuple[Label, Target], ...]:
        """Distinct ``(label, target)`` pairs, in rule order."""
        seen = {}
        for label, target, _ in self.derive(config.process, config.stored):
            seen.setdefault((label, target), None)
        return tuple(seen)

    def derive(self, p: Process, beta: ActivityTerm) -> tuple:
        """Triples ``(label, target, rules)``; ``rules`` lists the rules used, root first."""
        key = (p, beta)
        found = self._memo.get(key)
        if found is None:
            found = self._memo[key] = tuple(self._derive(p, beta))
        return found

    def rules_used(self, config: Config) -> frozenset[str]:
        """Names of the rules occurring in derivations of steps from ``config``."""
        return frozenset(r for _, _, rules in self.derive(config.process, config.stored) for r in rules)

    def _on(self, rule: str) -> bool:
        return rule in self.enabled_rules

    def _abort_label(self, label: Label) -> Optional[Label]:
        """Label carried by an abort premise, or None if the premise is not admissible."""
        if label is SILENT or not self.literal:
            return label
        return None

    def _derive(self, p: Process, beta: ActivityTerm):
        if isinstance(p, Zero):
            if self._on("zero-d"):
                yield SILENT, Terminal(Outcome.COMMIT, beta), ("zero-d",)
        elif isinstance(p, CompPair):
            if self.env.commits(p.forward):
                if self._on("s-act-d"):
                    comp = beta if p.compensation is None else prepend(p.compensation, beta)
                    yield p.forward, Terminal(Outcome.COMMIT, comp), ("s-act-d",)
            elif self._on("f-act-d"):
                yield SILENT, Terminal(Outcome.ABORT, beta), ("f-act-d",)
        elif isinstance(p, Seq):
            yield from self._seq(p, beta)
        elif isinstance(p, Par):
            yield from self._par(p.left, p.right, beta, lambda x, y: Par(x, y))
            yield from self._par(p.right, p.left, beta, lambda x, y: Par(y, x))
        elif isinstance(p, Saga):
            yield from self._saga(p, beta)
        elif isinstance(p, (Prot, Killed)):
            yield from self._protected(p, beta)
        else:
            raise TypeError(f"not a process: {p!r}")

    def _seq(self, p: Seq, beta):
        for label, t, rules in self.derive(p.left, beta):
            if isinstance(t, Config):
                if label is DAGGER:
                    if self._on("k-step-d"):
                        yield DAGGER, t, ("k-step-d",) + rules
                elif self._on("step-d"):
                    yield label, Config(Seq(t.process, p.right), t.stored), ("step-d",) + rules
            elif t.outcome is Outcome.COMMIT:
                if self._on("s-step-d"):
                    yield label, Config(p.right, t.residual), ("s-step-d",) + rules
            elif t.outcome is Outcome.ABORT:
                lab = self._abort_label(label)
                if lab is not None and self._on("a-step-d"):
                    yield lab, t, ("a-step-d",) + rules
            elif self._on("f-step-d"):
                yield SILENT, t, ("f-step-d",) + rules

    def _par(self, moving, other, beta, place):
        for label, t, rules in self.derive(moving, beta):
            if isinstance(t, Config):
                if label is DAGGER:
                    if self._on("k-par-d"):
                        killed = Killed(term_to_process(extract(other)))
                        yield DAGGER, Config(place(t.process, killed), t.stored), ("k-par-d",) + rules
                elif self._on("par-d"):
                    yield label, Config(place(t.process, other), t.stored), ("par-d",) + rules
            elif t.outcome is Outcome.COMMIT:
                if self._on("s-par-d"):
                    yield label, Config(other, t.residual), ("s-par-d",) + rules
            elif t.outcome is Outcome.ABORT:
                lab = self._abort_label(label)
                if lab is None:
                    continue
                # built from an activity term, so null never meets a protected block here
                running = term_to_process(extract(other))
                if not is_null(running):
                    if self._on("a-par-d"):
                        out = DAGGER if lab is SILENT else lab
                        yield out, Config(Killed(running), t.residual), ("a-par-d",) + rules
                elif self._on("a-par-fin-d"):
                    yield lab, Terminal(Outcome.ABORT, t.residual), ("a-par-fin-d",) + rules
            elif self._on("f-par-d"):
                yield SILENT, Terminal(Outcome.FAIL, EMPTY), ("f-par-d",) + rules

    def _saga(self, p: Saga, outer):
        for label, t, rules in self.derive(p.body, p.stored):
            if isinstance(t, Config):
                running = Config(Saga(t.process, t.stored), outer)
                if label is DAGGER:
                    if self._on("k-saga-d"):
                        yield SILENT, running, ("k-saga-d",) + rules
                elif self._on("saga-d"):
                    yield label, running, ("saga-d",) + rules
            elif t.outcome is Outcome.COMMIT:
                if self._on("s-saga-d"):
                    yield label, Terminal(Outcome.COMMIT, concat(t.residual, outer)), ("s-saga-d",) + rules
            elif t.outcome is Outcome.ABORT:
                lab = self._abort_label(label)
                if lab is not None and self._on("a-saga-d"):
                    yield lab, Config(Prot(term_to_process(t.residual)), outer), ("a-saga-d",) + rules
            elif self._on("f-saga-d"):
                yield SILENT, Terminal(Outcome.FAIL, EMPTY), ("f-saga-d",) + rules

    def _protected(self, p, beta):
        wrap = type(p)
        for label, t, rules in self.derive(p.body, beta):
            if isinstance(t, Config):
                if label is DAGGER:
                    # delayed abortion only propagates through killed blocks
                    if wrap is Killed and self._on("k-prot-d"):
                        yield DAGGER, Config(Killed(t.process), t.stored), ("k-prot-d",) + rules
                elif self._on("prot-d"):
                    yield label, Config(wrap(t.process), t.stored), ("prot-d",) + rules
            elif t.outcome is Outcome.COMMIT:
                if wrap is Prot:
                    if self._on("s-prot-d"):
                        yield label, Terminal(Outcome.COMMIT, t.residual), ("s-prot-d",) + rules
                elif self._on("s-killed-d"):
                    yield label, Terminal(Outcome.ABORT, t.residual), ("s-killed-d",) + rules
            elif t.outcome is Outcome.ABORT:
                lab = self._abort_label(label)
                if lab is not None and self._on("a-prot-d"):
                    yield lab, Terminal(Outcome.FAIL, EMPTY), ("a-prot-d",) + rules


def steps(env: Env, c: Config) -> frozenset[tuple[Label, Target]]:
    """Every single transition from ``c``."""
    env.check_total(activities_of(c.process))
    return frozenset(Stepper(env).steps(c))


# --------------------------------------------------------------- computations


@dataclass(frozen=True)
class Computation:
    start: Config
    steps: tuple[tuple[Label, Target], ...]

    @property
    def final(self) -> Terminal:
        return self.steps[-1][1]

    @property
    def outcome(self) -> Outcome:
        return self.final.outcome

    @property
    def residual(self) -> ActivityTerm:
        return self.final.residual

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(label for label, _ in self.steps)

    @property
    def gamma(self) -> tuple[str, ...]:
        """Observable word: activity labels with silent and dagger steps removed."""
        return tuple(label for label in self.labels if not isinstance(label, Mark))

    @property
    def has_dagger(self) -> bool:
        return DAGGER in self.labels

    def configs(self) -> list[Config]:
        return [self.start] + [t for _, t in self.steps if isinstance(t, Config)]


def check_config(c: Config) -> None:
    """Stored compensations in a configuration are sequential."""
    if not is_sequential(c.stored):
        raise InvariantError(f"stored compensation of {c} is not sequential")
    stack = [c.process]
    while stack:
        q = stack.pop()
        if isinstance(q, Saga):
            if not is_sequential(q.stored):
                raise InvariantError(f"saga {pretty(q)} stores a non-sequential compensation")
            stack.append(q.body)
        elif isinstance(q, (Seq, Par)):
            stack += [q.left, q.right]
        elif isinstance(q, (Prot, Killed)):
            stack.append(q.body)


def iter_computations(stepper: Stepper, start: Config,
                      max_computations: int = DEFAULT_MAX_COMPUTATIONS,
                      max_length: int = DEFAULT_MAX_LENGTH):
    """Depth-first generator of maximal computations from ``start``.

    Raises :class:`ProgressViolation` on a stuck configuration,
    :class:`CycleDetected` if a configuration repeats along one path and
    :class:`CapExceeded` past the computation-count or length caps.
    """
    count = 0
    path: list[tuple[Label, Target]] = []
    on_path: set[Config] = {start}

    def visit(config: Config):
        nonlocal count
        check_config(config)
        succ = stepper.steps(config)
        if not succ:
            raise ProgressViolation(config, tuple(path))
        if len(path) >= max_length:
            raise CapExceeded(f"computation longer than {max_length} steps")
        for label, target in succ:
            path.append((label, target))
            if isinstance(target, Terminal):
                count += 1
                if count > max_computations:
                    raise CapExceeded(f"more than {max_computations} computations")
                yield Computation(start, tuple(path))
            else:
                if target in on_path:
                    raise CycleDetected(target)
                on_path.add(target)
                yield from visit(target)
                on_path.discard(target)
            path.pop()

    yield from visit(start)


def all_computations(env: Env, p: Process,
                     max_computations: int = DEFAULT_MAX_COMPUTATIONS) -> frozenset[Computation]:
    """Every maximal computation from ``<p, 0>``."""
    env.check_total(activities_of(p))
    if not is_source_level(p):
        raise ValueError("computations start from source-level processes")
    return frozenset(iter_computations(Stepper(env), Config(p), max_computations))


# ----------------------------------------------------------------- scheduling


class FirstEnabled:
    """Always takes the first enabled step in rule order."""

    def choose(self, options):
        return options[0]


class RandomScheduler:
    """Uniform choice among enabled steps from a seeded generator."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)

    def choose(self, options):
        return options[self.rng.randrange(len(options))]


def run(env: Env, p: Process, scheduler=None, max_length: int = DEFAULT_MAX_LENGTH) -> Computation:
    """Execute one maximal computation of ``p`` under ``scheduler``."""
    env.check_total(activities_of(p))
    scheduler = scheduler or FirstEnabled()
    stepper = Stepper(env)
    start = config = Config(p)
    trace = []
    while True:
        options = stepper.steps(config)
        if not options:
            raise ProgressViolation(config, tuple(trace))
        label, target = scheduler.choose(options)
        trace.append((label, target))
        if isinstance(target, Terminal):
            return Computation(start, tuple(trace))
        if len(trace) >= max_length:
            raise CapExceeded(f"computation longer than {max_length} steps")
        config = target
