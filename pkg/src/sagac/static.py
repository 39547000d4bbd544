"""Big-step semantics of nested sagas under centralized interruption.

:func:`big_steps` enumerates every judgment ``<P, beta> --alpha--> <o, beta'>``
derivable for a process.  The relation is non-deterministic, so results are
sets; the outcome operator :func:`combine` is partial and an undefined entry
simply prunes the parallel derivation that would need it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    CompPair,
    Env,
    Killed,
    Par,
    Process,
    Prot,
    Saga,
    Seq,
    Zero,
    activities_of,
    term_to_process,
)
from .terms import EMPTY, ActivityTerm, Atom, Empty, Outcome, atoms, tpar, tseq

C = Outcome.COMMIT
A = Outcome.ABORT
F = Outcome.FAIL
FA = Outcome.FORCED_ABORT
FF = Outcome.FORCED_FAIL
FAF = Outcome.FORCED_ABORT_FAILED

OUTCOMES = (C, A, FA, F, FF, FAF)
TOP_OUTCOMES = frozenset({C, A, F})
# outcomes whose stored compensation survives a parallel composition
STORING = frozenset({C, A, FA})
FAILING = frozenset({F, FF, FAF})

STATIC_RULES = (
    "zero", "s-act", "f-act", "s-step", "a-step", "s-par", "f-par",
    "forced-abt", "forced-fail", "sub-cmt", "sub-abt", "sub-fail-1",
    "sub-fail-2", "sub-forced-1", "sub-forced-2",
)

# Lower triangle of the outcome table, None where the table has "-".
LOWER_TABLE: dict[tuple[Outcome, Outcome], Optional[Outcome]] = {
    (C, C): C,
    (A, C): A, (A, A): None,
    (FA, C): FA, (FA, A): A, (FA, FA): FA,
    (F, C): F, (F, A): None, (F, FA): None, (F, F): None,
    (FF, C): FF, (FF, A): None, (FF, FA): None, (FF, F): F, (FF, FF): FF,
    (FAF, C): FAF, (FAF, A): F, (FAF, FA): None, (FAF, F): None, (FAF, FF): FAF, (FAF, FAF): None,
}


def symmetric_closure(lower):
    table = {}
    for (a, b), v in lower.items():
        table[a, b] = v
        table[b, a] = v
    return table


COMBINE_TABLE = symmetric_closure(LOWER_TABLE)


def combine(a: Outcome, b: Outcome) -> Optional[Outcome]:
    """Outcome of two parallel branches; ``None`` when undefined."""
    return COMBINE_TABLE[a, b]


@dataclass(frozen=True)
class Judgment:
    initial_comp: ActivityTerm
    label: ActivityTerm
    outcome: Outcome
    final_comp: ActivityTerm


class BigStepEnumerator:
    """Memoizing enumerator of big-step judgments for one environment."""

    def __init__(self, env: Env):
        self.env = env
        self._memo: dict[tuple[Process, ActivityTerm], tuple[frozenset, frozenset]] = {}

    def judgments(self, p: Process, beta: ActivityTerm = EMPTY) -> frozenset[Judgment]:
        return frozenset(Judgment(beta, a, o, b) for a, o, b in self._results(p, beta))

    def rules_used(self, p: Process, beta: ActivityTerm = EMPTY) -> frozenset[str]:
        """Names of the rules applied anywhere while enumerating ``<p, beta>``."""
        self._results(p, beta)
        return self._memo[p, beta][1]

    def _results(self, p: Process, beta: ActivityTerm) -> frozenset:
        key = (p, beta)
        found = self._memo.get(key)
        if found is None:
            rules: set[str] = set()
            results = frozenset(self._derive(p, beta, rules))
            found = self._memo[key] = (results, frozenset(rules))
        return found[0]

    def _sub(self, p: Process, beta: ActivityTerm, rules: set) -> frozenset:
        results = self._results(p, beta)
        rules.update(self._memo[p, beta][1])
        return results

    def _derive(self, p: Process, beta: ActivityTerm, rules: set):
        out: set[tuple[ActivityTerm, Outcome, ActivityTerm]] = set()

        def add(rule, label, outcome, comp):
            rules.add(rule)
            out.add((label, outcome, comp))

        add("forced-abt", EMPTY, FA, beta)
        add("forced-fail", EMPTY, FF, EMPTY)

        if isinstance(p, Zero):
            add("zero", EMPTY, C, beta)

        elif isinstance(p, CompPair):
            if self.env.commits(p.forward):
                comp = beta if p.compensation is None else tseq(Atom(p.compensation), beta)
                add("s-act", Atom(p.forward), C, comp)
            else:
                add("f-act", EMPTY, A, beta)

        elif isinstance(p, Seq):
            for label, outcome, mid in self._sub(p.left, beta, rules):
                if outcome is C:
                    for label2, outcome2, comp in self._sub(p.right, mid, rules):
                        add("s-step", tseq(label, label2), outcome2, comp)
                else:
                    add("a-step", label, outcome, mid)

        elif isinstance(p, Par):
            left = self._sub(p.left, EMPTY, rules)
            right = self._sub(p.right, EMPTY, rules)
            for l_label, l_out, l_comp in left:
                for r_label, r_out, r_comp in right:
                    outcome = combine(l_out, r_out)
                    if outcome is None:
                        continue
                    label = tpar(l_label, r_label)
                    if l_out in STORING and r_out in STORING:
                        add("s-par", label, outcome, tseq(tpar(l_comp, r_comp), beta))
                    else:
                        # f-par and its mirror image: one side is failing
                        add("f-par", label, outcome, EMPTY)

        elif isinstance(p, Saga):
            if not isinstance(p.stored, Empty):
                raise ValueError("big-step semantics is defined on source-level sagas only")
            self._derive_saga(p.body, beta, add, rules)

        elif isinstance(p, (Prot, Killed)):
            raise ValueError("big-step semantics is defined on source-level processes only")
        else:
            raise TypeError(f"not a process: {p!r}")
        return out

    def _derive_saga(self, body: Process, beta: ActivityTerm, add, rules: set) -> None:
        for label, outcome, comp in self._sub(body, EMPTY, rules):
            if outcome is C:
                add("sub-cmt", label, C, tseq(comp, beta))
            elif outcome in FAILING:
                add("sub-fail-1", label, outcome, EMPTY)
            elif outcome is A:
                for c_label, c_out, c_comp in self._compensate(comp, rules):
                    if not isinstance(c_comp, Empty):
                        continue
                    if c_out is C and c_label == comp:
                        add("sub-abt", tseq(label, comp), C, beta)
                    elif c_out is A:
                        add("sub-fail-2", tseq(label, c_label), F, EMPTY)
                    elif c_out is FF:
                        add("sub-forced-1", tseq(label, c_label), FF, EMPTY)
            elif outcome is FA:
                for c_label, c_out, c_comp in self._compensate(comp, rules):
                    if not isinstance(c_comp, Empty):
                        continue
                    if c_out is C:
                        add("sub-forced-2", tseq(label, c_label), FA, self.forced_abort_residual(beta))
                    elif c_out in (A, F):
                        add("sub-forced-2", tseq(label, c_label), FAF, EMPTY)

    def forced_abort_residual(self, beta: ActivityTerm) -> ActivityTerm:
        """Compensation left by a saga that was interrupted and compensated.

        Kept as the incoming compensation: dropping it loses compensations
        of activities preceding the saga in the same branch.
        """
        return beta

    def _compensate(self, comp: ActivityTerm, rules: set) -> frozenset:
        return self._sub(term_to_process(comp), EMPTY, rules)


class LiteralBigStepEnumerator(BigStepEnumerator):
    """Variant whose interrupted-saga rule discards the incoming compensation."""

    def forced_abort_residual(self, beta: ActivityTerm) -> ActivityTerm:
        return EMPTY


def big_steps(env: Env, p: Process, beta: ActivityTerm = EMPTY) -> frozenset[Judgment]:
    """Every judgment derivable for ``<p, beta>`` under ``env``."""
    env.check_total(activities_of(p) | set(atoms(beta)))
    return BigStepEnumerator(env).judgments(p, beta)


def top_big_steps(env: Env, p: Process) -> frozenset[Judgment]:
    """Judgments from an empty compensation ending in commit, abort or fail."""
    return frozenset(j for j in big_steps(env, p) if j.outcome in TOP_OUTCOMES)
