"""Activity terms: observation labels and stored compensations.

Activity terms are built from activity names with sequential and parallel
composition.  The empty term is the unit of both operators; every
constructor in this module keeps terms in unit-normal form.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterator, Union


def cached_hash(cls):
    """Memoize the hash of a frozen dataclass node; trees are hashed often
    as memo keys and the generated hash walks the whole tree."""
    names = tuple(f.name for f in fields(cls))

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_hash", h)
            return h

    def __reduce__(self):
        # string hashes differ between interpreters, so never ship the cache
        return cls, tuple(getattr(self, n) for n in names)

    cls.__hash__ = __hash__
    cls.__reduce__ = __reduce__
    return cls


@dataclass(frozen=True)
class Empty:
    def __repr__(self) -> str:
        return "Empty"


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name})"


@cached_hash
@dataclass(frozen=True)
class TSeq:
    left: "ActivityTerm"
    right: "ActivityTerm"


@cached_hash
@dataclass(frozen=True)
class TPar:
    left: "ActivityTerm"
    right: "ActivityTerm"


ActivityTerm = Union[Empty, Atom, TSeq, TPar]

EMPTY = Empty()


def tseq(left: ActivityTerm, right: ActivityTerm) -> ActivityTerm:
    """Sequential composition with the unit axioms applied at the root."""
    if isinstance(left, Empty):
        return right
    if isinstance(right, Empty):
        return left
    return TSeq(left, right)


def tpar(left: ActivityTerm, right: ActivityTerm) -> ActivityTerm:
    """Parallel composition with the unit axioms applied at the root."""
    if isinstance(left, Empty):
        return right
    if isinstance(right, Empty):
        return left
    return TPar(left, right)


def normalize(t: ActivityTerm) -> ActivityTerm:
    """Remove every ``Empty`` child of a ``TSeq``/``TPar`` node.

    Only the four unit axioms are applied; neither associativity nor
    commutativity is assumed.  Normal subterms are returned unchanged.
    """
    if isinstance(t, (TSeq, TPar)):
        left, right = normalize(t.left), normalize(t.right)
        if left is t.left and right is t.right and not isinstance(left, Empty) and not isinstance(right, Empty):
            return t
        return tseq(left, right) if isinstance(t, TSeq) else tpar(left, right)
    return t


def is_normal(t: ActivityTerm) -> bool:
    if isinstance(t, (TSeq, TPar)):
        if isinstance(t.left, Empty) or isinstance(t.right, Empty):
            return False
        return is_normal(t.left) and is_normal(t.right)
    return True


def atoms(t: ActivityTerm) -> Iterator[str]:
    """Activity occurrences of ``t`` from left to right (with repetitions)."""
    if isinstance(t, Atom):
        yield t.name
    elif isinstance(t, (TSeq, TPar)):
        yield from atoms(t.left)
        yield from atoms(t.right)


def is_sequential(t: ActivityTerm) -> bool:
    if isinstance(t, TPar):
        return False
    if isinstance(t, TSeq):
        return is_sequential(t.left) and is_sequential(t.right)
    return True


def word_term(names) -> ActivityTerm:
    """Left-nested sequential term for a word; the empty word gives ``EMPTY``."""
    t: ActivityTerm = EMPTY
    for name in names:
        t = tseq(t, Atom(name))
    return t


def word_of(t: ActivityTerm) -> tuple[str, ...]:
    """The word spelled by a sequential term."""
    if not is_sequential(t):
        raise ValueError(f"not a sequential term: {t!r}")
    return tuple(atoms(t))


def prepend(name: str, t: ActivityTerm) -> ActivityTerm:
    """``name; t`` for a sequential ``t``, kept in canonical left-nested shape."""
    return word_term((name,) + word_of(t))


def concat(first: ActivityTerm, second: ActivityTerm) -> ActivityTerm:
    """``first; second`` for sequential terms, kept left-nested."""
    return word_term(word_of(first) + word_of(second))


class Outcome(str, Enum):
    """Results of a (sub)transaction.

    The first two double as activity verdicts in an environment.
    """

    COMMIT = "commit"
    ABORT = "abort"
    FAIL = "fail"
    FORCED_ABORT = "forced-abort"
    FORCED_FAIL = "forced-fail"
    FORCED_ABORT_FAILED = "forced-abort-failed"

    def __str__(self) -> str:
        return self.value
