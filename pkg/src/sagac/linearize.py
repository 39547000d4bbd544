"""Linearizations of activity terms.

A term ``alpha`` denotes the set of words ``lin(alpha)``: sequential
composition concatenates, parallel composition interleaves.  Materializing
the set grows factorially, so membership is decided separately by
:func:`is_linearization` without building it.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb

from .terms import EMPTY, ActivityTerm, Atom, Empty, TPar, TSeq, normalize, tpar, tseq

Word = tuple[str, ...]

DEFAULT_LIN_CAP = 10**5


class LinearizationCapExceeded(ValueError):
    def __init__(self, count: int, cap: int):
        super().__init__(
            f"term has {count} linearizations (cap {cap}); "
            "use is_linearization for membership instead"
        )
        self.count = count
        self.cap = cap


@lru_cache(maxsize=None)
def interleavings(u: Word, v: Word) -> frozenset[Word]:
    """All shuffles of ``u`` and ``v``."""
    if not u:
        return frozenset({v})
    if not v:
        return frozenset({u})
    return frozenset(
        {(u[0],) + w for w in interleavings(u[1:], v)}
        | {(v[0],) + w for w in interleavings(u, v[1:])}
    )


def count_linearizations(t: ActivityTerm) -> int:
    """Upper bound on ``len(linearizations(t))`` (exact when names are distinct)."""
    return _count(t)[0]


def _count(t) -> tuple[int, int]:
    # (number of words, word length)
    if isinstance(t, Empty):
        return 1, 0
    if isinstance(t, Atom):
        return 1, 1
    (a, n), (b, m) = _count(t.left), _count(t.right)
    if isinstance(t, TSeq):
        return a * b, n + m
    return a * b * comb(n + m, n), n + m


def linearizations(t: ActivityTerm, cap: int = DEFAULT_LIN_CAP) -> frozenset[Word]:
    """Materialize ``lin(t)``; raises :class:`LinearizationCapExceeded` past ``cap`` words."""
    bound = count_linearizations(t)
    if bound > cap:
        raise LinearizationCapExceeded(bound, cap)
    return _lin(t)


def _lin(t: ActivityTerm) -> frozenset[Word]:
    if isinstance(t, Empty):
        return frozenset({()})
    if isinstance(t, Atom):
        return frozenset({(t.name,)})
    left, right = _lin(t.left), _lin(t.right)
    if isinstance(t, TSeq):
        return frozenset(u + v for u in left for v in right)
    return frozenset().union(*(interleavings(u, v) for u in left for v in right))


@lru_cache(maxsize=1 << 16)
def _derivatives(t: ActivityTerm, name: str) -> frozenset[ActivityTerm]:
    """Residual terms after performing ``name`` first."""
    if isinstance(t, Atom):
        return frozenset({EMPTY}) if t.name == name else frozenset()
    if isinstance(t, TSeq):
        # left is never empty for a unit-normal term
        return frozenset(tseq(d, t.right) for d in _derivatives(t.left, name))
    if isinstance(t, TPar):
        return frozenset(
            {tpar(d, t.right) for d in _derivatives(t.left, name)}
            | {tpar(t.left, d) for d in _derivatives(t.right, name)}
        )
    return frozenset()


def is_linearization(w, t: ActivityTerm) -> bool:
    """Decide ``w in lin(t)`` by consuming ``w`` against the enabled activities of ``t``."""
    w = tuple(w)
    n = len(w)
    memo: dict = {}

    def accepts(term: ActivityTerm, i: int) -> bool:
        if i == n:
            return isinstance(term, Empty)
        key = (term, i)
        found = memo.get(key)
        if found is None:
            found = memo[key] = any(accepts(d, i + 1) for d in _derivatives(term, w[i]))
        return found

    return accepts(normalize(t), 0)
