"""Saga processes: term representation, concrete syntax, environments.

Concrete grammar (``;`` binds tighter than ``|``, both left-associative)::

    par  := seq ("|" seq)*
    seq  := atom (";" atom)*
    atom := "0" | ident ("%" ident)? | "[" par "]" | "(" par ")"

``A % B`` is activity ``A`` compensated by ``B``; a bare ``A`` means
``A % 0``.  Runtime-only forms print as ``[P, beta]`` (running saga),
``<P>`` (protected compensation) and ``{P}`` (killed compensation) but
cannot be parsed.
"""
from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Optional, Union

from .terms import (
    EMPTY,
    ActivityTerm,
    Atom,
    Empty,
    Outcome,
    TPar,
    TSeq,
    atoms,
    cached_hash,
    tpar,
    tseq,
)

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Zero:
    def __repr__(self) -> str:
        return "Zero"


@dataclass(frozen=True)
class CompPair:
    """``forward % compensation``; ``compensation is None`` stands for 0."""

    forward: str
    compensation: Optional[str] = None


@cached_hash
@dataclass(frozen=True)
class Seq:
    left: "Process"
    right: "Process"


@cached_hash
@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"


@cached_hash
@dataclass(frozen=True)
class Saga:
    body: "Process"
    stored: ActivityTerm = EMPTY


@cached_hash
@dataclass(frozen=True)
class Prot:
    body: "Process"


@cached_hash
@dataclass(frozen=True)
class Killed:
    body: "Process"


Process = Union[Zero, CompPair, Seq, Par, Saga, Prot, Killed]

ZERO = Zero()


class SagaSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int, source: str = "<string>"):
        super().__init__(f"{source}:{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col
        self.source = source


class EnvError(ValueError):
    def __init__(self, msg: str, line: int = 0, source: str = "<string>"):
        where = f"{source}:{line}:1: " if line else f"{source}: "
        super().__init__(where + msg)
        self.msg = msg
        self.line = line
        self.source = source


class MissingVerdict(KeyError):
    """An activity is used but the environment has no verdict for it."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"no verdict for activity {self.name!r} in the environment"


# ---------------------------------------------------------------- environments


class Env(Mapping):
    """Immutable, hashable map from activity names to commit/abort."""

    __slots__ = ("_verdicts", "_hash")

    def __init__(self, verdicts: Union[Mapping, Iterable, None] = None, **kw):
        data = dict(verdicts or {}, **kw)
        for name, v in data.items():
            v = Outcome(v)
            if v not in (Outcome.COMMIT, Outcome.ABORT):
                raise ValueError(f"verdict for {name!r} must be commit or abort, not {v}")
            data[name] = v
        self._verdicts = dict(sorted(data.items()))
        self._hash = hash(tuple(self._verdicts.items()))

    def __getitem__(self, name: str) -> Outcome:
        try:
            return self._verdicts[name]
        except KeyError:
            raise MissingVerdict(name) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._verdicts)

    def __len__(self) -> int:
        return len(self._verdicts)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Env):
            return self._verdicts == other._verdicts
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v.value}" for k, v in self._verdicts.items())
        return f"Env({{{inner}}})"

    def commits(self, name: str) -> bool:
        return self[name] is Outcome.COMMIT

    def check_total(self, names: Iterable[str]) -> None:
        for name in sorted(names):
            if name not in self._verdicts:
                raise MissingVerdict(name)

    def with_default_commit(self, names: Iterable[str]) -> "Env":
        data = dict(self._verdicts)
        for name in names:
            data.setdefault(name, Outcome.COMMIT)
        return Env(data)

    def to_text(self) -> str:
        return "".join(f"{k}: {v.value}\n" for k, v in self._verdicts.items())


def parse_env(text: str, source: str = "<string>") -> Env:
    """Parse ``name : commit|abort`` declarations, one per line."""
    verdicts: dict[str, Outcome] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, verdict = line.partition(":")
        name, verdict = name.strip(), verdict.strip()
        if not sep:
            raise EnvError(f"expected 'name : commit|abort', got {line!r}", lineno, source)
        if not IDENT_RE.fullmatch(name):
            raise EnvError(f"invalid activity name {name!r}", lineno, source)
        if verdict not in ("commit", "abort"):
            raise EnvError(f"unknown verdict {verdict!r} (use commit or abort)", lineno, source)
        if name in verdicts:
            raise EnvError(f"duplicate declaration of {name!r}", lineno, source)
        verdicts[name] = Outcome(verdict)
    return Env(verdicts)


# ---------------------------------------------------------------------- parser

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<comment>#[^\n]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>[0-9]+)|(?P<punct>[%;|\[\]()])|(?P<bad>.)",
    re.S,
)


@dataclass
class _Token:
    kind: str  # "ident", "zero", a punctuation char, or "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str, source: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind, value = m.lastgroup, m.group()
        col = m.start() - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(value):
                if ch == "\n":
                    line, line_start = line + 1, m.start() + i + 1
        elif kind == "comment":
            pass
        elif kind == "ident":
            tokens.append(_Token("ident", value, line, col))
        elif kind == "num":
            if value != "0":
                raise SagaSyntaxError(f"unexpected number {value!r}; only 0 is allowed", line, col, source)
            tokens.append(_Token("zero", value, line, col))
        elif kind == "punct":
            tokens.append(_Token(value, value, line, col))
        else:
            raise SagaSyntaxError(f"unexpected character {value!r}", line, col, source)
    tokens.append(_Token("eof", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, source: str):
        self.source = source
        self.tokens = _tokenize(text, source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, msg: str, tok: Optional[_Token] = None):
        tok = tok or self.tok
        raise SagaSyntaxError(msg, tok.line, tok.col, self.source)

    def expect(self, kind: str) -> _Token:
        tok = self.tok
        if tok.kind != kind:
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            self.error(f"expected {kind!r}, found {found}")
        self.i += 1
        return tok

    def parse(self) -> Process:
        p = self.par()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return p

    def par(self) -> Process:
        p = self.seq()
        while self.tok.kind == "|":
            self.i += 1
            p = Par(p, self.seq())
        return p

    def seq(self) -> Process:
        p = self.atom()
        while self.tok.kind == ";":
            self.i += 1
            p = Seq(p, self.atom())
        return p

    def atom(self) -> Process:
        tok = self.tok
        if tok.kind == "zero":
            self.i += 1
            if self.tok.kind == "%":
                self.error("'0' is reserved for the empty activity and cannot be compensated", tok)
            return ZERO
        if tok.kind == "ident":
            self.i += 1
            if self.tok.kind == "%":
                self.i += 1
                comp = self.tok
                if comp.kind == "zero":
                    self.error(f"'0' is reserved; write {tok.text!r} for an activity without compensation", comp)
                self.expect("ident")
                return CompPair(tok.text, comp.text)
            return CompPair(tok.text)
        if tok.kind == "[":
            self.i += 1
            body = self.par()
            self.expect("]")
            return Saga(body)
        if tok.kind == "(":
            self.i += 1
            body = self.par()
            self.expect(")")
            return body
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        self.error(f"expected a process, found {found}")


def parse_process(text: str, source: str = "<string>") -> Process:
    """Parse the concrete syntax into a source-level process."""
    return _Parser(text, source).parse()


def parse_term(text: str, source: str = "<string>") -> ActivityTerm:
    """Parse an activity term (names, ``0``, ``;``, ``|`` and parentheses)."""
    parser = _Parser(text, source)
    for tok in parser.tokens:
        if tok.kind in ("%", "[", "]"):
            parser.error(f"{tok.text!r} is not allowed in an activity term", tok)
    return process_to_term(parser.parse())


# --------------------------------------------------------------- conversions


def term_to_process(t: ActivityTerm) -> Process:
    """Run a compensation as a process: every name becomes ``B % 0``."""
    if isinstance(t, Empty):
        return ZERO
    if isinstance(t, Atom):
        return CompPair(t.name)
    if isinstance(t, TSeq):
        return Seq(term_to_process(t.left), term_to_process(t.right))
    return Par(term_to_process(t.left), term_to_process(t.right))


class NotAnActivityTerm(ValueError):
    pass


def process_to_term(p: Process) -> ActivityTerm:
    """Inverse of :func:`term_to_process`; the result is unit-normalized."""
    if isinstance(p, Zero):
        return EMPTY
    if isinstance(p, CompPair) and p.compensation is None:
        return Atom(p.forward)
    if isinstance(p, Seq):
        return tseq(process_to_term(p.left), process_to_term(p.right))
    if isinstance(p, Par):
        return tpar(process_to_term(p.left), process_to_term(p.right))
    raise NotAnActivityTerm(f"{pretty(p)} is not a composition of plain activities")


# -------------------------------------------------------------------- printing

def _wrap(child, parent_kind: type, right: bool, render, binary: tuple) -> str:
    s = render(child)
    if isinstance(child, binary):
        if type(child) is not parent_kind or right:
            return f"({s})"
    return s


def pretty_term(t: ActivityTerm) -> str:
    if isinstance(t, Empty):
        return "0"
    if isinstance(t, Atom):
        return t.name
    op = "; " if isinstance(t, TSeq) else " | "
    b = (TSeq, TPar)
    return (_wrap(t.left, type(t), False, pretty_term, b) + op
            + _wrap(t.right, type(t), True, pretty_term, b))


def pretty(p: Process) -> str:
    if isinstance(p, Zero):
        return "0"
    if isinstance(p, CompPair):
        return p.forward if p.compensation is None else f"{p.forward} % {p.compensation}"
    if isinstance(p, (Seq, Par)):
        op = "; " if isinstance(p, Seq) else " | "
        b = (Seq, Par)
        return _wrap(p.left, type(p), False, pretty, b) + op + _wrap(p.right, type(p), True, pretty, b)
    if isinstance(p, Saga):
        if isinstance(p.stored, Empty):
            return f"[{pretty(p.body)}]"
        return f"[{pretty(p.body)}, {pretty_term(p.stored)}]"
    if isinstance(p, Prot):
        return f"<{pretty(p.body)}>"
    if isinstance(p, Killed):
        return f"{{{pretty(p.body)}}}"
    raise TypeError(f"not a process: {p!r}")


# ------------------------------------------------------------------- queries

def activities_of(p: Process) -> frozenset[str]:
    """Every forward and compensation name occurring in ``p``."""
    names: set[str] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, CompPair):
            names.add(q.forward)
            if q.compensation is not None:
                names.add(q.compensation)
        elif isinstance(q, (Seq, Par)):
            stack += [q.left, q.right]
        elif isinstance(q, Saga):
            names.update(atoms(q.stored))
            stack.append(q.body)
        elif isinstance(q, (Prot, Killed)):
            stack.append(q.body)
    return frozenset(names)


def is_source_level(p: Process) -> bool:
    if isinstance(p, (Zero, CompPair)):
        return True
    if isinstance(p, (Seq, Par)):
        return is_source_level(p.left) and is_source_level(p.right)
    if isinstance(p, Saga):
        return isinstance(p.stored, Empty) and is_source_level(p.body)
    return False


def count_activities(p: Process) -> int:
    """Number of ``CompPair`` nodes."""
    if isinstance(p, CompPair):
        return 1
    if isinstance(p, (Seq, Par)):
        return count_activities(p.left) + count_activities(p.right)
    if isinstance(p, (Saga, Prot, Killed)):
        return count_activities(p.body)
    return 0


def saga_depth(p: Process) -> int:
    if isinstance(p, (Seq, Par)):
        return max(saga_depth(p.left), saga_depth(p.right))
    if isinstance(p, Saga):
        return 1 + saga_depth(p.body)
    if isinstance(p, (Prot, Killed)):
        return saga_depth(p.body)
    return 0


def subterms(p: Process) -> Iterator[Process]:
    """All subterms of ``p`` including ``p`` itself, outermost first."""
    yield p
    if isinstance(p, (Seq, Par)):
        yield from subterms(p.left)
        yield from subterms(p.right)
    elif isinstance(p, (Saga, Prot, Killed)):
        yield from subterms(p.body)


def size(p: Process) -> int:
    return sum(1 for _ in subterms(p))
