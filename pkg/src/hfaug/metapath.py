"""Metapath patterns and instance enumeration on a :class:`HetGraph`.

Patterns are written as ``KIND (-etype-> KIND)+``, e.g.
``"EOA -call-> CA_t -trans-> EOA -trans-> CA"``. A ``_t`` suffix marks the
target position used by target-CA augmentation; without one the first CA in
the pattern is the target.

Instances are walks (nodes may repeat). Parallel edges count once. Neighbours
are visited in address order, so enumeration order is deterministic and
prefix-stable under ``max_instances``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import islice

from .errors import (
    AnchorOutOfRange,
    KindMismatch,
    KindMismatchAtStart,
    PatternSyntaxError,
)
from .graph import IN, OUT, HetGraph
from .records import EdgeType, Kind


@dataclass(frozen=True)
class MetapathStep:
    edge_type: EdgeType
    dst_kind: Kind
    direction: str = "forward"


@dataclass(frozen=True)
class MetapathPattern:
    name: str
    head_kind: Kind
    steps: tuple[MetapathStep, ...]
    target_pos: int = 0

    def __post_init__(self):
        if not self.steps:
            raise KindMismatch("a metapath needs at least one step")
        if not 0 <= self.target_pos <= len(self.steps):
            raise AnchorOutOfRange(self.target_pos)

    @property
    def kinds(self) -> tuple[Kind, ...]:
        return (self.head_kind,) + tuple(s.dst_kind for s in self.steps)

    def __len__(self):
        return len(self.steps)

    def __str__(self):
        parts = []
        for pos, kind in enumerate(self.kinds):
            tag = kind.value + ("_t" if pos == self.target_pos else "")
            if pos:
                parts.append(f"-{self.steps[pos - 1].edge_type.value}->")
            parts.append(tag)
        return " ".join(parts)


@dataclass(frozen=True)
class MatchInstance:
    """A node walk realising ``pattern`` positions ``offset .. offset+len(nodes)-1``."""

    nodes: tuple[str, ...]
    complete: bool
    offset: int = 0

    def to_json(self, start: str, pattern: str) -> dict:
        return {
            "start": start,
            "pattern": pattern,
            "nodes": list(self.nodes),
            "complete": self.complete,
            "offset": self.offset,
        }


@dataclass(frozen=True)
class MatchLimits:
    max_instances: int = 1000

    def __post_init__(self):
        if self.max_instances < 1:
            raise ValueError("max_instances must be >= 1")


@dataclass
class MatchResult:
    """Instances found plus the number that existed before truncation."""

    instances: list[MatchInstance] = field(default_factory=list)
    total: int = 0

    @property
    def overflow(self) -> int:
        return self.total - len(self.instances)

    @property
    def truncated(self) -> bool:
        return self.overflow > 0

    @property
    def n_complete(self) -> int:
        return sum(1 for m in self.instances if m.complete)

    def __iter__(self):
        return iter(self.instances)

    def __len__(self):
        return len(self.instances)

    def __getitem__(self, i):
        return self.instances[i]


_TOKEN = re.compile(r"\s*(?:(?P<kind>[A-Za-z]+(?:_t)?)|(?P<arrow>-\s*(?P<etype>[A-Za-z]+)\s*->))")


def compile_pattern(spec: str, name: str | None = None) -> MetapathPattern:
    """Parse the arrow DSL; ``"P1"`` and ``"P2"`` resolve to the built-ins."""
    key = spec.strip()
    if key.upper() in BUILTINS:
        return BUILTINS[key.upper()]
    kinds: list[Kind] = []
    etypes: list[EdgeType] = []
    target = None
    pos = 0
    expect_kind = True
    while pos < len(spec):
        if not spec[pos:].strip():
            break
        m = _TOKEN.match(spec, pos)
        if m is None:
            raise PatternSyntaxError(pos, f"unexpected text {spec[pos:pos + 10]!r}")
        at = m.start(m.lastgroup if m.lastgroup != "etype" else "arrow")
        if m.group("kind") is not None:
            if not expect_kind:
                raise PatternSyntaxError(at, "expected an edge arrow like -call-> or -trans->")
            word = m.group("kind")
            marked = word.endswith("_t")
            word = word[:-2] if marked else word
            try:
                kinds.append(Kind(word.upper()))
            except ValueError:
                raise PatternSyntaxError(at, f"unknown node kind {word!r}") from None
            if marked:
                if target is not None:
                    raise PatternSyntaxError(at, "more than one target marker")
                target = len(kinds) - 1
            expect_kind = False
        else:
            if expect_kind:
                raise PatternSyntaxError(at, "expected a node kind (CA or EOA)")
            try:
                etypes.append(EdgeType(m.group("etype").lower()))
            except ValueError:
                raise PatternSyntaxError(at, f"unknown edge type {m.group('etype')!r}") from None
            expect_kind = True
        pos = m.end()
    if expect_kind:
        raise PatternSyntaxError(len(spec), "pattern must end with a node kind")
    if not etypes:
        raise PatternSyntaxError(len(spec), "pattern needs at least one step")
    for et, kind in zip(etypes, kinds[1:]):
        if et is EdgeType.CALL and kind is not Kind.CA:
            raise KindMismatch("call edges can only end at a CA")
    if target is None:
        target = kinds.index(Kind.CA) if Kind.CA in kinds else 0
    steps = tuple(MetapathStep(et, k) for et, k in zip(etypes, kinds[1:]))
    return MetapathPattern(name or key, kinds[0], steps, target)


BUILTINS: dict[str, MetapathPattern] = {}
BUILTINS["P1"] = compile_pattern("CA_t -call-> CA -trans-> EOA -call-> CA", "P1")
BUILTINS["P2"] = compile_pattern("EOA -call-> CA_t -trans-> EOA -trans-> CA", "P2")
P1, P2 = BUILTINS["P1"], BUILTINS["P2"]


class Matcher:
    """Enumerates instances of one pattern on one graph.

    Successor lists and walk counts are memoised, so reuse a single matcher
    for many start nodes.
    """

    def __init__(self, g: HetGraph, pattern: MetapathPattern):
        self.g = g
        self.pattern = pattern
        self._kind_is_ca = [k is Kind.CA for k in pattern.kinds]
        self._succ: dict[tuple[int, int], tuple[int, ...]] = {}
        self._pred: dict[tuple[int, int], tuple[int, ...]] = {}
        self._n_complete: dict[tuple[int, int], int] = {}
        self._n_maximal: dict[tuple[int, int], int] = {}
        self._n_back_complete: dict[tuple[int, int], int] = {}
        self._n_back_maximal: dict[tuple[int, int], int] = {}

    # -- neighbourhoods -----------------------------------------------------
    def successors(self, pos: int, i: int) -> tuple[int, ...]:
        """Nodes at ``pos+1`` reachable from node ``i`` at ``pos``."""
        key = (pos, i)
        out = self._succ.get(key)
        if out is None:
            step = self.pattern.steps[pos]
            nbrs = self.g.neighbor_index(i, step.edge_type, OUT)
            out = tuple(int(j) for j in nbrs[self.g.is_ca[nbrs] == self._kind_is_ca[pos + 1]])
            self._succ[key] = out
        return out

    def predecessors(self, pos: int, i: int) -> tuple[int, ...]:
        """Nodes at ``pos-1`` that reach node ``i`` at ``pos``."""
        key = (pos, i)
        out = self._pred.get(key)
        if out is None:
            step = self.pattern.steps[pos - 1]
            nbrs = self.g.neighbor_index(i, step.edge_type, IN)
            out = tuple(int(j) for j in nbrs[self.g.is_ca[nbrs] == self._kind_is_ca[pos - 1]])
            self._pred[key] = out
        return out

    # -- counting -----------------------------------------------------------
    def count_complete(self, pos: int, i: int) -> int:
        """Number of forward walks from ``i`` at ``pos`` to the pattern end."""
        if pos == len(self.pattern.steps):
            return 1
        key = (pos, i)
        c = self._n_complete.get(key)
        if c is None:
            c = sum(self.count_complete(pos + 1, j) for j in self.successors(pos, i))
            self._n_complete[key] = c
        return c

    def count_maximal(self, pos: int, i: int) -> int:
        """Number of non-extendable forward walks from ``i`` at ``pos``."""
        if pos == len(self.pattern.steps):
            return 1
        key = (pos, i)
        c = self._n_maximal.get(key)
        if c is None:
            succ = self.successors(pos, i)
            c = sum(self.count_maximal(pos + 1, j) for j in succ) if succ else 1
            self._n_maximal[key] = c
        return c

    def count_back_complete(self, pos: int, i: int) -> int:
        if pos == 0:
            return 1
        key = (pos, i)
        c = self._n_back_complete.get(key)
        if c is None:
            c = sum(self.count_back_complete(pos - 1, j) for j in self.predecessors(pos, i))
            self._n_back_complete[key] = c
        return c

    def count_back_maximal(self, pos: int, i: int) -> int:
        if pos == 0:
            return 1
        key = (pos, i)
        c = self._n_back_maximal.get(key)
        if c is None:
            pred = self.predecessors(pos, i)
            c = sum(self.count_back_maximal(pos - 1, j) for j in pred) if pred else 1
            self._n_back_maximal[key] = c
        return c

    # -- enumeration --------------------------------------------------------
    def _forward(self, pos: int, i: int, complete_only: bool):
        """DFS generator of forward walks (tuples of indices) starting at ``i``."""
        last = len(self.pattern.steps)
        stack = [(pos, (i,))]
        while stack:
            p, walk = stack.pop()
            if p == last:
                yield walk
                continue
            succ = self.successors(p, walk[-1])
            if complete_only:
                succ = [j for j in succ if self.count_complete(p + 1, j)]
            elif not succ:
                yield walk
                continue
            for j in reversed(succ):
                stack.append((p + 1, walk + (j,)))

    def _backward(self, pos: int, i: int, complete_only: bool):
        """DFS generator of backward walks from ``i`` at ``pos``; yields them in pattern order."""
        stack = [(pos, (i,))]
        while stack:
            p, walk = stack.pop()
            if p == 0:
                yield walk[::-1]
                continue
            pred = self.predecessors(p, walk[-1])
            if complete_only:
                pred = [j for j in pred if self.count_back_complete(p - 1, j)]
            elif not pred:
                yield walk[::-1]
                continue
            for j in reversed(pred):
                stack.append((p - 1, walk + (j,)))

    def anchored(self, i: int, anchor: int, limit: int) -> tuple[list[tuple[tuple[int, ...], bool, int]], int]:
        """Instances with node ``i`` at ``anchor``: list of (walk, complete, offset) and total count."""
        n_fwd = self.count_complete(anchor, i)
        fwd_complete = n_fwd > 0
        if not fwd_complete:
            n_fwd = self.count_maximal(anchor, i)
        n_back = self.count_back_complete(anchor, i)
        back_complete = n_back > 0
        if not back_complete:
            n_back = self.count_back_maximal(anchor, i)
        total = n_fwd * n_back
        forwards = list(islice(self._forward(anchor, i, fwd_complete), limit))
        out = []
        for back in self._backward(anchor, i, back_complete):
            offset = anchor - (len(back) - 1)
            for fwd in forwards:
                if len(out) >= limit:
                    return out, total
                walk = back[:-1] + fwd
                out.append((walk, fwd_complete and back_complete, offset))
            if len(out) >= limit:
                break
        return out, total


def _to_result(g: HetGraph, raw, total: int) -> MatchResult:
    ids = g.ids
    return MatchResult(
        [MatchInstance(tuple(ids[j] for j in walk), complete, offset) for walk, complete, offset in raw],
        total,
    )


def match_anchored(
    g: HetGraph,
    target: str,
    p: MetapathPattern,
    anchor_pos: int,
    limits: MatchLimits = MatchLimits(),
    matcher: Matcher | None = None,
) -> MatchResult:
    """Instances of ``p`` that have ``target`` at position ``anchor_pos``.

    Positions after the anchor are filled by a forward DFS, positions before
    it by walking the required edges backwards. On either side, when no
    complete continuation exists the maximal (non-extendable) partial walks
    are used instead, so an instance may cover only part of the pattern.
    """
    if not 0 <= anchor_pos <= len(p.steps):
        raise AnchorOutOfRange(f"anchor {anchor_pos} outside pattern of {len(p.steps) + 1} positions")
    i = g.node_index(target)
    want = p.kinds[anchor_pos]
    if g.kind_of_index(i) is not want:
        raise KindMismatchAtStart(f"{target} is {g.kind_of_index(i).value}, pattern expects {want.value}")
    m = matcher if matcher is not None else Matcher(g, p)
    raw, total = m.anchored(i, anchor_pos, limits.max_instances)
    return _to_result(g, raw, total)


def match_from(
    g: HetGraph,
    start: str,
    p: MetapathPattern,
    limits: MatchLimits = MatchLimits(),
    matcher: Matcher | None = None,
) -> MatchResult:
    """Instances of ``p`` whose head is ``start``.

    All complete instances in DFS order, up to ``limits.max_instances``; if
    none exist, the maximal partial prefixes instead.
    """
    return match_anchored(g, start, p, 0, limits, matcher)


def resolve_patterns(names) -> list[MetapathPattern]:
    """``"P1,P2"`` or an iterable of names / DSL strings -> patterns."""
    if isinstance(names, str):
        names = [n for n in names.split(",") if n.strip()] if "->" not in names else [names]
    return [n if isinstance(n, MetapathPattern) else compile_pattern(n) for n in names]
