"""Finite distributed histories and the orders over them.

Orders are strict partial orders stored as sets of ``(before, after)`` event
id pairs.  Internally every order is also available as a tuple of predecessor
bitmasks indexed by event position, which is what the enumerators and the
checkers work on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .adt import OpLabel
from .errors import OrderError, SizeBoundError, StructureError

DEFAULT_MAX_EVENTS = 10

__all__ = [
    "DEFAULT_MAX_EVENTS",
    "Event",
    "OrderRelation",
    "History",
    "make_history",
    "processes",
    "project",
    "reorder",
    "causal_past",
    "linearizations",
    "linear_extensions",
    "causal_order_candidates",
    "total_extensions",
    "bits",
    "close",
]


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def close(preds: Sequence[int]) -> tuple[int, ...]:
    """Transitive closure of a predecessor-mask relation; raises on cycles."""
    n = len(preds)
    out = list(preds)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = out[i]
            for j in bits(out[i]):
                acc |= out[j]
            if acc != out[i]:
                out[i] = acc
                changed = True
    for i in range(n):
        if out[i] >> i & 1:
            raise OrderError("relation contains a cycle")
    return tuple(out)


@dataclass(frozen=True)
class Event:
    id: str
    process: str
    label: OpLabel


@dataclass(frozen=True)
class OrderRelation:
    pairs: frozenset = frozenset()
    kind: str = "causal_candidate"  # program | causal_candidate | total

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def issuperset(self, other: OrderRelation) -> bool:
        return self.pairs >= other.pairs

    def sorted_pairs(self) -> list[tuple[str, str]]:
        return sorted(self.pairs)


@dataclass(frozen=True)
class History:
    """Events plus a transitively closed program order.

    Build through :func:`make_history` or :meth:`History.build`; the plain
    constructor trusts its arguments.
    """

    events: tuple[Event, ...] = ()
    program_order: frozenset = field(default_factory=frozenset)

    @classmethod
    def build(cls, events: Iterable[Event], edges: Iterable[tuple[str, str]] = ()) -> History:
        events = tuple(events)
        ids = [e.id for e in events]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise StructureError(f"duplicate event ids: {', '.join(dup)}")
        index = {eid: i for i, eid in enumerate(ids)}
        preds = [0] * len(events)
        for a, b in edges:
            if a not in index or b not in index:
                raise StructureError(f"order edge {a} -> {b} references an unknown event")
            if a == b:
                raise OrderError(f"order edge {a} -> {b} is reflexive")
            preds[index[b]] |= 1 << index[a]
        closed = close(preds)
        pairs = frozenset((ids[j], ids[i]) for i in range(len(ids)) for j in bits(closed[i]))
        return cls(events, pairs)

    def __len__(self) -> int:
        return len(self.events)

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.events)

    @cached_property
    def index(self) -> dict[str, int]:
        return {eid: i for i, eid in enumerate(self.ids)}

    @cached_property
    def labels(self) -> tuple[OpLabel, ...]:
        return tuple(e.label for e in self.events)

    @cached_property
    def po_preds(self) -> tuple[int, ...]:
        return self.masks(self.program_order)

    def event(self, eid: str) -> Event:
        return self.events[self.index[eid]]

    def masks(self, pairs: Iterable[tuple[str, str]]) -> tuple[int, ...]:
        if isinstance(pairs, OrderRelation):
            pairs = pairs.pairs
        preds = [0] * len(self.events)
        for a, b in pairs:
            preds[self.index[b]] |= 1 << self.index[a]
        return tuple(preds)

    def pairs(self, preds: Sequence[int]) -> frozenset:
        ids = self.ids
        return frozenset((ids[j], ids[i]) for i in range(len(ids)) for j in bits(preds[i]))

    def relation(self, preds: Sequence[int], kind: str = "causal_candidate") -> OrderRelation:
        return OrderRelation(self.pairs(preds), kind)

    def mask_of(self, ids: Iterable[str]) -> int:
        m = 0
        for eid in ids:
            m |= 1 << self.index[eid]
        return m

    def ids_of(self, mask: int) -> frozenset:
        return frozenset(self.ids[i] for i in bits(mask))

    @property
    def program_relation(self) -> OrderRelation:
        return OrderRelation(self.program_order, "program")

    @cached_property
    def declared_processes(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {}
        for e in self.events:
            out.setdefault(e.process, []).append(e.id)
        return {p: tuple(v) for p, v in out.items()}


def make_history(
    process_sequences: Mapping[str, Sequence[OpLabel]],
    extra_edges: Iterable[tuple[str, str]] = (),
) -> History:
    """One chain per process, event ids ``<pid>.<idx>``, plus optional extra edges."""
    events = []
    edges = list(extra_edges)
    for pid, seq in process_sequences.items():
        for idx, lab in enumerate(seq):
            events.append(Event(f"{pid}.{idx}", pid, lab))
            if idx:
                edges.append((f"{pid}.{idx - 1}", f"{pid}.{idx}"))
    return History.build(events, edges)


def processes(h: History) -> tuple[frozenset, ...]:
    """Maximal chains of the program order, in a deterministic order."""
    n = len(h)
    preds = h.po_preds
    covers = [0] * n  # covers[i]: immediate predecessors of i
    for i in range(n):
        c = preds[i]
        for j in bits(preds[i]):
            c &= ~preds[j]
        covers[i] = c
    succ = [0] * n
    for i in range(n):
        for j in bits(covers[i]):
            succ[j] |= 1 << i
    chains = []

    def walk(i: int, acc: int) -> None:
        if not succ[i]:
            chains.append(acc)
            return
        for j in bits(succ[i]):
            walk(j, acc | 1 << j)

    for i in range(n):
        if not preds[i]:
            walk(i, 1 << i)
    return tuple(sorted((h.ids_of(c) for c in chains), key=lambda s: sorted(s)))


def chain_masks(h: History) -> tuple[int, ...]:
    return tuple(h.mask_of(c) for c in processes(h))


def project(h: History, keep: Iterable[str], reveal: Iterable[str]) -> History:
    """Keep only ``keep`` and hide the outputs of kept events outside ``reveal``."""
    keep = set(keep)
    reveal = set(reveal)
    events = tuple(
        e if e.id in reveal else Event(e.id, e.process, e.label.hide())
        for e in h.events
        if e.id in keep
    )
    order = frozenset((a, b) for a, b in h.program_order if a in keep and b in keep)
    return History(events, order)


def reorder(h: History, order: OrderRelation | Iterable[tuple[str, str]]) -> History:
    """The same events ordered by ``order`` instead of the program order."""
    pairs = order.pairs if isinstance(order, OrderRelation) else order
    return History.build(h.events, pairs)


def causal_past(order: OrderRelation | History, eid: str) -> frozenset:
    """``{e' : e' -> e}`` together with ``e`` itself."""
    pairs = order.program_order if isinstance(order, History) else order.pairs
    return frozenset({eid} | {a for a, b in pairs if b == eid})


def _extensions(n: int, preds: Sequence[int], members: int) -> Iterator[list[int]]:
    seq: list[int] = []

    def rec(placed: int) -> Iterator[list[int]]:
        if placed == members:
            yield list(seq)
            return
        for i in bits(members & ~placed):
            if preds[i] & members & ~placed:
                continue
            seq.append(i)
            yield from rec(placed | 1 << i)
            seq.pop()

    yield from rec(0)


def linear_extensions(h: History, order: OrderRelation | None = None) -> Iterator[tuple[str, ...]]:
    """Every total ordering of the events compatible with ``order`` (default: program order)."""
    preds = h.po_preds if order is None else h.masks(order)
    full = (1 << len(h)) - 1
    for seq in _extensions(len(h), preds, full):
        yield tuple(h.ids[i] for i in seq)


def linearizations(h: History, order: OrderRelation | None = None) -> Iterator[tuple[OpLabel, ...]]:
    for seq in linear_extensions(h, order):
        yield tuple(h.event(eid).label for eid in seq)


def total_extensions(h: History, base: OrderRelation | None = None) -> Iterator[OrderRelation]:
    for seq in linear_extensions(h, base):
        yield OrderRelation(
            frozenset((seq[i], seq[j]) for i in range(len(seq)) for j in range(i + 1, len(seq))),
            "total",
        )


def downsets(preds: Sequence[int], within: int, base: int) -> Iterator[int]:
    """Subsets ``D`` with ``base <= D <= within`` closed under ``preds``.

    ``preds`` must be transitively closed and ``within``/``base`` closed under it.
    """
    # In a closed relation a predecessor has a strictly smaller past, so
    # sorting by past size is a topological order.
    free = sorted(bits(within & ~base), key=lambda i: (bin(preds[i]).count("1"), i))

    def rec(k: int, acc: int) -> Iterator[int]:
        if k == len(free):
            yield acc
            return
        i = free[k]
        yield from rec(k + 1, acc)
        if preds[i] & ~acc == 0:
            yield from rec(k + 1, acc | 1 << i)

    yield from rec(0, base)


def candidate_masks(h: History) -> Iterator[tuple[int, ...]]:
    """Each strict partial order containing the program order, exactly once.

    Orders are built by inserting events along their lexicographically least
    linear extension; each inserted event picks its strict past among the
    downsets of what is already placed.
    """
    n = len(h)
    po = h.po_preds
    full = (1 << n) - 1
    past = [0] * n
    seq: list[int] = []
    where = [0] * n

    def rec(added: int) -> Iterator[tuple[int, ...]]:
        if added == full:
            yield tuple(past)
            return
        for e in bits(full & ~added):
            if po[e] & ~added:
                continue
            base = po[e]
            for d in bits(po[e]):
                base |= past[d]
            for D in downsets(past, added, base):
                start = max((where[d] + 1 for d in bits(D)), default=0)
                if any(seq[t] > e for t in range(start, len(seq))):
                    continue
                past[e] = D
                where[e] = len(seq)
                seq.append(e)
                yield from rec(added | 1 << e)
                seq.pop()
                past[e] = 0

    yield from rec(0)


def causal_order_candidates(
    h: History, max_events: int = DEFAULT_MAX_EVENTS
) -> Iterator[OrderRelation]:
    if len(h) > max_events:
        raise SizeBoundError(len(h), max_events)
    return (h.relation(preds) for preds in candidate_masks(h))
