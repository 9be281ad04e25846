"""Seeded random histories for property suites.

Query outputs are produced from plausible views: events are placed in a
random global order and each query observes a random subsequence of the
updates placed before it, always including the earlier updates of its own
process.  That yields a healthy mix of consistent and inconsistent histories.
"""

from __future__ import annotations

import random

from .adt import AdtSpec, OpLabel, Symbol, memory, queue, window_stream
from .history import History, make_history

ADT_CHOICES = ("window_stream", "memory", "queue")


def _symbols(rng: random.Random, adt: AdtSpec, count: int, values: int, distinct: bool) -> list[Symbol]:
    out = []
    fresh = iter(range(1, 10_000))
    for _ in range(count):
        upd = rng.random() < 0.45
        v = next(fresh) if distinct else rng.randint(1, values)
        if adt.name == "window_stream":
            out.append(Symbol("w", None, v) if upd else Symbol("r"))
        elif adt.name == "memory":
            x = rng.choice(adt.params[0])
            out.append(Symbol("w", x, v) if upd else Symbol("r", x))
        elif adt.name == "queue":
            out.append(Symbol("push", None, v) if upd else Symbol("pop"))
        else:
            raise ValueError(f"no generator for {adt.name}")
    return out


def random_history(rng: random.Random, adt: AdtSpec, max_events: int = 6, max_procs: int = 3,
                   values: int = 2, distinct: bool = False, hide_prob: float = 0.0,
                   wild: float = 0.0) -> History:
    """``wild`` is the chance that a memory read returns any value written to its
    register anywhere in the history (or 0), ignoring placement."""
    total = rng.randint(min(4, max_events), max_events)
    nproc = rng.randint(min(2, max_procs), min(max_procs, total))
    owner = [rng.randrange(nproc) for _ in range(total)]
    syms = _symbols(rng, adt, total, values, distinct)
    applied: list[int] = []  # positions of updates in global order
    labels: list[OpLabel] = []
    for i, sym in enumerate(syms):
        kind = adt.classification(sym)
        out = None
        if kind.is_query:
            seen = [u for u in applied if owner[u] == owner[i] or rng.random() < 0.4]
            if rng.random() < 0.3:
                rng.shuffle(seen)
            q = adt.initial_state
            for u in seen:
                q = adt.transition(q, syms[u])
            out = adt.output(q, sym)
            if adt.is_memory and rng.random() < wild:
                pool = [0] + [s.value for s in syms if s.name == "w" and s.reg == sym.reg]
                out = rng.choice(pool)
        elif rng.random() >= hide_prob:
            out = adt.output(adt.initial_state, sym)
        if kind.is_update:
            applied.append(i)
        labels.append(OpLabel(sym, out))
    seqs: dict[str, list[OpLabel]] = {}
    for i in range(total):
        seqs.setdefault(f"p{owner[i]}", []).append(labels[i])
    return make_history(dict(sorted(seqs.items())))


def random_corpus(seed: int, count: int, max_events: int = 6) -> list[tuple[AdtSpec, History]]:
    """``count`` histories cycling through W2, a two-register memory and Q."""
    rng = random.Random(seed)
    adts = [window_stream(2), memory("ab"), queue()]
    return [(adts[i % 3], random_history(rng, adts[i % 3], max_events, wild=0.3)) for i in range(count)]


def distinct_memory_corpus(seed: int, count: int, max_events: int = 6) -> list[tuple[AdtSpec, History]]:
    """Memory histories whose written values are pairwise distinct and non-zero."""
    rng = random.Random(seed)
    mem = memory("ab")
    return [(mem, random_history(rng, mem, max_events, distinct=True, wild=0.4)) for _ in range(count)]
