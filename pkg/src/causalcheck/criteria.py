"""Witness search for SC, PC, WCC, CC, CCv and CM on finite histories.

All criteria reduce to one primitive: does some linear extension of a set of
events, under a given order, replay through the ADT with a chosen subset of
outputs revealed?  That search runs over downsets with failure memoisation on
``(placed events, ADT state)``.

WCC, CC and CCv additionally quantify over causal orders.  Those are built by
inserting events one at a time, each event choosing its causal past among
downsets of the events already placed, and abandoning a branch as soon as an
inserted event has no admissible linearization.  Because shrinking the past
of an event only removes constraints from every other event, a history is
accepted iff it is accepted by an order in which every past is
inclusion-minimal among the pasts that pass that event's own check.  Only
those minimal pasts are branched on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Iterable

from .adt import AdtSpec, OpLabel, admits
from .errors import AdtTypeError, OrderError, SizeBoundError
from .history import History, OrderRelation, bits, close, processes

CRITERIA = ("SC", "PC", "WCC", "CC", "CCv", "CM")
DEFAULT_CHECK_BOUND = 12

# Witness keys: (event id or None, chain index or None).
Key = tuple


@dataclass
class Witness:
    causal_order: OrderRelation | None = None
    total_order: OrderRelation | None = None
    writes_into: frozenset | None = None
    chains: tuple = ()
    sequences: dict = field(default_factory=dict)  # Key -> tuple of event ids
    linearizations: dict = field(default_factory=dict)  # Key -> tuple of OpLabel


@dataclass
class Refutation:
    reason: str
    event: str | None = None
    example: tuple | None = None  # rejected label sequence


@dataclass
class Verdict:
    criterion: str
    holds: bool
    witness: Witness | None = None
    explored: int = 0
    refutation: Refutation | None = None

    def __bool__(self) -> bool:
        return self.holds


def key_str(key: Key, chains: tuple) -> str:
    eid, ci = key
    if ci is None:
        return eid or "H"
    chain = ",".join(sorted(chains[ci])) if chains else str(ci)
    return f"{eid} @ {{{chain}}}" if eid else f"{{{chain}}}"


def _pairs_str(rel: Iterable) -> str:
    return " ".join(f"{a}<{b}" for a, b in sorted(rel)) or "(empty)"


def render(verdict: Verdict) -> str:
    """Deterministic textual report for one verdict."""
    lines = [f"{verdict.criterion}={'true' if verdict.holds else 'false'}"]
    w = verdict.witness
    if w is not None:
        if w.writes_into is not None:
            lines.append(f"  writes-into: {_pairs_str(w.writes_into)}")
        if w.causal_order is not None:
            lines.append(f"  causal order: {_pairs_str(w.causal_order.pairs)}")
        if w.total_order is not None:
            seq = _total_sequence(w.total_order)
            lines.append(f"  total order: {' < '.join(seq)}")
        for key in sorted(w.linearizations, key=lambda k: (k[0] or "", -1 if k[1] is None else k[1])):
            labs = ".".join(str(l) for l in w.linearizations[key])
            lines.append(f"  lin {key_str(key, w.chains)}: {labs}")
    r = verdict.refutation
    if r is not None:
        msg = f"  refutation: {r.reason}"
        if r.example is not None:
            msg += ", e.g. " + (".".join(str(l) for l in r.example) or "(empty)")
        lines.append(msg)
    lines.append(f"  explored: {verdict.explored}")
    return "\n".join(lines)


def _total_sequence(order: OrderRelation) -> list[str]:
    below: dict[str, int] = {}
    for a, b in order.pairs:
        below.setdefault(a, 0)
        below[b] = below.get(b, 0) + 1
    return sorted(below, key=lambda x: below[x])


class _Search:
    """Per-history state shared by all checkers: labels, masks and caches."""

    def __init__(self, h: History, adt: AdtSpec, max_events: int):
        if len(h) > max_events:
            raise SizeBoundError(len(h), max_events)
        self.h = h
        self.adt = adt
        self.n = len(h)
        self.full = (1 << self.n) - 1
        self.inputs = [e.label.input for e in h.events]
        self.outputs = [e.label.output for e in h.events]
        upd = 0
        for i, inp in enumerate(self.inputs):
            adt.validate(inp)
            if adt.classification(inp).is_update:
                upd |= 1 << i
        self.updates = upd
        self.pure_queries = self.full & ~upd
        self.po = h.po_preds
        self.chains = processes(h)
        self.chain_masks = tuple(h.mask_of(c) for c in self.chains)
        self.explored = 0
        self._cache: dict = {}

    # -- linearization primitive ------------------------------------------

    def lin(self, members: int, preds, reveal: int) -> list[int] | None:
        """A linear extension of ``members`` under ``preds`` admitted with ``reveal`` shown."""
        sub = tuple(preds[i] & members for i in bits(members))
        key = (members, reveal, sub)
        if key in self._cache:
            return self._cache[key]
        core = members & ~(self.pure_queries & ~reveal)
        delta, lam = self.adt.transition, self.adt.output
        inputs, outputs = self.inputs, self.outputs
        failed = set()

        def dfs(placed: int, q: Any) -> list[int] | None:
            if placed == core:
                return []
            if (placed, q) in failed:
                return None
            for i in bits(core & ~placed):
                if preds[i] & core & ~placed:
                    continue
                inp = inputs[i]
                if reveal >> i & 1 and outputs[i] is not None and lam(q, inp) != outputs[i]:
                    continue
                rest = dfs(placed | 1 << i, delta(q, inp))
                if rest is not None:
                    return [i] + rest
            failed.add((placed, q))
            return None

        seq = dfs(0, self.adt.initial_state)
        if seq is not None:
            seq = self._reinsert(seq, members, core, preds)
        self._cache[key] = seq
        return seq

    @staticmethod
    def _reinsert(seq: list[int], members: int, core: int, preds) -> list[int]:
        """Put hidden pure queries back, each as early as the order allows."""
        dropped = members & ~core
        if not dropped:
            return seq
        out: list[int] = []
        placed = 0

        def flush() -> None:
            nonlocal dropped, placed
            progress = True
            while progress:
                progress = False
                for d in bits(dropped):
                    if preds[d] & members & ~placed == 0:
                        out.append(d)
                        placed |= 1 << d
                        dropped &= ~(1 << d)
                        progress = True

        for i in seq:
            flush()
            out.append(i)
            placed |= 1 << i
        flush()
        return out

    def labels_for(self, seq: list[int], reveal: int) -> tuple[OpLabel, ...]:
        labels = self.h.labels
        return tuple(labels[i] if reveal >> i & 1 else labels[i].hide() for i in seq)

    def ids_for(self, seq: list[int]) -> tuple[str, ...]:
        return tuple(self.h.ids[i] for i in seq)

    def chains_of(self, e: int) -> list[int]:
        return [ci for ci, m in enumerate(self.chain_masks) if m >> e & 1]

    # -- causal order search ---------------------------------------------

    def causal_search(self, check: Callable, canonical: bool):
        """Insert events one by one; ``check(e, D, past, where)`` returns a witness or None.

        Returns ``(past masks, insertion sequence, per-event witnesses)`` or
        ``None``; ``self.refutation`` holds the deepest failure seen.
        """
        n, full, po = self.n, self.full, self.po
        past = [0] * n
        where = [0] * n
        seq: list[int] = []
        found: dict[int, Any] = {}
        self.refutation_at = (-1, None, 0, ())

        def minimal_passing(e: int, added: int, base: int) -> list:
            wit = check(e, base, past, where)
            if wit is not None:
                return [(base, wit)]
            relevant = list(bits(self.updates & added & ~base))
            seen = {base}
            cands = []
            for choice in product((0, 1), repeat=len(relevant)):
                m = base
                for bit, i in zip(choice, relevant):
                    if bit:
                        m |= (1 << i) | past[i]
                if m not in seen:
                    seen.add(m)
                    cands.append(m)
            cands.sort(key=lambda m: (bin(m).count("1"), m))
            accepted: list = []
            for m in cands:
                if any(a & ~m == 0 for a, _ in accepted):
                    continue
                wit = check(e, m, past, where)
                if wit is not None:
                    accepted.append((m, wit))
            return accepted

        def rec(added: int) -> bool:
            self.explored += 1
            if added == full:
                return True
            depth = len(seq)
            for e in bits(full & ~added):
                if po[e] & ~added:
                    continue
                base = po[e]
                for d in bits(po[e]):
                    base |= past[d]
                options = minimal_passing(e, added, base)
                if not options and depth > self.refutation_at[0]:
                    self.refutation_at = (depth, e, added, tuple(past))
                for D, wit in options:
                    if canonical:
                        start = max((where[d] + 1 for d in bits(D)), default=0)
                        if any(seq[t] > e for t in range(start, depth)):
                            continue
                    past[e] = D
                    where[e] = depth
                    seq.append(e)
                    found[e] = wit
                    if rec(added | 1 << e):
                        return True
                    seq.pop()
                    del found[e]
                    past[e] = 0
            return False

        if rec(0):
            return list(past), list(seq), dict(found)
        return None

    def example_failure(self, e: int, added: int, past, reveal: int):
        """First linearization of ``added + e`` (largest possible past) for a refutation."""
        members = added | 1 << e
        preds = list(past)
        preds[e] = added
        seq = _first_extension(members, preds)
        return None if seq is None else self.labels_for(seq, reveal)


def _first_extension(members: int, preds) -> list[int] | None:
    placed = 0
    seq = []
    while placed != members:
        for i in bits(members & ~placed):
            if preds[i] & members & ~placed == 0:
                seq.append(i)
                placed |= 1 << i
                break
        else:
            return None
    return seq


def _refute_causal(s: _Search, name: str, reveal_of) -> Refutation:
    _, e, added, past = s.refutation_at
    if e is None:
        return Refutation(f"no causal order satisfies {name}")
    example = s.example_failure(e, added, past, reveal_of(e, added | 1 << e))
    return Refutation(
        f"{s.h.ids[e]} has no admissible linearization of its causal past "
        f"under any causal order",
        s.h.ids[e],
        example,
    )


# -- the criteria ----------------------------------------------------------


def check_sc(h: History, adt: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> Verdict:
    s = _Search(h, adt, max_events)
    seq = s.lin(s.full, s.po, s.full)
    s.explored += 1
    if seq is None:
        return Verdict("SC", False, explored=s.explored,
                       refutation=Refutation("no linearization of the program order is admitted"))
    w = Witness(causal_order=h.relation(s.po), chains=s.chains)
    w.sequences[(None, None)] = s.ids_for(seq)
    w.linearizations[(None, None)] = s.labels_for(seq, s.full)
    return Verdict("SC", True, w, s.explored)


def check_pc(h: History, adt: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> Verdict:
    s = _Search(h, adt, max_events)
    w = Witness(chains=s.chains)
    for ci, cm in enumerate(s.chain_masks):
        s.explored += 1
        seq = s.lin(s.full, s.po, cm)
        if seq is None:
            chain = ",".join(sorted(s.chains[ci]))
            return Verdict("PC", False, explored=s.explored,
                           refutation=Refutation(f"process {{{chain}}} has no admissible linearization"))
        w.sequences[(None, ci)] = s.ids_for(seq)
        w.linearizations[(None, ci)] = s.labels_for(seq, cm)
    return Verdict("PC", True, w, s.explored)


def _causal_checker(name: str, reveal_sets):
    """Build WCC/CC style checkers; ``reveal_sets(s, e, members)`` yields ``(chain, reveal)``."""

    def checker(h: History, adt: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> Verdict:
        s = _Search(h, adt, max_events)

        def check(e, D, past, where):
            preds = list(past)
            preds[e] = D
            members = D | 1 << e
            out = {}
            for ci, reveal in reveal_sets(s, e, members):
                seq = s.lin(members, preds, reveal)
                if seq is None:
                    return None
                out[(s.h.ids[e], ci)] = (seq, reveal)
            return out

        res = s.causal_search(check, canonical=True)
        if res is None:
            def reveal_of(e, members):
                acc = 0
                for _, r in reveal_sets(s, e, members):
                    acc |= r
                return acc
            return Verdict(name, False, explored=s.explored,
                           refutation=_refute_causal(s, name, reveal_of))
        past, _, found = res
        w = Witness(causal_order=h.relation(past), chains=s.chains)
        for per_event in found.values():
            for key, (seq, reveal) in per_event.items():
                w.sequences[key] = s.ids_for(seq)
                w.linearizations[key] = s.labels_for(seq, reveal)
        return Verdict(name, True, w, s.explored)

    checker.__name__ = f"check_{name.lower()}"
    return checker


def _wcc_reveal(s: _Search, e: int, members: int):
    yield None, 1 << e


def _cc_reveal(s: _Search, e: int, members: int):
    for ci in s.chains_of(e):
        yield ci, s.chain_masks[ci] & members


check_wcc = _causal_checker("WCC", _wcc_reveal)
check_wcc.__doc__ = "Weak causal consistency: every event explained by its causal past alone."
check_cc = _causal_checker("CC", _cc_reveal)
check_cc.__doc__ = (
    "Causal consistency: every event explained by its causal past with the "
    "outputs of each containing chain revealed (every chain, for shared events)."
)


def check_ccv(h: History, adt: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> Verdict:
    """Causal convergence.

    The insertion order of the search *is* the total order, so every causal
    past is replayed in insertion order and only the event's own output is
    compared.
    """
    s = _Search(h, adt, max_events)
    delta, lam = adt.transition, adt.output

    def check(e, D, past, where):
        members = D | 1 << e
        order = sorted(bits(D), key=lambda i: where[i])
        if s.outputs[e] is not None:
            q = adt.initial_state
            for i in order:
                if s.updates >> i & 1:
                    q = delta(q, s.inputs[i])
            if lam(q, s.inputs[e]) != s.outputs[e]:
                return None
        return order + [e]

    res = s.causal_search(check, canonical=False)
    if res is None:
        return Verdict("CCv", False, explored=s.explored,
                       refutation=_refute_causal(s, "CCv", lambda e, m: 1 << e))
    past, seq, found = res
    pos = {e: k for k, e in enumerate(seq)}
    total = frozenset(
        (h.ids[a], h.ids[b]) for a in seq for b in seq if pos[a] < pos[b]
    )
    w = Witness(causal_order=h.relation(past), total_order=OrderRelation(total, "total"),
                chains=s.chains)
    for e, order in found.items():
        key = (h.ids[e], None)
        w.sequences[key] = s.ids_for(order)
        w.linearizations[key] = s.labels_for(order, 1 << e)
    return Verdict("CCv", True, w, s.explored)


def writes_into_candidates(h: History) -> list[list[tuple[int, int] | None]]:
    """Per revealed read, the writes it may read from (``None`` = initial value)."""
    writes: dict[tuple, list[int]] = {}
    for i, e in enumerate(h.events):
        if e.label.input.name == "w":
            writes.setdefault((e.label.input.reg, e.label.input.value), []).append(i)
    options = []
    for i, e in enumerate(h.events):
        lab = e.label
        if lab.input.name != "r" or lab.output is None:
            continue
        opts: list = [(w, i) for w in writes.get((lab.input.reg, lab.output), [])]
        if lab.output == 0:
            opts.append(None)
        options.append(opts)
    return options


def check_cm(h: History, mem: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> Verdict:
    """Causal memory via writes-into orders.

    Extra causal edges only remove linearizations, so for each writes-into
    candidate the closure of writes-into and program order is the only causal
    order that needs checking.
    """
    if not mem.is_memory:
        raise AdtTypeError(f"CM is only defined for memory, not {mem!r}")
    s = _Search(h, mem, max_events)
    for combo in product(*writes_into_candidates(h)):
        s.explored += 1
        preds = list(s.po)
        wi = [p for p in combo if p is not None]
        for w, r in wi:
            preds[r] |= 1 << w
        try:
            preds = close(preds)
        except OrderError:
            continue
        seqs = {}
        for ci, cm in enumerate(s.chain_masks):
            seq = s.lin(s.full, preds, cm)
            if seq is None:
                break
            seqs[ci] = seq
        else:
            w = Witness(
                causal_order=h.relation(preds),
                writes_into=frozenset((h.ids[a], h.ids[b]) for a, b in wi),
                chains=s.chains,
            )
            for ci, seq in seqs.items():
                w.sequences[(None, ci)] = s.ids_for(seq)
                w.linearizations[(None, ci)] = s.labels_for(seq, s.chain_masks[ci])
            return Verdict("CM", True, w, s.explored)
    return Verdict("CM", False, explored=s.explored,
                   refutation=Refutation("no writes-into order yields admissible process views"))


CHECKERS = {
    "SC": check_sc,
    "PC": check_pc,
    "WCC": check_wcc,
    "CC": check_cc,
    "CCv": check_ccv,
    "CM": check_cm,
}


def applicable(adt: AdtSpec) -> tuple[str, ...]:
    return CRITERIA if adt.is_memory else CRITERIA[:-1]


def check_all(h: History, adt: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> dict[str, Verdict]:
    """Every applicable criterion, each decided independently of the others."""
    return {c: CHECKERS[c](h, adt, max_events) for c in applicable(adt)}


def classify_all(h: History, adt: AdtSpec, max_events: int = DEFAULT_CHECK_BOUND) -> dict[str, bool]:
    return {c: v.holds for c, v in check_all(h, adt, max_events).items()}


HIERARCHY = (("SC", "CC"), ("SC", "CCv"), ("CC", "PC"), ("CC", "WCC"), ("CCv", "WCC"))


def hierarchy_violations(result: dict[str, bool]) -> list[tuple[str, str]]:
    return [(a, b) for a, b in HIERARCHY if a in result and b in result and result[a] and not result[b]]


# -- independent re-validation ---------------------------------------------


def _is_extension(seq, members: set, pairs) -> bool:
    if len(seq) != len(members) or set(seq) != members:
        return False
    pos = {eid: k for k, eid in enumerate(seq)}
    return all(pos[a] < pos[b] for a, b in pairs if a in members and b in members)


def _strict_order_problems(name: str, pairs: frozenset) -> list[str]:
    out = []
    if any(a == b for a, b in pairs):
        out.append(f"{name} is reflexive")
    succ: dict[str, set] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    for a, b in pairs:
        for c in succ.get(b, ()):
            if (a, c) not in pairs:
                out.append(f"{name} is not transitive at {a}<{b}<{c}")
                return out
    return out


def revalidate(h: History, adt: AdtSpec, verdict: Verdict) -> list[str]:
    """Re-derive every claim of a positive verdict from the witness alone.

    Works on id pairs and :func:`admits` rather than the search's bitmasks.
    Returns a list of problems, empty when the witness is sound.
    """
    if not verdict.holds:
        return []
    w = verdict.witness
    if w is None:
        return ["positive verdict without witness"]
    problems: list[str] = []
    ids = set(h.ids)
    po = h.program_order
    chains = processes(h)
    past_of = {}
    if w.causal_order is not None:
        co = w.causal_order.pairs
        problems += _strict_order_problems("causal order", co)
        if not co >= po:
            problems.append("causal order does not contain the program order")
        past_of = {e: {a for a, b in co if b == e} | {e} for e in ids}
    if w.total_order is not None:
        to = w.total_order.pairs
        problems += _strict_order_problems("total order", to)
        if w.causal_order is not None and not to >= w.causal_order.pairs:
            problems.append("total order does not contain the causal order")
        for a in ids:
            for b in ids:
                if a < b and (a, b) not in to and (b, a) not in to:
                    problems.append(f"total order leaves {a} and {b} unordered")
    if w.writes_into is not None:
        if w.causal_order is None or not w.writes_into <= w.causal_order.pairs:
            problems.append("writes-into is not contained in the causal order")
        readers = [r for _, r in w.writes_into]
        if len(readers) != len(set(readers)):
            problems.append("a read has several writes-into antecedents")
        for a, b in w.writes_into:
            wi, ri = h.event(a).label, h.event(b).label
            if not (wi.input.name == "w" and ri.input.name == "r"
                    and wi.input.reg == ri.input.reg and wi.input.value == ri.output):
                problems.append(f"{a}<{b} is not a valid writes-into pair")

    def replay(key, members, pairs, reveal):
        seq = w.sequences.get(key)
        if seq is None:
            problems.append(f"missing linearization for {key_str(key, chains)}")
            return
        if not _is_extension(seq, set(members), pairs):
            problems.append(f"{key_str(key, chains)} is not a linear extension")
            return
        labels = tuple(h.event(e).label if e in reveal else h.event(e).label.hide() for e in seq)
        if labels != tuple(w.linearizations.get(key, ())):
            problems.append(f"{key_str(key, chains)} labels disagree with the history")
        if not admits(adt, labels):
            problems.append(f"{key_str(key, chains)} is not admitted")

    c = verdict.criterion
    if c == "SC":
        replay((None, None), ids, po, ids)
    elif c in ("PC", "CM"):
        order = po if c == "PC" else w.causal_order.pairs
        for ci, chain in enumerate(chains):
            replay((None, ci), ids, order, chain)
    elif c == "WCC":
        for e in ids:
            replay((e, None), past_of[e], w.causal_order.pairs, {e})
    elif c == "CC":
        for e in ids:
            for ci, chain in enumerate(chains):
                if e in chain:
                    replay((e, ci), past_of[e], w.causal_order.pairs, chain & past_of[e])
    elif c == "CCv":
        for e in ids:
            replay((e, None), past_of[e], w.total_order.pairs, {e})
    return problems
