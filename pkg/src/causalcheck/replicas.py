"""Wait-free replicated arrays of ``K`` window streams of size ``k``.

:class:`CcReplica` shifts each delivered value into its local stream, which
gives causal consistency.  :class:`CcvReplica` timestamps writes with a
Lamport clock and the writer id and keeps, per stream, the ``k`` newest
delivered writes in timestamp order, which gives causal convergence.

Operations are :class:`~causalcheck.adt.Symbol` values ``w[x](v)`` and
``r[x]``, the same symbols the ``window_array`` ADT uses.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Any

from .adt import BOT, OpLabel, Symbol, window_array
from .history import Event, History
from .netsim import Port, Sim, SimConfig, SimRun
from .errors import CausalCheckError

ZERO_TS = (0, 0)


def _check_index(x: int, K: int) -> None:
    if not (isinstance(x, int) and 0 <= x < K):
        raise IndexError(f"stream index {x} out of range [0, {K})")


class CcReplica:
    """Shift-append replica."""

    def __init__(self, K: int, k: int):
        self.K, self.k = K, k
        self.str = [[0] * k for _ in range(K)]

    def read(self, x: int) -> tuple[int, ...]:
        _check_index(x, self.K)
        return tuple(self.str[x])

    def write(self, net: Port, x: int, v: int):
        _check_index(x, self.K)
        net.broadcast((x, v))
        return BOT

    def on_receive(self, payload) -> None:
        x, v = payload
        s = self.str[x]
        for y in range(self.k - 1):
            s[y] = s[y + 1]
        s[self.k - 1] = v

    def invoke(self, net: Port, op: Symbol):
        return self.read(op.reg) if op.name == "r" else self.write(net, op.reg, op.value)

    def snapshot(self):
        return tuple(tuple(s) for s in self.str)


class CcvReplica:
    """Timestamp-ordered replica.

    With ``literal=True`` the receive handler runs the insertion loop exactly
    as printed, which never places a write in the last slot; by default the
    stream is kept as the top ``k`` writes by timestamp, ascending.
    """

    def __init__(self, K: int, k: int, pid: int, literal: bool = False):
        self.K, self.k, self.pid = K, k, pid
        self.literal = literal
        self.str = [[(0, ZERO_TS)] * k for _ in range(K)]
        self.vtime = 0

    def read(self, x: int) -> tuple[int, ...]:
        _check_index(x, self.K)
        return tuple(v for v, _ in self.str[x])

    def write(self, net: Port, x: int, v: int):
        _check_index(x, self.K)
        net.broadcast((x, v, self.vtime + 1, self.pid))
        return BOT

    def on_receive(self, payload) -> None:
        x, v, vt, j = payload
        self.vtime = max(self.vtime, vt)
        ts = (vt, j)
        s = self.str[x]
        if self.literal:
            y = 0
            while y < self.k - 1 and s[y][1] <= ts:
                s[y] = s[y + 1]
                y += 1
            if y != 0:
                s[y - 1] = (v, ts)
            return
        if ts < s[0][1]:
            return
        s.append((v, ts))
        s.sort(key=lambda e: e[1])
        del s[0]

    def invoke(self, net: Port, op: Symbol):
        return self.read(op.reg) if op.name == "r" else self.write(net, op.reg, op.value)

    def snapshot(self):
        return (tuple(tuple(s) for s in self.str), self.vtime)


ALGORITHMS = ("cc", "ccv")


@dataclass
class RunScript:
    K: int
    k: int
    ops: dict[int, list[Symbol]] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return max(self.ops, default=-1) + 1

    def render(self) -> str:
        lines = [f"adt window_array {self.K} {self.k}"]
        for p in range(self.n):
            lines.append(f"process p{p}: " + " ".join(str(s) for s in self.ops.get(p, [])))
        return "\n".join(l.rstrip() for l in lines) + "\n"


def parse_script(text: str) -> RunScript:
    """Scripts use the trace syntax with outputs omitted: ``process p0: w[0](1) r[0]``."""
    from .trace import parse_trace

    adt, h = parse_trace(text)
    if adt.name != "window_array":
        raise CausalCheckError("scripts must use 'adt window_array K k'")
    ops: dict[int, list[Symbol]] = {}
    for pid, seq in h.declared_processes.items():
        m = re.fullmatch(r"p(\d+)", pid)
        if m is None:
            raise CausalCheckError(f"script process ids must look like p0, p1, ...: {pid}")
        ops[int(m[1])] = [h.event(e).label.input for e in seq]
    return RunScript(*adt.params, ops)


def random_script(rng: random.Random, n: int, K: int, k: int, max_ops: int,
                  values: int = 3) -> RunScript:
    """At most ``max_ops`` operations spread over ``n`` processes."""
    total = rng.randint(1, max_ops)
    ops: dict[int, list[Symbol]] = {p: [] for p in range(n)}
    for _ in range(total):
        p = rng.randrange(n)
        x = rng.randrange(K)
        if rng.random() < 0.5:
            ops[p].append(Symbol("w", x, rng.randint(1, values)))
        else:
            ops[p].append(Symbol("r", x))
    return RunScript(K, k, ops)


def parse_crashes(tokens) -> dict[int, int]:
    """``["p1@3", "p0@0"]`` or ``"p1@3,p0@0"`` to ``{1: 3, 0: 0}``."""
    if isinstance(tokens, str):
        tokens = [tokens]
    out: dict[int, int] = {}
    for chunk in tokens:
        for tok in filter(None, (t.strip() for t in chunk.split(","))):
            m = re.fullmatch(r"p(\d+)@(?:step)?(\d+)", tok)
            if m is None:
                raise ValueError(f"bad crash token {tok!r}; expected pN@stepM")
            out[int(m[1])] = int(m[2])
    return out


def make_factory(algo: str, K: int, k: int, literal: bool = False):
    if algo == "cc":
        return lambda p: CcReplica(K, k)
    if algo == "ccv":
        return lambda p: CcvReplica(K, k, p, literal)
    raise ValueError(f"unknown algorithm {algo!r}")


def simulate(algo: str, script: RunScript, seed: int = 0, crashes: dict | None = None,
             n: int | None = None, max_steps: int | None = None, literal: bool = False) -> SimRun:
    n = max(script.n, n or 1)
    kw = {} if max_steps is None else {"max_steps": max_steps}
    cfg = SimConfig(n, seed, dict(crashes or {}), **kw)
    sim = Sim(cfg, make_factory(algo, script.K, script.k, literal), script.ops)
    return sim.run_until_quiescent()


def record_history(run: SimRun, K: int, k: int) -> tuple:
    """``(window_array(K, k), History)`` of the invocations in ``run``."""
    events = []
    edges = []
    for p in sorted(run.operations):
        for idx, (op, result) in enumerate(run.operations[p]):
            events.append(Event(f"p{p}.{idx}", f"p{p}", OpLabel(op, result)))
            if idx:
                edges.append((f"p{p}.{idx - 1}", f"p{p}.{idx}"))
    return window_array(K, k), History.build(events, edges)


def ccv_state_ok(state, k: int, delivered_writes: dict[int, list]) -> bool:
    """Each stream equals the top-``k`` delivered writes by timestamp, ascending."""
    streams, _ = state
    for x, s in enumerate(streams):
        writes = sorted(delivered_writes.get(x, []), key=lambda e: e[1])
        pad = [(0, ZERO_TS)] * max(0, k - len(writes))
        if list(s) != (pad + writes)[-k:]:
            return False
    return True
