"""Seeded simulation of crash-prone processes over reliable causal broadcast.

The world advances one scheduler pick at a time.  An enabled action is either
the next scripted local operation of a live process or the delivery of one
causally deliverable message at one live process.  Picks come from
``random.Random(seed)`` (Mersenne Twister), so a ``(config, script)`` pair
always yields the same run.

Causal delivery uses vector clocks: ``deps[j]`` of a message counts the
messages from ``j`` its sender had delivered when broadcasting (its own
included), and a message is deliverable at ``p`` once ``p`` has delivered all
of them.  A broadcast is delivered to its sender inside the same step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol

from .adt import format_output
from .errors import LivenessError, SimulationError

DEFAULT_MAX_STEPS = 10_000


@dataclass(frozen=True)
class SimConfig:
    n: int
    seed: int = 0
    crash_schedule: dict = field(default_factory=dict)  # pid -> step index
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one process")
        for p, t in self.crash_schedule.items():
            if not 0 <= p < self.n:
                raise ValueError(f"crash schedule names unknown process p{p}")
            if t < 0:
                raise ValueError("crash steps must be >= 0")


@dataclass(frozen=True)
class Message:
    id: int
    sender: int
    payload: Any
    deps: tuple[int, ...]


@dataclass(frozen=True)
class Record:
    """One log line.  ``kind`` is invoke, return, broadcast, deliver, crash or suppressed."""

    step: int
    kind: str
    process: int
    msg: int | None = None
    op: Any = None
    result: Any = None


class Replica(Protocol):
    def invoke(self, net: "Port", op: Any) -> Any: ...
    def on_receive(self, payload: Any) -> None: ...
    def snapshot(self) -> Any: ...


class Port:
    """What a replica sees of the network while handling one operation."""

    def __init__(self, sim: "Sim", pid: int):
        self._sim = sim
        self._pid = pid

    def broadcast(self, payload: Any) -> int | None:
        return self._sim.broadcast(self._pid, payload)


@dataclass
class SimRun:
    config: SimConfig
    trace: list[Record]
    final_states: dict[int, Any]
    messages: dict[int, Message]
    crashed: frozenset
    operations: dict[int, list[tuple[Any, Any]]]  # pid -> [(op, result)]

    def delivered(self, pid: int) -> list[int]:
        return [r.msg for r in self.trace if r.kind == "deliver" and r.process == pid]


class Sim:
    def __init__(self, cfg: SimConfig, replica_factory: Callable[[int], Replica],
                 script: dict[int, Iterable[Any]] | None = None):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.replicas = [replica_factory(p) for p in range(cfg.n)]
        self.pending_ops = [list((script or {}).get(p, ())) for p in range(cfg.n)]
        self.clock = [[0] * cfg.n for _ in range(cfg.n)]
        self.inbox: list[list[Message]] = [[] for _ in range(cfg.n)]
        self.messages: dict[int, Message] = {}
        self.crashed: set[int] = set()
        self.trace: list[Record] = []
        self.operations: dict[int, list] = {p: [] for p in range(cfg.n)}
        self.steps = 0
        self._apply_crashes()

    # -- primitives --------------------------------------------------------

    def _log(self, kind: str, pid: int, **kw) -> Record:
        rec = Record(self.steps, kind, pid, **kw)
        self.trace.append(rec)
        return rec

    def _apply_crashes(self) -> None:
        for p, t in sorted(self.cfg.crash_schedule.items()):
            if t == self.steps and p not in self.crashed:
                self.crashed.add(p)
                self.inbox[p].clear()
                self._log("crash", p)

    def broadcast(self, sender: int, payload: Any) -> int | None:
        if sender in self.crashed:
            self._log("suppressed", sender, op=payload)
            return None
        mid = len(self.messages)
        deps = list(self.clock[sender])
        deps[sender] += 1
        msg = Message(mid, sender, payload, tuple(deps))
        self.messages[mid] = msg
        self._log("broadcast", sender, msg=mid)
        self._deliver(sender, msg)
        for p in range(self.cfg.n):
            if p != sender and p not in self.crashed:
                self.inbox[p].append(msg)
        return mid

    def _deliverable(self, p: int, msg: Message) -> bool:
        c = self.clock[p]
        s = msg.sender
        return c[s] == msg.deps[s] - 1 and all(
            c[j] >= msg.deps[j] for j in range(self.cfg.n) if j != s
        )

    def _deliver(self, p: int, msg: Message) -> None:
        if not self._deliverable(p, msg):
            raise SimulationError(f"p{p} would deliver m{msg.id} out of causal order")
        self.clock[p][msg.sender] += 1
        self.replicas[p].on_receive(msg.payload)
        self._log("deliver", p, msg=msg.id)

    def enabled(self) -> list[tuple[str, int, int]]:
        acts = []
        for p in range(self.cfg.n):
            if p in self.crashed:
                continue
            if self.pending_ops[p]:
                acts.append(("op", p, 0))
            for k, msg in enumerate(self.inbox[p]):
                if self._deliverable(p, msg):
                    acts.append(("deliver", p, k))
        return acts

    def _undelivered(self) -> bool:
        return any(self.inbox[p] for p in range(self.cfg.n) if p not in self.crashed)

    # -- scheduler ---------------------------------------------------------

    def step(self) -> Record:
        if self.steps >= self.cfg.max_steps:
            raise LivenessError(f"no quiescence within {self.cfg.max_steps} steps")
        acts = self.enabled()
        if not acts:
            if self._undelivered():
                raise SimulationError("causal delivery deadlocked with messages pending")
            raise SimulationError("nothing to do")
        kind, p, k = acts[self.rng.randrange(len(acts))]
        if kind == "op":
            op = self.pending_ops[p].pop(0)
            self._log("invoke", p, op=op)
            result = self.replicas[p].invoke(Port(self, p), op)
            self.operations[p].append((op, result))
            rec = self._log("return", p, op=op, result=result)
        else:
            msg = self.inbox[p].pop(k)
            self._deliver(p, msg)
            rec = self.trace[-1]
        self.steps += 1
        self._apply_crashes()
        return rec

    def busy(self) -> bool:
        return any(
            self.pending_ops[p] or self.inbox[p]
            for p in range(self.cfg.n) if p not in self.crashed
        )

    def run_until_quiescent(self) -> SimRun:
        while self.busy():
            self.step()
        return SimRun(
            config=self.cfg,
            trace=list(self.trace),
            final_states={p: self.replicas[p].snapshot()
                          for p in range(self.cfg.n) if p not in self.crashed},
            messages=dict(self.messages),
            crashed=frozenset(self.crashed),
            operations={p: list(v) for p, v in self.operations.items()},
        )


def new_sim(cfg: SimConfig, replica_factory: Callable[[int], Replica],
            script: dict[int, Iterable[Any]] | None = None) -> Sim:
    return Sim(cfg, replica_factory, script)


# -- property checks over a finished run ----------------------------------


def broadcast_violations(run: SimRun) -> list[str]:
    """Causal delivery, integrity, reliability at quiescence and local immediacy."""
    out: list[str] = []
    broadcast_at: dict[int, int] = {}
    seen: dict[int, set] = {p: set() for p in range(run.config.n)}
    order: dict[int, list[int]] = {p: [] for p in range(run.config.n)}
    known_before: dict[int, set] = {}  # msg -> messages its sender had delivered
    for k, rec in enumerate(run.trace):
        if rec.kind == "broadcast":
            if rec.msg in broadcast_at:
                out.append(f"m{rec.msg} broadcast twice")
            broadcast_at[rec.msg] = k
            known_before[rec.msg] = set(seen[rec.process])
            nxt = run.trace[k + 1] if k + 1 < len(run.trace) else None
            if nxt is None or nxt.kind != "deliver" or nxt.process != rec.process or nxt.msg != rec.msg:
                out.append(f"m{rec.msg} not delivered locally right after broadcast")
        elif rec.kind == "deliver":
            if rec.msg not in broadcast_at:
                out.append(f"p{rec.process} delivers m{rec.msg} that was never broadcast")
                continue
            if rec.msg in seen[rec.process]:
                out.append(f"p{rec.process} delivers m{rec.msg} twice")
            missing = known_before[rec.msg] - seen[rec.process]
            if missing:
                out.append(f"p{rec.process} delivers m{rec.msg} before m{min(missing)}")
            seen[rec.process].add(rec.msg)
            order[rec.process].append(rec.msg)
    alive = [p for p in range(run.config.n) if p not in run.crashed]
    if alive:
        ref = seen[alive[0]]
        for p in alive[1:]:
            if seen[p] != ref:
                out.append(f"p{p} and p{alive[0]} delivered different message sets")
        for p in range(run.config.n):
            if not seen[p] <= ref:
                out.append(f"p{p} delivered a message some live process never got")
    return out


def format_log(run: SimRun, describe: Callable[[Any], str] = repr) -> str:
    """Extended log: one line per record; ``describe`` renders message payloads."""
    lines = [f"# n={run.config.n} seed={run.config.seed}"]
    for r in run.trace:
        parts = [f"{r.step:>4}", r.kind, f"p{r.process}"]
        if r.msg is not None:
            parts.append(f"m{r.msg}")
            msg = run.messages.get(r.msg)
            if msg is not None and r.kind == "broadcast":
                parts.append(describe(msg.payload))
                parts.append("deps=" + ",".join(str(d) for d in msg.deps))
        if r.op is not None:
            parts.append(describe(r.op) if r.kind == "suppressed" else str(r.op))
        if r.kind == "return":
            parts.append("-> " + format_output(r.result))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
