"""Line-oriented history format.

::

    # two writers, two readers
    adt window_stream 2
    process p0: w(1) r=(0,1)
    process p1: w(2) r=(1,2)
    po p0.0 p1.1

Updates carry an implicit ``⊥`` output; ``_`` spells ``⊥`` for queries that
may return it (``pop=_``, ``hd=_``).  A query without ``=`` is hidden, and an
update with a trailing ``?`` is hidden.
"""

from __future__ import annotations

import re

from .adt import (
    BOT,
    AdtSpec,
    OpLabel,
    Symbol,
    guarded_queue,
    memory,
    queue,
    window_array,
    window_stream,
)
from .errors import CausalCheckError, TraceSyntaxError
from .history import Event, History, bits

_DEFAULT_REGISTERS = "abcdefghijklmnopqrstuvwxyz"
_PID = re.compile(r"[A-Za-z_]\w*")
_NAT = r"(\d+)"
_VEC = r"\((\d+(?:,\d+)*)\)"

_TOKENS = {
    "window_stream": [
        (re.compile(rf"w\({_NAT}\)(\?)?"), lambda m: ("w", None, int(m[1]), m[2])),
        (re.compile(rf"r(?:={_VEC})?"), lambda m: ("r", None, None, m[1])),
    ],
    "window_array": [
        (re.compile(rf"w\[{_NAT}\]\({_NAT}\)(\?)?"), lambda m: ("w", int(m[1]), int(m[2]), m[3])),
        (re.compile(rf"r\[{_NAT}\](?:={_VEC})?"), lambda m: ("r", int(m[1]), None, m[2])),
    ],
    "memory": [
        (re.compile(rf"w([a-z])\({_NAT}\)(\?)?"), lambda m: ("w", m[1], int(m[2]), m[3])),
        (re.compile(r"r([a-z])(?:=(\d+))?"), lambda m: ("r", m[1], None, m[2])),
    ],
    "queue": [
        (re.compile(rf"push\({_NAT}\)(\?)?"), lambda m: ("push", None, int(m[1]), m[2])),
        (re.compile(r"pop(?:=(\d+|_))?"), lambda m: ("pop", None, None, m[1])),
    ],
    "guarded_queue": [
        (re.compile(rf"push\({_NAT}\)(\?)?"), lambda m: ("push", None, int(m[1]), m[2])),
        (re.compile(rf"rh\({_NAT}\)(\?)?"), lambda m: ("rh", None, int(m[1]), m[2])),
        (re.compile(r"hd(?:=(\d+|_))?"), lambda m: ("hd", None, None, m[1])),
    ],
}

_UPDATES = {"w", "push", "rh"}


def parse_adt(words: list[str]) -> AdtSpec:
    if not words:
        raise ValueError("missing ADT name")
    name, args = words[0], words[1:]
    if name == "window_stream" and len(args) == 1:
        return window_stream(int(args[0]))
    if name == "window_array" and len(args) == 2:
        return window_array(int(args[0]), int(args[1]))
    if name == "memory" and len(args) <= 1:
        return memory(args[0] if args else _DEFAULT_REGISTERS)
    if name in ("queue", "guarded_queue") and not args:
        return queue() if name == "queue" else guarded_queue()
    raise ValueError(f"unknown ADT or wrong parameters: {' '.join(words)}")


def adt_header(adt: AdtSpec) -> str:
    if adt.name == "memory":
        regs = adt.params[0]
        return "adt memory" if regs == _DEFAULT_REGISTERS else f"adt memory {regs}"
    return " ".join(["adt", adt.name, *(str(p) for p in adt.params)])


def parse_label(adt: AdtSpec, token: str) -> OpLabel:
    """Parse one operation token such as ``r=(0,1)`` for ``adt``."""
    for pattern, unpack in _TOKENS[adt.name]:
        m = pattern.fullmatch(token)
        if m is None:
            continue
        name, reg, value, extra = unpack(m)
        sym = Symbol(name, reg, value)
        adt.validate(sym)
        if name in _UPDATES:
            return OpLabel(sym, None if extra else BOT)
        if extra is None:
            return OpLabel(sym)
        out = BOT if extra == "_" else (
            tuple(int(v) for v in extra.split(",")) if name == "r" and adt.name.startswith("window")
            else int(extra)
        )
        if isinstance(out, tuple):
            want = adt.params[-1]
            if len(out) != want:
                raise ValueError(f"read returns {len(out)} values, window size is {want}")
        return OpLabel(sym, out)
    raise ValueError(f"not an operation of {adt_header(adt)[4:]}: {token!r}")


def format_label(label: OpLabel) -> str:
    sym = str(label.input)
    if label.input.name in _UPDATES:
        return sym + ("?" if label.hidden else "")
    if label.hidden:
        return sym
    out = label.output
    if out is BOT:
        return f"{sym}=_"
    if isinstance(out, tuple):
        return f"{sym}=(" + ",".join(str(v) for v in out) + ")"
    return f"{sym}={out}"


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def parse_trace(text: str) -> tuple[AdtSpec, History]:
    adt = None
    events: list[Event] = []
    edges: list[tuple[str, str]] = []
    seen_pids: set[str] = set()
    po_lines: list[tuple[int, int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        head = stripped.split(None, 1)[0]
        if adt is None:
            if head != "adt":
                raise TraceSyntaxError("expected 'adt <name> [params]' header", lineno, col)
            try:
                adt = parse_adt(stripped.split()[1:])
            except ValueError as exc:
                raise TraceSyntaxError(str(exc), lineno, col) from None
            continue
        if head == "process":
            m = re.match(r"\s*process\s+(\S+?)\s*:", line)
            if m is None:
                raise TraceSyntaxError("expected 'process <pid>: <ops>'", lineno, col)
            pid = m[1]
            if not _PID.fullmatch(pid):
                raise TraceSyntaxError(f"bad process id {pid!r}", lineno, m.start(1) + 1)
            if pid in seen_pids:
                raise TraceSyntaxError(f"process {pid} declared twice", lineno, m.start(1) + 1)
            seen_pids.add(pid)
            for idx, tok in enumerate(re.finditer(r"\S+", line[m.end():])):
                try:
                    label = parse_label(adt, tok[0])
                except (ValueError, CausalCheckError) as exc:
                    raise TraceSyntaxError(str(exc), lineno, m.end() + tok.start() + 1) from None
                events.append(Event(f"{pid}.{idx}", pid, label))
                if idx:
                    edges.append((f"{pid}.{idx - 1}", f"{pid}.{idx}"))
        elif head == "po":
            parts = stripped.split()
            if len(parts) != 3:
                raise TraceSyntaxError("expected 'po <pid.idx> <pid.idx>'", lineno, col)
            po_lines.append((lineno, col, parts[1], parts[2]))
        elif head == "adt":
            raise TraceSyntaxError("duplicate adt header", lineno, col)
        else:
            raise TraceSyntaxError(f"unexpected {head!r}", lineno, col)
    if adt is None:
        raise TraceSyntaxError("empty trace: missing adt header", 1, 1)
    ids = {e.id for e in events}
    for lineno, col, a, b in po_lines:
        for eid in (a, b):
            if eid not in ids:
                raise TraceSyntaxError(f"unknown event {eid}", lineno, col)
        edges.append((a, b))
    try:
        h = History.build(events, edges)
    except CausalCheckError as exc:
        last = po_lines[-1] if po_lines else (1, 1)
        raise TraceSyntaxError(str(exc), last[0], last[1]) from None
    return adt, h


def extra_edges(h: History) -> list[tuple[str, str]]:
    """Covering pairs of the program order not implied by the per-process chains."""
    preds = h.po_preds
    chain = set()
    for seq in h.declared_processes.values():
        chain.update(zip(seq, seq[1:]))
    out = []
    for i in range(len(h)):
        cover = preds[i]
        for j in bits(preds[i]):
            cover &= ~preds[j]
        for j in bits(cover):
            pair = (h.ids[j], h.ids[i])
            if pair not in chain:
                out.append(pair)
    return sorted(out)


def emit_trace(adt: AdtSpec, h: History) -> str:
    lines = [adt_header(adt)]
    for pid, seq in h.declared_processes.items():
        toks = " ".join(format_label(h.event(eid).label) for eid in seq)
        lines.append(f"process {pid}: {toks}")
    for a, b in extra_edges(h):
        lines.append(f"po {a} {b}")
    return "\n".join(lines) + "\n"
