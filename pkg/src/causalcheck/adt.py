"""Abstract data types as deterministic transducers.

An ADT is a Mealy-like machine ``(inputs, outputs, states, q0, delta, lambda)``
whose transition and output functions are total.  Sequences of operations,
possibly with hidden outputs, are checked for membership in the sequential
specification by replaying them from the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, NamedTuple, Sequence

from .errors import SymbolError

__all__ = [
    "BOT",
    "Symbol",
    "OpLabel",
    "Classification",
    "AdtSpec",
    "initial_state",
    "step",
    "classify",
    "admits",
    "format_output",
    "window_stream",
    "window_array",
    "memory",
    "queue",
    "guarded_queue",
]


class _Bottom:
    """The dummy output of pure updates."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOT = _Bottom()


@dataclass(frozen=True, order=True)
class Symbol:
    """An input symbol such as ``w(3)``, ``r``, ``wa(1)``, ``w[0](2)`` or ``pop``.

    ``reg`` is a register name (memory) or a stream index (window arrays).
    """

    name: str
    reg: int | str | None = None
    value: int | None = None

    def __str__(self) -> str:
        if isinstance(self.reg, int):
            reg = f"[{self.reg}]"
        else:
            reg = self.reg or ""
        val = "" if self.value is None else f"({self.value})"
        return f"{self.name}{reg}{val}"


def format_output(out: Any) -> str:
    if out is BOT:
        return "⊥"
    if isinstance(out, tuple):
        return "(" + ",".join(str(v) for v in out) + ")"
    return str(out)


@dataclass(frozen=True)
class OpLabel:
    """An operation ``input/output``; ``output=None`` marks a hidden operation."""

    input: Symbol
    output: Any = None

    @property
    def hidden(self) -> bool:
        return self.output is None

    def hide(self) -> OpLabel:
        return self if self.output is None else OpLabel(self.input)

    def __str__(self) -> str:
        if self.output is None:
            return str(self.input)
        return f"{self.input}/{format_output(self.output)}"


class Classification(NamedTuple):
    is_update: bool
    is_query: bool


@dataclass(frozen=True, eq=False)
class AdtSpec:
    name: str
    params: tuple
    initial_state: Any
    transition: Callable[[Any, Symbol], Any]
    output: Callable[[Any, Symbol], Any]
    classification: Callable[[Symbol], Classification]
    validate: Callable[[Symbol], None]

    def __repr__(self) -> str:
        args = ", ".join(repr(p) for p in self.params)
        return f"{self.name}({args})"

    @property
    def is_memory(self) -> bool:
        return self.name == "memory"


def initial_state(adt: AdtSpec) -> Any:
    return adt.initial_state


def step(adt: AdtSpec, state: Any, inp: Symbol) -> tuple[Any, Any]:
    """Return ``(delta(state, inp), lambda(state, inp))``; lambda sees the pre-state."""
    adt.validate(inp)
    return adt.transition(state, inp), adt.output(state, inp)


def classify(adt: AdtSpec, inp: Symbol) -> Classification:
    adt.validate(inp)
    return adt.classification(inp)


def admits(adt: AdtSpec, seq: Iterable[OpLabel]) -> bool:
    """Membership of a finite sequence in the sequential specification.

    Hidden operations contribute their side effect but their output is not
    compared.
    """
    q = adt.initial_state
    for lab in seq:
        q, out = step(adt, q, lab.input)
        if lab.output is not None and out != lab.output:
            return False
    return True


# -- built-in types ---------------------------------------------------------

_UPDATE = Classification(True, False)
_QUERY = Classification(False, True)
_BOTH = Classification(True, True)


def _is_nat(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def _reject(inp: Symbol, adt_name: str):
    raise SymbolError(f"{inp!s} is not an input symbol of {adt_name}")


def window_stream(k: int) -> AdtSpec:
    """Integer window stream of size ``k``: reads return the last ``k`` writes."""
    if k < 1:
        raise ValueError("window size must be >= 1")

    def validate(inp: Symbol) -> None:
        if inp.reg is None and (
            (inp.name == "w" and _is_nat(inp.value)) or (inp.name == "r" and inp.value is None)
        ):
            return
        _reject(inp, f"W{k}")

    def delta(q, inp):
        return q[1:] + (inp.value,) if inp.name == "w" else q

    def lam(q, inp):
        return BOT if inp.name == "w" else q

    def kind(inp):
        return _UPDATE if inp.name == "w" else _QUERY

    return AdtSpec("window_stream", (k,), (0,) * k, delta, lam, kind, validate)


def window_array(streams: int, k: int) -> AdtSpec:
    """``streams`` independent window streams of size ``k`` as one object."""
    if streams < 1 or k < 1:
        raise ValueError("stream count and window size must be >= 1")

    def validate(inp: Symbol) -> None:
        x = inp.reg
        if isinstance(x, int) and not isinstance(x, bool) and 0 <= x < streams:
            if (inp.name == "w" and _is_nat(inp.value)) or (inp.name == "r" and inp.value is None):
                return
        _reject(inp, f"W{k}^{streams}")

    def delta(q, inp):
        if inp.name != "w":
            return q
        x = inp.reg
        return q[:x] + (q[x][1:] + (inp.value,),) + q[x + 1:]

    def lam(q, inp):
        return BOT if inp.name == "w" else q[inp.reg]

    def kind(inp):
        return _UPDATE if inp.name == "w" else _QUERY

    q0 = tuple((0,) * k for _ in range(streams))
    return AdtSpec("window_array", (streams, k), q0, delta, lam, kind, validate)


def memory(registers: Iterable[str] = "abcdefghijklmnopqrstuvwxyz") -> AdtSpec:
    """Integer memory over single-letter register names.

    States are tuples of ``(register, value)`` pairs so they stay hashable;
    ``dict(state)`` gives the usual mapping view.
    """
    regs = tuple(sorted(set(registers)))
    if not all(len(x) == 1 and x.isalpha() for x in regs):
        raise ValueError("register names must be single letters")
    index = {x: i for i, x in enumerate(regs)}

    def validate(inp: Symbol) -> None:
        if inp.reg in index:
            if (inp.name == "w" and _is_nat(inp.value)) or (inp.name == "r" and inp.value is None):
                return
        _reject(inp, "M_" + "".join(regs))

    def delta(q, inp):
        if inp.name != "w":
            return q
        i = index[inp.reg]
        return q[:i] + ((inp.reg, inp.value),) + q[i + 1:]

    def lam(q, inp):
        return BOT if inp.name == "w" else q[index[inp.reg]][1]

    def kind(inp):
        return _UPDATE if inp.name == "w" else _QUERY

    q0 = tuple((x, 0) for x in regs)
    return AdtSpec("memory", ("".join(regs),), q0, delta, lam, kind, validate)


def queue() -> AdtSpec:
    """FIFO queue; ``pop`` removes and returns the head, ``⊥`` when empty."""

    def validate(inp: Symbol) -> None:
        if inp.reg is None and (
            (inp.name == "push" and _is_nat(inp.value)) or (inp.name == "pop" and inp.value is None)
        ):
            return
        _reject(inp, "Q")

    def delta(q, inp):
        if inp.name == "push":
            return q + (inp.value,)
        return q[1:]

    def lam(q, inp):
        if inp.name == "push" or not q:
            return BOT
        return q[0]

    def kind(inp):
        return _UPDATE if inp.name == "push" else _BOTH

    return AdtSpec("queue", (), (), delta, lam, kind, validate)


def guarded_queue() -> AdtSpec:
    """Queue whose pop is split into ``hd`` (peek) and ``rh(v)`` (remove head iff it is v).

    ``hd`` on an empty queue returns ``⊥`` and ``rh`` on an empty queue is a
    no-op, which keeps both functions total.
    """

    def validate(inp: Symbol) -> None:
        if inp.reg is None:
            if inp.name in ("push", "rh") and _is_nat(inp.value):
                return
            if inp.name == "hd" and inp.value is None:
                return
        _reject(inp, "Q'")

    def delta(q, inp):
        if inp.name == "push":
            return q + (inp.value,)
        if inp.name == "rh" and q and q[0] == inp.value:
            return q[1:]
        return q

    def lam(q, inp):
        if inp.name == "hd" and q:
            return q[0]
        return BOT

    def kind(inp):
        return _QUERY if inp.name == "hd" else _UPDATE

    return AdtSpec("guarded_queue", (), (), delta, lam, kind, validate)


def run_states(adt: AdtSpec, inputs: Sequence[Symbol]) -> list:
    """States visited while applying ``inputs`` from q0 (length ``len(inputs)+1``)."""
    q = adt.initial_state
    out = [q]
    for inp in inputs:
        q, _ = step(adt, q, inp)
        out.append(q)
    return out
