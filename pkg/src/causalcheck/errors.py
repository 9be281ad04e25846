"""Exception hierarchy shared by every module."""


class CausalCheckError(Exception):
    pass


class SymbolError(CausalCheckError, ValueError):
    """An input symbol is not part of the ADT's input alphabet."""


class StructureError(CausalCheckError, ValueError):
    """A history is malformed (duplicate ids, dangling references)."""


class OrderError(CausalCheckError, ValueError):
    """A relation that must be a strict partial order contains a cycle."""


class SizeBoundError(CausalCheckError):
    """A history exceeds the configured enumeration bound."""

    def __init__(self, size: int, bound: int):
        super().__init__(
            f"history has {size} events, above the enumeration bound of {bound}; "
            f"pass max_events={size} (CLI: --max-events {size}) to override"
        )
        self.size = size
        self.bound = bound


class AdtTypeError(CausalCheckError, TypeError):
    """A checker was handed an ADT it does not support."""


class TraceSyntaxError(CausalCheckError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class LivenessError(CausalCheckError):
    """The simulator hit max_steps before reaching quiescence."""


class SimulationError(CausalCheckError):
    """Internal simulator invariant broken (e.g. causal delivery deadlock)."""
