"""Golden histories: the nine example histories over W2, Q, Q' and memory.

Each entry carries its trace and the classification its caption states.
Criteria not named in a caption are left out of ``expected``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .adt import AdtSpec
from .history import History
from .trace import parse_trace


@dataclass(frozen=True)
class Example:
    figure: str
    caption: str
    trace: str
    expected: dict

    def load(self) -> tuple[AdtSpec, History]:
        return parse_trace(self.trace)


_RAW = [
    ("3a", "W2: CCv, not PC", {"CCv": True, "PC": False}, """
adt window_stream 2
process p0: w(1) r=(0,1) r=(1,2)
process p1: w(2) r=(0,2) r=(1,2)
"""),
    # Drawn with three processes; the last read is r/(0,2) in the drawing.
    ("3b", "W2: PC, not WCC", {"PC": True, "WCC": False}, """
adt window_stream 2
process p0: w(1)
process p1: r=(0,1) w(2)
process p2: r=(0,2)
"""),
    ("3c", "W2: CC, not CCv", {"CC": True, "CCv": False}, """
adt window_stream 2
process p0: w(1) r=(2,1)
process p1: w(2) r=(1,2)
"""),
    ("3d", "W2: SC", {"SC": True}, """
adt window_stream 2
process p0: w(1) r=(0,1)
process p1: w(2) r=(1,2)
"""),
    ("3e", "Q: WCC and PC, not CC", {"WCC": True, "PC": True, "CC": False}, """
adt queue
process p0: push(1) pop=1 pop=1 push(3)
process p1: push(2) pop=3 push(1)
"""),
    ("3f", "Q: CC, not SC", {"CC": True, "SC": False}, """
adt queue
process p0: pop=1 pop=_
process p1: push(1) push(2) pop=1 pop=_
"""),
    ("3g", "Q': CC, not SC", {"CC": True, "SC": False}, """
adt guarded_queue
process p0: hd=1 rh(1) hd=2 rh(2)
process p1: push(1) push(2) hd=1 rh(1) hd=2 rh(2)
"""),
    ("3h", "M: CCv but not CC", {"CCv": True, "CC": False}, """
adt memory
process p0: wa(1) wc(2) wd(1) rb=0 re=1 rc=3
process p1: wb(1) wc(3) we(1) ra=0 rd=1 rc=3
"""),
    ("3i", "M: CM but not CC", {"CM": True, "CC": False}, """
adt memory
process p0: wa(1) wa(2) wb(3) rd=3 rc=1 wa(1)
process p1: wc(1) wc(2) wd(3) rb=3 ra=1 wc(1)
"""),
]

FIG3 = {fig: Example(fig, cap, trace.lstrip(), exp) for fig, cap, exp, trace in _RAW}
