import random

import pytest
from hypothesis import given, settings, strategies as st

from causalcheck.adt import BOT, OpLabel, Symbol, guarded_queue, memory, queue, window_stream
from causalcheck.corpus import FIG3
from causalcheck.errors import TraceSyntaxError
from causalcheck.generators import random_history
from causalcheck.trace import emit_trace, parse_label, parse_trace


def test_fig3d_file():
    adt, h = parse_trace("# four events\nadt window_stream 2\nprocess p0: w(1) r=(0,1)\nprocess p1: w(2) r=(1,2)\n")
    assert adt.name == "window_stream" and len(h) == 4
    assert h.event("p1.1").label == OpLabel(Symbol("r"), (1, 2))


def test_empty_body():
    adt, h = parse_trace("adt queue\n")
    assert len(h) == 0


@pytest.mark.parametrize("text, line", [
    ("adt window_stream 2\nprocess p0: w(1)\npo p0.0 p0.0\n", 3),
    ("adt window_stream 2\nprocess p0: w(1) q\n", 2),
    ("process p0: w(1)\n", 1),
    ("adt stack\n", 1),
    ("adt window_stream 2\nprocess p0: r=(1)\n", 2),
    ("adt window_stream 2\nprocess p0: w(1)\nprocess p0: w(2)\n", 3),
    ("adt window_stream 2\nprocess p0: w(1)\npo p0.0 p9.0\n", 3),
    ("adt memory ab\nprocess p0: wz(1)\n", 2),
])
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(TraceSyntaxError) as exc:
        parse_trace(text)
    assert exc.value.line == line


def test_error_column():
    with pytest.raises(TraceSyntaxError) as exc:
        parse_trace("adt queue\nprocess p0: push(1) pip\n")
    assert exc.value.column == 21


def test_cyclic_po():
    with pytest.raises(TraceSyntaxError):
        parse_trace("adt queue\nprocess a: push(1)\nprocess b: pop=1\npo a.0 b.0\npo b.0 a.0\n")


def test_label_forms():
    assert parse_label(queue(), "pop=_") == OpLabel(Symbol("pop"), BOT)
    assert parse_label(queue(), "pop").hidden
    assert parse_label(guarded_queue(), "hd=3") == OpLabel(Symbol("hd"), 3)
    assert parse_label(memory(), "rc=0") == OpLabel(Symbol("r", "c"), 0)
    assert parse_label(window_stream(2), "w(4)?").hidden


@pytest.mark.parametrize("fig", sorted(FIG3))
def test_corpus_round_trip(fig):
    adt, h = FIG3[fig].load()
    text = emit_trace(adt, h)
    adt2, h2 = parse_trace(text)
    assert h2 == h and emit_trace(adt2, h2) == text


def test_extra_edges_round_trip():
    text = "adt window_stream 2\nprocess p0: w(1) r\nprocess p1: r=(0,1)\npo p0.0 p1.0\n"
    adt, h = parse_trace(text)
    assert emit_trace(adt, h) == text


def test_redundant_po_is_normalised():
    adt, h = parse_trace("adt queue\nprocess a: push(1) push(2)\nprocess b: pop=1\npo a.0 b.0\npo a.1 b.0\n")
    assert emit_trace(adt, h).endswith("po a.1 b.0\n")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([window_stream(2), memory("ab"), queue()]))
def test_random_round_trip(seed, adt):
    h = random_history(random.Random(seed), adt, 6, hide_prob=0.3)
    text = emit_trace(adt, h)
    assert parse_trace(text)[1] == h
    assert emit_trace(*parse_trace(text)) == text
