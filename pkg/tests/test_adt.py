import itertools
import random

import pytest
from hypothesis import given, strategies as st

from causalcheck.adt import (
    BOT, OpLabel, Symbol, admits, classify, guarded_queue, initial_state, memory,
    queue, run_states, step, window_array, window_stream,
)
from causalcheck.errors import SymbolError

W, R = (lambda v: Symbol("w", None, v)), Symbol("r")


def test_initial_states():
    assert initial_state(window_stream(2)) == (0, 0)
    assert dict(initial_state(memory("ab"))) == {"a": 0, "b": 0}
    assert initial_state(queue()) == ()
    assert initial_state(window_array(2, 3)) == ((0, 0, 0), (0, 0, 0))


def test_step_examples():
    assert step(window_stream(2), (0, 0), W(1)) == ((0, 1), BOT)
    assert step(window_stream(2), (1, 2), R) == ((1, 2), (1, 2))
    assert step(queue(), (), Symbol("pop")) == ((), BOT)
    assert step(queue(), (4, 5), Symbol("pop")) == ((5,), 4)


def test_guarded_queue_semantics():
    q = guarded_queue()
    assert step(q, (), Symbol("hd")) == ((), BOT)
    assert step(q, (), Symbol("rh", None, 1)) == ((), BOT)
    assert step(q, (1, 2), Symbol("rh", None, 2))[0] == (1, 2)
    assert step(q, (1, 2), Symbol("rh", None, 1))[0] == (2,)
    assert step(q, (1, 2), Symbol("hd")) == ((1, 2), 1)


@pytest.mark.parametrize("adt, sym", [
    (window_stream(2), Symbol("w")),
    (window_stream(2), Symbol("pop")),
    (memory("ab"), Symbol("w", "z", 1)),
    (window_array(2, 2), Symbol("r", 2)),
    (queue(), Symbol("push", None, -1)),
])
def test_unknown_symbols_rejected(adt, sym):
    with pytest.raises(SymbolError):
        step(adt, adt.initial_state, sym)
    with pytest.raises(SymbolError):
        classify(adt, sym)


def test_declared_classification():
    assert tuple(classify(window_stream(2), R)) == (False, True)
    assert tuple(classify(queue(), Symbol("pop"))) == (True, True)
    assert tuple(classify(memory("ab"), Symbol("w", "a", 3))) == (True, False)
    assert tuple(classify(guarded_queue(), Symbol("rh", None, 1))) == (True, False)
    assert tuple(classify(guarded_queue(), Symbol("hd"))) == (False, True)


def _sample_states(adt, rng, count=60):
    syms = {
        "window_stream": [W(v) for v in range(3)],
        "memory": [Symbol("w", x, v) for x in "ab" for v in range(3)],
        "queue": [Symbol("push", None, v) for v in range(3)] + [Symbol("pop")],
        "guarded_queue": [Symbol("push", None, v) for v in range(3)]
        + [Symbol("rh", None, v) for v in range(3)],
    }[adt.name]
    out = {adt.initial_state}
    for _ in range(count):
        q = adt.initial_state
        for _ in range(rng.randint(0, 5)):
            q = adt.transition(q, rng.choice(syms))
        out.add(q)
    return out


@pytest.mark.parametrize("adt, symbols", [
    (window_stream(2), [W(1), W(0), R]),
    (memory("ab"), [Symbol("w", "a", 1), Symbol("w", "b", 0), Symbol("r", "a")]),
    (queue(), [Symbol("push", None, 2), Symbol("pop")]),
    (guarded_queue(), [Symbol("push", None, 1), Symbol("rh", None, 1), Symbol("hd")]),
])
def test_classification_matches_quantifiers_on_sample(adt, symbols):
    states = _sample_states(adt, random.Random(3))
    for sym in symbols:
        loops = all(adt.transition(q, sym) == q for q in states)
        constant = len({repr(adt.output(q, sym)) for q in states}) == 1
        assert classify(adt, sym).is_update == (not loops)
        assert classify(adt, sym).is_query == (not constant)


def test_admits_examples():
    w2 = window_stream(2)
    assert admits(w2, [OpLabel(W(1), BOT), OpLabel(R, (0, 1)), OpLabel(W(2), BOT), OpLabel(R, (1, 2))])
    assert not admits(w2, [OpLabel(W(1)), OpLabel(R, (1, 2))])
    push = lambda v: OpLabel(Symbol("push", None, v))
    assert admits(queue(), [push(2), push(1), OpLabel(Symbol("pop")), OpLabel(Symbol("pop"), 1)])
    assert admits(w2, [])


def test_admits_rejects_unknown_symbol():
    with pytest.raises(SymbolError):
        admits(window_stream(2), [OpLabel(Symbol("pop"))])


def test_symbol_and_label_rendering():
    assert str(OpLabel(W(1), BOT)) == "w(1)/⊥"
    assert str(OpLabel(R, (0, 1))) == "r/(0,1)"
    assert str(OpLabel(R)) == "r"
    assert str(Symbol("w", "a", 2)) == "wa(2)"
    assert str(Symbol("w", 1, 2)) == "w[1](2)"


ops_w2 = st.lists(
    st.one_of(st.integers(0, 3).map(lambda v: OpLabel(W(v), BOT)),
              st.tuples(st.integers(0, 3), st.integers(0, 3)).map(lambda t: OpLabel(R, t)),
              st.just(OpLabel(R))),
    max_size=8,
)


@given(ops_w2)
def test_prefix_closure(seq):
    if admits(window_stream(2), seq):
        for i in range(len(seq)):
            assert admits(window_stream(2), seq[:i])


@given(ops_w2, st.data())
def test_hiding_preserves_admissibility(seq, data):
    w2 = window_stream(2)
    if not admits(w2, seq):
        return
    mask = data.draw(st.lists(st.booleans(), min_size=len(seq), max_size=len(seq)))
    hidden = [l.hide() if m else l for l, m in zip(seq, mask)]
    assert admits(w2, hidden)
    assert admits(w2, seq) == admits(w2, seq)


def test_window_shift_law_exhaustive():
    for k in range(1, 4):
        adt = window_stream(k)
        for n in range(0, 7):
            for vals in itertools.product(range(1, 3), repeat=n):
                q = run_states(adt, [W(v) for v in vals])[-1]
                expect = ((0,) * k + vals)[-k:]
                assert adt.output(q, R) == expect


def test_window_array_streams_are_independent():
    a = window_array(2, 2)
    q = run_states(a, [Symbol("w", 0, 5), Symbol("w", 1, 7), Symbol("w", 0, 6)])[-1]
    assert a.output(q, Symbol("r", 0)) == (5, 6)
    assert a.output(q, Symbol("r", 1)) == (0, 7)
