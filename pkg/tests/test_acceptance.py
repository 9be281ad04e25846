"""The eight acceptance criteria.

Each ``criterion_N`` returns ``(passed, detail)``.  The tests record the
outcome for the terminal summary and then assert it.  Running this file
directly prints one line per criterion.
"""

import random
import time
from functools import lru_cache

from conftest import ACCEPTANCE
from causalcheck.corpus import FIG3
from causalcheck.criteria import (
    CHECKERS, check_all, check_cc, check_ccv, check_cm, check_sc, hierarchy_violations, revalidate,
)
from causalcheck.generators import distinct_memory_corpus, random_corpus
from causalcheck.netsim import SimConfig, broadcast_violations, new_sim
from causalcheck.replicas import random_script, record_history, simulate

RANDOM_SEED = 2024


@lru_cache(maxsize=None)
def random_histories():
    return random_corpus(RANDOM_SEED, 600)


@lru_cache(maxsize=None)
def verdicts():
    return [(adt, h, check_all(h, adt)) for adt, h in random_histories()]


@lru_cache(maxsize=None)
def simulation_sample():
    """220 (script, seed) pairs per algorithm, a third of them with a crash."""
    rng = random.Random(RANDOM_SEED)
    out = []
    for i in range(220):
        n, K, k = rng.randint(1, 3), rng.randint(1, 2), rng.randint(1, 2)
        script = random_script(rng, n, K, k, 6)
        crashes = {rng.randrange(n): rng.randint(0, 8)} if i % 3 == 0 else {}
        for algo in ("cc", "ccv"):
            run = simulate(algo, script, seed=i, crashes=crashes, n=n)
            out.append((algo, K, k, crashes, run))
    return out


def criterion_1():
    start = time.perf_counter()
    wrong = []
    for fig, ex in sorted(FIG3.items()):
        adt, h = ex.load()
        for c, want in ex.expected.items():
            got = CHECKERS[c](h, adt).holds
            if got != want:
                wrong.append(f"{fig} {c}: expected {want}, got {got}")
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed < 10
    return ok, f"{elapsed:.2f}s; " + ("all captions reproduced" if not wrong else "; ".join(wrong))


def criterion_2():
    bad = [(h, hierarchy_violations({c: v.holds for c, v in vs.items()})) for _, h, vs in verdicts()]
    bad = [b for b in bad if b[1]]
    sizes_ok = all(len(h) <= 6 for _, h in random_histories())
    return not bad and sizes_ok and len(verdicts()) >= 500, f"{len(verdicts())} histories, {len(bad)} violations"


def criterion_3():
    fails = []
    counts = {"cc": 0, "ccv": 0}
    crashed = 0
    for algo, K, k, crashes, run in simulation_sample():
        adt, h = record_history(run, K, k)
        checker = check_cc if algo == "cc" else check_ccv
        counts[algo] += 1
        crashed += bool(crashes)
        if not checker(h, adt).holds:
            fails.append((algo, h))
    ok = not fails and min(counts.values()) >= 200 and crashed > 0
    return ok, f"{counts['cc']} cc + {counts['ccv']} ccv runs ({crashed} with crashes), {len(fails)} failures"


def criterion_4():
    diverged_ccv = 0
    diverged_cc = 0
    for algo, _, _, _, run in simulation_sample():
        distinct = len(set(run.final_states.values()))
        if algo == "ccv" and distinct > 1:
            diverged_ccv += 1
        if algo == "cc" and distinct > 1:
            diverged_cc += 1
    ok = diverged_ccv == 0 and diverged_cc >= 1
    return ok, f"ccv runs not converged: {diverged_ccv}; cc runs diverged: {diverged_cc}"


def criterion_5():
    corpus = distinct_memory_corpus(RANDOM_SEED, 320)
    disagree = sum(check_cc(h, m).holds != check_cm(h, m).holds for m, h in corpus)
    adt, h = FIG3["3i"].load()
    fig = check_cm(h, adt).holds and not check_cc(h, adt).holds
    negatives = sum(not check_cc(h, m).holds for m, h in corpus)
    return disagree == 0 and fig, (
        f"{len(corpus)} histories ({negatives} not CC), {disagree} disagreements; "
        f"3i CM={check_cm(h, adt).holds} CC={check_cc(h, adt).holds}"
    )


def _comparable(order, a, b):
    return (a, b) in order.pairs or (b, a) in order.pairs


def criterion_6():
    p1_hits = p7_hits = bad = 0
    for adt, h, vs in verdicts():
        ups = [e.id for e in h.events if adt.classification(e.label.input).is_update]
        qs = [e.id for e in h.events if adt.classification(e.label.input).is_query]
        sc = vs["SC"].holds
        w = vs["WCC"].witness
        if w is not None and all(_comparable(w.causal_order, a, b) for a in ups for b in ups if a < b):
            p1_hits += 1
            bad += not sc
        w = vs["CCv"].witness
        if w is not None and all(_comparable(w.causal_order, u, q) for u in ups for q in qs if u != q):
            p7_hits += 1
            bad += not sc
    return bad == 0 and p1_hits > 0 and p7_hits > 0, (
        f"{p1_hits} WCC witnesses with ordered updates, {p7_hits} CCv witnesses with "
        f"ordered update/query pairs, {bad} counterexamples"
    )


def criterion_7():
    checked = 0
    problems = []
    for adt, h, vs in verdicts():
        for v in vs.values():
            if v.holds:
                checked += 1
                problems += revalidate(h, adt, v)
    for fig, ex in FIG3.items():
        adt, h = ex.load()
        for v in check_all(h, adt).values():
            if v.holds:
                checked += 1
                problems += revalidate(h, adt, v)
    for algo, K, k, _, run in simulation_sample()[:100]:
        adt, h = record_history(run, K, k)
        v = (check_cc if algo == "cc" else check_ccv)(h, adt)
        checked += 1
        problems += revalidate(h, adt, v)
    return not problems and checked > 0, f"{checked} positive verdicts re-validated, {len(problems)} problems"


class _Echo:
    def __init__(self, pid):
        self.got = []

    def invoke(self, net, op):
        return net.broadcast(op)

    def on_receive(self, payload):
        self.got.append(payload)

    def snapshot(self):
        return tuple(sorted(self.got))


def criterion_8():
    rng = random.Random(RANDOM_SEED)
    runs = 0
    violations = []
    for seed in range(1000):
        n = rng.randint(1, 4)
        script = {p: [f"{p}.{i}" for i in range(rng.randint(0, 4))] for p in range(n)}
        crashes = {rng.randrange(n): rng.randint(0, 12)} if rng.random() < 0.4 else {}
        run = new_sim(SimConfig(n, seed, crashes), _Echo, script).run_until_quiescent()
        runs += 1
        violations += broadcast_violations(run)
    return not violations and runs >= 1000, f"{runs} runs, {len(violations)} violations"


def _record(num, fn):
    ok, detail = fn()
    ACCEPTANCE[num] = (ok, detail)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_fig3_matrix():
    _record(1, criterion_1)


def test_criterion_2_hierarchy():
    _record(2, criterion_2)


def test_criterion_3_algorithms_are_consistent():
    _record(3, criterion_3)


def test_criterion_4_convergence():
    _record(4, criterion_4)


def test_criterion_5_cc_cm_equivalence():
    _record(5, criterion_5)


def test_criterion_6_total_update_orders():
    _record(6, criterion_6)


def test_criterion_7_witness_soundness():
    _record(7, criterion_7)


def test_criterion_8_broadcast_properties():
    _record(8, criterion_8)


if __name__ == "__main__":
    for num, fn in enumerate([criterion_1, criterion_2, criterion_3, criterion_4,
                              criterion_5, criterion_6, criterion_7, criterion_8], start=1):
        ok, detail = fn()
        print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
