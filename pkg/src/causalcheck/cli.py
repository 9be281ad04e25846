"""Command-line front end.

Exit codes: 0 success, 1 criterion mismatch, 2 input error, 3 size bound,
4 liveness failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .corpus import FIG3
from .criteria import CHECKERS, CRITERIA, DEFAULT_CHECK_BOUND, applicable, render
from .errors import CausalCheckError, LivenessError, SizeBoundError
from .history import Event, History
from .netsim import format_log
from .replicas import (
    parse_crashes,
    parse_script,
    random_script,
    record_history,
    simulate,
)
from .trace import emit_trace, parse_adt, parse_label, parse_trace, adt_header, format_label

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_BOUND, EXIT_LIVENESS = 0, 1, 2, 3, 4

_BY_LOWER = {c.lower(): c for c in CRITERIA}


def _criteria(text: str, adt) -> list[str]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok == "all":
            out.extend(c for c in applicable(adt) if c not in out)
        elif tok in _BY_LOWER:
            if _BY_LOWER[tok] not in out:
                out.append(_BY_LOWER[tok])
        else:
            raise ValueError(f"unknown criterion {tok!r}")
    return out


def _expectations(text: str | None) -> dict[str, bool]:
    if not text:
        return {}
    out = {}
    for tok in text.split(","):
        name, sep, val = tok.strip().partition("=")
        if not sep or name.lower() not in _BY_LOWER or val.lower() not in ("true", "false"):
            raise ValueError(f"bad expectation {tok!r}; use e.g. cc=true,sc=false")
        out[_BY_LOWER[name.lower()]] = val.lower() == "true"
    return out


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _run_checks(adt, h, names, expect, max_events, out) -> int:
    results = {}
    for name in names:
        v = CHECKERS[name](h, adt, max_events)
        results[name] = v.holds
        print(render(v), file=out)
    if expect:
        missing = [c for c in expect if c not in results]
        for c in missing:
            results[c] = CHECKERS[c](h, adt, max_events).holds
        bad = [c for c in expect if results[c] != expect[c]]
        for c in bad:
            print(f"mismatch: {c} expected {str(expect[c]).lower()}, got {str(results[c]).lower()}", file=out)
        return EXIT_MISMATCH if bad else EXIT_OK
    return EXIT_OK if all(results.values()) else EXIT_MISMATCH


def cmd_check(args, out) -> int:
    adt, h = parse_trace(_read(args.trace))
    names = _criteria(args.criterion, adt)
    if "CM" in names and not adt.is_memory:
        raise ValueError("cm applies to memory traces only")
    return _run_checks(adt, h, names, _expectations(args.expect), args.max_events, out)


def _describe(payload) -> str:
    return "Mess(" + ",".join(str(v) for v in payload) + ")"


def cmd_simulate(args, out) -> int:
    if args.script:
        script = parse_script(_read(args.script))
    else:
        rng = random.Random(args.seed)
        script = random_script(rng, args.procs, args.streams, args.window, args.ops)
    crashes = parse_crashes(args.crash or [])
    run = simulate(args.algo, script, seed=args.seed, crashes=crashes, n=args.procs,
                   max_steps=args.max_steps, literal=args.literal)
    adt, h = record_history(run, script.K, script.k)
    trace = emit_trace(adt, h)
    log = format_log(run, _describe)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write(trace)
    else:
        out.write(trace)
    if args.log_out:
        with open(args.log_out, "w", encoding="utf-8") as fh:
            fh.write(log)
    if args.show_log:
        out.write(log)
    for p, state in sorted(run.final_states.items()):
        print(f"# final p{p}: {_describe_state(state)}", file=out)
    if run.crashed:
        print("# crashed: " + ",".join(f"p{p}" for p in sorted(run.crashed)), file=out)
    if args.then_check:
        name = "CC" if args.algo == "cc" else "CCv"
        return _run_checks(adt, h, [name], {}, args.max_events, out)
    return EXIT_OK


def _describe_state(state) -> str:
    if isinstance(state, tuple) and len(state) == 2 and isinstance(state[1], int):
        streams, vtime = state
        body = " ".join(
            "[" + ",".join(f"{v}@{vt}.{j}" for v, (vt, j) in s) + "]" for s in streams
        )
        return f"{body} vtime={vtime}"
    return " ".join("[" + ",".join(str(v) for v in s) + "]" for s in state)


def cmd_demo(args, out) -> int:
    figs = sorted(FIG3) if args.figure == "all" else [args.figure]
    status = EXIT_OK
    for fig in figs:
        if fig not in FIG3:
            raise ValueError(f"unknown figure {fig!r}; choose from {', '.join(sorted(FIG3))}")
        ex = FIG3[fig]
        adt, h = ex.load()
        print(f"== {fig}: {ex.caption}", file=out)
        out.write(emit_trace(adt, h))
        for c in applicable(adt):
            got = CHECKERS[c](h, adt, args.max_events).holds
            want = ex.expected.get(c)
            mark = "" if want is None else ("  expected " + str(want).lower()
                                            + ("" if want == got else "  MISMATCH"))
            if want is not None and want != got:
                status = EXIT_MISMATCH
            print(f"{c}={str(got).lower()}{mark}", file=out)
    return status


def _to_json(adt, h: History) -> dict:
    return {
        "adt": adt_header(adt)[4:],
        "processes": {pid: [format_label(h.event(e).label) for e in seq]
                      for pid, seq in h.declared_processes.items()},
        "po": [list(p) for p in sorted(
            (a, b) for a, b in h.program_order
            if h.event(a).process != h.event(b).process
        )],
    }


def _from_json(data: dict):
    adt = parse_adt(data["adt"].split())
    events, edges = [], [tuple(p) for p in data.get("po", [])]
    for pid, toks in data["processes"].items():
        for idx, tok in enumerate(toks):
            events.append(Event(f"{pid}.{idx}", pid, parse_label(adt, tok)))
            if idx:
                edges.append((f"{pid}.{idx - 1}", f"{pid}.{idx}"))
    return adt, History.build(events, edges)


def cmd_convert(args, out) -> int:
    text = _read(args.input)
    if args.source == "json":
        adt, h = _from_json(json.loads(text))
    else:
        adt, h = parse_trace(text)
    if args.to == "json":
        out.write(json.dumps(_to_json(adt, h), indent=2, ensure_ascii=False) + "\n")
    else:
        out.write(emit_trace(adt, h))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalcheck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide consistency criteria for a trace file")
    c.add_argument("trace", help="trace file, or - for stdin")
    c.add_argument("--criterion", default="all", help="sc, pc, wcc, cc, ccv, cm, all (comma list)")
    c.add_argument("--expect", help="expected classification, e.g. cc=true,sc=false")
    c.add_argument("--max-events", type=int, default=DEFAULT_CHECK_BOUND)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("simulate", help="run a replicated window-stream array")
    s.add_argument("--algo", choices=("cc", "ccv"), default="ccv")
    s.add_argument("--procs", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--crash", action="append", help="pN@stepM, repeatable or comma separated")
    s.add_argument("--script", help="script file (trace syntax without outputs)")
    s.add_argument("--ops", type=int, default=6, help="bound on generated operations")
    s.add_argument("--streams", type=int, default=2, help="K, number of streams")
    s.add_argument("--window", type=int, default=2, help="k, window size")
    s.add_argument("--max-steps", type=int)
    s.add_argument("--max-events", type=int, default=DEFAULT_CHECK_BOUND)
    s.add_argument("--literal", action="store_true", help="use the receive loop exactly as printed")
    s.add_argument("--trace-out")
    s.add_argument("--log-out")
    s.add_argument("--show-log", action="store_true")
    s.add_argument("--then-check", action="store_true")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("demo", help="classify one of the built-in example histories")
    d.add_argument("figure", help="3a ... 3i, or all")
    d.add_argument("--max-events", type=int, default=DEFAULT_CHECK_BOUND)
    d.set_defaults(func=cmd_demo)

    v = sub.add_parser("convert", help="normalise a trace or convert to/from JSON")
    v.add_argument("input")
    v.add_argument("--from", dest="source", choices=("trace", "json"), default="trace")
    v.add_argument("--to", choices=("trace", "json"), default="trace")
    v.set_defaults(func=cmd_convert)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except SizeBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except LivenessError as exc:
        print(f"error: liveness: {exc}", file=sys.stderr)
        return EXIT_LIVENESS
    except (CausalCheckError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
