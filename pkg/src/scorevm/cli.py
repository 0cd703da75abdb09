"""Command-line entry point.

Exit codes: 0 success, 1 diagnostics or REFUTED, 2 usage and IO errors.
File outputs are byte-identical for identical inputs and seeds; wall-clock
measurements (bench reports, --timings traces) are the documented exception.
"""

from __future__ import annotations

import argparse
import errno
import json
import sys
from pathlib import Path

from . import __version__
from .compiler import CompiledScore, compile_score
from .machine import ProcessError, SeededRandom, render
from .runtime import (
    RuntimeConfig,
    SessionError,
    bench,
    records_to_jsonl,
    scripted_session,
)
from .score import (
    Score,
    ScoreError,
    event_alphabet,
    parse_events,
    score_from_dict,
    validate,
)
from .server import ControlServer
from .store import StoreError
from .verifier import (
    BudgetExhausted,
    EnvSpec,
    VerifierError,
    check,
    evidence_to_json,
    parse_env,
    parse_property,
    replay,
)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(2, f"cannot read {path}: {e.strerror or e}") from e


def _read_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(1, f"{path}: invalid JSON: {e}") from e


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise CliError(2, f"cannot write {path}: {e.strerror or e}") from e


def _load_score(path: str) -> Score:
    doc = _read_json(path)
    try:
        score = score_from_dict(doc)
    except (ScoreError, StoreError) as e:
        raise CliError(1, f"{path}: {e}") from e
    diags = validate(score)
    if diags:
        for d in diags:
            where = f"{d.obj}: " if d.obj else ""
            print(f"{path}: {where}{d.message}", file=sys.stderr)
        raise CliError(1, f"{path}: {len(diags)} validation diagnostic(s)")
    return score


def _compile(path: str) -> tuple[Score, CompiledScore]:
    score = _load_score(path)
    try:
        return score, compile_score(score)
    except (ScoreError, StoreError) as e:
        raise CliError(1, f"{path}: {e}") from e


def _parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep:
        host, port = "127.0.0.1", text
    host = host or "127.0.0.1"
    try:
        n = int(port)
    except ValueError:
        raise CliError(2, f"bad address {text!r}: expected HOST:PORT") from None
    if not 0 <= n <= 65535:
        raise CliError(2, f"bad address {text!r}: port out of range")
    return host, n


def _check_events(events, score: Score, cs: CompiledScore) -> None:
    alphabet = set(event_alphabet(score))
    env = cs.env_map()
    for e in events:
        if e.name not in alphabet:
            raise CliError(1, f"events: unknown event {e.name!r} at tu {e.tu}")
        if e.name.startswith("ev_"):
            if e.value != 1:
                raise CliError(1, f"events: trigger {e.name} takes no value")
        else:
            lo, hi = env[e.name]
            if not lo <= e.value <= hi:
                raise CliError(
                    1, f"events: {e.name}={e.value} outside [{lo}, {hi}]")


# -- commands ------------------------------------------------------------------

def cmd_validate(args) -> int:
    score = _load_score(args.score)
    print(f"ok: {len(score.objects)} objects, {len(score.points)} points, "
          f"horizon {score.horizon}")
    return 0


def cmd_compile(args) -> int:
    _, cs = _compile(args.score)
    dump = {
        "horizon": cs.score.horizon,
        "env": [{"name": d.name, "lo": d.lo, "hi": d.hi} for d in cs.env],
        "alphabet": event_alphabet(cs.score),
        "entry": render(cs.entry),
        "defs": {name: {"params": list(d.params), "body": render(d.body)}
                 for name, d in sorted(cs.defs.defs.items())},
        "messages": {sig: m.to_json() for sig, m in cs.msgmap},
    }
    text = json.dumps(dump, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"compiled {args.score} -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _make_config(args, horizon: int) -> RuntimeConfig:
    policy = SeededRandom(args.seed) if args.seed is not None else None
    cfg = RuntimeConfig(tu_period_ms=args.tu_ms, policy=policy,
                        max_units=args.max_units)
    try:
        cfg.check(horizon)
    except SessionError as e:
        raise CliError(2, str(e)) from e
    return cfg


def cmd_run(args) -> int:
    score, cs = _compile(args.score)
    cfg = _make_config(args, score.horizon)
    events = []
    if args.events:
        try:
            events = parse_events(_read_text(args.events))
        except ScoreError as e:
            raise CliError(1, f"{args.events}: {e}") from e
        _check_events(events, score, cs)

    if args.serve:
        if args.events:
            raise CliError(2, "--events cannot be combined with --serve")
        host, port = _parse_address(args.serve)
        server = ControlServer(cs, cfg, host, port)

        def ready(h: str, p: int) -> None:
            print(f"serving on ws://{h}:{p}  (score document at "
                  f"http://{h}:{p}/score)", flush=True)

        try:
            server.run(ready)
        except KeyboardInterrupt:
            pass
        except OSError as e:
            if e.errno == errno.EADDRINUSE:
                raise CliError(2, f"address in use: {args.serve}") from e
            raise CliError(2, f"cannot serve on {args.serve}: "
                              f"{e.strerror or e}") from e
        records = server.session.records
    else:
        try:
            records = scripted_session(cs, events, cfg).run_all()
        except (ProcessError, StoreError, SessionError) as e:
            raise CliError(1, f"run failed: {e}") from e

    text = records_to_jsonl(records, include_compute=args.timings)
    if text:
        text += "\n"
    if args.out:
        _write_text(args.out, text)
        messages = sum(len(r.messages) for r in records)
        print(f"ran {len(records)} units, {messages} messages -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    _, cs = _compile(args.score)
    prop_doc = _read_json(args.property)
    env_doc = _read_json(args.env) if args.env else None
    try:
        prop = parse_property(prop_doc)
        env = parse_env(env_doc) if env_doc is not None else EnvSpec()
        verdict = check(cs, prop, env, horizon=args.horizon,
                        budget=args.budget)
    except BudgetExhausted as e:
        raise CliError(2, f"budget exhausted after {e.stats.states} states; "
                          f"raise --budget or script the environment") from e
    except (VerifierError, StoreError, ProcessError) as e:
        raise CliError(1, str(e)) from e

    print(f"{verdict.result} ({verdict.stats.states} states, "
          f"{verdict.stats.branches} branches)")
    print(f"elapsed {verdict.stats.elapsed_s:.2f}s", file=sys.stderr)
    if verdict.evidence:
        replays = replay(verdict.evidence, cs)
        doc = {
            "result": verdict.result,
            "mode": prop.mode,
            "replays": replays,
            "evidence": evidence_to_json(verdict.evidence),
        }
        out = args.evidence or Path(args.property).stem + ".evidence.json"
        _write_text(str(out), json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"evidence written to {out}")
    return 0 if verdict.result == "VERIFIED" else 1


def cmd_bench(args) -> int:
    cfg = RuntimeConfig(tu_period_ms=args.tu_ms)
    try:
        report, _ = bench(args.objects, cfg)
    except SessionError as e:
        raise CliError(2, str(e)) from e
    print(report.line())
    if args.out:
        doc = {"objects": report.objects, "units": report.units,
               "meanMs": report.mean_ms, "medianMs": report.median_ms,
               "maxMs": report.max_ms, "totalS": report.total_s,
               "messages": report.messages}
        _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


# -- wiring --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="scorevm",
        description="Compile, run, and verify interactive musical scores.")
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a score document")
    p.add_argument("score")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("compile", help="compile a score to its process form")
    p.add_argument("score")
    p.add_argument("-o", "--out", help="dump path (default stdout)")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="execute a score")
    p.add_argument("score")
    p.add_argument("--events", help="scripted events file (lines: TU EVENT)")
    p.add_argument("--out", help="trace path, JSON lines (default stdout)")
    p.add_argument("--tu-ms", type=int, default=50, metavar="MS",
                   help="time-unit period in milliseconds (default 50)")
    p.add_argument("--max-units", type=int, default=None, metavar="N",
                   help="stop after N units (default: score horizon)")
    p.add_argument("--seed", type=int, default=None,
                   help="randomize internal choices with this seed")
    p.add_argument("--serve", metavar="HOST:PORT",
                   help="serve a live session over WebSocket instead of "
                        "running headless")
    p.add_argument("--timings", action="store_true",
                   help="include computeMs in the trace output")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="model-check a property")
    p.add_argument("score")
    p.add_argument("property", help="property document (JSON)")
    p.add_argument("--env", help="environment spec (JSON)")
    p.add_argument("--horizon", type=int, default=None,
                   help="check horizon in units (default: score horizon)")
    p.add_argument("--budget", type=int, default=10**6,
                   help="state budget (default 1000000)")
    p.add_argument("--evidence", metavar="PATH",
                   help="evidence output path (default <property>.evidence.json)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="time a synthetic score")
    p.add_argument("--objects", type=int, default=500)
    p.add_argument("--tu-ms", type=int, default=50, metavar="MS")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
