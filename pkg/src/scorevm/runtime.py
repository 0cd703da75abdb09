"""Real-time session driving a compiled score one unit per tick.

The tick itself is pure logical time; wall-clock pacing belongs to whoever
calls it (the serve loop sleeps between ticks, bench does not). Events are
queued from any thread and drained into the next unit's input as one
conjunction, so arrival order within a unit cannot matter.
"""

from __future__ import annotations

import json
import logging
import statistics
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from .compiler import CompiledScore, compile_score, extract_messages
from .machine import ChoicePolicy, Deterministic, step
from .process import Process
from .score import (
    ConditionalBranch,
    ControlMessage,
    Fixed,
    ParamSpec,
    Precedence,
    Score,
    TemporalObject,
    event_alphabet,
)
from .store import And, Constraint, Store, TRUE, var

log = logging.getLogger("scorevm.runtime")


class SessionError(Exception):
    pass


@dataclass
class RuntimeConfig:
    tu_period_ms: int = 50
    policy: Optional[ChoicePolicy] = None  # None: deterministic
    max_units: Optional[int] = None  # None: score horizon
    overrun: str = "log"  # log | abort; abort also stops on constraint failure

    def check(self, horizon: int) -> int:
        if self.tu_period_ms < 1:
            raise SessionError("tu period must be at least 1 ms")
        if self.overrun not in ("log", "abort"):
            raise SessionError(f"unknown overrun policy {self.overrun!r}")
        units = horizon if self.max_units is None else self.max_units
        if units < 0 or units > horizon:
            raise SessionError("max units must lie within the score horizon")
        return units


@dataclass(frozen=True)
class UnitRecord:
    tu: int
    inputs: tuple[tuple[str, int], ...]  # events applied this unit
    signals: tuple[str, ...]  # canonical "name=value" singletons
    messages: tuple[ControlMessage, ...]
    fired: tuple
    compute_ms: float
    flags: tuple[str, ...] = ()


def entailed_signals(store: Store, names) -> tuple[str, ...]:
    if not store.sat():
        return ()
    out = []
    for name in names:
        lo, hi = store.bounds_of(name)
        if lo == hi:
            out.append(f"{name}={lo}")
    return tuple(out)


def input_conjunction(events) -> Constraint:
    c: Constraint = TRUE
    for name, value in events:
        one = var(name).eq(value)
        c = one if c is TRUE else And(c, one)
    return c


# ---------------------------------------------------------------------------
# advisory score-state tracking (drives snapshots and injection acks)

@dataclass
class _ObjView:
    state: str = "waiting"  # waiting | active | done
    start: int = -1
    d: Optional[int] = None
    end_at: int = -1  # unit the end signal fired in


class ScoreStateTracker:
    """Mirrors object/point state from the per-unit signal stream. The
    engine itself never consults this; it exists for snapshots and for
    window acks on injected events."""

    def __init__(self, score: Score):
        self.score = score
        self.objects = {o.id: _ObjView() for o in score.objects}
        self.tu = -1  # last completed unit
        self._consumed: set[str] = set()  # point ids already fired/forced
        self._chain_at: dict[str, int] = {}  # delay point id -> open end unit
        self._points = {p.id: p for p in score.points}
        self._prec_by_id = {r.id: r for r in score.relations
                            if isinstance(r, Precedence) and r.id is not None}

    def update(self, tu: int, inputs, store: Store) -> None:
        self.tu = tu
        consistent = store.sat()
        for name, value in inputs:
            if name.startswith("ev_") and value == 1:
                self._consumed.add(name[3:])
        for o in self.score.objects:
            v = self.objects[o.id]
            if not consistent:
                continue
            lo, hi = store.bounds_of("st_" + o.id)
            if lo == hi == 1:
                v.state, v.start = "active", tu
                v.d = o.duration.d if isinstance(o.duration, Fixed) else None
                # restarting re-opens a duration point
                for p in self.score.points:
                    if p.binds.kind == "duration-of" and p.binds.target == o.id:
                        self._consumed.discard(p.id)
            lo, hi = store.bounds_of("end_" + o.id)
            if lo == hi == 1:
                v.state, v.end_at = "done", tu
                for r in self.score.relations:
                    if isinstance(r, Precedence) and r.frm == o.id \
                            and r.id is not None and r.id in self._points:
                        self._chain_at[r.id] = tu
                        self._consumed.discard(self._points[r.id].id)

    def _point_open(self, p, at: int) -> bool:
        """Whether a trigger applied in unit `at` would land in the
        listening region (mirrors the compiled listeners)."""
        if p.id in self._consumed:
            return False
        w0, w1 = p.window
        if p.binds.kind == "start-of":
            v = self.objects.get(p.binds.target)
            if v is not None and v.state != "waiting":
                return False
            return max(0, w0 - 1) <= at <= w1 - 1
        if p.binds.kind == "duration-of":
            v = self.objects[p.binds.target]
            if v.state != "active" or v.d is not None:
                return False
            pos = at - v.start + 1
            return max(1, w0 - 1) <= pos <= w1 - 1
        rel = self._prec_by_id[p.binds.target]
        e = self._chain_at.get(rel.id if rel.id is not None else "")
        if e is None:
            return False
        return e + w0 - 1 <= at <= e + w1 - 1

    def point_views(self, at: int) -> list[dict]:
        out = []
        for p in self.score.points:
            if self._point_open(p, at):
                out.append({"id": p.id, "kind": p.binds.kind,
                            "target": p.binds.target,
                            "window": list(p.window)})
        return out

    def object_views(self) -> list[dict]:
        out = []
        for o in self.score.objects:
            v = self.objects[o.id]
            # displayed active through the final unit, done strictly after
            state = v.state
            if v.state == "done" and v.end_at == self.tu:
                state = "active"
            remaining = None
            if state == "active" and v.d is not None and v.start >= 0:
                remaining = max(0, v.start + v.d - 1 - self.tu)
            out.append({"id": o.id, "state": state, "remaining": remaining})
        return out


# ---------------------------------------------------------------------------

class Session:
    """One live run of a compiled score. Ticks happen on whichever thread
    calls tick(); injection is thread-safe and lands in the next unit."""

    def __init__(self, cs: CompiledScore, cfg: Optional[RuntimeConfig] = None):
        self.cs = cs
        self.cfg = cfg or RuntimeConfig()
        self.max_units = self.cfg.check(cs.score.horizon)
        self.policy = self.cfg.policy or Deterministic()
        self.state = "ready"  # ready | running | done | aborted
        self.records: list[UnitRecord] = []
        self._residual: Process = cs.entry
        self._env = cs.env_map()
        self._names = [d.name for d in cs.env]
        self._alphabet = set(event_alphabet(cs.score))
        self._queue: list[tuple[str, int]] = []
        self._lock = threading.Lock()
        self.tracker = ScoreStateTracker(cs.score)

    # -- lifecycle

    def start(self) -> None:
        if self.state != "ready":
            raise SessionError("already running")
        self.state = "done" if self.max_units == 0 else "running"

    @property
    def tu(self) -> int:
        return len(self.records)

    # -- event ingestion (any thread)

    def inject_event(self, name: str, value: int = 1) -> dict:
        if name not in self._alphabet:
            return {"status": "error", "reason": f"unknown event {name}"}
        if name.startswith("ev_"):
            if value != 1:
                return {"status": "ignored", "reason": "trigger value must be 1"}
            p = self.tracker._points.get(name[3:])
            if p is not None and not self.tracker._point_open(p, self.tu):
                return {"status": "ignored", "reason": "window closed"}
        else:
            lo, hi = self._env[name]
            if not lo <= value <= hi:
                return {"status": "error", "reason": "value out of range"}
        self.enqueue_raw(name, value)
        return {"status": "accepted"}

    def enqueue_raw(self, name: str, value: int) -> None:
        """Queue without ack filtering (replay and tests)."""
        with self._lock:
            self._queue.append((name, value))

    # -- the unit of work

    def tick(self) -> UnitRecord:
        if self.state == "ready":
            raise SessionError("not started")
        if self.state == "done":
            raise SessionError("completed")
        if self.state == "aborted":
            raise SessionError("aborted")
        with self._lock:
            events, self._queue = self._queue, []
        t0 = time.perf_counter()
        result = step(self._residual, self.cs.defs, input_conjunction(events),
                      self._env, self.policy)
        compute_ms = (time.perf_counter() - t0) * 1000.0
        messages, bad = extract_messages(result.output, self.cs.msgmap)
        flags = ()
        if bad:
            flags += ("constraint failure",)
            log.warning("unit %d: constraint failure, messages suppressed",
                        self.tu)
        if compute_ms > self.cfg.tu_period_ms:
            flags += ("overrun",)
            log.warning("unit %d: compute %.2f ms exceeded period %d ms",
                        self.tu, compute_ms, self.cfg.tu_period_ms)
        rec = UnitRecord(self.tu, tuple(events),
                         entailed_signals(result.output, self._names),
                         messages, result.fired, compute_ms, flags)
        self.records.append(rec)
        self._residual = result.residual
        self.tracker.update(rec.tu, rec.inputs, result.output)
        if flags and self.cfg.overrun == "abort":
            self.state = "aborted"
        elif len(self.records) >= self.max_units:
            self.state = "done"
        return rec

    def run_all(self) -> list[UnitRecord]:
        if self.state == "ready":
            self.start()
        while self.state == "running":
            self.tick()
        return self.records

    # -- observation

    def snapshot(self) -> dict:
        last = self.records[-1] if self.records else None
        return {
            "tu": last.tu if last else -1,
            "state": self.state,
            "objects": self.tracker.object_views(),
            "pendingPoints": self.tracker.point_views(self.tu),
            "messages": [m.to_json() for m in last.messages] if last else [],
            "flags": list(last.flags) if last else [],
        }


# ---------------------------------------------------------------------------
# traces

def records_to_jsonl(records, include_compute: bool = True) -> str:
    lines = []
    for r in records:
        doc = {"tu": r.tu, "messages": [m.to_json() for m in r.messages]}
        if include_compute:
            doc["computeMs"] = round(r.compute_ms, 3)
        lines.append(json.dumps(doc, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def scripted_session(cs: CompiledScore, events,
                     cfg: Optional[RuntimeConfig] = None) -> Session:
    """Session with a whole event schedule queued up front, keyed by unit."""
    s = Session(cs, cfg)
    by_tu: dict[int, list] = {}
    for e in events:
        by_tu.setdefault(e.tu, []).append((e.name, e.value))
    original_tick = s.tick

    def tick():
        for name, value in by_tu.get(s.tu, ()):
            s.enqueue_raw(name, value)
        return original_tick()

    s.tick = tick  # type: ignore[method-assign]
    return s


def replay_records(cs: CompiledScore, records,
                   policy: Optional[ChoicePolicy] = None) -> list[UnitRecord]:
    """Feed a recorded trace's inputs through a fresh session."""
    s = Session(cs, RuntimeConfig(policy=policy, max_units=len(records)))
    s.start()
    out = []
    for r in records:
        for name, value in r.inputs:
            s.enqueue_raw(name, value)
        out.append(s.tick())
    return out


# ---------------------------------------------------------------------------
# benchmark

@dataclass(frozen=True)
class BenchReport:
    objects: int
    units: int
    mean_ms: float
    median_ms: float
    max_ms: float
    total_s: float
    messages: int

    def line(self) -> str:
        return (f"bench: {self.objects} objects, {self.units} units, "
                f"mean {self.mean_ms:.2f} ms, median {self.median_ms:.2f} ms, "
                f"max {self.max_ms:.2f} ms, total {self.total_s:.1f} s")


def synthetic_score(n: int) -> Score:
    """Deterministic chain of n objects: cycling durations, a param every
    tenth object, and every 25th link routed through a default branch
    instead of a precedence (same schedule, different machinery)."""
    if n < 1:
        raise SessionError("need at least one object")
    objects, relations, branches = [], [], []
    total = 0
    for i in range(n):
        d = (i % 3) + 1
        total += d
        params = (ParamSpec(0, "gain", i % 128),) if i % 10 == 5 else ()
        objects.append(TemporalObject(f"o{i}", Fixed(d), params=params))
        if i + 1 < n:
            if i % 25 == 24:
                branches.append(ConditionalBranch(f"o{i}", (), f"o{i + 1}"))
            else:
                relations.append(Precedence(f"o{i}", f"o{i + 1}", 1, 1))
    return Score(objects=tuple(objects), relations=tuple(relations),
                 branches=tuple(branches), roots=("o0",), horizon=total + 2)


def bench(n_objects: int, cfg: Optional[RuntimeConfig] = None
          ) -> tuple[BenchReport, list[UnitRecord]]:
    score = synthetic_score(n_objects)
    cs = compile_score(score)
    session = Session(cs, cfg or RuntimeConfig())
    t0 = time.perf_counter()
    records = session.run_all()
    total = time.perf_counter() - t0
    times = [r.compute_ms for r in records] or [0.0]
    report = BenchReport(n_objects, len(records),
                         statistics.fmean(times), statistics.median(times),
                         max(times), total,
                         sum(len(r.messages) for r in records))
    return report, records
