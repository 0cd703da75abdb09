"""Session lifecycle, event acks, trace invariants and the benchmark."""

import json
import threading

import pytest

from corpus_defs import hand_corpus, obj
from scorevm.compiler import compile_score, run_compiled
from scorevm.oracle import oracle_simulate
from scorevm.runtime import (
    BenchReport,
    RuntimeConfig,
    ScoreStateTracker,
    Session,
    SessionError,
    bench,
    entailed_signals,
    records_to_jsonl,
    replay_records,
    scripted_session,
    synthetic_score,
)
from scorevm.score import (
    Binds,
    Event,
    Fixed,
    InteractionPoint,
    ParamSpec,
    Precedence,
    Score,
    TemporalObject,
    validate,
)
from scorevm.store import VarDecl, parse_constraint

CORPUS = {name: (score, events) for name, score, events in hand_corpus()}


def make_session(name, cfg=None):
    score, events = CORPUS[name]
    return scripted_session(compile_score(score), events, cfg)


def run_session(name, cfg=None):
    s = make_session(name, cfg)
    return s.run_all()


def essentials(records):
    # everything except wall-clock artifacts: compute_ms and overrun flags
    return [(r.tu, r.inputs, r.signals, r.messages, r.fired,
             tuple(f for f in r.flags if f != "overrun"))
            for r in records]


# -- lifecycle ---------------------------------------------------------------

def test_double_start_rejected():
    s = make_session("single_fixed")
    s.start()
    with pytest.raises(SessionError, match="already running"):
        s.start()


def test_tick_before_start_rejected():
    s = make_session("single_fixed")
    with pytest.raises(SessionError, match="not started"):
        s.tick()


def test_zero_max_units_completes_immediately():
    s = make_session("single_fixed", RuntimeConfig(max_units=0))
    s.start()
    assert s.state == "done"
    assert s.records == []
    with pytest.raises(SessionError, match="completed"):
        s.tick()


def test_tick_past_max_units_rejected():
    s = make_session("single_fixed", RuntimeConfig(max_units=2))
    s.start()
    s.tick()
    s.tick()
    with pytest.raises(SessionError, match="completed"):
        s.tick()


def test_max_units_beyond_horizon_rejected():
    score, _ = CORPUS["single_fixed"]
    with pytest.raises(SessionError, match="horizon"):
        Session(compile_score(score), RuntimeConfig(max_units=99))


def test_bad_period_and_policy_rejected():
    score, _ = CORPUS["single_fixed"]
    cs = compile_score(score)
    with pytest.raises(SessionError, match="period"):
        Session(cs, RuntimeConfig(tu_period_ms=0))
    with pytest.raises(SessionError, match="overrun"):
        Session(cs, RuntimeConfig(overrun="explode"))


# -- event acks --------------------------------------------------------------

def point_score():
    return Score(
        objects=(TemporalObject("A", Fixed(1)),),
        points=(InteractionPoint("p", Binds("start-of", "A"), (0, 6)),),
        vars=(VarDecl("k", 0, 9),),
        roots=("A",), horizon=12)


def test_unknown_event_rejected():
    s = Session(compile_score(point_score()))
    s.start()
    assert s.inject_event("nope") == {
        "status": "error", "reason": "unknown event nope"}


def test_out_of_range_set_rejected():
    s = Session(compile_score(point_score()))
    s.start()
    assert s.inject_event("k", 42)["status"] == "error"
    assert s.inject_event("k", 3)["status"] == "accepted"


def test_trigger_inside_window_accepted():
    s = Session(compile_score(point_score()))
    s.start()
    assert s.inject_event("ev_p") == {"status": "accepted"}


def test_trigger_after_window_ignored():
    s = Session(compile_score(point_score()))
    s.start()
    for _ in range(7):  # window [0,6]: last listening unit is 5
        s.tick()
    ack = s.inject_event("ev_p")
    assert ack == {"status": "ignored", "reason": "window closed"}


def test_trigger_after_consumption_ignored():
    s = Session(compile_score(point_score()))
    s.start()
    s.inject_event("ev_p")
    s.tick()
    assert s.inject_event("ev_p")["status"] == "ignored"


def test_ignored_event_not_applied():
    s = Session(compile_score(point_score()))
    s.start()
    for _ in range(7):
        s.tick()
    s.inject_event("ev_p")
    rec = s.tick()
    assert rec.inputs == ()


# -- semantics against the oracle --------------------------------------------

TRACED = [
    "single_fixed", "fixed_chain", "params_gain_curve",
    "duration_point_trigger", "delay_point_trigger", "start_point_trigger",
    "branch_loop_counter", "global_duration_violation",
    "simultaneous_transitive",
]


@pytest.mark.parametrize("name", TRACED)
def test_session_messages_match_oracle(name):
    score, events = CORPUS[name]
    expected = oracle_simulate(score, events)
    records = run_session(name)
    assert len(records) == score.horizon
    for rec, want in zip(records, expected):
        if want.inconsistent:
            assert "constraint failure" in rec.flags
            break
        assert rec.messages == want.messages
        assert "constraint failure" not in rec.flags


def test_constraint_failure_session_continues():
    records = run_session("global_duration_violation")
    bad = [r.tu for r in records if "constraint failure" in r.flags]
    assert bad and bad[0] == 2
    # the session keeps ticking to the horizon regardless
    score, _ = CORPUS["global_duration_violation"]
    assert len(records) == score.horizon


def test_abort_policy_stops_on_constraint_failure():
    s = make_session("global_duration_violation", RuntimeConfig(overrun="abort"))
    s.start()
    while s.state == "running":
        rec = s.tick()
    assert s.state == "aborted"
    assert "constraint failure" in rec.flags
    with pytest.raises(SessionError, match="aborted"):
        s.tick()


# -- trace invariants ----------------------------------------------------------

def test_trace_invariant_under_tu_period():
    fast = run_session("start_point_trigger", RuntimeConfig(tu_period_ms=1))
    slow = run_session("start_point_trigger", RuntimeConfig(tu_period_ms=100))
    assert essentials(fast) == essentials(slow)


def test_same_unit_events_order_independent():
    score = point_score()
    cs = compile_score(score)
    traces = []
    for order in ((("ev_p", 1), ("k", 2)), (("k", 2), ("ev_p", 1))):
        s = Session(cs)
        s.start()
        for name, value in order:
            s.enqueue_raw(name, value)
        recs = [s.tick() for _ in range(4)]
        traces.append([(r.signals, r.messages, r.flags) for r in recs])
    assert traces[0] == traces[1]


def test_replay_reproduces_messages():
    s = make_session("start_point_trigger")
    recorded = s.run_all()
    replayed = replay_records(s.cs, recorded)
    assert [r.messages for r in replayed] == [r.messages for r in recorded]
    assert [r.signals for r in replayed] == [r.signals for r in recorded]


def test_injection_visible_to_next_tick():
    s = Session(compile_score(point_score()))
    s.start()
    t = threading.Thread(target=lambda: s.inject_event("ev_p"))
    t.start()
    t.join()
    rec = s.tick()
    assert rec.inputs == (("ev_p", 1),)


# -- overrun handling (clock stubbed for determinism) -------------------------

def test_overrun_flag_and_abort(monkeypatch):
    import scorevm.runtime as rt
    ticks = iter(range(0, 1000))

    def fake_counter():
        return next(ticks) * 0.010  # 10 ms per call

    monkeypatch.setattr(rt.time, "perf_counter", fake_counter)
    s = make_session("single_fixed", RuntimeConfig(tu_period_ms=5))
    s.start()
    rec = s.tick()
    assert "overrun" in rec.flags
    assert s.state == "running"  # log policy continues

    s2 = make_session("single_fixed",
                      RuntimeConfig(tu_period_ms=5, overrun="abort"))
    s2.start()
    s2.tick()
    assert s2.state == "aborted"


# -- snapshots -----------------------------------------------------------------

def test_snapshot_object_lifecycle():
    score = Score(objects=(obj("A", 3),), roots=("A",), horizon=6)
    s = Session(compile_score(score))
    s.start()
    assert s.snapshot()["tu"] == -1
    s.tick()
    snap = s.snapshot()
    assert snap["objects"] == [{"id": "A", "state": "active", "remaining": 2}]
    s.tick()
    assert s.snapshot()["objects"][0]["remaining"] == 1
    s.tick()
    snap = s.snapshot()
    # final active unit: still displayed active, stop message in the feed
    assert snap["objects"][0] == {"id": "A", "state": "active", "remaining": 0}
    assert any(m["kind"] == "stop" for m in snap["messages"])
    s.tick()
    assert s.snapshot()["objects"][0]["state"] == "done"


def test_snapshot_pending_points():
    s = Session(compile_score(point_score()))
    s.start()
    s.tick()
    pts = s.snapshot()["pendingPoints"]
    assert [p["id"] for p in pts] == ["p"]
    s.inject_event("ev_p")
    s.tick()
    s.tick()
    assert s.snapshot()["pendingPoints"] == []


# -- serialization ---------------------------------------------------------------

def test_records_to_jsonl_shape():
    records = run_session("single_fixed")
    lines = records_to_jsonl(records).strip().split("\n")
    assert len(lines) == len(records)
    first = json.loads(lines[0])
    assert set(first) == {"tu", "messages", "computeMs"}
    bare = json.loads(records_to_jsonl(records, include_compute=False).split("\n")[0])
    assert set(bare) == {"tu", "messages"}
    assert records_to_jsonl([]) == ""


def test_entailed_signals_reports_singletons():
    score, _ = CORPUS["single_fixed"]
    cs = compile_score(score)
    out = run_compiled(cs, [])
    s = Session(cs)
    s.start()
    rec = s.tick()
    assert "st_A=1" in rec.signals
    assert "go_A=1" in rec.signals
    assert not any(sig.startswith("end_A") for sig in rec.signals)


# -- benchmark -------------------------------------------------------------------

def test_synthetic_score_is_valid():
    for n in (1, 7, 30):
        assert validate(synthetic_score(n)) == []


def test_synthetic_score_rejects_zero():
    with pytest.raises(SessionError):
        synthetic_score(0)


def test_bench_deterministic_and_sane():
    rep1, recs1 = bench(20)
    rep2, recs2 = bench(20)
    assert [r.messages for r in recs1] == [r.messages for r in recs2]
    assert [r.signals for r in recs1] == [r.signals for r in recs2]
    assert isinstance(rep1, BenchReport)
    assert rep1.units == synthetic_score(20).horizon
    assert rep1.median_ms <= rep1.max_ms
    assert rep1.mean_ms > 0
    assert rep1.messages == sum(len(r.messages) for r in recs1)
    assert "bench: 20 objects" in rep1.line()


def test_bench_every_object_runs():
    _, recs = bench(12)
    started = {m.object for r in recs for m in r.messages if m.kind == "start"}
    assert started == {f"o{i}" for i in range(12)}
