"""Brute-force score scheduler, independent of the process calculus.

Simulates Score semantics directly, unit by unit, and is the ground truth
the compiled ntcc processes are tested against. All timing conventions are
fixed here:

  - a go signal and the start it causes fall in the same unit; roots go at 0
  - an object starting at s with duration d is running in units s..s+d-1;
    start message at s, stop message at s+d-1
  - precedence delay delta counts from the predecessor's last active unit e:
    the successor's go arrives at e+delta
  - an interaction trigger in unit t takes effect in unit t+1 (start or end
    or go in t+1); a point that never fires forces its window maximum
  - unbound flexible durations and delays resolve to their minimum
  - a go for an already-active object is dropped; for a done object it
    restarts it
  - branch arms are evaluated in the end unit; the chosen successor's go
    arrives one unit later; with no entailed arm the default does
  - a unit whose information is inconsistent with the global constraints
    emits no messages and is flagged
"""

from __future__ import annotations

from dataclasses import dataclass

from .score import (
    ControlMessage,
    DurationRel,
    Event,
    Fixed,
    Flexible,
    InteractionPoint,
    Precedence,
    Score,
    SimultaneousStart,
    sig_dur,
)
from .store import Store, VarDecl, var


@dataclass(frozen=True)
class OracleUnit:
    tu: int
    messages: tuple[ControlMessage, ...]
    inconsistent: bool = False


@dataclass
class _Obj:
    idx: int  # position in score order
    status: str = "waiting"  # waiting | active | done
    start: int = -1
    d: int | None = None  # resolved duration; None while a point is pending
    last_dur: int | None = None  # broadcast while done


@dataclass
class _Chain:
    """A pending point-bound precedence delay, opened at the end unit e."""

    target: str
    point: str
    e: int
    w0: int
    w1: int


def oracle_simulate(score: Score, events: list[Event]) -> list[OracleUnit]:
    objs = {o.id: _Obj(i) for i, o in enumerate(score.objects)}
    by_id = {o.id: o for o in score.objects}

    dur_points: dict[str, InteractionPoint] = {}
    start_points: dict[str, InteractionPoint] = {}
    delay_points: dict[str, InteractionPoint] = {}  # relation id -> point
    for p in score.points:
        if p.binds.kind == "duration-of":
            dur_points[p.binds.target] = p
        elif p.binds.kind == "start-of":
            start_points[p.binds.target] = p
        else:
            delay_points[p.binds.target] = p

    sim_partners: dict[str, list[str]] = {}
    for r in score.relations:
        if isinstance(r, SimultaneousStart):
            sim_partners.setdefault(r.a, []).append(r.b)
            sim_partners.setdefault(r.b, []).append(r.a)

    preceding: dict[str, list[Precedence]] = {}
    for r in score.relations:
        if isinstance(r, Precedence):
            preceding.setdefault(r.frm, []).append(r)

    branch_at = {b.at: b for b in score.branches}
    dur_rels = [r for r in score.relations if isinstance(r, DurationRel)]

    triggers: dict[int, set[str]] = {}
    assigns: dict[int, list[tuple[str, int]]] = {}
    for e in events:
        if e.name.startswith("ev_"):
            if e.value == 1:  # ev_p=0 is a no-op, matching the ev_p=1 guard
                triggers.setdefault(e.tu, set()).add(e.name[3:])
        else:
            # conjunction semantics: conflicting same-unit assignments are
            # inconsistent rather than last-wins
            assigns.setdefault(e.tu, []).append((e.name, e.value))

    go_at: dict[int, set[str]] = {0: set(score.roots)}
    # roots with a start point wait for their trigger instead
    pending_roots: dict[str, InteractionPoint] = {}
    for rt in score.roots:
        p = start_points.get(rt)
        if p is not None:
            go_at[0].discard(rt)
            pending_roots[rt] = p

    chains: list[_Chain] = []
    trace: list[OracleUnit] = []

    def start_object(oid: str, t: int, started: set[str]) -> None:
        if oid in started:
            return
        st = objs[oid]
        if st.status == "active":
            return  # go while running is dropped
        started.add(oid)
        o = by_id[oid]
        st.status = "active"
        st.start = t
        if isinstance(o.duration, Fixed):
            st.d = o.duration.d
        elif oid in dur_points:
            st.d = None  # resolved by trigger, forced at window latest
        else:
            st.d = o.duration.dmin
        for q in sim_partners.get(oid, ()):
            start_object(q, t, started)

    def unit_store(t: int, ended_now: list[str]) -> Store:
        decls = [VarDecl(v.name, v.lo, v.hi) for v in score.vars]
        for o in score.objects:
            decls.append(VarDecl(sig_dur(o.id), o.dmin(), o.dmax()))
        s = Store(decls)
        for name, val in assigns.get(t, ()):
            if name in s.decls:
                s.tell(var(name).eq(val))
        for oid, st in objs.items():
            if st.last_dur is not None and (st.status == "done" or oid in ended_now):
                s.tell(var(sig_dur(oid)).eq(st.last_dur))
        for g in score.globals:
            s.tell(g)
        for r in dur_rels:
            lhs, rhs = var(sig_dur(r.a)), var(sig_dur(r.b)).plus(r.offset)
            s.tell({"=": lhs.eq(rhs), "<=": lhs.le(rhs),
                    "<": lhs.lt(rhs), "!=": lhs.ne(rhs)}[r.op])
        return s

    for t in range(score.horizon):
        # forced resolutions whose latest unit is now
        for rt, p in list(pending_roots.items()):
            if t == p.window[1]:
                go_at.setdefault(t, set()).add(rt)
                del pending_roots[rt]
        for ch in chains[:]:
            if t == ch.e + ch.w1:
                go_at.setdefault(t, set()).add(ch.target)
                chains.remove(ch)

        # starts (score order; simultaneous-start closure inside)
        started: set[str] = set()
        arrivals = sorted(go_at.get(t, ()), key=lambda i: objs[i].idx)
        for oid in arrivals:
            start_object(oid, t, started)

        # advance active objects, assemble messages, detect ends
        messages: list[ControlMessage] = []
        ended_now: list[str] = []
        for o in score.objects:
            st = objs[o.id]
            if st.status != "active":
                continue
            pos = t - st.start + 1
            if pos == 1:
                messages.append(o.start_message())
            for spec in o.params:
                if spec.offset == pos - 1:
                    messages.append(ControlMessage("param", o.id, spec.target,
                                                   spec.value))
            ends = False
            if st.d is not None:
                ends = pos == st.d
            else:
                p = dur_points[o.id]
                if pos == p.window[1]:  # never triggered: force the maximum
                    st.d = p.window[1]
                    ends = True
            if ends:
                messages.append(o.end_message())
                st.status = "done"
                st.last_dur = st.d
                ended_now.append(o.id)

        # ends drive branches and delay chains
        store = None
        if ended_now and any(oid in branch_at for oid in ended_now):
            store = unit_store(t, ended_now)
        for oid in ended_now:
            b = branch_at.get(oid)
            if b is not None:
                succ = None
                for arm in b.arms:
                    if store.entails(arm.condition):
                        succ = arm.successor
                        break
                if succ is None:
                    succ = b.default
                if succ is not None:
                    go_at.setdefault(t + 1, set()).add(succ)
            for r in preceding.get(oid, ()):
                p = delay_points.get(r.id) if r.id is not None else None
                if p is None:
                    go_at.setdefault(t + r.dmin, set()).add(r.to)
                else:
                    chains.append(_Chain(r.to, p.id, t, p.window[0], p.window[1]))

        # interaction triggers (effect lands in unit t+1)
        for pid in sorted(triggers.get(t, ())):
            point = next((p for p in score.points if p.id == pid), None)
            if point is None:
                continue
            if point.binds.kind == "duration-of":
                oid = point.binds.target
                st = objs[oid]
                if st.status == "active" and st.d is None:
                    k = t - st.start + 1
                    w0, w1 = point.window
                    if max(1, w0 - 1) <= k <= w1 - 1:
                        st.d = k + 1
            elif point.binds.kind == "start-of":
                oid = point.binds.target
                if oid in pending_roots:
                    w0, w1 = point.window
                    if max(0, w0 - 1) <= t <= w1 - 1:
                        go_at.setdefault(t + 1, set()).add(oid)
                        del pending_roots[oid]
            else:
                for ch in chains[:]:
                    if ch.point == pid and ch.e + ch.w0 - 1 <= t <= ch.e + ch.w1 - 1:
                        go_at.setdefault(t + 1, set()).add(ch.target)
                        chains.remove(ch)

        # global-constraint consistency for this unit
        inconsistent = False
        if score.globals or dur_rels or assigns.get(t):
            if store is None:
                store = unit_store(t, ended_now)
            inconsistent = not store.sat()

        trace.append(OracleUnit(t, () if inconsistent else tuple(messages),
                                inconsistent))
    return trace
