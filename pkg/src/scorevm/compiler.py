"""Translate a validated Score into ntcc definitions plus an entry process.

Signals are per-unit booleans (the store resets every unit):
  go_o   start request for object o (same unit as the start it causes)
  st_o   o actually started this unit (drives the start message)
  run_o  o occupies this unit
  end_o  o ends this unit (drives the stop message)
  dur_o  resolved duration, told from the end unit onward (only when some
         global constraint, duration relation or branch condition needs it)
  ev_p   interaction point p fired this unit (environment input)
  p_o_i  param automation i of o fires this unit

Positions are 1-based: an object started in unit s is at position k in unit
s+k-1. Definition bodies test their position parameter with constant guards
that substitution resolves to true/false, so a single parametric definition
per object covers every unit of its activity.
"""

from __future__ import annotations

from dataclasses import dataclass

from .machine import run as machine_run
from .process import (
    Bang,
    Call,
    DefTable,
    Next,
    Par,
    Process,
    Sum,
    Tell,
    Unless,
    par,
    param,
)
from .score import (
    ConditionalBranch,
    ControlMessage,
    DurationRel,
    Event,
    Fixed,
    InteractionPoint,
    Precedence,
    Score,
    ScoreError,
    SimultaneousStart,
    sig_dur,
    sig_end,
    sig_event,
    sig_go,
    sig_param,
    sig_running,
    sig_start,
    validate,
)
from .store import And, Constraint, LinExpr, Or, Store, TRUE, VarDecl, var, vars_of


@dataclass(frozen=True)
class CompiledScore:
    score: Score
    defs: DefTable
    entry: Process
    env: tuple[VarDecl, ...]
    msgmap: tuple[tuple[str, ControlMessage], ...]  # signal var -> message

    def env_map(self) -> dict[str, tuple[int, int]]:
        return {d.name: (d.lo, d.hi) for d in self.env}


def _is1(name: str) -> Constraint:
    return var(name).eq(1)


def _k() -> LinExpr:
    return param("k")


def _j() -> LinExpr:
    return param("j")


def compile_score(s: Score, force_unfired_points: bool = True) -> CompiledScore:
    """force_unfired_points: an interaction point that never fires resolves
    to its window maximum at the latest unit (the oracle convention). With
    False the object or delay simply never completes; kept as an explicit
    deviation knob."""
    diags = validate(s)
    if diags:
        raise ScoreError("validate first: " + "; ".join(str(d) for d in diags))

    defs = DefTable()

    dur_points: dict[str, InteractionPoint] = {}
    delay_points: dict[str, InteractionPoint] = {}
    start_points: dict[str, InteractionPoint] = {}
    for p in s.points:
        if p.binds.kind == "duration-of":
            dur_points[p.binds.target] = p
        elif p.binds.kind == "delay-of":
            delay_points[p.binds.target] = p
        else:
            start_points[p.binds.target] = p

    dur_rels = [r for r in s.relations if isinstance(r, DurationRel)]
    branch_at: dict[str, ConditionalBranch] = {b.at: b for b in s.branches}

    # which dur_o variables exist at all
    referenced: set[str] = set()
    for g in s.globals:
        referenced.update(vars_of(g))
    for b in s.branches:
        for a in b.arms:
            referenced.update(vars_of(a.condition))
    for r in dur_rels:
        referenced.add(sig_dur(r.a))
        referenced.add(sig_dur(r.b))
    dur_needed = {o.id for o in s.objects if sig_dur(o.id) in referenced}

    # environment declarations
    env: list[VarDecl] = [VarDecl(v.name, v.lo, v.hi) for v in s.vars]
    for o in s.objects:
        env += [VarDecl(sig_go(o.id), 0, 1), VarDecl(sig_start(o.id), 0, 1),
                VarDecl(sig_running(o.id), 0, 1), VarDecl(sig_end(o.id), 0, 1)]
        if o.id in dur_needed:
            env.append(VarDecl(sig_dur(o.id), o.dmin(), o.dmax()))
        for i in range(len(o.params)):
            env.append(VarDecl(sig_param(o.id, i), 0, 1))
    for p in s.points:
        env.append(VarDecl(sig_event(p.id), 0, 1))

    # object definitions ----------------------------------------------------
    for o in s.objects:
        oid = o.id
        k = _k()

        def act_name() -> str:
            return "Act_" + oid

        # end-of-activity tail at position k (runs in the end unit)
        fin_parts: list[Process] = [Tell(_is1(sig_end(oid)))]
        if oid in dur_needed:
            fin_parts.append(Tell(var(sig_dur(oid)).eq(k)))
        b = branch_at.get(oid)
        if b is not None:
            fin_parts.append(_branch_process(b))
        for idx, r in enumerate(s.relations):
            if isinstance(r, Precedence) and r.frm == oid:
                fin_parts.append(Call(_chain_name(r, idx), (0,)))
        if oid in dur_needed:
            fin_parts.append(Next(Call("Done_" + oid, (k,))))
        else:
            fin_parts.append(Next(Call("Wait_" + oid, ())))
        defs.define("Fin_" + oid, ["k"], par(*fin_parts))

        fin = Call("Fin_" + oid, (k,))
        cont = Next(Call(act_name(), (k.plus(1),)))

        # position-dispatch arms for the continuation
        d = o.duration
        if isinstance(d, Fixed):
            arms = [(k.lt(d.d), cont), (k.eq(d.d), fin)]
        elif oid in dur_points:
            w0, w1 = dur_points[oid].window
            listen = Call("Listen_" + oid, (k,))
            arms = [(k.lt(w0 - 1), cont),
                    (And(And(k.ge(w0 - 1), k.ge(1)), k.le(w1 - 1)), listen),
                    (k.eq(w1), fin)]
            ev = _is1(sig_event(dur_points[oid].id))
            defs.define("Listen_" + oid, ["k"],
                        Par(Sum(((ev, Next(Call("Last_" + oid, (k.plus(1),)))),)),
                            Unless(ev, Call(act_name(), (k.plus(1),)))))
            defs.define("Last_" + oid, ["k"],
                        par(Tell(_is1(sig_running(oid))), *_param_tells(o, k), fin))
            if not force_unfired_points:
                arms = arms[:2] + [(k.eq(w1), listen)]
        else:
            arms = [(k.lt(d.dmin), cont),
                    (And(k.ge(d.dmin), k.lt(d.dmax)), fin),
                    (And(k.ge(d.dmin), k.lt(d.dmax)), cont),
                    (k.eq(d.dmax), fin)]

        defs.define(act_name(), ["k"],
                    par(Tell(_is1(sig_running(oid))), *_param_tells(o, k), Sum(tuple(arms))))

        defs.define("Start_" + oid, [],
                    Par(Tell(_is1(sig_start(oid))), Call(act_name(), (1,))))
        go = _is1(sig_go(oid))
        defs.define("Wait_" + oid, [],
                    Par(Sum(((go, Call("Start_" + oid, ())),)),
                        Unless(go, Call("Wait_" + oid, ()))))
        if oid in dur_needed:
            defs.define("Done_" + oid, ["d"],
                        par(Tell(var(sig_dur(oid)).eq(param("d"))),
                            Sum(((go, Call("Start_" + oid, ())),)),
                            Unless(go, Call("Done_" + oid, (param("d"),)))))

    # precedence delay chains and end watchers -------------------------------
    for idx, r in enumerate(s.relations):
        if not isinstance(r, Precedence):
            continue
        name = _chain_name(r, idx)
        j = _j()
        go_tell = Tell(_is1(sig_go(r.to)))
        p = delay_points.get(r.id) if r.id is not None else None
        if p is None and r.dmin == r.dmax:
            arms = [(j.lt(r.dmin), Next(Call(name, (j.plus(1),)))),
                    (j.eq(r.dmin), go_tell)]
        elif p is None:
            cont = Next(Call(name, (j.plus(1),)))
            arms = [(j.lt(r.dmin), cont),
                    (And(j.ge(r.dmin), j.lt(r.dmax)), go_tell),
                    (And(j.ge(r.dmin), j.lt(r.dmax)), cont),
                    (j.eq(r.dmax), go_tell)]
        else:
            w0, w1 = p.window
            ev = _is1(sig_event(p.id))
            defs.define(name + "_lsn", ["j"],
                        Par(Sum(((ev, Next(go_tell)),)),
                            Unless(ev, Call(name, (j.plus(1),)))))
            arms = [(j.lt(w0 - 1), Next(Call(name, (j.plus(1),)))),
                    (And(j.ge(w0 - 1), j.le(w1 - 1)), Call(name + "_lsn", (j,))),
                    (j.eq(w1), go_tell)]
            if not force_unfired_points:
                arms = arms[:2] + [(j.eq(w1), Call(name + "_lsn", (j,)))]
        defs.define(name, ["j"], Sum(tuple(arms)))

        ended = _is1(sig_end(r.frm))
        wname = "On_" + name
        defs.define(wname, [],
                    Par(Sum(((ended, Par(Call(name, (0,)), Next(Call(wname, ())))),)),
                        Unless(ended, Call(wname, ()))))

    # simultaneous-start fanout; keyed on st (an actual start), not go,
    # so a go dropped against an active partner does not cascade
    for idx, r in enumerate(s.relations):
        if not isinstance(r, SimultaneousStart):
            continue
        for src, dst, tag in ((r.a, r.b, "f"), (r.b, r.a, "b")):
            name = f"Sim_{idx}{tag}"
            g = _is1(sig_start(src))
            defs.define(name, [],
                        Par(Sum(((g, Par(Tell(_is1(sig_go(dst))),
                                         Next(Call(name, ())))),)),
                            Unless(g, Call(name, ()))))

    # windowed root starts -----------------------------------------------
    for rt in s.roots:
        p = start_points.get(rt)
        if p is None:
            continue
        w0, w1 = p.window
        name = "Root_" + rt
        j = _j()
        ev = _is1(sig_event(p.id))
        go_tell = Tell(_is1(sig_go(rt)))
        defs.define(name + "_lsn", ["j"],
                    Par(Sum(((ev, Next(go_tell)),)),
                        Unless(ev, Call(name, (j.plus(1),)))))
        arms = [(j.lt(w0 - 1), Next(Call(name, (j.plus(1),)))),
                (And(j.ge(max(0, w0 - 1)), j.le(w1 - 1)), Call(name + "_lsn", (j,))),
                (j.eq(w1), go_tell)]
        if not force_unfired_points:
            arms = arms[:2] + [(j.eq(w1), Call(name + "_lsn", (j,)))]
        defs.define(name, ["j"], Sum(tuple(arms)))

    # entry --------------------------------------------------------------
    entry_parts: list[Process] = []
    for rt in s.roots:
        if rt in start_points:
            entry_parts.append(Call("Root_" + rt, (0,)))
        else:
            entry_parts.append(Tell(_is1(sig_go(rt))))
    for o in s.objects:
        entry_parts.append(Call("Wait_" + o.id, ()))
    for idx, r in enumerate(s.relations):
        if isinstance(r, Precedence):
            entry_parts.append(Call("On_" + _chain_name(r, idx), ()))
        elif isinstance(r, SimultaneousStart):
            entry_parts.append(Call(f"Sim_{idx}f", ()))
            entry_parts.append(Call(f"Sim_{idx}b", ()))
    for g in s.globals:
        entry_parts.append(Bang(Tell(g)))
    for r in dur_rels:
        lhs, rhs = var(sig_dur(r.a)), var(sig_dur(r.b)).plus(r.offset)
        c = {"=": lhs.eq(rhs), "<=": lhs.le(rhs),
             "<": lhs.lt(rhs), "!=": lhs.ne(rhs)}[r.op]
        entry_parts.append(Bang(Tell(c)))
    entry = par(*entry_parts)

    # message map, in score order: start, params, stop per object
    msgmap: list[tuple[str, ControlMessage]] = []
    for o in s.objects:
        msgmap.append((sig_start(o.id), o.start_message()))
        for i, spec in enumerate(o.params):
            msgmap.append((sig_param(o.id, i),
                           ControlMessage("param", o.id, spec.target, spec.value)))
        msgmap.append((sig_end(o.id), o.end_message()))

    defs.check(entry)
    return CompiledScore(s, defs, entry, tuple(env), tuple(msgmap))


def _chain_name(r: Precedence, idx: int) -> str:
    key = r.id if r.id is not None else f"r{idx}"
    return f"Dly_{key}_{idx}"


def _param_tells(o, k: LinExpr) -> list[Process]:
    out = []
    for i, spec in enumerate(o.params):
        out.append(Sum(((k.eq(spec.offset + 1),
                         Tell(_is1(sig_param(o.id, i)))),)))
    return out


def _branch_process(b: ConditionalBranch) -> Process:
    arms = tuple((a.condition, Next(Tell(_is1(sig_go(a.successor)))))
                 for a in b.arms)
    parts: list[Process] = []
    if arms:
        parts.append(Sum(arms))
    if b.default is not None:
        dflt = Tell(_is1(sig_go(b.default)))
        if arms:
            any_cond: Constraint = b.arms[0].condition
            for a in b.arms[1:]:
                any_cond = Or(any_cond, a.condition)
            parts.append(Unless(any_cond, dflt))
        else:
            parts.append(Next(dflt))
    return par(*parts)


# ---------------------------------------------------------------------------
# running compiled scores

def events_to_inputs(events: list[Event], horizon: int) -> list[Constraint]:
    """Per-unit input constraints: the conjunction of that unit's events."""
    by_tu: dict[int, list[Event]] = {}
    for e in events:
        by_tu.setdefault(e.tu, []).append(e)
    out: list[Constraint] = []
    for t in range(horizon):
        c: Constraint = TRUE
        for e in by_tu.get(t, ()):
            one = var(e.name).eq(e.value)
            c = one if isinstance(c, type(TRUE)) else And(c, one)
        out.append(c)
    return out


def extract_messages(store: Store, msgmap) -> tuple[tuple[ControlMessage, ...], bool]:
    """Messages whose signal holds in this unit's store; an inconsistent
    store yields no messages and an error flag instead."""
    if not store.sat():
        return (), True
    out = []
    for signal, msg in msgmap:
        lo, hi = store.bounds_of(signal)
        if lo == hi == 1 or (lo != hi and store.entails(_is1(signal))):
            out.append(msg)
    return tuple(out), False


def run_compiled(cs: CompiledScore, events: list[Event], policy=None):
    """Run the compiled process over the horizon; per-unit messages."""
    from .oracle import OracleUnit
    from .score import event_alphabet

    ok = set(event_alphabet(cs.score))
    events = [e for e in events
              if e.name in ok and not (e.name.startswith("ev_") and e.value != 1)]
    inputs = events_to_inputs(events, cs.score.horizon)
    results = machine_run(cs.entry, cs.defs, inputs, cs.env_map(), policy)
    out = []
    for t, r in enumerate(results):
        msgs, bad = extract_messages(r.output, cs.msgmap)
        out.append(OracleUnit(t, msgs, bad))
    return out
