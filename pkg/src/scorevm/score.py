"""Interactive-score domain model: temporal objects, relations, interaction
points, conditional branching, global constraints, plus static validation
and the JSON document format.

All times are integral TUs. Validation is pure and returns diagnostics in a
deterministic order; it never raises on bad scores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .store import (
    Constraint,
    ConstraintSyntaxError,
    Store,
    StoreError,
    VarDecl,
    parse_constraint,
    vars_of,
)


class ScoreError(Exception):
    pass


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class Fixed:
    d: int


@dataclass(frozen=True)
class Flexible:
    dmin: int
    dmax: int


Duration = Union[Fixed, Flexible]


@dataclass(frozen=True)
class ControlMessage:
    kind: str  # start | stop | param
    object: str
    target: Optional[str] = None
    value: Optional[int] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "object": self.object}
        if self.kind == "param":
            out["target"] = self.target
            out["value"] = self.value
        return out


@dataclass(frozen=True)
class ParamSpec:
    offset: int  # TUs from object start
    target: str
    value: int


@dataclass(frozen=True)
class TemporalObject:
    id: str
    duration: Duration
    start_msg: Optional[ControlMessage] = None
    end_msg: Optional[ControlMessage] = None
    params: tuple[ParamSpec, ...] = ()

    def dmin(self) -> int:
        return self.duration.d if isinstance(self.duration, Fixed) else self.duration.dmin

    def dmax(self) -> int:
        return self.duration.d if isinstance(self.duration, Fixed) else self.duration.dmax

    def start_message(self) -> ControlMessage:
        return self.start_msg or ControlMessage("start", self.id)

    def end_message(self) -> ControlMessage:
        return self.end_msg or ControlMessage("stop", self.id)


@dataclass(frozen=True)
class Precedence:
    frm: str
    to: str
    dmin: int  # delay range, dmin >= 1
    dmax: int
    id: Optional[str] = None  # referenced by delay-of interaction points


@dataclass(frozen=True)
class SimultaneousStart:
    a: str
    b: str


@dataclass(frozen=True)
class DurationRel:
    a: str
    op: str  # = | <= | < | !=
    b: str
    offset: int = 0  # dur(a) op dur(b) + offset


Relation = Union[Precedence, SimultaneousStart, DurationRel]


@dataclass(frozen=True)
class Binds:
    kind: str  # start-of | duration-of | delay-of
    target: str  # object id, or relation id for delay-of


@dataclass(frozen=True)
class InteractionPoint:
    id: str
    binds: Binds
    window: tuple[int, int]


@dataclass(frozen=True)
class Arm:
    condition: Constraint
    successor: str


@dataclass(frozen=True)
class ConditionalBranch:
    at: str
    arms: tuple[Arm, ...] = ()
    default: Optional[str] = None


@dataclass(frozen=True)
class Score:
    vars: tuple[VarDecl, ...] = ()
    objects: tuple[TemporalObject, ...] = ()
    relations: tuple[Relation, ...] = ()
    points: tuple[InteractionPoint, ...] = ()
    branches: tuple[ConditionalBranch, ...] = ()
    globals: tuple[Constraint, ...] = ()
    roots: tuple[str, ...] = ()
    horizon: int = 1

    def object(self, oid: str) -> TemporalObject:
        for o in self.objects:
            if o.id == oid:
                return o
        raise ScoreError(f"no such object: {oid}")


@dataclass(frozen=True)
class Diagnostic:
    obj: str  # object id the diagnostic is about ("" for score-level)
    kind: str
    message: str

    def __str__(self) -> str:
        return self.message


# generated signal names; user score vars may not collide with these
def sig_go(oid: str) -> str:
    return "go_" + oid


def sig_start(oid: str) -> str:
    return "st_" + oid


def sig_running(oid: str) -> str:
    return "run_" + oid


def sig_end(oid: str) -> str:
    return "end_" + oid


def sig_dur(oid: str) -> str:
    return "dur_" + oid


def sig_event(pid: str) -> str:
    return "ev_" + pid


def sig_param(oid: str, idx: int) -> str:
    return f"p_{oid}_{idx}"


def reserved_names(s: Score) -> set[str]:
    out: set[str] = set()
    for o in s.objects:
        out.update((sig_go(o.id), sig_start(o.id), sig_running(o.id),
                    sig_end(o.id), sig_dur(o.id)))
        for i in range(len(o.params)):
            out.add(sig_param(o.id, i))
    for p in s.points:
        out.add(sig_event(p.id))
    return out


# ---------------------------------------------------------------------------
# validation

def validate(s: Score) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    add = out.append
    ids = [o.id for o in s.objects]
    idset = set(ids)
    if len(ids) != len(idset):
        seen = set()
        for i in ids:
            if i in seen:
                add(Diagnostic(i, "ref", f"duplicate object id {i}"))
            seen.add(i)

    if s.horizon < 1:
        add(Diagnostic("", "horizon", "horizon must be at least 1"))

    var_names = [v.name for v in s.vars]
    if len(var_names) != len(set(var_names)):
        add(Diagnostic("", "vars", "duplicate score variable"))
    clash = set(var_names) & reserved_names(s)
    for name in sorted(clash):
        add(Diagnostic("", "vars", f"reserved variable name {name}"))

    # durations
    for o in s.objects:
        d = o.duration
        if isinstance(d, Fixed):
            if d.d < 1:
                add(Diagnostic(o.id, "duration", f"{o.id} duration must be >= 1"))
        else:
            if not (1 <= d.dmin <= d.dmax):
                add(Diagnostic(o.id, "duration",
                               f"{o.id} flexible duration needs 1 <= dmin <= dmax"))
        for p in o.params:
            if not (0 <= p.offset < o.dmax()):
                add(Diagnostic(o.id, "param",
                               f"{o.id} param offset {p.offset} outside [0,{o.dmax()})"))

    # relations
    rel_ids: set[str] = set()
    for r in s.relations:
        if isinstance(r, Precedence):
            for end in (r.frm, r.to):
                if end not in idset:
                    add(Diagnostic(end, "ref", f"precedence references unknown object {end}"))
            if r.dmin < 1 or r.dmin > r.dmax:
                add(Diagnostic(r.frm, "delay",
                               f"precedence {r.frm}->{r.to} needs 1 <= min <= max"))
            if r.id is not None:
                if r.id in rel_ids:
                    add(Diagnostic(r.frm, "ref", f"duplicate relation id {r.id}"))
                rel_ids.add(r.id)
        elif isinstance(r, SimultaneousStart):
            for end in (r.a, r.b):
                if end not in idset:
                    add(Diagnostic(end, "ref",
                                   f"simultaneous start references unknown object {end}"))
        else:
            for end in (r.a, r.b):
                if end not in idset:
                    add(Diagnostic(end, "ref",
                                   f"duration relation references unknown object {end}"))
            if r.op not in ("=", "<=", "<", "!="):
                add(Diagnostic(r.a, "duration-relation", f"unknown operator {r.op}"))

    # roots
    for rt in s.roots:
        if rt not in idset:
            add(Diagnostic(rt, "ref", f"root references unknown object {rt}"))

    # branches
    branch_at: set[str] = set()
    score_var_ok = set(var_names) | {sig_dur(i) for i in idset}
    for b in s.branches:
        if b.at not in idset:
            add(Diagnostic(b.at, "ref", f"branch at unknown object {b.at}"))
        if b.at in branch_at:
            add(Diagnostic(b.at, "branch", f"{b.at} has more than one branch point"))
        branch_at.add(b.at)
        if not b.arms and b.default is None:
            add(Diagnostic(b.at, "branch", f"branch at {b.at} has no arms and no default"))
        for arm in b.arms:
            if arm.successor not in idset:
                add(Diagnostic(b.at, "ref",
                               f"branch arm references unknown object {arm.successor}"))
            for v in vars_of(arm.condition):
                if v not in score_var_ok:
                    add(Diagnostic(b.at, "branch",
                                   f"branch condition uses unknown variable {v}"))
        if b.default is not None and b.default not in idset:
            add(Diagnostic(b.at, "ref",
                           f"branch default references unknown object {b.default}"))

    # interaction points
    prec_by_id = {r.id: r for r in s.relations
                  if isinstance(r, Precedence) and r.id is not None}
    bound_targets: set[tuple[str, str]] = set()
    for p in s.points:
        w0, w1 = p.window
        owner = p.binds.target
        if w0 > w1 or w0 < 0:
            add(Diagnostic(owner, "point", f"point {p.id} window is empty"))
            continue
        key = (p.binds.kind, p.binds.target)
        if key in bound_targets:
            add(Diagnostic(owner, "point",
                           f"point {p.id} re-binds {p.binds.kind} {p.binds.target}"))
        bound_targets.add(key)
        if p.binds.kind == "start-of":
            if owner not in idset:
                add(Diagnostic(owner, "ref", f"point {p.id} binds unknown object {owner}"))
            elif owner not in s.roots:
                add(Diagnostic(owner, "point",
                               f"point {p.id} binds start of non-root {owner}"))
            elif w1 > s.horizon - 1:
                add(Diagnostic(owner, "point",
                               f"point {p.id} window exceeds horizon"))
        elif p.binds.kind == "duration-of":
            if owner not in idset:
                add(Diagnostic(owner, "ref", f"point {p.id} binds unknown object {owner}"))
            else:
                o = s.object(owner)
                if isinstance(o.duration, Fixed) or o.dmin() == o.dmax():
                    add(Diagnostic(owner, "point",
                                   f"point {p.id} binds duration of non-flexible {owner}"))
                elif not (o.dmin() <= w0 and w1 <= o.dmax()):
                    add(Diagnostic(owner, "point",
                                   f"point {p.id} window outside [{o.dmin()},{o.dmax()}]"))
        elif p.binds.kind == "delay-of":
            r = prec_by_id.get(owner)
            if r is None:
                add(Diagnostic(owner, "ref",
                               f"point {p.id} binds unknown relation {owner}"))
            elif r.dmin >= r.dmax:
                add(Diagnostic(owner, "point",
                               f"point {p.id} binds delay of non-flexible relation {owner}"))
            elif not (r.dmin <= w0 and w1 <= r.dmax):
                add(Diagnostic(owner, "point",
                               f"point {p.id} window outside [{r.dmin},{r.dmax}]"))
        else:
            add(Diagnostic(owner, "point", f"point {p.id} has unknown binding kind"))

    # precedence-only acyclicity
    if not out:
        graph: dict[str, list[str]] = {i: [] for i in idset}
        for r in s.relations:
            if isinstance(r, Precedence):
                graph[r.frm].append(r.to)
        state: dict[str, int] = {}

        def dfs(n: str) -> bool:
            state[n] = 0
            for m in graph[n]:
                got = state.get(m)
                if got == 0:
                    return True
                if got is None and dfs(m):
                    return True
            state[n] = 1
            return False

        for n in sorted(idset):
            if n not in state and dfs(n):
                add(Diagnostic(n, "cycle", "precedence cycle detected"))
                break

    # start-window propagation (loops cut by bounded relaxation)
    if not out:
        out.extend(_window_diagnostics(s, prec_by_id))

    # duration relations and globals, via the store
    if not out:
        out.extend(_duration_diagnostics(s))

    out.sort(key=lambda d: (d.obj, d.kind, d.message))
    return out


def _effective_delay(r: Precedence, s: Score) -> tuple[int, int]:
    for p in s.points:
        if p.binds.kind == "delay-of" and p.binds.target == r.id:
            return max(1, p.window[0]), p.window[1]
    return r.dmin, r.dmax


def _window_diagnostics(s: Score, prec_by_id) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    start_pt = {p.binds.target: p for p in s.points if p.binds.kind == "start-of"}
    windows: dict[str, tuple[int, int]] = {}
    for rt in s.roots:
        p = start_pt.get(rt)
        if p is None:
            w = (0, 0)
        else:
            w0, w1 = p.window
            w = (min(max(1, w0), w1), w1)
        windows[rt] = w

    def widen(oid: str, lo: int, hi: int) -> bool:
        got = windows.get(oid)
        if got is None:
            windows[oid] = (lo, hi)
            return True
        nlo, nhi = min(got[0], lo), max(got[1], hi)
        if (nlo, nhi) != got:
            windows[oid] = (nlo, nhi)
            return True
        return False

    sim_pairs = [(r.a, r.b) for r in s.relations if isinstance(r, SimultaneousStart)]
    branch_edges = [(b.at, a.successor) for b in s.branches for a in b.arms]
    branch_edges += [(b.at, b.default) for b in s.branches if b.default]

    for _ in range(len(s.objects) + 2):
        changed = False
        for r in s.relations:
            if not isinstance(r, Precedence) or r.frm not in windows:
                continue
            lo, hi = windows[r.frm]
            o = s.object(r.frm)
            dl, dh = _effective_delay(r, s)
            changed |= widen(r.to, lo + o.dmin() - 1 + dl, hi + o.dmax() - 1 + dh)
        for at, succ in branch_edges:
            if at in windows:
                lo, hi = windows[at]
                o = s.object(at)
                changed |= widen(succ, lo + o.dmin(), hi + o.dmax())
        for a, b in sim_pairs:
            if a in windows:
                changed |= widen(b, *windows[a])
            if b in windows:
                changed |= widen(a, *windows[b])
        if not changed:
            break

    for oid in sorted(windows):
        lo, hi = windows[oid]
        lo = max(lo, 0)
        hi = min(hi, s.horizon - 1)
        if lo > hi:
            out.append(Diagnostic(oid, "start-window", f"{oid} start window empty"))
    return out


def _duration_diagnostics(s: Score) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    from .store import var as svar

    for r in s.relations:
        if not isinstance(r, DurationRel):
            continue
        a, b = s.object(r.a), s.object(r.b)
        st = Store([VarDecl("da", a.dmin(), a.dmax()), VarDecl("db", b.dmin(), b.dmax())])
        lhs, rhs = svar("da"), svar("db").plus(r.offset)
        st.tell({"=": lhs.eq(rhs), "<=": lhs.le(rhs),
                 "<": lhs.lt(rhs), "!=": lhs.ne(rhs)}[r.op])
        if not st.sat():
            out.append(Diagnostic(r.a, "duration-relation",
                                  f"duration relation {r.a} {r.op} {r.b} unsatisfiable"))

    if s.globals:
        decls = [VarDecl(v.name, v.lo, v.hi) for v in s.vars]
        decls += [VarDecl(sig_dur(o.id), o.dmin(), o.dmax()) for o in s.objects]
        known = {d.name for d in decls}
        st = Store(decls)
        for g in s.globals:
            missing = sorted(v for v in vars_of(g) if v not in known)
            if missing:
                out.append(Diagnostic("", "globals",
                                      f"global constraint uses unknown variable {missing[0]}"))
                continue
            st.tell(g)
        if not st.sat():
            out.append(Diagnostic("", "globals",
                                  "global constraints unsatisfiable with duration bounds"))
    return out


def event_alphabet(s: Score) -> list[str]:
    """Variables the environment may drive: one event per interaction point
    (in score order), then the score variables (in score order)."""
    out = [sig_event(p.id) for p in s.points]
    out.extend(v.name for v in s.vars)
    return out


# ---------------------------------------------------------------------------
# document format (UTF-8 JSON, unknown keys rejected)

_TOP_KEYS = {"vars", "objects", "relations", "points", "branches",
             "globals", "roots", "horizon"}


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ScoreError(f"unknown key {sorted(unknown)[0]!r} in {where}")


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ScoreError(f"missing key {key!r} in {where}")
    return d[key]


def _ident(x, where: str) -> str:
    if not isinstance(x, str) or not x or not (x[0].isalpha() or x[0] == "_") \
            or not all(c.isalnum() or c == "_" for c in x):
        raise ScoreError(f"bad identifier {x!r} in {where}")
    return x


def _int(x, where: str) -> int:
    if not isinstance(x, int) or isinstance(x, bool):
        raise ScoreError(f"expected integer in {where}, got {x!r}")
    return x


def _constraint(x, where: str) -> Constraint:
    if not isinstance(x, str):
        raise ScoreError(f"expected constraint string in {where}")
    try:
        return parse_constraint(x)
    except (ConstraintSyntaxError, StoreError) as e:
        raise ScoreError(f"bad constraint in {where}: {e}") from None


def _message(x, oid: str, where: str) -> ControlMessage:
    _reject_unknown(x, {"kind", "object", "target", "value"}, where)
    kind = _need(x, "kind", where)
    if kind not in ("start", "stop", "param"):
        raise ScoreError(f"bad message kind {kind!r} in {where}")
    obj = x.get("object", oid)
    if kind == "param":
        return ControlMessage(kind, obj, _ident(_need(x, "target", where), where),
                              _int(_need(x, "value", where), where))
    return ControlMessage(kind, obj)


def score_from_dict(doc: dict) -> Score:
    if not isinstance(doc, dict):
        raise ScoreError("score document must be an object")
    _reject_unknown(doc, _TOP_KEYS, "score")

    vars_: list[VarDecl] = []
    for i, v in enumerate(doc.get("vars", ())):
        where = f"vars[{i}]"
        _reject_unknown(v, {"name", "lo", "hi"}, where)
        lo, hi = _int(_need(v, "lo", where), where), _int(_need(v, "hi", where), where)
        if lo > hi:
            raise ScoreError(f"empty domain in {where}")
        vars_.append(VarDecl(_ident(_need(v, "name", where), where), lo, hi))

    objects: list[TemporalObject] = []
    for i, o in enumerate(doc.get("objects", ())):
        where = f"objects[{i}]"
        _reject_unknown(o, {"id", "duration", "startMsg", "endMsg", "params"}, where)
        oid = _ident(_need(o, "id", where), where)
        dd = _need(o, "duration", where)
        _reject_unknown(dd, {"kind", "d", "dmin", "dmax"}, where + ".duration")
        kind = _need(dd, "kind", where + ".duration")
        if kind == "fixed":
            dur: Duration = Fixed(_int(_need(dd, "d", where), where))
        elif kind == "flexible":
            dur = Flexible(_int(_need(dd, "dmin", where), where),
                           _int(_need(dd, "dmax", where), where))
        else:
            raise ScoreError(f"bad duration kind {kind!r} in {where}")
        params = []
        for j, p in enumerate(o.get("params", ())):
            pwhere = f"{where}.params[{j}]"
            _reject_unknown(p, {"offset", "target", "value"}, pwhere)
            params.append(ParamSpec(_int(_need(p, "offset", pwhere), pwhere),
                                    _ident(_need(p, "target", pwhere), pwhere),
                                    _int(_need(p, "value", pwhere), pwhere)))
        start_msg = _message(o["startMsg"], oid, where) if "startMsg" in o else None
        end_msg = _message(o["endMsg"], oid, where) if "endMsg" in o else None
        objects.append(TemporalObject(oid, dur, start_msg, end_msg, tuple(params)))

    relations: list[Relation] = []
    for i, r in enumerate(doc.get("relations", ())):
        where = f"relations[{i}]"
        kind = _need(r, "kind", where)
        if kind == "precedence":
            _reject_unknown(r, {"kind", "id", "from", "to", "delay"}, where)
            delay = _need(r, "delay", where)
            if not (isinstance(delay, list) and len(delay) == 2):
                raise ScoreError(f"delay must be [min,max] in {where}")
            relations.append(Precedence(
                _ident(_need(r, "from", where), where),
                _ident(_need(r, "to", where), where),
                _int(delay[0], where), _int(delay[1], where),
                _ident(r["id"], where) if "id" in r else None))
        elif kind == "simultaneous":
            _reject_unknown(r, {"kind", "a", "b"}, where)
            relations.append(SimultaneousStart(_ident(_need(r, "a", where), where),
                                               _ident(_need(r, "b", where), where)))
        elif kind == "duration":
            _reject_unknown(r, {"kind", "a", "op", "b", "offset"}, where)
            relations.append(DurationRel(_ident(_need(r, "a", where), where),
                                         _need(r, "op", where),
                                         _ident(_need(r, "b", where), where),
                                         _int(r.get("offset", 0), where)))
        else:
            raise ScoreError(f"bad relation kind {kind!r} in {where}")

    points: list[InteractionPoint] = []
    for i, p in enumerate(doc.get("points", ())):
        where = f"points[{i}]"
        _reject_unknown(p, {"id", "binds", "window"}, where)
        b = _need(p, "binds", where)
        _reject_unknown(b, {"kind", "object", "relation"}, where + ".binds")
        bkind = _need(b, "kind", where + ".binds")
        if bkind in ("start-of", "duration-of"):
            target = _ident(_need(b, "object", where), where)
        elif bkind == "delay-of":
            target = _ident(_need(b, "relation", where), where)
        else:
            raise ScoreError(f"bad binding kind {bkind!r} in {where}")
        w = _need(p, "window", where)
        if not (isinstance(w, list) and len(w) == 2):
            raise ScoreError(f"window must be [earliest,latest] in {where}")
        points.append(InteractionPoint(_ident(_need(p, "id", where), where),
                                       Binds(bkind, target),
                                       (_int(w[0], where), _int(w[1], where))))

    branches: list[ConditionalBranch] = []
    for i, b in enumerate(doc.get("branches", ())):
        where = f"branches[{i}]"
        _reject_unknown(b, {"at", "arms", "default"}, where)
        arms = []
        for j, a in enumerate(b.get("arms", ())):
            awhere = f"{where}.arms[{j}]"
            _reject_unknown(a, {"condition", "successor"}, awhere)
            arms.append(Arm(_constraint(_need(a, "condition", awhere), awhere),
                            _ident(_need(a, "successor", awhere), awhere)))
        branches.append(ConditionalBranch(
            _ident(_need(b, "at", where), where), tuple(arms),
            _ident(b["default"], where) if b.get("default") is not None else None))

    globals_ = tuple(_constraint(g, f"globals[{i}]")
                     for i, g in enumerate(doc.get("globals", ())))
    roots = tuple(_ident(r, "roots") for r in doc.get("roots", ()))
    horizon = _int(doc.get("horizon", 1), "horizon")

    return Score(tuple(vars_), tuple(objects), tuple(relations), tuple(points),
                 tuple(branches), globals_, roots, horizon)


def load_score(text: str) -> Score:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScoreError(f"not valid JSON: {e}") from None
    return score_from_dict(doc)


def score_to_dict(s: Score) -> dict:
    def dur(d: Duration) -> dict:
        if isinstance(d, Fixed):
            return {"kind": "fixed", "d": d.d}
        return {"kind": "flexible", "dmin": d.dmin, "dmax": d.dmax}

    def rel(r: Relation) -> dict:
        if isinstance(r, Precedence):
            out = {"kind": "precedence", "from": r.frm, "to": r.to,
                   "delay": [r.dmin, r.dmax]}
            if r.id is not None:
                out["id"] = r.id
            return out
        if isinstance(r, SimultaneousStart):
            return {"kind": "simultaneous", "a": r.a, "b": r.b}
        return {"kind": "duration", "a": r.a, "op": r.op, "b": r.b,
                "offset": r.offset}

    def obj(o: TemporalObject) -> dict:
        out: dict = {"id": o.id, "duration": dur(o.duration)}
        if o.start_msg:
            out["startMsg"] = o.start_msg.to_json()
        if o.end_msg:
            out["endMsg"] = o.end_msg.to_json()
        if o.params:
            out["params"] = [{"offset": p.offset, "target": p.target,
                              "value": p.value} for p in o.params]
        return out

    return {
        "vars": [{"name": v.name, "lo": v.lo, "hi": v.hi} for v in s.vars],
        "objects": [obj(o) for o in s.objects],
        "relations": [rel(r) for r in s.relations],
        "points": [{"id": p.id,
                    "binds": ({"kind": p.binds.kind, "relation": p.binds.target}
                              if p.binds.kind == "delay-of"
                              else {"kind": p.binds.kind, "object": p.binds.target}),
                    "window": list(p.window)} for p in s.points],
        "branches": [{"at": b.at,
                      "arms": [{"condition": a.condition.render(),
                                "successor": a.successor} for a in b.arms],
                      **({"default": b.default} if b.default else {})}
                     for b in s.branches],
        "globals": [g.render() for g in s.globals],
        "roots": list(s.roots),
        "horizon": s.horizon,
    }


# ---------------------------------------------------------------------------
# scripted environment events ("tu ev_point" / "tu var=value" lines)

@dataclass(frozen=True)
class Event:
    tu: int
    name: str  # event variable (ev_*) or score variable
    value: int = 1


def parse_event_token(token: str) -> tuple[str, int]:
    token = token.strip()
    if "=" in token:
        name, _, val = token.partition("=")
        name, val = name.strip(), val.strip()
        try:
            return name, int(val)
        except ValueError:
            raise ScoreError(f"bad event value in {token!r}") from None
    return token, 1


def parse_events(text: str) -> list[Event]:
    out: list[Event] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ScoreError(f"events line {lineno}: expected 'tu token'")
        try:
            tu = int(parts[0])
        except ValueError:
            raise ScoreError(f"events line {lineno}: bad time unit") from None
        name, value = parse_event_token(parts[1])
        out.append(Event(tu, name, value))
    return out
