"""Bounded model checking of compiled scores against temporal properties.

Formulas are bounded LTL over constraint atoms, interpreted on the finite
trace of per-unit output stores with clamped semantics: at the end of the
trace, pending always/release obligations hold vacuously while pending
next/eventually/until obligations fail. Negation is first class and is
pushed to atoms at construction (a negated atom holds when the store does
not entail it, which is weaker than entailing its negation).

The checker branches over every environment input combination and every
internal scheduling choice, progresses the formula one unit at a time and
memoizes on (residual process, unit, obligation).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Iterable, Optional

from .compiler import CompiledScore, extract_messages
from .machine import ScriptExhausted, Scripted, step
from .process import Process, render
from .runtime import entailed_signals, input_conjunction
from .score import ControlMessage, Event, event_alphabet, parse_event_token
from .store import Constraint, parse_constraint

FORALL = "for-all-runs"
EXISTS = "exists-run"


class VerifierError(Exception):
    pass


@dataclass(frozen=True)
class VerifyStats:
    states: int
    branches: int
    elapsed_s: float
    memo_hits: int


class BudgetExhausted(VerifierError):
    def __init__(self, stats: VerifyStats):
        super().__init__("budget exhausted")
        self.stats = stats


# ---------------------------------------------------------------------------
# formulas (negation normal form)

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class PTrue(Formula):
    pass


@dataclass(frozen=True)
class PFalse(Formula):
    pass


@dataclass(frozen=True)
class PAtom(Formula):
    c: Constraint
    neg: bool = False


@dataclass(frozen=True)
class PAnd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class POr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class PNext(Formula):  # strong: requires a next unit
    body: Formula


@dataclass(frozen=True)
class PWNext(Formula):  # weak: holds at the last unit
    body: Formula


@dataclass(frozen=True)
class PAlways(Formula):
    body: Formula
    k: int


@dataclass(frozen=True)
class PEventually(Formula):
    body: Formula
    k: int


@dataclass(frozen=True)
class PUntil(Formula):
    left: Formula
    right: Formula
    k: int


@dataclass(frozen=True)
class PRelease(Formula):
    left: Formula
    right: Formula
    k: int


TT = PTrue()
FF = PFalse()


def atom(c: "Constraint | str") -> Formula:
    if isinstance(c, str):
        c = parse_constraint(c)
    return PAtom(c)


def conj(*fs: Formula) -> Formula:
    out: Formula = TT
    for f in fs:
        if f is FF or out is FF:
            return FF
        if f is TT:
            continue
        out = f if out is TT else PAnd(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    out: Formula = FF
    for f in fs:
        if f is TT or out is TT:
            return TT
        if f is FF:
            continue
        out = f if out is FF else POr(out, f)
    return out


def neg(f: Formula) -> Formula:
    t = type(f)
    if t is PTrue:
        return FF
    if t is PFalse:
        return TT
    if t is PAtom:
        return PAtom(f.c, not f.neg)
    if t is PAnd:
        return POr(neg(f.left), neg(f.right))
    if t is POr:
        return PAnd(neg(f.left), neg(f.right))
    if t is PNext:
        return PWNext(neg(f.body))
    if t is PWNext:
        return PNext(neg(f.body))
    if t is PAlways:
        return PEventually(neg(f.body), f.k)
    if t is PEventually:
        return PAlways(neg(f.body), f.k)
    if t is PUntil:
        return PRelease(neg(f.left), neg(f.right), f.k)
    return PUntil(neg(f.left), neg(f.right), f.k)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def nxt(f: Formula, n: int = 1) -> Formula:
    for _ in range(n):
        f = PNext(f)
    return f


def always(f: Formula, k: int) -> Formula:
    return PAlways(f, k)


def eventually(f: Formula, k: int) -> Formula:
    return PEventually(f, k)


def until(a: Formula, b: Formula, k: int) -> Formula:
    return PUntil(a, b, k)


def _max_bound(f: Formula) -> int:
    t = type(f)
    if t in (PTrue, PFalse, PAtom):
        return 0
    if t in (PNext, PWNext):
        return _max_bound(f.body)
    if t in (PAnd, POr):
        return max(_max_bound(f.left), _max_bound(f.right))
    if t in (PAlways, PEventually):
        return max(f.k, _max_bound(f.body))
    return max(f.k, _max_bound(f.left), _max_bound(f.right))


@dataclass(frozen=True)
class Property:
    formula: Formula
    mode: str = FORALL

    def __post_init__(self):
        if self.mode not in (FORALL, EXISTS):
            raise VerifierError(f"unknown mode {self.mode!r}")


# ---------------------------------------------------------------------------
# property documents

def _parse_formula(doc) -> Formula:
    if not isinstance(doc, dict):
        raise VerifierError(f"formula node must be an object, got {doc!r}")
    ops = [k for k in doc if k != "k"]
    if len(ops) != 1:
        raise VerifierError(f"formula node needs exactly one operator: {doc!r}")
    op = ops[0]
    body = doc[op]

    def bound() -> int:
        if "k" not in doc:
            raise VerifierError(f"{op} needs a bound k")
        k = doc["k"]
        if not isinstance(k, int) or k < 0:
            raise VerifierError(f"bad bound k: {k!r}")
        return k

    def pair() -> tuple[Formula, Formula]:
        if not isinstance(body, list) or len(body) != 2:
            raise VerifierError(f"{op} takes a two-element list")
        return _parse_formula(body[0]), _parse_formula(body[1])

    if op == "atom":
        if not isinstance(body, str):
            raise VerifierError("atom takes a constraint string")
        return atom(body)
    if op == "not":
        return neg(_parse_formula(body))
    if op == "and":
        if not isinstance(body, list) or len(body) < 2:
            raise VerifierError("and takes a list of at least two formulas")
        return conj(*(_parse_formula(b) for b in body))
    if op == "or":
        if not isinstance(body, list) or len(body) < 2:
            raise VerifierError("or takes a list of at least two formulas")
        return disj(*(_parse_formula(b) for b in body))
    if op == "implies":
        a, b = pair()
        return implies(a, b)
    if op == "next":
        return PNext(_parse_formula(body))
    if op == "always":
        return always(_parse_formula(body), bound())
    if op == "eventually":
        return eventually(_parse_formula(body), bound())
    if op == "until":
        a, b = pair()
        return until(a, b, bound())
    raise VerifierError(f"unknown operator {op!r}")


def parse_property(doc: dict) -> Property:
    if not isinstance(doc, dict):
        raise VerifierError("property document must be an object")
    unknown = set(doc) - {"mode", "formula"}
    if unknown:
        raise VerifierError(f"unknown property keys: {sorted(unknown)}")
    if "formula" not in doc:
        raise VerifierError("property document needs a formula")
    return Property(_parse_formula(doc["formula"]), doc.get("mode", FORALL))


def formula_to_dict(f: Formula) -> dict:
    t = type(f)
    if t is PTrue:  # no surface literal: encode as a tautology
        return {"atom": "0 = 0"}
    if t is PFalse:
        return {"atom": "0 != 0"}
    if t is PAtom:
        node = {"atom": f.c.render()}
        return {"not": node} if f.neg else node
    if t is PAnd:
        return {"and": [formula_to_dict(f.left), formula_to_dict(f.right)]}
    if t is POr:
        return {"or": [formula_to_dict(f.left), formula_to_dict(f.right)]}
    if t is PNext:
        return {"next": formula_to_dict(f.body)}
    if t is PWNext:
        return {"not": {"next": {"not": formula_to_dict(f.body)}}}
    if t is PAlways:
        return {"always": formula_to_dict(f.body), "k": f.k}
    if t is PEventually:
        return {"eventually": formula_to_dict(f.body), "k": f.k}
    if t is PUntil:
        return {"until": [formula_to_dict(f.left), formula_to_dict(f.right)],
                "k": f.k}
    return {"not": {"until": [formula_to_dict(neg(f.left)),
                              formula_to_dict(neg(f.right))], "k": f.k}}


def property_to_dict(p: Property) -> dict:
    return {"mode": p.mode, "formula": formula_to_dict(p.formula)}


# ---------------------------------------------------------------------------
# environment assumptions

@dataclass(frozen=True)
class EnvSpec:
    free_events: tuple[str, ...] = ()
    scripted: tuple[Event, ...] = ()
    var_ranges: tuple[tuple[str, tuple[int, ...]], ...] = ()

    def check_against(self, cs: CompiledScore) -> None:
        alphabet = set(event_alphabet(cs.score))
        env = cs.env_map()
        for name in self.free_events:
            if name not in alphabet:
                raise VerifierError(f"free event {name} not in the alphabet")
        for e in self.scripted:
            if e.name not in alphabet:
                raise VerifierError(f"scripted event {e.name} not in the alphabet")
        svars = {d.name for d in cs.score.vars}
        for name, values in self.var_ranges:
            if name not in svars:
                raise VerifierError(f"unknown score variable {name}")
            lo, hi = env[name]
            for v in values:
                if not lo <= v <= hi:
                    raise VerifierError(
                        f"value {v} outside the domain of {name}")


def parse_env(doc: dict) -> EnvSpec:
    if not isinstance(doc, dict):
        raise VerifierError("environment document must be an object")
    unknown = set(doc) - {"freeEvents", "scripted", "varRanges"}
    if unknown:
        raise VerifierError(f"unknown environment keys: {sorted(unknown)}")
    free = doc.get("freeEvents", [])
    if not isinstance(free, list) or not all(isinstance(x, str) for x in free):
        raise VerifierError("freeEvents must be a list of event names")
    scripted = []
    for row in doc.get("scripted", []):
        if not isinstance(row, list) or len(row) != 2 \
                or not isinstance(row[0], int) or not isinstance(row[1], str):
            raise VerifierError(f"scripted entries are [tu, token]: {row!r}")
        name, value = parse_event_token(row[1])
        scripted.append(Event(row[0], name, value))
    ranges = doc.get("varRanges", {})
    if not isinstance(ranges, dict):
        raise VerifierError("varRanges must be an object")
    rng = []
    for name, values in sorted(ranges.items()):
        if not isinstance(values, list) or not all(isinstance(v, int) for v in values):
            raise VerifierError(f"varRanges[{name}] must be a list of ints")
        rng.append((name, tuple(values)))
    return EnvSpec(tuple(free), tuple(scripted), tuple(rng))


# ---------------------------------------------------------------------------
# verdicts and evidence

@dataclass(frozen=True)
class EvidenceUnit:
    tu: int
    inputs: tuple[tuple[str, int], ...]
    choices: tuple
    signals: tuple[str, ...]
    messages: tuple[ControlMessage, ...]


@dataclass(frozen=True)
class Verdict:
    result: str  # VERIFIED | REFUTED
    evidence: tuple[EvidenceUnit, ...]
    stats: VerifyStats


def evidence_to_json(evidence) -> list[dict]:
    return [{
        "tu": u.tu,
        "inputs": [[n, v] for n, v in u.inputs],
        "choices": [[k, v] for k, v in u.choices],
        "signals": list(u.signals),
        "messages": [m.to_json() for m in u.messages],
    } for u in evidence]


# ---------------------------------------------------------------------------
# formula progression

def progress(f: Formula, store, last: bool) -> Formula:
    t = type(f)
    if t is PTrue or t is PFalse:
        return f
    if t is PAtom:
        holds = store.entails(f.c) != f.neg
        return TT if holds else FF
    if t is PAnd:
        return conj(progress(f.left, store, last), progress(f.right, store, last))
    if t is POr:
        return disj(progress(f.left, store, last), progress(f.right, store, last))
    if t is PNext:
        return FF if last else f.body
    if t is PWNext:
        return TT if last else f.body
    if t is PAlways:
        now = progress(f.body, store, last)
        if now is FF:
            return FF
        rest: Formula = TT if (f.k == 0 or last) else PAlways(f.body, f.k - 1)
        return conj(now, rest)
    if t is PEventually:
        now = progress(f.body, store, last)
        if now is TT:
            return TT
        rest = FF if (f.k == 0 or last) else PEventually(f.body, f.k - 1)
        return disj(now, rest)
    if t is PUntil:
        rnow = progress(f.right, store, last)
        if rnow is TT:
            return TT
        lnow = progress(f.left, store, last)
        cont = FF if (f.k == 0 or last) else PUntil(f.left, f.right, f.k - 1)
        return disj(rnow, conj(lnow, cont))
    if t is PRelease:
        rnow = progress(f.right, store, last)
        if rnow is FF:
            return FF
        lnow = progress(f.left, store, last)
        cont = TT if (f.k == 0 or last) else PRelease(f.left, f.right, f.k - 1)
        return conj(rnow, disj(lnow, cont))
    raise VerifierError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# exploration

class _Search:
    def __init__(self, cs: CompiledScore, env: EnvSpec, horizon: int,
                 budget: int, memo_on: bool, star_bound: int, mode: str):
        self.cs = cs
        self.env = env
        self.horizon = horizon
        self.budget = budget
        self.memo_on = memo_on
        self.star_bound = star_bound
        self.mode = mode
        self.envmap = cs.env_map()
        self.names = [d.name for d in cs.env]
        self.scripted: dict[int, list[tuple[str, int]]] = {}
        for e in env.scripted:
            self.scripted.setdefault(e.tu, []).append((e.name, e.value))
        self.states = 0
        self.branches = 0
        self.memo_hits = 0
        self.memo: dict = {}

    def stats(self, t0: float) -> VerifyStats:
        return VerifyStats(self.states, self.branches,
                           time.perf_counter() - t0, self.memo_hits)

    def input_choices(self, t: int) -> list[tuple[tuple[str, int], ...]]:
        """Every environment input combination for unit t, in canonical
        order: absent before present, smaller values first."""
        base = tuple(self.scripted.get(t, ()))
        dims = []
        for name in self.env.free_events:
            dims.append(((), ((name, 1),)))
        for name, values in self.env.var_ranges:
            dims.append(((),) + tuple(((name, v),) for v in values))
        out = []
        for combo in itertools.product(*dims):
            extra = tuple(x for d in combo for x in d)
            out.append(base + extra)
        return out

    def fork_step(self, residual: Process, inputs) -> list:
        """All outcomes of one unit: every internal scheduling choice is
        enumerated by replaying prefixes and splitting on the next choice."""
        input_c = input_conjunction(inputs)
        results = []

        def go(prefix: tuple):
            policy = Scripted(prefix, star_bound=self.star_bound, strict=True)
            try:
                r = step(residual, self.cs.defs, input_c, self.envmap, policy)
            except ScriptExhausted as ex:
                for o in ex.options:
                    go(prefix + ((ex.kind, o),))
                return
            self.states += 1
            if self.states > self.budget:
                raise _Exhausted()
            results.append(r)

        go(())
        self.branches += 1
        return results

    def explore(self, residual: Process, t: int, f: Formula) -> Optional[list]:
        """Depth-first hunt below (residual, t, f). In for-all mode the
        quarry is a violation, in exists mode a witness; returns the
        evidence suffix or None. Inputs and choices are tried in canonical
        order, so the first find is the lexicographically least."""
        key = None
        if self.memo_on:
            key = (render(residual), t, f)
            if key in self.memo:
                self.memo_hits += 1
                return self.memo[key]
        found = None
        last = t == self.horizon - 1
        hunting_ff = self.mode == FORALL
        for inputs in self.input_choices(t):
            for r in self.fork_step(residual, inputs):
                g = progress(f, r.output, last)
                if g is TT or g is FF:
                    if (g is FF) == hunting_ff:
                        found = [self._unit(t, inputs, r)]
                        break
                    continue
                sub = self.explore(r.residual, t + 1, g)
                if sub is not None:
                    found = [self._unit(t, inputs, r)] + sub
                    break
            if found is not None:
                break
        if self.memo_on:
            self.memo[key] = found
        return found

    def _unit(self, t: int, inputs, r) -> EvidenceUnit:
        messages, _ = extract_messages(r.output, self.cs.msgmap)
        return EvidenceUnit(t, tuple(inputs), tuple(r.fired),
                            entailed_signals(r.output, self.names), messages)


class _Exhausted(Exception):
    pass


def check(cs: CompiledScore, prop: Property, env: Optional[EnvSpec] = None,
          horizon: Optional[int] = None, budget: int = 10 ** 6,
          memo: bool = True, star_bound: int = 0) -> Verdict:
    env = env or EnvSpec()
    env.check_against(cs)
    h = cs.score.horizon if horizon is None else horizon
    if not 1 <= h <= cs.score.horizon:
        raise VerifierError(
            f"check horizon must lie in [1, {cs.score.horizon}]")
    if _max_bound(prop.formula) > h:
        raise VerifierError("formula bound exceeds the check horizon")
    search = _Search(cs, env, h, budget, memo, star_bound, prop.mode)
    t0 = time.perf_counter()
    # constant formulas never touch the trace
    if isinstance(prop.formula, PTrue):
        found = None if prop.mode == FORALL else []
    elif isinstance(prop.formula, PFalse):
        found = [] if prop.mode == FORALL else None
    else:
        try:
            found = search.explore(cs.entry, 0, prop.formula)
        except _Exhausted:
            raise BudgetExhausted(search.stats(t0)) from None
    stats = search.stats(t0)
    if prop.mode == FORALL:
        if found is None:
            return Verdict("VERIFIED", (), stats)
        return Verdict("REFUTED", tuple(found), stats)
    if found is None:
        return Verdict("REFUTED", (), stats)
    return Verdict("VERIFIED", tuple(found), stats)


def reachable(cs: CompiledScore, target: "Constraint | str",
              env: Optional[EnvSpec] = None, horizon: Optional[int] = None,
              budget: int = 10 ** 6) -> Verdict:
    h = cs.score.horizon if horizon is None else horizon
    return check(cs, Property(eventually(atom(target), h), EXISTS),
                 env, h, budget)


# ---------------------------------------------------------------------------
# evidence replay

def replay(evidence: Iterable[EvidenceUnit], cs: CompiledScore) -> bool:
    """Re-execute recorded inputs and choices; True iff the signal and
    message sequences come out identical. Tampered evidence fails."""
    residual = cs.entry
    envmap = cs.env_map()
    names = [d.name for d in cs.env]
    for u in evidence:
        policy = Scripted(u.choices, strict=True)
        try:
            r = step(residual, cs.defs, input_conjunction(u.inputs),
                     envmap, policy)
        except Exception:
            return False
        if not policy.spent():  # leftover choices were never consumed
            return False
        if entailed_signals(r.output, names) != tuple(u.signals):
            return False
        messages, _ = extract_messages(r.output, cs.msgmap)
        if messages != tuple(u.messages):
            return False
        residual = r.residual
    return True
