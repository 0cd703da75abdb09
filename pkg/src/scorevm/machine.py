"""Discrete-time interpreter for ntcc processes.

One observable step per time unit: build a fresh store from the ambient
declarations, tell the unit's input, apply internal reductions until
quiescence, then derive the next unit's process with the future function.
Nondeterministic choices (Sum branches, Star delays) go through a
ChoicePolicy; the record of choices made is enough to replay a step.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .process import (
    Bang,
    Call,
    DefTable,
    Local,
    Next,
    Par,
    Process,
    ProcessError,
    SKIP,
    Skip,
    Star,
    Sum,
    Tell,
    Unless,
    free_vars,
    par,
    render,
    rename,
)
from .store import Constraint, Store, Top, VarDecl

DEFAULT_BUDGET = 10**6

Fired = tuple  # ('sum', branch_index) | ('star', delay)


class DivergentTimeUnit(ProcessError):
    def __init__(self) -> None:
        super().__init__("divergent time unit: reduction budget exceeded")


class NotQuiescent(ProcessError):
    pass


class ScriptExhausted(Exception):
    """Raised by a scripted policy when the step needs a choice the script
    does not cover; carries the available options so a driver can fork."""

    def __init__(self, kind: str, options: Sequence[int]):
        super().__init__(f"script exhausted at {kind} choice")
        self.kind = kind
        self.options = list(options)


class ReplayMismatch(Exception):
    pass


# ---------------------------------------------------------------------------
# choice policies

class ChoicePolicy:
    star_bound: int = 0

    def choose_branch(self, entailed: Sequence[int]) -> int:
        raise NotImplementedError

    def choose_star(self) -> int:
        raise NotImplementedError


class Deterministic(ChoicePolicy):
    """Lowest entailed branch, zero star delay. A pure function of inputs."""

    def __init__(self, star_bound: int = 0):
        self.star_bound = star_bound

    def choose_branch(self, entailed: Sequence[int]) -> int:
        return entailed[0]

    def choose_star(self) -> int:
        return 0


class SeededRandom(ChoicePolicy):
    def __init__(self, seed: int, star_bound: int = 0):
        self.star_bound = star_bound
        self._rng = random.Random(seed)

    def choose_branch(self, entailed: Sequence[int]) -> int:
        return self._rng.choice(list(entailed))

    def choose_star(self) -> int:
        return self._rng.randint(0, self.star_bound)


class Scripted(ChoicePolicy):
    """Replays a recorded choice list; raises ScriptExhausted past its end.

    With strict=False the policy falls back to deterministic choices once
    the script runs out (used to complete replays of recorded prefixes).
    """

    def __init__(self, script: Iterable[Fired], star_bound: int = 0,
                 strict: bool = True):
        self.star_bound = star_bound
        self._script = deque(script)
        self.strict = strict

    def choose_branch(self, entailed: Sequence[int]) -> int:
        if not self._script:
            if self.strict:
                raise ScriptExhausted("sum", entailed)
            return entailed[0]
        kind, value = self._script.popleft()
        if kind != "sum" or value not in entailed:
            raise ReplayMismatch(
                f"recorded ({kind}, {value}) does not match an entailed branch "
                f"of {list(entailed)}")
        return value

    def choose_star(self) -> int:
        if not self._script:
            if self.strict:
                raise ScriptExhausted("star", range(self.star_bound + 1))
            return 0
        kind, value = self._script.popleft()
        if kind != "star" or not (0 <= value <= self.star_bound):
            raise ReplayMismatch(f"recorded ({kind}, {value}) is not a valid delay")
        return value

    def spent(self) -> bool:
        """Whether the script has been consumed completely."""
        return not self._script


# ---------------------------------------------------------------------------
# reduction

@dataclass
class StepResult:
    output: Store
    residual: Process
    fired: tuple[Fired, ...]

    def canonical(self) -> str:
        return self.output.dump() + "\n---\n" + render(self.residual) + \
            "\n---\n" + repr(list(self.fired))


_NEXT, _UNLESS, _SUM = 0, 1, 2


def reduce_to_quiescence(p: Process, defs: DefTable, store: Store,
                         policy: ChoicePolicy,
                         budget: int = DEFAULT_BUDGET) -> tuple[Process, Store, tuple[Fired, ...]]:
    """Run internal rules to fixpoint; returns (quiescent process, store,
    fired records). The quiescent process is rebuilt from the surviving
    obligations: parked Next bodies, unfired Unless, blocked Sums."""
    active: deque[Process] = deque([p])
    parked: list[tuple] = []  # (_NEXT, body) | (_UNLESS, g, b) | (_SUM, term)
    dead: set[int] = set()  # indices into parked that fired/dissolved
    fired: list[Fired] = []
    intro: list[VarDecl] = []  # locals introduced this unit, in order
    # store state is append-only within the unit, so a guard re-checked at
    # the same told-length must decide the same way; skip those re-checks
    seen_at: dict[int, int] = {}

    def fresh_name(base: str) -> str:
        if base not in store.decls:
            return base
        i = 1
        while f"{base}#{i}" in store.decls:
            i += 1
        return f"{base}#{i}"

    while True:
        while active:
            budget -= 1
            if budget < 0:
                raise DivergentTimeUnit()
            q = active.popleft()
            t = type(q)
            if t is Skip:
                continue
            if t is Tell:
                store.tell(q.constraint)
            elif t is Par:
                active.appendleft(q.right)
                active.appendleft(q.left)
            elif t is Local:
                name = fresh_name(q.decl.name)
                d = VarDecl(name, q.decl.lo, q.decl.hi)
                store.declare(d)
                intro.append(d)
                body = q.body if name == q.decl.name else rename(q.body, q.decl.name, name)
                active.appendleft(body)
            elif t is Next:
                parked.append((_NEXT, q.body))
            elif t is Unless:
                parked.append((_UNLESS, q.guard, q.body))
            elif t is Sum:
                parked.append((_SUM, q))
            elif t is Bang:
                parked.append((_NEXT, q))
                active.appendleft(q.body)
            elif t is Star:
                n = policy.choose_star()
                fired.append(("star", n))
                if n == 0:
                    active.appendleft(q.body)
                else:
                    parked.append((_NEXT, _nest(q.body, n - 1)))
            elif t is Call:
                active.appendleft(defs.unfold(q.name, q.args))
            else:
                raise ProcessError(f"unknown process node: {q!r}")
        # saturation point: newly entailed guards may wake parked terms
        progressed = False
        told_n = len(store.told)
        for i, entry in enumerate(parked):
            if i in dead or entry[0] is not _UNLESS:
                continue
            if seen_at.get(~i) == told_n:
                continue
            if store.entails(entry[1]):
                dead.add(i)  # fires to skip now; body never runs
            else:
                seen_at[~i] = told_n
        chosen = None
        for i, entry in enumerate(parked):
            if i in dead or entry[0] is not _SUM:
                continue
            if seen_at.get(i) == told_n:
                continue
            budget -= 1
            if budget < 0:
                raise DivergentTimeUnit()
            term: Sum = entry[1]
            entailed = [bi for bi, (g, _) in enumerate(term.branches)
                        if store.entails(g)]
            if entailed:
                chosen = (i, term, entailed)
                break
            seen_at[i] = told_n
        if chosen is not None:
            i, term, entailed = chosen
            bi = policy.choose_branch(entailed)
            fired.append(("sum", bi))
            dead.add(i)
            active.append(term.branches[bi][1])
            progressed = True
        if not progressed:
            break

    quiescent = _rebuild(parked, dead, intro)
    return quiescent, store, tuple(fired)


def _nest(p: Process, n: int) -> Process:
    for _ in range(n):
        p = Next(p)
    return p


def _rebuild(parked: list[tuple], dead: set[int], intro: list[VarDecl]) -> Process:
    parts: list[Process] = []
    for i, entry in enumerate(parked):
        if i in dead:
            continue
        if entry[0] is _NEXT:
            parts.append(Next(entry[1]))
        elif entry[0] is _UNLESS:
            parts.append(Unless(entry[1], entry[2]))
        else:
            parts.append(entry[1])
    body = par(*parts)
    # re-bind locals still referenced by surviving obligations, innermost last
    for d in reversed(intro):
        if d.name in free_vars(body):
            body = Local(d, body)
    return body


def future(p: Process) -> Process:
    """The function F carrying obligations across the unit boundary.

    Only quiescent shapes are accepted: compositions of skip, next,
    un-entailed unless, blocked sums, local and par. Par spines are walked
    with an explicit stack; residuals grow wide, not deep, so recursion
    only remains for local bindings.
    """
    parts: list[Process] = []
    stack: list[Process] = [p]
    while stack:
        q = stack.pop()
        t = type(q)
        if t is Par:
            stack.append(q.right)
            stack.append(q.left)
        elif t is Skip or t is Sum:  # unserved choices are discarded
            continue
        elif t is Next:
            parts.append(q.body)
        elif t is Unless:
            parts.append(q.body)
        elif t is Local:
            body = future(q.body)
            if isinstance(body, Skip):
                continue
            if q.decl.name not in free_vars(body):
                parts.append(body)
            else:
                parts.append(Local(q.decl, body))
        else:
            raise NotQuiescent(f"not quiescent: {render(q)}")
    return par(*parts)


def make_env(decls: Iterable[VarDecl]) -> dict[str, tuple[int, int]]:
    """Prebuilt declaration map for fast per-unit store construction."""
    out: dict[str, tuple[int, int]] = {}
    for d in decls:
        if d.name in out:
            raise ProcessError(f"duplicate variable: {d.name}")
        out[d.name] = (d.lo, d.hi)
    return out


def fresh_store(env) -> Store:
    s = Store()
    if isinstance(env, dict):
        s.decls.update(env)
    else:
        for d in env:
            s.declare(d)
    return s


def step(p: Process, defs: DefTable, input_c: Constraint, env,
         policy: Optional[ChoicePolicy] = None,
         budget: int = DEFAULT_BUDGET) -> StepResult:
    """One observable time unit: fresh store + input, reduce, take future."""
    policy = policy or Deterministic()
    store = fresh_store(env)
    if not isinstance(input_c, Top):
        store.tell(input_c)
    quiescent, store, fired = reduce_to_quiescence(p, defs, store, policy, budget)
    return StepResult(store, future(quiescent), fired)


def run(p: Process, defs: DefTable, inputs: Sequence[Constraint], env,
        policy: Optional[ChoicePolicy] = None,
        budget: int = DEFAULT_BUDGET) -> list[StepResult]:
    policy = policy or Deterministic()
    out: list[StepResult] = []
    cur = p
    for c in inputs:
        r = step(cur, defs, c, env, policy, budget)
        out.append(r)
        cur = r.residual
    return out
