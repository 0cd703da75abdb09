"""ntcc process terms, definition tables, and the canonical text syntax.

Process values are immutable and hashable so unfolded bodies can be shared
and memoized. Parametric definitions refer to their integer parameters
inside constraints through reserved ``$name`` terms, which substitution
resolves into plain constants before any store ever sees them.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .store import Atom, And, Or, Top, Bottom, Constraint, LinExpr, VarDecl, vars_of


class ProcessError(Exception):
    pass


class Process:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Process):
    pass


SKIP = Skip()


@dataclass(frozen=True)
class Tell(Process):
    constraint: Constraint


@dataclass(frozen=True)
class Sum(Process):
    """Guarded choice: when g1 do P1 + when g2 do P2 + ..."""

    branches: tuple[tuple[Constraint, Process], ...]

    def __post_init__(self) -> None:
        if not self.branches:
            raise ProcessError("Sum needs at least one branch")


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Local(Process):
    decl: VarDecl
    body: Process


@dataclass(frozen=True)
class Next(Process):
    body: Process


@dataclass(frozen=True)
class Unless(Process):
    """Run body next time unit unless guard is entailed in this one."""

    guard: Constraint
    body: Process


@dataclass(frozen=True)
class Star(Process):
    """Body runs at some policy-chosen future unit (asynchrony)."""

    body: Process


@dataclass(frozen=True)
class Bang(Process):
    """Body runs at every unit from now on (replication)."""

    body: Process


Arg = Union[int, LinExpr]


@dataclass(frozen=True)
class Call(Process):
    name: str
    args: tuple[Arg, ...] = ()


def when(guard: Constraint, body: Process) -> Sum:
    return Sum(((guard, body),))


def par(*ps: Process) -> Process:
    """Right-folded parallel composition; drops skips."""
    live = [p for p in ps if not isinstance(p, Skip)]
    if not live:
        return SKIP
    out = live[-1]
    for p in reversed(live[:-1]):
        out = Par(p, out)
    return out


def nexts(p: Process, n: int) -> Process:
    for _ in range(n):
        p = Next(p)
    return p


def param(name: str) -> LinExpr:
    """Reference to an integer definition parameter, usable in constraints
    and call arguments inside definition bodies."""
    return LinExpr(((1, "$" + name),), 0)


# ---------------------------------------------------------------------------
# parameter substitution

def _subst_expr(e: LinExpr, env: Mapping[str, int]) -> LinExpr:
    if not any(v.startswith("$") for _, v in e.terms):
        return e
    const = e.const
    keep = []
    for coef, v in e.terms:
        if v.startswith("$"):
            name = v[1:]
            if name not in env:
                raise ProcessError(f"unbound parameter: {name}")
            const += coef * env[name]
        else:
            keep.append((coef, v))
    return LinExpr(tuple(keep), const)


def subst_constraint(c: Constraint, env: Mapping[str, int]) -> Constraint:
    if isinstance(c, Atom):
        e = _subst_expr(c.expr, env)
        return c if e is c.expr else Atom(e, c.op)
    if isinstance(c, And):
        return And(subst_constraint(c.left, env), subst_constraint(c.right, env))
    if isinstance(c, Or):
        return Or(subst_constraint(c.left, env), subst_constraint(c.right, env))
    return c


def _eval_arg(a: Arg, env: Mapping[str, int]) -> int:
    if isinstance(a, int):
        return a
    e = _subst_expr(a, env)
    if e.terms:
        raise ProcessError(f"call argument not closed: {e.render()}")
    return e.const


def subst(p: Process, env: Mapping[str, int]) -> Process:
    if isinstance(p, (Skip,)):
        return p
    if isinstance(p, Tell):
        return Tell(subst_constraint(p.constraint, env))
    if isinstance(p, Sum):
        return Sum(tuple((subst_constraint(g, env), subst(b, env))
                         for g, b in p.branches))
    if isinstance(p, Par):
        return Par(subst(p.left, env), subst(p.right, env))
    if isinstance(p, Local):
        return Local(p.decl, subst(p.body, env))
    if isinstance(p, Next):
        return Next(subst(p.body, env))
    if isinstance(p, Unless):
        return Unless(subst_constraint(p.guard, env), subst(p.body, env))
    if isinstance(p, Star):
        return Star(subst(p.body, env))
    if isinstance(p, Bang):
        return Bang(subst(p.body, env))
    if isinstance(p, Call):
        return Call(p.name, tuple(_eval_arg(a, env) for a in p.args))
    raise ProcessError(f"unknown process node: {p!r}")


# ---------------------------------------------------------------------------
# variable occurrence and renaming (for Local)

@functools.lru_cache(maxsize=None)
def free_vars(p: Process) -> frozenset[str]:
    """Store variables occurring free in p (parameters excluded).

    Par spines can be very wide (one obligation per live object), so they
    are walked with an explicit stack; only local scopes recurse."""
    out: set[str] = set()
    stack: list[Process] = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, (Skip, Call)):
            continue  # call sites carry only integer arguments
        if isinstance(q, Tell):
            out |= _cvars(q.constraint)
        elif isinstance(q, Sum):
            for g, b in q.branches:
                out |= _cvars(g)
                stack.append(b)
        elif isinstance(q, Par):
            stack.append(q.right)
            stack.append(q.left)
        elif isinstance(q, Local):
            out |= free_vars(q.body) - {q.decl.name}
        elif isinstance(q, (Next, Star, Bang)):
            stack.append(q.body)
        elif isinstance(q, Unless):
            out |= _cvars(q.guard)
            stack.append(q.body)
        else:
            raise ProcessError(f"unknown process node: {q!r}")
    return frozenset(out)


def _cvars(c: Constraint) -> frozenset[str]:
    return frozenset(v for v in vars_of(c) if not v.startswith("$"))


def _rename_expr(e: LinExpr, old: str, new: str) -> LinExpr:
    if all(v != old for _, v in e.terms):
        return e
    coeffs: dict[str, int] = {}
    for coef, v in e.terms:
        name = new if v == old else v
        coeffs[name] = coeffs.get(name, 0) + coef
    return LinExpr.of(coeffs, e.const)


def rename_constraint(c: Constraint, old: str, new: str) -> Constraint:
    if isinstance(c, Atom):
        e = _rename_expr(c.expr, old, new)
        return c if e is c.expr else Atom(e, c.op)
    if isinstance(c, And):
        return And(rename_constraint(c.left, old, new), rename_constraint(c.right, old, new))
    if isinstance(c, Or):
        return Or(rename_constraint(c.left, old, new), rename_constraint(c.right, old, new))
    return c


def rename(p: Process, old: str, new: str) -> Process:
    """Capture-aware renaming of a free store variable."""
    if isinstance(p, Skip) or old == new:
        return p
    if isinstance(p, Tell):
        return Tell(rename_constraint(p.constraint, old, new))
    if isinstance(p, Sum):
        return Sum(tuple((rename_constraint(g, old, new), rename(b, old, new))
                         for g, b in p.branches))
    if isinstance(p, Par):
        return Par(rename(p.left, old, new), rename(p.right, old, new))
    if isinstance(p, Local):
        if p.decl.name == old:
            return p  # shadowed
        return Local(p.decl, rename(p.body, old, new))
    if isinstance(p, Next):
        return Next(rename(p.body, old, new))
    if isinstance(p, Unless):
        return Unless(rename_constraint(p.guard, old, new), rename(p.body, old, new))
    if isinstance(p, Star):
        return Star(rename(p.body, old, new))
    if isinstance(p, Bang):
        return Bang(rename(p.body, old, new))
    if isinstance(p, Call):
        return p
    raise ProcessError(f"unknown process node: {p!r}")


# ---------------------------------------------------------------------------
# canonical text syntax

def render(p: Process) -> str:
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Tell):
        return f"tell({p.constraint.render()})"
    if isinstance(p, Sum):
        return " + ".join(f"when {g.render()} do {_atom(b)}" for g, b in p.branches)
    if isinstance(p, Par):
        # flatten the right spine first; recursing per node would overflow
        # on wide compositions
        segs = [_atom(p.left)]
        q = p.right
        while isinstance(q, Par):
            segs.append(_atom(q.left))
            q = q.right
        segs.append(_atom(q))
        out = segs[-1]
        for s in reversed(segs[1:-1]):
            out = f"({s} || {out})"
        return f"{segs[0]} || {out}"
    if isinstance(p, Local):
        d = p.decl
        return f"local {d.name}:[{d.lo},{d.hi}] in {_atom(p.body)}"
    if isinstance(p, Next):
        return f"next {_atom(p.body)}"
    if isinstance(p, Unless):
        return f"unless {p.guard.render()} next {_atom(p.body)}"
    if isinstance(p, Star):
        return f"*{_atom(p.body)}"
    if isinstance(p, Bang):
        return f"!{_atom(p.body)}"
    if isinstance(p, Call):
        args = ", ".join(str(a) if isinstance(a, int) else a.render() for a in p.args)
        return f"{p.name}({args})"
    raise ProcessError(f"unknown process node: {p!r}")


def _atom(p: Process) -> str:
    if isinstance(p, (Skip, Tell, Call)):
        return render(p)
    return f"({render(p)})"


# ---------------------------------------------------------------------------
# definition table

@dataclass(frozen=True)
class Def:
    params: tuple[str, ...]
    body: Process


class DefTable:
    """Named parametric process definitions, statically checked."""

    def __init__(self, defs: Mapping[str, Def] | None = None):
        self.defs: dict[str, Def] = dict(defs) if defs else {}
        self._memo: dict[tuple[str, tuple[int, ...]], Process] = {}
        self._checked = False

    def define(self, name: str, params: Iterable[str], body: Process) -> None:
        if name in self.defs:
            raise ProcessError(f"duplicate definition: {name}")
        self.defs[name] = Def(tuple(params), body)
        self._checked = False

    def unfold(self, name: str, args: tuple[int, ...]) -> Process:
        key = (name, args)
        got = self._memo.get(key)
        if got is not None:
            return got
        d = self.defs.get(name)
        if d is None:
            raise ProcessError(f"undefined process: {name}")
        if len(args) != len(d.params):
            raise ProcessError(
                f"{name} expects {len(d.params)} argument(s), got {len(args)}")
        body = subst(d.body, dict(zip(d.params, args))) if d.params else d.body
        self._memo[key] = body
        return body

    # static checks ---------------------------------------------------------

    def check(self, *roots: Process) -> None:
        """Arity/undefined-call/parameter checks plus the next-guarded
        recursion check: no cycle of calls may complete without crossing a
        time-unit boundary (Next, Unless or Star body)."""
        for name, d in self.defs.items():
            self._check_body(name, d)
        for root in roots:
            self._check_calls(root)
        # unguarded-call graph: edge a -> b when a's body can invoke b
        # within the same time unit
        edges: dict[str, set[str]] = {name: set() for name in self.defs}
        for name, d in self.defs.items():
            self._unguarded_calls(d.body, edges[name])
        state: dict[str, int] = {}  # 0 visiting, 1 done

        def visit(n: str, trail: list[str]) -> None:
            got = state.get(n)
            if got == 1:
                return
            if got == 0:
                cycle = trail[trail.index(n):] + [n]
                raise ProcessError(
                    "non-next-guarded recursion: " + " -> ".join(cycle))
            state[n] = 0
            trail.append(n)
            for m in sorted(edges.get(n, ())):
                visit(m, trail)
            trail.pop()
            state[n] = 1

        for name in sorted(self.defs):
            visit(name, [])
        self._checked = True

    def _check_body(self, name: str, d: Def) -> None:
        pset = set(d.params)

        def walk(p: Process) -> None:
            if isinstance(p, Tell):
                self._check_params(p.constraint, pset, name)
            elif isinstance(p, Sum):
                for g, b in p.branches:
                    self._check_params(g, pset, name)
                    walk(b)
            elif isinstance(p, Par):
                walk(p.left)
                walk(p.right)
            elif isinstance(p, (Local, Next, Star, Bang)):
                walk(p.body)
            elif isinstance(p, Unless):
                self._check_params(p.guard, pset, name)
                walk(p.body)
            elif isinstance(p, Call):
                self._check_call_site(p, pset)

        walk(d.body)

    def _check_params(self, c: Constraint, params: set[str], where: str) -> None:
        for v in vars_of(c):
            if v.startswith("$") and v[1:] not in params:
                raise ProcessError(f"unbound parameter {v[1:]} in {where}")

    def _check_call_site(self, p: Call, params: set[str]) -> None:
        d = self.defs.get(p.name)
        if d is None:
            raise ProcessError(f"undefined process: {p.name}")
        if len(p.args) != len(d.params):
            raise ProcessError(
                f"{p.name} expects {len(d.params)} argument(s), got {len(p.args)}")
        for a in p.args:
            if isinstance(a, LinExpr):
                for _, v in a.terms:
                    if not v.startswith("$") or v[1:] not in params:
                        raise ProcessError(
                            f"call argument to {p.name} uses non-parameter {v}")

    def _check_calls(self, p: Process) -> None:
        stack = [p]
        while stack:
            q = stack.pop()
            if isinstance(q, Call):
                self._check_call_site(q, set())
            elif isinstance(q, Sum):
                stack.extend(b for _, b in reversed(q.branches))
            elif isinstance(q, Par):
                stack.append(q.right)
                stack.append(q.left)
            elif isinstance(q, (Local, Next, Unless, Star, Bang)):
                stack.append(q.body)

    def _unguarded_calls(self, p: Process, out: set[str]) -> None:
        # collect call targets reachable without crossing a unit boundary
        if isinstance(p, Call):
            out.add(p.name)
        elif isinstance(p, Sum):
            for _, b in p.branches:
                self._unguarded_calls(b, out)
        elif isinstance(p, Par):
            self._unguarded_calls(p.left, out)
            self._unguarded_calls(p.right, out)
        elif isinstance(p, (Local, Bang)):
            self._unguarded_calls(p.body, out)
        # Next, Unless, Star bodies run in a later unit: stop

    def dump(self) -> str:
        lines = []
        for name in sorted(self.defs):
            d = self.defs[name]
            head = name + "(" + ", ".join(d.params) + ")"
            lines.append(f"{head} = {render(d.body)}")
        return "\n".join(lines)
