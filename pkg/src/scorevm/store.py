"""Finite-domain integer constraint store.

Agents interact with a store by telling constraints and asking entailment.
Variables have inclusive integer bounds; constraints are And/Or trees over
linear atoms, closed under negation. Satisfiability is decided exactly by
bounds propagation plus backtracking search; entailment of c is decided as
unsatisfiability of the store extended with the negation of c.

A Store is mutable: ``tell`` narrows it in place and stores only ever grow
within a time unit. Callers that need the old value clone first.
"""

from __future__ import annotations

import functools
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

EQ = "="
NE = "!="
LT = "<"
LE = "<="

_OPS = (EQ, NE, LT, LE)

ENUMERATION_CAP = 10**6


class StoreError(Exception):
    pass


class UnknownVariable(StoreError):
    def __init__(self, name: str):
        super().__init__(f"unknown variable: {name}")
        self.name = name


class EnumerationTooLarge(StoreError):
    def __init__(self, size: int):
        super().__init__(f"enumeration too large: {size} > {ENUMERATION_CAP}")


@dataclass(frozen=True)
class VarDecl:
    """An integer variable with inclusive finite bounds."""

    name: str
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise StoreError(f"empty domain for {self.name}: [{self.lo},{self.hi}]")


@dataclass(frozen=True)
class LinExpr:
    """Linear integer expression: sum of coef*var terms plus a constant.

    Canonical: terms sorted by variable name, no zero coefficients, each
    variable at most once.
    """

    terms: tuple[tuple[int, str], ...] = ()
    const: int = 0

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.terms, self.const))
            object.__setattr__(self, "_h", h)
        return h

    @staticmethod
    def of(coeffs: dict[str, int], const: int = 0) -> "LinExpr":
        terms = tuple(sorted(((c, v) for v, c in coeffs.items() if c != 0), key=lambda t: t[1]))
        return LinExpr(terms, const)

    def _coeffs(self) -> dict[str, int]:
        return {v: c for c, v in self.terms}

    def plus(self, other: "LinExpr | int") -> "LinExpr":
        if isinstance(other, int):
            return LinExpr(self.terms, self.const + other)
        coeffs = self._coeffs()
        for c, v in other.terms:
            coeffs[v] = coeffs.get(v, 0) + c
        return LinExpr.of(coeffs, self.const + other.const)

    def minus(self, other: "LinExpr | int") -> "LinExpr":
        if isinstance(other, int):
            return self.plus(-other)
        return self.plus(other.times(-1))

    def times(self, k: int) -> "LinExpr":
        if k == 0:
            return LinExpr((), 0)
        return LinExpr(tuple((c * k, v) for c, v in self.terms), self.const * k)

    # comparisons against an int or another expression, yielding atoms
    def eq(self, rhs: "LinExpr | int") -> "Constraint":
        return Atom(self.minus(rhs), EQ)

    def ne(self, rhs: "LinExpr | int") -> "Constraint":
        return Atom(self.minus(rhs), NE)

    def lt(self, rhs: "LinExpr | int") -> "Constraint":
        return Atom(self.minus(rhs), LT)

    def le(self, rhs: "LinExpr | int") -> "Constraint":
        return Atom(self.minus(rhs), LE)

    def gt(self, rhs: "LinExpr | int") -> "Constraint":
        # e > r  <=>  r - e < 0
        return Atom(self.minus(rhs).times(-1), LT)

    def ge(self, rhs: "LinExpr | int") -> "Constraint":
        return Atom(self.minus(rhs).times(-1), LE)

    def render(self) -> str:
        parts = [f"{c}*{v}" for c, v in self.terms]
        if self.const != 0 or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


def var(name: str) -> LinExpr:
    return LinExpr(((1, name),), 0)


class Constraint:
    """Base class; concrete nodes are Atom, And, Or, Top, Bottom."""

    __slots__ = ()

    def render(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Atom(Constraint):
    expr: LinExpr
    op: str  # one of =, !=, <, <= — always compared against 0

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((self.expr, self.op))
            object.__setattr__(self, "_h", h)
        return h

    def render(self) -> str:
        return f"{self.expr.render()} {self.op} 0"


@dataclass(frozen=True)
class And(Constraint):
    left: Constraint
    right: Constraint

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((And, self.left, self.right))
            object.__setattr__(self, "_h", h)
        return h

    def render(self) -> str:
        return f"({self.left.render()}) & ({self.right.render()})"


@dataclass(frozen=True)
class Or(Constraint):
    left: Constraint
    right: Constraint

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((Or, self.left, self.right))
            object.__setattr__(self, "_h", h)
        return h

    def render(self) -> str:
        return f"({self.left.render()}) | ({self.right.render()})"


@dataclass(frozen=True)
class Top(Constraint):
    def render(self) -> str:
        return "true"


@dataclass(frozen=True)
class Bottom(Constraint):
    def render(self) -> str:
        return "false"


TRUE = Top()
FALSE = Bottom()


def negate(c: Constraint) -> Constraint:
    if isinstance(c, Atom):
        if c.op == EQ:
            return Atom(c.expr, NE)
        if c.op == NE:
            return Atom(c.expr, EQ)
        if c.op == LT:  # not(e < 0)  <=>  e >= 0  <=>  -e <= 0
            return Atom(c.expr.times(-1), LE)
        return Atom(c.expr.times(-1), LT)  # not(e <= 0) <=> e > 0 <=> -e < 0
    if isinstance(c, And):
        return Or(negate(c.left), negate(c.right))
    if isinstance(c, Or):
        return And(negate(c.left), negate(c.right))
    if isinstance(c, Top):
        return FALSE
    return TRUE


@functools.lru_cache(maxsize=None)
def vars_of(c: Constraint) -> frozenset[str]:
    if isinstance(c, Atom):
        return frozenset(v for _, v in c.expr.terms)
    if isinstance(c, (And, Or)):
        return vars_of(c.left) | vars_of(c.right)
    return frozenset()


def eval_constraint(c: Constraint, asg: dict[str, int]) -> bool:
    """Evaluate under a total assignment."""
    if isinstance(c, Atom):
        val = c.expr.const
        for coef, v in c.expr.terms:
            val += coef * asg[v]
        if c.op == EQ:
            return val == 0
        if c.op == NE:
            return val != 0
        if c.op == LT:
            return val < 0
        return val <= 0
    if isinstance(c, And):
        return eval_constraint(c.left, asg) and eval_constraint(c.right, asg)
    if isinstance(c, Or):
        return eval_constraint(c.left, asg) or eval_constraint(c.right, asg)
    return isinstance(c, Top)


def _expr_range(e: LinExpr, get) -> tuple[int, int]:
    lo = hi = e.const
    for coef, v in e.terms:
        vlo, vhi = get(v)
        if coef >= 0:
            lo += coef * vlo
            hi += coef * vhi
        else:
            lo += coef * vhi
            hi += coef * vlo
    return lo, hi


def _eval_bounds(c: Constraint, get) -> Optional[bool]:
    """Tri-state evaluation under interval bounds: True/False if decided."""
    if isinstance(c, Atom):
        lo, hi = _expr_range(c.expr, get)
        if c.op == EQ:
            if lo == 0 and hi == 0:
                return True
            if lo > 0 or hi < 0:
                return False
            return None
        if c.op == NE:
            if lo > 0 or hi < 0:
                return True
            if lo == 0 and hi == 0:
                return False
            return None
        if c.op == LT:
            if hi < 0:
                return True
            if lo >= 0:
                return False
            return None
        if hi <= 0:
            return True
        if lo > 0:
            return False
        return None
    if isinstance(c, And):
        a = _eval_bounds(c.left, get)
        if a is False:
            return False
        b = _eval_bounds(c.right, get)
        if b is False:
            return False
        if a is True and b is True:
            return True
        return None
    if isinstance(c, Or):
        a = _eval_bounds(c.left, get)
        if a is True:
            return True
        b = _eval_bounds(c.right, get)
        if b is True:
            return True
        if a is False and b is False:
            return False
        return None
    return isinstance(c, Top)


class _Inconsistent(Exception):
    pass


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _Bounds:
    """Interval map with a fallback layer, tracking changed variables."""

    __slots__ = ("base", "over", "changed")

    def __init__(self, base, over=None):
        self.base = base  # callable name -> (lo, hi)
        self.over: dict[str, tuple[int, int]] = dict(over) if over else {}
        self.changed: set[str] = set()

    def get(self, v: str) -> tuple[int, int]:
        got = self.over.get(v)
        return got if got is not None else self.base(v)

    def narrow(self, v: str, lo: int, hi: int) -> bool:
        clo, chi = self.get(v)
        nlo, nhi = max(clo, lo), min(chi, hi)
        if nlo > nhi:
            raise _Inconsistent()
        if (nlo, nhi) == (clo, chi):
            return False
        self.over[v] = (nlo, nhi)
        self.changed.add(v)
        return True


def _propagate_atom(c: Atom, bounds: _Bounds) -> None:
    e, op = c.expr, c.op
    if op == NE:
        lo, hi = _expr_range(e, bounds.get)
        if lo == 0 and hi == 0:
            raise _Inconsistent()
        if len(e.terms) == 1:
            coef, v = e.terms[0]
            # x != -const/coef: shave interval endpoints only
            if (-e.const) % coef == 0:
                bad = (-e.const) // coef
                vlo, vhi = bounds.get(v)
                if vlo == vhi == bad:
                    raise _Inconsistent()
                if bad == vlo:
                    bounds.narrow(v, vlo + 1, vhi)
                elif bad == vhi:
                    bounds.narrow(v, vlo, vhi - 1)
        return
    # EQ propagates as both e <= 0 and -e <= 0; LT as e+1 <= 0
    parts: list[LinExpr] = []
    if op == EQ:
        parts = [e, e.times(-1)]
    elif op == LT:
        parts = [e.plus(1)]
    else:
        parts = [e]
    for expr in parts:
        lo, hi = _expr_range(expr, bounds.get)
        if lo > 0:
            raise _Inconsistent()
        if hi <= 0:
            continue
        for coef, v in expr.terms:
            vlo, vhi = bounds.get(v)
            # rest = expr without this term
            rest_lo = lo - (coef * vlo if coef >= 0 else coef * vhi)
            # coef * x <= -rest_lo
            if coef > 0:
                bounds.narrow(v, vlo, _floor_div(-rest_lo, coef))
            else:
                bounds.narrow(v, _ceil_div(rest_lo, -coef), vhi)


def _propagate_one(c: Constraint, bounds: _Bounds) -> None:
    if isinstance(c, Atom):
        _propagate_atom(c, bounds)
    elif isinstance(c, And):
        _propagate_one(c.left, bounds)
        _propagate_one(c.right, bounds)
    elif isinstance(c, Or):
        a = _eval_bounds(c.left, bounds.get)
        b = _eval_bounds(c.right, bounds.get)
        if a is False and b is False:
            raise _Inconsistent()
        if a is False:
            _propagate_one(c.right, bounds)
        elif b is False:
            _propagate_one(c.left, bounds)
    elif isinstance(c, Bottom):
        raise _Inconsistent()


def _propagate(cons: list[Constraint], watch: dict[str, list[int]],
               bounds: _Bounds, queue: Iterable[int]) -> None:
    """Run constraints to bounds fixpoint; raises _Inconsistent on wipeout."""
    pending = deque(queue)
    queued = set(pending)
    while pending:
        ci = pending.popleft()
        queued.discard(ci)
        bounds.changed.clear()
        _propagate_one(cons[ci], bounds)
        for v in bounds.changed:
            for watcher in watch.get(v, ()):
                if watcher not in queued:
                    queued.add(watcher)
                    pending.append(watcher)


class Store:
    """Declarations plus an ordered list of told constraints.

    Mutable; ``tell`` appends and re-propagates. ``status`` is exact:
    consistent iff some assignment within the declared domains satisfies
    every told constraint.
    """

    __slots__ = ("decls", "told", "_over", "_watch", "_status", "_witness",
                 "_entailed", "first_failure")

    def __init__(self, decls: Iterable[VarDecl] = ()):
        self.decls: dict[str, tuple[int, int]] = {}
        self.told: list[Constraint] = []
        self._over: dict[str, tuple[int, int]] = {}  # narrowed bounds overlay
        self._watch: dict[str, list[int]] = {}
        self._status: Optional[bool] = True
        self._witness: dict[str, int] = {}  # overlay; default is bounds lo
        self._entailed: set[Constraint] = set()
        self.first_failure: Optional[Constraint] = None
        for d in decls:
            self.declare(d)

    # -- declarations ------------------------------------------------------

    def declare(self, d: VarDecl) -> None:
        if d.name in self.decls:
            raise StoreError(f"duplicate variable: {d.name}")
        self.decls[d.name] = (d.lo, d.hi)

    def _base(self, v: str) -> tuple[int, int]:
        got = self.decls.get(v)
        if got is None:
            raise UnknownVariable(v)
        return got

    def bounds_of(self, v: str) -> tuple[int, int]:
        got = self._over.get(v)
        return got if got is not None else self._base(v)

    def _check_vars(self, c: Constraint) -> None:
        for v in vars_of(c):
            if v not in self.decls:
                raise UnknownVariable(v)

    # -- witness maintenance ----------------------------------------------

    def _wval(self, v: str) -> int:
        got = self._witness.get(v)
        return got if got is not None else self.bounds_of(v)[0]

    def _eval_witness(self, c: Constraint) -> bool:
        if isinstance(c, Atom):
            val = c.expr.const
            for coef, v in c.expr.terms:
                val += coef * self._wval(v)
            if c.op == EQ:
                return val == 0
            if c.op == NE:
                return val != 0
            if c.op == LT:
                return val < 0
            return val <= 0
        if isinstance(c, And):
            return self._eval_witness(c.left) and self._eval_witness(c.right)
        if isinstance(c, Or):
            return self._eval_witness(c.left) or self._eval_witness(c.right)
        return isinstance(c, Top)

    def _witness_fix(self, dirty: Iterable[str]) -> None:
        """Repair the cached solution after bounds moved; may give up by
        setting status to unknown (None) for a later full search."""
        pending = deque()
        for v in dirty:
            lo, hi = self.bounds_of(v)
            w = self._wval(v)
            if w < lo or w > hi:
                self._witness[v] = lo if w < lo else hi
            pending.append(v)
        budget = 2000
        while pending:
            budget -= 1
            if budget < 0:
                self._status = None
                return
            v = pending.popleft()
            for ci in self._watch.get(v, ()):
                c = self.told[ci]
                if self._eval_witness(c):
                    continue
                moved = False
                for u in vars_of(c):
                    lo, hi = self.bounds_of(u)
                    if lo == hi and self._wval(u) != lo:
                        self._witness[u] = lo
                        pending.append(u)
                        moved = True
                if moved and self._eval_witness(c):
                    continue
                self._status = None
                return

    # -- core operations ---------------------------------------------------

    def tell(self, c: Constraint) -> "Store":
        """Add c to the store; returns self (stores only grow in a unit)."""
        self._check_vars(c)
        idx = len(self.told)
        self.told.append(c)
        for v in vars_of(c):
            self._watch.setdefault(v, []).append(idx)
        if self._status is False:
            return self
        bounds = _Bounds(self._base, self._over)
        try:
            _propagate(self.told, self._watch, bounds, [idx])
        except _Inconsistent:
            self._mark_inconsistent(c)
            return self
        dirty = {v for v in bounds.over if bounds.over[v] != self._over.get(v)}
        self._over = bounds.over
        if self._status is True and dirty:
            self._witness_fix(dirty)
        if self._status is True and not self._eval_witness(c):
            self._witness_fix(vars_of(c))
        if self._status is None:
            self.sat()
        return self

    def _mark_inconsistent(self, culprit: Constraint) -> None:
        if self._status is not False:
            self._status = False
            self.first_failure = culprit

    @property
    def status(self) -> bool:
        """True = consistent, False = inconsistent."""
        return self.sat()

    def sat(self) -> bool:
        if self._status is not None:
            return self._status
        found = self._solve(())
        if found is None:
            self._status = False
            if self.first_failure is None:
                self.first_failure = self.told[-1] if self.told else FALSE
        else:
            self._witness.update(found)
            self._status = True
        return self._status

    def entails(self, c: Constraint) -> bool:
        """True iff every solution of the store satisfies c (exact)."""
        if type(c) is not Atom:
            # atoms get their vars checked by the witness walk itself
            self._check_vars(c)
        if not self.sat():
            if type(c) is Atom:
                self._check_vars(c)
            return True  # an inconsistent store entails everything
        if not self._eval_witness(c):
            return False  # the cached solution is a countermodel
        r = _eval_bounds(c, self.bounds_of)
        if r is True:
            return True
        if c in self._entailed:
            return True
        neg = negate(c)
        if self._solve((neg,)) is None:
            self._entailed.add(c)
            return True
        return False

    def _solve(self, extra: tuple[Constraint, ...]):
        """Search for a solution of told+extra; returns assignment overlay
        (explicit values for the variables that matter) or None."""
        cons = [c for c in self.told if not isinstance(c, Top)]
        cons.extend(extra)
        watch: dict[str, list[int]] = {}
        for i, c in enumerate(cons):
            for v in vars_of(c):
                watch.setdefault(v, []).append(i)
        bounds = _Bounds(self._base, self._over)
        try:
            _propagate(cons, watch, bounds, range(len(cons)))
        except _Inconsistent:
            return None
        return self._bt(cons, watch, bounds)

    def _bt(self, cons, watch, bounds: _Bounds):
        # find a constraint not yet decided true under bounds
        pick_var = None
        pick_size = None
        for c in cons:
            r = _eval_bounds(c, bounds.get)
            if r is True:
                continue
            if r is False:
                return None
            for v in sorted(vars_of(c)):
                lo, hi = bounds.get(v)
                if lo == hi:
                    continue
                size = hi - lo + 1
                if pick_size is None or size < pick_size or (size == pick_size and v < pick_var):
                    pick_var, pick_size = v, size
        if pick_var is None:
            # every constraint holds on the whole remaining box
            return {v: bounds.get(v)[0] for v in bounds.over} | {
                v: bounds.get(v)[0] for c in cons for v in vars_of(c)}
        lo, hi = bounds.get(pick_var)
        for val in range(lo, hi + 1):
            child = _Bounds(self._base, bounds.over)
            try:
                child.narrow(pick_var, val, val)
                _propagate(cons, watch, child, list(watch.get(pick_var, ())))
            except _Inconsistent:
                continue
            found = self._bt(cons, watch, child)
            if found is not None:
                return found
        return None

    def solutions(self) -> list[dict[str, int]]:
        """Complete enumeration of satisfying assignments over the declared
        domains (independent of propagation; used as a test oracle)."""
        names = sorted(self.decls)
        size = 1
        for n in names:
            lo, hi = self.decls[n]
            size *= hi - lo + 1
            if size > ENUMERATION_CAP:
                raise EnumerationTooLarge(size)
        out = []
        ranges = [range(self.decls[n][0], self.decls[n][1] + 1) for n in names]
        for combo in itertools.product(*ranges):
            asg = dict(zip(names, combo))
            if all(eval_constraint(c, asg) for c in self.told):
                out.append(asg)
        return out

    # -- misc ----------------------------------------------------------------

    def clone(self) -> "Store":
        s = Store.__new__(Store)
        s.decls = dict(self.decls)
        s.told = list(self.told)
        s._over = dict(self._over)
        s._watch = {v: list(ws) for v, ws in self._watch.items()}
        s._status = self._status
        s._witness = dict(self._witness)
        s._entailed = set(self._entailed)
        s.first_failure = self.first_failure
        return s

    def dump(self) -> str:
        lines = [f"{n} in [{lo},{hi}]" for n, (lo, hi) in sorted(self.decls.items())]
        lines.extend(c.render() for c in self.told)
        if not self.sat():
            lines.append("# inconsistent")
        return "\n".join(lines)

    def __repr__(self) -> str:
        state = "consistent" if self.sat() else "inconsistent"
        return f"<Store {len(self.decls)} vars, {len(self.told)} told, {state}>"


# -- textual constraint syntax ----------------------------------------------

class ConstraintSyntaxError(StoreError):
    pass


def parse_constraint(text: str) -> Constraint:
    """Parse the canonical constraint syntax.

    Examples: ``x = 3``, ``3*x + -1*y + 2 <= 0``, ``k < 2 & go_A = 1``,
    ``(a = 1) | (b = 1)``, ``!(x = 0)``, ``true``.
    """
    toks = _tokenize(text)
    c, pos = _parse_disj(toks, 0)
    if pos != len(toks):
        raise ConstraintSyntaxError(f"trailing input at token {pos} in {text!r}")
    return c


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif text[i:i + 2] in ("<=", ">=", "!=", "&&", "||"):
            out.append(text[i:i + 2])
            i += 2
        elif ch in "+-*<>=()&|!":
            out.append(ch)
            i += 1
        else:
            raise ConstraintSyntaxError(f"bad character {ch!r} in {text!r}")
    return out


def _parse_disj(toks, pos):
    left, pos = _parse_conj(toks, pos)
    while pos < len(toks) and toks[pos] in ("|", "||"):
        right, pos = _parse_conj(toks, pos + 1)
        left = Or(left, right)
    return left, pos


def _parse_conj(toks, pos):
    left, pos = _parse_unit(toks, pos)
    while pos < len(toks) and toks[pos] in ("&", "&&"):
        right, pos = _parse_unit(toks, pos + 1)
        left = And(left, right)
    return left, pos


def _parse_unit(toks, pos):
    if pos >= len(toks):
        raise ConstraintSyntaxError("unexpected end of input")
    t = toks[pos]
    if t == "true":
        return TRUE, pos + 1
    if t == "false":
        return FALSE, pos + 1
    if t == "!":
        inner, pos = _parse_unit(toks, pos + 1)
        return negate(inner), pos
    if t == "(":
        inner, pos = _parse_disj(toks, pos + 1)
        if pos >= len(toks) or toks[pos] != ")":
            raise ConstraintSyntaxError("missing )")
        return inner, pos + 1
    left, pos = _parse_sum(toks, pos)
    if pos >= len(toks) or toks[pos] not in ("=", "!=", "<", "<=", ">", ">="):
        raise ConstraintSyntaxError(f"expected comparison at token {pos}")
    op = toks[pos]
    right, pos = _parse_sum(toks, pos + 1)
    if op == "=":
        return left.eq(right), pos
    if op == "!=":
        return left.ne(right), pos
    if op == "<":
        return left.lt(right), pos
    if op == "<=":
        return left.le(right), pos
    if op == ">":
        return left.gt(right), pos
    return left.ge(right), pos


def _parse_sum(toks, pos):
    expr, pos = _parse_term(toks, pos)
    while pos < len(toks) and toks[pos] in ("+", "-"):
        sign = 1 if toks[pos] == "+" else -1
        nxt, pos = _parse_term(toks, pos + 1)
        expr = expr.plus(nxt.times(sign))
    return expr, pos


def _parse_term(toks, pos):
    if pos >= len(toks):
        raise ConstraintSyntaxError("unexpected end of input")
    if toks[pos] == "-":
        inner, pos = _parse_term(toks, pos + 1)
        return inner.times(-1), pos
    t = toks[pos]
    if t.isdigit():
        val = int(t)
        if pos + 1 < len(toks) and toks[pos + 1] == "*":
            if pos + 2 >= len(toks):
                raise ConstraintSyntaxError("unexpected end of input")
            name = toks[pos + 2]
            if not (name[0].isalpha() or name[0] == "_"):
                raise ConstraintSyntaxError(f"expected variable after * at {pos + 2}")
            return var(name).times(val), pos + 3
        return LinExpr((), val), pos + 1
    if t[0].isalpha() or t[0] == "_":
        return var(t), pos + 1
    raise ConstraintSyntaxError(f"unexpected token {t!r}")
