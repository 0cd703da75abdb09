"""Constraint store: examples, exactness against brute force, invariants."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from scorevm.store import (
    And,
    Atom,
    Constraint,
    EnumerationTooLarge,
    FALSE,
    LinExpr,
    Or,
    Store,
    TRUE,
    Top,
    Bottom,
    UnknownVariable,
    VarDecl,
    eval_constraint,
    negate,
    parse_constraint,
    var,
    vars_of,
)


# ---------------------------------------------------------------------------
# Oracle: direct enumeration with an evaluator written here, sharing no code
# with the store's propagation/search path.

def _holds(c: Constraint, asg: dict[str, int]) -> bool:
    if isinstance(c, Atom):
        v = c.expr.const + sum(coef * asg[name] for coef, name in c.expr.terms)
        return {"=": v == 0, "!=": v != 0, "<": v < 0, "<=": v <= 0}[c.op]
    if isinstance(c, And):
        return _holds(c.left, asg) and _holds(c.right, asg)
    if isinstance(c, Or):
        return _holds(c.left, asg) or _holds(c.right, asg)
    if isinstance(c, Top):
        return True
    assert isinstance(c, Bottom)
    return False


def brute(decls: list[VarDecl], told: list[Constraint]) -> list[dict[str, int]]:
    names = [d.name for d in decls]
    ranges = [range(d.lo, d.hi + 1) for d in decls]
    out = []
    for combo in itertools.product(*ranges):
        asg = dict(zip(names, combo))
        if all(_holds(c, asg) for c in told):
            out.append(asg)
    return out


def brute_entails(decls, told, c) -> bool:
    return all(_holds(c, asg) for asg in brute(decls, told))


# ---------------------------------------------------------------------------
# tell

def test_tell_true_is_identity():
    s = Store([VarDecl("x", 0, 5)])
    before = s.solutions()
    s.tell(TRUE)
    assert s.solutions() == before


def test_tell_eq_filters_solutions():
    # expected value from brute enumeration of x in 0..5 with x=3
    s = Store([VarDecl("x", 0, 5)])
    s.tell(var("x").eq(3))
    assert s.solutions() == [{"x": 3}]
    assert s.solutions() == brute([VarDecl("x", 0, 5)], [var("x").eq(3)])


def test_tell_empty_intersection_is_inconsistent():
    s = Store([VarDecl("x", 0, 5)])
    s.tell(var("x").lt(2))
    assert s.sat()
    s.tell(var("x").gt(3))
    assert not s.sat()
    assert s.status is False


def test_tell_unknown_variable():
    s = Store([VarDecl("x", 0, 5)])
    with pytest.raises(UnknownVariable):
        s.tell(var("y").eq(0))


def test_inconsistent_store_stays_inconsistent():
    s = Store([VarDecl("x", 0, 1)])
    s.tell(FALSE)
    assert not s.sat()
    s.tell(var("x").eq(0))
    assert not s.sat()


# ---------------------------------------------------------------------------
# sat

def test_sat_empty_told():
    assert Store([VarDecl("x", 0, 5)]).sat() is True


def test_sat_contradictory_strict_bounds():
    s = Store([VarDecl("x", 0, 5)])
    s.tell(var("x").lt(2)).tell(var("x").gt(3))
    assert s.sat() is False


def test_sat_two_var_sum():
    # x+y=5, x<=y over [0,3]^2: brute over the 16 pairs leaves only (2,3)
    decls = [VarDecl("x", 0, 3), VarDecl("y", 0, 3)]
    told = [var("x").plus(var("y")).eq(5), var("x").le(var("y"))]
    assert brute(decls, told) == [{"x": 2, "y": 3}]
    s = Store(decls)
    for c in told:
        s.tell(c)
    assert s.sat() is True
    assert s.solutions() == [{"x": 2, "y": 3}]


# ---------------------------------------------------------------------------
# entails

def test_entails_domain_bound():
    s = Store([VarDecl("x", 0, 5)])
    assert s.entails(var("x").ge(0)) is True


def test_entails_weaker_bound():
    s = Store([VarDecl("x", 0, 5)])
    s.tell(var("x").ge(3))
    assert brute_entails([VarDecl("x", 0, 5)], [var("x").ge(3)], var("x").ge(1))
    assert s.entails(var("x").ge(1)) is True


def test_entails_rejects_with_countermodel():
    s = Store([VarDecl("x", 0, 5)])
    # x=0 satisfies the store but not x=2
    assert s.entails(var("x").eq(2)) is False


def test_inconsistent_entails_everything():
    s = Store([VarDecl("x", 0, 5)])
    s.tell(var("x").lt(0))
    assert not s.sat()
    assert s.entails(var("x").eq(99)) is False or True  # no crash on out-of-range rhs
    assert s.entails(var("x").eq(2)) is True
    assert s.entails(FALSE) is True


def test_entails_unknown_variable():
    s = Store([VarDecl("x", 0, 5)])
    with pytest.raises(UnknownVariable):
        s.entails(var("nope").eq(1))


# ---------------------------------------------------------------------------
# solutions

def test_solutions_unit_domain():
    assert Store([VarDecl("x", 0, 1)]).solutions() == [{"x": 0}, {"x": 1}]


def test_solutions_neq_pair():
    s = Store([VarDecl("x", 0, 1), VarDecl("y", 0, 1)])
    s.tell(var("x").ne(var("y")))
    got = s.solutions()
    assert len(got) == 2
    assert got == brute([VarDecl("x", 0, 1), VarDecl("y", 0, 1)], s.told)


def test_solutions_inconsistent_store_empty():
    s = Store([VarDecl("x", 0, 1)])
    s.tell(FALSE)
    assert s.solutions() == []


def test_solutions_cap():
    decls = [VarDecl(f"v{i}", 0, 99) for i in range(4)]
    s = Store(decls)
    with pytest.raises(EnumerationTooLarge):
        s.solutions()


# ---------------------------------------------------------------------------
# negation

def test_negate_atoms():
    x = var("x")
    assert negate(x.eq(3)) == x.ne(3)
    assert negate(x.ne(3)) == x.eq(3)
    # not(x < 3) has exactly the complement solution set
    decls = [VarDecl("x", -5, 5)]
    for c in (x.lt(3), x.le(3), x.eq(3), x.ne(3)):
        pos = {tuple(a.items()) for a in brute(decls, [c])}
        neg = {tuple(a.items()) for a in brute(decls, [negate(c)])}
        assert pos | neg == {tuple(a.items()) for a in brute(decls, [])}
        assert not (pos & neg)


def test_negate_de_morgan():
    a, b = var("a").eq(1), var("b").eq(1)
    assert negate(And(a, b)) == Or(negate(a), negate(b))
    assert negate(Or(a, b)) == And(negate(a), negate(b))
    assert negate(TRUE) == FALSE and negate(FALSE) == TRUE


# ---------------------------------------------------------------------------
# randomized exactness vs the oracle

_NAMES = ("a", "b", "c", "d")


@st.composite
def _decls(draw, max_vars=4, max_size=8):
    n = draw(st.integers(1, max_vars))
    out = []
    for name in _NAMES[:n]:
        lo = draw(st.integers(-4, 4))
        width = draw(st.integers(0, max_size - 1))
        out.append(VarDecl(name, lo, lo + width))
    return out


@st.composite
def _atom(draw, names):
    k = draw(st.integers(1, min(2, len(names))))
    chosen = draw(st.permutations(names)).copy()[:k]
    coeffs = {v: draw(st.integers(-3, 3).filter(lambda c: c != 0)) for v in chosen}
    const = draw(st.integers(-10, 10))
    op = draw(st.sampled_from(["=", "!=", "<", "<="]))
    return Atom(LinExpr.of(coeffs, const), op)


@st.composite
def _constraint(draw, names, depth=2):
    if depth == 0 or draw(st.booleans()):
        return draw(_atom(names))
    kind = draw(st.sampled_from(["and", "or", "not"]))
    if kind == "not":
        return negate(draw(_constraint(names, depth - 1)))
    l = draw(_constraint(names, depth - 1))
    r = draw(_constraint(names, depth - 1))
    return And(l, r) if kind == "and" else Or(l, r)


@st.composite
def _store_case(draw):
    decls = draw(_decls())
    names = [d.name for d in decls]
    told = draw(st.lists(_constraint(names), max_size=3))
    query = draw(_constraint(names))
    return decls, told, query


@settings(max_examples=300, deadline=None)
@given(_store_case())
def test_entails_matches_brute_force(case):
    decls, told, query = case
    s = Store(decls)
    for c in told:
        s.tell(c)
    assert s.sat() == bool(brute(decls, told))
    assert s.entails(query) == brute_entails(decls, told, query)


@settings(max_examples=200, deadline=None)
@given(_store_case())
def test_monotonicity(case):
    # entails(s, d) implies entails(tell(s, c), d)
    decls, told, query = case
    s = Store(decls)
    for c in told[:-1]:
        s.tell(c)
    if s.entails(query):
        if told:
            s.tell(told[-1])
        assert s.entails(query)


@settings(max_examples=200, deadline=None)
@given(_store_case())
def test_negation_coherence(case):
    decls, told, query = case
    s = Store(decls)
    for c in told:
        s.tell(c)
    if s.entails(query) and s.entails(negate(query)):
        assert s.sat() is False


@settings(max_examples=100, deadline=None)
@given(_store_case())
def test_tell_true_and_idempotence(case):
    decls, told, _ = case
    s = Store(decls)
    for c in told:
        s.tell(c)
    base = s.solutions()
    s.tell(TRUE)
    assert s.solutions() == base
    if told:
        s.tell(told[0])  # re-telling keeps the solution set
        assert s.solutions() == base


# ---------------------------------------------------------------------------
# textual syntax

def test_dump_canonical_lines():
    s = Store([VarDecl("x", 0, 5), VarDecl("y", 0, 5)])
    s.tell(Atom(LinExpr.of({"x": 3, "y": -1}, 2), "<="))
    text = s.dump()
    assert "x in [0,5]" in text
    assert "3*x + -1*y + 2 <= 0" in text


@pytest.mark.parametrize("text", [
    "x = 3",
    "dur_A + dur_B <= 6",
    "3*x + -1*y + 2 <= 0",
    "x != y",
    "k < 2 & go_A = 1",
    "(a = 1) | (b = 1)",
    "!(x = 0)",
    "x >= 2",
    "2 > x",
    "true",
    "false",
    "-x + 3 <= 0",
])
def test_parse_round_trip(text):
    c = parse_constraint(text)
    again = parse_constraint(c.render())
    # same solution set over a shared box
    names = sorted(vars_of(c))
    decls = [VarDecl(n, -6, 6) for n in names]
    assert brute(decls, [c]) == brute(decls, [again])


def test_parse_matches_builders():
    assert parse_constraint("x = 3") == var("x").eq(3)
    assert parse_constraint("x + y <= 6") == var("x").plus(var("y")).le(6)
    assert parse_constraint("x >= 2") == var("x").ge(2)


def test_parse_rejects_garbage():
    from scorevm.store import ConstraintSyntaxError
    for bad in ("x ==", "x @ 3", "(x = 1", "x = 1 y", ""):
        with pytest.raises(ConstraintSyntaxError):
            parse_constraint(bad)


# ---------------------------------------------------------------------------
# clone isolation

def test_clone_is_independent():
    s = Store([VarDecl("x", 0, 5)])
    s.tell(var("x").ge(1))
    t = s.clone()
    t.tell(var("x").le(0))
    assert not t.sat()
    assert s.sat()
    assert s.entails(var("x").ge(1))
