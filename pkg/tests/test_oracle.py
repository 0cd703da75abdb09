"""Direct score-scheduler oracle. Every expected trace here is derived by
hand from the timing conventions, pinning the oracle down before it is used
as ground truth for the compiled processes.
"""

from scorevm.oracle import OracleUnit, oracle_simulate
from scorevm.score import (
    Arm,
    Binds,
    ConditionalBranch,
    ControlMessage,
    DurationRel,
    Event,
    Fixed,
    Flexible,
    InteractionPoint,
    ParamSpec,
    Precedence,
    Score,
    SimultaneousStart,
    TemporalObject,
    validate,
)
from scorevm.store import VarDecl, parse_constraint


def obj(oid, d, params=()):
    dur = Fixed(d) if isinstance(d, int) else Flexible(*d)
    return TemporalObject(oid, dur, params=tuple(params))


def start(o):
    return ControlMessage("start", o)


def stop(o):
    return ControlMessage("stop", o)


def run_units(score, events=()):
    assert validate(score) == []
    return oracle_simulate(score, list(events))


def messages(score, events=()):
    return [list(u.messages) for u in run_units(score, events)]


# --- plain objects ------------------------------------------------------

def test_single_fixed_object():
    s = Score(objects=(obj("A", 3),), roots=("A",), horizon=4)
    assert messages(s) == [[start("A")], [], [stop("A")], []]


def test_one_unit_object_starts_and_stops_together():
    s = Score(objects=(obj("A", 1),), roots=("A",), horizon=2)
    assert messages(s) == [[start("A"), stop("A")], []]


def test_unbound_flexible_duration_takes_minimum():
    s = Score(objects=(obj("A", (2, 6)),), roots=("A",), horizon=4)
    assert messages(s) == [[start("A")], [stop("A")], [], []]


def test_non_root_never_starts():
    s = Score(objects=(obj("A", 1), obj("B", 1)), roots=("A",), horizon=3)
    assert messages(s) == [[start("A"), stop("A")], [], []]


def test_param_messages():
    gains = [ParamSpec(i, "gain", 32 * i) for i in range(4)]
    s = Score(objects=(obj("G", 4, gains),), roots=("G",), horizon=5)
    pm = lambda i: ControlMessage("param", "G", "gain", 32 * i)
    assert messages(s) == [[start("G"), pm(0)], [pm(1)], [pm(2)],
                           [pm(3), stop("G")], []]


# --- precedences --------------------------------------------------------

def test_fixed_delay_chain():
    s = Score(objects=(obj("A", 1), obj("B", 1)),
              relations=(Precedence("A", "B", 2, 2),),
              roots=("A",), horizon=4)
    assert messages(s) == [[start("A"), stop("A")], [],
                           [start("B"), stop("B")], []]


def test_delay_counts_from_last_active_unit():
    # A runs 0..2, delta=1 puts B's go at unit 3
    s = Score(objects=(obj("A", 3), obj("B", 1)),
              relations=(Precedence("A", "B", 1, 1),),
              roots=("A",), horizon=5)
    assert messages(s) == [[start("A")], [], [stop("A")],
                           [start("B"), stop("B")], []]


def test_flexible_delay_takes_minimum():
    s = Score(objects=(obj("A", 1), obj("B", 1)),
              relations=(Precedence("A", "B", 2, 5),),
              roots=("A",), horizon=4)
    assert messages(s) == [[start("A"), stop("A")], [],
                           [start("B"), stop("B")], []]


def test_go_while_active_is_dropped():
    # second go lands at unit 3 while B is still running
    s = Score(objects=(obj("A", 1), obj("B", 3)),
              relations=(Precedence("A", "B", 1, 1), Precedence("A", "B", 3, 3)),
              roots=("A",), horizon=5)
    assert messages(s) == [[start("A"), stop("A")], [start("B")], [],
                           [stop("B")], []]


def test_go_after_done_restarts():
    s = Score(objects=(obj("A", 1), obj("B", 1)),
              relations=(Precedence("A", "B", 1, 1), Precedence("A", "B", 3, 3)),
              roots=("A",), horizon=5)
    assert messages(s) == [[start("A"), stop("A")], [start("B"), stop("B")],
                           [], [start("B"), stop("B")], []]


# --- simultaneous start --------------------------------------------------

def test_simultaneous_start_closure():
    s = Score(objects=(obj("A", 2), obj("B", 1), obj("C", 3)),
              relations=(SimultaneousStart("A", "B"), SimultaneousStart("B", "C")),
              roots=("A",), horizon=4)
    assert messages(s) == [[start("A"), start("B"), stop("B"), start("C")],
                           [stop("A")], [stop("C")], []]


def test_simultaneous_start_via_precedence():
    s = Score(objects=(obj("A", 1), obj("B", 1), obj("C", 1)),
              relations=(Precedence("A", "B", 1, 1), SimultaneousStart("B", "C")),
              roots=("A",), horizon=3)
    assert messages(s) == [[start("A"), stop("A")],
                           [start("B"), stop("B"), start("C"), stop("C")], []]


# --- interaction points --------------------------------------------------

def start_point_score(w0, w1, horizon):
    return Score(objects=(obj("A", 1),),
                 points=(InteractionPoint("p", Binds("start-of", "A"), (w0, w1)),),
                 roots=("A",), horizon=horizon)


def test_start_point_trigger():
    # trigger in unit 4 starts A in unit 5
    s = start_point_score(0, 5, 7)
    assert messages(s, [Event(4, "ev_p")]) == \
        [[], [], [], [], [], [start("A"), stop("A")], []]


def test_start_point_forced_at_latest():
    s = start_point_score(0, 5, 7)
    assert messages(s) == [[], [], [], [], [], [start("A"), stop("A")], []]


def test_start_point_early_trigger():
    s = start_point_score(0, 3, 5)
    assert messages(s, [Event(0, "ev_p")]) == \
        [[], [start("A"), stop("A")], [], [], []]


def test_start_point_trigger_consumed_once():
    s = start_point_score(0, 3, 5)
    got = messages(s, [Event(0, "ev_p"), Event(1, "ev_p")])
    assert got == [[], [start("A"), stop("A")], [], [], []]


def test_start_point_zero_window_starts_immediately():
    s = start_point_score(0, 0, 2)
    assert messages(s) == [[start("A"), stop("A")], []]


def test_event_value_zero_is_ignored():
    s = start_point_score(0, 3, 5)
    got = messages(s, [Event(0, "ev_p", 0)])
    assert got == [[], [], [], [start("A"), stop("A")], []]


def dur_point_score(w0, w1, horizon=8):
    return Score(objects=(obj("A", (2, 6)),),
                 points=(InteractionPoint("p", Binds("duration-of", "A"), (w0, w1)),),
                 roots=("A",), horizon=horizon)


def test_duration_point_trigger():
    # trigger at unit 2 = position 3 resolves d=4: stop in unit 3
    s = dur_point_score(2, 5)
    assert messages(s, [Event(2, "ev_p")]) == \
        [[start("A")], [], [], [stop("A")], [], [], [], []]


def test_duration_point_forced_at_window_max():
    s = dur_point_score(2, 5)
    assert messages(s) == [[start("A")], [], [], [], [stop("A")], [], [], []]


def test_duration_point_trigger_after_window_ignored():
    # position 5 is outside the listening range [1,4]; forced d=5 anyway
    s = dur_point_score(2, 5)
    assert messages(s, [Event(4, "ev_p")]) == \
        [[start("A")], [], [], [], [stop("A")], [], [], []]


def test_duration_point_earliest_trigger():
    # trigger at position 1 gives the minimum admissible duration 2
    s = dur_point_score(2, 5)
    assert messages(s, [Event(0, "ev_p")]) == \
        [[start("A")], [stop("A")], [], [], [], [], [], []]


def delay_point_score(w0, w1, horizon=8):
    return Score(objects=(obj("A", 1), obj("B", 1)),
                 relations=(Precedence("A", "B", 1, 6, id="r"),),
                 points=(InteractionPoint("p", Binds("delay-of", "r"), (w0, w1)),),
                 roots=("A",), horizon=horizon)


def test_delay_point_trigger():
    # A ends at 0; trigger at unit 2 sets delta=3: B starts at 3
    s = delay_point_score(2, 5)
    assert messages(s, [Event(2, "ev_p")]) == \
        [[start("A"), stop("A")], [], [], [start("B"), stop("B")], [], [], [], []]


def test_delay_point_forced():
    s = delay_point_score(2, 5)
    assert messages(s) == \
        [[start("A"), stop("A")], [], [], [], [],
         [start("B"), stop("B")], [], []]


def test_delay_point_trigger_before_window_ignored():
    s = delay_point_score(2, 5)
    assert messages(s, [Event(0, "ev_p")]) == \
        [[start("A"), stop("A")], [], [], [], [],
         [start("B"), stop("B")], [], []]


def test_delay_point_min_delay_trigger():
    # delta=1 needs the trigger in A's end unit itself
    s = delay_point_score(1, 6)
    assert messages(s, [Event(0, "ev_p")]) == \
        [[start("A"), stop("A")], [start("B"), stop("B")], [], [], [], [], [], []]


# --- branches ------------------------------------------------------------

def branch_score(arms, default=None, horizon=6, extra=()):
    return Score(vars=(VarDecl("k", 0, 9),),
                 objects=(obj("A", 1),) + tuple(extra),
                 branches=(ConditionalBranch("A", arms, default),),
                 roots=("A",), horizon=horizon)


def test_branch_loop_counts_occurrences():
    s = branch_score((Arm(parse_constraint("k < 2"), "A"),))
    events = [Event(0, "k", 0), Event(1, "k", 1), Event(2, "k", 2)]
    assert messages(s, events) == [[start("A"), stop("A")],
                                   [start("A"), stop("A")],
                                   [start("A"), stop("A")], [], [], []]


def test_branch_unset_variable_is_not_entailed():
    s = branch_score((Arm(parse_constraint("k = 1"), "A"),), default="B",
                     extra=(obj("B", 1),))
    # k never supplied: k=1 cannot be derived, so the default runs
    assert messages(s) == [[start("A"), stop("A")], [start("B"), stop("B")],
                           [], [], [], []]


def test_branch_first_entailed_arm_wins():
    s = branch_score((Arm(parse_constraint("k < 5"), "B"),
                      Arm(parse_constraint("k < 9"), "C")),
                     extra=(obj("B", 1), obj("C", 1)))
    assert messages(s, [Event(0, "k", 3)]) == \
        [[start("A"), stop("A")], [start("B"), stop("B")], [], [], [], []]


def test_branch_no_arm_no_default_halts():
    s = branch_score((Arm(parse_constraint("k = 1"), "A"),))
    assert messages(s, [Event(0, "k", 7)]) == [[start("A"), stop("A")],
                                               [], [], [], [], []]


def test_branch_condition_over_duration():
    s = Score(objects=(obj("A", (2, 6)), obj("B", 1), obj("C", 1)),
              points=(InteractionPoint("p", Binds("duration-of", "A"), (2, 5)),),
              branches=(ConditionalBranch(
                  "A", (Arm(parse_constraint("dur_A <= 3"), "B"),), "C"),),
              roots=("A",), horizon=8)
    # trigger at position 2: d=3, arm holds, B follows
    assert messages(s, [Event(1, "ev_p")]) == \
        [[start("A")], [], [stop("A")], [start("B"), stop("B")], [], [], [], []]
    # forced d=5: arm fails, default C follows
    assert messages(s) == \
        [[start("A")], [], [], [], [stop("A")], [start("C"), stop("C")], [], []]


# --- globals and consistency ----------------------------------------------

def test_global_violation_flags_unit_and_suppresses_messages():
    s = Score(objects=(obj("A", (1, 3)),),
              points=(InteractionPoint("p", Binds("duration-of", "A"), (1, 3)),),
              globals=(parse_constraint("dur_A <= 2"),),
              roots=("A",), horizon=5)
    units = run_units(s)
    # forced d=3 lands in unit 2 and contradicts the global from then on
    # (the resolved duration is broadcast for as long as A stays done)
    assert [u.inconsistent for u in units] == [False, False, True, True, True]
    assert units[2].messages == ()
    assert units[0].messages == (start("A"),)


def test_global_satisfied_when_triggered_early():
    s = Score(objects=(obj("A", (1, 3)),),
              points=(InteractionPoint("p", Binds("duration-of", "A"), (1, 3)),),
              globals=(parse_constraint("dur_A <= 2"),),
              roots=("A",), horizon=5)
    units = run_units(s, [Event(0, "ev_p")])
    assert all(not u.inconsistent for u in units)
    assert [list(u.messages) for u in units] == \
        [[start("A")], [stop("A")], [], [], []]


def test_score_var_global_violation():
    s = Score(vars=(VarDecl("k", 0, 9),),
              objects=(obj("A", 2),),
              globals=(parse_constraint("k < 5"),),
              roots=("A",), horizon=4)
    units = run_units(s, [Event(1, "k", 7)])
    # the violating unit is also A's stop unit: the message is suppressed
    assert [u.inconsistent for u in units] == [False, True, False, False]
    assert units[1].messages == ()
    assert units[0].messages == (start("A"),)


def test_out_of_domain_assignment_is_inconsistent():
    s = Score(vars=(VarDecl("k", 0, 9),), objects=(obj("A", 2),),
              roots=("A",), horizon=3)
    units = run_units(s, [Event(0, "k", 99)])
    assert [u.inconsistent for u in units] == [True, False, False]
    assert units[0].messages == ()


def test_duration_relation_dynamic_violation():
    # both durations point-bound; A resolves to 2, B forced to 3 at unit 2
    s = Score(objects=(obj("A", (1, 3)), obj("B", (1, 3))),
              relations=(DurationRel("A", "=", "B"),),
              points=(InteractionPoint("pa", Binds("duration-of", "A"), (1, 3)),
                      InteractionPoint("pb", Binds("duration-of", "B"), (1, 3))),
              roots=("A", "B"), horizon=5)
    units = run_units(s, [Event(0, "ev_pa")])
    # dur_A=2 lands at unit 1 and stays consistent (dur_B still open);
    # B's forced dur_B=3 at unit 2 contradicts A=B from then on
    assert [u.inconsistent for u in units] == [False, False, True, True, True]


def test_duration_relation_consistent_run():
    s = Score(objects=(obj("A", (1, 3)), obj("B", (1, 3))),
              relations=(DurationRel("A", "=", "B"),),
              points=(InteractionPoint("pa", Binds("duration-of", "A"), (1, 3)),
                      InteractionPoint("pb", Binds("duration-of", "B"), (1, 3))),
              roots=("A", "B"), horizon=5)
    units = run_units(s, [Event(0, "ev_pa"), Event(0, "ev_pb")])
    assert all(not u.inconsistent for u in units)
    assert [list(u.messages) for u in units] == \
        [[start("A"), start("B")], [stop("A"), stop("B")], [], [], []]


def test_trace_shape():
    s = Score(objects=(obj("A", 1),), roots=("A",), horizon=3)
    units = run_units(s)
    assert [u.tu for u in units] == [0, 1, 2]
    assert units[0] == OracleUnit(0, (start("A"), stop("A")), False)
