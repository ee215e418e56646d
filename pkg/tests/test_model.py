from fractions import Fraction

import pytest

from tstts import formula as F
from tstts.benchmarks import TIMER, fischer, timer
from tstts.kind import bmc
from tstts.model import (
    ConvexityNotEstablished, Elapse, ModelError, Trace, build_combined_encoding, check_convexity,
    check_discrete_step, check_past_closed, check_time_elapse, clock_bounds, format_model,
    format_trace, parse_model, parse_trace, prepare, replay_trace,
)

Q = Fraction


def one_clock(invar: str):
    return parse_model(f"(stts (vars (x bool)) (clocks d) (invar {invar}))")


def test_clock_bounds():
    assert clock_bounds(timer().with_property(F.TRUE)) == {"d": 2}
    assert clock_bounds(timer()) == {"d": 3}  # the property mentions d <= 3
    free = parse_model("(stts (vars (x bool)) (clocks d e) (invar (<= d 1)))")
    assert clock_bounds(free) == {"d": 1, "e": 0}


def test_convexity(solver):
    assert check_convexity(timer(), solver).convex
    assert check_convexity(one_clock("true"), solver).convex
    res = check_convexity(one_clock("(or (<= d 1) (>= d 2))"), solver)
    assert not res.convex
    d, eta, delta = res.state["d"], res.eta, res.delta
    inv = lambda v: v <= 1 or v >= 2
    assert inv(d) and not inv(d + eta) and inv(d + delta) and 0 <= eta <= delta


def test_prepare_rejects_bad_invariants(solver):
    with pytest.raises(ModelError, match="not convex"):
        prepare(one_clock("(or (<= d 1) (>= d 2))"), solver)
    # convex, but a state can wait into the invariant from outside it
    assert not check_past_closed(one_clock("(>= d 1)"), solver).convex
    with pytest.raises(ModelError, match="time predecessors"):
        prepare(one_clock("(>= d 1)"), solver)


def test_discrete_step_resets_on_rising_edge(timer_sys):
    s = {"x1": False, "x2": False, "d": Q(5)}
    assert check_discrete_step(timer_sys, s, {"x1": True, "x2": True, "d": Q(0)})
    # d changes without its reset firing
    assert not check_discrete_step(timer_sys, s, {"x1": False, "x2": False, "d": Q(1)})
    # invalid source
    bad = {"x1": False, "x2": True, "d": Q(3)}
    assert not check_discrete_step(timer_sys, bad, {"x1": False, "x2": False, "d": Q(3)})


def test_time_elapse(timer_sys):
    s = {"x1": True, "x2": True, "d": Q(1)}
    assert check_time_elapse(timer_sys, s, 1)
    assert not check_time_elapse(timer_sys, s, Q(3, 2))
    assert check_time_elapse(timer_sys, s, 0)
    with pytest.raises(ConvexityNotEstablished):
        check_time_elapse(timer(), s, 0)


def test_combined_encoding(timer_sys):
    enc = build_combined_encoding(timer_sys)
    edge = F.parse_formula("(and (not x1) (next x1))", timer_sys.env)
    reset = F.implies(edge, F.DiffAtom(F.Var("d", F.CLOCK).next(), "=", enc.delta, Q(0)))
    assert reset in enc.trans_hat.args
    assert F.ClockAtom(enc.delta, ">=", Q(0)) in enc.trans_hat.args


def test_untimed_encoding(solver):
    sys = prepare(parse_model("(stts (vars (x bool)) (clocks) (init x) (trans (= (next x) x)))"), solver)
    enc = build_combined_encoding(sys)
    assert enc.init_hat == sys.init
    assert enc.trans_hat == F.And((sys.trans, F.ClockAtom(enc.delta, ">=", Q(0))))


def test_bmc_trace_replays(timer_sys, solver):
    v = bmc(timer_sys.with_property(F.Not(timer_sys.env["x2"])), 5, solver)
    assert v.violated
    assert replay_trace(timer_sys.with_property(F.Not(timer_sys.env["x2"])), v.trace) is None


def test_tampered_trace_is_located(timer_sys, solver):
    sys = timer_sys.with_property(F.Not(timer_sys.env["x2"]))
    tr = bmc(sys, 5, solver).trace
    items = list(tr.items)
    k = max(i for i, x in enumerate(items) if isinstance(x, dict))
    items[k] = dict(items[k], d=items[k]["d"] + 7)
    assert replay_trace(sys, Trace(items)) is not None


def test_single_state_trace(timer_sys):
    sys = timer_sys.with_property(F.FALSE)
    assert replay_trace(sys, Trace([{"x1": True, "x2": False, "d": Q(0)}])) is None
    # clocks of the first state must be zero
    assert replay_trace(sys, Trace([{"x1": True, "x2": False, "d": Q(1)}])) == 0


def test_trace_text_roundtrip(timer_sys):
    tr = Trace([{"x1": False, "x2": False, "d": Q(0)}, Elapse(Q(7, 3)),
                {"x1": False, "x2": False, "d": Q(7, 3)}])
    text = format_trace(tr)
    assert "(elapse 7/3)" in text
    assert parse_trace(text, timer_sys).items == tr.items


def test_timer_file():
    sys = parse_model(TIMER)
    expected = F.parse_formula(
        "(= (next x2) (or (and (not x1) (next x1)) (and x2 (< d 2))))", sys.env)
    assert sys.trans == expected
    assert parse_model(format_model(sys)) == sys


@pytest.mark.parametrize("text, needle", [
    ("(stts (vars (x bool)) (clocks d) (invar (= d 2.5)))", "clock atom"),
    ("(stts (vars (x bool)) (clocks c d) (invar (< c d)))", "clock atom"),
    ("(stts (vars (x bool)) (clocks d) (init (< d 1)))", "clock d not allowed"),
    ("(stts (vars (x bool)) (frob))", "unknown section"),
    ("(stts (vars (x bool)) (init y))", "unknown variable"),
    ("(stts (vars (__x bool)))", "reserved"),
    ("(stts (vars (x bool)", "unbalanced"),
])
def test_malformed_models(text, needle):
    with pytest.raises(ModelError, match=needle):
        parse_model(text)


def test_untimed_file_is_valid(solver):
    sys = prepare(parse_model("(stts (vars (x bool)) (clocks) (trans (= (next x) (not x))))"), solver)
    assert sys.untimed and sys.convex


def test_generated_models_validate(solver):
    for n in (2, 3):
        for buggy in (False, True):
            assert prepare(fischer(n, buggy), solver).convex
