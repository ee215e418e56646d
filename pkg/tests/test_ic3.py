import random
from fractions import Fraction

import pytest

from tstts import formula as F
from tstts.benchmarks import fischer
from tstts.corpus import corpus_models
from tstts.ic3 import IC3, IC3Config, check_certificate, ic3, lifted_cube_for
from tstts.model import prepare, replay_trace
from tstts.regions import clause_formula, region_of, sample_in_region

Q = Fraction


def with_prop(sys, text):
    return sys.with_property(F.parse_formula(text, sys.env))


@pytest.mark.parametrize("mode", ["basic", "timepred"])
def test_timer_holds_with_certificate(timer_sys, solver, mode):
    v = ic3(timer_sys, IC3Config(mode=mode), solver)
    assert v.holds
    assert check_certificate(timer_sys, v.certificate, solver)
    # observed convergence on this model: F_1 = F_2 right after the second extension
    assert (v.k, v.stats["fixpoint"]) == (2, 1)


def test_initial_violation(timer_sys, solver):
    sys = with_prop(timer_sys, "(not x1)")
    v = ic3(sys, solver=solver)
    assert v.violated and v.k == 0
    assert replay_trace(sys, v.trace) is None


def test_true_property(timer_sys, solver):
    v = ic3(timer_sys.with_property(F.TRUE), solver=solver)
    assert v.holds and v.stats["clauses"] == 0
    assert v.stats["frame_sizes"] == [0] * v.k


def test_certificate_rejects_non_invariants(timer_sys, solver):
    assert not check_certificate(timer_sys, F.FALSE, solver)
    x2 = timer_sys.env["x2"]
    assert not check_certificate(timer_sys.with_property(F.Not(x2)), F.Not(x2), solver)


@pytest.mark.parametrize("mode", ["basic", "timepred"])
def test_counterexample_replays(timer_sys, solver, mode):
    sys = with_prop(timer_sys, "(not x2)")
    v = ic3(sys, IC3Config(mode=mode), solver)
    assert v.violated and replay_trace(sys, v.trace) is None


def test_fischer(solver):
    good = prepare(fischer(2), solver)
    v = ic3(good, IC3Config(debug_invariants=True), solver)
    assert v.holds and v.stats["invariant_checks"] > 0
    assert check_certificate(good, v.certificate, solver)
    bad = prepare(fischer(2, buggy=True), solver)
    v = ic3(bad, IC3Config(mode="timepred"), solver)
    assert v.violated and replay_trace(bad, v.trace) is None


def test_frame_limit(solver):
    sys = prepare(fischer(2), solver)
    v = ic3(sys, IC3Config(max_frames=1), solver)
    assert v.status.value == "UNKNOWN" and "frame bound" in v.reason


# ---------------------------------------------------------------- internals


@pytest.fixture
def frozen(solver):
    sys = prepare(corpus_models(["frozen"])["frozen"], solver)
    run = IC3(sys, IC3Config(), solver)
    yield run
    run.sess.close()


def test_blocked_region_is_excluded(frozen):
    frozen.k = 1
    frozen._new_level()
    s = {"x": True, "c": Q(5, 2)}
    frozen.block_state(s)
    clauses = frozen.frame_clauses(1)
    assert clauses
    sig = region_of(s, frozen.bounds)
    rng = random.Random(3)
    for _ in range(50):
        u = sample_in_region(sig, frozen.bounds, rng)
        assert not all(F.evaluate(clause_formula(sorted(c, key=str)), u) for c in clauses)


def test_generalize_keeps_irreducible_clauses(frozen):
    frozen.k = 1
    frozen._new_level()
    x = frozen.sys.env["x"]
    single = (F.Not(x),)
    assert frozen.generalize(single, 1) == single
    # (not x) is the only inductive part; the clock literal is dropped
    two = (F.Not(x), F.ClockAtom(frozen.sys.env["c"], "<", Q(2)))
    assert frozen.generalize(two, 1) == single


def test_valid_clause_propagates_to_the_top(frozen):
    for _ in range(3):
        frozen.k += 1
        frozen._new_level()
    clause = (F.ClockAtom(frozen.sys.env["c"], ">=", Q(0)),)
    frozen.add_clause(clause, 1)
    frozen.propagate()
    assert frozenset(clause) in frozen.levels[3]


def test_no_fixpoint_without_empty_level(frozen):
    frozen.k = 1
    frozen._new_level()
    assert frozen.fixpoint() is None


def test_lifted_cube_modes(timer_sys):
    s = {"x1": False, "x2": True, "d": Q(3, 2)}
    b = {"d": 3}
    basic = set(lifted_cube_for(timer_sys, s, b, "basic"))
    tp = set(lifted_cube_for(timer_sys, s, b, "timepred"))
    d = timer_sys.env["d"]
    assert F.ClockAtom(d, ">", Q(1)) in basic and F.ClockAtom(d, ">", Q(1)) not in tp
    assert F.ClockAtom(d, "<", Q(2)) in basic & tp
