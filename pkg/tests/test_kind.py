from fractions import Fraction

import pytest

from tstts import formula as F
from tstts.benchmarks import fischer
from tstts.corpus import TINY, corpus_models
from tstts.engine import Status
from tstts.kind import Diseq, KIndConfig, _Run, add_lazy_disequalities, bmc, k_induction
from tstts.model import parse_model, prepare, replay_trace
from tstts.splitting import frac_part, int_part

Q = Fraction


def with_prop(sys, text):
    return sys.with_property(F.parse_formula(text, sys.env))


def test_timer_holds(timer_sys, solver):
    v = k_induction(timer_sys, solver=solver)
    assert v.holds and v.k <= 2


def test_timer_not_x2_violated(timer_sys, solver):
    sys = with_prop(timer_sys, "(not x2)")
    v = k_induction(sys, solver=solver)
    assert v.violated and replay_trace(sys, v.trace) is None
    states = v.trace.states
    assert states[-1]["x2"]
    # the last discrete step is a rising edge of x1
    k = max(i for i in range(1, len(states)) if states[i]["x2"] and not states[i - 1]["x2"])
    assert not states[k - 1]["x1"] and states[k]["x1"]


def test_true_property_holds_at_zero(timer_sys, solver):
    v = k_induction(timer_sys.with_property(F.TRUE), solver=solver)
    assert v.holds and v.k == 0


def test_bmc_is_minimal(timer_sys, solver):
    sys = with_prop(timer_sys, "(not x2)")
    v = bmc(sys, 5, solver)
    assert v.violated and replay_trace(sys, v.trace) is None
    shorter = bmc(sys, v.k - 1, solver)
    assert shorter.status is Status.NO_CEX and shorter.k == v.k - 1
    assert shorter.report().startswith("VERDICT=UNKNOWN\n")


def test_bmc_without_initial_states(solver):
    sys = prepare(parse_model("(stts (vars (x bool)) (clocks d) (init false) (property x))"), solver)
    for bound in (0, 3):
        assert bmc(sys, bound, solver).status is Status.NO_CEX


def test_bmc_bound_zero(timer_sys, solver):
    v = bmc(timer_sys, 0, solver)
    assert v.status is Status.NO_CEX and v.k == 0


def test_fischer(solver):
    assert k_induction(prepare(fischer(2), solver), solver=solver).holds
    bad = prepare(fischer(2, buggy=True), solver)
    v = bmc(bad, 20, solver)
    assert v.violated and replay_trace(bad, v.trace) is None


def test_no_disequalities_does_not_terminate(solver):
    sys = prepare(corpus_models(["latch"])["latch"], solver)
    v = k_induction(sys, KIndConfig(max_k=8, diseq=Diseq.NONE), solver)
    assert v.status is Status.UNKNOWN and "max_k" in v.reason


# ---------------------------------------------------------------- lazy disequalities


def model_of(run, states):
    """Solver-style model placing ``states[i]`` at step ``i`` of the split unrolling."""
    m = {}
    for i, s in enumerate(states):
        for x in run.sys.state_vars:
            m[x.at(i).ident] = s[x.name]
        for c in run.sys.clocks:
            v = Q(s[c.name])
            m[int_part(c.at(i)).ident] = v.numerator // v.denominator
            m[frac_part(c.at(i)).ident] = v - v.numerator // v.denominator
    return m


@pytest.fixture
def run_for(timer_sys, solver):
    runs = []

    def make(mode):
        r = _Run(timer_sys, KIndConfig(diseq=mode), solver, None)
        runs.append(r)
        return r

    yield make
    for r in runs:
        r.sess.close()


def st(x1, x2, d):
    return {"x1": x1, "x2": x2, "d": Q(d)}


def test_lazy_same_region(run_for):
    run = run_for(Diseq.BASIC)
    states = [st(False, True, "0.5"), st(True, False, 0), st(False, True, "0.7")]
    assert add_lazy_disequalities(run, model_of(run, states), 2) == [(0, 2)]
    # already asserted pairs are not added twice
    assert add_lazy_disequalities(run, model_of(run, states), 2) == []


def test_lazy_time_predecessor_only_in_timepred_mode(run_for):
    # state 0 can wait into the region of state 2, but the two regions differ
    states = [st(False, True, "0.5"), st(True, False, 0), st(False, True, "1.5")]
    basic, timepred = run_for(Diseq.BASIC), run_for(Diseq.TIMEPRED)
    assert add_lazy_disequalities(basic, model_of(basic, states), 2) == []
    assert add_lazy_disequalities(timepred, model_of(timepred, states), 2) == [(0, 2)]


def test_lazy_nothing_to_add(run_for):
    run = run_for(Diseq.TIMEPRED)
    states = [st(False, True, "1.5"), st(True, False, 0), st(False, False, "0.5")]
    assert add_lazy_disequalities(run, model_of(run, states), 2) == []


@pytest.mark.parametrize("name", TINY)
def test_lazy_and_eager_agree(name, solver):
    sys = prepare(corpus_models([name])[name], solver)
    for mode in (Diseq.BASIC, Diseq.TIMEPRED):
        lazy = k_induction(sys, KIndConfig(diseq=mode, lazy=True), solver)
        eager = k_induction(sys, KIndConfig(diseq=mode, lazy=False), solver)
        assert lazy.status is eager.status is Status.HOLDS
        assert lazy.k == eager.k


def test_timepred_needs_fewer_steps(solver):
    sys = prepare(corpus_models(["drift"])["drift"], solver)
    basic = k_induction(sys, KIndConfig(diseq=Diseq.BASIC), solver)
    tp = k_induction(sys, KIndConfig(diseq=Diseq.TIMEPRED), solver)
    assert basic.holds and tp.holds and tp.k < basic.k


def test_cancellation(timer_sys, solver):
    v = k_induction(timer_sys, solver=solver, cancel=lambda: True)
    assert v.status is Status.UNKNOWN and v.reason == "cancelled"
