import json
import random
from fractions import Fraction

import pytest

from tstts import formula as F
from tstts.corpus import corpus_models
from tstts.model import parse_model, prepare, replay_trace
from tstts.oracle import (
    EnumerationBoundExceeded, build_region_graph, clock_regions, count_valid_regions, oracle_check,
)
from tstts.regions import region_of, representative, sample_in_region

# frozen fixtures: region graph of the timer (d compared against 3 by the property)
TIMER_REGIONS, TIMER_EDGES = 26, 74
TIMER_TRUE_REGIONS, TIMER_TRUE_EDGES = 22, 62


def edges(g):
    return sum(len(v) for v in g.edges.values())


def test_timer_graph(timer_sys, solver):
    g = build_region_graph(timer_sys, solver)
    assert (len(g), edges(g)) == (TIMER_REGIONS, TIMER_EDGES)
    g = build_region_graph(timer_sys.with_property(F.TRUE), solver)
    assert (len(g), edges(g)) == (TIMER_TRUE_REGIONS, TIMER_TRUE_EDGES)


def test_untimed_graph_is_the_state_graph(solver):
    sys = prepare(corpus_models(["counter"])["counter"], solver)
    g = build_region_graph(sys, solver)
    states = {(dict(sig.discrete)["n"], dict(sig.discrete)["up"]) for sig in g.nodes}
    assert states == {(0, True), (1, True), (2, True), (3, True),
                      (3, False), (2, False), (1, False), (0, False)}
    assert all(kind == "discrete" for _, _, kind in g.edge_set())


def test_verdicts(timer_sys, solver):
    assert oracle_check(timer_sys, solver=solver).holds
    assert oracle_check(timer_sys.with_property(F.TRUE), solver=solver).holds
    sys = timer_sys.with_property(F.Not(timer_sys.env["x2"]))
    v = oracle_check(sys, solver=solver)
    assert v.violated and replay_trace(sys, v.trace) is None


@pytest.mark.parametrize("name", ["timer", "twoclocks", "crossing", "fischer2"])
def test_graph_does_not_depend_on_the_chosen_state(name, solver):
    sys = prepare(corpus_models([name])[name], solver)
    symbolic = build_region_graph(sys, solver)
    rng = random.Random(11)
    by_rep = build_region_graph(sys, solver, pick=lambda sig: representative(sig, symbolic.bounds))
    by_sample = build_region_graph(sys, solver, pick=lambda sig: sample_in_region(sig, symbolic.bounds, rng))
    assert symbolic.edge_set() == by_rep.edge_set() == by_sample.edge_set()


def test_enumeration_bound(timer_sys, solver):
    with pytest.raises(EnumerationBoundExceeded):
        build_region_graph(timer_sys, solver, discrete_enum_bound=2)
    with pytest.raises(EnumerationBoundExceeded):
        build_region_graph(timer_sys, solver, max_nodes=5)


def test_dumps(timer_sys, solver):
    g = build_region_graph(timer_sys, solver)
    data = json.loads(g.to_json())
    assert len(data["nodes"]) == TIMER_REGIONS and len(data["edges"]) == TIMER_EDGES
    dot = g.to_dot()
    assert dot.startswith("digraph") and dot.count("->") == TIMER_EDGES


def test_clock_regions_cover_every_state():
    for bounds in ({"c": 2}, {"c": 3, "d": 2}, {"a": 1, "b": 0, "c": 2}):
        sigs = list(clock_regions(bounds))
        assert len(sigs) == len(set(sigs))
        rng = random.Random(5)
        seen = set()
        for _ in range(5000):
            s = {c: Fraction(rng.randint(0, 4 * (m + 2)), 4) for c, m in bounds.items()}
            seen.add(region_of(s, bounds))
        assert seen <= set(sigs)
    # one clock: 2M + 2 regions
    assert len(list(clock_regions({"c": 5}))) == 12


def test_valid_region_count(timer_sys, solver):
    assert count_valid_regions(timer_sys) == TIMER_REGIONS
    sys = prepare(parse_model("(stts (vars (x bool)) (clocks c) (invar (<= c 1)))"), solver)
    # c = 0, (0, 1), 1 for each value of x
    assert count_valid_regions(sys) == 6
