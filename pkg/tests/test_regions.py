import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from tstts import formula as F
from tstts.regions import (
    RegionSignature, clause_of, elapse_into, lift_region_cube, lift_time_pred_cube, region_of,
    representative, same_region, sample_in_region, time_predecessor, time_successor,
)

Q = Fraction
X1, X2 = F.Var("x1", F.BOOL), F.Var("x2", F.BOOL)
C, D = F.Var("c", F.CLOCK), F.Var("d", F.CLOCK)
ENV = {v.name: v for v in (X1, X2, C, D)}
BOUNDS = {"c": 3, "d": 2}


def atoms(texts):
    return {F.parse_formula(t, ENV) for t in texts}


def st_(c, d, x1=False, x2=True):
    return {"x1": x1, "x2": x2, "c": Q(c), "d": Q(d)}


def test_gray_region_signature():
    sig = region_of(st_("1.3", "1.6"), BOUNDS)
    assert sig.int_parts == {"c": 1, "d": 1}
    assert not sig.frac_zero("c") and not sig.frac_zero("d")
    assert sig.rank("c") < sig.rank("d")


def test_above_max_and_integer_points():
    assert region_of(st_("4.2", 0), BOUNDS).above_max("c")
    sig = region_of(st_(2, 2), BOUNDS)
    assert sig.int_parts == {"c": 2, "d": 2} and sig.frac_zero("c") and sig.frac_zero("d")


def test_same_region_examples():
    assert same_region(st_("1.3", "1.6"), st_("1.4", "1.65"), BOUNDS)
    s = st_("1.3", "1.6")
    assert same_region(s, s, BOUNDS)
    assert not same_region(st_("1.5", "1.5"), st_("1.5", "1.6"), BOUNDS)


def test_time_predecessor_examples():
    s = st_(3, "2.7")
    assert time_predecessor(s, s, BOUNDS)
    # time predecessors of s: c <= 3 and d - c > -1
    for u in (st_(0, 0), st_("1.5", "0.7"), st_("2.2", "1.9"), st_(3, "2.5")):
        assert time_predecessor(u, s, BOUNDS)
    assert not time_predecessor(st_(0, 0), st_(0, "0.5"), BOUNDS)
    # u(c) above an integer s(c) below the bound
    assert not time_predecessor(st_("1.5", 0), st_(1, 0), BOUNDS)


def test_region_cube_example():
    got = lift_region_cube(st_("1.4", "1.65"), [X1, X2], [C, D], BOUNDS)
    assert set(got) == atoms(["(not x1)", "x2", "(> c 1)", "(< c 2)", "(> d 1)", "(< d 2)", "(> d c)"])


def test_time_pred_cube_example():
    got = lift_time_pred_cube(st_(3, "2.7"), [X1, X2], [C, D], BOUNDS)
    assert set(got) == atoms(["(not x1)", "x2", "(<= c 3)", "(> d (- c 1))"])


def test_cube_corner_cases():
    assert lift_region_cube(st_("4.2", "0.5"), [], [C], BOUNDS) == (F.ClockAtom(C, ">", Q(3)),)
    assert set(lift_region_cube(st_(2, 0), [], [C], BOUNDS)) == atoms(["(<= c 2)", "(>= c 2)"])
    assert set(lift_time_pred_cube(st_(9, 9), [X1], [C, D], BOUNDS)) == atoms(["(not x1)"])


def test_clause_negates_cube():
    cube = lift_region_cube(st_("1.4", "1.65"), [X1, X2], [C, D], BOUNDS)
    clause = F.disj(clause_of(cube))
    s = st_("1.3", "1.6")
    assert F.evaluate(F.conj(cube), s) and not F.evaluate(clause, s)


# ---------------------------------------------------------------- properties


@st.composite
def bounds(draw):
    names = draw(st.sampled_from([["c"], ["c", "d"], ["a", "b", "c"]]))
    return {n: draw(st.integers(0, 3)) for n in names}


@st.composite
def states(draw, b):
    """States on a 1/4 grid so that ties and integer points are frequent."""
    s = {"x": draw(st.booleans())}
    for c, m in b.items():
        s[c] = Q(draw(st.integers(0, 4 * (m + 2))), 4)
    return s


@st.composite
def pairs(draw):
    b = draw(bounds())
    s = draw(states(b))
    how = draw(st.sampled_from(["random", "same", "elapse"]))
    if how == "same":
        u = sample_in_region(region_of(s, b), b, random.Random(draw(st.integers(0, 10**6))))
    elif how == "elapse":
        t = Q(draw(st.integers(0, 12)), 8)
        u = {k: v - t if k in b else v for k, v in s.items()}
        if any(u[c] < 0 for c in b):
            u = draw(states(b))
    else:
        u = draw(states(b))
    return b, s, u


def _vars(b):
    return [F.Var("x", F.BOOL)], [F.Var(c, F.CLOCK) for c in sorted(b)]


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_region_cube_is_exact(case):
    b, s, u = case
    sv, cl = _vars(b)
    assert F.evaluate(F.conj(lift_region_cube(s, sv, cl, b)), u) == same_region(s, u, b)


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_time_pred_cube_is_exact(case):
    b, s, u = case
    sv, cl = _vars(b)
    assert F.evaluate(F.conj(lift_time_pred_cube(s, sv, cl, b)), u) == time_predecessor(u, s, b)


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_time_predecessor_matches_waiting(case):
    b, s, u = case
    waits = u["x"] == s["x"] and elapse_into(u, region_of(s, b), b) is not None
    assert time_predecessor(u, s, b) == waits


@settings(max_examples=200, deadline=None)
@given(bounds(), st.data())
def test_same_region_is_an_equivalence(b, data):
    s, u, w = (data.draw(states(b)) for _ in range(3))
    assert same_region(s, s, b)
    assert same_region(s, u, b) == same_region(u, s, b)
    if same_region(s, u, b) and same_region(u, w, b):
        assert same_region(s, w, b)


@settings(max_examples=200, deadline=None)
@given(bounds(), st.data(), st.integers(0, 10**6))
def test_representative_and_samples_stay_in_region(b, data, seed):
    sig = region_of(data.draw(states(b)), b)
    assert region_of(representative(sig, b), b) == sig
    assert region_of(sample_in_region(sig, b, random.Random(seed)), b) == sig


@settings(max_examples=200, deadline=None)
@given(bounds(), st.data())
def test_time_successor_is_reached_by_waiting(b, data):
    s = data.draw(states(b))
    sig = region_of(s, b)
    nxt = time_successor(sig, b)
    if nxt is None:
        assert all(sig.above_max(c) for c in b)
        return
    t = elapse_into(s, nxt, b)
    assert t is not None and t > 0
    # nothing strictly between: every shorter delay stays in the current region
    mid = {k: v + t / 2 if k in b else v for k, v in s.items()}
    assert region_of(mid, b) in (sig, nxt)


def test_signature_is_hashable_and_ordered_canonically():
    a = region_of({"c": Q(1, 2), "d": Q(1, 3)}, {"c": 1, "d": 1})
    b = region_of({"d": Q(1, 5), "c": Q(2, 3)}, {"d": 1, "c": 1})
    assert a == b and hash(a) == hash(b)
    assert isinstance(a, RegionSignature)
