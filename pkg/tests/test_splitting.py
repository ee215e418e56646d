import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tstts import formula as F
from tstts.regions import region_of, same_region, sample_in_region, time_predecessor
from tstts.splitting import (
    UnsupportedClockAtom, frac_part, int_part, join_valuation, region_disequality,
    split_clocks_rewrite, split_valuation, time_pred_disequality,
)

Q = Fraction
C, D, DL = F.Var("c", F.CLOCK), F.Var("d", F.CLOCK), F.Var("delta", F.CLOCK)
X = F.Var("x", F.BOOL)


def test_table_rows():
    ci, cf = int_part(C), frac_part(C)
    assert split_clocks_rewrite(F.ClockAtom(C, "<=", Q(3))) == F.Or((
        F.cmp("<", ci, 3), F.And((F.cmp("=", ci, 3), F.cmp("=", cf, 0)))))
    assert split_clocks_rewrite(F.ClockAtom(C, ">=", Q(3))) == F.cmp(">=", ci, 3)
    eq = split_clocks_rewrite(F.DiffAtom(C.next(), "=", DL, Q(0)))
    assert eq == F.And((F.cmp("=", int_part(C.next()), int_part(DL)),
                        F.cmp("=", frac_part(C.next()), frac_part(DL))))


def test_rejects_what_it_cannot_split():
    with pytest.raises(UnsupportedClockAtom):
        split_clocks_rewrite(F.DiffAtom(C, "<", D, Q(0)))
    with pytest.raises(UnsupportedClockAtom):
        split_clocks_rewrite(F.ClockAtom(C, "<", Q(5, 2)))


def test_valuation_roundtrip():
    v = {"c": Q(7, 3), "x": True}
    sv = split_valuation(v, [C])
    assert sv == {"c#int": 2, "c#frac": Q(1, 3), "x": True}
    assert join_valuation(sv, [C]) == v


atom_strategy = st.one_of(
    st.builds(lambda c, op, n: F.ClockAtom(c, op, Q(n)),
              st.sampled_from([C, D]), st.sampled_from(F.OPS), st.integers(0, 5)),
    st.just(F.DiffAtom(C.next(), "=", DL, Q(0))),
    st.just(F.ShiftAtom(C.next(), C, DL)),
    st.just(F.ShiftAtom(D.next(), D, DL)),
)
val = st.fractions(0, 7, max_denominator=12)


@settings(max_examples=500, deadline=None)
@given(atom_strategy, val, val, val, val, val, st.booleans())
def test_split_equivalence(atom, c, d, dl, cn, dn, consistent):
    if consistent:  # make shift atoms true half of the time
        cn, dn = c + dl, d + dl
    itp = {"c": c, "d": d, "delta": dl, "c'": cn, "d'": dn}
    clocks = [C, D, DL, C.next(), D.next()]
    assert F.evaluate(split_clocks_rewrite(atom), split_valuation(itp, clocks)) == F.evaluate(atom, itp)


# ---------------------------------------------------------------- disequalities

BOUNDS = {"c": 3, "d": 2}


def joint(si, sj, i, j, bounds):
    """Split interpretation placing ``si`` at step ``i`` and ``sj`` at step ``j``."""
    itp, clocks = {}, []
    for k, s in ((i, si), (j, sj)):
        for name, v in s.items():
            var = F.Var(name, F.CLOCK if name in bounds else F.BOOL).at(k)
            itp[var.ident] = v
            if name in bounds:
                clocks.append(var)
    return split_valuation(itp, clocks)


def _vars(bounds):
    return [X], [F.Var(c, F.CLOCK) for c in sorted(bounds)]


def diseq(si, sj, bounds, timepred=False, i=0, j=2):
    sv, cl = _vars(bounds)
    make = time_pred_disequality if timepred else region_disequality
    return F.evaluate(make(i, j, sv, cl, bounds), joint(si, sj, i, j, bounds))


def test_region_diseq_examples():
    a = {"x": True, "c": Q("1.3"), "d": Q("1.6")}
    b = {"x": True, "c": Q("1.4"), "d": Q("1.65")}
    assert not diseq(a, b, BOUNDS)
    assert diseq(a, dict(b, x=False), BOUNDS)
    assert diseq({"x": True, "c": Q(1), "d": Q(0)}, {"x": True, "c": Q("1.5"), "d": Q(0)}, BOUNDS)


def test_time_pred_diseq_examples():
    a = {"x": True, "c": Q("0.5"), "d": Q("1.1")}
    assert not diseq(a, a, BOUNDS, timepred=True)
    assert diseq(a, dict(a, x=False), BOUNDS, timepred=True)
    with pytest.raises(ValueError):
        time_pred_disequality(2, 1, [X], [C], BOUNDS)


@st.composite
def split_pairs(draw):
    bounds = {n: draw(st.integers(0, 3)) for n in draw(st.sampled_from([["c"], ["c", "d"], ["a", "b", "c"]]))}

    def state():
        s = {"x": draw(st.booleans())}
        for c, m in bounds.items():
            s[c] = Q(draw(st.integers(0, 4 * (m + 2))), 4)
        return s

    s = state()
    how = draw(st.sampled_from(["random", "same", "earlier"]))
    if how == "same":
        u = sample_in_region(region_of(s, bounds), bounds, random.Random(draw(st.integers(0, 10**6))))
    elif how == "earlier":
        t = Q(draw(st.integers(0, 12)), 8)
        u = {k: (v - t if k in bounds else v) for k, v in s.items()}
        if any(u[c] < 0 for c in bounds):
            u = state()
    else:
        u = state()
    return bounds, u, s


@settings(max_examples=400, deadline=None)
@given(split_pairs())
def test_region_disequality_is_exact(case):
    bounds, u, s = case
    assert diseq(u, s, bounds) == (not same_region(u, s, bounds))


@settings(max_examples=400, deadline=None)
@given(split_pairs())
def test_time_pred_disequality_is_exact(case):
    bounds, u, s = case
    assert diseq(u, s, bounds, timepred=True) == (not time_predecessor(u, s, bounds))
