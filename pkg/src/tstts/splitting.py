"""Clock splitting into integer/fractional parts and the region-disequality constraints."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

from . import formula as F
from .formula import Var


class UnsupportedClockAtom(ValueError):
    pass


def int_part(c: Var) -> Var:
    return Var(c.name + "#int", F.NAT, c.primed, c.step)


def frac_part(c: Var) -> Var:
    return Var(c.name + "#frac", F.FRAC, c.primed, c.step)


def _eq(a, b) -> F.Node:
    return F.cmp("=", a, b)


def _rewrite_clock_atom(a: F.ClockAtom) -> F.Node:
    if a.const.denominator != 1:
        raise UnsupportedClockAtom(f"non-integer constant in {F.to_text(a)}")
    n = int(a.const)
    ci, cf = int_part(a.clock), frac_part(a.clock)
    if a.op == "<":
        return F.cmp("<", ci, n)
    if a.op == "<=":
        return F.Or((F.cmp("<", ci, n), F.And((_eq(ci, n), _eq(cf, 0)))))
    if a.op == ">":
        return F.Or((F.cmp(">", ci, n), F.And((_eq(ci, n), F.cmp(">", cf, 0)))))
    if a.op == ">=":
        return F.cmp(">=", ci, n)
    if a.op == "=":
        return F.And((_eq(ci, n), _eq(cf, 0)))
    if a.op == "distinct":
        return F.Not(F.And((_eq(ci, n), _eq(cf, 0))))
    raise UnsupportedClockAtom(F.to_text(a))


def _rewrite_shift(a: F.ShiftAtom) -> F.Node:
    t, c, d = a.target, a.source, a.delta
    fsum = F.add(frac_part(c), frac_part(d))
    isum = F.add(int_part(c), int_part(d))
    no_carry = F.Implies(
        F.cmp("<", fsum, 1),
        F.And((_eq(int_part(t), isum), _eq(frac_part(t), fsum))),
    )
    carry = F.Implies(
        F.cmp(">=", fsum, 1),
        F.And((_eq(int_part(t), F.add(isum, 1)), _eq(frac_part(t), F.sub(fsum, 1)))),
    )
    return F.And((no_carry, carry))


def split_clocks_rewrite(f: F.Node) -> F.Node:
    """Replace every clock atom by its equivalent over integer and fractional parts."""
    if isinstance(f, (F.BoolConst,)):
        return f
    if isinstance(f, F.Var):
        if f.is_clock:
            raise UnsupportedClockAtom(f"bare clock {f.ident}")
        return f
    if isinstance(f, F.ClockAtom):
        return _rewrite_clock_atom(f)
    if isinstance(f, F.DiffAtom):
        if f.op == "=" and f.const == 0:
            a, b = f.lhs, f.rhs
            return F.And((_eq(int_part(a), int_part(b)), _eq(frac_part(a), frac_part(b))))
        raise UnsupportedClockAtom(F.to_text(f))
    if isinstance(f, F.ShiftAtom):
        return _rewrite_shift(f)
    if isinstance(f, F.Cmp):
        if any(v.is_clock for v in F.variables(f)):
            raise UnsupportedClockAtom(F.to_text(f))
        return f
    if isinstance(f, F.Not):
        return F.Not(split_clocks_rewrite(f.arg))
    if isinstance(f, F.And):
        return F.And(tuple(split_clocks_rewrite(a) for a in f.args))
    if isinstance(f, F.Or):
        return F.Or(tuple(split_clocks_rewrite(a) for a in f.args))
    if isinstance(f, F.Implies):
        return F.Implies(split_clocks_rewrite(f.lhs), split_clocks_rewrite(f.rhs))
    if isinstance(f, F.Iff):
        return F.Iff(split_clocks_rewrite(f.lhs), split_clocks_rewrite(f.rhs))
    raise UnsupportedClockAtom(f"unexpected node {f!r}")


def split_valuation(itp: Mapping, clocks: Sequence[Var]) -> dict:
    """Split image of an interpretation: each listed clock becomes its two parts."""
    out = dict(itp)
    for c in clocks:
        v = Fraction(out.pop(c.ident))
        i = math.floor(v)
        out[int_part(c).ident] = i
        out[frac_part(c).ident] = v - i
    return out


def join_valuation(itp: Mapping, clocks: Sequence[Var]) -> dict:
    """Inverse of :func:`split_valuation`."""
    out = dict(itp)
    for c in clocks:
        out[c.ident] = Fraction(out.pop(int_part(c).ident)) + out.pop(frac_part(c).ident)
    return out


# ---------------------------------------------------------------- disequalities


def _at(v: Var, i: int) -> Var:
    return v.at(i)


def at_max(c: Var, i: int, m: int) -> F.Node:
    """Clock ``c`` at step ``i`` exceeds its maximum ``m``."""
    ci, cf = int_part(c.at(i)), frac_part(c.at(i))
    return F.Or((F.cmp(">", ci, m), F.And((_eq(ci, m), F.cmp(">", cf, 0)))))


def _differs(x: Var, i: int, j: int) -> F.Node:
    a, b = x.at(i), x.at(j)
    if x.sort.kind == "bool":
        return F.Not(F.Iff(a, b))
    return F.Cmp("distinct", a, b)


def region_disequality(i: int, j: int, state_vars: Sequence[Var], clocks: Sequence[Var],
                       bounds: Mapping[str, int]) -> F.Node:
    """Split-space formula true iff the states at steps ``i`` and ``j`` lie in different regions."""
    if i == j:
        raise ValueError("region disequality needs two distinct steps")
    parts: list[F.Node] = [_differs(x, i, j) for x in state_vars]
    for c in clocks:
        m = bounds[c.name]
        mi, mj = at_max(c, i, m), at_max(c, j, m)
        parts.append(F.And((
            F.Cmp("distinct", int_part(c.at(i)), int_part(c.at(j))),
            F.Or((F.Not(mi), F.Not(mj))),
        )))
        parts.append(F.Not(F.Iff(mi, mj)))
    for c in clocks:
        m = bounds[c.name]
        parts.append(F.And((
            F.Not(at_max(c, i, m)),
            F.Not(F.Iff(_eq(frac_part(c.at(i)), 0), _eq(frac_part(c.at(j)), 0))),
        )))
    for c in clocks:
        for d in clocks:
            if c == d:
                continue
            parts.append(F.And((
                F.Not(at_max(c, i, bounds[c.name])),
                F.Not(at_max(d, i, bounds[d.name])),
                F.Not(F.Iff(F.cmp("<=", frac_part(c.at(i)), frac_part(d.at(i))),
                            F.cmp("<=", frac_part(c.at(j)), frac_part(d.at(j))))),
            )))
    return F.disj(parts)


def _value(c: Var, i: int) -> F.Node:
    return F.add(int_part(c.at(i)), frac_part(c.at(i)))


def time_pred_disequality(i: int, j: int, state_vars: Sequence[Var], clocks: Sequence[Var],
                          bounds: Mapping[str, int]) -> F.Node:
    """Split-space formula true iff the state at step ``i`` is not a time predecessor of step ``j``.

    One disjunct per violated clause of the time-predecessor conditions, with
    the step-``i`` state in the role of the predecessor.
    """
    if i >= j:
        raise ValueError("time-predecessor disequality needs i < j")
    parts: list[F.Node] = [_differs(x, i, j) for x in state_vars]
    # single clocks
    for c in clocks:
        m = bounds[c.name]
        w, vi, vf = _value(c, i), int_part(c.at(j)), frac_part(c.at(j))
        parts.append(F.And((
            F.Not(at_max(c, j, m)),
            F.Or((
                F.And((_eq(vf, 0), F.cmp(">", w, F.add(vi, vf)))),
                F.And((F.cmp(">", vf, 0), F.cmp(">=", w, F.add(vi, 1)))),
            )),
        )))
    # pairs of clocks
    for c in clocks:
        mc = bounds[c.name]
        cf, ci = frac_part(c.at(j)), int_part(c.at(j))
        wc = _value(c, i)
        for d in clocks:
            if c == d:
                continue
            md = bounds[d.name]
            df, di = frac_part(d.at(j)), int_part(d.at(j))
            wd = _value(d, i)
            base = F.add(wc, F.Scale(Fraction(-1), ci), di)
            both_below = F.And((F.Not(at_max(c, j, mc)), F.Not(at_max(d, j, md))))
            parts.append(F.And((both_below, _eq(cf, df), F.cmp("distinct", wd, base))))
            parts.append(F.And((both_below, F.cmp("<", cf, df),
                                F.Or((F.cmp("<=", wd, base), F.cmp(">=", wd, F.add(base, 1)))))))
            c_below_d_above = F.And((F.Not(at_max(c, j, mc)), at_max(d, j, md)))
            lim = F.add(wc, F.Scale(Fraction(-1), ci), md)
            parts.append(F.And((c_below_d_above, _eq(cf, 0), F.cmp("<=", wd, lim))))
            parts.append(F.And((c_below_d_above, F.cmp(">", cf, 0),
                                F.cmp("<=", wd, F.add(lim, -1)))))
    return F.disj(parts)
