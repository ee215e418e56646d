"""Region signatures, the region and time-predecessor relations, and lifted cubes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import formula as F
from .formula import Var

Bounds = Mapping[str, int]


def frac(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


@dataclass(frozen=True)
class RegionSignature:
    """Canonical region of a state.

    ``ints`` maps each clock to its integer part, or None when the clock is
    above its maximum. ``classes`` ranks the clocks not above their maximum
    by fractional part, lowest first; ``zero_first`` says whether the first
    class is the fractional-zero class.
    """

    discrete: tuple
    ints: tuple
    classes: tuple
    zero_first: bool

    @property
    def int_parts(self) -> dict:
        return dict(self.ints)

    def above_max(self, clock: str) -> bool:
        return self.int_parts[clock] is None

    def frac_zero(self, clock: str) -> bool:
        return self.zero_first and clock in self.classes[0]

    def rank(self, clock: str) -> int:
        for k, cls in enumerate(self.classes):
            if clock in cls:
                return k
        raise KeyError(clock)


def region_of(s: Mapping, bounds: Bounds) -> RegionSignature:
    """Region signature of state ``s``; the keys of ``bounds`` name the clocks."""
    discrete = tuple(sorted((k, v) for k, v in s.items() if k not in bounds))
    ints = []
    below = {}
    for c in sorted(bounds):
        v = Fraction(s[c])
        if v > bounds[c]:
            ints.append((c, None))
        else:
            ints.append((c, math.floor(v)))
            below[c] = frac(v)
    levels = sorted(set(below.values()))
    classes = tuple(frozenset(c for c, f in below.items() if f == lv) for lv in levels)
    return RegionSignature(discrete, tuple(ints), classes, bool(levels) and levels[0] == 0)


def same_region(s: Mapping, u: Mapping, bounds: Bounds) -> bool:
    return region_of(s, bounds) == region_of(u, bounds)


def _discrete_equal(u: Mapping, s: Mapping, bounds: Bounds) -> bool:
    keys = (set(u) | set(s)) - set(bounds)
    return all(u.get(k) == s.get(k) for k in keys)


def time_predecessor(u: Mapping, s: Mapping, bounds: Bounds) -> bool:
    """``u`` is in a time-predecessor region of ``s`` (u may wait into s's region)."""
    if not _discrete_equal(u, s, bounds):
        return False
    w = {c: Fraction(u[c]) for c in bounds}
    v = {c: Fraction(s[c]) for c in bounds}
    for c, m in bounds.items():
        if v[c] > m:
            continue
        if frac(v[c]) == 0:
            if not w[c] <= v[c]:
                return False
        elif not w[c] < math.ceil(v[c]):
            return False
    for c, mc in bounds.items():
        if v[c] > mc:
            continue
        fc, ic = frac(v[c]), math.floor(v[c])
        for d, md in bounds.items():
            if d == c:
                continue
            if v[d] <= md:
                fd, idd = frac(v[d]), math.floor(v[d])
                base = w[c] - ic + idd
                if fc == fd and w[d] != base:
                    return False
                if fc < fd and not (base < w[d] < base + 1):
                    return False
            else:
                if fc == 0 and not w[d] > w[c] - ic + md:
                    return False
                if fc > 0 and not w[d] > w[c] - ic + md - 1:
                    return False
    return True


# ---------------------------------------------------------------- cubes


def _discrete_atoms(s: Mapping, state_vars: Sequence[Var]) -> list[F.Node]:
    return [F.eq_value(x, s[x.name]) for x in state_vars]


def _ca(c: Var, op: str, n) -> F.ClockAtom:
    return F.ClockAtom(c, op, Fraction(n))


def _da(d: Var, op: str, c: Var, n) -> F.DiffAtom:
    return F.DiffAtom(d, op, c, Fraction(n))


def lift_region_cube(s: Mapping, state_vars: Sequence[Var], clocks: Sequence[Var],
                     bounds: Bounds) -> tuple:
    """Atoms whose conjunction holds exactly in the region of ``s``."""
    atoms = _discrete_atoms(s, state_vars)
    val = {c.name: Fraction(s[c.name]) for c in clocks}
    below = [c for c in clocks if val[c.name] <= bounds[c.name]]
    for c in clocks:
        v, m = val[c.name], bounds[c.name]
        if v > m:
            atoms.append(_ca(c, ">", m))
        elif frac(v) == 0:
            atoms += [_ca(c, "<=", v), _ca(c, ">=", v)]
        else:
            atoms += [_ca(c, ">", math.floor(v)), _ca(c, "<", math.ceil(v))]
    for a, c in enumerate(below):
        for d in below[a + 1:]:
            atoms += _pair_atoms(c, d, val, strict_upper=False)
    return tuple(atoms)


def _pair_atoms(c: Var, d: Var, val, strict_upper: bool) -> list[F.Node]:
    """Fractional-order atoms for a pair of clocks not above their maximum."""
    fc, fd = frac(val[c.name]), frac(val[d.name])
    ic, idd = math.floor(val[c.name]), math.floor(val[d.name])
    if fc == fd:
        return [_da(d, "<=", c, idd - ic), _da(d, ">=", c, idd - ic)]
    if fc > fd:
        c, d, ic, idd = d, c, idd, ic
    out = [_da(d, ">", c, idd - ic)]
    if strict_upper:
        out.append(_da(d, "<", c, idd - ic + 1))
    return out


def lift_time_pred_cube(s: Mapping, state_vars: Sequence[Var], clocks: Sequence[Var],
                        bounds: Bounds) -> tuple:
    """Atoms whose conjunction holds exactly in the time-predecessor regions of ``s``."""
    atoms = _discrete_atoms(s, state_vars)
    val = {c.name: Fraction(s[c.name]) for c in clocks}
    below = [c for c in clocks if val[c.name] <= bounds[c.name]]
    above = [c for c in clocks if val[c.name] > bounds[c.name]]
    for c in below:
        v = val[c.name]
        if frac(v) == 0:
            atoms.append(_ca(c, "<=", v))
        else:
            atoms.append(_ca(c, "<", math.ceil(v)))
    for a, c in enumerate(below):
        for d in below[a + 1:]:
            atoms += _pair_atoms(c, d, val, strict_upper=True)
    for c in below:
        ic = math.floor(val[c.name])
        for d in above:
            md = bounds[d.name]
            if frac(val[c.name]) == 0:
                atoms.append(_da(d, ">", c, md - ic))
            else:
                atoms.append(_da(d, ">", c, md - ic - 1))
    return tuple(atoms)


def cube_formula(cube: Sequence[F.Node]) -> F.Node:
    return F.conj(cube)


def negate_literal(a: F.Node) -> F.Node:
    if isinstance(a, F.ClockAtom):
        return F.ClockAtom(a.clock, F.NEGATE[a.op], a.const)
    if isinstance(a, F.DiffAtom):
        return F.DiffAtom(a.lhs, F.NEGATE[a.op], a.rhs, a.const)
    if isinstance(a, F.Cmp):
        return F.Cmp(F.NEGATE[a.op], a.lhs, a.rhs)
    return F.neg(a)


def clause_of(cube: Sequence[F.Node]) -> tuple:
    """Literals of the clause excluding ``cube``."""
    return tuple(negate_literal(a) for a in cube)


def clause_formula(clause: Sequence[F.Node]) -> F.Node:
    return F.disj(clause)


# ---------------------------------------------------------------- region graph helpers


def time_successor(sig: RegionSignature, bounds: Bounds) -> RegionSignature | None:
    """Immediate time-successor region, or None when time elapse cannot leave ``sig``."""
    if not sig.classes:
        return None
    ints = dict(sig.ints)
    classes = list(sig.classes)
    if sig.zero_first:
        zero = classes.pop(0)
        staying = []
        for c in sorted(zero):
            if ints[c] == bounds[c]:
                ints[c] = None
            else:
                staying.append(c)
        if staying:
            classes.insert(0, frozenset(staying))
        zero_first = False
    else:
        top = classes.pop()
        for c in top:
            ints[c] += 1
        classes.insert(0, top)
        zero_first = True
    return RegionSignature(sig.discrete, tuple(sorted(ints.items())), tuple(classes), zero_first)


def representative(sig: RegionSignature, bounds: Bounds) -> dict:
    """A concrete state in ``sig`` with fractional parts at multiples of 1/(|C|+1)."""
    s = dict(sig.discrete)
    denom = len(bounds) + 1
    offset = 0 if sig.zero_first else 1
    for k, cls in enumerate(sig.classes):
        f = Fraction(k + offset, denom)
        for c in cls:
            s[c] = sig.int_parts[c] + f
    for c, i in sig.ints:
        if i is None:
            s[c] = Fraction(bounds[c] + 1)
    return s


def elapse_into(s: Mapping, target: RegionSignature, bounds: Bounds) -> Fraction | None:
    """Smallest-found delay taking ``s`` into region ``target``, if any."""
    cands = {Fraction(0)}
    for c, m in bounds.items():
        v = Fraction(s[c])
        for n in range(0, m + 2):
            t = n - v
            if t >= 0:
                cands.add(t)
    pts = sorted(cands)
    probes = []
    for a, b in zip(pts, pts[1:]):
        probes += [a, (a + b) / 2]
    probes += [pts[-1], pts[-1] + 1]
    for t in probes:
        u = dict(s)
        for c in bounds:
            u[c] = Fraction(s[c]) + t
        if region_of(u, bounds) == target:
            return t
    return None


def sample_in_region(sig: RegionSignature, bounds: Bounds, rng) -> dict:
    """A random concrete state of region ``sig`` (``rng`` is a :class:`random.Random`)."""
    s = dict(sig.discrete)
    n = len(sig.classes)
    free = n - 1 if sig.zero_first else n
    cuts = sorted({Fraction(rng.randint(1, 10**6 - 1), 10**6) for _ in range(4 * free + 4)})
    while len(cuts) < free:
        cuts = sorted(set(cuts) | {Fraction(rng.randint(1, 10**6 - 1), 10**6)})
    levels = sorted(rng.sample(cuts, free))
    if sig.zero_first:
        levels = [Fraction(0)] + levels
    for cls, f in zip(sig.classes, levels):
        for c in cls:
            s[c] = sig.int_parts[c] + f
    for c, i in sig.ints:
        if i is None:
            s[c] = bounds[c] + Fraction(rng.randint(1, 10**6), 10**5)
    return s
