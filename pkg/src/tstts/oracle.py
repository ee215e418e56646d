"""Explicit region graph of a small system, used as ground truth."""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod
from typing import Callable

from . import formula as F
from .engine import Status, Verdict
from .model import (
    DELTA, Elapse, Stts, Trace, build_combined_encoding, clock_bounds, logic_for, shift,
)
from .regions import (
    RegionSignature, elapse_into, lift_region_cube, region_of, representative, time_successor,
)
from .smt import Session, SolverConfig, SolverError, SolverVerdict

TIME, DISCRETE = "time", "discrete"


class EnumerationBoundExceeded(Exception):
    pass


@dataclass
class RegionGraph:
    bounds: dict
    nodes: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    edges: dict = field(default_factory=dict)  # node -> list of (target, kind)
    initial: set = field(default_factory=set)
    bad: set = field(default_factory=set)

    def add(self, sig: RegionSignature) -> tuple[int, bool]:
        if sig in self.index:
            return self.index[sig], False
        n = len(self.nodes)
        self.nodes.append(sig)
        self.index[sig] = n
        self.edges[n] = []
        return n, True

    def __len__(self) -> int:
        return len(self.nodes)

    def edge_set(self) -> set:
        return {(self.nodes[a], self.nodes[b], k) for a, out in self.edges.items() for b, k in out}

    # -- dumps

    def describe(self, n: int) -> str:
        sig = self.nodes[n]
        disc = " ".join(f"{k}={_show(v)}" for k, v in sig.discrete)
        parts = []
        for c, i in sig.ints:
            if i is None:
                parts.append(f"{c}>{self.bounds[c]}")
            elif sig.frac_zero(c):
                parts.append(f"{c}={i}")
            else:
                parts.append(f"{i}<{c}<{i + 1}")
        order = " < ".join("=".join(sorted(cls)) for cls in sig.classes)
        return " | ".join(x for x in (disc, " ".join(parts), order) if x)

    def to_json(self) -> str:
        return json.dumps({
            "nodes": [{"id": n, "label": self.describe(n), "initial": n in self.initial,
                       "bad": n in self.bad} for n in range(len(self.nodes))],
            "edges": [{"from": a, "to": b, "kind": k}
                      for a, out in self.edges.items() for b, k in out],
        }, indent=1)

    def to_dot(self) -> str:
        out = ["digraph regions {", "  node [shape=box, fontsize=10];"]
        for n in range(len(self.nodes)):
            style = []
            if n in self.initial:
                style.append("penwidth=2")
            if n in self.bad:
                style.append('color=red')
            label = self.describe(n).replace('"', "'")
            out.append(f'  n{n} [label="{label}"{", " if style else ""}{", ".join(style)}];')
        for a, targets in self.edges.items():
            for b, k in targets:
                out.append(f"  n{a} -> n{b}{' [style=dashed]' if k == TIME else ''};")
        out.append("}")
        return "\n".join(out) + "\n"


def _show(v) -> str:
    if isinstance(v, bool):
        return "T" if v else "F"
    return str(v)


def _domain_size(sys: Stts) -> int:
    return prod(2 if v.sort.kind == "bool" else v.sort.hi - v.sort.lo + 1 for v in sys.state_vars)


def _state_equalities(sys: Stts, s: dict) -> F.Node:
    fs = [F.eq_value(x, s[x.name]) for x in sys.state_vars]
    fs += [F.ClockAtom(c, "=", Fraction(s[c.name])) for c in sys.clocks]
    return F.conj(fs)


class _Stepper:
    """Discrete successors (no time elapse) through one solver session."""

    def __init__(self, sys: Stts, solver: SolverConfig):
        self.sys = sys
        enc = build_combined_encoding(sys)
        self.bounds = enc.clock_bounds
        self.vars = [*sys.state_vars, *sys.clocks]
        self.sess = Session(solver, logic_for(sys))
        self.sess.assert_formula(F.conj([
            enc.invar_hat, enc.trans_hat, F.ClockAtom(DELTA, "=", Fraction(0)),
            F.prime(enc.invar_hat),
        ]))

    def cube(self, s: dict) -> F.Node:
        return F.conj(lift_region_cube(s, self.sys.state_vars, self.sys.clocks, self.bounds))

    def _next_state(self) -> dict:
        nv = [v.next() for v in self.vars]
        m = self.sess.get_model(nv)
        return {v.name: m[w.ident] for v, w in zip(self.vars, nv)}

    def successors(self, source: F.Node) -> list[dict]:
        """One concrete successor per successor region of the states in ``source``."""
        s = self.sess
        out = []
        s.push()
        try:
            s.assert_formula(source)
            while True:
                r = s.check()
                if r is SolverVerdict.UNKNOWN:
                    raise SolverError("solver returned unknown")
                if r is SolverVerdict.UNSAT:
                    return out
                u = self._next_state()
                out.append(u)
                s.assert_formula(F.neg(F.prime(self.cube(u))))
        finally:
            s.pop()

    def successor_in(self, s: dict, target: RegionSignature) -> dict | None:
        rep = representative(target, self.bounds)
        sess = self.sess
        sess.push()
        try:
            sess.assert_formula(_state_equalities(self.sys, s))
            sess.assert_formula(F.prime(self.cube(rep)))
            if sess.check() is not SolverVerdict.SAT:
                return None
            return self._next_state()
        finally:
            sess.pop()

    def close(self):
        self.sess.close()


def _initial_states(sys: Stts, solver: SolverConfig) -> list[dict]:
    zero = [F.ClockAtom(c, "=", Fraction(0)) for c in sys.clocks]
    out = []
    with Session(solver, logic_for(sys)) as s:
        s.assert_formula(F.conj([sys.init, sys.invar, *zero]))
        while s.check() is SolverVerdict.SAT:
            m = s.get_model(sys.state_vars)
            st = {x.name: m[x.ident] for x in sys.state_vars}
            for c in sys.clocks:
                st[c.name] = Fraction(0)
            out.append(st)
            if not sys.state_vars:
                break
            s.assert_formula(F.neg(F.conj([F.eq_value(x, st[x.name]) for x in sys.state_vars])))
    return out


def build_region_graph(sys: Stts, solver: SolverConfig | None = None,
                       discrete_enum_bound: int = 1 << 16,
                       pick: Callable[[RegionSignature], dict] | None = None,
                       max_nodes: int | None = None) -> RegionGraph:
    """Forward closure of the initial regions under time successors and discrete steps.

    Discrete successors are computed for the whole region symbolically, or
    from the single concrete state ``pick(region)`` when ``pick`` is given.
    """
    if _domain_size(sys) > discrete_enum_bound:
        raise EnumerationBoundExceeded(
            f"{_domain_size(sys)} discrete valuations exceed the bound {discrete_enum_bound}")
    solver = solver or SolverConfig()
    stepper = _Stepper(sys, solver)
    bounds = stepper.bounds
    g = RegionGraph(dict(bounds))
    work: deque[int] = deque()

    def visit(s: dict) -> int:
        n, new = g.add(region_of(s, bounds))
        if new:
            if max_nodes is not None and len(g) > max_nodes:
                raise EnumerationBoundExceeded(f"more than {max_nodes} regions")
            if not F.evaluate(sys.prop, s):
                g.bad.add(n)
            work.append(n)
        return n

    try:
        for s in _initial_states(sys, solver):
            g.initial.add(visit(s))
        while work:
            n = work.popleft()
            sig = g.nodes[n]
            ts = time_successor(sig, bounds)
            if ts is not None:
                rep = representative(ts, bounds)
                if F.evaluate(sys.invar, rep):
                    g.edges[n].append((visit(rep), TIME))
            here = representative(sig, bounds)
            source = stepper.cube(here) if pick is None else _state_equalities(sys, pick(sig))
            for u in stepper.successors(source):
                m = visit(u)
                if (m, DISCRETE) not in g.edges[n]:
                    g.edges[n].append((m, DISCRETE))
    finally:
        stepper.close()
    return g


def _path_to_bad(g: RegionGraph):
    parent: dict[int, tuple | None] = {n: None for n in g.initial}
    q = deque(sorted(g.initial))
    while q:
        n = q.popleft()
        if n in g.bad:
            path = []
            while parent[n] is not None:
                prev, kind = parent[n]
                path.append((kind, n))
                n = prev
            path.reverse()
            return n, path
        for m, kind in g.edges[n]:
            if m not in parent:
                parent[m] = (n, kind)
                q.append(m)
    return None


def concretize_path(sys: Stts, g: RegionGraph, start: int, path, solver: SolverConfig) -> Trace:
    """Concrete trace following a region path from an initial region."""
    cur = representative(g.nodes[start], g.bounds)
    items: list = [cur]
    stepper = _Stepper(sys, solver)
    try:
        for kind, n in path:
            target = g.nodes[n]
            if kind == TIME:
                t = elapse_into(cur, target, g.bounds)
                if t is None:
                    raise RuntimeError("time successor not reachable by elapse")
                cur = shift(sys, cur, t)
                items += [Elapse(t), cur]
            else:
                nxt = stepper.successor_in(cur, target)
                if nxt is None:
                    raise RuntimeError("discrete successor region not reachable from representative")
                cur = nxt
                items.append(cur)
    finally:
        stepper.close()
    return Trace(items)


def oracle_check(sys: Stts, graph: RegionGraph | None = None,
                 solver: SolverConfig | None = None) -> Verdict:
    solver = solver or SolverConfig()
    t0 = time.perf_counter()
    g = graph if graph is not None else build_region_graph(sys, solver)
    hit = _path_to_bad(g)
    stats = {"regions": len(g), "edges": sum(len(v) for v in g.edges.values())}
    if hit is None:
        return Verdict(Status.HOLDS, "oracle", seconds=time.perf_counter() - t0, stats=stats)
    start, path = hit
    tr = concretize_path(sys, g, start, path, solver)
    return Verdict(Status.VIOLATED, "oracle", len(path), trace=tr,
                   seconds=time.perf_counter() - t0, stats=stats)


def _ordered_partitions(items: list):
    """Ordered set partitions of ``items`` (tuples of frozensets)."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _ordered_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + (part[k] | {first},) + part[k + 1:]
        for k in range(len(part) + 1):
            yield part[:k] + (frozenset([first]),) + part[k:]


def clock_regions(bounds: dict):
    """Every clock-only region signature for the given bounds."""
    names = sorted(bounds)
    for above in product((False, True), repeat=len(names)):
        below = [c for c, a in zip(names, above) if not a]
        for ints in product(*(range(bounds[c] + 1) for c in below)):
            ip = dict(zip(below, ints))
            all_ints = tuple((c, None if a else ip[c]) for c, a in zip(names, above))
            for classes in _ordered_partitions(below):
                for zero_first in ((False, True) if classes else (False,)):
                    # a clock with a fractional part must sit strictly below its bound
                    fractional = classes[1:] if zero_first else classes
                    if any(ip[c] == bounds[c] for cls in fractional for c in cls):
                        continue
                    yield RegionSignature((), all_ints, classes, zero_first)


def count_valid_regions(sys: Stts, discrete_enum_bound: int = 1 << 16) -> int:
    """Number of regions of the region automaton: all regions whose states satisfy Invar.

    Invar is region-respecting, so one representative decides each region.
    """
    if _domain_size(sys) > discrete_enum_bound:
        raise EnumerationBoundExceeded(
            f"{_domain_size(sys)} discrete valuations exceed the bound {discrete_enum_bound}")
    bounds = clock_bounds(sys)
    domains = [(False, True) if v.sort.kind == "bool" else range(v.sort.lo, v.sort.hi + 1)
               for v in sys.state_vars]
    clock_sigs = list(clock_regions(bounds))
    n = 0
    for values in product(*domains):
        disc = dict(zip((v.name for v in sys.state_vars), values))
        for sig in clock_sigs:
            s = representative(sig, bounds)
            s.update(disc)
            if F.evaluate(sys.invar, s):
                n += 1
    return n
