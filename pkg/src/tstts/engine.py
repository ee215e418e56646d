"""Shared engine plumbing: verdicts, step unrolling and trace reconstruction."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import formula as F
from .formula import Var
from .model import CombinedEncoding, Elapse, Stts, Trace, build_combined_encoding, logic_for
from .splitting import frac_part, int_part, split_clocks_rewrite


class Status(enum.Enum):
    HOLDS = "HOLDS"
    VIOLATED = "VIOLATED"
    UNKNOWN = "UNKNOWN"
    NO_CEX = "NO_CEX"  # bounded search exhausted without a counterexample

    @property
    def definitive(self) -> bool:
        return self in (Status.HOLDS, Status.VIOLATED)


@dataclass
class Verdict:
    status: Status
    engine: str
    k: int | None = None
    trace: Trace | None = None
    certificate: F.Node | None = None
    reason: str = ""
    queries: int = 0
    seconds: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def violated(self) -> bool:
        return self.status is Status.VIOLATED

    def report(self) -> str:
        shown = "UNKNOWN" if self.status is Status.NO_CEX else self.status.value
        lines = [f"VERDICT={shown}", f"engine={self.engine}"]
        if self.k is not None:
            lines.append(f"k={self.k}")
        if self.status is Status.NO_CEX:
            lines.append(f"reason=no counterexample up to bound {self.k}")
        elif self.reason:
            lines.append(f"reason={self.reason}")
        lines.append(f"queries={self.queries}")
        lines.append(f"time={self.seconds:.3f}")
        return "\n".join(lines) + "\n"


class Unroller:
    """Step-indexed copies of the combined-step formulas.

    With ``split=True`` every clock (including the elapse and reference
    clocks) is replaced by its integer and fractional parts.
    """

    def __init__(self, sys: Stts, enc: CombinedEncoding | None = None, split: bool = False):
        self.sys = sys
        self.enc = enc or build_combined_encoding(sys)
        self.split = split
        self.logic = logic_for(sys, split)
        self._cache: dict = {}

    def _inst(self, key, f: F.Node, i: int) -> F.Node:
        k = (key, i)
        if k not in self._cache:
            g = F.instantiate_at_step(f, i)
            self._cache[k] = split_clocks_rewrite(g) if self.split else g
        return self._cache[k]

    def init(self) -> F.Node:
        return self._inst("init", self.enc.init_hat, 0)

    def invar(self, i: int) -> F.Node:
        return self._inst("invar", self.enc.invar_hat, i)

    def trans(self, i: int) -> F.Node:
        return self._inst("trans", self.enc.trans_hat, i)

    def prop(self, i: int) -> F.Node:
        return self._inst("prop", self.sys.prop, i)

    def at(self, f: F.Node, i: int) -> F.Node:
        """Any formula over current variables, placed at step ``i``."""
        g = F.instantiate_at_step(f, i)
        return split_clocks_rewrite(g) if self.split else g

    # -- model reading

    def _clock_vars(self, c: Var, i: int) -> list[Var]:
        v = c.at(i)
        return [int_part(v), frac_part(v)] if self.split else [v]

    def symbols(self, n: int) -> list[Var]:
        """Everything needed to rebuild a trace over steps ``0..n``."""
        out = []
        for i in range(n + 1):
            out += [x.at(i) for x in self.sys.state_vars]
            for c in self.sys.clocks:
                out += self._clock_vars(c, i)
            if i < n:
                out += self._clock_vars(self.enc.delta, i)
        out += self._clock_vars(self.enc.ref_clock, 0)
        return out

    def _clock_value(self, m: Mapping, c: Var, i: int) -> Fraction:
        if self.split:
            v = c.at(i)
            return Fraction(m[int_part(v).ident]) + m[frac_part(v).ident]
        return Fraction(m[c.at(i).ident])

    def state(self, m: Mapping, i: int) -> dict:
        s = {x.name: m[x.at(i).ident] for x in self.sys.state_vars}
        for c in self.sys.clocks:
            s[c.name] = self._clock_value(m, c, i)
        return s

    def trace(self, m: Mapping, n: int) -> Trace:
        states = [self.state(m, i) for i in range(n + 1)]
        deltas = [self._clock_value(m, self.enc.delta, i) for i in range(n)]
        ref = self._clock_value(m, self.enc.ref_clock, 0) if self.sys.clocks else Fraction(0)
        return combined_trace(self.sys, states, deltas, ref)


def combined_trace(sys: Stts, states: Sequence[dict], deltas: Sequence[Fraction],
                   ref: Fraction) -> Trace:
    """Semantic trace for a combined-step path ``states`` with elapse values ``deltas``.

    The path starts at an initial-elapse state reached after ``ref`` time
    units; every later step is a discrete step followed by an elapse.
    """
    clocks = [c.name for c in sys.clocks]
    first = dict(states[0])
    for c in clocks:
        first[c] = Fraction(0)
    items: list = [first]
    if clocks:
        items += [Elapse(Fraction(ref)), dict(states[0])]
    for i, d in enumerate(deltas):
        nxt = states[i + 1]
        mid = dict(nxt)
        for c in clocks:
            mid[c] = nxt[c] - d
        items.append(mid)
        if clocks:
            items += [Elapse(Fraction(d)), dict(nxt)]
    return Trace(items)
