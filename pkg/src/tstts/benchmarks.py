"""Model generators: the timer example, Fischer's protocol, random clause properties."""

from __future__ import annotations

import random
from fractions import Fraction

from . import formula as F
from .model import Stts, clock_bounds, parse_model

TIMER = """\
; Timer: a rising edge on input x1 starts the timer (x2) and resets d;
; the timer stays on while d < 2 and must switch off by d = 2.
(stts
  (name "timer")
  (vars (x1 bool) (x2 bool))
  (clocks d)
  (init (not x2))
  (invar (=> x2 (<= d 2)))
  (trans (= (next x2) (or (and (not x1) (next x1)) (and x2 (< d 2)))))
  (reset (d (and (not x1) (next x1))))
  (property (=> x2 (<= d 3))))
"""


def timer(prop: str | None = None) -> Stts:
    sys = parse_model(TIMER)
    if prop is not None:
        sys = sys.with_property(F.parse_formula(prop, sys.env))
    return sys


IDLE, REQ, WAIT, CS = range(4)


def fischer_text(n: int, buggy: bool = False) -> str:
    """Fischer's mutual exclusion protocol for ``n`` processes.

    Process i: idle -(lock = 0, x_i := 0)-> req -(x_i <= 1, lock := i, x_i := 0)-> wait
    -(lock = i, x_i >= 2)-> cs -(lock := 0)-> idle, and wait -(lock != i)-> idle.
    Location req carries the invariant x_i <= 1 (write deadline 1); the read
    delay "strictly more than 1" becomes x_i >= 2 after scaling to integers.
    ``buggy`` lowers the read delay to x_i >= 1, which breaks mutual exclusion.
    Steps interleave: exactly one process moves per discrete step.
    """
    if n < 2:
        raise ValueError("fischer needs at least two processes")
    wait = 1 if buggy else 2
    procs = range(1, n + 1)

    def keep(j: int) -> str:
        return f"(= (next l{j}) l{j})"

    moves = []
    resets = []
    for i in procs:
        others = " ".join(keep(j) for j in procs if j != i)
        same_lock = "(= (next lock) lock)"
        edges = [
            f"(and (= l{i} {IDLE}) (= lock 0) (= (next l{i}) {REQ}) {same_lock})",
            f"(and (= l{i} {REQ}) (<= x{i} 1) (= (next l{i}) {WAIT}) (= (next lock) {i}))",
            f"(and (= l{i} {WAIT}) (= lock {i}) (>= x{i} {wait}) (= (next l{i}) {CS}) {same_lock})",
            f"(and (= l{i} {WAIT}) (distinct lock {i}) (= (next l{i}) {IDLE}) {same_lock})",
            f"(and (= l{i} {CS}) (= (next l{i}) {IDLE}) (= (next lock) 0))",
        ]
        moves.append(f"(and (or {' '.join(edges)}) {others})")
        resets.append(
            f"(x{i} (or (and (= l{i} {IDLE}) (= (next l{i}) {REQ})) "
            f"(and (= l{i} {REQ}) (= (next l{i}) {WAIT}))))"
        )
    mutex = [f"(not (and (= l{i} {CS}) (= l{j} {CS})))" for i in procs for j in procs if i < j]
    lines = [
        f"; Fischer mutual exclusion, {n} processes{' (buggy read delay)' if buggy else ''}",
        "; locations: 0 idle, 1 req, 2 wait, 3 cs",
        "(stts",
        f'  (name "fischer{n}{"-buggy" if buggy else ""}")',
        "  (vars " + " ".join(f"(l{i} int 0 3)" for i in procs) + f" (lock int 0 {n}))",
        "  (clocks " + " ".join(f"x{i}" for i in procs) + ")",
        "  (init (and " + " ".join(f"(= l{i} 0)" for i in procs) + " (= lock 0)))",
        "  (invar (and " + " ".join(f"(=> (= l{i} {REQ}) (<= x{i} 1))" for i in procs) + "))",
        "  (trans (or\n    " + "\n    ".join(moves) + "))",
        "  (reset " + " ".join(resets) + ")",
        "  (property (and " + " ".join(mutex) + ")))",
    ]
    return "\n".join(lines) + "\n"


def fischer(n: int, buggy: bool = False) -> Stts:
    return parse_model(fischer_text(n, buggy))


# ---------------------------------------------------------------- random properties


def _atoms(sys: Stts, rng: random.Random) -> list[F.Node]:
    out: list[F.Node] = []
    for v in sys.state_vars:
        if v.sort.kind == "bool":
            out.append(v)
        else:
            out.append(F.Cmp(rng.choice(["=", "<=", ">="]), v, F.num(rng.randint(v.sort.lo, v.sort.hi))))
    bounds = clock_bounds(sys)
    for c in sys.clocks:
        m = bounds[c.name]
        out.append(F.ClockAtom(c, rng.choice(["<", "<=", "=", ">=", ">"]),
                               Fraction(rng.randint(0, m + 1))))
    return out


def random_clause(sys: Stts, rng: random.Random, width: int = 3) -> F.Node:
    """A disjunction of ``width`` random literals over distinct variables of ``sys``."""
    atoms = _atoms(sys, rng)
    picked = rng.sample(atoms, min(width, len(atoms)))
    return F.disj(a if rng.random() < 0.5 else F.neg(a) for a in picked)


def random_properties(sys: Stts, count: int, seed: int = 0, width: int = 3) -> list[F.Node]:
    rng = random.Random(seed)
    return [random_clause(sys, rng, width) for _ in range(count)]


def random_props_text(sys: Stts, count: int, seed: int = 0) -> str:
    return "".join(F.to_text(p) + "\n" for p in random_properties(sys, count, seed))

