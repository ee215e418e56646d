"""Symbolic timed transition systems: the tuple, step semantics, combined steps, traces."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from . import formula as F
from .formula import Var
from .sexpr import SexprError, Sym, parse_all
from .smt import SolverConfig, SolverVerdict, Session

State = dict  # variable name -> bool | int | Fraction

DELTA = Var("__delta", F.CLOCK)
REF_CLOCK = Var("__cref", F.CLOCK)
RESERVED_PREFIX = "__"


class ModelError(Exception):
    """Invalid model; ``diagnostics`` holds ``(line, col, message)`` triples."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(
            f"{ln}:{col}: {msg}" if ln else msg for ln, col, msg in self.diagnostics
        ))


class ConvexityNotEstablished(Exception):
    pass


@dataclass(frozen=True)
class Stts:
    state_vars: tuple
    clocks: tuple
    init: F.Node = F.TRUE
    invar: F.Node = F.TRUE
    trans: F.Node = F.TRUE
    resets: Mapping[str, F.Node] = field(default_factory=dict)
    prop: F.Node = F.TRUE
    name: str = ""
    convex: bool = False  # set once the load-time invariant checks passed

    def reset(self, clock: str) -> F.Node:
        return self.resets.get(clock, F.FALSE)

    @property
    def env(self) -> dict[str, Var]:
        return {v.name: v for v in (*self.state_vars, *self.clocks)}

    @property
    def untimed(self) -> bool:
        return not self.clocks

    def with_property(self, prop: F.Node) -> "Stts":
        return dataclasses.replace(self, prop=prop)

    def formulas(self) -> Iterable[F.Node]:
        yield self.init
        yield self.invar
        yield self.trans
        yield from self.resets.values()
        yield self.prop


# ---------------------------------------------------------------- validation


def validate(sys: Stts) -> list[str]:
    """Structural problems with ``sys``; an empty list means well formed."""
    errs = []
    names = [v.name for v in (*sys.state_vars, *sys.clocks)]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        errs.append(f"duplicate variable names: {sorted(dup)}")
    for v in sys.state_vars:
        if v.sort.kind not in ("bool", "int"):
            errs.append(f"state variable {v.name} must be bool or bounded int")
    for c in sys.clocks:
        if not c.is_clock:
            errs.append(f"{c.name} declared as clock has sort {c.sort}")
    known = set(names)
    for c in sys.resets:
        if c not in {k.name for k in sys.clocks}:
            errs.append(f"reset given for unknown clock {c}")

    def check(label: str, f: F.Node, primes: bool, clocks: bool):
        for v in F.variables(f):
            if v.name not in known:
                errs.append(f"{label}: unknown variable {v.name}")
            if v.step is not None:
                errs.append(f"{label}: step-indexed variable {v.ident}")
            if v.primed and (not primes or v.is_clock):
                errs.append(f"{label}: next-state variable {v.name} not allowed here")
            if v.is_clock and not clocks:
                errs.append(f"{label}: clock {v.name} not allowed here")
        for atom in F.check_clock_restriction(f):
            errs.append(f"{label}: clock atom {F.to_text(atom)} is not of the form c op n (n integer)")

    check("init", sys.init, False, False)
    check("invar", sys.invar, False, True)
    check("trans", sys.trans, True, True)
    for c, r in sys.resets.items():
        check(f"reset {c}", r, True, True)
    check("property", sys.prop, False, True)
    return errs


def clock_max(sys: Stts, clock: str) -> int:
    """Largest constant ``clock`` is compared against in invar, trans, resets or the property."""
    best = 0
    for f in (sys.invar, sys.trans, *sys.resets.values(), sys.prop):
        for a in F.clock_atoms(f):
            if a.clock.name == clock:
                best = max(best, int(a.const))
    return best


def clock_bounds(sys: Stts) -> dict[str, int]:
    return {c.name: clock_max(sys, c.name) for c in sys.clocks}


# ---------------------------------------------------------------- semantics


def shift(sys: Stts, s: State, delta) -> State:
    """The state ``s + delta``."""
    out = dict(s)
    for c in sys.clocks:
        out[c.name] = s[c.name] + delta
    return out


def is_valid(sys: Stts, s: State) -> bool:
    return F.evaluate(sys.invar, s)


def joint(s: State, u: State) -> dict:
    """Interpretation over current and next-state variables."""
    out = dict(s)
    out.update({k + "'": v for k, v in u.items()})
    return out


def check_discrete_step(sys: Stts, s: State, u: State) -> bool:
    if not (is_valid(sys, s) and is_valid(sys, u)):
        return False
    gamma = joint(s, u)
    if not F.evaluate(sys.trans, gamma):
        return False
    for c in sys.clocks:
        want = 0 if F.evaluate(sys.reset(c.name), gamma) else s[c.name]
        if u[c.name] != want:
            return False
    return True


def check_time_elapse(sys: Stts, s: State, delta) -> bool:
    """Time elapse of ``delta`` from valid ``s``; intermediate states follow by convexity."""
    if not sys.convex:
        raise ConvexityNotEstablished("run prepare() / check_convexity() first")
    delta = Fraction(delta)
    if delta < 0 or not is_valid(sys, s):
        return False
    return is_valid(sys, shift(sys, s, delta))


def is_initial(sys: Stts, s: State) -> bool:
    return (all(s[c.name] == 0 for c in sys.clocks)
            and F.evaluate(sys.init, s) and is_valid(sys, s))


# ---------------------------------------------------------------- load-time checks


def _invar_copy(sys: Stts, k: int) -> F.Node:
    """Invar with clocks renamed to copy ``k`` and state variables to copy 0."""
    return F.map_vars(sys.invar, lambda v: v.at(k) if v.is_clock else v.at(0))


def _clock_copies(sys: Stts, offsets: dict[int, Var]) -> list[F.Node]:
    out = [F.ClockAtom(c.at(0), ">=", Fraction(0)) for c in sys.clocks]
    for k, d in offsets.items():
        out.append(F.ClockAtom(d, ">=", Fraction(0)))
        for c in sys.clocks:
            out.append(F.ShiftAtom(c.at(k), c.at(0), d))
    return out


def _witness(sys: Stts, model: Mapping, extra: Iterable[Var]) -> dict:
    w = {v.name: model[v.at(0).ident] for v in (*sys.state_vars, *sys.clocks)}
    for v in extra:
        w[v.name] = model[v.ident]
    return w


@dataclass
class ConvexityResult:
    convex: bool
    state: State | None = None
    eta: Fraction | None = None
    delta: Fraction | None = None


def check_convexity(sys: Stts, cfg: SolverConfig) -> ConvexityResult:
    """One query: is there s with Invar(s), Invar(s+delta), not Invar(s+eta), 0 <= eta <= delta?"""
    if not sys.clocks:
        return ConvexityResult(True)
    eta, delta = Var("eta", F.CLOCK), Var("delta", F.CLOCK)
    fs = _clock_copies(sys, {1: eta, 2: delta})
    fs += [F.DiffAtom(eta, "<=", delta, Fraction(0)),
           _invar_copy(sys, 0), F.neg(_invar_copy(sys, 1)), _invar_copy(sys, 2)]
    with Session(cfg, _logic(sys)) as s:
        s.assert_formula(F.conj(fs))
        r = s.check()
        if r is SolverVerdict.UNKNOWN:
            raise ModelError([(0, 0, "convexity check returned unknown")])
        if r is SolverVerdict.UNSAT:
            return ConvexityResult(True)
        m = s.get_model([v.at(0) for v in (*sys.state_vars, *sys.clocks)] + [eta, delta])
    w = _witness(sys, m, ())
    return ConvexityResult(False, w, m[eta.ident], m[delta.ident])


def check_past_closed(sys: Stts, cfg: SolverConfig) -> ConvexityResult:
    """Whether Invar(s + delta) implies Invar(s) for non-negative clocks.

    The combined-step encoding never evaluates the invariant in the state
    between a discrete step and the following time elapse, nor in the initial
    state before the leading elapse; both are sound only under this closure.
    """
    if not sys.clocks:
        return ConvexityResult(True)
    delta = Var("delta", F.CLOCK)
    fs = _clock_copies(sys, {1: delta}) + [F.neg(_invar_copy(sys, 0)), _invar_copy(sys, 1)]
    with Session(cfg, _logic(sys)) as s:
        s.assert_formula(F.conj(fs))
        r = s.check()
        if r is SolverVerdict.UNKNOWN:
            raise ModelError([(0, 0, "invariant closure check returned unknown")])
        if r is SolverVerdict.UNSAT:
            return ConvexityResult(True)
        m = s.get_model([v.at(0) for v in (*sys.state_vars, *sys.clocks)] + [delta])
    return ConvexityResult(False, _witness(sys, m, ()), None, m[delta.ident])


def prepare(sys: Stts, cfg: SolverConfig) -> Stts:
    """Validate ``sys`` and run the mandatory invariant checks; returns the certified system."""
    errs = validate(sys)
    if errs:
        raise ModelError([(0, 0, e) for e in errs])
    res = check_convexity(sys, cfg)
    if not res.convex:
        raise ModelError([(0, 0, f"invariant is not convex: state {fmt_state(res.state)} "
                                 f"eta={res.eta} delta={res.delta}")])
    res = check_past_closed(sys, cfg)
    if not res.convex:
        raise ModelError([(0, 0, f"invariant is not closed under time predecessors: "
                                 f"state {fmt_state(res.state)} delta={res.delta}")])
    return dataclasses.replace(sys, convex=True)


def _logic(sys: Stts) -> str:
    return "QF_LIRA" if any(v.sort.kind == "int" for v in sys.state_vars) else "QF_LRA"


# ---------------------------------------------------------------- combined steps


@dataclass(frozen=True)
class CombinedEncoding:
    init_hat: F.Node
    invar_hat: F.Node
    trans_hat: F.Node
    delta: Var
    ref_clock: Var
    clock_bounds: Mapping[str, int]


def build_combined_encoding(sys: Stts) -> CombinedEncoding:
    if not sys.convex:
        raise ConvexityNotEstablished("run prepare() first")
    init_hat = F.conj([sys.init] + [F.DiffAtom(c, "=", REF_CLOCK, Fraction(0)) for c in sys.clocks])
    invar_hat = F.conj([sys.invar] + [F.ClockAtom(c, ">=", Fraction(0)) for c in sys.clocks])
    parts = [sys.trans, F.ClockAtom(DELTA, ">=", Fraction(0))]
    for c in sys.clocks:
        r = sys.reset(c.name)
        parts.append(F.implies(r, F.DiffAtom(c.next(), "=", DELTA, Fraction(0))))
        parts.append(F.implies(F.neg(r), F.ShiftAtom(c.next(), c, DELTA)))
    return CombinedEncoding(init_hat, invar_hat, F.conj(parts), DELTA, REF_CLOCK, clock_bounds(sys))


def logic_for(sys: Stts, split: bool = False) -> str:
    return "QF_LIRA" if split else _logic(sys)


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class Elapse:
    delay: Fraction


TraceItem = Union[dict, Elapse]


@dataclass
class Trace:
    """A semantic path: states separated by optional elapse markers.

    Two consecutive states are a discrete step; ``state, Elapse(d), state`` is
    a time elapse of ``d``. The first state is initial and the last one is the
    state the trace is about (a property violation for counterexamples).
    """

    items: list = field(default_factory=list)

    @property
    def states(self) -> list[State]:
        return [x for x in self.items if isinstance(x, dict)]

    @property
    def final(self) -> State:
        return self.items[-1]

    @property
    def discrete_steps(self) -> int:
        n = 0
        for a, b in zip(self.items, self.items[1:]):
            if isinstance(a, dict) and isinstance(b, dict):
                n += 1
        return n

    def __len__(self) -> int:
        return len(self.items)


def replay_trace(sys: Stts, tr: Trace, check_violation: bool = True) -> int | None:
    """Index of the first item that breaks the semantics, or None when the trace replays."""
    items = tr.items
    if not items or not isinstance(items[0], dict):
        return 0
    first = items[0]
    i = 0
    try:
        if not is_initial(sys, first):
            return 0
        prev = first
        i = 1
        while i < len(items):
            it = items[i]
            if isinstance(it, Elapse):
                if i + 1 >= len(items) or not isinstance(items[i + 1], dict):
                    return i
                nxt = items[i + 1]
                if nxt != shift(sys, prev, it.delay) or not check_time_elapse(sys, prev, it.delay):
                    return i + 1
                prev = nxt
                i += 2
            else:
                if not check_discrete_step(sys, prev, it):
                    return i
                prev = it
                i += 1
        if check_violation and F.evaluate(sys.prop, prev):
            return len(items) - 1
    except F.FormulaError:
        return i
    return None


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return F.fmt_number(v)


def fmt_state(s: Mapping) -> str:
    if s is None:
        return "-"
    return "(" + " ".join(f"({k} {fmt_value(v)})" for k, v in sorted(s.items())) + ")"


def format_trace(tr: Trace) -> str:
    lines = []
    for it in tr.items:
        if isinstance(it, Elapse):
            lines.append(f"(elapse {F.fmt_number(it.delay)})")
        else:
            lines.append(f"(state {fmt_state(it)})")
    return "\n".join(lines) + "\n"


def parse_trace(text: str, sys: Stts) -> Trace:
    sorts = {v.name: v.sort for v in (*sys.state_vars, *sys.clocks)}
    items: list = []
    for e in parse_all(text):
        head = e[0].name if e and isinstance(e[0], Sym) else ""
        if head == "elapse" and len(e) == 2:
            items.append(Elapse(F.parse_number(e[1])))
        elif head == "state" and len(e) == 2:
            s = {}
            for pair in e[1]:
                name = pair[0].name
                if name not in sorts:
                    raise SexprError(f"unknown variable {name} in trace", pair.line, pair.col)
                raw = pair[1]
                if sorts[name].kind == "bool":
                    s[name] = raw.name == "true"
                elif sorts[name].kind == "int":
                    s[name] = int(F.parse_number(raw))
                else:
                    s[name] = F.parse_number(raw)
            items.append(s)
        else:
            raise SexprError("expected (state ...) or (elapse ...)", getattr(e, "line", 0), getattr(e, "col", 0))
    return Trace(items)


# ---------------------------------------------------------------- model files


def _diag(e, msg):
    return (getattr(e, "line", 0), getattr(e, "col", 0), msg)


def parse_model(data: bytes | str) -> Stts:
    """Parse and validate an ``(stts ...)`` model file."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        exprs = parse_all(text)
    except SexprError as exc:
        raise ModelError([(exc.line, exc.col, str(exc))]) from None
    if len(exprs) != 1 or not isinstance(exprs[0], list) or not exprs[0] \
            or not isinstance(exprs[0][0], Sym) or exprs[0][0].name != "stts":
        raise ModelError([(1, 1, "expected a single (stts ...) form")])
    top = exprs[0]
    sections: dict[str, list] = {}
    name = ""
    for sec in top[1:]:
        if not isinstance(sec, list) or not sec or not isinstance(sec[0], Sym):
            raise ModelError([_diag(sec, "expected a (section ...) form")])
        key = sec[0].name
        if key in sections:
            raise ModelError([_diag(sec, f"duplicate section '{key}'")])
        if key not in ("name", "vars", "clocks", "init", "invar", "trans", "reset", "property"):
            raise ModelError([_diag(sec, f"unknown section '{key}'")])
        sections[key] = sec
    if "name" in sections:
        name = " ".join(str(x) for x in sections["name"][1:]).strip('"')

    state_vars, clocks = [], []
    for decl in sections.get("vars", [None])[1:]:
        if not isinstance(decl, list) or len(decl) < 2 or not all(isinstance(x, Sym) for x in decl):
            raise ModelError([_diag(decl, "expected (name bool) or (name int lo hi)")])
        vname, kind = decl[0].name, decl[1].name
        if vname.startswith(RESERVED_PREFIX):
            raise ModelError([_diag(decl, f"names starting with {RESERVED_PREFIX} are reserved")])
        if kind == "bool" and len(decl) == 2:
            state_vars.append(Var(vname, F.BOOL))
        elif kind == "int" and len(decl) == 4:
            try:
                lo, hi = int(decl[2].name), int(decl[3].name)
                state_vars.append(Var(vname, F.bounded_int(lo, hi)))
            except ValueError:
                raise ModelError([_diag(decl, "bad int range")]) from None
        else:
            raise ModelError([_diag(decl, f"unknown sort for {vname}")])
    for c in sections.get("clocks", [None])[1:]:
        if not isinstance(c, Sym):
            raise ModelError([_diag(c, "clock names must be symbols")])
        if c.name.startswith(RESERVED_PREFIX):
            raise ModelError([_diag(c, f"names starting with {RESERVED_PREFIX} are reserved")])
        clocks.append(Var(c.name, F.CLOCK))
    env = {v.name: v for v in (*state_vars, *clocks)}
    parser = F.FormulaParser(env)

    def formula_of(key: str) -> F.Node:
        sec = sections.get(key)
        if sec is None:
            return F.TRUE
        if len(sec) != 2:
            raise ModelError([_diag(sec, f"'{key}' takes exactly one formula")])
        try:
            return parser.formula(sec[1])
        except SexprError as exc:
            raise ModelError([(exc.line, exc.col, f"{key}: {exc}")]) from None

    resets = {}
    for r in sections.get("reset", [None])[1:]:
        if not isinstance(r, list) or len(r) != 2 or not isinstance(r[0], Sym):
            raise ModelError([_diag(r, "expected (clock formula)")])
        if r[0].name not in {c.name for c in clocks}:
            raise ModelError([_diag(r, f"reset for unknown clock '{r[0].name}'")])
        try:
            resets[r[0].name] = parser.formula(r[1])
        except SexprError as exc:
            raise ModelError([(exc.line, exc.col, f"reset {r[0].name}: {exc}")]) from None

    sys = Stts(tuple(state_vars), tuple(clocks), formula_of("init"), formula_of("invar"),
               formula_of("trans"), resets, formula_of("property"), name)
    errs = validate(sys)
    if errs:
        line = getattr(top, "line", 1)
        raise ModelError([(line, 1, e) for e in errs])
    return sys


def format_model(sys: Stts) -> str:
    def decl(v: Var) -> str:
        return f"({v.name} bool)" if v.sort.kind == "bool" else f"({v.name} int {v.sort.lo} {v.sort.hi})"

    out = ["(stts"]
    if sys.name:
        out.append(f'  (name "{sys.name}")')
    out.append("  (vars " + " ".join(decl(v) for v in sys.state_vars) + ")")
    out.append("  (clocks " + " ".join(c.name for c in sys.clocks) + ")")
    out.append(f"  (init {F.to_text(sys.init)})")
    out.append(f"  (invar {F.to_text(sys.invar)})")
    out.append(f"  (trans {F.to_text(sys.trans)})")
    out.append("  (reset " + " ".join(f"({c} {F.to_text(r)})" for c, r in sys.resets.items()) + ")")
    out.append(f"  (property {F.to_text(sys.prop)}))")
    return "\n".join(out) + "\n"
