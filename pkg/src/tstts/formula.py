"""Typed formula AST over state variables, clocks and next-state variables.

Values in interpretations are ``bool``, ``int`` or :class:`fractions.Fraction`.
Floats are rejected for clocks: region classification needs exact
fractional parts.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

from .sexpr import SexprError, Sym, parse_one

# ---------------------------------------------------------------- sorts


@dataclass(frozen=True)
class Sort:
    kind: str  # "bool" | "int" | "clock" | "integer" | "real"
    lo: int | None = None
    hi: int | None = None

    def __post_init__(self):
        if self.kind == "int" and (self.lo is None or self.hi is None or self.lo > self.hi):
            raise ValueError(f"bad bounded int range [{self.lo}, {self.hi}]")

    @property
    def numeric(self) -> bool:
        return self.kind != "bool"

    @property
    def is_real(self) -> bool:
        return self.kind in ("clock", "real", "frac")

    def __str__(self) -> str:
        if self.kind == "int":
            return f"int {self.lo} {self.hi}"
        return self.kind


BOOL = Sort("bool")
CLOCK = Sort("clock")
# sorts used by the split-clock encoding only: integer parts are naturals,
# fractional parts live in [0, 1)
INTEGER = Sort("integer")
NAT = Sort("integer", 0)
REAL = Sort("real")
FRAC = Sort("frac")


def bounded_int(lo: int, hi: int) -> Sort:
    return Sort("int", lo, hi)


# ---------------------------------------------------------------- nodes


class Node:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Var(Node):
    name: str
    sort: Sort
    primed: bool = False
    step: int | None = None

    @property
    def ident(self) -> str:
        """Key of this variable in an interpretation."""
        s = self.name + ("'" if self.primed else "")
        return s if self.step is None else f"{s}@{self.step}"

    @property
    def is_clock(self) -> bool:
        return self.sort.kind == "clock"

    def next(self) -> "Var":
        return Var(self.name, self.sort, True, self.step)

    def current(self) -> "Var":
        return Var(self.name, self.sort, False, self.step)

    def at(self, step: int | None) -> "Var":
        return Var(self.name, self.sort, False, step)


@dataclass(frozen=True)
class Num(Node):
    value: Fraction


@dataclass(frozen=True)
class Add(Node):
    args: tuple


@dataclass(frozen=True)
class Scale(Node):
    coef: Fraction
    term: Node


Term = Union[Var, Num, Add, Scale]


@dataclass(frozen=True)
class BoolConst(Node):
    value: bool


@dataclass(frozen=True)
class Not(Node):
    arg: Node


@dataclass(frozen=True)
class And(Node):
    args: tuple


@dataclass(frozen=True)
class Or(Node):
    args: tuple


@dataclass(frozen=True)
class Implies(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Iff(Node):
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Cmp(Node):
    """Arithmetic comparison between two terms."""

    op: str
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class ClockAtom(Node):
    """``clock op const``; ``const`` must be an integer in user models."""

    clock: Var
    op: str
    const: Fraction


@dataclass(frozen=True)
class DiffAtom(Node):
    """``lhs op rhs + const`` between two clocks (lifted cubes only)."""

    lhs: Var
    op: str
    rhs: Var
    const: Fraction


@dataclass(frozen=True)
class ShiftAtom(Node):
    """``target = source + delta``, the time-elapse update of a clock."""

    target: Var
    source: Var
    delta: Var


TRUE = BoolConst(True)
FALSE = BoolConst(False)

OPS = ("<", "<=", "=", ">=", ">", "distinct")
_CMP: dict[str, Callable] = {
    "<": operator.lt,
    "<=": operator.le,
    "=": operator.eq,
    ">=": operator.ge,
    ">": operator.gt,
    "distinct": operator.ne,
}
FLIP = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<", "distinct": "distinct"}
NEGATE = {"<": ">=", "<=": ">", "=": "distinct", ">=": "<", ">": "<=", "distinct": "="}


class FormulaError(Exception):
    pass


class UnassignedVariable(FormulaError, KeyError):
    pass


class SortMismatch(FormulaError, TypeError):
    pass


# ---------------------------------------------------------------- builders


def conj(args: Iterable[Node]) -> Node:
    out = []
    for a in args:
        if a == TRUE:
            continue
        if a == FALSE:
            return FALSE
        if isinstance(a, And):
            out.extend(a.args)
        else:
            out.append(a)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(args: Iterable[Node]) -> Node:
    out = []
    for a in args:
        if a == FALSE:
            continue
        if a == TRUE:
            return TRUE
        if isinstance(a, Or):
            out.extend(a.args)
        else:
            out.append(a)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def neg(f: Node) -> Node:
    if isinstance(f, BoolConst):
        return BoolConst(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(a: Node, b: Node) -> Node:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return Implies(a, b)


def num(v) -> Num:
    return Num(Fraction(v))


def add(*terms) -> Node:
    parts = []
    const = Fraction(0)
    for t in terms:
        if isinstance(t, (int, Fraction)):
            const += t
        elif isinstance(t, Num):
            const += t.value
        elif isinstance(t, Add):
            parts.extend(t.args)
        else:
            parts.append(t)
    if const:
        parts.append(Num(const))
    if not parts:
        return Num(Fraction(0))
    return parts[0] if len(parts) == 1 else Add(tuple(parts))


def sub(a, b) -> Node:
    if isinstance(b, (int, Fraction)):
        return add(a, -Fraction(b))
    if isinstance(b, Num):
        return add(a, -b.value)
    return add(a, Scale(Fraction(-1), b))


def cmp(op: str, lhs, rhs) -> Node:
    if isinstance(lhs, (int, Fraction)):
        lhs = num(lhs)
    if isinstance(rhs, (int, Fraction)):
        rhs = num(rhs)
    return Cmp(op, lhs, rhs)


def eq_value(v: Var, value) -> Node:
    """Literal fixing ``v`` to ``value``."""
    if v.sort.kind == "bool":
        return v if value else Not(v)
    return Cmp("=", v, num(value))


# ---------------------------------------------------------------- traversal


def children(f: Node) -> tuple:
    if isinstance(f, (And, Or, Add)):
        return f.args
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Scale):
        return (f.term,)
    if isinstance(f, (Implies, Iff, Cmp)):
        return (f.lhs, f.rhs)
    return ()


def variables(f: Node) -> set[Var]:
    out: set[Var] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g)
        elif isinstance(g, ClockAtom):
            out.add(g.clock)
        elif isinstance(g, DiffAtom):
            out.update((g.lhs, g.rhs))
        elif isinstance(g, ShiftAtom):
            out.update((g.target, g.source, g.delta))
        else:
            stack.extend(children(g))
    return out


def map_vars(f: Node, fn: Callable[[Var], Var]) -> Node:
    """Rename every variable occurrence through ``fn``."""
    if isinstance(f, Var):
        return fn(f)
    if isinstance(f, (BoolConst, Num)):
        return f
    if isinstance(f, Not):
        return Not(map_vars(f.arg, fn))
    if isinstance(f, And):
        return And(tuple(map_vars(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(map_vars(a, fn) for a in f.args))
    if isinstance(f, Add):
        return Add(tuple(map_vars(a, fn) for a in f.args))
    if isinstance(f, Scale):
        return Scale(f.coef, map_vars(f.term, fn))
    if isinstance(f, Implies):
        return Implies(map_vars(f.lhs, fn), map_vars(f.rhs, fn))
    if isinstance(f, Iff):
        return Iff(map_vars(f.lhs, fn), map_vars(f.rhs, fn))
    if isinstance(f, Cmp):
        return Cmp(f.op, map_vars(f.lhs, fn), map_vars(f.rhs, fn))
    if isinstance(f, ClockAtom):
        return ClockAtom(fn(f.clock), f.op, f.const)
    if isinstance(f, DiffAtom):
        return DiffAtom(fn(f.lhs), f.op, fn(f.rhs), f.const)
    if isinstance(f, ShiftAtom):
        return ShiftAtom(fn(f.target), fn(f.source), fn(f.delta))
    raise TypeError(f"not a formula node: {f!r}")


def instantiate_at_step(f: Node, i: int) -> Node:
    """Rename current variables to step ``i`` and next-state variables to ``i + 1``."""

    def ren(v: Var) -> Var:
        return Var(v.name, v.sort, False, i + 1 if v.primed else i)

    return map_vars(f, ren)


def prime(f: Node) -> Node:
    """Move a formula over current variables to the next-state copies."""
    return map_vars(f, lambda v: v.next())


def unstep(f: Node, i: int) -> Node:
    """Inverse of :func:`instantiate_at_step` for step ``i``."""

    def ren(v: Var) -> Var:
        if v.step == i:
            return Var(v.name, v.sort)
        if v.step == i + 1:
            return Var(v.name, v.sort, True)
        raise ValueError(f"{v.ident} is not at step {i} or {i + 1}")

    return map_vars(f, ren)


# ---------------------------------------------------------------- evaluation


def _value(v: Var, itp: Mapping):
    try:
        val = itp[v.ident]
    except KeyError:
        raise UnassignedVariable(v.ident) from None
    k = v.sort.kind
    if k == "bool":
        if not isinstance(val, bool):
            raise SortMismatch(f"{v.ident}: expected bool, got {val!r}")
    elif isinstance(val, bool) or not isinstance(val, (int, Fraction)):
        raise SortMismatch(f"{v.ident}: expected exact number, got {val!r}")
    elif k in ("int", "integer") and not (isinstance(val, int) or val.denominator == 1):
        raise SortMismatch(f"{v.ident}: expected integer, got {val!r}")
    elif k == "int" and not v.sort.lo <= val <= v.sort.hi:
        raise SortMismatch(f"{v.ident}: {val} outside [{v.sort.lo}, {v.sort.hi}]")
    return val


def eval_term(t: Node, itp: Mapping):
    if isinstance(t, Var):
        return _value(t, itp)
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Add):
        return sum((eval_term(a, itp) for a in t.args), Fraction(0))
    if isinstance(t, Scale):
        return t.coef * eval_term(t.term, itp)
    raise SortMismatch(f"not a term: {t}")


def evaluate(f: Node, itp: Mapping) -> bool:
    """Truth value of ``f`` under ``itp`` (a map from :attr:`Var.ident` to value)."""
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Var):
        if f.sort.kind != "bool":
            raise SortMismatch(f"{f.ident} used as a formula")
        return _value(f, itp)
    if isinstance(f, Not):
        return not evaluate(f.arg, itp)
    if isinstance(f, And):
        return all(evaluate(a, itp) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, itp) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, itp)) or evaluate(f.rhs, itp)
    if isinstance(f, Iff):
        return evaluate(f.lhs, itp) == evaluate(f.rhs, itp)
    if isinstance(f, Cmp):
        return _CMP[f.op](eval_term(f.lhs, itp), eval_term(f.rhs, itp))
    if isinstance(f, ClockAtom):
        return _CMP[f.op](_value(f.clock, itp), f.const)
    if isinstance(f, DiffAtom):
        return _CMP[f.op](_value(f.lhs, itp), _value(f.rhs, itp) + f.const)
    if isinstance(f, ShiftAtom):
        return _value(f.target, itp) == _value(f.source, itp) + _value(f.delta, itp)
    raise SortMismatch(f"not a formula: {f!r}")


# ---------------------------------------------------------------- restriction


def _term_has_clock(t: Node) -> bool:
    return any(v.is_clock for v in variables(t))


def check_clock_restriction(f: Node, allow_diff: bool = False) -> list[Node]:
    """Atoms mentioning a clock that are not of the form ``c op n`` with integer ``n``.

    Difference atoms are accepted only with ``allow_diff`` (engine-generated cubes).
    An empty list means the formula is fine.
    """
    bad: list[Node] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, ClockAtom):
            if g.const.denominator != 1:
                bad.append(g)
        elif isinstance(g, DiffAtom):
            if not allow_diff or g.const.denominator != 1:
                bad.append(g)
        elif isinstance(g, ShiftAtom):
            bad.append(g)
        elif isinstance(g, Cmp):
            if _term_has_clock(g):
                bad.append(g)
        elif isinstance(g, Var):
            if g.is_clock:
                bad.append(g)
        else:
            stack.extend(children(g))
    return bad


def clock_atoms(f: Node) -> list[ClockAtom]:
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, ClockAtom):
            out.append(g)
        else:
            stack.extend(children(g))
    return out


def substitute_clocks(f: Node, values: Mapping[str, Fraction]) -> Node:
    """Replace clock atoms on the named clocks by their truth value at ``values``."""
    if isinstance(f, ClockAtom) and f.clock.name in values and not f.clock.primed:
        return BoolConst(_CMP[f.op](values[f.clock.name], f.const))
    if isinstance(f, Not):
        return neg(substitute_clocks(f.arg, values))
    if isinstance(f, And):
        return conj(substitute_clocks(a, values) for a in f.args)
    if isinstance(f, Or):
        return disj(substitute_clocks(a, values) for a in f.args)
    if isinstance(f, Implies):
        return Implies(substitute_clocks(f.lhs, values), substitute_clocks(f.rhs, values))
    if isinstance(f, Iff):
        return Iff(substitute_clocks(f.lhs, values), substitute_clocks(f.rhs, values))
    return f


# ---------------------------------------------------------------- concrete syntax


def fmt_number(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator) if q >= 0 else f"(- {-q.numerator})"
    s = f"{abs(q.numerator)}/{q.denominator}"
    return s if q >= 0 else f"(- {s})"


def _var_text(v: Var) -> str:
    base = v.name if v.step is None else f"{v.name}@{v.step}"
    return f"(next {base})" if v.primed else base


def _term_text(t: Node) -> str:
    if isinstance(t, Var):
        return _var_text(t)
    if isinstance(t, Num):
        return fmt_number(t.value)
    if isinstance(t, Add):
        return "(+ " + " ".join(_term_text(a) for a in t.args) + ")"
    if isinstance(t, Scale):
        if t.coef == -1:
            return f"(- {_term_text(t.term)})"
        return f"(* {fmt_number(t.coef)} {_term_text(t.term)})"
    raise TypeError(t)


def to_text(f: Node) -> str:
    """Prefix S-expression text of ``f`` in the model-file syntax."""
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, (Var, Num, Add, Scale)):
        return _term_text(f)
    if isinstance(f, Not):
        return f"(not {to_text(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(to_text(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(to_text(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"(=> {to_text(f.lhs)} {to_text(f.rhs)})"
    if isinstance(f, Iff):
        return f"(= {to_text(f.lhs)} {to_text(f.rhs)})"
    if isinstance(f, Cmp):
        return f"({f.op} {_term_text(f.lhs)} {_term_text(f.rhs)})"
    if isinstance(f, ClockAtom):
        return f"({f.op} {_var_text(f.clock)} {fmt_number(f.const)})"
    if isinstance(f, DiffAtom):
        rhs = _var_text(f.rhs) if f.const == 0 else f"(+ {_var_text(f.rhs)} {fmt_number(f.const)})"
        return f"({f.op} {_var_text(f.lhs)} {rhs})"
    if isinstance(f, ShiftAtom):
        return f"(= {_var_text(f.target)} (+ {_var_text(f.source)} {_var_text(f.delta)}))"
    raise TypeError(f)


class ParseError(SexprError):
    pass


def parse_number(e) -> Fraction | None:
    """Numeric literal in any of the forms ``3``, ``2.5``, ``5/2``, ``(- x)``, ``(/ p q)``."""
    if isinstance(e, Sym):
        s = e.name
        try:
            if "/" in s:
                p, q = s.split("/")
                return Fraction(int(p), int(q))
            return Fraction(s) if any(ch.isdigit() for ch in s) else None
        except (ValueError, ZeroDivisionError):
            return None
    if isinstance(e, list) and e and isinstance(e[0], Sym):
        head = e[0].name
        if head == "-" and len(e) == 2:
            v = parse_number(e[1])
            return None if v is None else -v
        if head == "/" and len(e) == 3:
            p, q = parse_number(e[1]), parse_number(e[2])
            if p is not None and q:
                return p / q
    return None


def _pos(e) -> tuple[int, int]:
    return (getattr(e, "line", 0), getattr(e, "col", 0))


class FormulaParser:
    """Parse formula S-expressions against a name -> :class:`Var` environment.

    Names of the form ``x@3`` are resolved to step-indexed copies of ``x``.
    """

    def __init__(self, env: Mapping[str, Var]):
        self.env = env

    def fail(self, msg: str, e) -> ParseError:
        return ParseError(msg, *_pos(e))

    def var(self, e) -> Var:
        if isinstance(e, list):
            if len(e) == 2 and isinstance(e[0], Sym) and e[0].name == "next":
                return self.var(e[1]).next()
            raise self.fail(f"expected a variable, got {e}", e)
        name, step = e.name, None
        if name not in self.env and "@" in name:
            base, _, idx = name.rpartition("@")
            if base in self.env and idx.isdigit():
                name, step = base, int(idx)
        if name not in self.env:
            raise self.fail(f"unknown variable '{e.name}'", e)
        return self.env[name].at(step)

    def term(self, e) -> Node:
        q = parse_number(e)
        if q is not None:
            return Num(q)
        if isinstance(e, Sym) or (isinstance(e, list) and len(e) == 2 and _head(e) == "next"):
            v = self.var(e)
            if not v.sort.numeric:
                raise self.fail(f"boolean '{v.ident}' used as a number", e)
            return v
        if not isinstance(e, list) or not e:
            raise self.fail("expected a term", e)
        head = _head(e)
        args = [self.term(a) for a in e[1:]]
        if head == "+":
            return add(*args)
        if head == "-":
            if len(args) == 1:
                return Scale(Fraction(-1), args[0])
            out = args[0]
            for a in args[1:]:
                out = sub(out, a)
            return out
        if head == "*" and len(args) == 2:
            for k, t in ((args[0], args[1]), (args[1], args[0])):
                if isinstance(k, Num):
                    return Scale(k.value, t)
            raise self.fail("nonlinear multiplication", e)
        raise self.fail(f"unknown term operator '{head}'", e)

    def formula(self, e) -> Node:
        if isinstance(e, Sym):
            if e.name == "true":
                return TRUE
            if e.name == "false":
                return FALSE
            v = self.var(e)
            if v.sort.kind != "bool":
                raise self.fail(f"non-boolean '{v.ident}' used as a formula", e)
            return v
        if not isinstance(e, list) or not e:
            raise self.fail("empty expression", e)
        head = _head(e)
        args = e[1:]
        if head == "next":
            v = self.var(e)
            if v.sort.kind != "bool":
                raise self.fail(f"non-boolean '{v.ident}' used as a formula", e)
            return v
        if head == "not":
            self._arity(e, 1)
            return Not(self.formula(args[0]))
        if head == "and":
            return And(tuple(self.formula(a) for a in args)) if args else TRUE
        if head == "or":
            return Or(tuple(self.formula(a) for a in args)) if args else FALSE
        if head in ("=>", "implies"):
            self._arity(e, 2)
            return Implies(self.formula(args[0]), self.formula(args[1]))
        if head in ("iff", "<=>"):
            self._arity(e, 2)
            return Iff(self.formula(args[0]), self.formula(args[1]))
        if head in ("xor",):
            self._arity(e, 2)
            return Not(Iff(self.formula(args[0]), self.formula(args[1])))
        if head in OPS or head == "!=":
            self._arity(e, 2)
            op = "distinct" if head == "!=" else head
            if op in ("=", "distinct") and self._is_bool(args[0]):
                f = Iff(self.formula(args[0]), self.formula(args[1]))
                return f if op == "=" else Not(f)
            return self.comparison(op, self.term(args[0]), self.term(args[1]))
        raise self.fail(f"unknown operator '{head}'", e)

    def _is_bool(self, e) -> bool:
        if isinstance(e, Sym):
            if e.name in ("true", "false"):
                return True
            try:
                return self.var(e).sort.kind == "bool"
            except ParseError:
                return False
        return isinstance(e, list) and bool(e) and _head(e) in (
            "not", "and", "or", "=>", "implies", "iff", "<=>", "xor", "next", "!=", *OPS,
        ) and (_head(e) != "next" or self.var(e).sort.kind == "bool")

    def _arity(self, e, n: int):
        if len(e) - 1 != n:
            raise self.fail(f"'{_head(e)}' expects {n} argument(s)", e)

    @staticmethod
    def comparison(op: str, lhs: Node, rhs: Node) -> Node:
        """Normalize clock comparisons into clock / difference atoms."""
        if isinstance(lhs, Num) and isinstance(rhs, Var) and rhs.is_clock:
            lhs, rhs, op = rhs, lhs, FLIP[op]
        if isinstance(lhs, Var) and lhs.is_clock:
            if isinstance(rhs, Num):
                return ClockAtom(lhs, op, rhs.value)
            if isinstance(rhs, Var) and rhs.is_clock:
                return DiffAtom(lhs, op, rhs, Fraction(0))
            if isinstance(rhs, Add) and len(rhs.args) == 2:
                a, b = rhs.args
                if isinstance(a, Var) and a.is_clock and isinstance(b, Num):
                    return DiffAtom(lhs, op, a, b.value)
                if op == "=" and all(isinstance(x, Var) and x.is_clock for x in (a, b)):
                    return ShiftAtom(lhs, a, b)
        return Cmp(op, lhs, rhs)


def _head(e) -> str:
    return e[0].name if e and isinstance(e[0], Sym) else ""


def parse_formula(text_or_expr, env: Mapping[str, Var]) -> Node:
    e = parse_one(text_or_expr) if isinstance(text_or_expr, str) else text_or_expr
    return FormulaParser(env).formula(e)

