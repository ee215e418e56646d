"""Incremental SMT-LIB2 session over a solver subprocess."""

from __future__ import annotations

import enum
import logging
import os
import select
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import formula as F
from .sexpr import Sym, balanced, parse_one

log = logging.getLogger(__name__)

DEFAULT_SOLVER = "z3 -in -smt2"


def default_command() -> list[str]:
    return shlex.split(os.environ.get("TSTTS_SOLVER", DEFAULT_SOLVER))


@dataclass
class SolverConfig:
    command: list[str] = field(default_factory=default_command)
    logic: str | None = None  # engines pick QF_LRA / QF_LIRA when unset
    timeout_ms: int | None = None
    seed: int | None = None
    dump_dir: str | None = None

    @classmethod
    def from_string(cls, cmd: str | None, **kw) -> "SolverConfig":
        return cls(command=shlex.split(cmd), **kw) if cmd else cls(**kw)


class SolverVerdict(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class SolverError(Exception):
    pass


class LaunchFailure(SolverError):
    pass


class HandshakeFailure(SolverError):
    pass


class SolverCrash(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


class Cancelled(Exception):
    """Raised when an engine's cancellation token fires between queries."""


# ---------------------------------------------------------------- printing


def symbol(v: F.Var) -> str:
    return "|" + v.ident + "|"


def smt_sort(s: F.Sort) -> str:
    if s.kind == "bool":
        return "Bool"
    if s.kind in ("int", "integer"):
        return "Int"
    return "Real"


def sort_constraint(v: F.Var) -> F.Node:
    """Domain side constraint that every declaration of ``v`` carries."""
    s = v.sort
    if s.kind == "int":
        return F.And((F.Cmp(">=", v, F.num(s.lo)), F.Cmp("<=", v, F.num(s.hi))))
    if s.kind == "integer" and s.lo is not None:
        return F.Cmp(">=", v, F.num(s.lo))
    if s.kind == "frac":
        return F.And((F.Cmp(">=", v, F.num(0)), F.Cmp("<", v, F.num(1))))
    return F.TRUE


def _num(q: Fraction, real: bool) -> str:
    q = Fraction(q)
    if not real:
        assert q.denominator == 1
        return str(q.numerator) if q >= 0 else f"(- {-q.numerator})"
    if q.denominator == 1:
        s = f"{abs(q.numerator)}.0"
    else:
        s = f"(/ {abs(q.numerator)}.0 {q.denominator}.0)"
    return s if q >= 0 else f"(- {s})"


def _is_real_term(t: F.Node) -> bool:
    if isinstance(t, F.Var):
        return t.sort.is_real or t.sort.kind == "frac"
    if isinstance(t, F.Num):
        return t.value.denominator != 1
    return any(_is_real_term(c) for c in F.children(t))


def _term(t: F.Node, real: bool) -> str:
    if isinstance(t, F.Var):
        s = symbol(t)
        if real and t.sort.kind in ("int", "integer"):
            return f"(to_real {s})"
        return s
    if isinstance(t, F.Num):
        return _num(t.value, real)
    if isinstance(t, F.Add):
        return "(+ " + " ".join(_term(a, real) for a in t.args) + ")"
    if isinstance(t, F.Scale):
        return f"(* {_num(t.coef, real)} {_term(t.term, real)})"
    raise TypeError(t)


def _rel(op: str, lhs: str, rhs: str) -> str:
    if op == "distinct":
        return f"(not (= {lhs} {rhs}))"
    return f"({op} {lhs} {rhs})"


def to_smt(f: F.Node) -> str:
    """SMT-LIB2 text of a formula."""
    if isinstance(f, F.BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, F.Var):
        return symbol(f)
    if isinstance(f, F.Not):
        return f"(not {to_smt(f.arg)})"
    if isinstance(f, F.And):
        if not f.args:
            return "true"
        return "(and " + " ".join(to_smt(a) for a in f.args) + ")"
    if isinstance(f, F.Or):
        if not f.args:
            return "false"
        return "(or " + " ".join(to_smt(a) for a in f.args) + ")"
    if isinstance(f, F.Implies):
        return f"(=> {to_smt(f.lhs)} {to_smt(f.rhs)})"
    if isinstance(f, F.Iff):
        return f"(= {to_smt(f.lhs)} {to_smt(f.rhs)})"
    if isinstance(f, F.Cmp):
        real = _is_real_term(f.lhs) or _is_real_term(f.rhs)
        return _rel(f.op, _term(f.lhs, real), _term(f.rhs, real))
    if isinstance(f, F.ClockAtom):
        return _rel(f.op, symbol(f.clock), _num(f.const, True))
    if isinstance(f, F.DiffAtom):
        rhs = symbol(f.rhs) if f.const == 0 else f"(+ {symbol(f.rhs)} {_num(f.const, True)})"
        return _rel(f.op, symbol(f.lhs), rhs)
    if isinstance(f, F.ShiftAtom):
        return f"(= {symbol(f.target)} (+ {symbol(f.source)} {symbol(f.delta)}))"
    raise TypeError(f"cannot print {f!r}")


def parse_value(e):
    """Solver value syntax to bool / int / Fraction."""
    if isinstance(e, Sym):
        if e.name == "true":
            return True
        if e.name == "false":
            return False
    q = F.parse_number(e)
    if q is None:
        raise SolverError(f"cannot read model value {e}")
    return q


# ---------------------------------------------------------------- session


class Session:
    """One solver subprocess with an incremental assertion stack.

    Variables are declared on first use; declarations are global so that
    ``pop`` never forgets a symbol, while each variable's domain constraint
    is tracked per scope and re-emitted when a pop discards it.
    """

    def __init__(self, cfg: SolverConfig, logic: str | None = None,
                 cancel: Callable[[], bool] | None = None):
        self.cfg = cfg
        self.logic = cfg.logic or logic or "ALL"
        self.cancel = cancel
        self.queries = 0
        self.depth = 0
        self._declared: dict[str, F.Var] = {}
        self._constrained: list[set[str]] = [set()]
        self._transcript: list[str] = [] if cfg.dump_dir else None
        self._dump_id = f"{os.getpid()}_{id(self):x}"
        self.poisoned = False
        try:
            self.proc = subprocess.Popen(
                cfg.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT, text=True, bufsize=1,
            )
        except (OSError, ValueError) as exc:
            raise LaunchFailure(f"cannot start solver {cfg.command!r}: {exc}") from exc
        self._buf = ""
        self._send("(set-option :print-success false)")
        self._send("(set-option :produce-models true)")
        self._send("(set-option :global-declarations true)")
        if cfg.seed is not None:
            self._send(f"(set-option :random-seed {cfg.seed})")
        self._send(f"(set-logic {self.logic})")
        self._send('(echo "ready")')
        junk = []
        while True:
            line = self._readline(10.0)
            if line is None:
                self.close()
                raise HandshakeFailure("solver exited during handshake: " + " ".join(junk))
            line = line.strip()
            if line.strip('"') == "ready":
                break
            if line and not line.startswith(";"):
                junk.append(line)
        if junk:
            self.close()
            raise HandshakeFailure("solver rejected setup: " + " ".join(junk))

    # -- raw io

    def _send(self, cmd: str):
        if self._transcript is not None:
            self._transcript.append(cmd)
        try:
            self.proc.stdin.write(cmd + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self.poisoned = True
            raise SolverCrash(f"solver pipe closed: {exc}") from exc

    def _readline(self, timeout: float | None) -> str | None:
        deadline = None if timeout is None else time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while "\n" not in self._buf:
            wait = None if deadline is None else max(0.0, deadline - time.monotonic())
            r, _, _ = select.select([fd], [], [], wait)
            if not r:
                raise SolverTimeout("solver did not answer in time")
            chunk = os.read(fd, 65536).decode()
            if not chunk:
                if self._buf:
                    line, self._buf = self._buf, ""
                    return line
                return None
            self._buf += chunk
        line, _, self._buf = self._buf.partition("\n")
        return line

    def _timeout(self) -> float | None:
        return None if self.cfg.timeout_ms is None else self.cfg.timeout_ms / 1000.0

    def _read_answer(self) -> str:
        errors = []
        while True:
            try:
                line = self._readline(self._timeout())
            except SolverTimeout:
                self.poisoned = True
                self.close()
                raise
            if line is None:
                self.poisoned = True
                raise SolverCrash("solver exited: " + " ".join(errors))
            line = line.strip()
            if not line or line.startswith(";"):
                continue
            if line.startswith("(error"):
                errors.append(line)
                continue
            if errors:
                self.poisoned = True
                raise SolverCrash("solver error: " + " ".join(errors))
            return line

    # -- declarations

    def declare(self, v: F.Var):
        if v.ident in self._declared:
            return
        self._declared[v.ident] = v
        self._send(f"(declare-fun {symbol(v)} () {smt_sort(v.sort)})")

    def _domain(self, f: F.Node) -> list[F.Node]:
        extra = []
        for v in sorted(F.variables(f), key=lambda v: v.ident):
            self.declare(v)
            dc = sort_constraint(v)
            if dc != F.TRUE and not any(v.ident in s for s in self._constrained):
                self._constrained[-1].add(v.ident)
                extra.append(dc)
        return extra

    # -- incremental interface

    def assert_formula(self, f: F.Node):
        self._check_live()
        extra = self._domain(f)
        for g in extra:
            self._send(f"(assert {to_smt(g)})")
        if f != F.TRUE:
            self._send(f"(assert {to_smt(f)})")

    def push(self):
        self._check_live()
        self._send("(push 1)")
        self.depth += 1
        self._constrained.append(set())

    def pop(self):
        self._check_live()
        if self.depth == 0:
            raise SolverError("pop on empty assertion stack")
        self._send("(pop 1)")
        self.depth -= 1
        self._constrained.pop()

    def check(self, assumptions: Sequence[F.Node] = ()) -> SolverVerdict:
        """``check-sat`` (or ``check-sat-assuming`` over boolean literals)."""
        self._check_live()
        if self.cancel is not None and self.cancel():
            raise Cancelled()
        for a in assumptions:
            for g in self._domain(a):
                self._send(f"(assert {to_smt(g)})")
        self.queries += 1
        if assumptions:
            self._send("(check-sat-assuming (" + " ".join(to_smt(a) for a in assumptions) + "))")
        else:
            self._send("(check-sat)")
        self._dump()
        ans = self._read_answer()
        try:
            return SolverVerdict(ans)
        except ValueError:
            self.poisoned = True
            raise SolverCrash(f"unexpected solver answer {ans!r}") from None

    def get_model(self, variables: Iterable[F.Var]) -> dict[str, object]:
        """Values of ``variables`` keyed by :attr:`Var.ident`; call after a SAT check."""
        self._check_live()
        vs = list(variables)
        if not vs:
            return {}
        for v in vs:
            self.declare(v)
        self._send("(get-value (" + " ".join(symbol(v) for v in vs) + "))")
        text = ""
        while True:
            line = self._readline(self._timeout())
            if line is None:
                self.poisoned = True
                raise SolverCrash("solver exited during get-value")
            if not text and not line.strip():
                continue
            text += line + "\n"
            if text.lstrip().startswith("(error"):
                if balanced(text):
                    self.poisoned = True
                    raise SolverCrash("solver error: " + text.strip())
                continue
            if balanced(text):
                break
        pairs = parse_one(text)
        out = {}
        by_ident = {v.ident: v for v in vs}
        for key, val in pairs:
            ident = key.name if isinstance(key, Sym) else str(key)
            v = by_ident[ident]
            value = parse_value(val)
            if v.sort.kind == "bool":
                out[ident] = bool(value)
            elif v.sort.kind in ("int", "integer"):
                out[ident] = int(value)
            else:
                out[ident] = Fraction(value)
        return out

    def _check_live(self):
        if self.poisoned:
            raise SolverCrash("session is poisoned by an earlier failure")

    def _dump(self):
        if self._transcript is None:
            return
        d = Path(self.cfg.dump_dir)
        d.mkdir(parents=True, exist_ok=True)
        path = d / f"session_{self._dump_id}_q{self.queries:05d}.smt2"
        path.write_text("\n".join(self._transcript) + "\n")

    def close(self):
        proc = getattr(self, "proc", None)
        if proc is None or proc.poll() is not None:
            return
        try:
            if not self.poisoned:
                proc.stdin.write("(exit)\n")
                proc.stdin.flush()
                proc.wait(timeout=0.5)
        except Exception:
            pass
        if proc.poll() is None:
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def open_session(cfg: SolverConfig, logic: str | None = None, cancel=None) -> Session:
    return Session(cfg, logic, cancel)


def is_sat(cfg: SolverConfig, fs: Iterable[F.Node], logic: str | None = None) -> bool:
    """One-shot satisfiability of a conjunction."""
    with Session(cfg, logic) as s:
        s.assert_formula(F.conj(fs))
        r = s.check()
        if r is SolverVerdict.UNKNOWN:
            raise SolverError("solver returned unknown")
        return r is SolverVerdict.SAT


def solve(cfg: SolverConfig, fs: Iterable[F.Node], variables: Iterable[F.Var],
          logic: str | None = None) -> Mapping | None:
    """Model of a conjunction restricted to ``variables``, or None when unsatisfiable."""
    with Session(cfg, logic) as s:
        s.assert_formula(F.conj(fs))
        r = s.check()
        if r is SolverVerdict.UNKNOWN:
            raise SolverError("solver returned unknown")
        return s.get_model(variables) if r is SolverVerdict.SAT else None
