"""Timed IC3 over region-lifted cubes."""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable

from . import formula as F
from .engine import Status, Unroller, Verdict
from .formula import Var
from .model import CombinedEncoding, Stts, build_combined_encoding, logic_for
from .regions import clause_formula, clause_of, lift_region_cube, lift_time_pred_cube
from .smt import Cancelled, Session, SolverConfig, SolverError, SolverVerdict

log = logging.getLogger(__name__)

BASIC, TIMEPRED = "basic", "timepred"


@dataclass
class IC3Config:
    mode: str = BASIC
    max_frames: int = 10_000
    debug_invariants: bool = False
    generalize: bool = True

    def __post_init__(self):
        if self.mode not in (BASIC, TIMEPRED):
            raise ValueError(f"unknown region mode {self.mode!r}")


class InvariantViolation(AssertionError):
    pass


@dataclass(order=True)
class Obligation:
    frame: int
    seq: int
    state: dict = field(compare=False)
    cube: tuple = field(compare=False)
    parent: "Obligation | None" = field(compare=False, default=None)


def lifted_cube_for(sys: Stts, s: dict, bounds, mode: str = BASIC) -> tuple:
    lift = lift_time_pred_cube if mode == TIMEPRED else lift_region_cube
    return lift(s, sys.state_vars, sys.clocks, bounds)


def _is_discrete(lit: F.Node) -> bool:
    return not any(v.is_clock for v in F.variables(lit))


class _Counterexample(Exception):
    def __init__(self, chain: list[Obligation]):
        self.chain = chain


class IC3:
    """One run of the algorithm; frames are kept in delta form.

    ``self.levels[L]`` holds the clauses whose highest frame is ``L``, so
    ``F_i`` is ``P`` together with every clause stored at a level ``>= i``.
    ``F_0`` is the initial-elapse formula itself.
    """

    def __init__(self, sys: Stts, cfg: IC3Config, solver: SolverConfig,
                 cancel: Callable[[], bool] | None = None):
        self.sys = sys
        self.cfg = cfg
        self.solver = solver
        self.enc: CombinedEncoding = build_combined_encoding(sys)
        self.bounds = self.enc.clock_bounds
        self.vars: list[Var] = [*sys.state_vars, *sys.clocks]
        self.sess = Session(solver, logic_for(sys), cancel)
        self.k = 0
        self.levels: list[set] = [set()]
        self.acts: list[Var] = [Var("__act0", F.BOOL)]
        self.act_t = Var("__actT", F.BOOL)
        self.act_bad = Var("__actBad", F.BOOL)
        self.seq = itertools.count()
        self.clauses_added = 0
        self.invariant_checks = 0
        self.iterations = 0

        s = self.sess
        s.assert_formula(self.enc.invar_hat)
        s.assert_formula(F.Implies(self.act_t, F.conj([self.enc.trans_hat, F.prime(self.enc.invar_hat)])))
        s.assert_formula(F.Implies(self.act_bad, F.neg(F.prime(sys.prop))))
        s.assert_formula(F.Implies(self.acts[0], self.enc.init_hat))

    # -- frames

    def _new_level(self):
        a = Var(f"__act{len(self.acts)}", F.BOOL)
        self.acts.append(a)
        self.levels.append(set())
        self.sess.assert_formula(F.Implies(a, self.sys.prop))

    def frame_assumptions(self, i: int) -> list[Var]:
        if i == 0:
            return [self.acts[0]]
        return self.acts[i:self.k + 1]

    def frame_clauses(self, i: int) -> set:
        out = set()
        for lvl in range(max(i, 1), self.k + 1):
            out |= self.levels[lvl]
        return out

    def frame_formula(self, i: int) -> F.Node:
        if i == 0:
            return self.enc.init_hat
        return F.conj([self.sys.prop, *(clause_formula(c) for c in sorted(self.frame_clauses(i), key=str))])

    def add_clause(self, clause: tuple, level: int):
        key = frozenset(clause)
        for lvl in range(1, level):
            self.levels[lvl].discard(key)
        if any(key in self.levels[lvl] for lvl in range(level, self.k + 1)):
            return
        self.levels[level].add(key)
        self.clauses_added += 1
        self.sess.assert_formula(F.Implies(self.acts[level], clause_formula(sorted(key, key=str))))

    # -- queries

    def _check(self, assumptions, extra=()) -> bool:
        """Satisfiability of the asserted context plus ``extra`` under ``assumptions``."""
        s = self.sess
        if extra:
            s.push()
        try:
            for f in extra:
                s.assert_formula(f)
            r = s.check(assumptions)
            if r is SolverVerdict.UNKNOWN:
                raise SolverError("solver returned unknown")
            return r is SolverVerdict.SAT
        finally:
            if extra:
                s.pop()

    def _model_state(self, primed: bool = False) -> dict:
        vs = [v.next() if primed else v for v in self.vars]
        m = self.sess.get_model(vs)
        return {v.name: m[w.ident] for v, w in zip(self.vars, vs)}

    def _sat_with_state(self, assumptions, extra, primed=False):
        s = self.sess
        s.push()
        try:
            for f in extra:
                s.assert_formula(f)
            r = s.check(assumptions)
            if r is SolverVerdict.UNKNOWN:
                raise SolverError("solver returned unknown")
            if r is SolverVerdict.UNSAT:
                return None
            return self._model_state(primed)
        finally:
            s.pop()

    def lift(self, s: dict) -> tuple:
        return lifted_cube_for(self.sys, s, self.bounds, self.cfg.mode)

    # -- main loop

    def run(self) -> Verdict:
        sys, enc = self.sys, self.enc
        bad0 = self._sat_with_state([self.acts[0]], [F.neg(sys.prop)])
        if bad0 is not None:
            return self._violation_from_chain([], depth=0)
        while True:
            self.iterations += 1
            if self.k >= self.cfg.max_frames:
                return Verdict(Status.UNKNOWN, "ic3", self.k, reason=f"frame bound {self.cfg.max_frames} reached")
            s = self._sat_with_state(self.frame_assumptions(self.k) + [self.act_t, self.act_bad], [])
            if s is None:
                self.k += 1
                self._new_level()
                self.propagate()
                fixed = self.fixpoint()
                if self.cfg.debug_invariants:
                    self.check_invariants()
                if fixed is not None:
                    cert = self.frame_formula(fixed)
                    ok = check_certificate(sys, cert, self.solver, enc)
                    if not ok:
                        raise InvariantViolation("certificate failed its checks")
                    return Verdict(Status.HOLDS, "ic3", self.k, certificate=cert,
                                   stats={"fixpoint": fixed})
            else:
                try:
                    self.block_state(s)
                except _Counterexample as cex:
                    return self._violation_from_chain(cex.chain, depth=len(cex.chain))
                if self.cfg.debug_invariants:
                    self.check_invariants()

    def fixpoint(self) -> int | None:
        for i in range(1, self.k):
            if not self.levels[i]:
                return i
        return None

    def block_state(self, s: dict):
        top = Obligation(self.k, next(self.seq), s, self.lift(s))
        q = [top]
        while q:
            ob = heapq.heappop(q)
            i = ob.frame
            if i == 0:
                raise _Counterexample(self._chain(ob))
            cube = ob.cube
            extra = [F.neg(F.conj(cube)), F.prime(F.conj(cube))]
            z = self._sat_with_state(self.frame_assumptions(i - 1) + [self.act_t], extra)
            if z is not None:
                heapq.heappush(q, Obligation(i, next(self.seq), ob.state, cube, ob.parent))
                heapq.heappush(q, Obligation(i - 1, next(self.seq), z, self.lift(z), ob))
                continue
            clause = clause_of(cube)
            if self._sat_with_state([self.acts[0]], [F.conj(cube)]) is not None:
                # an initial-elapse state shares the (time-predecessor) region of s
                raise _Counterexample(self._chain(ob))
            if self.cfg.generalize:
                clause = self.generalize(clause, i)
            self.add_clause(clause, i)
            if i < self.k:
                heapq.heappush(q, Obligation(i + 1, next(self.seq), ob.state, cube, ob.parent))

    def _chain(self, ob: Obligation) -> list[Obligation]:
        out = []
        while ob is not None:
            out.append(ob)
            ob = ob.parent
        return out

    def generalize(self, clause: tuple, i: int) -> tuple:
        """Drop literals while initiation and relative induction keep holding."""
        order = [l for l in clause if _is_discrete(l)] + [l for l in clause if not _is_discrete(l)]
        cur = list(clause)
        for lit in order:
            if len(cur) <= 1:
                break
            cand = [l for l in cur if l != lit]
            if self._initiation_fails(cand) or self._induction_fails(cand, i):
                continue
            cur = cand
        return tuple(cur)

    def _initiation_fails(self, clause) -> bool:
        return self._check([self.acts[0]], [F.neg(clause_formula(clause))])

    def _induction_fails(self, clause, i: int) -> bool:
        c = clause_formula(clause)
        return self._check(self.frame_assumptions(i - 1) + [self.act_t], [c, F.neg(F.prime(c))])

    def propagate(self):
        for i in range(1, self.k):
            for key in list(self.levels[i]):
                c = clause_formula(sorted(key, key=str))
                if not self._check(self.frame_assumptions(i) + [self.act_t], [F.neg(F.prime(c))]):
                    self.levels[i].discard(key)
                    self.levels[i + 1].add(key)
                    self.sess.assert_formula(F.Implies(self.acts[i + 1], c))

    # -- debugging aids

    def check_invariants(self):
        """Properties (i)-(iv) of the frame sequence, each by one UNSAT query."""
        enc, P = self.enc, self.sys.prop
        with Session(self.solver, logic_for(self.sys)) as s:
            def valid(f: F.Node) -> bool:
                s.push()
                s.assert_formula(F.neg(f))
                r = s.check()
                s.pop()
                self.invariant_checks += 1
                return r is SolverVerdict.UNSAT

            frames = [self.frame_formula(i) for i in range(self.k + 1)]
            base = F.conj([enc.invar_hat])
            step = F.conj([enc.invar_hat, enc.trans_hat, F.prime(enc.invar_hat)])
            if self.k >= 1 and not valid(F.implies(F.conj([enc.init_hat, base]), frames[1])):
                raise InvariantViolation("(i) initial states escape F_1")
            for i in range(1, self.k):
                if not self.frame_clauses(i + 1) <= self.frame_clauses(i):
                    raise InvariantViolation(f"(ii) F_{i + 1} is not a subset of F_{i}")
            for i in range(0, self.k + 1):
                if not valid(F.implies(F.conj([frames[i], base]), P)):
                    raise InvariantViolation(f"(iii) F_{i} does not imply P")
            for i in range(0, self.k):
                if not valid(F.implies(F.conj([frames[i], step]), F.prime(frames[i + 1]))):
                    raise InvariantViolation(f"(iv) F_{i} is not inductive into F_{i + 1}")

    # -- counterexamples

    def _violation_from_chain(self, chain: list[Obligation], depth: int) -> Verdict:
        """Concretize a counterexample whose steps follow the regions of ``chain``."""
        tr = concretize(self.sys, [ob.cube for ob in chain], self.solver, self.enc)
        return Verdict(Status.VIOLATED, "ic3", depth, trace=tr,
                       reason="" if tr is not None else "trace concretization failed")


def concretize(sys: Stts, cubes: list[tuple], solver: SolverConfig,
               enc: CombinedEncoding | None = None):
    """Combined-step path through ``cubes`` (one per step) ending in a bad state.

    Falls back to plain bounded search at the same depth when the region
    constraints are unsatisfiable.
    """
    un = Unroller(sys, enc)
    n = len(cubes)
    with Session(solver, un.logic) as s:
        s.assert_formula(un.init())
        for i in range(n + 1):
            s.assert_formula(un.invar(i))
        for i in range(n):
            s.assert_formula(un.trans(i))
        s.assert_formula(F.neg(un.prop(n)))
        for constrained in (True, False):
            s.push()
            if constrained:
                for i, cube in enumerate(cubes):
                    s.assert_formula(un.at(F.conj(cube), i))
            r = s.check()
            if r is SolverVerdict.SAT:
                return un.trace(s.get_model(un.symbols(n)), n)
            s.pop()
    return None


def check_certificate(sys: Stts, cert: F.Node, solver: SolverConfig,
                      enc: CombinedEncoding | None = None) -> bool:
    """Initiation, consecution and safety of ``cert``, three UNSAT queries."""
    enc = enc or build_combined_encoding(sys)
    queries = [
        [enc.init_hat, enc.invar_hat, F.neg(cert)],
        [cert, enc.invar_hat, enc.trans_hat, F.prime(enc.invar_hat), F.neg(F.prime(cert))],
        [cert, enc.invar_hat, F.neg(sys.prop)],
    ]
    with Session(solver, logic_for(sys)) as s:
        for fs in queries:
            s.push()
            s.assert_formula(F.conj(fs))
            r = s.check()
            s.pop()
            if r is not SolverVerdict.UNSAT:
                return False
    return True


def ic3(sys: Stts, cfg: IC3Config | None = None, solver: SolverConfig | None = None,
        cancel: Callable[[], bool] | None = None) -> Verdict:
    cfg = cfg or IC3Config()
    solver = solver or SolverConfig()
    t0 = time.perf_counter()
    try:
        run = IC3(sys, cfg, solver, cancel)
    except SolverError as exc:
        return Verdict(Status.UNKNOWN, "ic3", reason=str(exc), seconds=time.perf_counter() - t0)
    try:
        v = run.run()
    except Cancelled:
        v = Verdict(Status.UNKNOWN, "ic3", run.k, reason="cancelled")
    except SolverError as exc:
        v = Verdict(Status.UNKNOWN, "ic3", run.k, reason=f"solver failure: {exc}")
    finally:
        run.sess.close()
    v.queries = run.sess.queries
    v.seconds = time.perf_counter() - t0
    v.stats.update(clauses=run.clauses_added, iterations=run.iterations,
                   invariant_checks=run.invariant_checks,
                   frame_sizes=[len(run.frame_clauses(i)) for i in range(1, run.k + 1)])
    return v
