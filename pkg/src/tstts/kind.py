"""Timed k-induction over the split-clock encoding, and plain BMC."""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass
from typing import Callable

from . import formula as F
from .engine import Status, Unroller, Verdict
from .model import Stts
from .regions import same_region, time_predecessor
from .smt import Cancelled, Session, SolverConfig, SolverError, SolverVerdict
from .splitting import region_disequality, time_pred_disequality

log = logging.getLogger(__name__)


class Diseq(enum.Enum):
    BASIC = "basic"
    TIMEPRED = "timepred"
    NONE = "none"


@dataclass
class KIndConfig:
    max_k: int = 500
    diseq: Diseq = Diseq.BASIC
    lazy: bool = True
    bmc_only: bool = False

    def __post_init__(self):
        if self.max_k < 0:
            raise ValueError("max_k must be non-negative")
        self.diseq = Diseq(self.diseq)


class _Run:
    def __init__(self, sys: Stts, cfg: KIndConfig, solver: SolverConfig, cancel):
        self.sys = sys
        self.cfg = cfg
        self.un = Unroller(sys, split=True)
        self.bounds = self.un.enc.clock_bounds
        self.sess = Session(solver, self.un.logic, cancel)
        self.pairs: dict[tuple[int, int], F.Node] = {}

    def diseq(self, i: int, j: int) -> F.Node:
        sv, cl = self.sys.state_vars, self.sys.clocks
        if self.cfg.diseq is Diseq.TIMEPRED:
            return time_pred_disequality(i, j, sv, cl, self.bounds)
        return region_disequality(i, j, sv, cl, self.bounds)

    def related(self, u: dict, s: dict) -> bool:
        if self.cfg.diseq is Diseq.TIMEPRED:
            return time_predecessor(u, s, self.bounds)
        return same_region(u, s, self.bounds)


def add_lazy_disequalities(run: _Run, model: dict, k: int) -> list[tuple[int, int]]:
    """Assert the disequality for every pair of steps the model fails to separate."""
    if run.cfg.diseq is Diseq.NONE:
        return []
    states = [run.un.state(model, i) for i in range(k + 1)]
    added = []
    for j in range(k + 1):
        for i in range(j):
            if (i, j) in run.pairs or not run.related(states[i], states[j]):
                continue
            f = run.diseq(i, j)
            run.pairs[(i, j)] = f
            run.sess.assert_formula(f)
            added.append((i, j))
    return added


def _finish(v: Verdict, run: _Run, t0: float) -> Verdict:
    v.queries = run.sess.queries
    v.seconds = time.perf_counter() - t0
    v.stats["pairs"] = len(run.pairs)
    run.sess.close()
    return v


def k_induction(sys: Stts, cfg: KIndConfig | None = None, solver: SolverConfig | None = None,
                cancel: Callable[[], bool] | None = None, engine: str = "kind") -> Verdict:
    cfg = cfg or KIndConfig()
    solver = solver or SolverConfig()
    t0 = time.perf_counter()
    try:
        run = _Run(sys, cfg, solver, cancel)
    except SolverError as exc:
        return Verdict(Status.UNKNOWN, engine, reason=str(exc), seconds=time.perf_counter() - t0)
    un, sess = run.un, run.sess
    try:
        sess.assert_formula(un.invar(0))
        for k in range(cfg.max_k + 1):
            # base case
            sess.push()
            sess.assert_formula(un.init())
            sess.assert_formula(F.neg(un.prop(k)))
            r = sess.check()
            if r is SolverVerdict.SAT:
                m = sess.get_model(un.symbols(k))
                return _finish(Verdict(Status.VIOLATED, engine, k, trace=un.trace(m, k)), run, t0)
            sess.pop()
            if r is SolverVerdict.UNKNOWN:
                return _finish(Verdict(Status.UNKNOWN, engine, k, reason="solver unknown"), run, t0)

            if not cfg.bmc_only and _step(run, k):
                return _finish(Verdict(Status.HOLDS, engine, k), run, t0)

            sess.assert_formula(un.prop(k))
            sess.assert_formula(un.trans(k))
            sess.assert_formula(un.invar(k + 1))
            log.debug("k=%d done, %d disequalities", k, len(run.pairs))
        status = Status.NO_CEX if cfg.bmc_only else Status.UNKNOWN
        reason = "" if cfg.bmc_only else f"max_k={cfg.max_k} exhausted"
        return _finish(Verdict(status, engine, cfg.max_k, reason=reason), run, t0)
    except Cancelled:
        return _finish(Verdict(Status.UNKNOWN, engine, reason="cancelled"), run, t0)
    except SolverError as exc:
        return _finish(Verdict(Status.UNKNOWN, engine, reason=f"solver failure: {exc}"), run, t0)


def _step(run: _Run, k: int) -> bool:
    """Inductive step at depth ``k``; True when it is unsatisfiable."""
    un, sess, cfg = run.un, run.sess, run.cfg
    sess.push()
    try:
        sess.assert_formula(F.neg(un.prop(k)))
        if cfg.diseq is not Diseq.NONE:
            if not cfg.lazy:
                for j in range(k + 1):
                    for i in range(j):
                        run.pairs.setdefault((i, j), run.diseq(i, j))
            for f in run.pairs.values():
                sess.assert_formula(f)
        while True:
            r = sess.check()
            if r is SolverVerdict.UNSAT:
                return True
            if r is SolverVerdict.UNKNOWN:
                raise SolverError("solver returned unknown in the inductive step")
            if not cfg.lazy or cfg.diseq is Diseq.NONE:
                return False
            m = sess.get_model(un.symbols(k))
            if not add_lazy_disequalities(run, m, k):
                return False
    finally:
        sess.pop()


def bmc(sys: Stts, bound: int, solver: SolverConfig | None = None,
        cancel: Callable[[], bool] | None = None) -> Verdict:
    """Shortest counterexample of length at most ``bound``, else NO_CEX."""
    return k_induction(sys, KIndConfig(max_k=bound, diseq=Diseq.NONE, bmc_only=True),
                       solver, cancel, engine="bmc")
