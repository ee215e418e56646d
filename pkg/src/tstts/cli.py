"""Command-line front end: ``tstts check | gen | oracle``."""

from __future__ import annotations

import argparse
import logging
import multiprocessing as mp
import os
import queue
import signal
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import benchmarks
from . import formula as F
from .engine import Status, Verdict
from .ic3 import IC3Config, ic3
from .kind import Diseq, KIndConfig, bmc, k_induction
from .model import ModelError, Stts, format_trace, parse_model, prepare, replay_trace
from .oracle import EnumerationBoundExceeded, build_region_graph, oracle_check
from .smt import SolverConfig, SolverError

log = logging.getLogger("tstts")

ENGINES = ("ic3", "kind", "bmc", "oracle", "portfolio")
EXIT = {Status.HOLDS: 0, Status.VIOLATED: 1}


class EngineDisagreement(AssertionError):
    pass


@dataclass
class RunRequest:
    model: str
    engine: str = "ic3"
    regions: str = "basic"
    solver: SolverConfig = field(default_factory=SolverConfig)
    max_k: int = 500
    frame_bound: int = 10_000
    bmc_bound: int = 500
    trace: str | None = None
    cert: str | None = None
    debug_invariants: bool = False
    prop: str | None = None
    portfolio: tuple = ("ic3", "bmc")
    grace: float = 0.2

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "portfolio" and len(self.portfolio) < 2:
            raise ValueError("a portfolio needs at least two engines")


def run_engine(name: str, sys: Stts, req: RunRequest,
               cancel: Callable[[], bool] | None = None) -> Verdict:
    mode = req.regions
    if name == "ic3":
        return ic3(sys, IC3Config(mode=mode, max_frames=req.frame_bound,
                                  debug_invariants=req.debug_invariants), req.solver, cancel)
    if name == "kind":
        return k_induction(sys, KIndConfig(max_k=req.max_k, diseq=Diseq(mode)), req.solver, cancel)
    if name == "bmc":
        return bmc(sys, req.bmc_bound, req.solver, cancel)
    if name == "oracle":
        return oracle_check(sys, solver=req.solver)
    raise ValueError(f"unknown engine {name!r}")


def _worker(name: str, sys: Stts, req: RunRequest, out, stop):
    os.setpgid(0, 0)  # own process group, so solver children die with us
    try:
        v = run_engine(name, sys, req, stop.is_set)
    except Exception as exc:  # reported, never raised across the process boundary
        v = Verdict(Status.UNKNOWN, name, reason=f"{type(exc).__name__}: {exc}")
    out.put((name, v))


def _kill(p: mp.Process):
    if p.is_alive():
        try:
            os.killpg(p.pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            p.kill()
    p.join()


def run_portfolio(sys: Stts, req: RunRequest) -> Verdict:
    """Run the sub-engines concurrently; the first definitive verdict wins."""
    t0 = time.perf_counter()
    ctx = mp.get_context("fork")
    out, stop = ctx.Queue(), ctx.Event()
    procs = {n: ctx.Process(target=_worker, args=(n, sys, req, out, stop), daemon=True)
             for n in req.portfolio}
    for p in procs.values():
        p.start()
    results: dict[str, Verdict] = {}
    winner = None
    try:
        while len(results) < len(procs):
            try:
                name, v = out.get(timeout=0.5)
            except queue.Empty:
                if not any(p.is_alive() for p in procs.values()) and out.empty():
                    break
                continue
            results[name] = v
            if v.status.definitive:
                winner = v
                break
        if winner is not None:
            stop.set()
            deadline = time.monotonic() + req.grace
            while time.monotonic() < deadline and len(results) < len(procs):
                try:
                    name, v = out.get(timeout=max(0.0, deadline - time.monotonic()))
                    results[name] = v
                except queue.Empty:
                    break
    finally:
        stop.set()
        for p in procs.values():
            _kill(p)
    seen = {v.status for v in results.values() if v.status.definitive}
    if len(seen) > 1:
        raise EngineDisagreement(f"engines disagree: { {n: v.status.value for n, v in results.items()} }")
    if winner is None:
        reasons = "; ".join(f"{n}: {v.reason or v.status.value}" for n, v in results.items())
        winner = Verdict(Status.UNKNOWN, "portfolio", reason=reasons or "no engine finished")
    winner.stats["winner"] = winner.engine
    winner.stats["finished"] = sorted(results)
    winner.seconds = time.perf_counter() - t0
    return winner


def load(req: RunRequest) -> Stts:
    sys_ = parse_model(Path(req.model).read_bytes())
    if req.prop is not None:
        sys_ = sys_.with_property(F.parse_formula(req.prop, sys_.env))
    return prepare(sys_, req.solver)


def run(req: RunRequest) -> tuple[int, str, Verdict | None]:
    """Execute a check request; returns exit code, report text and the verdict."""
    try:
        sys_ = load(req)
    except (OSError, ModelError, F.ParseError, SolverError) as exc:
        return 2, f"VERDICT=UNKNOWN\nerror={_one_line(exc)}\n", None
    try:
        if req.engine == "portfolio":
            v = run_portfolio(sys_, req)
        else:
            v = run_engine(req.engine, sys_, req)
    except (SolverError, EnumerationBoundExceeded, EngineDisagreement) as exc:
        return 2, f"VERDICT=UNKNOWN\nengine={req.engine}\nerror={_one_line(exc)}\n", None
    extra = []
    if v.stats.get("winner"):
        extra.append(f"winner={v.stats['winner']}")
    if v.status is Status.VIOLATED and v.trace is not None:
        bad = replay_trace(sys_, v.trace)
        extra.append("trace=replays" if bad is None else f"trace=fails-at-{bad}")
        if req.trace:
            Path(req.trace).write_text(format_trace(v.trace))
    if v.status is Status.HOLDS and v.certificate is not None and req.cert:
        Path(req.cert).write_text(F.to_text(v.certificate) + "\n")
    report = v.report() + "".join(x + "\n" for x in extra)
    return EXIT.get(v.status, 2), report, v


def _one_line(exc: Exception) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


# ---------------------------------------------------------------- argparse


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tstts", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="verify the property of a model")
    c.add_argument("model")
    c.add_argument("--engine", choices=ENGINES, default="ic3")
    c.add_argument("--regions", choices=("basic", "timepred"), default="basic")
    c.add_argument("--solver", default=None, help="solver command (default: $TSTTS_SOLVER or z3)")
    c.add_argument("--timeout-ms", type=int, default=None)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--max-k", type=int, default=500)
    c.add_argument("--frames", type=int, default=10_000, help="IC3 frame bound")
    c.add_argument("--bound", type=int, default=500, help="BMC bound")
    c.add_argument("--trace")
    c.add_argument("--cert")
    c.add_argument("--dump-smt", metavar="DIR")
    c.add_argument("--debug-invariants", action="store_true")
    c.add_argument("--property", help="override the model's property")
    c.add_argument("--portfolio", default="ic3,bmc", help="comma-separated sub-engines")

    g = sub.add_parser("gen", help="write a benchmark model")
    g.add_argument("kind", choices=("timer", "fischer", "random-props"))
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--buggy", action="store_true")
    g.add_argument("--model", help="model whose atoms random-props draws from")
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)

    o = sub.add_parser("oracle", help="build the region graph and check the property")
    o.add_argument("model")
    o.add_argument("--solver", default=None)
    o.add_argument("--dot")
    o.add_argument("--json")
    o.add_argument("--bound", type=int, default=1 << 16, help="discrete valuation bound")
    return ap


def _cmd_check(a) -> int:
    solver = SolverConfig.from_string(a.solver, timeout_ms=a.timeout_ms, seed=a.seed,
                                      dump_dir=a.dump_smt)
    req = RunRequest(a.model, a.engine, a.regions, solver, a.max_k, a.frames, a.bound,
                     a.trace, a.cert, a.debug_invariants, a.property,
                     tuple(x for x in a.portfolio.split(",") if x))
    code, report, _ = run(req)
    sys.stdout.write(report)
    return code


def _cmd_gen(a) -> int:
    if a.kind == "timer":
        text = benchmarks.TIMER
    elif a.kind == "fischer":
        text = benchmarks.fischer_text(a.n, a.buggy)
    else:
        if not a.model:
            sys.stderr.write("random-props needs --model\n")
            return 2
        text = benchmarks.random_props_text(parse_model(Path(a.model).read_bytes()), a.count, a.seed)
    Path(a.output).write_text(text)
    return 0


def _cmd_oracle(a) -> int:
    solver = SolverConfig.from_string(a.solver)
    try:
        sys_ = prepare(parse_model(Path(a.model).read_bytes()), solver)
        g = build_region_graph(sys_, solver, a.bound)
        v = oracle_check(sys_, g, solver)
    except (OSError, ModelError, SolverError, EnumerationBoundExceeded) as exc:
        sys.stdout.write(f"VERDICT=UNKNOWN\nerror={_one_line(exc)}\n")
        return 2
    if a.dot:
        Path(a.dot).write_text(g.to_dot())
    if a.json:
        Path(a.json).write_text(g.to_json())
    sys.stdout.write(v.report() + f"regions={len(g)}\n")
    return EXIT.get(v.status, 2)


def main(argv: list[str] | None = None) -> int:
    a = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * a.verbose, format="%(name)s: %(message)s")
    return {"check": _cmd_check, "gen": _cmd_gen, "oracle": _cmd_oracle}[a.cmd](a)


if __name__ == "__main__":
    sys.exit(main())
