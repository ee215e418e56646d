"""Reusable experiment drivers (engine agreement, scaling, portfolio timing)."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable

from . import formula as F
from .benchmarks import random_properties
from .corpus import corpus_models
from .engine import Status
from .ic3 import IC3Config, InvariantViolation, check_certificate, ic3
from .kind import Diseq, KIndConfig, k_induction
from .model import Stts, prepare, replay_trace
from .oracle import build_region_graph, oracle_check
from .smt import SolverConfig

log = logging.getLogger(__name__)


@dataclass
class Case:
    model: str
    prop: F.Node
    verdicts: dict = field(default_factory=dict)  # engine label -> Verdict
    problems: list = field(default_factory=list)
    regions: int = 0
    invariant_checks: int = 0

    @property
    def agree(self) -> bool:
        return len({v.status for v in self.verdicts.values()}) == 1 and not self.problems

    @property
    def status(self) -> Status | None:
        return next(iter(self.verdicts.values())).status if self.agree else None


def corpus_cases(props_per_model: int = 10, seed: int = 7) -> list[tuple[str, Stts]]:
    """Every corpus model with its own property plus random clause properties."""
    out = []
    for idx, (name, sys) in enumerate(sorted(corpus_models().items())):
        props = [sys.prop]
        # narrow models repeat clauses, so keep drawing until enough are distinct
        for attempt in range(50):
            for p in random_properties(sys, props_per_model, seed * 1000 + idx + 100_000 * attempt):
                if p not in props and len(props) <= props_per_model:
                    props.append(p)
            if len(props) > props_per_model:
                break
        out.extend((name, sys.with_property(p)) for p in props)
    return out


ENGINES = ("ic3-basic", "ic3-timepred", "kind-basic", "kind-timepred", "oracle")


def run_case(name: str, sys: Stts, solver: SolverConfig, engines: Iterable[str] = ENGINES,
             debug_invariants: bool = False, max_k: int = 500) -> Case:
    sys = prepare(sys, solver)
    case = Case(name, sys.prop)
    for label in engines:
        if label == "oracle":
            g = build_region_graph(sys, solver)
            case.regions = len(g)
            v = oracle_check(sys, g, solver)
        elif label.startswith("ic3"):
            try:
                v = ic3(sys, IC3Config(mode=label.split("-")[1], debug_invariants=debug_invariants),
                        solver)
            except InvariantViolation as exc:
                case.problems.append(f"{label}: frame invariant broken: {exc}")
                continue
            case.invariant_checks += v.stats.get("invariant_checks", 0)
        else:
            v = k_induction(sys, KIndConfig(max_k=max_k, diseq=Diseq(label.split("-")[1])), solver)
        case.verdicts[label] = v
        if v.status is Status.VIOLATED:
            if v.trace is None or replay_trace(sys, v.trace) is not None:
                case.problems.append(f"{label}: trace does not replay")
        if v.status is Status.HOLDS and label.startswith("ic3"):
            if v.certificate is None or not check_certificate(sys, v.certificate, solver):
                case.problems.append(f"{label}: certificate rejected")
        if not v.status.definitive:
            case.problems.append(f"{label}: {v.status.value} {v.reason}")
    return case


def agreement(props_per_model: int = 10, solver: SolverConfig | None = None,
              engines: Iterable[str] = ENGINES, debug_invariants: bool = False) -> list[Case]:
    solver = solver or SolverConfig()
    cases = []
    for name, sys in corpus_cases(props_per_model):
        t0 = time.perf_counter()
        c = run_case(name, sys, solver, engines, debug_invariants)
        log.info("%s %s %s %.2fs", name, F.to_text(c.prop),
                 {k: v.status.value for k, v in c.verdicts.items()}, time.perf_counter() - t0)
        cases.append(c)
    return cases


def summarize(cases: list[Case]) -> dict:
    out = {"cases": len(cases), "models": len({c.model for c in cases}),
           "disagreements": sum(not c.agree for c in cases)}
    for status in (Status.HOLDS, Status.VIOLATED):
        out[status.value.lower()] = sum(1 for c in cases if c.status is status)
    return out


def engine_seconds(cases: list[Case]) -> dict:
    tot: dict[str, float] = {}
    for c in cases:
        for k, v in c.verdicts.items():
            tot[k] = tot.get(k, 0.0) + v.seconds
    return tot


