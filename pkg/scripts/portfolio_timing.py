"""Time the portfolio against its sub-engines run alone, per corpus model."""
import argparse
import statistics
import time

from tstts.cli import RunRequest, run_engine, run_portfolio
from tstts.corpus import corpus_models
from tstts.model import prepare
from tstts.smt import SolverConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--engines", default="ic3,bmc")
    ap.add_argument("--bound", type=int, default=40, help="BMC bound")
    a = ap.parse_args()
    solver = SolverConfig()
    req = RunRequest("-", engine="portfolio", solver=solver, bmc_bound=a.bound,
                     portfolio=tuple(a.engines.split(",")))
    ratios = []
    for name, sys in sorted(corpus_models().items()):
        sys = prepare(sys, solver)
        alone = {}
        for e in req.portfolio:
            t0 = time.perf_counter()
            v = run_engine(e, sys, req)
            alone[e] = (v.status, time.perf_counter() - t0)
        t0 = time.perf_counter()
        p = run_portfolio(sys, req)
        wall = time.perf_counter() - t0
        best = min(t for s, t in alone.values() if s.definitive)
        same = all(s is p.status for s, _ in alone.values() if s.definitive)
        ratios.append(wall / best)
        cols = " ".join(f"{e}={s.value}/{t:.3f}s" for e, (s, t) in alone.items())
        print(f"{name:14s} {p.status.value:9s} winner={p.stats['winner']:5s} "
              f"wall={wall:.3f}s {cols} ratio={wall / best:.2f} same={same}")
    print(f"median ratio {statistics.median(ratios):.2f}, max {max(ratios):.2f}, "
          f"{sum(r <= 1.2 for r in ratios)}/{len(ratios)} within 1.2x")


if __name__ == "__main__":
    main()
