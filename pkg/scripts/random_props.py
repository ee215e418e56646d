"""Compare the basic and time-predecessor variants on many random properties of one model."""
import argparse
import time

from tstts.benchmarks import fischer, random_properties, timer
from tstts.ic3 import IC3Config, ic3
from tstts.kind import Diseq, KIndConfig, k_induction
from tstts.model import parse_model, prepare
from tstts.smt import SolverConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("model", nargs="?", default="fischer2",
                    help="'timer', 'fischerN' or a model file")
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-k", type=int, default=60)
    a = ap.parse_args()

    solver = SolverConfig()
    if a.model == "timer":
        base = timer()
    elif a.model.startswith("fischer") and a.model[7:].isdigit():
        base = fischer(int(a.model[7:]))
    else:
        with open(a.model) as fh:
            base = parse_model(fh.read())
    base = prepare(base, solver)

    engines = {
        "ic3-basic": lambda s: ic3(s, IC3Config(mode="basic"), solver),
        "ic3-timepred": lambda s: ic3(s, IC3Config(mode="timepred"), solver),
        "kind-basic": lambda s: k_induction(s, KIndConfig(max_k=a.max_k, diseq=Diseq.BASIC), solver),
        "kind-timepred": lambda s: k_induction(s, KIndConfig(max_k=a.max_k, diseq=Diseq.TIMEPRED),
                                               solver),
    }
    totals = {name: [0.0, 0, 0] for name in engines}  # seconds, solved, depth sum
    props = random_properties(base, a.count, a.seed)
    for p in props:
        sys = base.with_property(p)
        for name, run in engines.items():
            t0 = time.perf_counter()
            v = run(sys)
            row = totals[name]
            row[0] += time.perf_counter() - t0
            row[1] += v.status.definitive
            row[2] += v.k
    print(f"{len(props)} properties on {base.name or a.model}")
    print(f"{'engine':14s} {'solved':>6s} {'seconds':>9s} {'mean k':>7s}")
    for name, (secs, solved, depth) in totals.items():
        print(f"{name:14s} {solved:6d} {secs:9.2f} {depth / len(props):7.2f}")


if __name__ == "__main__":
    main()
