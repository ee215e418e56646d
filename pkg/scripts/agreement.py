"""Cross-check every engine against the region-graph oracle on the model corpus."""
import argparse
import json
import logging
import time

from tstts import formula as F
from tstts.experiments import ENGINES, agreement, engine_seconds, summarize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--props", type=int, default=10, help="random properties per model")
    ap.add_argument("--engines", default=",".join(ENGINES))
    ap.add_argument("--debug-invariants", action="store_true")
    ap.add_argument("--json", help="write per-case results here")
    ap.add_argument("-v", "--verbose", action="store_true")
    a = ap.parse_args()
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")

    t0 = time.perf_counter()
    cases = agreement(a.props, engines=a.engines.split(","), debug_invariants=a.debug_invariants)
    wall = time.perf_counter() - t0

    for c in cases:
        if not c.agree:
            print("DISAGREE", c.model, F.to_text(c.prop), c.problems,
                  {k: v.status.value for k, v in c.verdicts.items()})
    print(json.dumps(summarize(cases)))
    for name, secs in engine_seconds(cases).items():
        print(f"{name:14s} {secs:8.2f}s")
    print(f"wall {wall:.1f}s")
    if a.json:
        rows = [{"model": c.model, "property": F.to_text(c.prop), "regions": c.regions,
                 "problems": c.problems,
                 "verdicts": {k: {"status": v.status.value, "k": v.k, "seconds": v.seconds}
                              for k, v in c.verdicts.items()}} for c in cases]
        with open(a.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
