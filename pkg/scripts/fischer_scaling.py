"""Run each engine on Fischer's protocol for growing process counts.

Every run is a separate ``tstts check`` process with a wall-clock limit, so a
run that exhausts its budget is reported as a timeout instead of stalling the
sweep.
"""
import argparse
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from tstts.benchmarks import fischer_text

RUNS = [  # label, buggy model, extra CLI arguments
    ("ic3-basic", False, ["--engine", "ic3", "--regions", "basic"]),
    ("ic3-timepred", False, ["--engine", "ic3", "--regions", "timepred"]),
    ("kind-basic", False, ["--engine", "kind", "--regions", "basic"]),
    ("kind-timepred", False, ["--engine", "kind", "--regions", "timepred"]),
    ("bmc-buggy", True, ["--engine", "bmc"]),
    ("ic3-buggy", True, ["--engine", "ic3", "--regions", "timepred"]),
]


def check(model: Path, args: list[str], limit: float) -> tuple[str, float]:
    t0 = time.perf_counter()
    try:
        out = subprocess.run([sys.executable, "-m", "tstts.cli", "check", str(model), *args],
                             capture_output=True, text=True, timeout=limit).stdout
    except subprocess.TimeoutExpired:
        return "TIMEOUT", limit
    verdict = out.splitlines()[0].split("=", 1)[1] if out else "ERROR"
    return verdict, time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--limit", type=float, default=300.0, help="seconds per run")
    ap.add_argument("--only", help="comma-separated run labels")
    a = ap.parse_args()
    labels = set(a.only.split(",")) if a.only else None
    with tempfile.TemporaryDirectory() as tmp:
        print(f"{'run':14s} {'n':>2s} {'verdict':9s} {'seconds':>8s}")
        for label, buggy, args in RUNS:
            if labels and label not in labels:
                continue
            for n in range(2, a.max_n + 1):
                model = Path(tmp) / f"fischer{n}{'-buggy' if buggy else ''}.stts"
                model.write_text(fischer_text(n, buggy))
                verdict, secs = check(model, args, a.limit)
                print(f"{label:14s} {n:2d} {verdict:9s} {secs:8.2f}", flush=True)
                if verdict == "TIMEOUT":
                    break  # larger instances only get harder


if __name__ == "__main__":
    main()
