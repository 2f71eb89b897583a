"""Benchmark: compiled tick engine vs the pure-Python fallback.

Runs the same fault-laden world under both engines (selected via
FACTORYLEDGER_PURE_KERNEL in a subprocess) and reports ticks/second and
readings/second. Usage: python benchmarks/bench_kernel.py [--ticks N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = """
import json, sys, time
from array import array
from factoryledger.sim import build_default_world, inject, step
from factoryledger.sim.specs import FaultInjection, InjectionMode
from factoryledger.sim.kernel import KERNEL_NAME, advance

ticks = int(sys.argv[1])
world = build_default_world(42)
inject(world, FaultInjection(40, "R02_LoadCell", InjectionMode.SET_VALUE, 900.0, 500))
inject(world, FaultInjection(90, "R05_EStop", InjectionMode.PRESS, 0.0, 25))
inject(world, FaultInjection(10, "Conv4_Temperature", InjectionMode.OFFSET, 48.0, 2000))

# raw engine: tick loop + physics + sampling into flat arrays, no objects
k = world.kinputs()
total = sum(ticks // spec.sample_period for spec in world.roster)
out_tick = array("q", bytes(8 * total))
out_sidx = array("l", bytes(array("l").itemsize * total))
out_val = array("d", bytes(8 * total))
advance(k, 0, 100, 0, out_tick, out_sidx, out_val)  # warm-up
t0 = time.perf_counter()
n, _ = advance(k, 0, ticks, 0, out_tick, out_sidx, out_val)
raw_dt = time.perf_counter() - t0

# full step(): same work plus reading-object construction for consumers
world2 = build_default_world(42)
step(world2, 100)
t0 = time.perf_counter()
_, readings = step(world2, ticks)
full_dt = time.perf_counter() - t0
print(json.dumps({"kernel": KERNEL_NAME, "ticks": ticks, "readings": n,
                  "raw_seconds": raw_dt, "full_seconds": full_dt}))
"""


def run_case(ticks: int, pure: bool) -> dict:
    env = dict(os.environ)
    if pure:
        env["FACTORYLEDGER_PURE_KERNEL"] = "1"
    else:
        env.pop("FACTORYLEDGER_PURE_KERNEL", None)
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD, str(ticks)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--ticks", type=int, default=200_000)
    args = parser.parse_args()

    results = [run_case(args.ticks, pure=False), run_case(args.ticks, pure=True)]
    print(f"\n{'engine':<14}{'ticks':>10}{'readings':>12}"
          f"{'raw s':>10}{'raw ticks/s':>14}{'step() s':>10}")
    for r in results:
        print(f"{r['kernel']:<14}{r['ticks']:>10}{r['readings']:>12}"
              f"{r['raw_seconds']:>10.3f}"
              f"{r['ticks'] / r['raw_seconds']:>14.0f}"
              f"{r['full_seconds']:>10.3f}")
    if results[0]["kernel"] != results[1]["kernel"]:
        raw = results[1]["raw_seconds"] / results[0]["raw_seconds"]
        full = results[1]["full_seconds"] / results[0]["full_seconds"]
        print(f"\ncompiled engine speedup: {raw:.1f}x on the tick loop,"
              f" {full:.1f}x through step() (reading-object construction"
              f" is shared Python-side cost)")
    else:
        print("\ncompiled engine not built; both runs used the fallback")


if __name__ == "__main__":
    main()
