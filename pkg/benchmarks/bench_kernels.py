"""Compare the numba kernels with the pure-Python fallback.

Each backend runs in its own interpreter (the backend is fixed at import
time by INHOMCP_DISABLE_JIT).  Prints events per second for each workload
and the speedup.

    python benchmarks/bench_kernels.py [--runs 20]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from inhomcp import _accel
from inhomcp.model import ModelParams, make_profile
from inhomcp.simulator import StopRule, derive_seed, simulate_run, monotone_runs
from inhomcp.front_chain import FrontChain, simulate_front

runs = int(sys.argv[1])
hom = make_profile("homogeneous", (0.5, 1.0))
workloads = {
    "contact": lambda k: simulate_run(ModelParams(3.6, hom), StopRule(60.0, 200), k).events,
    "front": lambda k: simulate_front(FrontChain.constant(2.0, 1.0), 0, StopRule(500.0), k).events,
    "monotone": lambda k: sum(r.events for r in
                              monotone_runs(hom, [2.0, 3.6], 0, StopRule(60.0, 200), k)[0]),
}
# warm-up compiles (or loads cached) kernels
for f in workloads.values():
    f(0)
out = {"backend": _accel.backend_name()}
for name, f in workloads.items():
    t0 = time.perf_counter()
    events = sum(f(derive_seed(1, k)) for k in range(runs))
    out[name] = events / (time.perf_counter() - t0)
print(json.dumps(out))
"""


def measure(disable_jit, runs):
    env = dict(os.environ)
    env.pop("INHOMCP_DISABLE_JIT", None)
    if disable_jit:
        env["INHOMCP_DISABLE_JIT"] = "1"
    proc = subprocess.run([sys.executable, "-c", WORKER, str(runs)], env=env, check=True,
                          capture_output=True, text=True)
    return json.loads(proc.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=20)
    args = parser.parse_args()
    jit = measure(False, args.runs)
    plain = measure(True, args.runs)
    print(f"{'workload':<10} {'numba ev/s':>14} {'python ev/s':>14} {'speedup':>8}")
    for name in ("contact", "front", "monotone"):
        print(f"{name:<10} {jit[name]:>14,.0f} {plain[name]:>14,.0f} {jit[name] / plain[name]:>7.1f}x")


if __name__ == "__main__":
    main()
