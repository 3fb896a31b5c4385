"""Compare the compiled and numpy RK4 propagators on representative gate workloads.

Run:  python benchmarks/bench_rk4.py [--repeat N]
"""
import argparse
import time

import numpy as np

from fluxkit.cli.config import load_fixture
from fluxkit.cli.derived import fluxonium_system, transmon_system
from fluxkit.gatesim import BACKENDS, pi_area_amplitude, run_batch

CASES = (
    # label, system, t_g (ns), batch size, pulses
    ("fluxonium 6 ns, 1 amplitude", "fluxonium", 6.0, 1, 1),
    ("fluxonium 6 ns, 41-point scan", "fluxonium", 6.0, 41, 1),
    ("transmon 6 ns, 41-point scan", "transmon", 6.0, 41, 1),
    ("fluxonium 16-pulse train, 8 amplitudes", "fluxonium", 6.0, 8, 16),
)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    systems = {
        "fluxonium": fluxonium_system(load_fixture("fluxonium3")),
        "transmon": transmon_system(load_fixture("transmon")),
    }
    backends = sorted(BACKENDS)
    print(f"backends: {', '.join(backends)}")
    header = f"{'case':42s}" + "".join(f"{b + ' (s)':>14s}" for b in backends)
    if "cython" in BACKENDS:
        header += f"{'speedup':>10s}  max|dpsi|"
    print(header)
    for label, name, t_g, batch, pulses in CASES:
        sys_ = systems[name]
        eps = np.linspace(0.5, 1.5, batch) * pi_area_amplitude(sys_, t_g)
        timings, states = {}, {}
        for b in backends:
            def job(b=b):
                states[b] = run_batch(sys_, eps, t_g, sys_.f01, n_pulses=pulses, backend=b)[0]
            job()  # warm-up
            timings[b] = best_time(job, args.repeat)
        line = f"{label:42s}" + "".join(f"{timings[b]:14.4f}" for b in backends)
        if "cython" in BACKENDS:
            diff = np.max(np.abs(states["cython"] - states["python"]))
            line += f"{timings['python'] / timings['cython']:10.1f}  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
