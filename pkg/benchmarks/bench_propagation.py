"""Compare the compiled and pure-numpy propagation backends.

    python benchmarks/bench_propagation.py --vars 50 100 200 --dom 10 20 --repeats 20

For each size the same generated instance is propagated on every available
backend, and the script prints the median wall time of each along with the
speedup. It also checks that both backends reach the same final state.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from probcsp import kernels
from probcsp.core import RemovalProfile
from probcsp.generator import GeneratorConfig, generate
from probcsp.propagation import prob_ac


def median_time(net, prof, backend: str, repeats: int) -> float:
    prob_ac(net, net.counts, prof, backend=backend)  # compile / warm caches
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        prob_ac(net, net.counts, prof, backend=backend)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vars", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--dom", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--density", type=float, default=0.1)
    ap.add_argument("--tightness", type=float, default=0.4)
    ap.add_argument("--event-fraction", type=float, default=0.3,
                    help="share of variables that start with half their domain removed")
    ap.add_argument("--repeats", type=int, default=15)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if kernels.DEFAULT_BACKEND == "numba" else [])
    if "numba" not in backends:
        print("numba is not installed (or disabled); timing the numpy backend only")

    header = f"{'n':>5} {'d':>4} {'arcs':>6} " + " ".join(f"{b + ' ms':>10}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>8}"
    print(header)
    for n in args.vars:
        for d in args.dom:
            net = generate(GeneratorConfig(n, d, args.density, args.tightness, args.seed))
            rng = np.random.default_rng(args.seed)
            prof = RemovalProfile(tuple(
                d // 2 if rng.random() < args.event_fraction else 0 for _ in range(n)
            ))
            states = [prob_ac(net, net.counts, prof, backend=b) for b in backends]
            if len(states) == 2 and not np.array_equal(states[0].rem, states[1].rem):
                raise SystemExit(f"backends disagree on n={n}, d={d}")
            times = [median_time(net, prof, b, args.repeats) for b in backends]
            arcs = 2 * len(net.constraint_pairs())
            line = f"{n:>5} {d:>4} {arcs:>6} " + " ".join(f"{t * 1e3:>10.3f}" for t in times)
            if len(times) == 2:
                line += f" {times[0] / times[1]:>7.1f}x"
            print(line)


if __name__ == "__main__":
    main()
