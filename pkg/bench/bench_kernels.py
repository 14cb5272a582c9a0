"""Compare the compiled and pure-Python monomial kernels.

Two measurements:

* kernel calls: ``rates`` and ``rates_and_dlog`` on the layer kernel of a
  system, timed with ``timeit`` for each available backend;
* end to end: a multi-start equilibrium solve, run in a subprocess per
  backend (the backend is fixed at import, selected by POLYPL_PURE_PYTHON).

Usage: python bench/bench_kernels.py [--repeat 5] [--number 2000] [--starts 64]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from polypl import _kernels
from polypl.generate import example1, example2, random_kinetics, random_network
from polypl.kinetics import canonicalize

SOLVE_SNIPPET = """
import json, time
from polypl import BACKEND
from polypl.generate import example1
from polypl.equilibria import ccb_construct, solve_equilibrium
net, K = example1()
K = K.with_rates(ccb_construct(net, K, (1, 1)).k)
t0 = time.perf_counter()
recs = solve_equilibrium(net, K, mode="positive", starts={starts}, seed=0)
print(json.dumps({{"backend": BACKEND, "seconds": time.perf_counter() - t0,
                  "points": len(recs)}}))
"""


def systems():
    rng = np.random.default_rng(0)
    net = random_network(rng, m=4, n=6)
    out = {"example1": example1(), "example2": example2(),
           "random_m4": (net, random_kinetics(rng, net, h_max=3))}
    return out


def time_kernels(repeat: int, number: int) -> list[dict]:
    rows = []
    rng = np.random.default_rng(1)
    for name, (net, K) in systems().items():
        kern = canonicalize(K).layer_kernel
        u = rng.uniform(-1, 1, net.m)
        args = (kern.coef, kern.exps, kern.owner, kern.nrows, u)
        for backend, mod in _kernels.available_backends().items():
            for fn in ("rates", "rates_and_dlog"):
                f = getattr(mod, fn)
                best = min(timeit.repeat(lambda: f(*args), repeat=repeat, number=number))
                rows.append({"system": name, "terms": int(kern.coef.size), "backend": backend,
                             "call": fn, "microseconds": 1e6 * best / number})
    return rows


def time_solve(starts: int) -> list[dict]:
    rows = []
    for pure in ("", "1"):
        env = dict(os.environ)
        env.pop("POLYPL_PURE_PYTHON", None)
        if pure:
            env["POLYPL_PURE_PYTHON"] = pure
        proc = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(starts=starts)],
                              capture_output=True, text=True, env=env, check=True)
        rows.append(json.loads(proc.stdout.strip().splitlines()[-1]))
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--number", type=int, default=2000)
    p.add_argument("--starts", type=int, default=64)
    args = p.parse_args(argv)

    print(f"default backend: {_kernels.BACKEND}")
    print(f"{'system':<10} {'terms':>5} {'call':<15} {'backend':<9} {'us/call':>9}")
    kern = time_kernels(args.repeat, args.number)
    for r in kern:
        print(f"{r['system']:<10} {r['terms']:>5} {r['call']:<15} {r['backend']:<9} "
              f"{r['microseconds']:>9.2f}")
    print()
    print(f"multi-start positive-equilibrium solve, Example 1, {args.starts} starts")
    solve = time_solve(args.starts)
    for r in solve:
        print(f"  {r['backend']:<9} {r['seconds']:.3f} s  ({r['points']} points)")
    if len(solve) == 2 and solve[0]["backend"] != solve[1]["backend"]:
        print(f"  speedup: {solve[1]['seconds'] / solve[0]['seconds']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
