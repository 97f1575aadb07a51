"""Compare the compiled and pure Python series kernels.

Each workload runs in a fresh interpreter so that kernel selection at import
time is honoured.  Usage::

    python benchmarks/bench_kernels.py [--repeat 3]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, random, sys, time
sys.path.insert(0, "tests")
from mpert import BACKEND
from mpert.series import SeriesRing
from mpert.scalar import FloatField
from mpert.diagonalize import diagonalize_normal
from fractions import Fraction
from mpert.scalar import QI2
from _generators import round_trip_instance

def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

repeat = int(sys.argv[1])
rng = random.Random(1)
out = {"backend": BACKEND}
for name, field in (("exact", None), ("float", FloatField())):
    R = SeriesRing(3, 12, field)
    def dense():
        exps = [(a, b, c) for a in range(7) for b in range(7 - a) for c in range(7 - a - b)]
        return R.from_dict({e: QI2(Fraction(rng.randint(-99, 99), rng.randint(1, 9)),
                                   0, rng.randint(-9, 9), 0) for e in exps})
    f, g = dense(), dense()
    out[f"mul_{name}"] = best(lambda: [f * g for _ in range(5)], repeat)
A, _, _ = round_trip_instance(random.Random(5), 4, 2, 8)
out["diagonalize_exact"] = best(lambda: diagonalize_normal(A), repeat)
print(json.dumps(out))
"""


def run(pure: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["MPERT_PURE_PYTHON"] = "1" if pure else "0"
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], cwd=root, env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'workload':<20}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in fast:
        if key == "backend":
            continue
        a, b = fast[key], slow[key]
        print(f"{key:<20}{a:>11.3f}s{b:>11.3f}s{b / a:>9.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
