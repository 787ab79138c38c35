"""Time the compiled classifier against the pure-Python one on the same unipotents.

    python3 bench/bench_kernels.py [--space D4+] [--q 2] [--sample 200]
"""
import argparse
import time

import numpy as np

from sopieces import kernels
from sopieces.census import unipotent_nilpotents
from sopieces.groups import enumerate_unipotents
from sopieces.quadspace import space_from_descriptor


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--space", action="append", help="descriptor; repeatable")
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--sample", type=int, default=200, help="elements given to the Python path")
    args = ap.parse_args()
    if kernels.BACKEND != "compiled":
        raise SystemExit("compiled kernel not built; run pip install -e . first")
    rng = np.random.default_rng(0)
    print(f"{'space':>6} {'q':>2} {'n':>7} {'compiled us/elt':>16} {'python us/elt':>14} {'speedup':>8}")
    for desc in args.space or ["D3", "D4+", "D5", "D6+"]:
        s = space_from_descriptor(desc, args.q)
        Ns = unipotent_nilpotents(s, enumerate_unipotents(s))
        sample = Ns[rng.choice(len(Ns), size=min(args.sample, len(Ns)), replace=False)]
        tc, rc = timed(lambda: kernels.classify_batch(s, Ns, backend="compiled"))
        tp, rp = timed(lambda: kernels.classify_batch(s, sample, backend="python"), repeat=1)
        rc_s = kernels.classify_batch(s, sample, backend="compiled")
        same = all(np.array_equal(rc_s[k], rp[k]) for k in rp)
        per_c = 1e6 * tc / len(Ns)
        per_p = 1e6 * tp / len(sample)
        print(f"{desc:>6} {args.q:>2} {len(Ns):>7} {per_c:>16.1f} {per_p:>14.1f} {per_p / per_c:>7.0f}x"
              + ("" if same else "  OUTPUTS DIFFER"))


if __name__ == "__main__":
    main()
