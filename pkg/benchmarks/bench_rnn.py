"""Time the compiled recurrent kernels against the numpy fallback.

Runs identical forward+backward passes through both backends on the same
data and reports per-call wall time, the speedup, and the largest numeric
disagreement. Useful when deciding whether a build without the compiled
extension is fast enough for a full sweep.

    python3 benchmarks/bench_rnn.py --base 4 --batch 32 --width 3 --reps 50
"""

import argparse
import time

import numpy as np

from carrylab.rnn import init_params
from carrylab.rnn import _kernels_py

try:
    from carrylab.rnn import _kernels
except ImportError:
    _kernels = None


def make_inputs(base, batch, width, seed):
    rng = np.random.default_rng(seed)
    steps = 3 * width
    x = np.ascontiguousarray(rng.random((steps, batch, base)))
    dlogits = np.ascontiguousarray(rng.standard_normal((steps, batch, base)))
    return x, dlogits


def time_backend(module, kind, arrays, x, dlogits, reps):
    fwd = getattr(module, f"{kind}_forward")
    bwd = getattr(module, f"{kind}_backward")
    fwd(arrays, x)  # warm up allocators and jit-less caches alike
    start = time.perf_counter()
    for _ in range(reps):
        logits, cache = fwd(arrays, x)
        grads = bwd(arrays, x, cache, dlogits)
    elapsed = (time.perf_counter() - start) / reps
    return elapsed, logits, grads


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--base", type=int, default=4)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--width", type=int, default=3)
    parser.add_argument("--reps", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernels unavailable; only the numpy fallback exists")
        return 1

    x, dlogits = make_inputs(args.base, args.batch, args.width, args.seed)
    print(f"base={args.base} batch={args.batch} steps={3 * args.width} "
          f"reps={args.reps}")
    print(f"{'cell':<6} {'numpy':>10} {'cython':>10} {'speedup':>8} "
          f"{'max diff':>10}")
    for kind in ("gru", "lstm"):
        arrays = init_params(kind, args.base, args.seed).arrays
        t_py, logits_py, grads_py = time_backend(
            _kernels_py, kind, arrays, x, dlogits, args.reps)
        t_cy, logits_cy, grads_cy = time_backend(
            _kernels, kind, arrays, x, dlogits, args.reps)
        diff = float(np.abs(logits_py - logits_cy).max())
        for name in grads_py:
            diff = max(diff, float(np.abs(grads_py[name] - grads_cy[name]).max()))
        print(f"{kind:<6} {t_py * 1e3:>8.2f}ms {t_cy * 1e3:>8.2f}ms "
              f"{t_py / t_cy:>7.1f}x {diff:>10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
