#!/usr/bin/env python3
"""Compare the compiled kernel core against the pure-numpy fallback.

Runs the two hot kernels (1D convolution, full-sequence LSTM) forward and
backward at training shapes, plus one full model forward/backward, and
prints per-call times and the speedup. BLAS pools are capped at one thread,
matching how the training loop runs.

Usage: python3 benchmarks/bench_kernels.py [--batch 64] [--repeats 50]
"""

import argparse
import time

import numpy as np

from coba._kernels import BACKEND, blas_single_thread, numpy_backend

try:
    from coba._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1000.0


def bench_backend(mod, b, l, c, h, k, repeats):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(b, l, c))
    w = rng.normal(size=(k, c, c))
    bias = rng.normal(size=c)
    wx = rng.normal(size=(c, 4 * h))
    wh = rng.normal(size=(h, 4 * h))
    bg = rng.normal(size=4 * h)

    y = mod.conv1d_forward(x, w, bias)
    dy = rng.normal(size=y.shape)
    h_all, cache = mod.lstm_forward(x, wx, wh, bg)
    dh = rng.normal(size=h_all.shape)

    return {
        "conv1d fwd": timeit(lambda: mod.conv1d_forward(x, w, bias), repeats),
        "conv1d bwd": timeit(lambda: mod.conv1d_backward(x, w, dy), repeats),
        "lstm fwd": timeit(lambda: mod.lstm_forward(x, wx, wh, bg), repeats),
        "lstm bwd": timeit(lambda: mod.lstm_backward(x, wx, wh, dh, cache), repeats),
    }


def bench_model(b, repeats):
    from coba.model import CobaConfig, CobaModel

    rng = np.random.default_rng(1)
    model = CobaModel(CobaConfig(n_features=7), seed=0)
    x = rng.normal(size=(b, 10, 7))
    dlogits = rng.normal(size=(b, 2))

    def step():
        model.forward(x, training=False)
        model.zero_grad()
        model.backward(dlogits)

    return timeit(step, repeats)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--seq-len", type=int, default=10)
    ap.add_argument("--channels", type=int, default=64)
    ap.add_argument("--hidden", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args()

    print(f"active backend: {BACKEND}")
    backends = [("numpy", numpy_backend)]
    if _core is not None:
        backends.append(("cython", _core))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    with blas_single_thread():
        results = {
            name: bench_backend(mod, args.batch, args.seq_len, args.channels,
                                args.hidden, 3, args.repeats)
            for name, mod in backends
        }
        model_ms = bench_model(args.batch, max(args.repeats // 2, 5))

    kernels = list(results[backends[0][0]])
    header = f"{'kernel':12s}" + "".join(f"{name:>12s}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for kern in kernels:
        row = f"{kern:12s}" + "".join(f"{results[name][kern]:10.2f}ms" for name, _ in backends)
        if len(backends) == 2:
            row += f"{results['numpy'][kern] / results['cython'][kern]:9.2f}x"
        print(row)
    print(f"\nfull model fwd+bwd (active backend, batch {args.batch}): {model_ms:.2f} ms")


if __name__ == "__main__":
    main()
