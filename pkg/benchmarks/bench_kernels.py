"""Compare the compiled and pure-NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N] [--quick]

Prints the best-of-N wall time per call for each kernel and shape, the
speedup of the compiled backend, and the largest absolute difference
between the two backends' outputs.
"""
import argparse
import sys
import timeit

import numpy as np

from doublecheck import kernels
from doublecheck.model import DoubleCheckModel, ModelConfig
from doublecheck.numcore import gaussian_kernel
from doublecheck.train import cross_entropy

SHAPES = [(64, 32, 16), (256, 128, 16), (256, 128, 128)]   # (T, B, H)
QUICK = [(64, 32, 16)]


def lstm_inputs(rng, T, B, H):
    return (rng.normal(size=(T, B, 4 * H)), rng.uniform(-0.1, 0.1, size=(H, 4 * H)),
            np.zeros((B, H)), np.zeros((B, H)))


def cases(rng, shapes):
    seen = set()
    for T, B, H in shapes:
        xw, w_hh, h0, c0 = lstm_inputs(rng, T, B, H)
        fwd = kernels.lstm_forward(xw, w_hh, h0, c0, backend="python")
        dhs = rng.normal(size=(T, B, H))
        hs, cs, acts = fwd
        yield (f"lstm_forward T={T} B={B} H={H}",
               lambda b, a=(xw, w_hh, h0, c0): kernels.lstm_forward(*a, backend=b))
        yield (f"lstm_backward T={T} B={B} H={H}",
               lambda b, a=(dhs, acts, cs, hs, h0, c0, w_hh): kernels.lstm_backward(*a, backend=b))

        if (B, T) in seen:
            continue
        seen.add((B, T))
        x = rng.random(size=(B, T))
        lengths = rng.integers(1, T + 1, size=B)
        w = gaussian_kernel(1.0)
        yield (f"gaussian_forward B={B} T={T}",
               lambda b, a=(x, lengths, w): kernels.gaussian_forward(*a, backend=b))
        yield (f"gaussian_backward B={B} T={T}",
               lambda b, a=(x, lengths, w): kernels.gaussian_backward(*a, backend=b))


def training_step_case(rng, seq_len=256, batch=128, dim=16):
    cfg = ModelConfig(vocab_size=200, embed_dim=dim, hidden_dim=dim, seq_len=seq_len)
    model = DoubleCheckModel(cfg, seed=0)
    ids = rng.integers(1, 200, size=(batch, seq_len))
    labels = rng.integers(0, 2, size=batch)

    def step(b):
        model.zero_grad()
        out = model(ids, train_mode=True, rng=np.random.default_rng(0), backend=b)
        loss = cross_entropy(out.probs, labels)
        loss.backward()
        return out.context_final.data, model.params["lstm1.w_hh"].grad

    return f"train step T={seq_len} B={batch} E=H={dim}", step


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 1000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smallest shape only")
    args = ap.parse_args(argv)
    if "cython" not in kernels.BACKENDS:
        print("compiled backend unavailable; build it with `python3 setup.py build_ext --inplace`")
        return 1

    rng = np.random.default_rng(0)
    rows = list(cases(rng, QUICK if args.quick else SHAPES))
    rows.append(training_step_case(rng, seq_len=64 if args.quick else 256))
    print(f"{'kernel':<40}{'python ms':>12}{'cython ms':>12}{'speedup':>9}{'max |diff|':>12}")
    for name, fn in rows:
        diff = max_diff(fn("python"), fn("cython"))
        tp = best_time(lambda: fn("python"), args.repeat)
        tc = best_time(lambda: fn("cython"), args.repeat)
        print(f"{name:<40}{tp * 1e3:>12.3f}{tc * 1e3:>12.3f}{tp / tc:>8.1f}x{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
