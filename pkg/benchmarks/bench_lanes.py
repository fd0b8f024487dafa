#!/usr/bin/env python3
"""Benchmark the numba kernel lane against the pure-numpy fallback.

The package selects the lane at import time from PRUFERCODE_NO_NUMBA, so this
script times whatever lane the current process got; with --compare it re-runs
itself in a subprocess with the fallback forced and prints both sets of
numbers plus the speedup, after checking that the two lanes agree numerically.

Usage:
    python benchmarks/bench_lanes.py --compare
    PRUFERCODE_NO_NUMBA=1 python benchmarks/bench_lanes.py
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _codec_workload(n_trees, max_n, seed):
    rng = np.random.default_rng(seed)
    parents = []
    for _ in range(n_trees):
        n = int(rng.integers(2, max_n + 1))
        par = np.zeros(n + 1, dtype=np.int64)
        for i in range(2, n + 1):
            par[i] = rng.integers(1, i)
        parents.append(par)
    return parents


def bench_codec(n_trees, max_n, seed):
    from prufercode.kernels import prufer_decode_kernel, prufer_encode_kernel

    parents = _codec_workload(n_trees, max_n, seed)
    # warm-up triggers JIT compilation outside the timed region
    prufer_decode_kernel(prufer_encode_kernel(parents[0], parents[0].size - 1),
                         parents[0].size - 1)

    t0 = time.perf_counter()
    sequences = [prufer_encode_kernel(p, p.size - 1) for p in parents]
    t1 = time.perf_counter()
    checksum = float(sum(int(s.sum()) for s in sequences))
    decoded = [prufer_decode_kernel(s, p.size - 1) for s, p in zip(sequences, parents)]
    t2 = time.perf_counter()
    checksum += float(sum(int(d.sum()) for d in decoded))
    return {"encode_s": t1 - t0, "decode_s": t2 - t1, "checksum": checksum}


def bench_model(steps, seed):
    from prufercode import EncodedExample, ModelConfig, ModelParams, greedy_decode
    from prufercode.model import loss_and_gradients

    config = ModelConfig(
        prufer_vocab_size=500,
        context_vocab_size=400,
        target_vocab_size=600,
        hidden_dim=64,
        embed_dim=64,
        seed=seed,
    )
    rng = np.random.default_rng(seed)
    params = ModelParams.initialized(config, rng)
    example = EncodedExample(
        prufer_ids=tuple(rng.integers(4, 500, size=40)),
        context_ids=tuple(rng.integers(4, 400, size=60)),
        comment_ids=(1,) + tuple(rng.integers(4, 600, size=12)) + (2,),
        comment_tokens=(),
    )
    loss, _ = loss_and_gradients(params, example)  # warm-up / compile

    t0 = time.perf_counter()
    total = 0.0
    for _ in range(steps):
        loss, grads = loss_and_gradients(params, example)
        total += loss
    t1 = time.perf_counter()
    for _ in range(max(steps // 10, 1)):
        out = greedy_decode(params, example.prufer_ids, example.context_ids, max_len=20)
    t2 = time.perf_counter()
    return {
        "train_step_ms": (t1 - t0) / steps * 1e3,
        "greedy_ms": (t2 - t1) / max(steps // 10, 1) * 1e3,
        "checksum": total / steps + float(sum(out)),
    }


def run(args):
    import prufercode

    results = {
        "lane": prufercode.LANE,
        "codec": bench_codec(args.trees, args.max_n, args.seed),
        "model": bench_model(args.steps, args.seed),
    }
    return results


def _print_table(current, fallback=None):
    rows = [
        ("prufer encode", "codec", "encode_s", "s"),
        ("prufer decode", "codec", "decode_s", "s"),
        ("train step", "model", "train_step_ms", "ms"),
        ("greedy decode", "model", "greedy_ms", "ms"),
    ]
    if fallback is None:
        print(f"lane: {current['lane']}")
        for label, group, key, unit in rows:
            print(f"  {label:<14} {current[group][key]:.3f} {unit}")
        return
    print(f"{'':<16}{current['lane']:>12}{fallback['lane']:>12}{'speedup':>10}")
    for label, group, key, unit in rows:
        a = current[group][key]
        b = fallback[group][key]
        print(f"{label:<16}{a:>10.3f} {unit:<2}{b:>10.3f} {unit:<2}{b / a:>9.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trees", type=int, default=3000, help="codec workload size")
    parser.add_argument("--max-n", type=int, default=200, help="max tree size")
    parser.add_argument("--steps", type=int, default=200, help="model training steps")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--compare", action="store_true",
                        help="also run the pure-numpy fallback in a subprocess")
    parser.add_argument("--json", action="store_true", help="print raw JSON only")
    args = parser.parse_args()

    results = run(args)
    if args.json:
        print(json.dumps(results))
        return

    if not args.compare:
        _print_table(results)
        return

    env = dict(os.environ, PRUFERCODE_NO_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, __file__, "--json", "--trees", str(args.trees),
         "--max-n", str(args.max_n), "--steps", str(args.steps), "--seed", str(args.seed)],
        env=env, capture_output=True, text=True, check=True,
    )
    fallback = json.loads(proc.stdout)
    for group in ("codec", "model"):
        mine = results[group]["checksum"]
        theirs = fallback[group]["checksum"]
        if not np.isclose(mine, theirs, rtol=1e-9):
            raise SystemExit(f"lane disagreement in {group}: {mine} vs {theirs}")
    print("lanes agree numerically (checksums match)\n")
    _print_table(results, fallback)


if __name__ == "__main__":
    main()
