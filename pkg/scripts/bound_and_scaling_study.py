#!/usr/bin/env python3
"""Guarantee-bound slack and per-pass cost scaling.

Part 1 re-runs the selector on random instances with mixed correlation
structures and compares the achieved R^2 against the approximation
bound computed from the exact subset references (brute force optimum,
submodularity ratio, first-rejection pass).  Part 2 times literal
passes on null data to show the per-pass cost is linear in p.
"""
import argparse
import time

import numpy as np

from rai import (BoundInputs, RaiConfig, brute_force_subset, run_rai,
                 standardize, submodularity_ratio, theorem_bound)

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--instances", type=int, default=100)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

rng_master = np.random.default_rng(args.seed)
slacks, gammas, sizes = [], [], []
for i in range(args.instances):
    rng = np.random.default_rng(rng_master.integers(2**63))
    n, p = 100, int(rng.integers(4, 13))
    k = int(rng.integers(1, 4))
    X = rng.normal(size=(n, p))
    if i % 3 == 1:
        X = 0.6 * X + 0.8 * rng.normal(size=n)[:, None]
    elif i % 3 == 2:
        for j in range(1, p):
            X[:, j] = 0.5 * X[:, j - 1] + 0.9 * X[:, j]
    beta = np.zeros(p)
    nsig = int(rng.integers(1, min(4, p) + 1))
    beta[rng.choice(p, nsig, replace=False)] = rng.normal(0, 1.5, nsig)
    y = X @ beta + rng.normal(size=n)

    dataset = standardize(X, y)
    state, trace = run_rai(dataset, RaiConfig())
    l = len(state.selected)
    sizes.append(l)
    if l == 0:
        continue
    idx = [t.powers[0][0] for t in state.selected]
    kk = min(k, dataset.p)
    _, r2_opt = brute_force_subset(dataset, kk)
    gamma = submodularity_ratio(dataset, idx, kk) if l < dataset.p else 1.0
    bound = theorem_bound(BoundInputs(r2_opt=r2_opt, l=l, k=kk, gamma=gamma,
                                      s_f=trace.first_rejection_pass()))
    slacks.append(state.r_squared - bound)
    gammas.append(gamma)

slacks = np.array(slacks)
print(f"bound checked on {len(slacks)}/{args.instances} instances "
      f"(rest selected nothing)")
print(f"  slack min/median/max: {slacks.min():.4f} "
      f"{np.median(slacks):.4f} {slacks.max():.4f}")
print(f"  gamma  min/median:    {min(gammas):.3f} {np.median(gammas):.3f}")
print(f"  violations (slack < -1e-10): {(slacks < -1e-10).sum()}")

print("\nper-pass wall time, n=500 null data, skipping off:")
rng = np.random.default_rng(99)
base = None
for p in (500, 1000, 2000, 4000):
    dataset = standardize(rng.normal(size=(500, p)),
                          rng.normal(size=500))
    config = RaiConfig(initial_wealth=1e6, max_passes=3, skip_passes=False)
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        _, trace = run_rai(dataset, config)
        best = min(best, (time.perf_counter() - t0) / trace.passes_traversed)
    base = best if base is None else base
    print(f"  p={p:>5}: {best * 1e3:7.1f} ms/pass  (x{best / base:.2f})")
