"""Randomized search for the shipped default turbo interleavers.

Stage 1 screens random parameter sets by the weight-<=``--screen`` distance
estimate; stage 2 re-ranks the best ``--keep`` candidates with weight <= ``--refine``.

    python tools/search_interleavers.py --k 64 --kind drp --trials 3000 --block 8
"""

import argparse
import json

import numpy as np

from tcjam.interleavers import InterleaverDef
from tcjam.turbo import TurboSpec, estimate_dmin


def candidates(kind, k, rng, block):
    if kind == "qpp":
        while True:
            yield {"f1": int(rng.integers(0, k // 2)) * 2 + 1, "f2": int(rng.integers(1, k // 2)) * 2}
    incs = [p for p in range(1, k) if np.gcd(p, k) == 1]
    while True:
        yield {
            "read_dither": rng.permutation(block).tolist(),
            "write_dither": rng.permutation(block).tolist(),
            "increment": int(rng.choice(incs)),
            "offset": int(rng.integers(0, k)),
        }


def key(rep):
    return (rep.d_min_upper, -rep.A_min, -rep.w_min)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, required=True)
    ap.add_argument("--kind", choices=["drp", "qpp"], required=True)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--block", type=int, default=8)
    ap.add_argument("--screen", type=int, default=3)
    ap.add_argument("--refine", type=int, default=4)
    ap.add_argument("--keep", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    gen = candidates(args.kind, args.k, rng, args.block)
    scored, seen = [], set()
    for _ in range(args.trials):
        params = next(gen)
        tag = json.dumps(params, sort_keys=True)
        if tag in seen:
            continue
        seen.add(tag)
        try:
            il = InterleaverDef(args.kind, args.k, params)
        except ValueError:
            continue
        scored.append((key(estimate_dmin(TurboSpec(args.k, il), args.screen)), il))
    scored.sort(key=lambda t: t[0], reverse=True)
    best = None
    for _, il in scored[: args.keep]:
        rep = estimate_dmin(TurboSpec(args.k, il), args.refine)
        if best is None or key(rep) > key(best[1]):
            best = (il, rep)
    il, rep = best
    print(json.dumps(il.to_dict()))
    print(f"d_min<={rep.d_min_upper} A_min={rep.A_min} w_min={rep.w_min} (input weight <= {args.refine})")


if __name__ == "__main__":
    main()
