"""Classify scrambled class representatives and report verdicts, ranks and timings.

Usage: python scripts/classify_scrambles.py [--count 10] [--depth 2] [--q 1]
"""
import argparse
import time

from bsdforms.model import ModelSignature
from bsdforms.normalize import classify
from bsdforms.scramble import scrambled_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--depth", type=int, default=2)
    ap.add_argument("--q", type=int, default=1, choices=(1, 2))
    ap.add_argument("--degree", type=int, default=6)
    args = ap.parse_args()
    q = args.q
    src, tgt = ModelSignature(q + 2, q), ModelSignature(q + 4, q)
    kinds = ("linear", "whitney") if q == 1 else ("linear",)
    print(f"{src} -> {tgt}, depth {args.depth}, D = {args.degree}")
    for kind in kinds:
        for seed in range(args.count):
            E = scrambled_instance(kind, src, tgt, args.depth, seed, args.degree).embedding
            t = time.perf_counter()
            cert = classify(E)
            dt = time.perf_counter() - t
            ok = cert.replay(E) == cert.normal_form
            print(f"{kind:8s} seed {seed:3d}: {cert.verdict:20s} rank {cert.rank['rank']}  "
                  f"replay {'exact' if ok else 'MISMATCH'}  {dt:.2f}s")


if __name__ == "__main__":
    main()
