"""Independent Monte Carlo estimate of the exponents of the i.i.d. demo alphabet.

Each of 32 seeds runs one long discrete-QR iteration with numpy's QR on an
independent symbol stream; the mean and spread across seeds give the two
simple-root gaps with error bars.  The printed values are frozen into
tests/oracle_values.py.
"""
import argparse
import json

import numpy as np

from flagdyn.conditions import demo_alphabet


def exponents(mats: np.ndarray, weights, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    acc = np.zeros(3)
    syms = rng.choice(len(mats), size=n, p=weights)
    for s in syms:
        q, r = np.linalg.qr(mats[s] @ q)
        acc += np.log(np.abs(np.diag(r)))
    return np.sort(acc / n)[::-1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, default=32)
    args = ap.parse_args()
    mats, weights, _ = demo_alphabet(0)
    H = np.array([exponents(mats, weights, args.n, 1000 + s) for s in range(args.seeds)])
    gaps = H[:, :-1] - H[:, 1:]
    se = lambda a: (a.std(axis=0, ddof=1) / np.sqrt(len(a))).tolist()
    print(json.dumps({"n": args.n, "seeds": args.seeds, "H": H.mean(axis=0).tolist(), "H_stderr": se(H),
                      "gaps": gaps.mean(axis=0).tolist(), "gaps_stderr": se(gaps)}, indent=2))


if __name__ == "__main__":
    main()
