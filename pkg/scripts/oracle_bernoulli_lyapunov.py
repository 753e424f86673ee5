"""Independent estimate of the top exponent of the Bernoulli 2x2 scenario.

Plain vector iteration with renormalisation: lambda_1 = lim (1/n) log |A_n ... A_1 v|.
Runs are independent symbol streams; the spread across runs gives the error bar.
The printed values are frozen into tests/oracle_values.py.
"""
import argparse
import json

import numpy as np

A = np.array([[[2.0, 1.0], [0.0, 0.5]], [[0.5, 0.0], [1.0, 2.0]]])


def top_exponent(n: int, runs: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((runs, 2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    acc = np.zeros(runs)
    chunk = 10_000
    for start in range(0, n, chunk):
        syms = rng.integers(0, 2, size=(min(chunk, n - start), runs))
        for s in syms:
            v = np.einsum("rij,rj->ri", A[s], v)
            nrm = np.linalg.norm(v, axis=1)
            acc += np.log(nrm)
            v /= nrm[:, None]
    return acc / n


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--runs", type=int, default=32)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    lam = top_exponent(args.n, args.runs, args.seed)
    print(json.dumps({"n": args.n, "runs": args.runs, "lambda1": float(lam.mean()),
                      "stderr": float(lam.std(ddof=1) / np.sqrt(args.runs))}, indent=2))


if __name__ == "__main__":
    main()
