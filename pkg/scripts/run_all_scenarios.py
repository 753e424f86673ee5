"""Run every analysis listed in every scenario config and print a one-line summary each.

Outputs go to <out>/<scenario>/<command>/ (report.json plus CSV plot data).
"""
import argparse
import json
import time
from pathlib import Path

from flagdyn.cli import run

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenarios", default=str(ROOT / "scenarios"))
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", help="scenario names to run")
    args = ap.parse_args()
    failures = []
    for cfg in sorted(Path(args.scenarios).glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        for command in json.loads(cfg.read_text()).get("analyses", []):
            t0 = time.perf_counter()
            code = run(command, cfg, Path(args.out) / cfg.stem / command, threads=args.threads)
            print(f"  exit {code}, {time.perf_counter() - t0:.1f} s")
            if code:
                failures.append((cfg.stem, command, code))
    if failures:
        print("nonzero exits:", failures)
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
