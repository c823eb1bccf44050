"""Throughput of the compiled and numpy sampling kernels.

    python benchmarks/bench_kernels.py --samples 2e6 --repeat 3

Both kernels must return the same estimate bit for bit; the script exits
non-zero if they do not.
"""

import argparse
import csv
import sys
import time

from nblsat import CnfFormula, StoppingRule, run_correlation
from nblsat.kernels import AVAILABLE

CASES = {
    "x1 (nm=1)": CnfFormula.from_ints(1, [[1]]),
    "example6 (nm=4)": CnfFormula.from_ints(2, [[1, -2], [-1, -2]]),
    "s_sat (nm=8)": CnfFormula.from_ints(2, [[1, -2], [-1, -2], [1, -2], [-1, -2]]),
    "3-cnf n=4 m=5 (nm=20)": CnfFormula.from_ints(
        4, [[1, 2, -3], [-1, 3, 4], [2, -4, 1], [-2, -3, 4], [3, 4, -1]]
    ),
}


def timed(formula, kernel, samples, threads):
    start = time.perf_counter()
    est = run_correlation(formula, None, 1, StoppingRule.fixed(samples),
                          threads=threads, kernel=kernel)
    return time.perf_counter() - start, est


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=float, default=1e6)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--csv", help="also write rows to this file")
    args = ap.parse_args(argv)
    samples = int(args.samples)

    kernels = [k for k in ("compiled", "python") if k in AVAILABLE]
    if len(kernels) < 2:
        print("note: compiled kernel not built; timing the fallback only", file=sys.stderr)

    rows, mismatch = [], False
    for name, formula in CASES.items():
        results = {}
        for kernel in kernels:
            best, est = min((timed(formula, kernel, samples, args.threads)
                             for _ in range(args.repeat)), key=lambda r: r[0])
            results[kernel] = est
            rows.append({"case": name, "kernel": kernel, "samples": samples,
                         "seconds": round(best, 4),
                         "msamples_per_s": round(samples / best / 1e6, 3)})
        if len({(e.mean, e.m2) for e in results.values()}) > 1:
            mismatch = True
            print(f"MISMATCH on {name}: {results}", file=sys.stderr)

    print(f"{'case':<24}{'kernel':<10}{'seconds':>10}{'Msamples/s':>12}{'speedup':>9}")
    base = {r["case"]: r["seconds"] for r in rows if r["kernel"] == "python"}
    for r in rows:
        speed = base[r["case"]] / r["seconds"]
        print(f"{r['case']:<24}{r['kernel']:<10}{r['seconds']:>10.3f}"
              f"{r['msamples_per_s']:>12.2f}{speed:>8.1f}x")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
