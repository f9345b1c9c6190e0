#!/usr/bin/env python3
"""Desk-scale distortion experiment: failure rate of the norm guarantee.

Prints one row per (epsilon, delta) configuration with the Wilson 95% interval
of the failure fraction over independently seeded transforms.
"""

import argparse
import sys
import time
import warnings
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from sjlt.transform import AssumptionWarning, distortion_bench  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=1024)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--bucket-seed", type=int, default=20240501)
    parser.add_argument("--sign-seed", type=int, default=20240502)
    args = parser.parse_args()

    warnings.simplefilter("ignore", AssumptionWarning)
    print(f"{'epsilon':>8} {'delta':>7} {'k':>5} {'c':>3} {'failures':>9} "
          f"{'rate':>10} {'wilson95_hi':>12} {'secs':>7}")
    for epsilon, delta in [(0.25, 0.05), (0.2, 0.05), (0.25, 0.01), (0.5, 0.1)]:
        started = time.perf_counter()
        report = distortion_bench(args.d, epsilon, delta, args.trials,
                                  args.bucket_seed, args.sign_seed)
        elapsed = time.perf_counter() - started
        flag = "ok" if report.wilson_high <= delta else "EXCEEDS delta"
        print(f"{epsilon:>8} {delta:>7} {report.k:>5} {report.c:>3} "
              f"{report.failures:>9} {report.failure_rate:>10.2e} "
              f"{report.wilson_high:>12.2e} {elapsed:>7.1f}  {flag}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
