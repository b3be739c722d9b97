"""Run a few experiment suites and print their aggregate rows."""
import sys

from editsync.harness import run_suite

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 3
for suite in ("docx-size-scaling", "ims-roundtrip", "stream-oracle", "sketch-roundtrip"):
    for row in run_suite(suite, trials).aggregates():
        print(f"{row['suite']:18s} n={row['n']:6d} K={row['K']:3d} "
              f"success={row['success_rate']:.2f} mean size={row['mean_size_bits']:.0f} bits")
