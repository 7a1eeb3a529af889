#!/usr/bin/env python3
"""Convert the UCI 'Multiple Features' (mfeat) digit files to faml's layout.

The source distribution ships six whitespace-delimited files with 2000 rows
each (200 per digit, in digit order 0..9):

    mfeat-fac mfeat-fou mfeat-kar mfeat-mor mfeat-pix mfeat-zer

This script writes view_0.csv .. view_5.csv (comma-separated, no header, one
file per source file in the order above) plus labels.csv (one integer per
line), which is what `faml train --data-dir ...` and the acceptance binary
expect.

Usage:
    python3 scripts/prepare_handwritten.py --src /path/to/mfeat --out data/handwritten
"""

import argparse
import sys
from pathlib import Path

SOURCES = ["mfeat-fac", "mfeat-fou", "mfeat-kar", "mfeat-mor", "mfeat-pix", "mfeat-zer"]
ROWS = 2000
CLASSES = 10


def read_matrix(path: Path) -> list[list[str]]:
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            for f in fields:
                try:
                    float(f)
                except ValueError:
                    sys.exit(f"{path}:{lineno}: non-numeric field {f!r}")
            rows.append(fields)
    if len(rows) != ROWS:
        sys.exit(f"{path}: expected {ROWS} rows, found {len(rows)}")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            sys.exit(f"{path}: row {i} has {len(r)} fields, row 0 has {width}")
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--src", required=True, type=Path,
                    help="directory containing the six mfeat-* files")
    ap.add_argument("--out", default=Path("data/handwritten"), type=Path,
                    help="output directory (default: data/handwritten)")
    args = ap.parse_args()

    missing = [s for s in SOURCES if not (args.src / s).exists()]
    if missing:
        sys.exit(f"missing source files in {args.src}: {', '.join(missing)}")

    args.out.mkdir(parents=True, exist_ok=True)
    for v, name in enumerate(SOURCES):
        rows = read_matrix(args.src / name)
        out = args.out / f"view_{v}.csv"
        with out.open("w") as fh:
            for r in rows:
                fh.write(",".join(r) + "\n")
        print(f"{out}: {len(rows)} rows x {len(rows[0])} cols  (from {name})")

    per_class = ROWS // CLASSES
    with (args.out / "labels.csv").open("w") as fh:
        for digit in range(CLASSES):
            fh.write(f"{digit}\n" * per_class)
    print(f"{args.out / 'labels.csv'}: {ROWS} labels, {per_class} per digit")


if __name__ == "__main__":
    main()
