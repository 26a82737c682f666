#!/usr/bin/env python3
"""Extract benchmark CSVs from the keel-ds wheel into data/.

Usage: prepare_data.py KEEL_DS_WHEEL [OUT_DIR]

Writes heart, ionosphere, magic, diabetes, segment, spam and glass as
headerless CSV files with the class label in the last column. Cryotherapy
and credit are not bundled there and must be supplied separately.
"""

import csv
import io
import sys
import zipfile
from pathlib import Path

RAW = "keel_ds/data/{}/raw/{}.dat"

SOURCES = {
    "heart": ("balanced", "heart"),
    "ionosphere": ("balanced", "ionosphere"),
    "magic": ("balanced", "magic"),
    "diabetes": ("balanced", "pima"),
    "segment": ("balanced", "segment"),
    "spam": ("balanced", "spambase"),
}

# One-vs-rest splits of the six-class glass data, in original class order.
# The split for class 3 is formatted differently, so class 3 is the remainder.
GLASS_SPLITS = [("glass0", "1"), ("glass1", "2"), ("glass4", "5"), ("glass5", "6"), ("glass6", "7")]


def read_rows(wheel, group, name):
    text = wheel.read(RAW.format(group, name)).decode()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    return rows


def write(path, rows):
    with open(path, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)
    print(f"{path}: {len(rows)} rows, {len(rows[0]) - 1} features")


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    wheel = zipfile.ZipFile(sys.argv[1])
    out = Path(sys.argv[2] if len(sys.argv) > 2 else Path(__file__).resolve().parent.parent / "data")
    out.mkdir(parents=True, exist_ok=True)

    for target, (group, name) in SOURCES.items():
        rows = read_rows(wheel, group, name)
        if target == "heart":
            # The packaged copy stores ST depression scaled by 10.
            for r in rows:
                r[9] = repr(float(r[9]) / 10.0)
        write(out / f"{target}.csv", rows)

    base = None
    labels = None
    for split, cls in GLASS_SPLITS:
        rows = read_rows(wheel, "imbalanced", split)
        features = [r[:-1] for r in rows]
        if base is None:
            base = features
            labels = ["3"] * len(rows)
        elif features != base:
            sys.exit(f"{split}: row order differs from glass0")
        for i, r in enumerate(rows):
            if r[-1] == "positive":
                if labels[i] != "3":
                    sys.exit(f"{split}: row {i} already labelled {labels[i]}")
                labels[i] = cls
    write(out / "glass.csv", [f + [l] for f, l in zip(base, labels)])


if __name__ == "__main__":
    main()
