#!/usr/bin/env python3
"""Regenerate data/wdbc.csv from scikit-learn's bundled copy of the
Wisconsin Diagnostic Breast Cancer dataset (569 samples, 30 features,
357 benign / 212 malignant)."""

import pathlib

from sklearn.datasets import load_breast_cancer

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "wdbc.csv"


def main() -> None:
    bunch = load_breast_cancer()
    names = [n.replace(" ", "_") for n in bunch.feature_names]
    # sklearn target: 0 = malignant, 1 = benign
    diag = ["M" if t == 0 else "B" for t in bunch.target]

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="\n") as f:
        f.write("id,diagnosis," + ",".join(names) + "\n")
        for i, (row, d) in enumerate(zip(bunch.data, diag)):
            cells = ",".join(repr(float(v)) for v in row)
            f.write(f"{i + 1},{d},{cells}\n")
    print(f"wrote {OUT} ({len(diag)} rows, {len(names)} features)")


if __name__ == "__main__":
    main()
