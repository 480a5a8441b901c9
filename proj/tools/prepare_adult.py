#!/usr/bin/env python3
"""Convert the raw UCI Adult files into the CSV + schema layout read by dynforest.

Usage: prepare_adult.py <dir with adult.data and adult.test> <output dir>

The `fnlwgt` sampling-weight column is dropped, leaving 13 attributes
(5 numeric, 8 categorical). Missing categorical values ("?") are kept as
their own category, which gives 107 attributes after one-hot encoding.
"""

import csv
import json
import os
import sys

COLUMNS = [
    ("age", "numeric"),
    ("workclass", "categorical"),
    ("fnlwgt", None),
    ("education", "categorical"),
    ("education-num", "numeric"),
    ("marital-status", "categorical"),
    ("occupation", "categorical"),
    ("relationship", "categorical"),
    ("race", "categorical"),
    ("sex", "categorical"),
    ("capital-gain", "numeric"),
    ("capital-loss", "numeric"),
    ("hours-per-week", "numeric"),
    ("native-country", "categorical"),
    ("income", "label"),
]


def read_rows(path):
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [v.strip() for v in line.split(",")]
            if len(fields) != len(COLUMNS):
                continue
            fields[-1] = fields[-1].rstrip(".")
            rows.append(fields)
    return rows


def main():
    src, out = sys.argv[1], sys.argv[2]
    train = read_rows(os.path.join(src, "adult.data"))
    test = read_rows(os.path.join(src, "adult.test"))
    keep = [i for i, (_, kind) in enumerate(COLUMNS) if kind is not None]

    schema = {"positive_label": ">50K", "columns": []}
    for i in keep:
        name, kind = COLUMNS[i]
        col = {"name": name, "kind": kind}
        if kind == "categorical":
            col["values"] = sorted({r[i] for r in train + test})
        schema["columns"].append(col)

    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "adult_schema.json"), "w") as f:
        json.dump(schema, f, indent=2)
        f.write("\n")
    for name, rows in (("adult_train.csv", train), ("adult_test.csv", test)):
        with open(os.path.join(out, name), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow([COLUMNS[i][0] for i in keep])
            for r in rows:
                w.writerow([r[i] for i in keep])


if __name__ == "__main__":
    main()
