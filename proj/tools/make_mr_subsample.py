#!/usr/bin/env python3
"""Build a balanced 2,000-document movie-review polarity subsample as corpus TSV.

Source: rotten_tomatoes_corpus_full.csv.bz2 as shipped inside the scattertext
wheel (fresh/rotten critic snippets). Pass either the wheel or the .csv.bz2.
"""
import argparse
import bz2
import csv
import io
import random
import re
import zipfile

MEMBER = "scattertext/data/rotten_tomatoes_corpus_full.csv.bz2"


def read_rows(path):
    if path.endswith(".whl"):
        raw = zipfile.ZipFile(path).read(MEMBER)
    else:
        with open(path, "rb") as f:
            raw = f.read()
    text = bz2.decompress(raw).decode("utf-8")
    return list(csv.DictReader(io.StringIO(text)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("source")
    ap.add_argument("--out", required=True)
    ap.add_argument("--per-class", type=int, default=1000)
    ap.add_argument("--test-fraction", type=float, default=1 / 3)
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    by_label = {"fresh": [], "rotten": []}
    seen = set()
    for row in read_rows(args.source):
        label = row["category"]
        text = re.sub(r"\s+", " ", row["text"]).strip()
        if label not in by_label or not text or text in seen:
            continue
        seen.add(text)
        by_label[label].append(text)

    docs = []
    for label, texts in sorted(by_label.items()):
        picked = rng.sample(texts, args.per_class)
        n_test = round(len(picked) * args.test_fraction)
        for i, text in enumerate(picked):
            docs.append((label, "test" if i < n_test else "train", text))
    rng.shuffle(docs)

    with open(args.out, "w", encoding="utf-8", newline="\n") as out:
        out.write("# balanced movie-review polarity subsample, generated by make_mr_subsample.py\n")
        for i, (label, split, text) in enumerate(docs):
            out.write(f"mr{i:04d}\t{split}\t{label}\t{text}\n")


if __name__ == "__main__":
    main()
