#!/usr/bin/env python3
"""Regenerates the CLI golden fixture in tests/data with a numpy brute-force scan."""
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"


def main():
    rng = np.random.default_rng(20240607)
    data = rng.normal(size=(1000, 8))
    queries = rng.normal(size=(5, 8))
    OUT.mkdir(parents=True, exist_ok=True)
    np.savetxt(OUT / "gauss_1000x8.csv", data, delimiter=",", fmt="%.17g")
    np.savetxt(OUT / "gauss_queries_5x8.csv", queries, delimiter=",", fmt="%.17g")

    golden = []
    for qi, q in enumerate(queries):
        dist = np.sqrt(((data - q) ** 2).sum(axis=1))
        order = np.lexsort((np.arange(len(dist)), dist))[:100]
        golden.append({"query_index": qi, "hits": [[int(i), float(dist[i])] for i in order]})
    with open(OUT / "gauss_knn100_golden.json", "w") as f:
        json.dump(golden, f)
        f.write("\n")


if __name__ == "__main__":
    main()
