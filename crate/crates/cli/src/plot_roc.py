#!/usr/bin/env python3
"""Draws ROC curves from roc.csv in this directory. Needs matplotlib."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "roc.csv")
dst = sys.argv[2] if len(sys.argv) > 2 else os.path.join(here, "roc.png")

labels = {}
try:
    import json

    with open(os.path.join(here, "manifest.json")) as f:
        for v in json.load(f).get("variants", []):
            labels[v["scenario_digest"]] = v["label"]
except (OSError, ValueError):
    pass

curves = defaultdict(list)
with open(src, newline="") as f:
    for row in csv.DictReader(f):
        key = (row["scenario_digest"], row["combiner"], row["scheme"])
        curves[key].append(row)

fig, ax = plt.subplots(figsize=(7, 5))
for (digest, combiner, scheme), rows in sorted(curves.items()):
    rows.sort(key=lambda r: float(r["empirical_pfa"]))
    name = f"{combiner} {scheme}"
    if digest in labels:
        name += f" ({labels[digest]})"
    pfa = [float(r["empirical_pfa"]) for r in rows]
    pd = [float(r["empirical_pd"]) for r in rows]
    err = [float(r["empirical_pd_ci"]) for r in rows]
    line = ax.errorbar(pfa, pd, yerr=err, marker="o", ms=3, capsize=2, label=name)
    th = [(float(r["theory_pfa"]), float(r["theory_pd"])) for r in rows]
    th = [t for t in th if t[0] == t[0] and t[1] == t[1]]
    if th:
        th.sort()
        ax.plot(*zip(*th), ls="--", color=line[0].get_color(), lw=1)

ax.set_xlabel("probability of false alarm")
ax.set_ylabel("probability of detection")
ax.set_xlim(0, 1)
ax.set_ylim(0, 1.02)
ax.grid(alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(dst, dpi=150)
print(dst)
