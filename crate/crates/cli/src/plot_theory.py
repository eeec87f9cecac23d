#!/usr/bin/env python3
"""Draws theoretical ROC curves from theory.csv in this directory. Needs matplotlib."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
src = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "theory.csv")
dst = sys.argv[2] if len(sys.argv) > 2 else os.path.join(here, "theory.png")

rows = defaultdict(list)
with open(src, newline="") as f:
    for row in csv.DictReader(f):
        rows[row["combiner"]].append(row)

fig, ax = plt.subplots(figsize=(7, 5))
for combiner, rs in sorted(rows.items()):
    conv = sorted((float(r["qfa_approx"]), float(r["qd_rayleigh"])) for r in rs)
    prop = sorted((float(r["qfa_proposed"]), float(r["qd_proposed_rayleigh"])) for r in rs)
    line = ax.plot(*zip(*conv), marker="o", ms=3, label=f"{combiner} conventional")
    ax.plot(*zip(*prop), marker="s", ms=3, ls="--", color=line[0].get_color(), label=f"{combiner} proposed")

ax.set_xlabel("probability of false alarm")
ax.set_ylabel("probability of detection")
ax.set_xlim(0, 1)
ax.set_ylim(0, 1.02)
ax.grid(alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(dst, dpi=150)
print(dst)
