"""
A small grid over the regularizers
==================================

Runs the ``sweep`` subcommand in-process on a 4 x 4 grid over
``(lambda1, lambda2)`` and prints the accuracy table it writes.
"""

import csv
import tempfile
from pathlib import Path

from dscmc import BlobSpec, make_blobs
from dscmc.cli import main
from dscmc.io import write_dataset

work = Path(tempfile.mkdtemp())
manifest = write_dataset(work / "data", make_blobs(BlobSpec(n=200, k=4, separation=1.0, seed=5)))

code = main(["sweep", "--manifest", str(manifest),
             "--lambda1", "1e-3..1e3 log4", "--lambda2", "1e-3..1e3 log4",
             "--lambda3", "0.1", "--restarts", "10", "--out", str(work / "sweep")])
print("exit code", code)

# %%
with open(work / "sweep" / "summary.csv") as fh:
    rows = list(csv.DictReader(fh))
l1 = sorted({float(r["lambda1"]) for r in rows})
l2 = sorted({float(r["lambda2"]) for r in rows})
acc = {(float(r["lambda1"]), float(r["lambda2"])): float(r["acc"]) for r in rows}
print("ACC, rows lambda1, columns lambda2")
print(" " * 8 + "".join(f"{b:>8.0e}" for b in l2))
for a in l1:
    print(f"{a:>8.0e}" + "".join(f"{acc[a, b]:>8.3f}" for b in l2))
