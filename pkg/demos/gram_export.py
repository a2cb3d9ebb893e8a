"""
The complete graph as an image
==============================

``Z^T Z`` is an ``n x n`` similarity between samples built from the anchor
graph. With samples sorted by class, clean clusters show up as bright
diagonal blocks. This writes it to a PGM file any image viewer can open.
"""

import tempfile
from pathlib import Path

import numpy as np

from dscmc import BlobSpec, HyperParams, cluster, make_blobs
from dscmc.io import read_pgm, write_pgm

data = make_blobs(BlobSpec(n=200, k=4, dims=(8, 12), separation=6, seed=3))
res = cluster(data, HyperParams(0.1, 0.1, 0.1))

order = np.argsort(data.labels, kind="stable")
Z = res.state.Z[:, order]
G = Z.T @ Z

# %%
# Average similarity inside and between classes.
y = data.labels[order]
same = y[:, None] == y[None, :]
print("mean within-class %.3f, between-class %.3f" % (G[same].mean(), G[~same].mean()))

out = Path(tempfile.mkdtemp()) / "gram.pgm"
write_pgm(out, G)
print("wrote", out, read_pgm(out).shape)

# %%
# The same export from the command line::
#
#     dscmc synth --n 200 --k 4 --dims 8,12 --out data
#     dscmc fit --manifest data/manifest.json --lambda1 0.1 --lambda2 0.1 \
#         --lambda3 0.1 --out result.json
#     dscmc export-gram --result result.json --out gram.pgm
