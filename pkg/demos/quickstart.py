"""
Clustering three synthetic views
================================

Generate Gaussian blobs seen through three views of different width, cluster
them, and compare the result with the planted labels.
"""

# %%
# Data: 300 samples, 5 classes, views with 10, 15 and 20 features.
from dscmc import BlobSpec, HyperParams, cluster, make_blobs

data = make_blobs(BlobSpec(n=300, k=5, dims=(10, 15, 20), separation=10, seed=0))
print("views:", [x.shape for x in data.views])

# %%
# Fit. Every feature is z-scored first (the default), then the anchor graph
# is learned and k-means runs on its leading right singular vectors.
res = cluster(data, HyperParams(lambda1=0.1, lambda2=0.1, lambda3=0.1))
for name, value in res.metrics.items():
    print(f"{name:>6}: {value:.4f}")

# %%
# The anchor graph ``Z`` has one column per sample, each a point of the
# probability simplex.
Z = res.state.Z
print("Z shape", Z.shape, "column sums within %.1e of one" % abs(Z.sum(0) - 1).max())
print("sweeps:", len(res.trace), "fit time: %.1f ms" % (1e3 * res.timing["fit_s"]))
