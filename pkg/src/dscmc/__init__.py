"""Dual-space co-training multi-view clustering (DSCMC) on anchor graphs."""

from .core import (BadLabels, ClusteringResult, ConfigError, ConvergenceTrace,
                   DimensionMismatch, DSCMCError, HyperParams, LengthMismatch, MODES,
                   ModelState, MultiViewDataset, NonFinite, NotPositiveDefinite,
                   PadRankError, TraceRecord, check_state, validate_dataset)
from .datagen import BlobSpec, make_blobs, make_planted
from .embedding import KMeansModel, kmeans, spectral_embed
from .metrics import accuracy, ari, evaluate, hungarian, nmi, pairwise_fscore
from .numerics import (l21_norm, l21_reweight, orthogonal_procrustes,
                       project_simplex, spd_solve, svd_thin)
from .pipeline import cluster, preprocess, zscore
from .solver import (SolverConfig, fit, init_state, objective, update_a,
                     update_p, update_w, update_z)

__version__ = "0.1.0"
