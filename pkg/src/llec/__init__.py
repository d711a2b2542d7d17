"""Locally linear embedding clustering (LLEC) for color quantization."""

from .geometry import NeighborGraph, distance, knn
from .lle import (
    Embedding,
    EmbedCostMatrix,
    build_cost_matrix,
    count_components,
    cycle_laplacian,
    embed,
    perturb,
    run_lle,
    solve_weights,
)
from .segmentation import (
    Clustering,
    LLECConfig,
    SeedStrategy,
    SubspaceCluster,
    assign_to_subspace,
    llec_cluster,
    principal_subspace,
    reconstruct,
    segment,
    select_seed,
)
from .vq import Codebook, Initializer, distortion, init_centers, lbg

__version__ = "0.1.0"
