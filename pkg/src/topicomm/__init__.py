"""Overlapping topical community detection in event-based social networks.

Events are embedded in latent user and semantic spaces via the truncated
SVD of the degree-normalized bipartite matrices, clustered agglomeratively
under a semantic-modularity criterion, and users are attached to clusters
by link-strength assignment scores, yielding overlapping communities.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .baseline import greedy_modularity
from .clustering import ClusterSet, agglomerative_cluster, inter_sem, intra_sem, sem_q
from .embedding import (
    BipartiteMatrix,
    LatentEmbedding,
    event_tag_matrix,
    event_user_matrix,
    latent_embedding,
    normalize_bipartite,
    truncated_svd,
)
from .graph import (
    Config,
    Dataset,
    EmptyDatasetError,
    UserGraph,
    load_dataset,
    prune_dataset,
    user_user_projection,
)
from .membership import Community, CommunitySet, assign_users, assignment_score
from .metrics import (
    MetricsReport,
    TopicMap,
    compute_report,
    conductance,
    f_purity,
    friend_fraction,
    load_topic_map,
    newman_q,
    overlap_degrees,
    profile_similarity_fraction,
    purity,
    purq_beta,
    silhouette,
)
from .similarity import (
    SimilarityMatrix,
    candidate_pairs,
    combine_similarities,
    cosine_similarity_matrix,
)
from .synthgen import PlantedSpec, PlantedTruth, generate_planted_esbn, write_planted_tsv

__version__ = "0.1.0"

__all__ = [
    "BipartiteMatrix",
    "ClusterSet",
    "Community",
    "CommunitySet",
    "Config",
    "Dataset",
    "EmptyDatasetError",
    "KERNEL_BACKEND",
    "LatentEmbedding",
    "MetricsReport",
    "PlantedSpec",
    "PlantedTruth",
    "SimilarityMatrix",
    "TopicMap",
    "UserGraph",
    "agglomerative_cluster",
    "assign_users",
    "assignment_score",
    "candidate_pairs",
    "combine_similarities",
    "compute_report",
    "conductance",
    "cosine_similarity_matrix",
    "event_tag_matrix",
    "event_user_matrix",
    "f_purity",
    "friend_fraction",
    "generate_planted_esbn",
    "greedy_modularity",
    "inter_sem",
    "intra_sem",
    "latent_embedding",
    "load_dataset",
    "load_topic_map",
    "newman_q",
    "normalize_bipartite",
    "overlap_degrees",
    "profile_similarity_fraction",
    "prune_dataset",
    "purity",
    "purq_beta",
    "sem_q",
    "silhouette",
    "truncated_svd",
    "user_user_projection",
    "write_planted_tsv",
]
