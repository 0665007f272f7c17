"""Event-event cosine similarity matrices in the latent spaces and their
convex combination."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .embedding import LatentEmbedding
from .graph import Dataset

KIND_USER = "user_latent"
KIND_SEMANTIC = "semantic_latent"
KIND_COMBINED = "combined"


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric event similarity matrix with values in [-1, 1].

    Events with a zero latent vector have similarity 0 to everything,
    including themselves, so the diagonal is 1 only for nonzero rows.
    """

    items: tuple[str, ...]
    values: np.ndarray
    kind: str

    @property
    def n(self) -> int:
        return len(self.items)


def cosine_similarity_matrix(
    embedding: LatentEmbedding, kind: str = KIND_COMBINED
) -> SimilarityMatrix:
    """Pairwise cosine of the embedding rows."""
    vectors = embedding.vectors
    norms = np.linalg.norm(vectors, axis=1)
    nonzero = norms > 0.0
    safe = np.where(nonzero, norms, 1.0)
    unit = vectors / safe[:, None]
    values = unit @ unit.T
    values = np.clip((values + values.T) * 0.5, -1.0, 1.0)
    values[~nonzero, :] = 0.0
    values[:, ~nonzero] = 0.0
    np.fill_diagonal(values, np.where(nonzero, 1.0, 0.0))
    return SimilarityMatrix(items=embedding.items, values=values, kind=kind)


def combine_similarities(
    su: SimilarityMatrix, st: SimilarityMatrix, alpha: float
) -> SimilarityMatrix:
    """Elementwise ``alpha * su + (1 - alpha) * st``.

    The endpoints return an exact copy of the corresponding input so that
    combining is bitwise the identity at alpha 0 and 1.
    """
    if su.items != st.items:
        raise ValueError("similarity matrices have different item orderings")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if alpha == 1.0:
        values = su.values.copy()
    elif alpha == 0.0:
        values = st.values.copy()
    else:
        values = alpha * su.values + (1.0 - alpha) * st.values
    return SimilarityMatrix(items=su.items, values=values, kind=KIND_COMBINED)


def candidate_pairs(dataset: Dataset, min_shared: int) -> set[tuple[str, str]]:
    """Unordered event pairs sharing at least ``min_shared`` users or tags."""
    if min_shared < 1:
        raise ValueError(f"min_shared must be >= 1, got {min_shared}")
    event_users = dataset.event_users()
    event_tags = dataset.event_tags()
    pairs: set[tuple[str, str]] = set()
    for a, b in combinations(sorted(dataset.events), 2):
        if len(event_users[a] & event_users[b]) >= min_shared:
            pairs.add((a, b))
        elif len(event_tags[a] & event_tags[b]) >= min_shared:
            pairs.add((a, b))
    return pairs


def restrict_to_candidates(
    sm: SimilarityMatrix, pairs: set[tuple[str, str]]
) -> SimilarityMatrix:
    """Zero out off-diagonal entries for pairs outside the candidate set."""
    index = {item: i for i, item in enumerate(sm.items)}
    mask = np.zeros_like(sm.values, dtype=bool)
    for a, b in pairs:
        i, j = index[a], index[b]
        mask[i, j] = mask[j, i] = True
    np.fill_diagonal(mask, True)
    values = np.where(mask, sm.values, 0.0)
    return SimilarityMatrix(items=sm.items, values=values, kind=sm.kind)


def write_similarity_tsv(sm: SimilarityMatrix, path) -> None:
    """Dump the upper triangle as ``event_i<TAB>event_j<TAB>value`` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(sm.n):
            for j in range(i + 1, sm.n):
                fh.write(f"{sm.items[i]}\t{sm.items[j]}\t{sm.values[i, j]:.12g}\n")
