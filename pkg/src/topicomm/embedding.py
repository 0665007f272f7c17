"""Degree-normalized bipartite matrices and the truncated-SVD latent
representation of events."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, svds

from .graph import Dataset

logger = logging.getLogger(__name__)

# below this size a dense LAPACK decomposition is faster and always converges
_DENSE_CUTOFF = 400

# singular values closer than this to the leading one are treated as tied
_TIE_TOL = 1e-8


@dataclass(frozen=True)
class BipartiteMatrix:
    """Sparse incidence matrix with row/column degree vectors attached."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    entries: sp.csr_matrix
    row_degrees: np.ndarray
    col_degrees: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class LatentEmbedding:
    """One k-dimensional coordinate vector per event."""

    items: tuple[str, ...]
    vectors: np.ndarray

    @property
    def k(self) -> int:
        return self.vectors.shape[1]


class SvdResult(NamedTuple):
    left: np.ndarray       # columns are left singular vectors
    values: np.ndarray     # nonincreasing singular values
    right: np.ndarray      # columns are right singular vectors


def _incidence(rows: list[str], cols: list[str], edges) -> BipartiteMatrix:
    row_index = {r: i for i, r in enumerate(rows)}
    col_index = {c: j for j, c in enumerate(cols)}
    ii, jj = [], []
    for r, c in edges:
        ii.append(row_index[r])
        jj.append(col_index[c])
    mat = sp.csr_matrix(
        (np.ones(len(ii)), (ii, jj)), shape=(len(rows), len(cols))
    )
    mat.sum_duplicates()
    return BipartiteMatrix(
        rows=tuple(rows),
        cols=tuple(cols),
        entries=mat,
        row_degrees=np.asarray(mat.sum(axis=1)).ravel(),
        col_degrees=np.asarray(mat.sum(axis=0)).ravel(),
    )


def event_user_matrix(dataset: Dataset) -> BipartiteMatrix:
    """Event x user incidence matrix, rows and columns in sorted id order."""
    return _incidence(
        sorted(dataset.events), sorted(dataset.users), dataset.event_user_edges
    )


def event_tag_matrix(dataset: Dataset) -> BipartiteMatrix:
    """Event x tag incidence matrix, rows and columns in sorted id order."""
    return _incidence(
        sorted(dataset.events), sorted(dataset.tags), dataset.event_tag_edges
    )


def _check_degrees(mat: BipartiteMatrix) -> None:
    for name, ids, degrees in (
        ("row", mat.rows, mat.row_degrees),
        ("column", mat.cols, mat.col_degrees),
    ):
        zero = np.where(degrees <= 0)[0]
        if len(zero):
            raise ValueError(f"zero-degree {name} {ids[zero[0]]!r} in bipartite matrix")


def normalize_bipartite(mat: BipartiteMatrix) -> BipartiteMatrix:
    """Scale the incidence matrix by the inverse square roots of the row
    and column degrees. The sparsity pattern is unchanged."""
    _check_degrees(mat)
    d1 = sp.diags(1.0 / np.sqrt(mat.row_degrees))
    d2 = sp.diags(1.0 / np.sqrt(mat.col_degrees))
    normalized = (d1 @ mat.entries @ d2).tocsr()
    return BipartiteMatrix(
        rows=mat.rows,
        cols=mat.cols,
        entries=normalized,
        row_degrees=np.asarray(normalized.sum(axis=1)).ravel(),
        col_degrees=np.asarray(normalized.sum(axis=0)).ravel(),
    )


def _canonical_signs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # make the largest-magnitude entry of each right vector positive so
    # repeated runs produce identical output
    for j in range(v.shape[1]):
        pivot = int(np.argmax(np.abs(v[:, j])))
        if v[pivot, j] < 0:
            v[:, j] = -v[:, j]
            u[:, j] = -u[:, j]
    return u, v


def truncated_svd(mat: BipartiteMatrix, k: int, rng_seed: int = 0) -> SvdResult:
    """Top ``k + 1`` singular triplets of ``mat.entries``.

    Small matrices go through dense LAPACK; larger ones use ARPACK with a
    seeded start vector so results are reproducible. Vector signs are
    canonicalized (largest-magnitude entry of each right vector positive).
    """
    n_rows, n_cols = mat.shape
    need = k + 1
    if need > min(n_rows, n_cols):
        raise ValueError(
            f"k+1={need} singular triplets requested but the matrix is "
            f"{n_rows}x{n_cols}"
        )

    if min(n_rows, n_cols) <= _DENSE_CUTOFF or need >= min(n_rows, n_cols):
        dense = mat.entries.toarray()
        u, s, vt = np.linalg.svd(dense, full_matrices=False)
        u, s, v = u[:, :need], s[:need], vt[:need].T
    else:
        rng = np.random.default_rng(rng_seed)
        v0 = rng.standard_normal(min(n_rows, n_cols))
        try:
            u, s, vt = svds(mat.entries, k=need, v0=v0)
        except ArpackNoConvergence as exc:
            achieved = np.sort(np.abs(exc.eigenvalues))[::-1] if len(exc.eigenvalues) else []
            raise RuntimeError(
                f"SVD failed to converge: {len(exc.eigenvalues)} of {need} "
                f"values converged (achieved: {achieved})"
            ) from exc
        order = np.argsort(s)[::-1]
        u, s, v = u[:, order], s[order], vt[order].T

    u, v = _canonical_signs(u.copy(), v.copy())
    return SvdResult(left=u, values=s, right=v)


def _align_tied_principal(svd: SvdResult, col_degrees: np.ndarray) -> SvdResult:
    """Rotate a degenerate leading singular subspace so its first vector
    follows the sqrt-degree direction.

    When the bipartite graph is disconnected the leading singular value is
    shared by one vector per component and the numerical basis of that
    subspace is arbitrary; dropping an arbitrary first vector can zero out
    the embedding of a whole component. Rotating the tied block onto the
    global degree direction makes the drop symmetric across components.
    """
    s = svd.values
    group = np.where(s[0] - s <= _TIE_TOL * max(1.0, s[0]))[0]
    if len(group) < 2:
        return svd

    p = np.sqrt(col_degrees)
    p /= np.linalg.norm(p)
    coeff = svd.right[:, group].T @ p
    norm = np.linalg.norm(coeff)
    if norm < 1e-6:
        return svd
    coeff /= norm

    # Householder reflector mapping e1 onto coeff
    w = coeff.copy()
    w[0] -= 1.0
    wnorm = np.linalg.norm(w)
    if wnorm < 1e-12:
        return svd
    w /= wnorm
    rot = np.eye(len(group)) - 2.0 * np.outer(w, w)

    right = svd.right.copy()
    left = svd.left.copy()
    right[:, group] = right[:, group] @ rot
    left[:, group] = left[:, group] @ rot
    left, right = _canonical_signs(left, right)
    logger.debug("aligned %d tied leading singular vectors", len(group))
    return SvdResult(left=left, values=s.copy(), right=right)


def latent_embedding(mat: BipartiteMatrix, svd: SvdResult, k: int) -> LatentEmbedding:
    """Event coordinates in the latent space of ``mat``.

    ``svd`` must come from the degree-normalized version of ``mat``. The
    principal singular vector carries no partition information and is
    dropped; vectors 2..k+1 are kept and the rows are rescaled back by the
    degree factors of the raw matrix.
    """
    if svd.right.shape[1] < k + 1:
        raise ValueError(
            f"embedding needs k+1={k + 1} singular vectors, got {svd.right.shape[1]}"
        )
    svd = _align_tied_principal(svd, mat.col_degrees)
    v_prime = svd.right[:, 1:k + 1]
    scaled = sp.diags(1.0 / mat.row_degrees) @ mat.entries @ sp.diags(
        1.0 / np.sqrt(mat.col_degrees)
    )
    coords = np.asarray(scaled @ v_prime)
    if not np.all(np.isfinite(coords)):
        raise ValueError("non-finite values in latent embedding")
    return LatentEmbedding(items=mat.rows, vectors=coords)


def write_embedding_tsv(embedding: LatentEmbedding, path) -> None:
    """Dump an embedding as ``event_id<TAB>c1...<TAB>ck`` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for item, row in zip(embedding.items, embedding.vectors):
            coords = "\t".join(f"{x:.12g}" for x in row)
            fh.write(f"{item}\t{coords}\n")
