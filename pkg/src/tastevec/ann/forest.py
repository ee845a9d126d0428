"""Random-projection tree forest for approximate nearest-neighbor retrieval.

Each tree recursively splits the vector set with a hyperplane through the
midpoint of two sampled points (normal = their difference) until leaves hold
at most ``max_leaf_size`` items. Queries pour a global inspection budget
into a single priority frontier shared across all trees, gather the leaf
candidates they reach, then rank candidates by exact cosine distance.

Trees are stored flat (one node table for the whole forest) so the traversal
loop can be JIT-compiled; after ``fit`` the forest is immutable and queries
allocate only per-call scratch, so concurrent querying is safe.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..embeddings.matrix import EmbeddingMatrix
from ..errors import DataError
from ..validation import check_vector

_LEAF = -1


@njit(cache=True, inline="always")
def _heap_push(heap_pri, heap_node, heap_len, pri, node):
    i = heap_len
    heap_pri[i] = pri
    heap_node[i] = node
    while i > 0:
        parent = (i - 1) // 2
        if heap_pri[parent] < heap_pri[i]:
            heap_pri[parent], heap_pri[i] = heap_pri[i], heap_pri[parent]
            heap_node[parent], heap_node[i] = heap_node[i], heap_node[parent]
            i = parent
        else:
            break
    return heap_len + 1


@njit(cache=True, inline="always")
def _heap_pop(heap_pri, heap_node, heap_len):
    pri = heap_pri[0]
    node = heap_node[0]
    heap_len -= 1
    heap_pri[0] = heap_pri[heap_len]
    heap_node[0] = heap_node[heap_len]
    i = 0
    while True:
        left = 2 * i + 1
        right = left + 1
        largest = i
        if left < heap_len and heap_pri[left] > heap_pri[largest]:
            largest = left
        if right < heap_len and heap_pri[right] > heap_pri[largest]:
            largest = right
        if largest == i:
            break
        heap_pri[largest], heap_pri[i] = heap_pri[i], heap_pri[largest]
        heap_node[largest], heap_node[i] = heap_node[i], heap_node[largest]
        i = largest
    return pri, node, heap_len


@njit(cache=True)
def _collect_candidates(
    normals,
    offsets,
    children,
    leaf_start,
    leaf_end,
    leaf_items,
    roots,
    q,
    search_k,
    out,
    seen,
):
    cap = normals.shape[0] + roots.shape[0] + 2
    heap_pri = np.empty(cap, dtype=np.float64)
    heap_node = np.empty(cap, dtype=np.int32)
    heap_len = 0
    for r in range(roots.shape[0]):
        heap_len = _heap_push(heap_pri, heap_node, heap_len, np.inf, roots[r])
    dims = q.shape[0]
    inspected = 0
    count = 0
    while heap_len > 0 and inspected < search_k:
        pri, node, heap_len = _heap_pop(heap_pri, heap_node, heap_len)
        inspected += 1
        if children[node, 0] == _LEAF:
            for j in range(leaf_start[node], leaf_end[node]):
                item = leaf_items[j]
                if not seen[item]:
                    seen[item] = True
                    out[count] = item
                    count += 1
        else:
            margin = -float(offsets[node])
            for d in range(dims):
                margin += float(normals[node, d]) * q[d]
            right_pri = margin if margin < pri else pri
            left_pri = -margin if -margin < pri else pri
            heap_len = _heap_push(heap_pri, heap_node, heap_len, right_pri, children[node, 1])
            heap_len = _heap_push(heap_pri, heap_node, heap_len, left_pri, children[node, 0])
    return count


def _rank_candidates(
    embeddings: EmbeddingMatrix,
    norms: np.ndarray,
    candidates: np.ndarray,
    q: np.ndarray,
    k: int,
    exclude,
) -> list[tuple[int, float]]:
    """Exact cosine ranking with deterministic (distance, song id) order."""
    song_ids = embeddings.vocab.song_ids[candidates]
    if exclude:
        keep = np.array([sid not in exclude for sid in song_ids], dtype=bool)
        candidates = candidates[keep]
        song_ids = song_ids[keep]
    if candidates.size == 0:
        return []
    qnorm = np.linalg.norm(q)
    if qnorm == 0.0:
        raise ValueError("cosine distance is undefined for zero-norm queries")
    dists = 1.0 - (embeddings.vectors[candidates] @ q) / (norms[candidates] * qnorm)
    order = np.lexsort((song_ids, dists))[:k]
    return [(int(song_ids[i]), float(dists[i])) for i in order]


def exact_knn(
    embeddings: EmbeddingMatrix, q, k: int, exclude=None
) -> list[tuple[int, float]]:
    """Exhaustive top-k by cosine distance; the testing oracle for queries."""
    q = check_vector(q, dim=embeddings.dim, name="q")
    if k < 1:
        raise ValueError("k must be >= 1")
    norms = np.linalg.norm(embeddings.vectors, axis=1)
    all_idx = np.arange(len(embeddings), dtype=np.int64)
    return _rank_candidates(embeddings, norms, all_idx, q, k, exclude)


class ProjectionForest(BaseEstimator):
    def __init__(self, num_trees: int = 10, max_leaf_size: int = 16, seed: int = 0):
        self.num_trees = num_trees
        self.max_leaf_size = max_leaf_size
        self.seed = seed

    # -- construction -------------------------------------------------------

    def fit(self, embeddings: EmbeddingMatrix):
        if self.num_trees < 1 or self.max_leaf_size < 1:
            raise ValueError("num_trees and max_leaf_size must be >= 1")
        vectors = embeddings.vectors
        n = vectors.shape[0]
        normals: list[np.ndarray] = []
        offsets: list[float] = []
        children: list[list[int]] = []
        leaf_spans: list[tuple[int, int]] = []
        leaf_items: list[int] = []
        roots = []
        for tree in range(self.num_trees):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=(self.seed, 0xA22), spawn_key=(tree,))
            )
            roots.append(
                self._build_node(
                    vectors,
                    np.arange(n, dtype=np.int64),
                    rng,
                    normals,
                    offsets,
                    children,
                    leaf_spans,
                    leaf_items,
                )
            )
        self.embeddings_ = embeddings
        self.normals_ = np.vstack(normals).astype(np.float32)
        self.offsets_ = np.asarray(offsets, dtype=np.float32)
        self.children_ = np.asarray(children, dtype=np.int32)
        self.leaf_start_ = np.asarray([s for s, _ in leaf_spans], dtype=np.int32)
        self.leaf_end_ = np.asarray([e for _, e in leaf_spans], dtype=np.int32)
        self.leaf_items_ = np.asarray(leaf_items, dtype=np.int32)
        self.roots_ = np.asarray(roots, dtype=np.int32)
        self.norms_ = np.linalg.norm(vectors, axis=1)
        return self

    def _build_node(
        self, vectors, indices, rng, normals, offsets, children, leaf_spans, leaf_items
    ) -> int:
        node = len(children)
        normals.append(np.zeros(vectors.shape[1], dtype=np.float32))
        offsets.append(0.0)
        children.append([_LEAF, _LEAF])
        leaf_spans.append((0, 0))

        split = None
        if len(indices) > self.max_leaf_size:
            split = self._choose_split(vectors, indices, rng)
        if split is None:
            start = len(leaf_items)
            leaf_items.extend(int(i) for i in indices)
            leaf_spans[node] = (start, len(leaf_items))
            return node

        normal32, offset32, left_idx, right_idx = split
        normals[node] = normal32
        offsets[node] = offset32
        left = self._build_node(
            vectors, left_idx, rng, normals, offsets, children, leaf_spans, leaf_items
        )
        right = self._build_node(
            vectors, right_idx, rng, normals, offsets, children, leaf_spans, leaf_items
        )
        children[node] = [left, right]
        return node

    def _choose_split(self, vectors, indices, rng):
        """Hyperplane through the midpoint of two sampled points; None if the
        subset cannot be split (e.g. duplicated vectors)."""
        for _ in range(8):
            a, b = rng.choice(len(indices), size=2, replace=False)
            p, q = vectors[indices[a]], vectors[indices[b]]
            diff = p - q
            if not np.any(diff):
                continue
            normal32 = diff.astype(np.float32)
            normal = normal32.astype(np.float64)
            offset32 = np.float32(normal @ ((p + q) / 2.0))
            margins = vectors[indices] @ normal - np.float64(offset32)
            right = margins > 0
            if right.all() or not right.any():
                continue
            return normal32, offset32, indices[~right], indices[right]
        return None

    # -- querying ------------------------------------------------------------

    def query(
        self,
        q,
        k: int,
        search_k: int | None = None,
        exclude=None,
    ) -> list[tuple[int, float]]:
        """Approximate top-k songs by cosine distance, nearest first.

        ``search_k`` caps the total number of tree nodes inspected across the
        shared frontier; the default scales with num_trees * k.
        """
        check_is_fitted(self, "roots_")
        q = check_vector(q, dim=self.embeddings_.dim, name="q")
        if k < 1:
            raise ValueError("k must be >= 1")
        if search_k is None:
            search_k = self.num_trees * max(32, k)
        out = np.empty(len(self.embeddings_), dtype=np.int64)
        seen = np.zeros(len(self.embeddings_), dtype=np.bool_)
        count = _collect_candidates(
            self.normals_,
            self.offsets_,
            self.children_,
            self.leaf_start_,
            self.leaf_end_,
            self.leaf_items_,
            self.roots_,
            q,
            search_k,
            out,
            seen,
        )
        return _rank_candidates(
            self.embeddings_, self.norms_, out[:count], q, k, exclude
        )

    # -- persistence -----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        check_is_fitted(self, "roots_")
        with open(path, "wb") as fh:
            fh.write(b"TIDX1\n")
            fh.write(b"metric=cosine\n")
            fh.write(f"trees={self.num_trees}\n".encode())
            fh.write(f"max_leaf_size={self.max_leaf_size}\n".encode())
            fh.write(f"dim={self.embeddings_.dim}\n".encode())
            fh.write(f"nodes={len(self.children_)}\n".encode())
            fh.write(f"embed_hash={self.embeddings_.content_hash()}\n".encode())
            fh.write(b"\n")
            fh.write(self.roots_.astype("<u4").tobytes())
            for node in range(len(self.children_)):
                if self.children_[node, 0] == _LEAF:
                    fh.write(bytes([1]))
                    items = self.leaf_items_[
                        self.leaf_start_[node] : self.leaf_end_[node]
                    ]
                    fh.write(np.uint32(len(items)).tobytes())
                    fh.write(items.astype("<u4").tobytes())
                else:
                    fh.write(bytes([0]))
                    fh.write(self.normals_[node].astype("<f4").tobytes())
                    fh.write(np.float32(self.offsets_[node]).tobytes())
                    fh.write(self.children_[node].astype("<u4").tobytes())

    @classmethod
    def load(
        cls, path: str | Path, embeddings: EmbeddingMatrix, verify_hash: bool = True
    ) -> "ProjectionForest":
        with open(path, "rb") as fh:
            if fh.readline() != b"TIDX1\n":
                raise DataError(f"{path}: not a TIDX1 index file")
            meta = {}
            while True:
                line = fh.readline().rstrip(b"\n")
                if not line:
                    break
                key, _, value = line.decode("ascii").partition("=")
                meta[key] = value
            if meta.get("metric") != "cosine":
                raise DataError(f"{path}: unsupported metric {meta.get('metric')!r}")
            stored = meta.get("embed_hash", "")
            if verify_hash and stored and stored != embeddings.content_hash():
                raise DataError(f"{path}: index embeddings hash mismatch")
            if int(meta["dim"]) != embeddings.dim:
                raise DataError(f"{path}: index dimension mismatch")
            num_trees = int(meta["trees"])
            num_nodes = int(meta["nodes"])
            dim = int(meta["dim"])
            forest = cls(
                num_trees=num_trees,
                max_leaf_size=int(meta.get("max_leaf_size", 16)),
            )
            roots = np.frombuffer(fh.read(4 * num_trees), dtype="<u4").astype(np.int32)
            normals = np.zeros((num_nodes, dim), dtype=np.float32)
            offsets = np.zeros(num_nodes, dtype=np.float32)
            children = np.full((num_nodes, 2), _LEAF, dtype=np.int32)
            leaf_start = np.zeros(num_nodes, dtype=np.int32)
            leaf_end = np.zeros(num_nodes, dtype=np.int32)
            leaf_items: list[np.ndarray] = []
            total_items = 0
            for node in range(num_nodes):
                kind = fh.read(1)
                if kind == b"\x01":
                    (count,) = np.frombuffer(fh.read(4), dtype="<u4")
                    items = np.frombuffer(fh.read(4 * int(count)), dtype="<u4")
                    leaf_start[node] = total_items
                    total_items += int(count)
                    leaf_end[node] = total_items
                    leaf_items.append(items.astype(np.int32))
                elif kind == b"\x00":
                    normals[node] = np.frombuffer(fh.read(4 * dim), dtype="<f4")
                    (offsets[node],) = np.frombuffer(fh.read(4), dtype="<f4")
                    children[node] = np.frombuffer(fh.read(8), dtype="<u4").astype(
                        np.int32
                    )
                else:
                    raise DataError(f"{path}: corrupt node record at {node}")
        forest.embeddings_ = embeddings
        forest.normals_ = normals
        forest.offsets_ = offsets
        forest.children_ = children
        forest.leaf_start_ = leaf_start
        forest.leaf_end_ = leaf_end
        forest.leaf_items_ = (
            np.concatenate(leaf_items) if leaf_items else np.empty(0, dtype=np.int32)
        )
        forest.roots_ = roots
        forest.norms_ = np.linalg.norm(embeddings.vectors, axis=1)
        return forest


def build_index(
    embeddings: EmbeddingMatrix,
    num_trees: int = 10,
    max_leaf_size: int = 16,
    seed: int = 0,
) -> ProjectionForest:
    return ProjectionForest(
        num_trees=num_trees, max_leaf_size=max_leaf_size, seed=seed
    ).fit(embeddings)
