"""Nearest-neighbor and CSLS retrieval over concept spaces.

The similarity kernel is always cosine, so method semantics do not change
with preprocessing. CSLS rescales each cosine by the mean similarity of
both endpoints to their local neighborhoods:

    score(x, y) = 2 cos(x, y) - r_T(x) - r_S(y)

where r_T(x) is the mean cosine of query x to its csls_k nearest targets
and r_S(y) the mean cosine of target y to its csls_k nearest queries,
both computed once over the full input sets (self-matches allowed). The
penalty demotes hub targets that are close to everything.

Targets are scanned in fixed-size blocks and queries in fixed-size
chunks; chunk geometry never depends on the thread count, so rankings
and scores are identical for any --threads setting. Ties break toward
the lower target vocabulary index.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .embedding_store import EmbeddingSpace
from .errors import ValidationError

METHODS = ("nn", "csls")

DEFAULT_CSLS_K = 10
DEFAULT_BLOCK_SIZE = 1024
_QUERY_CHUNK = 256


@dataclass(frozen=True)
class RetrievalResult:
    query_id: str
    ranked: tuple[tuple[str, float], ...]
    method: str
    csls_k: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown retrieval method '{self.method}'")
        seen = set()
        for target_id, _ in self.ranked:
            if target_id in seen:
                raise ValidationError(f"duplicate target '{target_id}' in ranked list")
            seen.add(target_id)
        scores = [s for _, s in self.ranked]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValidationError("ranked scores must be non-increasing")

    def rank_of(self, target_id: str) -> int | None:
        """1-based rank of target_id, or None if absent from the list."""
        for i, (tid, _) in enumerate(self.ranked):
            if tid == target_id:
                return i + 1
        return None


def _unit_rows(space: EmbeddingSpace, role: str) -> np.ndarray:
    vectors = space.vectors
    norms = np.linalg.norm(vectors, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ValidationError(f"zero-norm {role} vector for concept '{space.ids[int(zero[0])]}'")
    return vectors / norms[:, None]


def _top_k_row(scores: np.ndarray, indices: np.ndarray, k: int):
    """Indices/scores of the k best entries, ties toward the lower index."""
    order = np.lexsort((indices, -scores))[:k]
    return scores[order], indices[order]


def _rank_block_rows(score_rows, index_arrays, k, out, offset, target_ids, method, csls_k, query_ids):
    for i, (scores, indices) in enumerate(zip(score_rows, index_arrays)):
        top_scores, top_idx = _top_k_row(scores, indices, k)
        ranked = tuple((target_ids[j], float(s)) for j, s in zip(top_idx, top_scores))
        out[offset + i] = RetrievalResult(
            query_id=query_ids[offset + i], ranked=ranked, method=method, csls_k=csls_k
        )


def _validate_common(queries: EmbeddingSpace, targets: EmbeddingSpace, k: int):
    if queries.dim != targets.dim:
        raise ValidationError(
            f"dimension mismatch: queries d={queries.dim}, targets d={targets.dim}"
        )
    if k < 1 or k > targets.n:
        raise ValidationError(f"k={k} out of range 1..{targets.n}")


def _running_top(current: np.ndarray, block: np.ndarray, width: int) -> np.ndarray:
    merged = np.concatenate([current, block], axis=1)
    if merged.shape[1] <= width:
        return merged
    return np.partition(merged, -width, axis=1)[:, -width:]


def cosine_topk(
    queries: EmbeddingSpace,
    targets: EmbeddingSpace,
    k: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[RetrievalResult]:
    """Top-k targets per query by cosine similarity."""
    _validate_common(queries, targets, k)
    q = _unit_rows(queries, "query")
    t = _unit_rows(targets, "target")
    n, m = q.shape[0], t.shape[0]
    out: list[RetrievalResult | None] = [None] * n

    def run_chunk(start: int):
        chunk = q[start : start + _QUERY_CHUNK]
        best_scores = np.empty((chunk.shape[0], 0))
        best_idx = np.empty((chunk.shape[0], 0), dtype=np.int64)
        for b in range(0, m, block_size):
            sims = chunk @ t[b : b + block_size].T
            idx = np.arange(b, min(b + block_size, m), dtype=np.int64)
            merged_s = np.concatenate([best_scores, sims], axis=1)
            merged_i = np.concatenate([best_idx, np.broadcast_to(idx, sims.shape)], axis=1)
            rows_s, rows_i = [], []
            for row_s, row_i in zip(merged_s, merged_i):
                s, i = _top_k_row(row_s, row_i, k)
                rows_s.append(s)
                rows_i.append(i)
            best_scores = np.stack(rows_s)
            best_idx = np.stack(rows_i)
        _rank_block_rows(
            best_scores, best_idx, k, out, start, targets.ids, "nn", 0, queries.ids
        )

    _run_chunks(run_chunk, n, threads)
    return out  # fully populated


def csls_topk(
    queries: EmbeddingSpace,
    targets: EmbeddingSpace,
    k: int,
    csls_k: int = DEFAULT_CSLS_K,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[RetrievalResult]:
    """Top-k targets per query by the CSLS score.

    Neighborhood means are computed over the full query and target sets
    passed in (batch semantics); csls_k must not exceed either size.
    """
    _validate_common(queries, targets, k)
    if csls_k < 1 or csls_k > targets.n or csls_k > queries.n:
        raise ValidationError(
            f"csls_k={csls_k} out of range 1..min(queries={queries.n}, targets={targets.n})"
        )
    q = _unit_rows(queries, "query")
    t = _unit_rows(targets, "target")
    n, m = q.shape[0], t.shape[0]

    # pass 1: r_T per query (top csls_k target sims) and r_S per target
    # (top csls_k query sims), streamed over target blocks
    top_target_sims = np.empty((n, 0))
    r_s = np.empty(m)
    for b in range(0, m, block_size):
        sims = q @ t[b : b + block_size].T
        top_target_sims = _running_top(top_target_sims, sims, csls_k)
        block_cols = sims.T  # (block, n)
        if block_cols.shape[1] == csls_k:
            top_query = block_cols
        else:
            top_query = np.partition(block_cols, -csls_k, axis=1)[:, -csls_k:]
        r_s[b : b + block_cols.shape[0]] = top_query.mean(axis=1)
    r_t = top_target_sims.mean(axis=1)

    out: list[RetrievalResult | None] = [None] * n

    def run_chunk(start: int):
        chunk = q[start : start + _QUERY_CHUNK]
        chunk_rt = r_t[start : start + _QUERY_CHUNK, None]
        best_scores = np.empty((chunk.shape[0], 0))
        best_idx = np.empty((chunk.shape[0], 0), dtype=np.int64)
        for b in range(0, m, block_size):
            sims = chunk @ t[b : b + block_size].T
            scores = 2.0 * sims - chunk_rt - r_s[None, b : b + sims.shape[1]]
            idx = np.arange(b, min(b + block_size, m), dtype=np.int64)
            merged_s = np.concatenate([best_scores, scores], axis=1)
            merged_i = np.concatenate([best_idx, np.broadcast_to(idx, scores.shape)], axis=1)
            rows_s, rows_i = [], []
            for row_s, row_i in zip(merged_s, merged_i):
                s, i = _top_k_row(row_s, row_i, k)
                rows_s.append(s)
                rows_i.append(i)
            best_scores = np.stack(rows_s)
            best_idx = np.stack(rows_i)
        _rank_block_rows(
            best_scores, best_idx, k, out, start, targets.ids, "csls", csls_k, queries.ids
        )

    _run_chunks(run_chunk, n, threads)
    return out


def _run_chunks(run_chunk, n: int, threads: int) -> None:
    starts = range(0, n, _QUERY_CHUNK)
    if threads <= 1:
        for start in starts:
            run_chunk(start)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # chunks write disjoint output slices, so scheduling order is irrelevant
        list(pool.map(run_chunk, starts))


def retrieve(
    queries: EmbeddingSpace,
    targets: EmbeddingSpace,
    k: int,
    method: str = "csls",
    csls_k: int = DEFAULT_CSLS_K,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[RetrievalResult]:
    if method == "nn":
        return cosine_topk(queries, targets, k, block_size=block_size, threads=threads)
    if method == "csls":
        return csls_topk(queries, targets, k, csls_k=csls_k, block_size=block_size, threads=threads)
    raise ValidationError(f"unknown retrieval method '{method}'")


def write_results(results, path) -> None:
    """Results TSV: query_id\\trank\\ttarget_id\\tscore (score at 6 decimals)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for result in results:
            for rank, (target_id, score) in enumerate(result.ranked, start=1):
                fh.write(f"{result.query_id}\t{rank}\t{target_id}\t{score:.6f}\n")


def read_results(path, method: str = "nn", csls_k: int = 0) -> list[RetrievalResult]:
    """Read a results TSV back; the file does not record the method, so the
    caller may label it. Rank columns must be contiguous per query."""
    grouped: dict[str, list[tuple[str, float]]] = {}
    order: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line == "":
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ValidationError(f"{path}: line {lineno}: expected 4 tab-separated fields")
            query_id, rank_s, target_id, score_s = fields
            if query_id not in grouped:
                grouped[query_id] = []
                order.append(query_id)
            if not rank_s.isdigit() or int(rank_s) != len(grouped[query_id]) + 1:
                raise ValidationError(f"{path}: line {lineno}: ranks must count up from 1 per query")
            grouped[query_id].append((target_id, float(score_s)))
    return [
        RetrievalResult(query_id=qid, ranked=tuple(grouped[qid]), method=method, csls_k=csls_k)
        for qid in order
    ]
