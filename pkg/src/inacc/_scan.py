"""Chunked, vectorized scans over all proper non-trivial partitions.

The object-level iterator in :mod:`inacc.partitions` is fine for desk-size
n, but exhaustive verification at n = 12 touches 4,213,595 partitions and
a Python-object loop does not cut it.  This module enumerates canonical
restricted-growth strings directly into int8 label matrices (rows =
partitions, columns = outcomes) and evaluates Jeffrey-posterior
expectations with bincount reductions, never holding more than one chunk.

Row order is lexicographic in the RGS encoding, matching the public
iterator exactly; a test cross-checks the two enumerations row by row.

Parallel scans split the RGS prefix tree across processes.  Reductions
(count, max, min, dedup-merge) are order-independent, so results agree
with the single-threaded scan within numeric tolerance; merge order is
fixed by submission order to keep single-run determinism.
"""

from __future__ import annotations

import functools
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .core import TOL_DEDUP, TOL_NUM

#: rows per chunk; keeps per-chunk temporaries around a few MB
CHUNK_ROWS = 1 << 16
#: full label matrix is cached up to this n (Bell(10)-2 = 115,973 rows)
CACHE_MAX_N = 10
#: reports keep per-partition details by default up to this many rows
KEEP_DETAILS_MAX = 10_000


def _expand_chunks(
    prefix: np.ndarray, maxes: np.ndarray, n: int, chunk_rows: int
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Grow RGS prefixes to full length n, yielding (labels, maxes) chunks.

    All partitions are produced (coarsest and finest included); callers
    filter on the block count.  Depth-first with ordered splitting keeps
    global lexicographic order.
    """
    stack = [(prefix, maxes)]
    while stack:
        block, mx = stack.pop()
        depth = block.shape[1]
        while depth < n:
            counts = mx.astype(np.int64) + 2
            offsets = np.cumsum(counts) - counts
            total = int(offsets[-1] + counts[-1])
            block = np.concatenate(
                [
                    np.repeat(block, counts, axis=0),
                    (np.arange(total, dtype=np.int64) - np.repeat(offsets, counts))
                    .astype(np.int8)
                    .reshape(-1, 1),
                ],
                axis=1,
            )
            mx = np.maximum(np.repeat(mx, counts), block[:, -1])
            depth += 1
            if depth < n and block.shape[0] > chunk_rows:
                pieces = range(0, block.shape[0], chunk_rows)
                slices = [(block[i : i + chunk_rows], mx[i : i + chunk_rows]) for i in pieces]
                for piece in reversed(slices[1:]):
                    stack.append(piece)
                block, mx = slices[0]
        yield block, mx


def iter_label_chunks(
    n: int,
    chunk_rows: int = CHUNK_ROWS,
    prefix: np.ndarray | None = None,
    maxes: np.ndarray | None = None,
) -> Iterator[np.ndarray]:
    """Proper non-trivial partition label matrices, lexicographic order."""
    if prefix is None:
        prefix = np.zeros((1, 1), dtype=np.int8)
        maxes = np.zeros(1, dtype=np.int8)
    assert maxes is not None
    for block, mx in _expand_chunks(prefix, maxes, n, chunk_rows):
        keep = (mx >= 1) & (mx <= n - 2)
        if keep.all():
            yield block
        elif keep.any():
            yield block[keep]


@functools.lru_cache(maxsize=8)
def cached_labels(n: int) -> np.ndarray:
    """Full proper non-trivial label matrix for small n (read-only)."""
    assert n <= CACHE_MAX_N
    mat = np.concatenate(list(iter_label_chunks(n)), axis=0)
    mat.setflags(write=False)
    return mat


# ---------------------------------------------------------------------------
# chunk kernels


def block_sums(labels: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """out[r, b] = sum of vec[i] over outcomes i with labels[r, i] == b."""
    rows, n = labels.shape
    idx = labels.astype(np.intp) + (np.arange(rows, dtype=np.intp) * n)[:, None]
    flat = np.bincount(
        idx.ravel(),
        weights=np.broadcast_to(vec, (rows, n)).ravel(),
        minlength=rows * n,
    )
    return flat.reshape(rows, n)


def block_ratio(labels: np.ndarray, pstar: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Jeffrey multiplier p*(B)/p(B) per row per block label; 0 off-support."""
    num = block_sums(labels, pstar)
    den = block_sums(labels, p)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def chunk_scores(
    labels: np.ndarray, pstar: np.ndarray, p: np.ndarray, d: np.ndarray
) -> np.ndarray:
    """E_{q_Pi}[d] for every row: sum_B p*(B)/p(B) * sum_{i in B} d(i) p(i)."""
    ratio = block_ratio(labels, pstar, p)
    dp = block_sums(labels, d * p)
    return np.einsum("ij,ij->i", ratio, dp)


def chunk_posteriors(labels: np.ndarray, pstar: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Jeffrey posterior q_Pi(i) = p*(B(i)) p(i) / p(B(i)) for every row."""
    ratio = block_ratio(labels, pstar, p)
    return np.take_along_axis(ratio, labels.astype(np.intp), axis=1) * p


# ---------------------------------------------------------------------------
# score scan (max / min / inaccessible counts)


@dataclass
class ScoreScan:
    """Aggregates of E_{q_Pi}[d] over the full enumeration."""

    count: int
    max_score: float
    min_score: float
    argmax_rgs: tuple[int, ...]
    num_le: int  # scores <= +tol: inaccessible under the tie rule
    num_lt: int  # scores <  -tol: strictly negative
    labels: np.ndarray | None = None  # populated only when collecting
    scores: np.ndarray | None = None


_EMPTY = (0, -np.inf, np.inf, (), 0, 0)


def _score_stats(labels: np.ndarray, scores: np.ndarray, tol: float) -> tuple:
    i = int(np.argmax(scores))
    return (
        int(scores.size),
        float(scores[i]),
        float(scores.min()),
        tuple(int(x) for x in labels[i]),
        int((scores <= tol).sum()),
        int((scores < -tol).sum()),
    )


def _merge_stats(a: tuple, b: tuple) -> tuple:
    if a[0] == 0:
        return b
    if b[0] == 0:
        return a
    # ties broken toward the lexicographically smaller witness
    if (b[1], [-x for x in b[3]]) > (a[1], [-x for x in a[3]]):
        hi, arg = b[1], b[3]
    else:
        hi, arg = a[1], a[3]
    return (a[0] + b[0], hi, min(a[2], b[2]), arg, a[4] + b[4], a[5] + b[5])


def _score_worker(args: tuple) -> tuple:
    prefix, maxes, n, chunk_rows, pstar, p, d, tol = args
    agg = _EMPTY
    for labels in iter_label_chunks(n, chunk_rows, prefix, maxes):
        agg = _merge_stats(agg, _score_stats(labels, chunk_scores(labels, pstar, p, d), tol))
    return agg


def score_scan(
    n: int,
    pstar: np.ndarray,
    p: np.ndarray,
    d: np.ndarray,
    tol: float = TOL_NUM,
    workers: int = 1,
    collect: bool = False,
    chunk_rows: int = CHUNK_ROWS,
) -> ScoreScan:
    """Scan E_{q_Pi}[d] over all proper non-trivial partitions of {1..n}."""
    if n <= CACHE_MAX_N:
        labels = cached_labels(n)
        scores = chunk_scores(labels, pstar, p, d)
        agg = _score_stats(labels, scores, tol)
        return ScoreScan(*agg, labels=labels if collect else None,
                         scores=scores if collect else None)
    if collect:
        raise ValueError("collect=True is only supported for cached (small) n")
    if workers <= 1:
        agg = _score_worker((None, None, n, chunk_rows, pstar, p, d, tol))
    else:
        parts = _parallel_map(_score_worker, (pstar, p, d, tol), n, workers, chunk_rows)
        agg = functools.reduce(_merge_stats, parts, _EMPTY)
    return ScoreScan(*agg)


def iter_scored_chunks(
    n: int, pstar: np.ndarray, p: np.ndarray, d: np.ndarray, chunk_rows: int = CHUNK_ROWS
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """(labels, scores) per chunk, single-threaded; used for CSV streaming."""
    if n <= CACHE_MAX_N:
        labels = cached_labels(n)
        yield labels, chunk_scores(labels, pstar, p, d)
        return
    for labels in iter_label_chunks(n, chunk_rows):
        yield labels, chunk_scores(labels, pstar, p, d)


# ---------------------------------------------------------------------------
# posterior class scan (dedup with multiplicities)


def _class_chunk(acc: dict, labels: np.ndarray, pstar: np.ndarray, p: np.ndarray) -> None:
    q = chunk_posteriors(labels, pstar, p)
    rounded = np.round(q, 12) + 0.0  # normalize -0.0 so byte keys match
    uniq, inverse, counts = np.unique(
        rounded, axis=0, return_inverse=True, return_counts=True
    )
    inv = inverse.ravel()
    # reversed assignment leaves the first occurrence per unique row
    first = np.empty(uniq.shape[0], dtype=np.int64)
    first[inv[::-1]] = np.arange(inv.size - 1, -1, -1)
    for u in range(uniq.shape[0]):
        key = uniq[u].tobytes()
        entry = acc.get(key)
        if entry is None:
            acc[key] = [int(counts[u]), q[first[u]].copy()]
        else:
            entry[0] += int(counts[u])


def _class_worker(args: tuple) -> dict:
    prefix, maxes, n, chunk_rows, pstar, p = args
    acc: dict = {}
    for labels in iter_label_chunks(n, chunk_rows, prefix, maxes):
        _class_chunk(acc, labels, pstar, p)
    return acc


def class_scan(
    n: int,
    pstar: np.ndarray,
    p: np.ndarray,
    workers: int = 1,
    chunk_rows: int = CHUNK_ROWS,
) -> list[tuple[tuple[float, ...], int]]:
    """Distinct Jeffrey posteriors with multiplicities, lexicographic order.

    Posteriors are bucketed on a 1e-12 grid first, then buckets whose
    representatives sit within ``TOL_DEDUP`` in max-norm are merged, so
    sub-tolerance collisions count as genuine multiplicity.
    """
    if n <= CACHE_MAX_N:
        acc: dict = {}
        _class_chunk(acc, cached_labels(n), pstar, p)
    elif workers <= 1:
        acc = _class_worker((None, None, n, chunk_rows, pstar, p))
    else:
        parts = _parallel_map(_class_worker, (pstar, p), n, workers, chunk_rows)
        acc = {}
        for part in parts:
            for key, (cnt, rep) in part.items():
                entry = acc.get(key)
                if entry is None:
                    acc[key] = [cnt, rep]
                else:
                    entry[0] += cnt
    return _merge_within_tolerance(acc)


def _merge_within_tolerance(acc: dict) -> list[tuple[tuple[float, ...], int]]:
    items = sorted(
        ((tuple(float(x) for x in rep), cnt) for cnt, rep in acc.values()),
        key=lambda it: it[0],
    )
    if not items:
        return []
    reps = [it[0] for it in items]
    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # max-norm closeness forces closeness in the first coordinate, so a
    # window scan over the sorted list sees every mergeable pair
    for i in range(len(items)):
        j = i + 1
        while j < len(items) and reps[j][0] - reps[i][0] <= TOL_DEDUP:
            if max(abs(a - b) for a, b in zip(reps[i], reps[j])) <= TOL_DEDUP:
                parent[find(j)] = find(i)
            j += 1
    groups: dict[int, list] = {}
    for i in range(len(items)):
        root = find(i)
        entry = groups.setdefault(root, [None, 0])
        if entry[0] is None or reps[i] < entry[0]:
            entry[0] = reps[i]
        entry[1] += items[i][1]
    return sorted((tuple(rep), cnt) for rep, cnt in groups.values())


# ---------------------------------------------------------------------------
# mixture-identity scan


def _epsilon_chunk(labels, pstar, p, p_eps, d, d_eps, eps) -> tuple[int, float, float]:
    q = chunk_posteriors(labels, pstar, p)
    q_eps = chunk_posteriors(labels, p_eps, p)
    mix = float(np.abs(q_eps - ((1.0 - eps) * q + eps * p)).max())
    expect = float(np.abs(q_eps @ d_eps - (1.0 - eps) * (q @ d)).max())
    return labels.shape[0], mix, expect


def _epsilon_worker(args: tuple) -> tuple[int, float, float]:
    prefix, maxes, n, chunk_rows, pstar, p, p_eps, d, d_eps, eps = args
    count, mix, expect = 0, 0.0, 0.0
    for labels in iter_label_chunks(n, chunk_rows, prefix, maxes):
        c, m, e = _epsilon_chunk(labels, pstar, p, p_eps, d, d_eps, eps)
        count += c
        mix = max(mix, m)
        expect = max(expect, e)
    return count, mix, expect


def epsilon_scan(
    n: int,
    pstar: np.ndarray,
    p: np.ndarray,
    p_eps: np.ndarray,
    d: np.ndarray,
    d_eps: np.ndarray,
    eps: float,
    workers: int = 1,
    chunk_rows: int = CHUNK_ROWS,
) -> tuple[int, float, float]:
    """(count, max mixture residual, max expectation residual) over all Pi."""
    if n <= CACHE_MAX_N:
        return _epsilon_chunk(cached_labels(n), pstar, p, p_eps, d, d_eps, eps)
    if workers <= 1:
        return _epsilon_worker((None, None, n, chunk_rows, pstar, p, p_eps, d, d_eps, eps))
    parts = _parallel_map(_epsilon_worker, (pstar, p, p_eps, d, d_eps, eps), n, workers, chunk_rows)
    count = sum(p_[0] for p_ in parts)
    return count, max(p_[1] for p_ in parts), max(p_[2] for p_ in parts)


# ---------------------------------------------------------------------------
# process-pool plumbing


def _frontier(n: int, min_rows: int) -> tuple[np.ndarray, np.ndarray]:
    """RGS prefixes deep enough to hand at least min_rows subtrees out."""
    prefix = np.zeros((1, 1), dtype=np.int8)
    mx = np.zeros(1, dtype=np.int8)
    while prefix.shape[1] < n - 1 and prefix.shape[0] < min_rows:
        counts = mx.astype(np.int64) + 2
        offsets = np.cumsum(counts) - counts
        total = int(offsets[-1] + counts[-1])
        col = (np.arange(total, dtype=np.int64) - np.repeat(offsets, counts)).astype(np.int8)
        prefix = np.concatenate([np.repeat(prefix, counts, axis=0), col.reshape(-1, 1)], axis=1)
        mx = np.maximum(np.repeat(mx, counts), col)
    return prefix, mx


def _pool_context():
    try:
        return multiprocessing.get_context("fork")
    except ValueError:  # pragma: no cover - non-posix fallback
        return multiprocessing.get_context()


def _parallel_map(
    worker: Callable, common: tuple, n: int, workers: int, chunk_rows: int
) -> list:
    prefix, mx = _frontier(n, 8 * workers)
    bounds = np.linspace(0, prefix.shape[0], min(prefix.shape[0], 8 * workers) + 1).astype(int)
    tasks = [
        (prefix[a:b], mx[a:b], n, chunk_rows) + common
        for a, b in zip(bounds[:-1], bounds[1:])
        if b > a
    ]
    with ProcessPoolExecutor(max_workers=workers, mp_context=_pool_context()) as pool:
        futures = [pool.submit(worker, t) for t in tasks]
        return [f.result() for f in futures]
