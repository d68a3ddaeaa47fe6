"""Exact and Monte-Carlo matrix permanents, plus the scaled spectral-norm report.

All exact routines return arbitrary-precision integers. The Ryser and Glynn
kernels share one subset-sum engine: Gray-code iteration over "outer" rows
with a vectorized table of all "inner" row combinations. Row sums stay in
int64 (their magnitude is bounded by the full absolute row sums); products and
accumulators switch to arbitrary precision whenever a precomputed bound says
int64 could overflow, so no result is ever silently rounded.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoder import Encoding, IntMatrix
from .errors import (
    NoConvergenceError,
    NonIntegerResultError,
    TooLargeError,
)

DEFAULT_SIZE_CAP = 32
NAIVE_SIZE_CAP = 10

_INNER_BITS = 16
_INNER_BITS_OBJECT = 10
_INT64_SAFE_BITS = 61
_MC_CHUNK = 4096
_MASK64 = (1 << 64) - 1
_NORM_SEED = 0x5EED


def _as_rows(matrix) -> list[list[int]]:
    """Accept IntMatrix, nested sequences, or integer ndarrays; exact ints only."""
    if isinstance(matrix, IntMatrix):
        return [list(r) for r in matrix.rows]
    if isinstance(matrix, np.ndarray):
        if matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        if not np.issubdtype(matrix.dtype, np.integer):
            raise TypeError("matrix entries must be exact integers")
        rows = [[int(x) for x in row] for row in matrix]
    else:
        rows = []
        for row in matrix:
            out = []
            for x in row:
                if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
                    raise TypeError(f"matrix entries must be exact integers, got {x!r}")
                out.append(int(x))
            rows.append(out)
    n = len(rows)
    for row in rows:
        if len(row) != n:
            raise ValueError("matrix must be square")
    return rows


def per_naive(matrix) -> int:
    """Permanent by direct permutation sum; the oracle for every other routine."""
    rows = _as_rows(matrix)
    n = len(rows)
    if n > NAIVE_SIZE_CAP:
        raise TooLargeError(f"per_naive caps at n={NAIVE_SIZE_CAP}, got {n}")
    return sum(
        math.prod(rows[i][p[i]] for i in range(n))
        for p in itertools.permutations(range(n))
    )


def _subset_product_sum(
    base: list[int],
    deltas: list[list[int]],
    threads: int = 1,
    value_bound: list[int] | None = None,
) -> int:
    """Sum over all subsets S of ``deltas`` of (-1)^|S| prod_k (base + sum_S deltas)[k].

    ``value_bound[k]``, when the caller knows it, bounds |base + sum_S deltas|
    at coordinate k over every subset; it decides whether int64 arithmetic is
    provably overflow-free or arbitrary precision is required. Chunk boundaries
    recompute the running sums from scratch, and every chunk total is exact, so
    any worker split returns a bit-identical result.
    """
    n = len(base)
    m = len(deltas)
    if n == 0:
        return 1 if m == 0 else 0

    if value_bound is None:
        value_bound = [abs(base[k]) + sum(abs(d[k]) for d in deltas) for k in range(n)]
    # Any prefix of the product chain is bounded by this (factors of max(.,1)).
    bound = math.prod(max(v, 1) for v in value_bound)
    use_int64 = bound < (1 << _INT64_SAFE_BITS)
    dtype = np.int64 if use_int64 else object
    k_in = min(m, _INNER_BITS if use_int64 else _INNER_BITS_OBJECT)
    width = 1 << k_in

    # Inner tables, transposed for contiguous row operations:
    # table[k][lo] = sum of deltas[j][k] over the set bits j of lo.
    table = np.zeros((n, 1), dtype=dtype)
    parity = np.ones(1, dtype=np.int64)
    for j in range(k_in):
        dj = np.array(deltas[j], dtype=dtype).reshape(n, 1)
        table = np.concatenate([table, table + dj], axis=1)
        parity = np.concatenate([parity, -parity])
    outer = [np.array(deltas[k_in + j], dtype=dtype) for j in range(m - k_in)]
    base_v = np.array(base, dtype=dtype)
    # Largest group size whose int64 partial sums provably cannot overflow.
    sub = min(width, 1 << max(0, _INT64_SAFE_BITS - bound.bit_length())) if use_int64 else 1

    def run(t0: int, t1: int) -> int:
        g = t0 ^ (t0 >> 1)
        rs = base_v.copy()
        for bit in range(m - k_in):
            if (g >> bit) & 1:
                rs = rs + outer[bit]
        prods = np.empty(width, dtype=dtype)
        buf = np.empty(width, dtype=dtype)
        total = 0
        t = t0
        while True:
            np.add(table[0], rs[0], out=prods)
            for k in range(1, n):
                np.add(table[k], rs[k], out=buf)
                np.multiply(prods, buf, out=prods)
            np.multiply(prods, parity, out=prods)
            if use_int64:
                if sub >= width:
                    block = int(prods.sum())
                else:
                    block = sum(prods.reshape(-1, sub).sum(axis=1).tolist())
            else:
                block = int(prods.sum())
            total += -block if g.bit_count() & 1 else block
            t += 1
            if t >= t1:
                break
            flip = (t & -t).bit_length() - 1
            g ^= 1 << flip
            rs = rs + outer[flip] if (g >> flip) & 1 else rs - outer[flip]
        return total

    steps = 1 << (m - k_in)
    if threads > 1 and steps > 1:
        nchunks = min(threads, steps)
        cuts = [steps * i // nchunks for i in range(nchunks + 1)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return sum(pool.map(lambda ab: run(*ab), zip(cuts, cuts[1:])))
    return run(0, steps)


def per_ryser(matrix, *, max_size: int = DEFAULT_SIZE_CAP, force: bool = False,
              threads: int = 1) -> int:
    """Exact permanent by Ryser's inclusion-exclusion over column subsets."""
    rows = _as_rows(matrix)
    n = len(rows)
    if n > max_size and not force:
        raise TooLargeError(f"n={n} exceeds the size cap of {max_size}; pass force to override")
    if n == 0:
        return 1
    cols = [[rows[i][j] for i in range(n)] for j in range(n)]
    # A row sum over any column subset is at most the full absolute row sum.
    row_abs = [sum(abs(w) for w in row) for row in rows]
    s = _subset_product_sum([0] * n, cols, threads, value_bound=row_abs)
    return s if n % 2 == 0 else -s


def per_glynn_exact(matrix, *, max_size: int = DEFAULT_SIZE_CAP, force: bool = False,
                    threads: int = 1) -> int:
    """Exact permanent by averaging the +-1 estimator over all sign vectors."""
    rows = _as_rows(matrix)
    n = len(rows)
    if n > max_size and not force:
        raise TooLargeError(f"n={n} exceeds the size cap of {max_size}; pass force to override")
    if n == 0:
        return 1
    base = [sum(rows[i][j] for i in range(n)) for j in range(n)]
    deltas = [[-2 * rows[i][j] for j in range(n)] for i in range(1, n)]
    # A signed column sum is at most the absolute column sum for every sign vector.
    col_abs = [sum(abs(rows[i][j]) for i in range(n)) for j in range(n)]
    total = _subset_product_sum(base, deltas, threads, value_bound=col_abs)
    value, rem = divmod(total, 1 << (n - 1))
    if rem:
        raise NonIntegerResultError(f"Glynn average is not an integer: {total} / 2^{n - 1}")
    return value


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo permanent estimate; reproducible from (matrix, samples, seed)."""

    mean: float
    stderr: float
    samples: int
    seed: int


def gurvits_estimator_value(matrix, signs: Sequence[int]) -> int:
    """Exact value of the unbiased estimator at one +-1 sign vector."""
    rows = _as_rows(matrix)
    n = len(rows)
    if len(signs) != n:
        raise ValueError(f"sign vector must have length {n}")
    if any(s not in (-1, 1) for s in signs):
        raise ValueError("sign vector entries must be +-1")
    value = math.prod(signs)
    for row in rows:
        value *= sum(w * s for w, s in zip(row, signs))
    return value


def _mc_chunk_values(rows_i64: np.ndarray, seed: int, chunk_idx: int, count: int) -> np.ndarray:
    # Each chunk gets its own counter-based Philox stream keyed by (seed, index),
    # so the sample stream is independent of how chunks are scheduled.
    key = np.array([seed & _MASK64, chunk_idx], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    n = rows_i64.shape[0]
    bits = rng.integers(0, 2, size=(count, n), dtype=np.int64)
    signs = 1 - 2 * bits
    dots = signs @ rows_i64.T  # dots[s, i] = row_i . x_s, exact in int64
    parity = np.where(bits.sum(axis=1) & 1, -1.0, 1.0)
    return np.multiply.reduce(dots.astype(np.float64), axis=1) * parity


def per_gurvits(matrix, samples: int, seed: int, threads: int = 1) -> McEstimate:
    """Monte-Carlo permanent estimate: mean of i.i.d. +-1 estimator draws.

    The sample stream is partitioned into fixed chunks of 4096 draws from a
    Philox4x64 generator keyed by (seed, chunk index); the result is
    bit-identical for any worker count.
    """
    rows = _as_rows(matrix)
    n = len(rows)
    if samples < 2:
        raise ValueError(f"samples must be at least 2, got {samples}")
    if n == 0:
        return McEstimate(1.0, 0.0, samples, seed)
    rows_i64 = np.array(rows, dtype=np.int64)
    chunks = [
        (ci, min(_MC_CHUNK, samples - ci * _MC_CHUNK))
        for ci in range((samples + _MC_CHUNK - 1) // _MC_CHUNK)
    ]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _mc_chunk_values(rows_i64, seed, *c), chunks))
    else:
        parts = [_mc_chunk_values(rows_i64, seed, ci, cnt) for ci, cnt in chunks]
    values = np.concatenate(parts)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples))
    return McEstimate(mean, stderr, samples, seed)


def spectral_norm(matrix, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Largest singular value via power iteration on the Gram operator."""
    rows = _as_rows(matrix)
    n = len(rows)
    if n == 0:
        return 0.0
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.array(rows, dtype=np.float64)
    if not a.any():
        return 0.0
    gram = a.T @ a
    rng = np.random.Generator(np.random.Philox(key=np.array([_NORM_SEED, 0], dtype=np.uint64)))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    prev = -1.0
    for _ in range(max_iter):
        w = gram @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            # start vector landed in the kernel; redraw
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            prev = -1.0
            continue
        v = w / nw
        sigma = math.sqrt(nw)
        if prev >= 0.0 and abs(sigma - prev) <= tol * max(sigma, 1e-300):
            return sigma
        prev = sigma
    raise NoConvergenceError(f"power iteration did not converge in {max_iter} iterations")


@dataclass(frozen=True)
class NormReport:
    """Spectral norm of G / 2^(h/(2m)) and whether it is below 1."""

    norm: float
    scale: float
    subunit: bool


def gurvits_norm_report(e: Encoding, tol: float = 1e-10) -> NormReport:
    """Report the scaled-matrix norm criterion for an encoding (report only)."""
    m = e.matrix.n
    if m == 0:
        return NormReport(0.0, 1.0, True)
    scale = 2.0 ** (e.h / (2 * m))
    norm = spectral_norm(e.matrix, tol=tol) / scale
    return NormReport(norm, scale, norm < 1.0)
