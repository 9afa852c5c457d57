"""Brute-force references for desk-scale verification.

Everything here trades speed for independence: enumeration over whole
codebooks and symbol tuples, with hard size bounds so a typo cannot melt a
laptop.  Decoders are cross-checked against these references in the tests
and by the `oracle` CLI subcommand.
"""
from __future__ import annotations

import numpy as np

from .binmap import BinaryLinearMap, unpack_bits
from .channel import SignalingSchedule
from .ldpc import SparseParityCheck, make_encoder

MAX_N = 24
MAX_K = 16
MAX_TUPLE_BITS = 20
MAX_CONV_ELL = 3
MAX_CONV_LEN = 6


class EnumeratedCodebook:
    """All 2^k codewords of a small code, materialized."""

    def __init__(self, h: SparseParityCheck):
        if h.n_cols > MAX_N:
            raise ValueError(f"enumeration bound exceeded: n = {h.n_cols} > {MAX_N}")
        enc = make_encoder(h)
        if enc.k > MAX_K:
            raise ValueError(f"enumeration bound exceeded: k = {enc.k} > {MAX_K}")
        self.h = h
        self.k = enc.k
        self.n = h.n_cols
        all_u = unpack_bits(np.arange(1 << enc.k), enc.k).T  # (2^k, k)
        g = enc._g.astype(np.int64)
        self.words = (all_u.astype(np.int64) @ g) & 1  # (2^k, n)


def exact_symbol_marginals(codebook: EnumeratedCodebook, schedule: SignalingSchedule,
                           y: np.ndarray, bmap: BinaryLinearMap) -> np.ndarray:
    """Per-time posterior of the mapped symbol, by full tuple enumeration.

    Every stream ranges independently over the codebook; tuple weights are
    the product Gaussian metrics of the superposed signal.  Returns an
    (n, 2^out_dim) row-normalized array for w_t = bmap(c_t).  Requires
    ell * k <= MAX_TUPLE_BITS.
    """
    ell = schedule.ell
    k, n = codebook.k, codebook.n
    if ell * k > MAX_TUPLE_BITS:
        raise ValueError(f"enumeration bound exceeded: ell*k = {ell * k} > {MAX_TUPLE_BITS}")
    if bmap.in_dim != ell:
        raise ValueError("map input dimension must equal the number of streams")
    y = np.asarray(y, dtype=np.float64)
    points = schedule.point_matrix()  # (n, q)
    n_tuples = 1 << (ell * k)
    chunk = max(1, min(n_tuples, (1 << 22) // max(n, 1)))

    # pass 1: log-weight of every tuple
    t_idx = np.arange(n)[None, :]
    log_w = np.empty(n_tuples)
    for lo in range(0, n_tuples, chunk):
        idx = np.arange(lo, min(lo + chunk, n_tuples))
        symbols = _tuple_symbols(codebook, idx, ell)  # (chunk, n)
        vals = points[t_idx, symbols]
        log_w[idx] = -0.5 * ((y[None, :] - vals) ** 2).sum(axis=1)

    m = log_w.max()

    # pass 2: accumulate exp-weights onto the mapped symbol per position
    out = np.zeros((n, 1 << bmap.out_dim))
    lut = bmap.lookup
    for lo in range(0, n_tuples, chunk):
        idx = np.arange(lo, min(lo + chunk, n_tuples))
        symbols = _tuple_symbols(codebook, idx, ell)
        w = np.exp(log_w[idx] - m)
        mapped = lut[symbols]  # (chunk, n)
        for t in range(n):
            np.add.at(out[t], mapped[:, t], w)
    return out / out.sum(axis=1, keepdims=True)


def _tuple_symbols(codebook: EnumeratedCodebook, idx: np.ndarray, ell: int) -> np.ndarray:
    """Symbol sequences (len(idx), n) for tuple indices (k bits per stream)."""
    k = codebook.k
    symbols = np.zeros((idx.size, codebook.n), dtype=np.int64)
    for i in range(ell):
        word_idx = (idx >> (i * k)) & ((1 << k) - 1)
        symbols |= codebook.words[word_idx] << i
    return symbols


def exact_bit_marginals(codebook: EnumeratedCodebook, prior_llrs: np.ndarray) -> np.ndarray:
    """Posterior bit LLRs of a binary code under independent per-bit priors.

    Sums the prior likelihood over all codewords; the reference for
    sum-product decoding on cycle-free graphs.
    """
    llr = np.asarray(prior_llrs, dtype=np.float64)
    if llr.shape != (codebook.n,):
        raise ValueError(f"expected {codebook.n} prior LLRs")
    words = codebook.words  # (M, n)
    score = -(words @ llr)  # log-weight up to a word-independent constant
    score -= score.max()
    w = np.exp(score)
    s1 = w @ words  # mass of words with bit t = 1
    s0 = w.sum() - s1
    s0 = np.maximum(s0, 1e-300)
    s1 = np.maximum(s1, 1e-300)
    return np.log(s0) - np.log(s1)


def direct_xor_convolution(pmfs) -> np.ndarray:
    """XOR-convolution by explicit enumeration of all symbol tuples.

    out[x] = sum over tuples (s_1..s_d) with XOR x of prod_i pmf_i[s_i].
    Deliberately transform-free; bounded to ell <= 3 and at most 6 inputs.
    """
    arrays = [np.asarray(p, dtype=np.float64) for p in pmfs]
    if not arrays:
        raise ValueError("need at least one pmf")
    if len(arrays) > MAX_CONV_LEN:
        raise ValueError(f"enumeration bound exceeded: {len(arrays)} > {MAX_CONV_LEN} pmfs")
    q = arrays[0].size
    if q & (q - 1) or q < 1:
        raise ValueError("pmf length must be a power of two")
    if q > (1 << MAX_CONV_ELL):
        raise ValueError(f"enumeration bound exceeded: alphabet {q} > {1 << MAX_CONV_ELL}")
    for a in arrays:
        if a.size != q:
            raise ValueError("all pmfs must share one alphabet")
    idx = np.arange(q ** len(arrays))
    labels = np.zeros_like(idx)
    weight = np.ones(idx.size)
    for i, a in enumerate(arrays):
        digit = (idx // q ** i) % q
        labels ^= digit
        weight = weight * a[digit]
    return np.bincount(labels, weights=weight, minlength=q)


def random_tree_code(n: int, seed: int, min_k: int | None = None,
                     max_k: int | None = None) -> SparseParityCheck:
    """Random cycle-free parity-check matrix on n columns.

    Grows a bipartite tree: a fresh check always arrives with two variables,
    otherwise a fresh variable attaches to an existing check, so every check
    has degree >= 2 and the Tanner graph is connected and acyclic (hence the
    rows are independent and k = n - n_rows).  Optional bounds retry with
    derived seeds until k lands inside them.
    """
    if n < 2:
        raise ValueError("need at least two columns")
    for attempt in range(200):
        rng = np.random.default_rng((seed, attempt))
        rows: list[list[int]] = [[0, 1]]
        next_var = 2
        while next_var < n:
            if rng.random() < 0.5:
                anchor = int(rng.integers(next_var))
                rows.append([anchor, next_var])
            else:
                rows[int(rng.integers(len(rows)))].append(next_var)
            next_var += 1
        k = n - len(rows)
        if (min_k is None or k >= min_k) and (max_k is None or k <= max_k):
            return SparseParityCheck(
                n_cols=n, n_rows=len(rows), rows=tuple(tuple(sorted(r)) for r in rows)
            )
    raise ValueError("could not hit the requested k range; widen the bounds")
