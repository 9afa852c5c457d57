"""Joint decoding/computing on the symbol-level factor graph.

The ell binary streams are treated as one stream over F2^ell: every parity
check constrains the bitwise XOR of its neighbor symbols to zero, so check
node updates are XOR-convolutions, computed through the Walsh-Hadamard
transform.  Messages are linear-domain pmfs, normalized after every update
and floored at EPS_FLOOR after products.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binmap import BinaryLinearMap, unpack_bits
from .ldpc import SparseParityCheck
from .likelihoods import EPS_FLOOR, likelihood_table, pushforward
from .scenarios import ScenarioConfig


def walsh_hadamard(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along one power-of-two axis.

    Self-inverse up to the factor q: walsh_hadamard(walsh_hadamard(x)) == q*x.
    """
    arr = np.array(a, dtype=np.float64, copy=True)
    arr = np.moveaxis(arr, axis, -1)
    if not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr)
    q = arr.shape[-1]
    if q < 1 or q & (q - 1):
        raise ValueError("transform length must be a power of two")
    h = 1
    while h < q:
        view = arr.reshape(arr.shape[:-1] + (q // (2 * h), 2, h))
        top = view[..., 0, :].copy()
        view[..., 0, :] += view[..., 1, :]
        view[..., 1, :] = top - view[..., 1, :]
        h *= 2
    return np.moveaxis(arr, -1, axis)


def _clean(pmf: np.ndarray) -> np.ndarray:
    """Clamp tiny negatives from transform round-off, floor, normalize rows."""
    p = np.maximum(pmf, 0.0)
    p = np.maximum(p, EPS_FLOOR)
    return p / p.sum(axis=-1, keepdims=True)


def check_node_update(messages: np.ndarray, exclude_index: int | None = None) -> np.ndarray:
    """XOR-convolution of all messages except one (transform domain).

    messages is (d, q); the result is the normalized pmf of the XOR of the
    non-excluded inputs.
    """
    msgs = np.asarray(messages, dtype=np.float64)
    if msgs.ndim != 2:
        raise ValueError("expected a (d, q) message stack")
    if exclude_index is not None:
        msgs = np.delete(msgs, exclude_index, axis=0)
    if msgs.shape[0] == 0:
        raise ValueError("check update needs at least one remaining message")
    t = walsh_hadamard(msgs).prod(axis=0)
    out = walsh_hadamard(t) / msgs.shape[1]
    return _clean(out)


def variable_node_update(channel_pmf: np.ndarray, messages: np.ndarray,
                         exclude_index: int | None = None) -> np.ndarray:
    """Channel pmf times all incoming check messages except one."""
    out = np.asarray(channel_pmf, dtype=np.float64).copy()
    for i, msg in enumerate(np.asarray(messages, dtype=np.float64)):
        if i != exclude_index:
            out *= msg
    return _clean(out)


def decide_and_project(posteriors: np.ndarray, bmap: BinaryLinearMap
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Project symbol posteriors through a map and take hard decisions.

    Returns (decisions, projected): decisions is the (out_dim, n) bit matrix
    of argmax choices (ties break toward the lowest symbol index), projected
    the (n, 2^out_dim) pmf of the mapped symbol.
    """
    projected = pushforward(np.atleast_2d(posteriors), bmap)
    symbols = np.argmax(projected, axis=1)
    return unpack_bits(symbols, bmap.out_dim), projected


@dataclass
class JointResult:
    decisions: np.ndarray      # (out_dim, n) hard bits of the mapped symbols
    success: bool              # every decision row satisfies every check
    iterations: int            # message-passing sweeps actually performed
    posteriors: np.ndarray     # (n, 2^ell) final symbol posteriors


class JointDecoder:
    """Flooding pmf-domain decoder over a fixed parity-check structure.

    Instances hold only immutable graph indexing, so one decoder may be
    shared across threads; decode() keeps all message state local.
    """

    def __init__(self, h: SparseParityCheck, ell: int):
        if not 1 <= ell <= 16:
            raise ValueError("ell must be in 1..16")
        self.h = h
        self.ell = ell
        self.q = 1 << ell
        edges = [(i, j) for i, r in enumerate(h.rows) for j in r]
        self.n_edges = len(edges)
        self.edge_row = np.array([i for i, _ in edges], dtype=np.int64)
        self.edge_col = np.array([j for _, j in edges], dtype=np.int64)

        check_deg = np.array([len(r) for r in h.rows], dtype=np.int64)
        self.dmax_check = int(check_deg.max())
        row_starts = np.concatenate([[0], np.cumsum(check_deg)[:-1]])
        self.row_starts = row_starts
        self.edge_slot = np.arange(self.n_edges) - row_starts[self.edge_row]

        var_deg = np.array([len(c) for c in h.cols], dtype=np.int64)
        self.dmax_var = int(var_deg.max())
        by_col = np.argsort(self.edge_col, kind="stable")
        col_starts = np.concatenate([[0], np.cumsum(var_deg)[:-1]])
        slot_in_order = np.arange(self.n_edges) - col_starts[self.edge_col[by_col]]
        self.var_slot = np.empty(self.n_edges, dtype=np.int64)
        self.var_slot[by_col] = slot_in_order

    def _rows_zero_syndrome(self, bits: np.ndarray) -> bool:
        sums = np.add.reduceat(bits[:, self.edge_col].astype(np.int64),
                               self.row_starts, axis=1)
        return not np.any(sums & 1)

    def _leave_one_out(self, values: np.ndarray, owner: np.ndarray,
                       slot: np.ndarray, n_groups: int, dmax: int) -> np.ndarray:
        """Per-edge product of the other edges in the same group."""
        padded = np.ones((n_groups, dmax, self.q))
        padded[owner, slot] = values
        pre = np.ones_like(padded)
        np.cumprod(padded[:, :-1], axis=1, out=pre[:, 1:])
        suf = np.ones_like(padded)
        np.cumprod(padded[:, :0:-1], axis=1, out=suf[:, -2::-1])
        return pre[owner, slot] * suf[owner, slot]

    def decode(self, channel_pmfs: np.ndarray, bmap: BinaryLinearMap, k_max: int,
               early_stop: bool = True) -> JointResult:
        """Run up to k_max flooding sweeps (check pass, variable pass,
        decision) and stop once every row of the mapped hard decision has a
        zero syndrome."""
        chan = np.asarray(channel_pmfs, dtype=np.float64)
        n = self.h.n_cols
        if chan.shape != (n, self.q):
            raise ValueError(f"channel pmfs must have shape ({n}, {self.q})")
        if bmap.in_dim != self.ell:
            raise ValueError("map input dimension must match the decoder's ell")

        v2c = chan[self.edge_col]
        posteriors = chan / chan.sum(axis=1, keepdims=True)
        decisions, _ = decide_and_project(posteriors, bmap)
        success = False
        iters = 0
        for it in range(k_max):
            # check pass: XOR-convolve the other edges, in the transform domain
            t = walsh_hadamard(v2c)
            loo = self._leave_one_out(t, self.edge_row, self.edge_slot,
                                      self.h.n_rows, self.dmax_check)
            c2v = _clean(walsh_hadamard(loo) / self.q)

            # variable pass: channel pmf times the other incoming messages
            padded = np.ones((n, self.dmax_var, self.q))
            padded[self.edge_col, self.var_slot] = c2v
            pre = np.ones_like(padded)
            np.cumprod(padded[:, :-1], axis=1, out=pre[:, 1:])
            suf = np.ones_like(padded)
            np.cumprod(padded[:, :0:-1], axis=1, out=suf[:, -2::-1])
            loo_v = pre[self.edge_col, self.var_slot] * suf[self.edge_col, self.var_slot]
            v2c = _clean(chan[self.edge_col] * loo_v)

            # decision on the full product (channel times ALL check messages)
            posteriors = _clean(chan * padded.prod(axis=1))
            decisions, _ = decide_and_project(posteriors, bmap)
            iters = it + 1
            if early_stop and self._rows_zero_syndrome(decisions):
                success = True
                break
        else:
            success = self._rows_zero_syndrome(decisions) if iters else False
        return JointResult(decisions=decisions, success=success,
                           iterations=iters, posteriors=posteriors)


def run_joint(cfg: ScenarioConfig, y: np.ndarray,
              snr_db: float | None = None) -> JointResult:
    """Joint decode straight from a scenario config and a received block."""
    snr = cfg.snr_grid[0] if snr_db is None else float(snr_db)
    schedule = cfg.schedule(snr)
    pmfs = likelihood_table(schedule, np.asarray(y, dtype=np.float64))
    decoder = JointDecoder(cfg.code, cfg.ell)
    return decoder.decode(pmfs, cfg.tau, cfg.k_max)
