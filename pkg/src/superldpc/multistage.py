"""Multistage decoders: iterate a soft demapper against per-level decoders.

All three pipelines share one sweep loop; they differ only in the likelihood
table the demapper reads (raw channel table, pushed forward through the
target map, or re-expressed in a changed basis) and in how the per-level
codewords are projected to the final decision.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .binmap import BinaryLinearMap
from .channel import SignalingSchedule
from .ldpc import SumProductDecoder
from .likelihoods import EPS_FLOOR, change_basis, likelihood_table, pushforward
from .scenarios import ScenarioConfig


def _prob_one(llrs: np.ndarray) -> np.ndarray:
    """P(bit=1) from an LLR log(P0/P1), stable for large magnitudes."""
    out = np.empty_like(llrs)
    pos = llrs >= 0
    e = np.exp(-llrs[pos])
    out[pos] = e / (1.0 + e)
    e = np.exp(llrs[~pos])
    out[~pos] = 1.0 / (1.0 + e)
    return out


def demap_level(table: np.ndarray, level: int, prior_llrs: np.ndarray) -> np.ndarray:
    """Extrinsic LLRs for one bit level of a symbol likelihood table.

    table is (n, 2^d); prior_llrs is (d, n) with code-side extrinsic LLRs
    per level.  The requested level's own prior is not used; the other
    levels enter as independent bit priors.
    """
    n, q = table.shape
    d = q.bit_length() - 1
    prior_llrs = np.asarray(prior_llrs, dtype=np.float64)
    if prior_llrs.shape != (d, n):
        raise ValueError(f"prior_llrs must have shape ({d}, {n})")
    if not 0 <= level < d:
        raise ValueError(f"level must be in 0..{d - 1}")
    labels = np.arange(q)
    w = np.array(table, dtype=np.float64)
    for j in range(d):
        if j == level:
            continue
        p1 = _prob_one(prior_llrs[j])[:, None]
        bit_set = ((labels >> j) & 1).astype(bool)[None, :]
        w *= np.where(bit_set, p1, 1.0 - p1)
    own = ((labels >> level) & 1).astype(bool)
    p0 = w[:, ~own].sum(axis=1)
    p1 = w[:, own].sum(axis=1)
    return np.log(np.maximum(p0, EPS_FLOOR)) - np.log(np.maximum(p1, EPS_FLOOR))


@dataclass
class MultistageResult:
    decisions: np.ndarray    # (out_dim, n) hard bits of the final projection
    success: bool            # stop rule satisfied before the sweep budget ran out
    global_iters: int        # demap/decode sweeps actually performed
    level_words: np.ndarray  # (d, n) hard words in the decoding domain


def _run_sweeps(table: np.ndarray, decoder: SumProductDecoder,
                project: Callable[[np.ndarray], np.ndarray],
                k_max: int, i_max: int, strict: bool) -> MultistageResult:
    n, q = table.shape
    d = q.bit_length() - 1
    msgs = np.zeros((d, n))
    words = np.zeros((d, n), dtype=np.uint8)
    decisions = project(words)
    success = False
    iters = 0
    for k in range(k_max):
        for i in range(d):
            prior = demap_level(table, i, msgs)
            _, ext, _ = decoder.decode(prior, i_max)
            msgs[i] = ext
            words[i] = ((prior + ext) < 0).astype(np.uint8)
        decisions = project(words)
        iters = k + 1
        ok = decoder.rows_zero_syndrome(decisions)
        if ok and strict:
            ok = decoder.rows_zero_syndrome(words)
        if ok:
            success = True
            break
    return MultistageResult(decisions=decisions, success=success,
                            global_iters=iters, level_words=words)


def table_for(algorithm: str, schedule: SignalingSchedule, y: np.ndarray,
              tau: BinaryLinearMap, tau_tilde: BinaryLinearMap | None) -> np.ndarray:
    """The likelihood table each multistage variant feeds its demapper."""
    table = likelihood_table(schedule, y)
    if algorithm == "dc":
        return table
    if algorithm == "cd":
        return pushforward(table, tau)
    if algorithm == "cdc":
        if tau_tilde is None:
            raise ValueError("cdc requires an intermediate map")
        return change_basis(table, tau_tilde)
    raise ValueError(f"unknown multistage algorithm {algorithm!r}")


def decode_compute(table: np.ndarray, decoder: SumProductDecoder,
                   tau: BinaryLinearMap, k_max: int, i_max: int,
                   strict: bool = False) -> MultistageResult:
    """Decode all levels of the raw symbol table, then apply the map."""
    return _run_sweeps(table, decoder, tau.apply_to_bits, k_max, i_max, strict)


def compute_decode(reduced_table: np.ndarray, decoder: SumProductDecoder,
                   k_max: int, i_max: int, strict: bool = False) -> MultistageResult:
    """Decode the levels of an already-mapped table; decisions are the words."""
    return _run_sweeps(reduced_table, decoder, lambda w: w, k_max, i_max, strict)


def compute_decode_compute(rebased_table: np.ndarray, decoder: SumProductDecoder,
                           tau: BinaryLinearMap, tau_tilde: BinaryLinearMap,
                           k_max: int, i_max: int,
                           strict: bool = False) -> MultistageResult:
    """Decode in an invertible intermediate basis, then map the words onto
    the target through the basis inverse."""
    back = tau_tilde.invert()

    def project(words: np.ndarray) -> np.ndarray:
        return tau.apply_to_bits(back.apply_to_bits(words))

    return _run_sweeps(rebased_table, decoder, project, k_max, i_max, strict)


class MultistageRunner:
    """Reusable per-config decode context: one parity-check decoder plus the
    table builder and projection for the chosen pipeline."""

    def __init__(self, algorithm: str, decoder: SumProductDecoder,
                 tau: BinaryLinearMap, tau_tilde: BinaryLinearMap | None,
                 k_max: int, i_max: int, strict: bool = False):
        if algorithm not in ("dc", "cd", "cdc"):
            raise ValueError(f"unknown multistage algorithm {algorithm!r}")
        if algorithm == "cdc" and tau_tilde is None:
            raise ValueError("cdc requires an intermediate map")
        self.algorithm = algorithm
        self.decoder = decoder
        self.tau = tau
        self.tau_tilde = tau_tilde
        self.k_max = k_max
        self.i_max = i_max
        self.strict = strict
        if algorithm == "dc":
            self._project = tau.apply_to_bits
        elif algorithm == "cd":
            self._project = lambda w: w
        else:
            back = tau_tilde.invert()
            self._project = lambda w: tau.apply_to_bits(back.apply_to_bits(w))

    @classmethod
    def from_config(cls, cfg: ScenarioConfig, algorithm: str | None = None
                    ) -> "MultistageRunner":
        alg = cfg.algorithm if algorithm is None else algorithm
        return cls(alg, SumProductDecoder(cfg.code), cfg.tau, cfg.tau_tilde,
                   cfg.k_max, cfg.i_max, cfg.strict)

    def decode(self, schedule: SignalingSchedule, y: np.ndarray) -> MultistageResult:
        table = table_for(self.algorithm, schedule, y, self.tau, self.tau_tilde)
        return _run_sweeps(table, self.decoder, self._project,
                           self.k_max, self.i_max, self.strict)


def _run_from_config(cfg: ScenarioConfig, y: np.ndarray, snr_db: float | None,
                     algorithm: str) -> MultistageResult:
    snr = cfg.snr_grid[0] if snr_db is None else float(snr_db)
    y = np.asarray(y, dtype=np.float64)
    runner = MultistageRunner.from_config(cfg, algorithm=algorithm)
    return runner.decode(cfg.schedule(snr), y)


def run_decode_compute(cfg: ScenarioConfig, y: np.ndarray,
                       snr_db: float | None = None) -> MultistageResult:
    """Demap and decode every transmitted level, then map the codewords."""
    return _run_from_config(cfg, y, snr_db, "dc")


def run_compute_decode(cfg: ScenarioConfig, y: np.ndarray,
                       snr_db: float | None = None) -> MultistageResult:
    """Push likelihoods through the target map first, then decode its levels."""
    return _run_from_config(cfg, y, snr_db, "cd")


def run_compute_decode_compute(cfg: ScenarioConfig, y: np.ndarray,
                               snr_db: float | None = None) -> MultistageResult:
    """Decode in an invertible intermediate basis, then map back and onto
    the target."""
    return _run_from_config(cfg, y, snr_db, "cdc")
