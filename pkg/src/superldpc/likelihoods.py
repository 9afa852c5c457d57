"""Symbol-level likelihood kernels for superposed BPSK streams.

All probability vectors here live in the linear domain, normalized per time
index, with max-subtraction inside the Gaussian exponent and a floor of
EPS_FLOOR applied before normalization.  Empty preimage classes of a
non-surjective map keep exact zeros (they are impossibilities, not
underflow).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binmap import BinaryLinearMap
from .channel import SignalingSchedule

EPS_FLOOR = 1e-300


@dataclass(frozen=True)
class Constellation:
    """Noiseless channel values for every symbol at one time residue."""

    points: np.ndarray  # (2^ell,)
    ell: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.shape != (1 << self.ell,):
            raise ValueError(f"expected {1 << self.ell} points")
        # superposed BPSK is antisymmetric under complementing every stream
        flipped = pts[np.arange(pts.size) ^ (pts.size - 1)]
        if not np.allclose(pts, -flipped, atol=1e-9):
            raise ValueError("constellation violates phi(s) = -phi(s ^ all_ones)")


def build_constellation(schedule: SignalingSchedule, t: int = 0) -> Constellation:
    """Constellation in effect at time index t of a schedule."""
    points = schedule.constellation_points()
    return Constellation(points=points[t % schedule.amplitudes.shape[0]], ell=schedule.ell)


def symbol_likelihoods(y_t: float, constellation: Constellation) -> np.ndarray:
    """Posterior pmf over transmitted symbols for one observation.

    Gaussian metric exp(-(y - phi(s))^2 / 2) with the max subtracted in the
    exponent, floored at EPS_FLOOR, normalized to sum 1.
    """
    log_w = -0.5 * (y_t - constellation.points) ** 2
    w = np.exp(log_w - log_w.max())
    w = np.maximum(w, EPS_FLOOR)
    return w / w.sum()


def likelihood_table(schedule: SignalingSchedule, y: np.ndarray) -> np.ndarray:
    """(n, 2^ell) symbol posteriors for a whole received block."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (schedule.n,):
        raise ValueError(f"expected {schedule.n} observations")
    points = schedule.point_matrix()  # (n, q)
    log_w = -0.5 * (y[:, None] - points) ** 2
    w = np.exp(log_w - log_w.max(axis=1, keepdims=True))
    w = np.maximum(w, EPS_FLOOR)
    return w / w.sum(axis=1, keepdims=True)


def pushforward(pmf: np.ndarray, bmap: BinaryLinearMap) -> np.ndarray:
    """Pmf of w = bmap(c) when c ~ pmf: preimage-class sums.

    Accepts a single pmf (length 2^in_dim) or a stack of per-time rows
    (n, 2^in_dim).  No renormalization happens: marginalizing a normalized
    pmf preserves its mass, and output symbols outside the image keep an
    exact zero.
    """
    p = np.asarray(pmf, dtype=np.float64)
    single = p.ndim == 1
    rows = p[None, :] if single else p
    if rows.shape[1] != (1 << bmap.in_dim):
        raise ValueError(f"pmf length {rows.shape[1]} does not match map input dim")
    out = np.zeros((rows.shape[0], 1 << bmap.out_dim))
    for s, w in enumerate(bmap.lookup):
        out[:, w] += rows[:, s]
    return out[0] if single else out


def change_basis(pmf: np.ndarray, bmap: BinaryLinearMap) -> np.ndarray:
    """Relabel pmf coordinates by an invertible map: out[w] = pmf[bmap^-1(w)].

    A pure permutation of entries; raises for singular maps.
    """
    inv = bmap.invert()
    p = np.asarray(pmf, dtype=np.float64)
    return p[..., inv.lookup]


def partition_distance(constellation: Constellation, level: int,
                       bmap: BinaryLinearMap | None = None) -> float:
    """Minimum distance between the two halves of a labeled constellation.

    The symbols are split by bit `level` of bmap(s) (identity map if bmap is
    None); returns min |a - b| over pairs straddling the split.  This is the
    set-partition distance that protects the given level's decisions: e.g.
    the amplitude pair alpha^2 = (4, 1.96) gives points {+-0.6, +-3.4} with
    distance 1.2 for a plain level-1 split but 2.8 after relabeling by
    [[1,0],[1,1]].
    """
    if bmap is None:
        bmap = BinaryLinearMap.identity(constellation.ell)
    if not 0 <= level < bmap.out_dim:
        raise ValueError(f"level {level} out of range for map with {bmap.out_dim} rows")
    labels = (bmap.lookup >> level) & 1
    x0 = constellation.points[labels == 0]
    x1 = constellation.points[labels == 1]
    if x0.size == 0 or x1.size == 0:
        raise ValueError(f"bit {level} of the map is constant; no partition")
    return float(np.min(np.abs(x0[:, None] - x1[None, :])))
