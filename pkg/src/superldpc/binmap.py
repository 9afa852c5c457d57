"""Bit-packed GF(2) vectors and linear maps between them.

A length-d binary vector is packed into a Python int with component 0 in the
least significant bit.  A linear map F2^in_dim -> F2^out_dim is stored as one
bitmask per output row; applying the map sets output bit i to the parity of
(rows[i] & x).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

MAX_DIM = 16


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (d, n) array of 0/1 rows into length-n symbol ints (row 0 = LSB)."""
    bits = np.asarray(bits)
    if bits.ndim != 2:
        raise ValueError("pack_bits expects a (d, n) array")
    weights = (1 << np.arange(bits.shape[0], dtype=np.int64))[:, None]
    return (bits.astype(np.int64) * weights).sum(axis=0)


def unpack_bits(symbols: np.ndarray, d: int) -> np.ndarray:
    """Unpack length-n symbol ints into a (d, n) uint8 array (row 0 = LSB)."""
    s = np.asarray(symbols, dtype=np.int64)
    return ((s[None, :] >> np.arange(d, dtype=np.int64)[:, None]) & 1).astype(np.uint8)


@dataclass(frozen=True)
class BinaryLinearMap:
    """A GF(2)-linear map given by row bitmasks over a fixed input width."""

    rows: tuple[int, ...]
    in_dim: int

    def __post_init__(self):
        if not 1 <= self.in_dim <= MAX_DIM:
            raise ValueError(f"in_dim must be in 1..{MAX_DIM}, got {self.in_dim}")
        rows = tuple(int(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise ValueError("map needs at least one row")
        if len(rows) > MAX_DIM:
            raise ValueError(f"out_dim must be at most {MAX_DIM}")
        for i, r in enumerate(rows):
            if not 0 <= r < (1 << self.in_dim):
                raise ValueError(
                    f"row {i} mask {r:#b} out of range for in_dim={self.in_dim}"
                )

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, dim: int) -> "BinaryLinearMap":
        return cls(tuple(1 << i for i in range(dim)), dim)

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "BinaryLinearMap":
        """Build from binary row strings, leftmost character = component 0.

        ``["110", "101"]`` is the map (w0, w1) = (c0+c1, c0+c2).
        """
        rows = list(rows)
        if not rows:
            raise ValueError("map needs at least one row")
        width = len(rows[0])
        masks = []
        for r in rows:
            if len(r) != width or any(ch not in "01" for ch in r):
                raise ValueError(f"bad row string {r!r}: rows must be equal-length 0/1 strings")
            masks.append(sum(1 << j for j, ch in enumerate(r) if ch == "1"))
        return cls(tuple(masks), width)

    def to_strings(self) -> list[str]:
        return ["".join("1" if (r >> j) & 1 else "0" for j in range(self.in_dim)) for r in self.rows]

    # -- basic queries -----------------------------------------------------

    @property
    def out_dim(self) -> int:
        return len(self.rows)

    def apply(self, x: int) -> int:
        if not 0 <= x < (1 << self.in_dim):
            raise ValueError(f"input symbol {x} out of range")
        out = 0
        for i, r in enumerate(self.rows):
            out |= ((r & x).bit_count() & 1) << i
        return out

    @cached_property
    def lookup(self) -> np.ndarray:
        """apply() tabulated over all 2^in_dim inputs."""
        return np.array([self.apply(x) for x in range(1 << self.in_dim)], dtype=np.int64)

    def apply_to_symbols(self, symbols: np.ndarray) -> np.ndarray:
        return self.lookup[np.asarray(symbols, dtype=np.int64)]

    def apply_to_bits(self, bits: np.ndarray) -> np.ndarray:
        """Map a (in_dim, n) bit matrix to the (out_dim, n) image bit matrix."""
        return unpack_bits(self.apply_to_symbols(pack_bits(bits)), self.out_dim)

    # -- linear algebra ----------------------------------------------------

    def rank(self) -> int:
        rows = list(self.rows)
        r = 0
        for col in range(self.in_dim):
            piv = next((i for i in range(r, len(rows)) if (rows[i] >> col) & 1), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            for i in range(len(rows)):
                if i != r and (rows[i] >> col) & 1:
                    rows[i] ^= rows[r]
            r += 1
        return r

    @property
    def is_invertible(self) -> bool:
        return self.in_dim == self.out_dim and self.rank() == self.in_dim

    def invert(self) -> "BinaryLinearMap":
        """Inverse map; raises ValueError("singular ...") if not invertible."""
        if self.out_dim != self.in_dim:
            raise ValueError(
                f"singular map: shape {self.out_dim}x{self.in_dim} is not square"
            )
        n = self.in_dim
        work = list(self.rows)
        aug = [1 << i for i in range(n)]
        r = 0
        for col in range(n):
            piv = next((i for i in range(r, n) if (work[i] >> col) & 1), None)
            if piv is None:
                raise ValueError("singular map: rows are linearly dependent")
            work[r], work[piv] = work[piv], work[r]
            aug[r], aug[piv] = aug[piv], aug[r]
            for i in range(n):
                if i != r and (work[i] >> col) & 1:
                    work[i] ^= work[r]
                    aug[i] ^= aug[r]
            r += 1
        # work is now a row permutation of the identity; undo it on aug
    # (with full elimination and leftmost pivots, work[i] == 1 << i already)
        inv_rows = [0] * n
        for i in range(n):
            inv_rows[work[i].bit_length() - 1] = aug[i]
        return BinaryLinearMap(tuple(inv_rows), n)

    def preimage_classes(self) -> list[np.ndarray]:
        """Input symbols grouped by image, indexed by output symbol.

        Entry w holds the sorted inputs mapping to w: cosets of the kernel,
        each of size 2^(in_dim - rank); output symbols outside the image get
        an empty array.
        """
        table = self.lookup
        order = np.argsort(table, kind="stable")
        sorted_vals = table[order]
        classes: list[np.ndarray] = []
        for w in range(1 << self.out_dim):
            lo = np.searchsorted(sorted_vals, w, side="left")
            hi = np.searchsorted(sorted_vals, w, side="right")
            classes.append(np.sort(order[lo:hi]))
        return classes

    def __str__(self) -> str:
        return "[" + ", ".join(self.to_strings()) + "]"


def parse_map_literal(value: str, expected_in_dim: int | None = None) -> BinaryLinearMap:
    """Parse the config literal form: ["11"] or ["110","101"], or "identity".

    Row strings list component 0 leftmost, matching from_strings().
    """
    text = value.strip()
    if text == "identity":
        if expected_in_dim is None:
            raise ValueError('"identity" needs a known dimension')
        return BinaryLinearMap.identity(expected_in_dim)
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f'map literal must look like ["11","01"], got {value!r}')
    body = text[1:-1].strip()
    if not body:
        raise ValueError("map literal has no rows")
    rows = []
    for part in body.split(","):
        part = part.strip()
        if len(part) < 2 or part[0] not in "\"'" or part[-1] != part[0]:
            raise ValueError(f"map rows must be quoted binary strings, got {part!r}")
        rows.append(part[1:-1])
    m = BinaryLinearMap.from_strings(rows)
    if expected_in_dim is not None and m.in_dim != expected_in_dim:
        raise ValueError(f"map has {m.in_dim} columns, expected {expected_in_dim}")
    return m
