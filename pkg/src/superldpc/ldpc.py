"""Binary LDPC machinery: sparse parity-check matrices, alist I/O, random
regular code construction, GF(2) systematic encoding, and a flooding
sum-product decoder.

LLR convention throughout: L = log P(bit=0) - log P(bit=1), so positive
means "0 more likely" and hard decision is bit = (L < 0).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LLR_CLIP = 38.0  # tanh(19.0) is the largest double strictly below 1, so
                 # clipping here keeps every arctanh finite.


class AlistFormatError(ValueError):
    """Malformed alist text; message carries a 1-based line number."""


@dataclass(frozen=True)
class SparseParityCheck:
    """Adjacency-list form of a binary parity-check matrix.

    rows[i] lists the column indices of check i, cols[j] the check indices
    of column j; both sorted, duplicate-free, and mutually consistent.
    """

    n_cols: int
    n_rows: int
    rows: tuple[tuple[int, ...], ...]
    cols: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.n_cols < 1 or self.n_rows < 1:
            raise ValueError("matrix must have at least one row and one column")
        rows = tuple(tuple(sorted(r)) for r in self.rows)
        if len(rows) != self.n_rows:
            raise ValueError(f"expected {self.n_rows} rows, got {len(rows)}")
        for i, r in enumerate(rows):
            if len(set(r)) != len(r):
                raise ValueError(f"row {i} has duplicate column indices")
            if r and (r[0] < 0 or r[-1] >= self.n_cols):
                raise ValueError(f"row {i} has out-of-range column index")
        cols = self.cols or _transpose(rows, self.n_cols)
        cols = tuple(tuple(sorted(c)) for c in cols)
        if cols != _transpose(rows, self.n_cols):
            raise ValueError("rows/cols adjacency lists are inconsistent")
        for j, c in enumerate(cols):
            if not c:
                raise ValueError(f"column {j} appears in no check")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def n_edges(self) -> int:
        return sum(len(r) for r in self.rows)

    def as_dense(self) -> np.ndarray:
        h = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            h[i, list(r)] = 1
        return h


def _transpose(rows, n_cols):
    cols = [[] for _ in range(n_cols)]
    for i, r in enumerate(rows):
        for j in r:
            if 0 <= j < n_cols:
                cols[j].append(i)
    return tuple(tuple(c) for c in cols)


# ---------------------------------------------------------------------------
# alist I/O
# ---------------------------------------------------------------------------

def parse_alist(text: str) -> SparseParityCheck:
    """Parse alist text: header "n m", max degrees, per-column and per-row
    degree lists, then 1-based column and row adjacency lines (zero padding
    tolerated).  Errors carry the offending line number.
    """
    lines = text.splitlines()

    def ints(line_no: int, expect: int | None = None) -> list[int]:
        if line_no >= len(lines):
            raise AlistFormatError(f"line {line_no + 1}: unexpected end of file")
        try:
            vals = [int(tok) for tok in lines[line_no].split()]
        except ValueError:
            raise AlistFormatError(f"line {line_no + 1}: non-integer token") from None
        if expect is not None and len(vals) != expect:
            raise AlistFormatError(
                f"line {line_no + 1}: expected {expect} integers, found {len(vals)}"
            )
        return vals

    header = ints(0)
    if len(header) != 2 or header[0] < 1 or header[1] < 1:
        raise AlistFormatError("line 1: malformed header, expected 'n m' with n, m >= 1")
    n, m = header
    ints(1, 2)  # max degrees; values are re-derived below, presence is required
    col_deg = ints(2, n)
    row_deg = ints(3, m)

    def adjacency(start: int, count: int, degs, limit: int, what: str):
        out = []
        for idx in range(count):
            line_no = start + idx
            vals = [v for v in ints(line_no) if v != 0]
            if len(vals) != degs[idx]:
                raise AlistFormatError(
                    f"line {line_no + 1}: {what} {idx} lists {len(vals)} entries, "
                    f"degree line says {degs[idx]}"
                )
            if len(set(vals)) != len(vals):
                raise AlistFormatError(f"line {line_no + 1}: duplicate index in {what} {idx}")
            for v in vals:
                if not 1 <= v <= limit:
                    raise AlistFormatError(
                        f"line {line_no + 1}: index {v} out of range 1..{limit}"
                    )
            out.append(tuple(sorted(v - 1 for v in vals)))
        return tuple(out)

    cols = adjacency(4, n, col_deg, m, "column")
    rows = adjacency(4 + n, m, row_deg, n, "row")

    for line_no in range(4 + n + m, len(lines)):
        if lines[line_no].strip():
            raise AlistFormatError(f"line {line_no + 1}: trailing content after adjacency")

    if _transpose(rows, n) != cols:
        raise AlistFormatError(
            f"line 5: column adjacency is inconsistent with row adjacency"
        )
    try:
        return SparseParityCheck(n_cols=n, n_rows=m, rows=rows, cols=cols)
    except ValueError as exc:
        raise AlistFormatError(str(exc)) from None


def serialize_alist(h: SparseParityCheck) -> str:
    """Emit MacKay-style alist text (fixed-width lines, zero padded)."""
    dmax_c = max(len(c) for c in h.cols)
    dmax_r = max(len(r) for r in h.rows)
    out = [f"{h.n_cols} {h.n_rows}", f"{dmax_c} {dmax_r}"]
    out.append(" ".join(str(len(c)) for c in h.cols))
    out.append(" ".join(str(len(r)) for r in h.rows))
    for c in h.cols:
        padded = [str(i + 1) for i in c] + ["0"] * (dmax_c - len(c))
        out.append(" ".join(padded))
    for r in h.rows:
        padded = [str(j + 1) for j in r] + ["0"] * (dmax_r - len(r))
        out.append(" ".join(padded))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# random regular codes
# ---------------------------------------------------------------------------

def build_regular_code(n: int, col_deg: int, row_deg: int, seed: int) -> SparseParityCheck:
    """Random (col_deg, row_deg)-regular parity-check matrix on n columns.

    Socket construction: each column contributes col_deg edge stubs, a seeded
    permutation deals them to checks row_deg at a time.  Duplicate edges are
    repaired by bounded swaps; afterwards a best-effort pass (budget
    10 * n_edges swap attempts) shortens 4-cycles.  Deterministic per seed.
    """
    if col_deg < 1 or row_deg < 1:
        raise ValueError("degrees must be positive")
    if row_deg > n:
        raise ValueError(f"infeasible: row degree {row_deg} exceeds n={n}")
    if (n * col_deg) % row_deg:
        raise ValueError(
            f"infeasible: n*col_deg = {n * col_deg} not divisible by row_deg = {row_deg}"
        )
    m = n * col_deg // row_deg
    n_edges = n * col_deg
    rng = np.random.default_rng(seed)

    slots = np.repeat(np.arange(n), col_deg)
    rng.shuffle(slots)

    def row_of(slot: int) -> int:
        return slot // row_deg

    def has_dup(i: int) -> bool:
        r = slots[i * row_deg:(i + 1) * row_deg]
        return len(set(r.tolist())) != row_deg

    # repair duplicate edges by swapping stubs between checks
    budget = 100 * n_edges
    dup_rows = [i for i in range(m) if has_dup(i)]
    while dup_rows and budget > 0:
        i = dup_rows[-1]
        if not has_dup(i):  # may have been fixed while queued twice
            dup_rows.pop()
            continue
        seg = slots[i * row_deg:(i + 1) * row_deg].tolist()
        seen: set[int] = set()
        pos = next(p for p, v in enumerate(seg) if v in seen or seen.add(v))
        a = i * row_deg + pos
        b = int(rng.integers(n_edges))
        budget -= 1
        ib = row_of(b)
        if ib == i:
            continue
        row_i = set(seg)
        row_b = set(slots[ib * row_deg:(ib + 1) * row_deg].tolist())
        if slots[b] in row_i or slots[a] in row_b:
            continue
        slots[a], slots[b] = slots[b], slots[a]
        if not has_dup(i):
            dup_rows.pop()
        if has_dup(ib):
            dup_rows.append(ib)
    if dup_rows:
        raise ValueError(
            f"infeasible degree combination (n={n}, col_deg={col_deg}, row_deg={row_deg}): "
            "could not eliminate duplicate edges"
        )

    # best-effort 4-cycle shortening
    budget = 10 * n_edges
    while budget > 0:
        pair_seen: dict[tuple[int, int], int] = {}
        conflict = None
        for i in range(m):
            seg = sorted(slots[i * row_deg:(i + 1) * row_deg].tolist())
            for x in range(row_deg):
                for yy in range(x + 1, row_deg):
                    key = (seg[x], seg[yy])
                    if key in pair_seen:
                        conflict = (i, key)
                        break
                    pair_seen[key] = i
                if conflict:
                    break
            if conflict:
                break
        if conflict is None:
            break
        i, key = conflict
        seg_base = i * row_deg
        seg = slots[seg_base:seg_base + row_deg].tolist()
        pos = seg.index(key[0])
        moved = False
        while budget > 0 and not moved:
            budget -= 1
            b = int(rng.integers(n_edges))
            ib = row_of(b)
            if ib == i:
                continue
            row_i = set(seg)
            row_b = set(slots[ib * row_deg:(ib + 1) * row_deg].tolist())
            if slots[b] in row_i or seg[pos] in row_b:
                continue
            a = seg_base + pos
            slots[a], slots[b] = slots[b], slots[a]
            moved = True

    rows = tuple(
        tuple(sorted(slots[i * row_deg:(i + 1) * row_deg].tolist())) for i in range(m)
    )
    return SparseParityCheck(n_cols=n, n_rows=m, rows=rows)


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

class Encoder:
    """Systematic GF(2) encoder from Gaussian elimination on H.

    Pivot columns are chosen leftmost-first, so the information set (the
    non-pivot columns) is deterministic.  Rank-deficient H is fine: the code
    then has k = n - rank(H) > n - n_rows information bits.
    """

    def __init__(self, h: SparseParityCheck):
        self.h = h
        n = h.n_cols
        work = [sum(1 << j for j in r) for r in h.rows]
        pivots: list[int] = []
        r = 0
        for col in range(n):
            piv = next((i for i in range(r, len(work)) if (work[i] >> col) & 1), None)
            if piv is None:
                continue
            work[r], work[piv] = work[piv], work[r]
            for i in range(len(work)):
                if i != r and (work[i] >> col) & 1:
                    work[i] ^= work[r]
            pivots.append(col)
            r += 1
        self.rank = r
        self.k = n - r
        self.pivot_cols = tuple(pivots)
        self.info_set = tuple(sorted(set(range(n)) - set(pivots)))

        # generator rows: unit info word -> codeword
        g = np.zeros((self.k, n), dtype=np.uint8)
        for idx, col in enumerate(self.info_set):
            g[idx, col] = 1
            u_mask = 1 << col
            for t, pivot_col in enumerate(self.pivot_cols):
                if (work[t] & u_mask).bit_count() & 1:
                    g[idx, pivot_col] = 1
        self._g = g

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        """Map k information bits to an n-bit codeword (info bits appear
        verbatim on the information set)."""
        u = np.asarray(info_bits)
        if u.shape != (self.k,):
            raise ValueError(f"expected {self.k} information bits, got shape {u.shape}")
        if np.any((u != 0) & (u != 1)):
            raise ValueError("information bits must be 0/1")
        chosen = self._g[u != 0]
        if len(chosen) == 0:
            return np.zeros(self.h.n_cols, dtype=np.uint8)
        return np.bitwise_xor.reduce(chosen, axis=0)


def make_encoder(h: SparseParityCheck) -> Encoder:
    return Encoder(h)


def syndrome(h: SparseParityCheck, bits: np.ndarray) -> np.ndarray:
    """Per-check parities of a word (or of each row of a word matrix)."""
    b = np.asarray(bits, dtype=np.uint8)
    flat = np.concatenate([np.asarray(r, dtype=np.int64) for r in h.rows])
    starts = np.cumsum([0] + [len(r) for r in h.rows[:-1]])
    if b.ndim == 1:
        return (np.add.reduceat(b[flat].astype(np.int64), starts) & 1).astype(np.uint8)
    return (np.add.reduceat(b[:, flat].astype(np.int64), starts, axis=1) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# sum-product decoding
# ---------------------------------------------------------------------------

class SumProductDecoder:
    """Flooding sum-product decoder with precomputed graph structure.

    Check updates use the tanh rule with leave-one-out prefix/suffix products
    (no division, so exactly-zero messages are safe).  Variable-to-check
    messages are clipped to +-LLR_CLIP before tanh.
    """

    def __init__(self, h: SparseParityCheck):
        self.h = h
        edges = [(i, j) for i, r in enumerate(h.rows) for j in r]
        self.n_edges = len(edges)
        self.edge_col = np.array([j for _, j in edges], dtype=np.int64)
        deg = np.array([len(r) for r in h.rows], dtype=np.int64)
        self.dmax = int(deg.max())
        self.edge_row = np.array([i for i, _ in edges], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(deg)[:-1]])
        self.edge_slot = np.arange(self.n_edges) - starts[self.edge_row]
        self.row_starts = starts

    def _check_messages(self, q_msg: np.ndarray) -> np.ndarray:
        """Leave-one-out tanh-rule messages for every edge."""
        t = np.tanh(0.5 * np.clip(q_msg, -LLR_CLIP, LLR_CLIP))
        padded = np.ones((self.h.n_rows, self.dmax))
        padded[self.edge_row, self.edge_slot] = t
        pre = np.ones_like(padded)
        np.cumprod(padded[:, :-1], axis=1, out=pre[:, 1:])
        suf = np.ones_like(padded)
        np.cumprod(padded[:, :0:-1], axis=1, out=suf[:, -2::-1])
        loo = pre[self.edge_row, self.edge_slot] * suf[self.edge_row, self.edge_slot]
        with np.errstate(divide="ignore"):  # degree-1 checks hit arctanh(1)
            return np.clip(2.0 * np.arctanh(loo), -LLR_CLIP, LLR_CLIP)

    def _syndrome_ok(self, hard: np.ndarray) -> bool:
        sums = np.add.reduceat(hard[self.edge_col].astype(np.int64), self.row_starts)
        return not np.any(sums & 1)

    def rows_zero_syndrome(self, bits: np.ndarray) -> bool:
        """True when every row of a (d, n) bit matrix satisfies every check."""
        b = np.atleast_2d(np.asarray(bits))
        sums = np.add.reduceat(b[:, self.edge_col].astype(np.int64),
                               self.row_starts, axis=1)
        return not np.any(sums & 1)

    def decode(
        self, prior_llrs: np.ndarray, i_max: int, early_stop: bool = True
    ) -> tuple[np.ndarray, np.ndarray, bool]:
        """Run up to i_max flooding iterations.

        Returns (hard_decisions, extrinsic_llrs, converged); extrinsic is the
        sum of incoming check messages, i.e. the posterior minus the prior.
        converged means the final hard decision has zero syndrome (with
        early_stop, the loop exits at the first such iteration).
        """
        prior = np.asarray(prior_llrs, dtype=np.float64)
        if prior.shape != (self.h.n_cols,):
            raise ValueError(f"prior must have length {self.h.n_cols}")
        if not np.all(np.isfinite(prior)):
            raise ValueError("prior LLRs must be finite")
        q_msg = prior[self.edge_col].copy()
        ext = np.zeros_like(prior)
        hard = (prior < 0).astype(np.uint8)
        for _ in range(i_max):
            r_msg = self._check_messages(q_msg)
            ext = np.bincount(self.edge_col, weights=r_msg, minlength=self.h.n_cols)
            posterior = prior + ext
            q_msg = posterior[self.edge_col] - r_msg
            hard = (posterior < 0).astype(np.uint8)
            if early_stop and self._syndrome_ok(hard):
                return hard, ext, True
        return hard, ext, self._syndrome_ok(hard)


def spa_decode(
    h: SparseParityCheck, prior_llrs: np.ndarray, i_max: int, early_stop: bool = True
) -> tuple[np.ndarray, np.ndarray, bool]:
    """One-shot sum-product decode (builds the graph structure each call)."""
    return SumProductDecoder(h).decode(prior_llrs, i_max, early_stop=early_stop)
