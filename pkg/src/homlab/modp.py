"""Dense-vectorized linear algebra over GF(p).

The boundary matrices coming out of cube enumeration can have tens of
millions of columns while their rank is bounded by a few thousand (the size
of the codomain chain group).  Ranks over GF(p) are computed by absorbing
column vectors into an incrementally maintained reduced-row-echelon basis:

* sparse columns (a handful of entries each) reduce against the basis with
  a few vectorized scaled-row subtractions per batch -- the coefficients are
  the original entries, which is exact because the basis is kept fully
  reduced over its pivot columns;
* freshly found pivot rows collect in a small pending block that is folded
  into the main basis in batches, so back-substitution cost is amortized;
* all inner products run through `mul_mod`, which splits 31-bit residues
  into 16-bit halves so float64 BLAS matmuls are exact.

Everything is deterministic: columns are absorbed in the order given and the
pivot of a new basis row is its first nonzero coordinate.
"""

from __future__ import annotations

import numpy as np

DEFAULT_PRIME = 2147483647

_MASK16 = 0xFFFF
# keeps float64 matmul transients bounded (~chunk * n * 8 bytes each)
_K_CHUNK = 2048
_PENDING_LIMIT = 512
_GROW_BLOCK = 4096


def is_probable_prime(n):
    """Miller-Rabin with bases sufficient for 64-bit determinism."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def mul_mod(a, b, p):
    """Exact (a @ b) % p for int64 arrays with entries in [0, p), p < 2^31."""
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    small = p <= 1 << 16  # products stay exact in a single float64 matmul
    hi_w = (1 << 32) % p
    mid_w = (1 << 16) % p
    for k0 in range(0, a.shape[1], _K_CHUNK):
        ak = a[:, k0:k0 + _K_CHUNK]
        bk = b[k0:k0 + _K_CHUNK]
        if small:
            out += np.rint(ak.astype(np.float64) @ bk.astype(np.float64)).astype(np.int64) % p
            out %= p
            continue
        a1 = (ak >> 16).astype(np.float64)
        a0 = (ak & _MASK16).astype(np.float64)
        b1 = (bk >> 16).astype(np.float64)
        b0 = (bk & _MASK16).astype(np.float64)
        hi = np.rint(a1 @ b1).astype(np.int64) % p
        mid = np.rint(a1 @ b0 + a0 @ b1).astype(np.int64) % p
        lo = np.rint(a0 @ b0).astype(np.int64) % p
        out += hi * hi_w % p
        out %= p
        out += mid * mid_w % p
        out %= p
        out += lo
        out %= p
    return out


def dense_rank_mod(mat, p):
    """Row-reduction rank of a small dense int64 matrix mod p."""
    a = np.array(mat, dtype=np.int64) % p
    m, n = a.shape
    rank = 0
    for c in range(n):
        if rank == m:
            break
        nz = np.nonzero(a[rank:, c])[0]
        if nz.size == 0:
            continue
        r = rank + int(nz[0])
        if r != rank:
            a[[rank, r]] = a[[r, rank]]
        inv = pow(int(a[rank, c]), -1, p)
        a[rank] = a[rank] * inv % p
        col = a[rank + 1:, c]
        mask = col != 0
        if mask.any():
            a[rank + 1:][mask] = (a[rank + 1:][mask] - np.outer(col[mask], a[rank])) % p
        rank += 1
    return rank


class ModSpan:
    """Incremental basis of the subspace of GF(p)^n spanned by absorbed rows.

    The main basis `P` is in reduced row-echelon form over its pivot columns
    (unit pivots, zero elsewhere on pivot columns); new rows wait in a small
    pending block that is periodically folded in.
    """

    def __init__(self, n, p=DEFAULT_PRIME):
        if not is_probable_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        if p > 2147483647:
            raise ValueError("modulus must fit in 31 bits")
        self.n = n
        self.p = p
        self._buf = np.zeros((0, n), dtype=np.int32)
        self._r = 0
        # pivot column -> row index in P (or -1)
        self._pivrow = np.full(n, -1, dtype=np.int64)
        self._pivcols = []          # in row order of P
        self._pending = []          # rows, mutually reduced, reduced vs P
        self._pending_piv = []

    @property
    def rank(self):
        return self._r + len(self._pending)

    # -- internals ---------------------------------------------------------

    def _grow(self, extra):
        need = self._r + extra
        if need <= len(self._buf):
            return
        new_len = max(need, len(self._buf) + _GROW_BLOCK)
        buf = np.zeros((new_len, self.n), dtype=np.int32)
        buf[:self._r] = self._buf[:self._r]
        self._buf = buf

    @property
    def _P(self):
        return self._buf[:self._r]

    def _flush_pending(self):
        if not self._pending:
            return
        pend = np.array(self._pending, dtype=np.int64)
        pivs = np.array(self._pending_piv, dtype=np.int64)
        p = self.p
        if self._r:
            # clear pending pivot columns from the main basis, row-chunked to
            # bound the matmul transients
            for r0 in range(0, self._r, _GROW_BLOCK):
                seg = self._buf[r0:min(r0 + _GROW_BLOCK, self._r)]
                coeffs = seg[:, pivs].astype(np.int64)
                if coeffs.any():
                    seg[:] = (seg.astype(np.int64) - mul_mod(coeffs, pend, p)) % p
        self._grow(len(pend))
        self._buf[self._r:self._r + len(pend)] = pend
        for k, c in enumerate(pivs.tolist()):
            self._pivrow[c] = self._r + k
            self._pivcols.append(c)
        self._r += len(pend)
        self._pending = []
        self._pending_piv = []

    def _reduce_vs_pending(self, block):
        # pending rows are mutually reduced, so one matmul pass suffices
        if not self._pending:
            return block
        p = self.p
        pend = np.array(self._pending, dtype=np.int64)
        pivs = np.array(self._pending_piv, dtype=np.int64)
        coeffs = block[:, pivs]
        if coeffs.any():
            block = (block - mul_mod(coeffs, pend, p)) % p
        return block

    def _insert_rows(self, block):
        """Insert candidate rows already reduced against the main basis.

        Rows still in flight have not seen any pivots flushed mid-block, so
        flushing is deferred to the caller (between blocks)."""
        p = self.p
        inserted = 0
        for row in block:
            for prow, c in zip(self._pending, self._pending_piv):
                v = row[c]
                if v:
                    row = (row - v * prow) % p
            nz = np.flatnonzero(row)
            if nz.size == 0:
                continue
            c = int(nz[0])
            row = row * pow(int(row[c]), -1, p) % p
            for k in range(len(self._pending)):
                v = self._pending[k][c]
                if v:
                    self._pending[k] = (self._pending[k] - v * row) % p
            self._pending.append(row)
            self._pending_piv.append(c)
            inserted += 1
        return inserted

    # -- public absorption paths -------------------------------------------

    def absorb(self, block):
        """Absorb dense rows ((k, n) integer array); returns the new rank."""
        block = np.asarray(block, dtype=np.int64) % self.p
        if block.ndim != 2 or block.shape[1] != self.n:
            raise ValueError("block shape does not match ambient dimension")
        p = self.p
        for b0 in range(0, len(block), _K_CHUNK):
            chunk = block[b0:b0 + _K_CHUNK]
            if self._r:
                pivcols = np.array(self._pivcols, dtype=np.int64)
                coeffs = chunk[:, pivcols]
                if coeffs.any():
                    chunk = (chunk - mul_mod(coeffs, self._P, p)) % p
            chunk = self._reduce_vs_pending(np.ascontiguousarray(chunk))
            live = chunk.any(axis=1)
            if live.any():
                self._insert_rows(chunk[live])
            if len(self._pending) >= _PENDING_LIMIT:
                self._flush_pending()
        self._flush_pending()
        return self.rank

    def absorb_sparse(self, pos, val):
        """Absorb sparse rows given as padded (k, w) position/value arrays;
        positions equal to n are padding.  Values need not be reduced mod p.

        Because the main basis is fully reduced, one pass of scaled-row
        subtractions with the *original* coefficients clears every main
        pivot column, making the per-row cost proportional to w, not rank.
        """
        p = self.p
        pos = np.asarray(pos, dtype=np.int64)
        val = np.asarray(val, dtype=np.int64) % p
        for b0 in range(0, len(pos), _K_CHUNK):
            pos_c = pos[b0:b0 + _K_CHUNK]
            val_c = val[b0:b0 + _K_CHUNK]
            dense = np.zeros((len(pos_c), self.n + 1), dtype=np.int64)
            np.put_along_axis(dense, pos_c, val_c, axis=1)
            dense = dense[:, :self.n]
            if self._r:
                for k in range(pos_c.shape[1]):
                    cols_k = pos_c[:, k]
                    safe_cols = np.where(cols_k < self.n, cols_k, 0)
                    rows_k = self._pivrow[safe_cols]
                    coef = np.where((cols_k < self.n) & (rows_k >= 0), val_c[:, k], 0)
                    if not coef.any():
                        continue
                    dense -= coef[:, None] * self._buf[np.maximum(rows_k, 0)]
                    dense %= p
            dense = self._reduce_vs_pending(dense)
            live = dense.any(axis=1)
            if live.any():
                self._insert_rows(dense[live])
            if len(self._pending) >= _PENDING_LIMIT:
                self._flush_pending()
        self._flush_pending()
        return self.rank

    def contains(self, block):
        """True iff every row of `block` lies in the current span."""
        self._flush_pending()
        block = np.asarray(block, dtype=np.int64) % self.p
        p = self.p
        for b0 in range(0, len(block), _K_CHUNK):
            chunk = block[b0:b0 + _K_CHUNK]
            if self._r:
                pivcols = np.array(self._pivcols, dtype=np.int64)
                chunk = (chunk - mul_mod(chunk[:, pivcols], self._P, p)) % p
            if chunk.any():
                return False
        return True


def rank_csc_mod(n_rows, indptr, rowidx, data, p=DEFAULT_PRIME, target=None,
                 span=None):
    """Rank over GF(p) of a sparse CSC matrix streamed column by column.

    Column cost is proportional to the column's support, so matrices with
    millions of short columns are fine.  With `target` set, absorption stops
    as soon as the rank reaches it (sound when the caller only needs the
    lower-bound certificate).  Returns (rank, span).
    """
    span = span if span is not None else ModSpan(n_rows, p)
    ncols = len(indptr) - 1
    counts = np.diff(indptr)
    step = 8192
    for j0 in range(0, ncols, step):
        j1 = min(j0 + step, ncols)
        lo, hi = int(indptr[j0]), int(indptr[j1])
        cnt = counts[j0:j1]
        w = int(cnt.max(initial=0))
        if w == 0:
            continue
        k = j1 - j0
        pos = np.full((k, w), n_rows, dtype=np.int64)
        val = np.zeros((k, w), dtype=np.int64)
        flat_col = np.repeat(np.arange(k), cnt)
        slot = np.arange(hi - lo) - np.repeat(indptr[j0:j1] - lo, cnt)
        pos[flat_col, slot] = rowidx[lo:hi]
        val[flat_col, slot] = data[lo:hi] % p
        span.absorb_sparse(pos, val)
        if target is not None and span.rank >= target:
            break
    return span.rank, span
