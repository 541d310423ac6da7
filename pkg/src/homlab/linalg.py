"""Exact integer / rational / mod-p linear algebra for chain complexes.

Matrices are sparse, column-major, with exact integer entries.  Smith normal
forms favor unit pivots chosen Markowitz-style (lowest fill, then lowest
index); whatever survives is finished by a dense textbook reduction on the
small residual block.  Very wide matrices are first filtered down to a
column subset that provably generates the full column lattice, which keeps
Smith forms of boundary matrices with ~10^5 columns affordable.

Ranks over GF(p) are delegated to `modp.ModSpan`; its batched elimination is
the only route that scales to the million-column boundary matrices.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import modp
from .errors import ContractViolationError

_INT64_SAFE = 1 << 62


class IntMatrix:
    """Immutable sparse integer matrix in CSC layout.

    Within each column row indices are strictly increasing and no explicit
    zeros are stored.  Entries are exact; values that do not fit in int64
    are kept in an object array transparently.
    """

    __slots__ = ("rows", "cols", "indptr", "rowidx", "data")
    __hash__ = None

    def __init__(self, rows, cols, indptr, rowidx, data, _checked=False):
        self.rows = int(rows)
        self.cols = int(cols)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.rowidx = np.asarray(rowidx, dtype=np.int64)
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data)
        if not _checked:
            self._validate()

    def _validate(self):
        if len(self.indptr) != self.cols + 1 or (len(self.indptr) and self.indptr[0] != 0):
            raise ValueError("bad indptr")
        if (self.cols and self.indptr[-1] != len(self.rowidx)) or len(self.rowidx) != len(self.data):
            raise ValueError("index/data length mismatch")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.nnz == 0:
            return
        if self.rowidx.min() < 0 or self.rowidx.max() >= self.rows:
            raise ValueError("row index out of range")
        # strictly increasing rows inside each column: entry k starting a new
        # column is exempt from the monotonicity check against entry k-1
        col_start = np.zeros(self.nnz, dtype=bool)
        col_start[self.indptr[:-1][self.indptr[:-1] < self.nnz]] = True
        bad = (np.diff(self.rowidx) <= 0) & ~col_start[1:]
        if bad.any():
            raise ValueError("row indices must be strictly increasing within a column")
        if self.data.dtype == object:
            if any(v == 0 for v in self.data):
                raise ValueError("explicit zero entry")
        elif not self.data.all():
            raise ValueError("explicit zero entry")

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zeros(rows, cols):
        return IntMatrix(rows, cols, np.zeros(cols + 1, dtype=np.int64),
                         np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64),
                         _checked=True)

    @staticmethod
    def identity(n):
        return IntMatrix(n, n, np.arange(n + 1, dtype=np.int64),
                         np.arange(n, dtype=np.int64), np.ones(n, dtype=np.int64),
                         _checked=True)

    @staticmethod
    def from_triplets(rows, cols, rr, cc, vv):
        """Build from parallel row/col/value sequences; duplicates are summed."""
        rr = np.asarray(rr, dtype=np.int64)
        cc = np.asarray(cc, dtype=np.int64)
        if len(rr) == 0:
            return IntMatrix.zeros(rows, cols)
        big = isinstance(vv, np.ndarray) and vv.dtype == object
        if not big:
            try:
                vv64 = np.asarray(vv, dtype=np.int64)
                # duplicate summation must not overflow int64
                maxv = int(np.abs(vv64).max(initial=0))
                big = maxv and maxv >= (1 << 62) // max(len(rr), 1)
            except (OverflowError, ValueError, TypeError):
                big = True
        if big:
            return IntMatrix._from_triplets_object(rows, cols, rr, cc, list(vv))
        order = np.lexsort((rr, cc))
        rr, cc, vv64 = rr[order], cc[order], vv64[order]
        first = np.ones(len(rr), dtype=bool)
        first[1:] = (rr[1:] != rr[:-1]) | (cc[1:] != cc[:-1])
        starts = np.flatnonzero(first)
        sums = np.add.reduceat(vv64, starts)
        keep = sums != 0
        rout, cout, vout = rr[starts][keep], cc[starts][keep], sums[keep]
        indptr = np.zeros(cols + 1, dtype=np.int64)
        np.add.at(indptr, cout + 1, 1)
        np.cumsum(indptr, out=indptr)
        return IntMatrix(rows, cols, indptr, rout, vout)

    @staticmethod
    def _from_triplets_object(rows, cols, rr, cc, vv):
        acc = {}
        for r, c, v in zip(rr.tolist(), cc.tolist(), vv):
            key = (c, r)
            acc[key] = acc.get(key, 0) + int(v)
        items = sorted((c, r, v) for (c, r), v in acc.items() if v)
        indptr = np.zeros(cols + 1, dtype=np.int64)
        for c, _, _ in items:
            indptr[c + 1] += 1
        np.cumsum(indptr, out=indptr)
        rowidx = np.array([r for _, r, _ in items], dtype=np.int64)
        data = np.array([v for _, _, v in items], dtype=object)
        return IntMatrix(rows, cols, indptr, rowidx, data)

    @staticmethod
    def from_dense(dense, rows=None, cols=None):
        dense = [list(row) for row in dense]
        if rows is None:
            rows = len(dense)
        if cols is None:
            cols = len(dense[0]) if dense else 0
        rr, cc, vv = [], [], []
        for i, row in enumerate(dense):
            for j, v in enumerate(row):
                if v:
                    rr.append(i)
                    cc.append(j)
                    vv.append(int(v))
        if not rr:
            return IntMatrix.zeros(rows, cols)
        return IntMatrix.from_triplets(rows, cols, rr, cc, np.array(vv, dtype=object))

    @staticmethod
    def from_columns(rows, columns):
        """`columns` is a list of {row: value} dicts."""
        rr, cc, vv = [], [], []
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    rr.append(i)
                    cc.append(j)
                    vv.append(int(v))
        if not rr:
            return IntMatrix.zeros(rows, len(columns))
        return IntMatrix.from_triplets(rows, len(columns), rr, cc, np.array(vv, dtype=object))

    @staticmethod
    def from_csc_arrays(rows, cols, indptr, rowidx, data, trusted=False):
        """Adopt prebuilt CSC arrays (sorted, deduplicated, no zeros)."""
        return IntMatrix(rows, cols, indptr, rowidx, data, _checked=trusted)

    # -- accessors --------------------------------------------------------

    @property
    def nnz(self):
        return len(self.rowidx)

    def col(self, j):
        lo, hi = self.indptr[j], self.indptr[j + 1]
        return self.rowidx[lo:hi], self.data[lo:hi]

    def column_dict(self, j):
        ri, dv = self.col(j)
        return {int(r): int(v) for r, v in zip(ri, dv)}

    def column_dicts(self):
        return [self.column_dict(j) for j in range(self.cols)]

    def to_dense(self):
        out = [[0] * self.cols for _ in range(self.rows)]
        for j in range(self.cols):
            ri, dv = self.col(j)
            for r, v in zip(ri, dv):
                out[int(r)][j] = int(v)
        return out

    def dense_block(self, j0, j1, mod=None):
        """Columns j0:j1 as a dense (j1-j0, rows) int64 array (column-per-row),
        optionally reduced mod p.  Only for int64-backed matrices."""
        lo, hi = int(self.indptr[j0]), int(self.indptr[j1])
        block = np.zeros((j1 - j0, self.rows), dtype=np.int64)
        cols_rep = np.repeat(np.arange(j1 - j0), np.diff(self.indptr[j0:j1 + 1]))
        vals = self.data[lo:hi]
        if mod is not None:
            vals = vals % mod
        block[cols_rep, self.rowidx[lo:hi]] = vals
        return block

    def transpose(self):
        if self.data.dtype == object:
            rr, cc, vv = [], [], []
            for j in range(self.cols):
                ri, dv = self.col(j)
                for r, v in zip(ri.tolist(), dv):
                    rr.append(j)
                    cc.append(r)
                    vv.append(v)
            return IntMatrix.from_triplets(self.cols, self.rows, rr, cc,
                                           np.array(vv, dtype=object))
        cols_of_entries = np.repeat(np.arange(self.cols, dtype=np.int64),
                                    np.diff(self.indptr))
        return IntMatrix.from_triplets(self.cols, self.rows,
                                       cols_of_entries, self.rowidx, self.data)

    def max_abs(self):
        if self.nnz == 0:
            return 0
        if self.data.dtype == object:
            return max(abs(int(v)) for v in self.data)
        return int(np.abs(self.data).max())

    def to_scipy(self):
        import scipy.sparse as sp
        if self.data.dtype == object:
            raise ValueError("entries too large for scipy int64 backend")
        return sp.csc_matrix((self.data, self.rowidx, self.indptr),
                             shape=(self.rows, self.cols))

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        safe = (self.data.dtype != object and other.data.dtype != object
                and self.max_abs() * max(other.max_abs(), 1) * max(self.cols, 1) < _INT64_SAFE)
        if safe:
            c = (self.to_scipy() @ other.to_scipy()).tocoo()
            return IntMatrix.from_triplets(self.rows, other.cols, c.row, c.col, c.data)
        mine = self.column_dicts()
        cols = []
        for j in range(other.cols):
            acc = {}
            ri, dv = other.col(j)
            for r, v in zip(ri.tolist(), dv):
                for i, w in mine[r].items():
                    acc[i] = acc.get(i, 0) + int(v) * w
            cols.append({i: w for i, w in acc.items() if w})
        return IntMatrix.from_columns(self.rows, cols)

    def is_zero(self):
        return self.nnz == 0

    def __eq__(self, other):
        return (isinstance(other, IntMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.rowidx, other.rowidx)
                and list(self.data) == list(other.data))

    def __repr__(self):
        return f"<IntMatrix {self.rows}x{self.cols} nnz={self.nnz}>"

    def mmwrite(self, fh):
        """MatrixMarket coordinate dump (1-based indices)."""
        fh.write("%%MatrixMarket matrix coordinate integer general\n")
        fh.write(f"{self.rows} {self.cols} {self.nnz}\n")
        for j in range(self.cols):
            ri, dv = self.col(j)
            for r, v in zip(ri, dv):
                fh.write(f"{int(r) + 1} {j + 1} {int(v)}\n")


@dataclass(frozen=True)
class SNFResult:
    """Diagonal of a Smith normal form: d_1 | d_2 | ... | d_r, all positive."""
    diagonal: tuple

    @property
    def rank(self):
        return len(self.diagonal)

    @property
    def torsion(self):
        return [d for d in self.diagonal if d > 1]


@dataclass(frozen=True)
class HomologyGroup:
    """Betti number plus invariant-factor torsion (entries > 1, each dividing
    the next).  Field coefficients always report empty torsion."""
    betti: int
    torsion: tuple = ()

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a != 0:
                raise ValueError("torsion coefficients must form a divisibility chain")

    def is_trivial(self):
        return self.betti == 0 and not self.torsion

    def __str__(self):
        if self.betti == 0 and not self.torsion:
            return "0"
        parts = []
        if self.betti == 1:
            parts.append("Z")
        elif self.betti > 1:
            parts.append(f"Z^{self.betti}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts)


# -- dense exact Smith reduction ------------------------------------------


def _dense_snf_diagonal(mat):
    """Textbook Smith reduction of a dense list-of-lists (mutated); returns
    the invariant factors, positive and divisibility-chained."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    diag = []
    t = 0
    while t < m and t < n:
        best = None
        for i in range(t, m):
            row = mat[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < abs(best[2])):
                    best = (i, j, v)
            if best is not None and abs(best[2]) == 1:
                break
        if best is None:
            break
        bi, bj, _ = best
        if bi != t:
            mat[t], mat[bi] = mat[bi], mat[t]
        if bj != t:
            for row in mat:
                row[t], row[bj] = row[bj], row[t]
        while True:
            # clear column t
            restart = False
            for i in range(t + 1, m):
                v = mat[i][t]
                if v:
                    q = v // mat[t][t]
                    if q:
                        row, prow = mat[i], mat[t]
                        for j in range(t, n):
                            row[j] -= q * prow[j]
                    if mat[i][t]:  # remainder became the smaller pivot
                        mat[t], mat[i] = mat[i], mat[t]
                        restart = True
                        break
            if restart:
                continue
            # clear row t
            for j in range(t + 1, n):
                v = mat[t][j]
                if v:
                    q = v // mat[t][t]
                    if q:
                        for row in mat:
                            row[j] -= q * row[t]
                    if mat[t][j]:
                        for row in mat:
                            row[t], row[j] = row[j], row[t]
                        restart = True
                        break
            if restart:
                continue
            break
        piv = mat[t][t]
        # divisibility fixup: fold a non-multiple row into the pivot row
        fixed = False
        for i in range(t + 1, m):
            row = mat[i]
            if any(v % piv for v in row[t + 1:]):
                prow = mat[t]
                for jj in range(t, n):
                    prow[jj] += row[jj]
                fixed = True
                break
        if fixed:
            continue
        diag.append(abs(piv))
        t += 1
    return diag


# -- sparse unit-pivot elimination ----------------------------------------


class _SparseEliminator:
    """Destructive sparse elimination over Z using only |pivot| = 1 entries.

    Pivots are chosen by Markowitz fill score with (row, col) tie-break, so
    runs are deterministic.  Whatever remains when no unit entries are left
    comes back as a small dense block."""

    def __init__(self, m: IntMatrix):
        self.cols = {}
        self.row_support = {}
        for j in range(m.cols):
            ri, dv = m.col(j)
            if len(ri):
                col = {}
                for r, v in zip(ri.tolist(), dv.tolist() if dv.dtype != object else dv):
                    v = int(v)
                    col[r] = v
                    self.row_support.setdefault(r, set()).add(j)
                self.cols[j] = col
        self.unit_rank = 0
        self.heap = []
        for j in sorted(self.cols):
            for i, v in sorted(self.cols[j].items()):
                if v in (1, -1):
                    self._push(i, j)

    def _push(self, i, j):
        score = (len(self.row_support.get(i, ())) - 1) * (len(self.cols.get(j, ())) - 1)
        heapq.heappush(self.heap, (score, i, j))

    def run(self):
        while self.heap:
            score, i, j = heapq.heappop(self.heap)
            col = self.cols.get(j)
            if col is None or col.get(i) not in (1, -1):
                continue
            cur = (len(self.row_support[i]) - 1) * (len(col) - 1)
            if cur > score:
                self._push(i, j)  # stale score, requeue
                continue
            self._eliminate(i, j)
            self.unit_rank += 1
        return self.unit_rank, self._residual()

    def _eliminate(self, i, j):
        piv_col = self.cols.pop(j)
        piv = piv_col.pop(i)
        for r in piv_col:
            self.row_support[r].discard(j)
        # column ops clear row i from every other column
        for j2 in list(self.row_support.pop(i, ())):
            if j2 == j:
                continue
            col2 = self.cols[j2]
            q = col2.pop(i) * piv  # piv in {1,-1}: q = entry / piv
            for r, v in piv_col.items():
                w = col2.get(r, 0) - q * v
                if w:
                    if r not in col2:
                        self.row_support.setdefault(r, set()).add(j2)
                    col2[r] = w
                    if w in (1, -1):
                        self._push(r, j2)
                elif r in col2:
                    del col2[r]
                    self.row_support[r].discard(j2)
            if not col2:
                del self.cols[j2]
        # entries left in the pivot column die by row ops against row i

    def _residual(self):
        live_rows = sorted(r for r, js in self.row_support.items() if js)
        live_cols = sorted(self.cols)
        rmap = {r: k for k, r in enumerate(live_rows)}
        dense = [[0] * len(live_cols) for _ in live_rows]
        for k, j in enumerate(live_cols):
            for r, v in self.cols[j].items():
                dense[rmap[r]][k] = v
        return dense


def _take_columns(m: IntMatrix, cols):
    return IntMatrix.from_columns(m.rows, [m.column_dict(j) for j in cols])


def _column_filter(m: IntMatrix):
    """Column subset of a very wide matrix generating the same column
    lattice.  Candidates are picked by a mod-p sweep; the subset is then
    verified exactly (every other column must be an integer combination), so
    an unlucky prime only costs an extra round."""
    span = modp.ModSpan(m.rows, modp.DEFAULT_PRIME)
    chosen = []
    for j0 in range(0, m.cols, 512):
        j1 = min(j0 + 512, m.cols)
        block = m.dense_block(j0, j1, mod=modp.DEFAULT_PRIME)
        if span.contains(block):
            continue
        for k in range(j1 - j0):
            before = span.rank
            span.absorb(block[k:k + 1])
            if span.rank > before:
                chosen.append(j0 + k)
    while True:
        sub = _take_columns(m, chosen)
        ech = ColumnEchelon(sub)
        bad = ech.non_represented_columns(m)
        if not bad:
            return sub
        chosen = sorted(set(chosen) | set(bad[:64]))


def snf(m: IntMatrix) -> SNFResult:
    """Smith normal form diagonal of an integer matrix (deterministic)."""
    if m.nnz == 0:
        return SNFResult(())
    work = m
    if m.cols > 4 * m.rows and m.cols > 2048:
        work = _column_filter(m)
    elim = _SparseEliminator(work)
    unit_rank, residual = elim.run()
    tail = _dense_snf_diagonal(residual) if residual and residual[0] else []
    return SNFResult(tuple([1] * unit_rank + tail))


def rank(m: IntMatrix, field="rational", p=modp.DEFAULT_PRIME):
    """Matrix rank over Q (`field="rational"`) or GF(p) (`field="mod_p"`)."""
    if field == "rational":
        if m.nnz == 0:
            return 0
        work = m
        if m.cols > 4 * m.rows and m.cols > 2048:
            work = _column_filter(m)
        elim = _SparseEliminator(work)
        unit_rank, residual = elim.run()
        return unit_rank + _rational_rank_dense(residual)
    if field == "mod_p":
        if not modp.is_probable_prime(p):
            raise ValueError(f"{p} is not prime")
        if m.nnz == 0:
            return 0
        if m.data.dtype == object:
            m = _reduce_object_matrix_mod(m, p)
        r, _ = modp.rank_csc_mod(m.rows, m.indptr, m.rowidx, m.data, p=p)
        return r
    raise ValueError(f"unknown field {field!r}")


def _reduce_object_matrix_mod(m, p):
    vals = np.array([int(v) % p for v in m.data], dtype=np.int64)
    keep = vals != 0
    if keep.all():
        return IntMatrix(m.rows, m.cols, m.indptr, m.rowidx, vals, _checked=True)
    cols_of_entries = np.repeat(np.arange(m.cols, dtype=np.int64), np.diff(m.indptr))
    return IntMatrix.from_triplets(m.rows, m.cols, m.rowidx[keep],
                                   cols_of_entries[keep], vals[keep])


def _rational_rank_dense(dense):
    """Fraction-free (Bareiss) rank of a small dense integer block."""
    a = [row[:] for row in dense]
    m = len(a)
    n = len(a[0]) if m else 0
    r = 0
    prev = 1
    for c in range(n):
        piv = None
        for i in range(r, m):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        if r == m:
            break
    return r


# -- column echelon with tracked transform ---------------------------------


class ColumnEchelon:
    """Unimodular column reduction of an integer matrix.

    Locked pivot columns generate the column lattice; the transform columns
    of the slots that reduced to zero form an integral (hence saturated)
    kernel basis.  Also the workhorse behind integral solves."""

    def __init__(self, m: IntMatrix):
        self.m = m
        self.ncols = m.cols
        self.nrows = m.rows
        cols = {}
        ucols = {}
        row_support = {}
        for j in range(m.cols):
            ucols[j] = {j: 1}
            col = m.column_dict(j)
            if col:
                cols[j] = col
                for r in col:
                    row_support.setdefault(r, set()).add(j)
        self.pivots = []  # (row, col_slot, pivot_value) in lock order
        locked = set()
        for i in sorted(row_support):
            active = sorted(j for j in row_support.get(i, ()) if j not in locked and i in cols.get(j, ()))
            if not active:
                continue
            piv = min(active, key=lambda j: (abs(cols[j][i]), len(cols[j]), j))
            for j in active:
                if j != piv:
                    piv = self._clear(cols, ucols, row_support, i, piv, j)
            locked.add(piv)
            self.pivots.append((i, piv, cols[piv][i]))
        self.cols = cols
        self.ucols = ucols
        self.kernel_slots = sorted(j for j in range(m.cols)
                                   if j not in locked and j not in cols)

    @staticmethod
    def _clear(cols, ucols, row_support, i, piv, j):
        """Zero the (i, j) entry against the pivot column; the column holding
        the smaller value may take over as pivot (keeps growth down)."""
        a = cols[piv][i]
        b = cols[j].get(i, 0)
        if b == 0:
            return piv
        if b % a == 0:
            ColumnEchelon._addmul(cols, ucols, row_support, j, piv, -(b // a))
            return piv
        if a % b == 0:
            ColumnEchelon._addmul(cols, ucols, row_support, piv, j, -(a // b))
            return j
        x, y, g = _xgcd(a, b)
        # (piv, j) <- (x piv + y j, -(b/g) piv + (a/g) j): determinant 1
        ColumnEchelon._combine(cols, ucols, row_support, piv, j,
                               x, y, -(b // g), a // g)
        return piv

    @staticmethod
    def _addmul(cols, ucols, row_support, dst, src, q):
        if q == 0:
            return
        dcol = cols.get(dst, {})
        for r, v in cols.get(src, {}).items():
            w = dcol.get(r, 0) + q * v
            if w:
                if r not in dcol:
                    row_support.setdefault(r, set()).add(dst)
                dcol[r] = w
            elif r in dcol:
                del dcol[r]
                row_support[r].discard(dst)
        if dcol:
            cols[dst] = dcol
        else:
            cols.pop(dst, None)
        du = ucols[dst]
        for r, v in ucols[src].items():
            w = du.get(r, 0) + q * v
            if w:
                du[r] = w
            elif r in du:
                del du[r]

    @staticmethod
    def _combine(cols, ucols, row_support, c1, c2, a11, a12, a21, a22):
        """(col c1, col c2) <- (a11 c1 + a12 c2, a21 c1 + a22 c2)."""
        v1 = cols.get(c1, {})
        v2 = cols.get(c2, {})
        new1, new2 = {}, {}
        for r in set(v1) | set(v2):
            x1 = v1.get(r, 0)
            x2 = v2.get(r, 0)
            w1 = a11 * x1 + a12 * x2
            w2 = a21 * x1 + a22 * x2
            sup = row_support.setdefault(r, set())
            if w1:
                new1[r] = w1
                sup.add(c1)
            else:
                sup.discard(c1)
            if w2:
                new2[r] = w2
                sup.add(c2)
            else:
                sup.discard(c2)
        for c, new in ((c1, new1), (c2, new2)):
            if new:
                cols[c] = new
            else:
                cols.pop(c, None)
        u1 = ucols[c1]
        u2 = ucols[c2]
        nu1, nu2 = {}, {}
        for r in set(u1) | set(u2):
            x1 = u1.get(r, 0)
            x2 = u2.get(r, 0)
            w1 = a11 * x1 + a12 * x2
            w2 = a21 * x1 + a22 * x2
            if w1:
                nu1[r] = w1
            if w2:
                nu2[r] = w2
        ucols[c1] = nu1
        ucols[c2] = nu2

    @property
    def rank(self):
        return len(self.pivots)

    def kernel_basis(self) -> IntMatrix:
        return IntMatrix.from_columns(self.ncols,
                                      [self.ucols[j] for j in self.kernel_slots])

    def solve(self, b, integral_only=False):
        """Some x with M x = b, or None if b is outside the column span.

        The coefficients on the locked pivot slots are unique, and the
        transform is unimodular, so an integer solution exists exactly when
        the triangular solve stays integral.  Returns ints in that case,
        Fractions otherwise (or None under `integral_only`)."""
        if isinstance(b, dict):
            resid = {i: Fraction(v) for i, v in b.items() if v}
        else:
            resid = {i: Fraction(int(v)) for i, v in enumerate(b) if v}
        coeff = {}
        integral = True
        for i, slot, piv in self.pivots:
            v = resid.get(i)
            if not v:
                continue
            q = Fraction(v, piv)
            if q.denominator != 1:
                integral = False
                if integral_only:
                    return None
            coeff[slot] = q
            for r, w in self.cols[slot].items():
                nv = resid.get(r, Fraction(0)) - q * w
                if nv:
                    resid[r] = nv
                else:
                    resid.pop(r, None)
        if resid:
            return None
        x = [Fraction(0)] * self.ncols
        for slot, q in coeff.items():
            for r, w in self.ucols[slot].items():
                x[r] += q * w
        if integral:
            return [int(v) for v in x]
        return x

    def _forward_solve_block(self, B):
        """Triangular solve over the locked pivots for a dense block of
        right-hand sides restricted to pivot rows.  Returns the coefficient
        block, or None if some column needs a non-integer coefficient."""
        k = len(self.pivots)
        piv_index = {pr: t for t, (pr, _, _) in enumerate(self.pivots)}
        Y = np.zeros_like(B)
        bound = np.abs(B).max(initial=0)
        for t, (i, slot, piv) in enumerate(self.pivots):
            resid = B[t]
            if not resid.any():
                continue
            if np.any(resid % piv):
                return None
            q = resid // piv
            Y[t] = q
            qmax = int(np.abs(q).max())
            for r, w in self.cols[slot].items():
                tt = piv_index.get(r)
                if tt is not None and tt > t:
                    bound = max(bound, int(np.abs(B[tt]).max(initial=0)) + qmax * abs(w))
                    if bound >= _INT64_SAFE:
                        raise OverflowError("integer growth beyond int64 in solve")
                    B[tt] -= q * w
        return Y

    def _rhs_pivot_block(self, rhs, j0, j1):
        piv_rows = np.full(self.nrows, -1, dtype=np.int64)
        for t, (pr, _, _) in enumerate(self.pivots):
            piv_rows[pr] = t
        lo, hi = int(rhs.indptr[j0]), int(rhs.indptr[j1])
        B = np.zeros((len(self.pivots), j1 - j0), dtype=np.int64)
        cols_rep = np.repeat(np.arange(j1 - j0), np.diff(rhs.indptr[j0:j1 + 1]))
        rows = rhs.rowidx[lo:hi]
        vals = rhs.data[lo:hi].astype(np.int64)
        t_of = piv_rows[rows]
        on_piv = t_of >= 0
        B[t_of[on_piv], cols_rep[on_piv]] = vals[on_piv]
        return B

    def solve_many_integral(self, rhs: IntMatrix, chunk=4096) -> IntMatrix:
        """Solve M X = rhs columnwise requiring integer solutions; raises
        ContractViolationError if any column escapes the integer span."""
        parts_r, parts_c, parts_v = [], [], []
        for j0 in range(0, rhs.cols, chunk):
            j1 = min(j0 + chunk, rhs.cols)
            B = self._rhs_pivot_block(rhs, j0, j1)
            Y = self._forward_solve_block(B)
            if Y is None:
                raise ContractViolationError("right-hand side not in the integer column span")
            for t, (_, slot, _) in enumerate(self.pivots):
                row_q = Y[t]
                nz = np.flatnonzero(row_q)
                if nz.size == 0:
                    continue
                qs = [int(q) for q in row_q[nz]]
                for r, w in self.ucols[slot].items():
                    parts_r.extend([r] * nz.size)
                    parts_c.extend((nz + j0).tolist())
                    parts_v.extend(w * q for q in qs)
        X = IntMatrix.from_triplets(self.ncols, rhs.cols, parts_r, parts_c,
                                    np.array(parts_v, dtype=object))
        # reconstruction check catches columns with support off the pivot rows
        if not ((self.m @ X) == rhs):
            raise ContractViolationError("solve verification failed: rhs escapes the span")
        return X

    def reduced_pivot_matrix(self) -> IntMatrix:
        """The locked (reduced) pivot columns as a matrix; these are what the
        forward-solve coefficients refer to."""
        return IntMatrix.from_columns(self.nrows,
                                      [self.cols[slot] for _, slot, _ in self.pivots])

    def non_represented_columns(self, rhs: IntMatrix, chunk=4096):
        """Indices of rhs columns that are not integer combinations of M's
        columns (cheap screen used by the column filter)."""
        bad = []
        reduced = self.reduced_pivot_matrix()
        for j0 in range(0, rhs.cols, chunk):
            j1 = min(j0 + chunk, rhs.cols)
            B = self._rhs_pivot_block(rhs, j0, j1)
            Y = self._forward_solve_block(B)
            if Y is None:
                # locate precisely, column by column
                for j in range(j0, j1):
                    if self.solve(rhs.column_dict(j), integral_only=True) is None:
                        bad.append(j)
                continue
            # reconstruction in terms of the reduced pivot columns
            recon = _dense_from_sparse_product(reduced, Y)
            target = rhs.dense_block(j0, j1).T
            mism = np.flatnonzero((recon != target).any(axis=0))
            bad.extend((mism + j0).tolist())
        return bad


def _dense_from_sparse_product(m: IntMatrix, Y):
    """m @ Y for dense int64 Y with one coefficient row per column of m."""
    out = np.zeros((m.rows, Y.shape[1]), dtype=np.int64)
    for t in range(m.cols):
        ri, dv = m.col(t)
        row_q = Y[t]
        if not row_q.any():
            continue
        out[ri] += dv.astype(np.int64)[:, None] * row_q[None, :]
    return out


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0, a


def integer_kernel_basis(m: IntMatrix) -> IntMatrix:
    """Columns generate ker(m) over Z.  The kernel of an integer matrix is a
    saturated subgroup, so the same columns form a basis over Q as well."""
    return ColumnEchelon(m).kernel_basis()


def solve_in_image(m: IntMatrix, b):
    """Some x with m @ x = b over the rationals (integral when possible), or
    None when b is not in the column space."""
    if isinstance(b, dict):
        if any(not 0 <= i < m.rows for i in b):
            raise ValueError("right-hand side index out of range")
    elif len(b) != m.rows:
        raise ValueError("right-hand side has wrong length")
    return ColumnEchelon(m).solve(b)


def homology_of_pair(d_n: IntMatrix, d_np1: IntMatrix, coeff="z", p=modp.DEFAULT_PRIME):
    """Homology ker(d_n)/im(d_np1) at one link of a chain complex.

    `coeff` is "z" (exact, with torsion), "q", or "mod_p".  The composition
    d_n @ d_np1 = 0 is verified first."""
    if d_n.cols != d_np1.rows:
        raise ValueError("chain space dimensions do not match")
    if not (d_n @ d_np1).is_zero():
        raise ContractViolationError("boundary composed with boundary is nonzero")
    if coeff == "z":
        s_next = snf(d_np1)
        nullity = d_n.cols - snf(d_n).rank
        betti = nullity - s_next.rank
        return HomologyGroup(betti, tuple(s_next.torsion))
    if coeff == "q":
        nullity = d_n.cols - rank(d_n, "rational")
        return HomologyGroup(nullity - rank(d_np1, "rational"))
    if coeff == "mod_p":
        nullity = d_n.cols - rank(d_n, "mod_p", p=p)
        return HomologyGroup(nullity - rank(d_np1, "mod_p", p=p))
    raise ValueError(f"unknown coefficient ring {coeff!r}")


def left_inverse(m: IntMatrix) -> IntMatrix:
    """Integer L with L @ m = I; exists iff m has full column rank and its
    columns span a saturated sublattice."""
    ech = ColumnEchelon(m.transpose())
    X = ech.solve_many_integral(IntMatrix.identity(m.cols))
    return X.transpose()
