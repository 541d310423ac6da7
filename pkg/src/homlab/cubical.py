"""Singular cubes, the cubical boundary, and the cubical chain complex.

A singular n-cube is a graph homomorphism from the discrete n-cube into G,
stored as its 2^n vertex labels with the cube's vertices indexed in
colexicographic order (coordinate 1 is the least significant bit of the
index).  Degenerate cubes -- equal opposite faces along some axis -- span
the submodule that is quotiented away, so bases hold non-degenerate cubes
only and chains drop degenerate terms on the fly.

Enumeration never walks one homomorphism at a time: a frontier of partial
label assignments is extended one cube vertex per step with vectorized
candidate masks, which is what makes the 2*10^7-generator slices reachable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .chains import Chain
from .errors import ResourceLimitError
from .linalg import IntMatrix

DEFAULT_CAP = 50_000_000


@dataclass(frozen=True)
class SingularCube:
    """Labels of a graph homomorphism Q_dim -> G in colex vertex order."""
    dim: int
    labels: tuple

    def __post_init__(self):
        if len(self.labels) != 1 << self.dim:
            raise ValueError("label count must be 2^dim")

    def __repr__(self):
        return f"Cube{self.labels}"


def face(s: SingularCube, i, sign):
    """Face along axis i (1-based): restrict coordinate i to 0 ("minus") or
    1 ("plus").  May be degenerate; it is returned unfiltered."""
    if not 1 <= i <= s.dim:
        raise ValueError(f"axis {i} out of range for dimension {s.dim}")
    bit = 1 << (i - 1)
    want = bit if sign == "plus" else 0
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'minus' or 'plus'")
    labels = tuple(s.labels[q] for q in range(1 << s.dim) if (q & bit) == want)
    return SingularCube(s.dim - 1, labels)


def is_degenerate(s: SingularCube):
    """True iff the two faces along some axis coincide (0-cubes never are)."""
    for i in range(1, s.dim + 1):
        if face(s, i, "minus") == face(s, i, "plus"):
            return True
    return False


def boundary_cube(s: SingularCube) -> Chain:
    """Alternating face sum; degenerate faces are dropped (their cosets
    vanish in the quotient chain group)."""
    if s.dim < 1:
        raise ValueError("boundary needs dimension >= 1")
    out = Chain(s.dim - 1)
    for i in range(1, s.dim + 1):
        sign = (-1) ** i
        for eps, coeff in (("minus", sign), ("plus", -sign)):
            f = face(s, i, eps)
            if not is_degenerate(f):
                out.add_term(f.labels, coeff)
    return out


# -- vectorized homomorphism enumeration -----------------------------------


def _label_dtype(n_vertices):
    return np.uint8 if n_vertices <= 255 else np.int16


def _lower_neighbors(n):
    """For each Q_n vertex index, the already-assigned neighbors (one set bit
    cleared); index 0 has none."""
    return [[q ^ (1 << b) for b in range(n) if (q >> b) & 1] for q in range(1 << n)]


def _expand(chunk, lowers, cmasks):
    """Extend partial assignments by one cube vertex.  Candidates are the
    intersection of the closed neighborhoods of the already-assigned lower
    neighbors, read off bitmasks; bits are expanded in ascending vertex
    order so the global lexicographic order is preserved."""
    masks = cmasks[chunk[:, lowers[0]]]
    for lnb in lowers[1:]:
        masks &= cmasks[chunk[:, lnb]]
    nv = len(cmasks)
    bits = (masks[:, None] >> np.arange(nv, dtype=np.int64)) & 1
    rows, vals = np.nonzero(bits)
    out = np.empty((len(rows), chunk.shape[1] + 1), dtype=chunk.dtype)
    out[:, :-1] = chunk[rows]
    out[:, -1] = vals
    return out


def _degenerate_mask(chunk, n):
    mask = np.zeros(len(chunk), dtype=bool)
    for b in range(n):
        pos0 = [q for q in range(1 << n) if not (q >> b) & 1]
        pos1 = [q | (1 << b) for q in pos0]
        mask |= (chunk[:, pos0] == chunk[:, pos1]).all(axis=1)
    return mask


def iter_hom_chunks(g, n, chunk_rows=1 << 20):
    """Yield all homomorphisms Q_n -> g (degenerate included) as arrays of
    label rows, in global lexicographic order."""
    if n == 0:
        yield np.arange(g.n_vertices, dtype=_label_dtype(g.n_vertices)).reshape(-1, 1)
        return
    lowers = _lower_neighbors(n)
    cmasks = np.array(g.neighbor_masks(closed=True), dtype=np.int64)
    total = 1 << n
    init = np.arange(g.n_vertices, dtype=_label_dtype(g.n_vertices)).reshape(-1, 1)
    stack = [init]
    while stack:
        chunk = stack.pop()
        while chunk.shape[1] < total and len(chunk):
            if len(chunk) > chunk_rows:
                # split, pushing later slices first so order is preserved
                top = ((len(chunk) - 1) // chunk_rows) * chunk_rows
                for k0 in range(top, 0, -chunk_rows):
                    stack.append(chunk[k0:k0 + chunk_rows])
                chunk = chunk[:chunk_rows]
            chunk = _expand(chunk, lowers[chunk.shape[1]], cmasks)
        if len(chunk):
            yield chunk


def iter_cube_chunks(g, n, chunk_rows=1 << 20, cap=DEFAULT_CAP):
    """Yield the non-degenerate singular n-cubes in lexicographic order as
    label arrays; raises ResourceLimitError when the count passes `cap`."""
    seen = 0
    for chunk in iter_hom_chunks(g, n, chunk_rows):
        if n:
            chunk = chunk[~_degenerate_mask(chunk, n)]
        if len(chunk) == 0:
            continue
        seen += len(chunk)
        if cap is not None and seen > cap:
            raise ResourceLimitError(
                f"dimension-{n} cube basis exceeds cap ({cap})",
                limit=cap, requested=seen)
        yield chunk


def _enumerate_labels(g, n, cap=DEFAULT_CAP, jobs=None):
    jobs = resolve_jobs(jobs)
    if jobs > 1 and n >= 2 and g.n_vertices >= 2:
        chunks = _enumerate_parallel(g, n, cap, jobs)
    else:
        chunks = list(iter_cube_chunks(g, n, cap=cap))
    if not chunks:
        return np.zeros((0, 1 << n), dtype=_label_dtype(g.n_vertices))
    return np.vstack(chunks)


def _parallel_worker(args):
    graph, n, prefix_chunk, cap = args
    lowers = _lower_neighbors(n)
    cmasks = np.array(graph.neighbor_masks(closed=True), dtype=np.int64)
    total = 1 << n
    out = []
    stack = [prefix_chunk]
    step = 1 << 20
    while stack:
        chunk = stack.pop()
        while chunk.shape[1] < total and len(chunk):
            if len(chunk) > step:
                top = ((len(chunk) - 1) // step) * step
                for k0 in range(top, 0, -step):
                    stack.append(chunk[k0:k0 + step])
                chunk = chunk[:step]
            chunk = _expand(chunk, lowers[chunk.shape[1]], cmasks)
        if len(chunk):
            keep = chunk[~_degenerate_mask(chunk, n)]
            if len(keep):
                out.append(keep)
    if not out:
        return np.zeros((0, total), dtype=prefix_chunk.dtype)
    return np.vstack(out)


def _enumerate_parallel(g, n, cap, jobs):
    import multiprocessing as mp

    # grow a prefix frontier, then farm out contiguous slices
    lowers = _lower_neighbors(n)
    cmasks = np.array(g.neighbor_masks(closed=True), dtype=np.int64)
    frontier = np.arange(g.n_vertices, dtype=_label_dtype(g.n_vertices)).reshape(-1, 1)
    while frontier.shape[1] < min(4, 1 << n) and len(frontier) < 8 * jobs:
        frontier = _expand(frontier, lowers[frontier.shape[1]], cmasks)
    pieces = max(1, min(8 * jobs, len(frontier)))
    bounds = np.linspace(0, len(frontier), pieces + 1).astype(int)
    tasks = [(g, n, frontier[a:b], cap) for a, b in zip(bounds, bounds[1:]) if b > a]
    ctx = mp.get_context("fork") if hasattr(os, "fork") else mp.get_context()
    with ctx.Pool(jobs) as pool:
        results = pool.map(_parallel_worker, tasks)
    total = 0
    for arr in results:
        total += len(arr)
        if cap is not None and total > cap:
            raise ResourceLimitError(f"dimension-{n} cube basis exceeds cap ({cap})",
                                     limit=cap, requested=total)
    return results


def resolve_jobs(jobs):
    if jobs is None:
        jobs = os.environ.get("HOMLAB_JOBS", "1")
    try:
        jobs = int(jobs)
    except (TypeError, ValueError):
        jobs = 1
    return max(1, jobs)


# -- bases, slices, complexes ----------------------------------------------


class CubeBasis:
    """Ordered basis of non-degenerate n-cubes, stored as a label array."""

    __slots__ = ("dim", "labels", "_keys", "_shift")

    def __init__(self, dim, labels):
        self.dim = dim
        self.labels = labels
        self._keys = None
        self._shift = None

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i):
        return SingularCube(self.dim, tuple(int(v) for v in self.labels[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def packed_keys(self):
        """Rows packed into uint64 keys (sorted ascending because rows are
        lexicographically sorted); None when labels do not fit 63 bits."""
        if self._keys is None:
            width = self.labels.shape[1]
            maxlab = int(self.labels.max(initial=0))
            shift = max(1, int(maxlab).bit_length())
            if shift * width > 63:
                return None
            self._shift = shift
            self._keys = pack_rows(self.labels, shift)
        return self._keys

    def index_of(self, labels):
        """Index of a label tuple in the basis, or -1 (degenerate or absent)."""
        keys = self.packed_keys()
        row = np.asarray(labels, dtype=np.int64).reshape(1, -1)
        if keys is not None:
            key = pack_rows(row, self._shift)[0]
            pos = int(np.searchsorted(keys, key))
            if pos < len(keys) and keys[pos] == key:
                return pos
            return -1
        matches = np.flatnonzero((self.labels == row.astype(self.labels.dtype)).all(axis=1))
        return int(matches[0]) if len(matches) else -1


def pack_rows(arr, shift):
    # big-endian packing: numeric key order equals lexicographic row order
    keys = np.zeros(len(arr), dtype=np.uint64)
    width = arr.shape[1]
    for k in range(width):
        keys |= arr[:, k].astype(np.uint64) << np.uint64(shift * (width - 1 - k))
    return keys


@dataclass
class ComplexSlice:
    """One dimension of a chain complex: ordered generator basis plus the
    boundary matrix down to the previous dimension."""
    dim: int
    basis: object
    boundary: IntMatrix

    @property
    def rank(self):
        return len(self.basis)

    def dump_basis(self, fh):
        for i in range(len(self.basis)):
            fh.write(" ".join(str(int(v)) for v in self.basis.labels[i]) + "\n")


def enumerate_cubes(g, n, cap=DEFAULT_CAP, jobs=None) -> CubeBasis:
    """All non-degenerate singular n-cubes of g, sorted lexicographically by
    label sequence."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    return CubeBasis(n, _enumerate_labels(g, n, cap=cap, jobs=jobs))


def _face_positions(n, axis_bit, plus):
    pos = [q for q in range(1 << n) if not (q >> axis_bit) & 1]
    if plus:
        pos = [q | (1 << axis_bit) for q in pos]
    return pos


def boundary_columns(chunk, n, lower_basis: CubeBasis):
    """Sparse boundary columns for a chunk of n-cube label rows, resolved
    against the (n-1)-basis.  Returns (entry_col, entry_row, entry_val)
    arrays with entry_col local to the chunk, deduplicated and sorted."""
    if len(lower_basis) == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    keys = lower_basis.packed_keys()
    cc, rr, vv = [], [], []
    for i in range(1, n + 1):
        sign = (-1) ** i
        for plus, coeff in ((False, sign), (True, -sign)):
            pos = _face_positions(n, i - 1, plus)
            faces = chunk[:, pos]
            if keys is not None:
                fkeys = pack_rows(faces, lower_basis._shift)
                idx = np.searchsorted(keys, fkeys)
                valid = idx < len(keys)
                idx[~valid] = 0
                valid &= keys[idx] == fkeys
            else:
                idx = np.array([lower_basis.index_of(row) for row in faces], dtype=np.int64)
                valid = idx >= 0
            cols = np.flatnonzero(valid)
            cc.append(cols)
            rr.append(idx[valid].astype(np.int64))
            vv.append(np.full(len(cols), coeff, dtype=np.int64))
    cc = np.concatenate(cc)
    rr = np.concatenate(rr)
    vv = np.concatenate(vv)
    order = np.lexsort((rr, cc))
    cc, rr, vv = cc[order], rr[order], vv[order]
    if len(cc):
        first = np.ones(len(cc), dtype=bool)
        first[1:] = (cc[1:] != cc[:-1]) | (rr[1:] != rr[:-1])
        starts = np.flatnonzero(first)
        sums = np.add.reduceat(vv, starts)
        keep = sums != 0
        cc, rr, vv = cc[starts][keep], rr[starts][keep], sums[keep]
    return cc, rr, vv


def boundary_matrix(basis_n: CubeBasis, basis_prev: CubeBasis) -> IntMatrix:
    """Boundary matrix from the n-basis down to the (n-1)-basis."""
    n = basis_n.dim
    rows_all, cols_all, vals_all = [], [], []
    step = 1 << 18
    for j0 in range(0, len(basis_n), step):
        chunk = basis_n.labels[j0:j0 + step]
        cc, rr, vv = boundary_columns(chunk, n, basis_prev)
        rows_all.append(rr)
        cols_all.append(cc + j0)
        vals_all.append(vv)
    if not rows_all:
        return IntMatrix.zeros(len(basis_prev), len(basis_n))
    rr = np.concatenate(rows_all)
    cc = np.concatenate(cols_all)
    vv = np.concatenate(vals_all)
    indptr = np.zeros(len(basis_n) + 1, dtype=np.int64)
    np.add.at(indptr, cc + 1, 1)
    np.cumsum(indptr, out=indptr)
    return IntMatrix.from_csc_arrays(len(basis_prev), len(basis_n), indptr, rr, vv)


def cubical_complex(g, max_dim, cap=DEFAULT_CAP, jobs=None, verify=True):
    """Slices 0..max_dim of the cubical chain complex, with boundary
    matrices in the enumerated bases; checks boundary-of-boundary = 0."""
    from .errors import ContractViolationError

    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    slices = []
    prev = None
    for n in range(max_dim + 1):
        basis = enumerate_cubes(g, n, cap=cap, jobs=jobs)
        if n == 0:
            bnd = IntMatrix.zeros(0, len(basis))
        else:
            bnd = boundary_matrix(basis, prev.basis)
        slices.append(ComplexSlice(n, basis, bnd))
        if verify and n >= 2 and not (prev.boundary @ bnd).is_zero():
            raise ContractViolationError(f"cubical boundary squared nonzero at dim {n}")
        prev = slices[-1]
    return slices


def cubical_homology(g, n, coeff="z", p=None, cap=DEFAULT_CAP, jobs=None):
    """Homology of the cubical complex in dimension n."""
    from . import modp
    from .linalg import homology_of_pair

    slices = cubical_complex(g, n + 1, cap=cap, jobs=jobs)
    kwargs = {"coeff": coeff}
    if p is not None:
        kwargs["p"] = p
    elif coeff == "mod_p":
        kwargs["p"] = modp.DEFAULT_PRIME
    return homology_of_pair(slices[n].boundary, slices[n + 1].boundary, **kwargs)
