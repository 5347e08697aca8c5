"""Exact linear algebra over Z and Q: sparse integer matrices, Smith normal
form, chain complexes, homology with torsion, mapping cones and long exact
sequence checks.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

__all__ = [
    "SparseIntMatrix", "SNFResult", "snf", "ChainComplex", "ChainMap", "HomologyGroup",
    "homology", "cone", "les_verify", "LESReport", "QHomology", "IntegralHomology",
    "EchelonBasis", "nullspace_q", "rank_q", "integer_kernel", "read_matrix_market",
    "write_matrix_market", "ChainComplexError", "LatticeSolver", "solve_q", "induced_map_q", "qmat_mul",
    "qrank", "hstack", "vstack", "block",
]


class ChainComplexError(ValueError):
    pass


class SparseIntMatrix:
    """Integer matrix stored as ``{(row, col): value}`` with no stored zeros."""

    __slots__ = ("nrows", "ncols", "entries")

    def __init__(self, nrows: int, ncols: int, entries: Optional[Dict[Tuple[int, int], int]] = None):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        clean = {}
        if entries:
            for (i, j), v in entries.items():
                if v:
                    if not (0 <= i < self.nrows and 0 <= j < self.ncols):
                        raise IndexError(f"entry ({i},{j}) outside {self.nrows}x{self.ncols}")
                    clean[(i, j)] = v
        self.entries = clean

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n):
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: Optional[int] = None):
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        ent = {}
        for i, r in enumerate(rows):
            if len(r) != ncols:
                raise ValueError("ragged rows")
            for j, v in enumerate(r):
                if v:
                    ent[(i, j)] = v
        return cls(nrows, ncols, ent)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Dict[int, int]]):
        ent = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    ent[(i, j)] = v
        return cls(nrows, len(columns), ent)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        return self.entries.get(ij, 0)

    def to_dense(self) -> List[List[int]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def rows(self) -> List[Dict[int, int]]:
        r: List[Dict[int, int]] = [dict() for _ in range(self.nrows)]
        for (i, j), v in self.entries.items():
            r[i][j] = v
        return r

    def columns(self) -> List[Dict[int, int]]:
        c: List[Dict[int, int]] = [dict() for _ in range(self.ncols)]
        for (i, j), v in self.entries.items():
            c[j][i] = v
        return c

    def __eq__(self, other):
        if not isinstance(other, SparseIntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self):
        return f"SparseIntMatrix({self.nrows}x{self.ncols}, nnz={len(self.entries)})"

    def is_zero(self) -> bool:
        return not self.entries

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.entries.items()})

    T = property(transpose)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        e = dict(self.entries)
        for k, v in other.entries.items():
            e[k] = e.get(k, 0) + v
        return SparseIntMatrix(self.nrows, self.ncols, e)

    def __neg__(self):
        return SparseIntMatrix(self.nrows, self.ncols, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SparseIntMatrix":
        return SparseIntMatrix(self.nrows, self.ncols, {k: c * v for k, v in self.entries.items()})

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        orows = other.rows()
        e: Dict[Tuple[int, int], int] = {}
        for (i, k), v in self.entries.items():
            for j, w in orows[k].items():
                e[(i, j)] = e.get((i, j), 0) + v * w
        return SparseIntMatrix(self.nrows, other.ncols, e)

    def apply(self, vec: Dict[int, object]) -> Dict[int, object]:
        """Multiply a sparse column vector ``{index: value}``."""
        cols = self.columns()
        out: Dict[int, object] = {}
        for j, x in vec.items():
            if not x:
                continue
            for i, v in cols[j].items():
                out[i] = out.get(i, 0) + v * x
        return {i: v for i, v in out.items() if v}

    def apply_dense(self, vec: Sequence) -> List:
        out = [0] * self.nrows
        for (i, j), v in self.entries.items():
            if vec[j]:
                out[i] += v * vec[j]
        return out

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SparseIntMatrix":
        rmap = {r: a for a, r in enumerate(rows)}
        cmap = {c: b for b, c in enumerate(cols)}
        return SparseIntMatrix(len(rows), len(cols), {
            (rmap[i], cmap[j]): v for (i, j), v in self.entries.items() if i in rmap and j in cmap})

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "SparseIntMatrix":
        """Row ``i`` of the result is row ``row_perm[i]`` of self (same for columns)."""
        rinv = {r: a for a, r in enumerate(row_perm)}
        cinv = {c: b for b, c in enumerate(col_perm)}
        return SparseIntMatrix(self.nrows, self.ncols, {(rinv[i], cinv[j]): v for (i, j), v in self.entries.items()})


def hstack(mats: Sequence[SparseIntMatrix], nrows: Optional[int] = None) -> SparseIntMatrix:
    if nrows is None:
        nrows = mats[0].nrows if mats else 0
    e, off = {}, 0
    for m in mats:
        if m.nrows != nrows:
            raise ValueError("hstack row mismatch")
        for (i, j), v in m.entries.items():
            e[(i, j + off)] = v
        off += m.ncols
    return SparseIntMatrix(nrows, off, e)


def vstack(mats: Sequence[SparseIntMatrix], ncols: Optional[int] = None) -> SparseIntMatrix:
    if ncols is None:
        ncols = mats[0].ncols if mats else 0
    e, off = {}, 0
    for m in mats:
        if m.ncols != ncols:
            raise ValueError("vstack column mismatch")
        for (i, j), v in m.entries.items():
            e[(i + off, j)] = v
        off += m.nrows
    return SparseIntMatrix(off, ncols, e)


def block(blocks: Sequence[Sequence[Optional[SparseIntMatrix]]], row_sizes: Sequence[int],
          col_sizes: Sequence[int]) -> SparseIntMatrix:
    """Assemble a block matrix; ``None`` blocks are zero."""
    roff = [0]
    for r in row_sizes:
        roff.append(roff[-1] + r)
    coff = [0]
    for c in col_sizes:
        coff.append(coff[-1] + c)
    e = {}
    for bi, brow in enumerate(blocks):
        for bj, m in enumerate(brow):
            if m is None:
                continue
            if m.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block ({bi},{bj}) has shape {m.shape}, expected {(row_sizes[bi], col_sizes[bj])}")
            for (i, j), v in m.entries.items():
                e[(i + roff[bi], j + coff[bj])] = v
    return SparseIntMatrix(roff[-1], coff[-1], e)


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SNFResult:
    """``U @ M @ V == D`` where D carries ``diagonal`` on its leading diagonal."""

    diagonal: List[int]
    U: Optional[SparseIntMatrix] = None
    V: Optional[SparseIntMatrix] = None
    shape: Tuple[int, int] = (0, 0)

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def diagonal_matrix(self) -> SparseIntMatrix:
        return SparseIntMatrix(self.shape[0], self.shape[1], {(i, i): d for i, d in enumerate(self.diagonal)})


class _Work:
    """Row/column-indexed sparse storage for elimination with optional transforms."""

    def __init__(self, M: SparseIntMatrix, track: bool):
        self.rows = M.rows()
        self.cols: List[set] = [set() for _ in range(M.ncols)]
        for (i, j) in M.entries:
            self.cols[j].add(i)
        self.track = track
        if track:
            # U stored by rows (row ops), V stored by columns (col ops)
            self.U = [{i: 1} for i in range(M.nrows)]
            self.V = [{j: 1} for j in range(M.ncols)]

    def row_axpy(self, dst: int, src: int, q: int):
        """row[dst] += q * row[src]"""
        if not q:
            return
        rd, rs = self.rows[dst], self.rows[src]
        for j, v in rs.items():
            nv = rd.get(j, 0) + q * v
            if nv:
                if j not in rd:
                    self.cols[j].add(dst)
                rd[j] = nv
            else:
                del rd[j]
                self.cols[j].discard(dst)
        if self.track:
            _axpy(self.U[dst], self.U[src], q)

    def col_axpy(self, dst: int, src: int, q: int):
        """col[dst] += q * col[src]"""
        if not q:
            return
        for i in list(self.cols[src]):
            r = self.rows[i]
            nv = r.get(dst, 0) + q * r[src]
            if nv:
                if dst not in r:
                    self.cols[dst].add(i)
                r[dst] = nv
            else:
                del r[dst]
                self.cols[dst].discard(i)
        if self.track:
            _axpy(self.V[dst], self.V[src], q)

    def row_negate(self, i: int):
        r = self.rows[i]
        for j in r:
            r[j] = -r[j]
        if self.track:
            u = self.U[i]
            for k in u:
                u[k] = -u[k]


def _axpy(dst: Dict[int, int], src: Dict[int, int], q: int):
    for k, v in src.items():
        nv = dst.get(k, 0) + q * v
        if nv:
            dst[k] = nv
        else:
            dst.pop(k, None)


def _nearest_quotient(a: int, p: int) -> int:
    # q with |a - q p| <= |p|/2
    q, r = divmod(a, p)
    if 2 * abs(r) > abs(p):
        q += 1
    return q


def snf(M: SparseIntMatrix, transforms: bool = False) -> SNFResult:
    """Smith normal form with minimal-absolute-value / minimal-weight pivoting.

    Returns the nonzero invariant factors ``d_1 | d_2 | ...``; with
    ``transforms=True`` also unimodular U, V with ``U @ M @ V`` diagonal.
    """
    W = _Work(M, transforms)
    m, n = M.nrows, M.ncols
    active_rows = set(i for i in range(m) if W.rows[i])
    pivots: List[Tuple[int, int]] = []
    while True:
        best = None
        for i in active_rows:
            row = W.rows[i]
            if not row:
                continue
            rw = len(row)
            for j, v in row.items():
                key = (abs(v), (rw - 1) * (len(W.cols[j]) - 1))
                if best is None or key < best[0]:
                    best = (key, i, j)
                    if key == (1, 0):
                        break
            if best is not None and best[0] == (1, 0):
                break
        if best is None:
            break
        _, r, c = best
        p = W.rows[r][c]
        remainder = False
        for i in list(W.cols[c]):
            if i == r:
                continue
            q = _nearest_quotient(W.rows[i][c], p)
            W.row_axpy(i, r, -q)
            if c in W.rows[i]:
                remainder = True
        for j in list(W.rows[r].keys()):
            if j == c:
                continue
            q = _nearest_quotient(W.rows[r][j], p)
            W.col_axpy(j, c, -q)
            if j in W.rows[r]:
                remainder = True
        if not remainder and len(W.rows[r]) == 1 and len(W.cols[c]) == 1:
            if p < 0:
                W.row_negate(r)
            pivots.append((r, c))
            active_rows.discard(r)
    diag = [W.rows[r][c] for r, c in pivots]
    # order pivots, then enforce divisibility with 2x2 moves on (row, col) pairs
    order = sorted(range(len(pivots)), key=lambda k: diag[k])
    pivots = [pivots[k] for k in order]
    diag = [diag[k] for k in order]
    changed = True
    while changed:
        changed = False
        for a in range(len(diag)):
            for b in range(a + 1, len(diag)):
                x, y = diag[a], diag[b]
                if y % x == 0:
                    continue
                g = math.gcd(x, y)
                ra, ca = pivots[a]
                rb, cb = pivots[b]
                if transforms:
                    s, t, _ = _xgcd(x, y)
                    # row_a += row_b; then column mix; then clear row_b
                    W.row_axpy(ra, rb, 1)
                    _col_mix(W, ca, cb, s, t, -y // g, x // g)
                    W.row_axpy(rb, ra, -(t * y // g))
                diag[a], diag[b] = g, x // g * y
                changed = True
        if changed:
            order = sorted(range(len(diag)), key=lambda k: diag[k])
            pivots = [pivots[k] for k in order]
            diag = [diag[k] for k in order]
    res = SNFResult(diag, shape=(m, n))
    if transforms:
        prow = [r for r, _ in pivots]
        pcol = [c for _, c in pivots]
        prow += [i for i in range(m) if i not in set(prow)]
        pcol += [j for j in range(n) if j not in set(pcol)]
        U = SparseIntMatrix(m, m, {(a, k): v for a, r in enumerate(prow) for k, v in W.U[r].items()})
        V = SparseIntMatrix(n, n, {(k, b): v for b, c in enumerate(pcol) for k, v in W.V[c].items()})
        res.U, res.V = U, V
    return res


def _col_mix(W: _Work, ca: int, cb: int, s: int, t: int, u: int, v: int):
    """(col_a, col_b) <- (s col_a + t col_b, u col_a + v col_b); det = 1."""
    rows_touched = W.cols[ca] | W.cols[cb]
    for i in rows_touched:
        r = W.rows[i]
        a, b = r.get(ca, 0), r.get(cb, 0)
        na, nb = s * a + t * b, u * a + v * b
        for col, val in ((ca, na), (cb, nb)):
            if val:
                r[col] = val
                W.cols[col].add(i)
            else:
                r.pop(col, None)
                W.cols[col].discard(i)
    Va, Vb = W.V[ca], W.V[cb]
    keys = set(Va) | set(Vb)
    na_, nb_ = {}, {}
    for k in keys:
        a, b = Va.get(k, 0), Vb.get(k, 0)
        x, y = s * a + t * b, u * a + v * b
        if x:
            na_[k] = x
        if y:
            nb_[k] = y
    W.V[ca], W.V[cb] = na_, nb_


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x, nx, y, ny, g, ng = 1, 0, 0, 1, a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def integer_kernel(M: SparseIntMatrix) -> SparseIntMatrix:
    """Columns form a Z-basis of the (saturated) kernel lattice of M."""
    res = snf(M, transforms=True)
    V = res.V
    r = res.rank
    return V.submatrix(range(M.ncols), range(r, M.ncols))


# ---------------------------------------------------------------------------
# linear algebra over Q


class EchelonBasis:
    """Incrementally maintained echelon basis of a subspace of Q^n.

    Every stored row carries a ``tag`` vector (a linear combination of the
    tags of inserted vectors), which lets callers read off coordinates.
    """

    def __init__(self, tag_dim: int = 0):
        self.rows: Dict[int, Tuple[Dict[int, Fraction], List[Fraction]]] = {}
        self.tag_dim = tag_dim

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec: Dict[int, Fraction], tag: Optional[List[Fraction]] = None):
        v = {k: Fraction(x) for k, x in vec.items() if x}
        t = list(tag) if tag is not None else [Fraction(0)] * self.tag_dim
        # rows are kept fully reduced, so one pass over the pivots suffices
        for piv in [k for k in v if k in self.rows]:
            c = v.get(piv)
            if not c:
                continue
            row, rtag = self.rows[piv]
            for k, x in row.items():
                nv = v.get(k, 0) - c * x
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
            for a in range(self.tag_dim):
                if rtag[a]:
                    t[a] -= c * rtag[a]
        return v, t

    def insert(self, vec: Dict[int, Fraction], tag: Optional[List[Fraction]] = None) -> bool:
        v, t = self.reduce(vec, tag)
        if not v:
            return False
        piv = min(v)
        c = v[piv]
        v = {k: x / c for k, x in v.items()}
        t = [x / c for x in t]
        # keep existing rows reduced at the new pivot
        for k, (row, rtag) in self.rows.items():
            a = row.get(piv)
            if a:
                for kk, x in v.items():
                    nv = row.get(kk, 0) - a * x
                    if nv:
                        row[kk] = nv
                    else:
                        row.pop(kk, None)
                for i in range(self.tag_dim):
                    rtag[i] -= a * t[i]
        self.rows[piv] = (v, t)
        return True


def _matrix_rows_q(M: SparseIntMatrix) -> List[Dict[int, Fraction]]:
    return [{j: Fraction(v) for j, v in r.items()} for r in M.rows()]


def rank_q(M: SparseIntMatrix) -> int:
    E = EchelonBasis()
    for r in M.rows():
        if r:
            E.insert(r)
    return len(E)


def nullspace_q(M: SparseIntMatrix) -> List[Dict[int, Fraction]]:
    """Basis of the right kernel of M over Q (sparse vectors)."""
    E = EchelonBasis()
    for r in M.rows():
        if r:
            E.insert(r)
    pivots = set(E.rows)
    basis = []
    for free in range(M.ncols):
        if free in pivots:
            continue
        v = {free: Fraction(1)}
        for p, (row, _) in E.rows.items():
            c = row.get(free)
            if c:
                v[p] = -c
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class HomologyGroup:
    degree: int
    betti: int
    torsion: List[int] = field(default_factory=list)

    def __post_init__(self):
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")
        if any(t <= 1 for t in self.torsion):
            raise ValueError("torsion coefficients must exceed 1")

    def is_zero(self) -> bool:
        return self.betti == 0 and not self.torsion

    def as_tuple(self):
        return (self.betti, tuple(self.torsion))

    def __str__(self):
        parts = (["Z"] * self.betti if self.betti <= 3 else [f"Z^{self.betti}"]) + [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) or "0"

    def to_json(self):
        return {"degree": self.degree, "betti": self.betti, "torsion": list(self.torsion)}


class ChainComplex:
    """Finite-rank chain complex ``... -> C_n --d_n--> C_{n-1} -> ...``.

    ``diffs[n]`` is the matrix of ``d_n`` with shape ``(rank[n-1], rank[n])``.
    Degrees outside ``ranks`` are zero.  d^2 = 0 is checked on construction.
    """

    def __init__(self, ranks: Dict[int, int], diffs: Optional[Dict[int, SparseIntMatrix]] = None,
                 ring: str = "Z", check: bool = True):
        if ring not in ("Z", "Q"):
            raise ValueError("ring must be 'Z' or 'Q'")
        self.ring = ring
        self.ranks = {int(k): int(v) for k, v in ranks.items() if v}
        self.diffs: Dict[int, SparseIntMatrix] = {}
        for n, d in (diffs or {}).items():
            if d.shape != (self.rank(n - 1), self.rank(n)):
                raise ChainComplexError(f"d_{n} has shape {d.shape}, expected {(self.rank(n - 1), self.rank(n))}")
            if not d.is_zero():
                self.diffs[n] = d
        if check:
            for n in self.diffs:
                if n - 1 in self.diffs:
                    if not (self.diffs[n - 1] @ self.diffs[n]).is_zero():
                        raise ChainComplexError(f"d_{n - 1} d_{n} != 0")

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def d(self, n: int) -> SparseIntMatrix:
        m = self.diffs.get(n)
        if m is None:
            return SparseIntMatrix(self.rank(n - 1), self.rank(n))
        return m

    @property
    def degrees(self) -> range:
        if not self.ranks:
            return range(0)
        return range(min(self.ranks), max(self.ranks) + 1)

    def shift(self, k: int) -> "ChainComplex":
        """``C[k]_n = C_{n-k}`` with differential ``(-1)^k d``."""
        s = -1 if k % 2 else 1
        return ChainComplex({n + k: r for n, r in self.ranks.items()},
                            {n + k: d.scale(s) for n, d in self.diffs.items()}, self.ring, check=False)

    def with_ring(self, ring: str) -> "ChainComplex":
        return ChainComplex(self.ranks, self.diffs, ring, check=False)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * r for n, r in self.ranks.items())

    def __eq__(self, other):
        if not isinstance(other, ChainComplex):
            return NotImplemented
        return self.ranks == other.ranks and self.diffs == other.diffs

    def __repr__(self):
        return f"ChainComplex({self.ring}, ranks={dict(sorted(self.ranks.items()))})"

    def homology(self, n: int, ring: Optional[str] = None) -> HomologyGroup:
        return homology(self, n, ring)

    def homology_all(self, ring: Optional[str] = None) -> Dict[int, HomologyGroup]:
        return {n: homology(self, n, ring) for n in self.degrees}

    def is_acyclic(self, ring: Optional[str] = None) -> bool:
        return all(homology(self, n, ring).is_zero() for n in self.degrees)

    def zero_like(self) -> "ChainComplex":
        return ChainComplex({}, {}, self.ring)

    @classmethod
    def direct_sum(cls, parts: Sequence["ChainComplex"]) -> "ChainComplex":
        degs = set()
        for p in parts:
            degs |= set(p.ranks)
        ranks = {n: sum(p.rank(n) for p in parts) for n in degs}
        diffs = {}
        for n in degs:
            blocks = [[None] * len(parts) for _ in parts]
            for k, p in enumerate(parts):
                blocks[k][k] = p.d(n)
            diffs[n] = block(blocks, [p.rank(n - 1) for p in parts], [p.rank(n) for p in parts])
        ring = parts[0].ring if parts else "Z"
        return cls(ranks, diffs, ring, check=False)


def _rank_int(M: SparseIntMatrix) -> int:
    if M.is_zero():
        return 0
    return snf(M).rank


def homology(C: ChainComplex, n: int, ring: Optional[str] = None) -> HomologyGroup:
    """H_n(C); torsion only over Z."""
    ring = ring or C.ring
    dn, dn1 = C.d(n), C.d(n + 1)
    if ring == "Q":
        rk_n = rank_q(dn) if not dn.is_zero() else 0
        rk_n1 = rank_q(dn1) if not dn1.is_zero() else 0
        return HomologyGroup(n, C.rank(n) - rk_n - rk_n1, [])
    rk_n = _rank_int(dn)
    if dn1.is_zero():
        return HomologyGroup(n, C.rank(n) - rk_n, [])
    s = snf(dn1)
    torsion = [d for d in s.diagonal if d > 1]
    return HomologyGroup(n, C.rank(n) - rk_n - s.rank, torsion)


class ChainMap:
    """Degreewise matrices ``f_n : A_n -> B_n`` commuting with differentials."""

    def __init__(self, source: ChainComplex, target: ChainComplex,
                 mats: Optional[Dict[int, SparseIntMatrix]] = None, degree: int = 0, check: bool = True):
        self.source, self.target, self.degree = source, target, degree
        self.mats: Dict[int, SparseIntMatrix] = {}
        for n, m in (mats or {}).items():
            if m.shape != (target.rank(n + degree), source.rank(n)):
                raise ChainComplexError(
                    f"map in degree {n} has shape {m.shape}, expected {(target.rank(n + degree), source.rank(n))}")
            if not m.is_zero():
                self.mats[n] = m
        if check:
            bad = self.commutation_failure()
            if bad is not None:
                raise ChainComplexError(f"not a chain map: d f != f d in degree {bad}")

    def __getitem__(self, n: int) -> SparseIntMatrix:
        m = self.mats.get(n)
        if m is None:
            return SparseIntMatrix(self.target.rank(n + self.degree), self.source.rank(n))
        return m

    def commutation_failure(self, anti: bool = False) -> Optional[int]:
        sgn = -1 if anti else 1
        degs = set(self.source.ranks) | {n + 1 for n in self.source.ranks}
        for n in sorted(degs):
            lhs = self.target.d(n + self.degree) @ self[n]
            rhs = self[n - 1] @ self.source.d(n)
            if lhs != rhs.scale(sgn):
                return n
        return None

    def compose(self, other: "ChainMap") -> "ChainMap":
        """self o other"""
        mats = {n: self[n + other.degree] @ other[n] for n in other.source.ranks}
        return ChainMap(other.source, self.target, mats, self.degree + other.degree, check=False)

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return NotImplemented
        degs = set(self.mats) | set(other.mats)
        return all(self[n] == other[n] for n in degs)

    @classmethod
    def identity(cls, C: ChainComplex) -> "ChainMap":
        return cls(C, C, {n: SparseIntMatrix.identity(r) for n, r in C.ranks.items()}, check=False)

    @classmethod
    def zero(cls, A: ChainComplex, B: ChainComplex) -> "ChainMap":
        return cls(A, B, {}, check=False)

    def __add__(self, other):
        degs = set(self.mats) | set(other.mats)
        return ChainMap(self.source, self.target, {n: self[n] + other[n] for n in degs}, self.degree, check=False)

    def scale(self, c):
        return ChainMap(self.source, self.target, {n: m.scale(c) for n, m in self.mats.items()}, self.degree,
                        check=False)


def cone(f: ChainMap) -> ChainComplex:
    """Mapping cone: ``cone_n = B_n (+) A_{n-1}``, ``d(b, a) = (d b + f a, -d a)``."""
    if f.degree != 0:
        raise ChainComplexError("cone needs a degree-0 chain map")
    if f.commutation_failure() is not None:
        raise ChainComplexError("cone input is not a chain map")
    A, B = f.source, f.target
    degs = set(B.ranks) | {n + 1 for n in A.ranks}
    ranks = {n: B.rank(n) + A.rank(n - 1) for n in degs}
    diffs = {}
    for n in degs | {n + 1 for n in degs}:
        diffs[n] = block([[B.d(n), f[n - 1]], [None, -A.d(n - 1)]],
                         [B.rank(n - 1), A.rank(n - 2)], [B.rank(n), A.rank(n - 1)])
    return ChainComplex(ranks, diffs, B.ring)


# ---------------------------------------------------------------------------
# homology with coordinates


def _col(M: SparseIntMatrix, j: int) -> Dict[int, int]:
    return {i: v for (i, jj), v in M.entries.items() if jj == j}


class QHomology:
    """H_n(C; Q) with chosen cycle representatives and a coordinate map."""

    def __init__(self, C: ChainComplex, n: int):
        self.complex, self.degree = C, n
        cycles = nullspace_q(C.d(n)) if C.rank(n) else []
        bcols = C.d(n + 1).columns()
        E = EchelonBasis(0)
        for col in bcols:
            if col:
                E.insert(col)
        self.boundary_rank = len(E)
        reps = []
        for z in cycles:
            v, _ = E.reduce(z)
            if v:
                reps.append(z)
                E.insert(z)
        self.reps: List[Dict[int, Fraction]] = reps
        self.dim = len(reps)
        # second basis with tags for coordinates
        T = EchelonBasis(self.dim)
        for col in bcols:
            if col:
                T.insert(col)
        for k, z in enumerate(reps):
            tag = [Fraction(0)] * self.dim
            tag[k] = Fraction(1)
            T.insert(z, tag)
        self._T = T

    def coords(self, z: Dict[int, object]) -> List[Fraction]:
        """Coordinates of the class of cycle ``z`` in the representative basis."""
        v, t = self._T.reduce({k: Fraction(x) for k, x in z.items() if x})
        if v:
            raise ValueError("vector is not a cycle")
        return [-x for x in t]

    def is_boundary(self, z: Dict[int, object]) -> bool:
        return not any(self.coords(z))


def induced_map_q(f_mat: SparseIntMatrix, src: QHomology, tgt: QHomology) -> List[List[Fraction]]:
    """Matrix (rows: target coords) of the map on H(;Q) induced by a chain-level matrix."""
    cols = []
    for z in src.reps:
        cols.append(tgt.coords(f_mat.apply(z)))
    return [[cols[j][i] for j in range(len(cols))] for i in range(tgt.dim)]


def _qrank(rows: List[List[Fraction]]) -> int:
    E = EchelonBasis()
    for r in rows:
        d = {j: x for j, x in enumerate(r) if x}
        if d:
            E.insert(d)
    return len(E)


def qmat_mul(A: List[List[Fraction]], B: List[List[Fraction]], inner: int) -> List[List[Fraction]]:
    return [[sum((A[i][k] * B[k][j] for k in range(inner)), Fraction(0)) for j in range(len(B[0]) if B else 0)]
            for i in range(len(A))]


class IntegralHomology:
    """H_n(C; Z) = Z^betti (+) (+) Z/t_i with a coordinate map on cycles."""

    def __init__(self, C: ChainComplex, n: int):
        self.complex, self.degree = C, n
        dn, dn1 = C.d(n), C.d(n + 1)
        Z = integer_kernel(dn) if C.rank(n) else SparseIntMatrix(0, 0)
        self.Z = Z
        k = Z.ncols
        # express boundaries in Z-coordinates: Z is saturated, so the solve is integral
        self._zsolve = _LatticeSolver(Z)
        rel_cols = []
        for col in dn1.columns():
            rel_cols.append(self._zsolve.solve(col))
        R = SparseIntMatrix.from_columns(k, rel_cols)
        s = snf(R, transforms=True)
        self.U = s.U
        diag = s.diagonal + [0] * (k - s.rank)
        self.invariants = diag
        self.torsion = [d for d in diag if d > 1]
        self.betti = sum(1 for d in diag if d == 0)
        self.group = HomologyGroup(n, self.betti, self.torsion)

    def coords(self, z: Dict[int, int]) -> Dict[str, List[int]]:
        """``{'free': [...], 'torsion': [...]}`` coordinates of the class of z."""
        c = self._zsolve.solve(z)
        y = self.U.apply_dense([c.get(i, 0) for i in range(self.Z.ncols)]) if self.Z.ncols else []
        free, tors = [], []
        for d, v in zip(self.invariants, y):
            if d == 0:
                free.append(v)
            elif d > 1:
                tors.append(v % d)
        return {"free": free, "torsion": tors}


class _LatticeSolver:
    """Solve ``Z c = v`` for a saturated lattice basis Z (columns)."""

    def __init__(self, Z: SparseIntMatrix):
        self.Z = Z
        s = snf(Z, transforms=True)
        if any(d != 1 for d in s.diagonal):
            raise ValueError("lattice basis is not saturated")
        self.s = s

    def solve(self, v: Dict[int, int]) -> Dict[int, int]:
        Z, s = self.Z, self.s
        if Z.ncols == 0:
            if any(v.values()):
                raise ValueError("vector not in the lattice")
            return {}
        # U Z V = [I; 0]  =>  c = V (U v)[:r]
        uv = s.U.apply({i: x for i, x in v.items() if x})
        r = s.rank
        if any(uv.get(i, 0) for i in range(r, Z.nrows)):
            raise ValueError("vector not in the lattice")
        y = {i: x for i, x in uv.items() if i < r}
        return s.V.apply(y)


# ---------------------------------------------------------------------------
# long exact sequences


LatticeSolver = _LatticeSolver
qrank = _qrank


@dataclass
class LESReport:
    exact: bool
    spots: List[dict]
    failure: Optional[str] = None

    def __bool__(self):
        return self.exact


def les_verify(A: ChainComplex, B: ChainComplex, C: ChainComplex, i: ChainMap, p: ChainMap,
               degrees: Optional[Iterable[int]] = None) -> LESReport:
    """Exactness of ``H(A) -> H(B) -> H(C) -> H(A)[-1]`` over Q for a short
    exact sequence ``A >-> B ->> C``.

    The connecting map is computed by lifting through p and pulling back
    through i; short exactness itself is checked on chain level first.
    """
    for f in (i, p):
        if f.commutation_failure() is not None:
            return LESReport(False, [], "input is not a chain map")
    all_deg = sorted(set(A.ranks) | set(B.ranks) | set(C.ranks))
    if degrees is None:
        degrees = range(all_deg[0] - 1, all_deg[-1] + 2) if all_deg else range(0)
    degrees = list(degrees)
    # chain-level short exactness
    for n in all_deg:
        if not (p[n] @ i[n]).is_zero():
            return LESReport(False, [], f"p i != 0 in degree {n}")
        if rank_q(i[n]) != A.rank(n) or rank_q(p[n]) != C.rank(n) or A.rank(n) + C.rank(n) != B.rank(n):
            return LESReport(False, [], f"not short exact in degree {n}")
    HA = {n: QHomology(A, n) for n in degrees}
    HB = {n: QHomology(B, n) for n in degrees}
    HC = {n: QHomology(C, n) for n in degrees}
    istar = {n: induced_map_q(i[n], HA[n], HB[n]) for n in degrees}
    pstar = {n: induced_map_q(p[n], HB[n], HC[n]) for n in degrees}
    delta = {}
    for n in degrees:
        if n - 1 not in HA:
            continue
        cols = []
        for z in HC[n].reps:
            b = _solve_q(p[n], z)
            db = B.d(n).apply(b)
            a = _solve_q(i[n - 1], db)
            cols.append(HA[n - 1].coords(a))
        delta[n] = [[cols[j][r] for j in range(len(cols))] for r in range(HA[n - 1].dim)]
    spots = []
    failure = None

    def check(name, n, f_in, f_out, dim_mid):
        nonlocal failure
        rk_in = _qrank(f_in) if f_in and f_in[0] else 0
        rk_out = _qrank(f_out) if f_out and f_out[0] else 0
        comp_zero = True
        if f_in and f_out and f_in[0] and f_out[0]:
            prod = qmat_mul(f_out, f_in, dim_mid)
            comp_zero = all(x == 0 for r in prod for x in r)
        ok = comp_zero and rk_in == dim_mid - rk_out
        spots.append({"spot": name, "degree": n, "dim": dim_mid, "rank_in": rk_in, "rank_out": rk_out, "exact": ok})
        if not ok and failure is None:
            failure = f"inexact at H_{n}({name})"

    for n in degrees:
        # at H_n(A): in = delta_{n+1}, out = i_*
        if n + 1 in delta:
            check("A", n, delta[n + 1], istar[n], HA[n].dim)
        check("B", n, istar[n], pstar[n], HB[n].dim)
        if n in delta:
            check("C", n, pstar[n], delta[n], HC[n].dim)
    return LESReport(failure is None, spots, failure)


def _solve_q(M: SparseIntMatrix, y: Dict[int, object]) -> Dict[int, Fraction]:
    """Some x with M x = y over Q (raises if inconsistent)."""
    ncols = M.ncols
    E = EchelonBasis(ncols)
    for j, col in enumerate(M.columns()):
        if col:
            tag = [Fraction(0)] * ncols
            tag[j] = Fraction(1)
            E.insert(col, tag)
    v, t = E.reduce({k: Fraction(x) for k, x in y.items() if x})
    if v:
        raise ValueError("inconsistent linear system")
    return {j: -x for j, x in enumerate(t) if x}


def solve_q(M: SparseIntMatrix, y: Dict[int, object]) -> Dict[int, Fraction]:
    return _solve_q(M, y)


# ---------------------------------------------------------------------------
# matrix-market style text IO


def write_matrix_market(M: SparseIntMatrix, fp=None) -> Optional[str]:
    """``%%MatrixMarket matrix coordinate integer general`` with 1-based triplets."""
    buf = io.StringIO() if fp is None else fp
    buf.write("%%MatrixMarket matrix coordinate integer general\n")
    buf.write(f"{M.nrows} {M.ncols} {len(M.entries)}\n")
    for (i, j), v in sorted(M.entries.items()):
        buf.write(f"{i + 1} {j + 1} {v}\n")
    if fp is None:
        return buf.getvalue()
    return None


def read_matrix_market(src) -> SparseIntMatrix:
    text = src.read() if hasattr(src, "read") else str(src)
    lines = [l for l in text.splitlines() if l.strip() and not l.lstrip().startswith("%")]
    if not lines:
        raise ValueError("empty matrix file")
    nr, nc, nnz = (int(x) for x in lines[0].split())
    ent = {}
    for l in lines[1:1 + nnz]:
        i, j, v = l.split()
        ent[(int(i) - 1, int(j) - 1)] = ent.get((int(i) - 1, int(j) - 1), 0) + int(v)
    if len(lines) - 1 != nnz:
        raise ValueError(f"expected {nnz} entries, found {len(lines) - 1}")
    return SparseIntMatrix(nr, nc, ent)
