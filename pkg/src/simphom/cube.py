"""Cubes of chain complexes cut out of augmented simplicial chain functors.

An augmented simplicial functor ``F`` assigns a finite-type chain complex
``F(n)`` to every ``-1 <= n <= N``.  For ``-1 <= j <= n`` the cube ``F^j_n``
lives on subsets ``S`` of ``{0..j}``: its vertex at S is ``F(n - |S|)`` and
the edge ``S -> S + {i}`` is the face ``d_k`` with ``k = i - #{x in S: x < i}``.

Homotopy fibres are total complexes

    Tot_m = (+)_S  X(S)_{m + |S|}
    d x_S = (-1)^{|S|} d x  +  sum_{i not in S} (-1)^{pos(i, S)} e_i x

where ``pos(i, S)`` counts the elements of S below i.  Homotopy cofibres
use ``X(S)_{m - j - 1 + |S|}`` and the internal sign ``(-1)^{j+1-|S|}``.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .chainlab import (ChainComplex, ChainComplexError, ChainMap, EchelonBasis, LatticeSolver, QHomology,
                       SparseIntMatrix, block, cone, homology, induced_map_q, integer_kernel, qmat_mul, qrank)
from .simp import TruncationError, codegeneracy_map, coface_map, dk_act, surjections

__all__ = [
    "AugChainFunctor", "FunctorReport", "Cube", "CubeError", "SquareFailure", "edge_index", "build_cube",
    "restrict_tau", "TotalComplex", "total_complex", "iterated_fiber", "iterated_homotopy_fiber",
    "iterated_homotopy_cofiber", "fiber_inclusion", "FibrationSequence", "fibration_sequence",
    "FiltrationResult", "filtration", "filtration_oracle", "NaturalTransformation", "induced_filtration_map",
    "Prop218Report", "check_prop_2_18", "duality_check", "DoubleComplexData", "dold_kan_functor",
    "dold_kan_transformation", "SplitFunctorData", "random_split_data", "random_split_functor",
    "random_natural_transformation", "constant_functor", "designed_filtration_functor", "cech_functor",
    "random_surjection", "negative_control_functor", "inject_fault", "random_complex",
]

Subset = Tuple[int, ...]


class CubeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# augmented simplicial chain functors


@dataclass
class FunctorReport:
    ok: bool
    identity: Optional[str] = None
    level: Optional[int] = None
    degree: Optional[int] = None
    checked: int = 0

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return f"pass ({self.checked} identities)"
        where = f" at level {self.level}" if self.level is not None else ""
        deg = f", chain degree {self.degree}" if self.degree is not None else ""
        return f"violated {self.identity}{where}{deg}"


def _first_mismatch(f: ChainMap, g: ChainMap) -> Optional[int]:
    for q in sorted(set(f.mats) | set(g.mats)):
        if f[q] != g[q]:
            return q
    return None


class AugChainFunctor:
    """``levels[n]`` for ``-1 <= n <= N``; ``faces[n][i]`` maps level n to
    n-1 (so ``faces[0][0]`` is the augmentation); ``degens[n][j]`` maps
    level n to n+1."""

    def __init__(self, levels: Dict[int, ChainComplex], faces: Dict[int, Sequence[ChainMap]],
                 degens: Dict[int, Sequence[ChainMap]], name: str = "F"):
        self.N = max(levels)
        if sorted(levels) != list(range(-1, self.N + 1)):
            raise ValueError("levels must run over -1..N")
        self.levels = dict(levels)
        self.faces = {n: list(faces[n]) for n in range(self.N + 1)}
        self.degens = {n: list(degens.get(n, [])) for n in range(self.N)}
        self.name = name
        for n in range(self.N + 1):
            if len(self.faces[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} faces")
        for n in range(self.N):
            if len(self.degens[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} degeneracies")

    def F(self, n: int) -> ChainComplex:
        if not -1 <= n <= self.N:
            raise TruncationError(f"level {n} outside -1..{self.N}")
        return self.levels[n]

    def face(self, n: int, i: int) -> ChainMap:
        if not 0 <= n <= self.N:
            raise TruncationError(f"no faces out of level {n}")
        return self.faces[n][i]

    def degen(self, n: int, j: int) -> ChainMap:
        if not 0 <= n < self.N:
            raise TruncationError(f"no degeneracies out of level {n}")
        return self.degens[n][j]

    @property
    def eps(self) -> ChainMap:
        return self.faces[0][0]

    def truncate(self, N: int) -> "AugChainFunctor":
        if N > self.N:
            raise TruncationError("cannot extend a truncation")
        return AugChainFunctor({n: self.levels[n] for n in range(-1, N + 1)},
                               {n: self.faces[n] for n in range(N + 1)},
                               {n: self.degens[n] for n in range(N)}, self.name)

    def check(self) -> FunctorReport:
        """Chain-map property of every structure map, then the simplicial
        identities as equalities of chain maps (first failure reported)."""
        count = 0
        for n in range(self.N + 1):
            for i, f in enumerate(self.faces[n]):
                q = f.commutation_failure()
                count += 1
                if q is not None:
                    return FunctorReport(False, f"d_{i} is a chain map", n, q, count)
        for n in range(self.N):
            for j, s in enumerate(self.degens[n]):
                q = s.commutation_failure()
                count += 1
                if q is not None:
                    return FunctorReport(False, f"s_{j} is a chain map", n, q, count)
        for n in range(1, self.N + 1):
            for i in range(n + 1):
                for j in range(i + 1, n + 1):
                    lhs = self.faces[n - 1][i].compose(self.faces[n][j])
                    rhs = self.faces[n - 1][j - 1].compose(self.faces[n][i])
                    count += 1
                    q = _first_mismatch(lhs, rhs)
                    if q is not None:
                        return FunctorReport(False, f"d_{i} d_{j} = d_{j - 1} d_{i}", n, q, count)
        for n in range(self.N):
            ident = ChainMap.identity(self.levels[n])
            for j in range(n + 1):
                s = self.degens[n][j]
                for i in range(n + 2):
                    lhs = self.faces[n + 1][i].compose(s)
                    if i < j:
                        rhs = self.degens[n - 1][j - 1].compose(self.faces[n][i])
                        name = f"d_{i} s_{j} = s_{j - 1} d_{i}"
                    elif i in (j, j + 1):
                        rhs, name = ident, f"d_{i} s_{j} = id"
                    else:
                        rhs = self.degens[n - 1][j].compose(self.faces[n][i - 1])
                        name = f"d_{i} s_{j} = s_{j} d_{i - 1}"
                    count += 1
                    q = _first_mismatch(lhs, rhs)
                    if q is not None:
                        return FunctorReport(False, name, n, q, count)
        for n in range(self.N - 1):
            for i in range(n + 1):
                for j in range(i, n + 1):
                    lhs = self.degens[n + 1][i].compose(self.degens[n][j])
                    rhs = self.degens[n + 1][j + 1].compose(self.degens[n][i])
                    count += 1
                    q = _first_mismatch(lhs, rhs)
                    if q is not None:
                        return FunctorReport(False, f"s_{i} s_{j} = s_{j + 1} s_{i}", n, q, count)
        return FunctorReport(True, checked=count)

    def moore_exactness(self) -> Dict[int, List[int]]:
        """Per chain degree q, the simplicial degrees ``p in -1..N-1`` where
        the augmented alternating-face complex ``F(.)_q`` has nonzero
        integral homology.  Empty lists mean the hypothesis of a levelwise
        resolution holds through the truncation."""
        qs = sorted({q for C in self.levels.values() for q in C.ranks})
        out = {}
        for q in qs:
            ranks = {p: self.levels[p].rank(q) for p in range(-1, self.N + 1)}
            diffs = {}
            for p in range(0, self.N + 1):
                M = SparseIntMatrix(ranks[p - 1], ranks[p])
                for i, f in enumerate(self.faces[p]):
                    M = M + f[q].scale(-1 if i % 2 else 1)
                diffs[p] = M
            C = ChainComplex(ranks, diffs)
            out[q] = [p for p in range(-1, self.N) if not homology(C, p).is_zero()]
        return out


# ---------------------------------------------------------------------------
# cubes


def edge_index(S: Iterable[int], i: int) -> int:
    """Face index of the edge ``S -> S + {i}``."""
    return i - sum(1 for x in S if x < i)


def _subsets(j: int) -> List[Subset]:
    out = []
    for r in range(j + 2):
        out.extend(itertools.combinations(range(j + 1), r))
    return out


def _insert(S: Subset, i: int) -> Subset:
    return tuple(sorted(S + (i,)))


def _pos(i: int, S: Subset) -> int:
    return sum(1 for x in S if x < i)


@dataclass
class SquareFailure:
    S: Subset
    i1: int
    i2: int
    k: Tuple[int, int, int, int]
    degree: int

    def describe(self) -> str:
        k1, k2, k3, k4 = self.k
        return (f"square at S={set(self.S) or '{}'} with i1={self.i1}, i2={self.i2} does not commute "
                f"(k1,k2,k3,k4)=({k1},{k2},{k3},{k4}), chain degree {self.degree}")


class Cube:
    """Vertices ``objects[S]`` and edges ``edges[(S, i)]`` for S in {0..j}."""

    def __init__(self, j: int, n: int, objects: Dict[Subset, ChainComplex],
                 edges: Dict[Tuple[Subset, int], ChainMap], indices: Dict[Tuple[Subset, int], int]):
        self.j, self.n = j, n
        self.objects, self.edges, self.indices = objects, edges, indices

    @property
    def dimension(self) -> int:
        return self.j + 1

    def subsets(self) -> List[Subset]:
        return _subsets(self.j)

    def square_failure(self) -> Optional[SquareFailure]:
        for S in self.subsets():
            free = [i for i in range(self.j + 1) if i not in S]
            for i1, i2 in itertools.combinations(free, 2):
                S1, S2 = _insert(S, i1), _insert(S, i2)
                a = self.edges[(S1, i2)].compose(self.edges[(S, i1)])
                b = self.edges[(S2, i1)].compose(self.edges[(S, i2)])
                q = _first_mismatch(a, b)
                if q is not None:
                    k = (self.indices[(S, i1)], self.indices[(S, i2)], self.indices[(S1, i2)],
                         self.indices[(S2, i1)])
                    return SquareFailure(S, i1, i2, k, q)
        return None

    def same_as(self, other: "Cube") -> bool:
        if (self.j, set(self.objects)) != (other.j, set(other.objects)):
            return False
        if any(self.objects[S] != other.objects[S] for S in self.objects):
            return False
        return all(self.indices[e] == other.indices[e] and self.edges[e] == other.edges[e] for e in self.edges)


def build_cube(F: AugChainFunctor, j: int, n: int, check: bool = True) -> Cube:
    if not -1 <= j <= n <= F.N:
        raise TruncationError(f"cube F^{j}_{n} needs -1 <= j <= n <= {F.N}")
    objects, edges, indices = {}, {}, {}
    for S in _subsets(j):
        objects[S] = F.F(n - len(S))
        for i in range(j + 1):
            if i in S:
                continue
            k = edge_index(S, i)
            indices[(S, i)] = k
            edges[(S, i)] = F.face(n - len(S), k)
    Q = Cube(j, n, objects, edges, indices)
    if check:
        bad = Q.square_failure()
        if bad is not None:
            raise CubeError(bad.describe())
    return Q


def restrict_tau(Q: Cube, which: int) -> Cube:
    """Restriction along ``tau_1(S) = S`` or ``tau_2(S) = S + {j+1}``."""
    if Q.j < 0:
        raise CubeError("a 0-cube has no faces to restrict to")
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    j, top = Q.j - 1, Q.j
    objects, edges, indices = {}, {}, {}
    for S in _subsets(j):
        T = S if which == 1 else _insert(S, top)
        objects[S] = Q.objects[T]
        for i in range(j + 1):
            if i not in S:
                edges[(S, i)] = Q.edges[(T, i)]
                indices[(S, i)] = Q.indices[(T, i)]
    return Cube(j, Q.n if which == 1 else Q.n - 1, objects, edges, indices)


# ---------------------------------------------------------------------------
# total complexes


class TotalComplex(ChainComplex):
    """A ChainComplex that remembers where each cube vertex sits."""

    def __init__(self, ranks, diffs, layout: Dict[int, Dict[Subset, Tuple[int, int, int]]], kind: str):
        super().__init__(ranks, diffs, check=True)
        self.layout = layout
        self.kind = kind

    def component(self, m: int, S: Subset) -> Optional[Tuple[int, int, int]]:
        """``(chain degree q, offset, rank)`` of vertex S inside Tot_m."""
        return self.layout.get(m, {}).get(S)


def total_complex(Q: Cube, kind: str = "fiber") -> TotalComplex:
    if kind not in ("fiber", "cofiber"):
        raise ValueError("kind is 'fiber' or 'cofiber'")
    j = Q.j

    def tot_degree(S, q):
        return q - len(S) if kind == "fiber" else q + j + 1 - len(S)

    def internal_sign(S):
        e = len(S) if kind == "fiber" else j + 1 - len(S)
        return -1 if e % 2 else 1

    layout: Dict[int, Dict[Subset, Tuple[int, int, int]]] = {}
    ms = set()
    for S, X in Q.objects.items():
        for q in X.ranks:
            ms.add(tot_degree(S, q))
    for m in sorted(ms | {m - 1 for m in ms}):
        off, comp = 0, {}
        for S in Q.subsets():
            q = m + len(S) if kind == "fiber" else m - j - 1 + len(S)
            r = Q.objects[S].rank(q)
            comp[S] = (q, off, r)
            off += r
        layout[m] = comp
    ranks = {m: sum(c[2] for c in comp.values()) for m, comp in layout.items()}
    diffs = {}
    for m in sorted(layout):
        if m - 1 not in layout:
            continue
        src, tgt = layout[m], layout[m - 1]
        entries: Dict[Tuple[int, int], int] = {}
        for S, (q, off, r) in src.items():
            if not r:
                continue
            X = Q.objects[S]
            sg = internal_sign(S)
            tq, toff, tr = tgt[S]
            for (a, b), v in X.d(q).entries.items():
                entries[(toff + a, off + b)] = entries.get((toff + a, off + b), 0) + sg * v
            for i in range(j + 1):
                if i in S:
                    continue
                T = _insert(S, i)
                eq, eoff, er = tgt[T]
                es = -1 if _pos(i, S) % 2 else 1
                for (a, b), v in Q.edges[(S, i)][q].entries.items():
                    entries[(eoff + a, off + b)] = entries.get((eoff + a, off + b), 0) + es * v
        diffs[m] = SparseIntMatrix(ranks[m - 1], ranks[m], {k: v for k, v in entries.items() if v})
    return TotalComplex(ranks, diffs, layout, kind)


def iterated_homotopy_fiber(Q: Cube) -> TotalComplex:
    return total_complex(Q, "fiber")


def iterated_homotopy_cofiber(Q: Cube) -> TotalComplex:
    return total_complex(Q, "cofiber")


class FiberComplex(ChainComplex):
    """Levelwise kernel of the edges out of the initial vertex; ``basis[q]``
    holds its lattice basis inside ``X(empty)_q`` as columns."""

    def __init__(self, ranks, diffs, basis: Dict[int, SparseIntMatrix]):
        super().__init__(ranks, diffs)
        self.basis = basis


def iterated_fiber(Q: Cube) -> FiberComplex:
    X = Q.objects[()]
    basis, solvers = {}, {}
    for q in sorted(X.ranks):
        outs = [Q.edges[((), i)][q] for i in range(Q.j + 1)]
        if outs:
            stacked = SparseIntMatrix(sum(o.nrows for o in outs), X.rank(q))
            r0 = 0
            ent = {}
            for o in outs:
                for (a, b), v in o.entries.items():
                    ent[(r0 + a, b)] = v
                r0 += o.nrows
            stacked = SparseIntMatrix(r0, X.rank(q), ent)
            K = integer_kernel(stacked)
        else:
            K = SparseIntMatrix.identity(X.rank(q))
        basis[q] = K
    ranks = {q: K.ncols for q, K in basis.items()}
    diffs = {}
    for q, K in basis.items():
        if q - 1 not in basis or not K.ncols or not basis[q - 1].ncols:
            continue
        if q - 1 not in solvers:
            solvers[q - 1] = LatticeSolver(basis[q - 1])
        img = X.d(q) @ K
        cols = [solvers[q - 1].solve(c) for c in img.columns()]
        diffs[q] = SparseIntMatrix.from_columns(basis[q - 1].ncols, cols)
    return FiberComplex(ranks, diffs, basis)


def fiber_inclusion(Q: Cube, fib: Optional[FiberComplex] = None,
                    tot: Optional[TotalComplex] = None) -> ChainMap:
    """``x -> x_{empty}``, a chain map from the strict to the homotopy fibre."""
    fib = fib if fib is not None else iterated_fiber(Q)
    tot = tot if tot is not None else iterated_homotopy_fiber(Q)
    mats = {}
    for q, K in fib.basis.items():
        if not K.ncols:
            continue
        c = tot.component(q, ())
        qq, off, r = c
        mats[q] = SparseIntMatrix(tot.rank(q), K.ncols, {(off + a, b): v for (a, b), v in K.entries.items()})
    return ChainMap(fib, tot, mats)


def duality_check(Q: Cube) -> Tuple[bool, Dict[int, Tuple[int, int]]]:
    """``dim H_m(hofib) = dim H_{m+j+1}(hocofib)`` over Q for every m."""
    fib, cof = iterated_homotopy_fiber(Q), iterated_homotopy_cofiber(Q)
    shift = Q.j + 1
    degs = set(fib.ranks) | {m - shift for m in cof.ranks}
    table = {}
    for m in sorted(degs):
        table[m] = (homology(fib, m, "Q").betti, homology(cof, m + shift, "Q").betti)
    return all(a == b for a, b in table.values()), table


# ---------------------------------------------------------------------------
# fibration sequences


def _exactness(dim: int, f_in: List[List[Fraction]], f_out: List[List[Fraction]]) -> Tuple[bool, int, int]:
    rk_in = qrank(f_in) if dim else 0
    rk_out = qrank(f_out) if dim else 0
    if dim and f_in and f_out and f_in[0] and f_out[0]:
        prod = qmat_mul(f_out, f_in, dim)
        if any(x for row in prod for x in row):
            return False, rk_in, rk_out
    return rk_in + rk_out == dim, rk_in, rk_out


@dataclass
class FibrationSequence:
    """``hf F^{j+1}_n --p--> hf F^j_n --alpha--> hf F^j_{n-1}`` and the
    connecting map ``H_{m+1}(bot) -> H_m(top)``.

    ``delta`` is the chain-level inclusion of ``bot`` (shifted up one) as the
    vertices containing ``j+1``."""
    j: int
    n: int
    top: TotalComplex
    mid: TotalComplex
    bot: TotalComplex
    p: ChainMap
    alpha: ChainMap
    delta: ChainMap
    spots: List[dict]
    exact: bool
    alpha_surjective: bool
    failure: Optional[str] = None


def fibration_sequence(F: AugChainFunctor, j: int, n: int, check: bool = True) -> FibrationSequence:
    if not (-1 <= j and j + 1 <= n <= F.N):
        raise TruncationError(f"fibration sequence needs -1 <= j, j+1 <= n <= {F.N}")
    Qtop = build_cube(F, j + 1, n, check=check)
    Qmid, Qbot = restrict_tau(Qtop, 1), restrict_tau(Qtop, 2)
    top, mid, bot = total_complex(Qtop), total_complex(Qmid), total_complex(Qbot)
    last = j + 1
    # projection top -> mid keeps the vertices without j+1
    pm = {}
    for m, comp in mid.layout.items():
        ent = {}
        for S, (q, off, r) in comp.items():
            _, toff, _ = top.component(m, S)
            for a in range(r):
                ent[(off + a, toff + a)] = 1
        if ent:
            pm[m] = SparseIntMatrix(mid.rank(m), top.rank(m), ent)
    p = ChainMap(top, mid, pm)
    # alpha: x_S -> e_{j+1} x_S
    am = {}
    for m, comp in mid.layout.items():
        ent = {}
        for S, (q, off, r) in comp.items():
            bc = bot.component(m, S)
            if not r or bc is None:
                continue
            _, boff, _ = bc
            for (a, b), v in Qtop.edges[(S, last)][q].entries.items():
                ent[(boff + a, off + b)] = v
        if ent:
            am[m] = SparseIntMatrix(bot.rank(m), mid.rank(m), ent)
    alpha = ChainMap(mid, bot, am)
    # delta: bot[-1] -> top, x_S -> (-1)^{|S|} x_{S + {j+1}}
    bshift = bot.shift(-1)
    dm = {}
    for m in bshift.ranks:
        ent = {}
        for S, (q, off, r) in bot.layout[m + 1].items():
            T = _insert(S, last)
            _, toff, _ = top.component(m, T)
            sg = -1 if len(S) % 2 else 1
            for a in range(r):
                ent[(toff + a, off + a)] = sg
        if ent:
            dm[m] = SparseIntMatrix(top.rank(m), bshift.rank(m), ent)
    delta = ChainMap(bshift, top, dm)

    degs = sorted(set(top.ranks) | set(mid.ranks) | set(bot.ranks))
    degs = list(range(degs[0] - 1, degs[-1] + 2)) if degs else []
    Ht = {m: QHomology(top, m) for m in degs}
    Hm = {m: QHomology(mid, m) for m in degs}
    Hb = {m: QHomology(bot, m) for m in degs}
    pst = {m: induced_map_q(p[m], Ht[m], Hm[m]) for m in degs}
    ast = {m: induced_map_q(alpha[m], Hm[m], Hb[m]) for m in degs}
    # H_{m+1}(bot) -> H_m(top)
    dst = {}
    for m in degs:
        if m + 1 in Hb:
            cols = [Ht[m].coords(delta[m].apply(z)) for z in Hb[m + 1].reps]
            dst[m] = [[cols[c][r] for c in range(len(cols))] for r in range(Ht[m].dim)]
    spots, failure, surj = [], None, True
    for m in degs:
        checks = []
        if m in dst:
            checks.append(("top", Ht[m].dim, dst[m], pst[m]))
        checks.append(("mid", Hm[m].dim, pst[m], ast[m]))
        if m - 1 in dst:
            checks.append(("bot", Hb[m].dim, ast[m], dst[m - 1]))
        for name, dim, fin, fout in checks:
            ok, ri, ro = _exactness(dim, fin, fout)
            spots.append({"spot": name, "degree": m, "dim": dim, "rank_in": ri, "rank_out": ro, "exact": ok})
            if not ok and failure is None:
                failure = f"inexact at H_{m}({name})"
        if Hb[m].dim and qrank(ast[m]) != Hb[m].dim:
            surj = False
    return FibrationSequence(j, n, top, mid, bot, p, alpha, delta, spots, failure is None, surj, failure)


# ---------------------------------------------------------------------------
# the filtration


def _canonical_basis(vectors: List[List[Fraction]], dim: int) -> List[List[Fraction]]:
    """Reduced row echelon basis of the span, as dense rows."""
    rows = [[Fraction(x) for x in v] for v in vectors if any(v)]
    out: List[List[Fraction]] = []
    pivots: List[int] = []
    for col in range(dim):
        piv = next((r for r in rows if r[col] != 0), None)
        if piv is None:
            continue
        rows.remove(piv)
        piv = [x / piv[col] for x in piv]
        rows = [[a - r[col] * b for a, b in zip(r, piv)] for r in rows]
        rows = [r for r in rows if any(r)]
        out = [[a - o[col] * b for a, b in zip(o, piv)] for o in out]
        out.append(piv)
        pivots.append(col)
    return out


def _kernel_basis(mat: List[List[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of ``{v : mat v = 0}`` in RREF."""
    if ncols == 0:
        return []
    R = _canonical_basis(mat, ncols)
    pivots = [next(c for c, x in enumerate(r) if x) for r in R]
    basis = []
    for f in range(ncols):
        if f in pivots:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, pc in zip(R, pivots):
            v[pc] = -r[f]
        basis.append(v)
    return _canonical_basis(basis, ncols)


def _in_span(v: List[Fraction], basis: List[List[Fraction]], dim: int) -> bool:
    return len(_canonical_basis(basis + [v], dim)) == len(_canonical_basis(basis, dim))


@dataclass
class FiltrationResult:
    """Stages ``F_k`` of ``H_degree(F(-1); Q)`` in the coordinates of
    ``reps``; ``composites[k]`` is the matrix of the k-fold connecting map."""
    degree: int
    dim: int
    reps: List[Dict[int, Fraction]]
    stages: Dict[int, List[List[Fraction]]] = field(default_factory=dict)
    composites: Dict[int, List[List[Fraction]]] = field(default_factory=dict)
    method: str = "corner"

    def dims(self) -> Dict[int, int]:
        return {k: len(v) for k, v in sorted(self.stages.items())}

    def is_monotone(self) -> bool:
        ks = sorted(self.stages)
        for a, b in zip(ks, ks[1:]):
            if any(not _in_span(v, self.stages[b], self.dim) for v in self.stages[a]):
                return False
        return True

    def same_stages(self, other: "FiltrationResult") -> bool:
        if self.dim != other.dim or set(self.stages) != set(other.stages):
            return False
        return all(_canonical_basis(self.stages[k], self.dim) == _canonical_basis(other.stages[k], self.dim)
                   for k in self.stages)

    def to_json(self) -> dict:
        return {
            "degree": self.degree, "dim": self.dim, "method": self.method,
            "stages": {str(k): [[str(x) for x in v] for v in b] for k, b in sorted(self.stages.items())},
            "composites": {str(k): [[str(x) for x in r] for r in M] for k, M in sorted(self.composites.items())},
        }


def _check_kmax(F: AugChainFunctor, kmax: int):
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    if kmax > F.N - 1:
        raise TruncationError(f"kmax={kmax} exceeds N-1={F.N - 1}")


def filtration(F: AugChainFunctor, degree: int, kmax: int, H: Optional[QHomology] = None) -> FiltrationResult:
    """Each connecting map of the base fibration sequences is the inclusion
    of ``hf F^{k-2}_{k-2}`` as the vertices containing ``k-1``, so the
    k-fold composite carries a cycle z of F(-1) to ``+-z`` at the far
    corner ``{0..k-1}`` of ``hf F^{k-1}_{k-1}``."""
    _check_kmax(F, kmax)
    H = H or QHomology(F.F(-1), degree)
    res = FiltrationResult(degree, H.dim, H.reps, method="corner")
    for k in range(1, kmax + 1):
        tot = total_complex(build_cube(F, k - 1, k - 1))
        corner = tuple(range(k))
        Hk = QHomology(tot, degree - k)
        comp = tot.component(degree - k, corner)
        cols = []
        for z in H.reps:
            v = {comp[1] + a: x for a, x in z.items()}
            cols.append(Hk.coords(v))
        M = [[cols[c][r] for c in range(H.dim)] for r in range(Hk.dim)]
        res.composites[k] = M
        res.stages[k] = _kernel_basis(M, H.dim)
    return res


def _fib_of(beta: ChainMap) -> ChainComplex:
    """``fib(beta)_m = B_{m+1} (+) A_m`` with the cone differential negated."""
    return cone(beta).shift(-1)


def _fib_map(gB: ChainMap, gA: ChainMap, src: ChainComplex, tgt: ChainComplex,
             A: ChainComplex, B: ChainComplex, A2: ChainComplex, B2: ChainComplex) -> ChainMap:
    mats = {}
    for m in src.ranks:
        mats[m] = block([[gB[m + 1], None], [None, gA[m]]], [B2.rank(m + 1), A2.rank(m)],
                        [B.rank(m + 1), A.rank(m)])
    return ChainMap(src, tgt, mats, check=False)


def filtration_oracle(F: AugChainFunctor, degree: int, kmax: int,
                      H: Optional[QHomology] = None) -> FiltrationResult:
    """Second route: build ``Q^j_n`` as iterated mapping fibres
    ``fib(beta^{j-1}_{n,j})`` and compose the homology maps induced by the
    inclusions ``Q^{k-2}_{k-2}[-1] -> Q^{k-1}_{k-1}``."""
    _check_kmax(F, kmax)
    Qc: Dict[Tuple[int, int], ChainComplex] = {}
    beta: Dict[Tuple[int, int, int], ChainMap] = {}

    def getQ(j, n):
        if (j, n) in Qc:
            return Qc[(j, n)]
        if j == -1:
            Qc[(j, n)] = F.F(n)
        else:
            Qc[(j, n)] = _fib_of(getB(j - 1, n, j))
        return Qc[(j, n)]

    def getB(j, n, k):
        # Q^j_n -> Q^j_{n-1}, the face d_k pushed through j+1 fibre steps
        key = (j, n, k)
        if key in beta:
            return beta[key]
        if j == -1:
            beta[key] = F.face(n, k)
            return beta[key]
        A, B = getQ(j - 1, n), getQ(j - 1, n - 1)
        A2, B2 = getQ(j - 1, n - 1), getQ(j - 1, n - 2)
        beta[key] = _fib_map(getB(j - 1, n - 1, k - 1), getB(j - 1, n, k), getQ(j, n), getQ(j, n - 1),
                             A, B, A2, B2)
        return beta[key]

    H = H or QHomology(F.F(-1), degree)
    res = FiltrationResult(degree, H.dim, H.reps, method="cone")
    cur_H = H
    M: List[List[Fraction]] = [[Fraction(int(r == c)) for c in range(H.dim)] for r in range(H.dim)]
    for k in range(1, kmax + 1):
        Qk = getQ(k - 1, k - 1)
        Hk = QHomology(Qk, degree - k)
        # b in Q^{k-2}_{k-2} sits as (b, 0) one degree down in Q^{k-1}_{k-1}
        cols = [Hk.coords(dict(z)) for z in cur_H.reps]
        step = [[cols[c][r] for c in range(cur_H.dim)] for r in range(Hk.dim)]
        M = qmat_mul(step, M, cur_H.dim) if cur_H.dim else [[Fraction(0)] * H.dim for _ in range(Hk.dim)]
        res.composites[k] = M
        res.stages[k] = _kernel_basis(M, H.dim)
        cur_H = Hk
    return res


# ---------------------------------------------------------------------------
# natural transformations


class NaturalTransformation:
    """Levelwise chain maps ``zeta[n] : F1(n) -> F2(n)``, ``-1 <= n <= N``."""

    def __init__(self, source: AugChainFunctor, target: AugChainFunctor, maps: Dict[int, ChainMap]):
        if source.N != target.N:
            raise ValueError("functors must share a truncation")
        self.source, self.target, self.maps = source, target, dict(maps)

    @classmethod
    def identity(cls, F: AugChainFunctor) -> "NaturalTransformation":
        return cls(F, F, {n: ChainMap.identity(F.F(n)) for n in range(-1, F.N + 1)})

    @classmethod
    def zero(cls, F1: AugChainFunctor, F2: AugChainFunctor) -> "NaturalTransformation":
        return cls(F1, F2, {n: ChainMap.zero(F1.F(n), F2.F(n)) for n in range(-1, F1.N + 1)})

    def naturality_failure(self) -> Optional[str]:
        F1, F2, z = self.source, self.target, self.maps
        for n in range(-1, F1.N + 1):
            if z[n].commutation_failure() is not None:
                return f"zeta_{n} is not a chain map"
        for n in range(F1.N + 1):
            for i in range(n + 1):
                if _first_mismatch(z[n - 1].compose(F1.face(n, i)), F2.face(n, i).compose(z[n])) is not None:
                    return f"zeta does not commute with d_{i} at level {n}"
        for n in range(F1.N):
            for j in range(n + 1):
                if _first_mismatch(z[n + 1].compose(F1.degen(n, j)), F2.degen(n, j).compose(z[n])) is not None:
                    return f"zeta does not commute with s_{j} at level {n}"
        return None


def induced_filtration_map(zeta: NaturalTransformation, degree: int, kmax: int) -> dict:
    """Check ``zeta_*(F_k(F1)) <= F_k(F2)`` for ``k <= kmax``; the report
    carries the matrix of ``zeta_*`` on ``H_degree(F(-1); Q)`` and, per k,
    the induced map between stage bases."""
    bad = zeta.naturality_failure()
    if bad is not None:
        raise ValueError(f"naturality failure: {bad}")
    H1 = QHomology(zeta.source.F(-1), degree)
    H2 = QHomology(zeta.target.F(-1), degree)
    Z = induced_map_q(zeta.maps[-1][degree], H1, H2)
    f1 = filtration(zeta.source, degree, kmax, H1)
    f2 = filtration(zeta.target, degree, kmax, H2)
    contained, stage_maps = {}, {}
    for k in range(1, kmax + 1):
        imgs = []
        for v in f1.stages[k]:
            imgs.append([sum((Z[r][c] * v[c] for c in range(H1.dim)), Fraction(0)) for r in range(H2.dim)])
        contained[k] = all(_in_span(w, f2.stages[k], H2.dim) for w in imgs)
        if contained[k]:
            stage_maps[k] = [_span_coords(w, f2.stages[k]) for w in imgs]
    return {"degree": degree, "zeta": Z, "source": f1, "target": f2, "contained": contained,
            "stage_maps": stage_maps, "ok": all(contained.values())}


def _span_coords(w: List[Fraction], basis: List[List[Fraction]]) -> List[Fraction]:
    # basis is in RREF, so coordinates are read off at the pivot columns
    out = []
    for b in basis:
        pc = next(c for c, x in enumerate(b) if x)
        out.append(w[pc])
    return out


# ---------------------------------------------------------------------------
# strict versus homotopy fibres


@dataclass
class Prop218Report:
    hypothesis: bool
    hypothesis_failures: Dict[int, List[int]]
    conclusion: Optional[Dict[Tuple[int, int], bool]] = None

    @property
    def conclusion_holds(self) -> Optional[bool]:
        return None if self.conclusion is None else all(self.conclusion.values())

    @property
    def ok(self) -> bool:
        """The implication itself: a hypothesis failure is not a counterexample."""
        return (not self.hypothesis) or bool(self.conclusion_holds)

    def to_json(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "hypothesis_failures": {str(q): v for q, v in self.hypothesis_failures.items() if v},
            "conclusion": None if self.conclusion is None else
            {f"{j},{n}": v for (j, n), v in sorted(self.conclusion.items())},
        }


def fiber_is_quasi_iso(Q: Cube) -> bool:
    """The strict-fibre inclusion has an integrally acyclic mapping cone."""
    inc = fiber_inclusion(Q)
    return cone(inc).is_acyclic("Z")


def check_prop_2_18(F: AugChainFunctor, force: bool = False) -> Prop218Report:
    failures = F.moore_exactness()
    hyp = not any(failures.values())
    rep = Prop218Report(hyp, failures)
    if hyp or force:
        rep.conclusion = {}
        for n in range(-1, F.N + 1):
            for j in range(-1, n + 1):
                rep.conclusion[(j, n)] = fiber_is_quasi_iso(build_cube(F, j, n))
    return rep


# ---------------------------------------------------------------------------
# Dold-Kan construction from double-complex data


@dataclass
class DoubleComplexData:
    """Chain complexes ``M[p]`` (``0 <= p <= P``) with horizontal maps
    ``h[p] : M[p] -> M[p-1]`` (``p >= 1``), ``h h = 0``, an augmentation
    target ``aug`` and ``eps : M[0] -> aug`` with ``eps h[1] = 0``."""
    M: Dict[int, ChainComplex]
    h: Dict[int, ChainMap]
    aug: ChainComplex
    eps: ChainMap

    def validate(self):
        P = max(self.M)
        for p in range(1, P + 1):
            f = self.h[p]
            if f.commutation_failure() is not None:
                raise ChainComplexError(f"h_{p} is not a chain map")
            if p >= 2 and any(not m.is_zero() for m in self.h[p - 1].compose(f).mats.values()):
                raise ChainComplexError(f"h_{p - 1} h_{p} != 0")
        if self.eps.commutation_failure() is not None:
            raise ChainComplexError("eps is not a chain map")
        if P >= 1 and any(not m.is_zero() for m in self.eps.compose(self.h[1]).mats.values()):
            raise ChainComplexError("eps h_1 != 0")


def _block_diag_complex(parts: List[ChainComplex]) -> ChainComplex:
    if not parts:
        return ChainComplex({})
    return ChainComplex.direct_sum(parts)


def dold_kan_functor(data: DoubleComplexData, N: int, name: str = "Gamma", validate: bool = True) -> AugChainFunctor:
    """The augmented simplicial chain complex whose normalized Moore complex
    in the simplicial direction is ``M`` with differential ``h``."""
    if validate:
        data.validate()
    P = max(data.M)
    summ = {n: [(p, eta) for p in range(min(n, P) + 1) for eta in surjections(n, p)] for n in range(N + 1)}
    qs = sorted({q for C in data.M.values() for q in C.ranks})
    levels = {-1: data.aug}
    for n in range(N + 1):
        levels[n] = _block_diag_complex([data.M[p] for p, _ in summ[n]])

    def offsets(n):
        out = {}
        for q in qs:
            off, d = 0, {}
            for p, eta in summ[n]:
                d[eta] = off
                off += data.M[p].rank(q)
            out[q] = d
        return out

    offs = {n: offsets(n) for n in range(N + 1)}

    def build(n_src, theta, n_tgt):
        mats = {}
        S, T = levels[n_src], levels[n_tgt]
        for q in qs:
            ent = {}
            for p, eta in summ[n_src]:
                r = data.M[p].rank(q)
                if not r:
                    continue
                act = dk_act(eta, theta)
                if act is None:
                    continue
                kind, sigma = act
                so = offs[n_src][q][eta]
                to = offs[n_tgt][q][sigma]
                if kind == "id":
                    for a in range(r):
                        ent[(to + a, so + a)] = 1
                else:
                    for (a, b), v in data.h[p][q].entries.items():
                        ent[(to + a, so + b)] = v
            mats[q] = SparseIntMatrix(T.rank(q), S.rank(q), ent)
        return ChainMap(S, T, mats, check=False)

    faces = {0: [ChainMap(levels[0], levels[-1], data.eps.mats, check=False)]}
    for n in range(1, N + 1):
        faces[n] = [build(n, coface_map(n, i), n - 1) for i in range(n + 1)]
    degens = {n: [build(n, codegeneracy_map(n, j), n + 1) for j in range(n + 1)] for n in range(N)}
    F = AugChainFunctor(levels, faces, degens, name)
    F.summands = summ
    return F


def dold_kan_transformation(F1: AugChainFunctor, F2: AugChainFunctor, zeta: Dict[int, ChainMap],
                            zeta_aug: ChainMap, data1: DoubleComplexData,
                            data2: DoubleComplexData) -> NaturalTransformation:
    """``Gamma(zeta)`` for a morphism of double-complex data."""
    maps = {-1: zeta_aug}
    for n in range(F1.N + 1):
        qs = sorted(set(F1.F(n).ranks) | set(F2.F(n).ranks))
        mats = {}
        for q in qs:
            ent, so, to = {}, 0, 0
            for p, eta in F1.summands[n]:
                for (a, b), v in zeta[p][q].entries.items():
                    ent[(to + a, so + b)] = v
                so += data1.M[p].rank(q)
                to += data2.M[p].rank(q)
            mats[q] = SparseIntMatrix(F2.F(n).rank(q), F1.F(n).rank(q), ent)
        maps[n] = ChainMap(F1.F(n), F2.F(n), mats, check=False)
    return NaturalTransformation(F1, F2, maps)


# ---------------------------------------------------------------------------
# random inputs


def _random_unimodular(rng: random.Random, r: int, steps: int = 6) -> Tuple[SparseIntMatrix, SparseIntMatrix]:
    """A unimodular matrix and its inverse, built from elementary operations."""
    P = [[int(a == b) for b in range(r)] for a in range(r)]
    Pi = [[int(a == b) for b in range(r)] for a in range(r)]
    if r >= 2:
        for _ in range(steps):
            a, b = rng.sample(range(r), 2)
            c = rng.choice([-1, 1])
            # P <- P (I + c E_ab): column b += c column a
            for row in P:
                row[b] += c * row[a]
            # Pi <- (I - c E_ab) Pi: row a -= c row b
            Pi[a] = [x - c * y for x, y in zip(Pi[a], Pi[b])]
    return SparseIntMatrix.from_dense(P, r), SparseIntMatrix.from_dense(Pi, r)


def random_complex(rng: random.Random, degrees: Sequence[int], max_rank: int = 2,
                   torsion: bool = True) -> ChainComplex:
    """A split complex ``d e_a = t e_b`` conjugated by unimodular changes of basis."""
    ranks = {q: rng.randint(0, max_rank) for q in degrees}
    D = {}
    free_below: List[int] = []
    sources_by_q: Dict[int, int] = {}
    prev_q = None
    for q in sorted(degrees):
        r = ranks[q]
        if prev_q is not None and prev_q == q - 1:
            targets = free_below
            t = rng.randint(0, min(len(targets), r))
            ent = {}
            for s in range(t):
                ent[(targets[s], s)] = rng.choice([1, 1, 2, 3]) if torsion else 1
            D[q] = SparseIntMatrix(ranks[prev_q], r, ent)
            sources_by_q[q] = t
        else:
            sources_by_q[q] = 0
        free_below = list(range(sources_by_q[q], r))
        prev_q = q
    conj = {q: _random_unimodular(rng, ranks[q]) for q in degrees}
    diffs = {}
    for q, d in D.items():
        P_lo, _ = conj[q - 1]
        _, Pi_hi = conj[q]
        diffs[q] = P_lo @ d @ Pi_hi
    return ChainComplex(ranks, diffs)


def _random_int_matrix(rng: random.Random, nrows: int, ncols: int, lo: int = -1, hi: int = 1) -> SparseIntMatrix:
    ent = {}
    for a in range(nrows):
        for b in range(ncols):
            v = rng.randint(lo, hi)
            if v:
                ent[(a, b)] = v
    return SparseIntMatrix(nrows, ncols, ent)


def _chain_map_space(A: ChainComplex, B: ChainComplex) -> List[Dict[int, SparseIntMatrix]]:
    """A Z-basis of the chain maps A -> B (degree 0)."""
    qs = sorted(set(A.ranks) | set(B.ranks))
    var, nv = {}, 0
    for q in qs:
        for a in range(B.rank(q)):
            for b in range(A.rank(q)):
                var[(q, a, b)] = nv
                nv += 1
    rows = []
    # equation per (q, a, b'): (d_B phi_q - phi_{q-1} d_A)[a, b'] = 0, phi_q : A_q -> B_q
    for q in qs:
        dB, dA = B.d(q), A.d(q)
        for a in range(B.rank(q - 1)):
            for bp in range(A.rank(q)):
                row = {}
                for (x, y), v in dB.entries.items():
                    if x == a:
                        k = var[(q, y, bp)]
                        row[k] = row.get(k, 0) + v
                for (x, y), v in dA.entries.items():
                    if y == bp:
                        k = var[(q - 1, a, x)]
                        row[k] = row.get(k, 0) - v
                row = {k: v for k, v in row.items() if v}
                if row:
                    rows.append(row)
    if nv == 0:
        return []
    M = SparseIntMatrix(len(rows), nv, {(i, k): v for i, row in enumerate(rows) for k, v in row.items()})
    K = integer_kernel(M)
    out = []
    for col in K.columns():
        mats = {}
        for q in qs:
            ent = {}
            for a in range(B.rank(q)):
                for b in range(A.rank(q)):
                    v = col.get(var[(q, a, b)], 0)
                    if v:
                        ent[(a, b)] = v
            mats[q] = SparseIntMatrix(B.rank(q), A.rank(q), ent)
        out.append(mats)
    return out


@dataclass
class SplitFunctorData:
    """``U[p]`` for ``-1 <= p <= N-1`` and twists ``c[p] : U[p-1] -> U[p]``.

    ``M_p = U_p (+) U_{p-1}`` with ``h(x, y) = (y, 0)`` and vertical
    differential ``[[a_p, a_p c_p - c_p a_{p-1}], [0, a_{p-1}]]``;
    ``eps`` projects ``M_0`` onto ``U_{-1}``.  The augmented Moore complex
    is a cone, hence exact."""
    U: Dict[int, ChainComplex]
    c: Dict[int, SparseIntMatrix]
    N: int
    extra: Optional[ChainComplex] = None

    def double_complex(self) -> DoubleComplexData:
        N = self.N
        U = dict(self.U)
        U[N] = ChainComplex({})
        U[-2] = ChainComplex({})
        qs = sorted({q for C in U.values() for q in C.ranks})
        M, h = {}, {}
        for p in range(0, N + 1):
            up, um = U[p], U[p - 1]
            ranks = {q: up.rank(q) + um.rank(q) for q in qs}
            diffs = {}
            for q in qs:
                c_hi = self._c(p, q, U)
                c_lo = self._c(p, q - 1, U)
                b = up.d(q) @ c_hi - c_lo @ um.d(q)
                diffs[q] = block([[up.d(q), b], [None, um.d(q)]], [up.rank(q - 1), um.rank(q - 1)],
                                 [up.rank(q), um.rank(q)])
            M[p] = ChainComplex(ranks, diffs)
        for p in range(1, N + 1):
            mats = {}
            for q in qs:
                # (x, y) in U_p + U_{p-1}  ->  (y, 0) in U_{p-1} + U_{p-2}
                ent = {(a, U[p].rank(q) + a): 1 for a in range(U[p - 1].rank(q))}
                mats[q] = SparseIntMatrix(M[p - 1].rank(q), M[p].rank(q), ent)
            h[p] = ChainMap(M[p], M[p - 1], mats)
        aug = U[-1] if self.extra is None else ChainComplex.direct_sum([U[-1], self.extra])
        mats = {}
        for q in qs:
            ent = {(a, U[0].rank(q) + a): 1 for a in range(U[-1].rank(q))}
            mats[q] = SparseIntMatrix(aug.rank(q), M[0].rank(q), ent)
        eps = ChainMap(M[0], aug, mats)
        return DoubleComplexData(M, h, aug, eps)

    def _c(self, p: int, q: int, U) -> SparseIntMatrix:
        m = self.c.get((p, q))
        if m is None:
            return SparseIntMatrix(U[p].rank(q), U[p - 1].rank(q))
        return m


def random_split_data(rng: random.Random, N: int, degrees: Sequence[int] = (0, 1), max_rank: int = 2,
                      twist: bool = True) -> SplitFunctorData:
    U = {p: random_complex(rng, degrees, max_rank) for p in range(-1, N)}
    c = {}
    if twist:
        for p in range(0, N):
            for q in degrees:
                c[(p, q)] = _random_int_matrix(rng, U[p].rank(q), U[p - 1].rank(q))
    return SplitFunctorData(U, c, N)


def random_split_functor(rng: random.Random, N: int, **kw) -> Tuple[AugChainFunctor, SplitFunctorData]:
    data = random_split_data(rng, N, **kw)
    dc = data.double_complex()
    F = dold_kan_functor(dc, N, name="random-split")
    F.data = dc
    return F, data


def random_natural_transformation(rng: random.Random, d1: SplitFunctorData, d2: SplitFunctorData,
                                  F1: Optional[AugChainFunctor] = None,
                                  F2: Optional[AugChainFunctor] = None) -> NaturalTransformation:
    """``zeta_p = [[phi_p, phi_p c_p - c'_p phi_{p-1}], [0, phi_{p-1}]]`` for
    random chain maps ``phi_p : U_p -> U'_p``."""
    if d1.N != d2.N or (d1.extra is not None) or (d2.extra is not None):
        raise ValueError("need two plain split data sets of equal truncation")
    N = d1.N
    dc1, dc2 = d1.double_complex(), d2.double_complex()
    F1 = F1 or dold_kan_functor(dc1, N)
    F2 = F2 or dold_kan_functor(dc2, N)
    U1, U2 = dict(d1.U), dict(d2.U)
    for U in (U1, U2):
        U[N] = ChainComplex({})
        U[-2] = ChainComplex({})
    qs = sorted({q for C in list(U1.values()) + list(U2.values()) for q in C.ranks})
    phi = {}
    for p in range(-2, N + 1):
        space = _chain_map_space(U1[p], U2[p])
        mats = {q: SparseIntMatrix(U2[p].rank(q), U1[p].rank(q)) for q in qs}
        for basis_map in space:
            coef = rng.randint(-2, 2)
            if coef:
                for q in qs:
                    mats[q] = mats[q] + basis_map.get(q, SparseIntMatrix(U2[p].rank(q), U1[p].rank(q))).scale(coef)
        phi[p] = mats
    zeta = {}
    for p in range(0, N + 1):
        mats = {}
        for q in qs:
            psi = phi[p][q] @ d1._c(p, q, U1) - d2._c(p, q, U2) @ phi[p - 1][q]
            mats[q] = block([[phi[p][q], psi], [None, phi[p - 1][q]]], [U2[p].rank(q), U2[p - 1].rank(q)],
                            [U1[p].rank(q), U1[p - 1].rank(q)])
        zeta[p] = ChainMap(dc1.M[p], dc2.M[p], mats)
    zeta_aug = ChainMap(U1[-1], U2[-1], phi[-1])
    return dold_kan_transformation(F1, F2, zeta, zeta_aug, dc1, dc2)


def negative_control_functor(rng: random.Random, N: int, degrees: Sequence[int] = (0, 1),
                             max_rank: int = 2) -> AugChainFunctor:
    """A split functor whose augmentation target has an extra summand that
    ``eps`` misses, so the levelwise-resolution hypothesis fails."""
    data = random_split_data(rng, N, degrees, max_rank)
    extra = None
    while extra is None or not extra.ranks:
        extra = random_complex(rng, degrees, max_rank)
    data.extra = extra
    F = dold_kan_functor(data.double_complex(), N, name="negative-control")
    return F


def constant_functor(C: ChainComplex, N: int) -> AugChainFunctor:
    """Every level C, every structure map the identity."""
    idm = ChainMap.identity(C)
    levels = {n: C for n in range(-1, N + 1)}
    faces = {n: [idm] * (n + 1) for n in range(N + 1)}
    degens = {n: [idm] * (n + 1) for n in range(N)}
    return AugChainFunctor(levels, faces, degens, "constant")


def designed_filtration_functor(N: int = 3) -> AugChainFunctor:
    """``M_0 = (x -> w)``, ``M_1 = (y)`` with ``h(y) = w`` and ``eps(x) = z``:
    the class of z dies in ``hf F^1_1`` but not in ``hf F^0_0``."""
    M0 = ChainComplex({0: 1, -1: 1}, {0: SparseIntMatrix.from_dense([[1]])})
    M1 = ChainComplex({-1: 1})
    aug = ChainComplex({0: 1})
    M = {0: M0, 1: M1}
    h = {1: ChainMap(M1, M0, {-1: SparseIntMatrix.from_dense([[1]])})}
    eps = ChainMap(M0, aug, {0: SparseIntMatrix.from_dense([[1]])})
    return dold_kan_functor(DoubleComplexData(M, h, aug, eps), N, name="designed")


def random_surjection(rng: random.Random, v: int, w: int) -> SparseIntMatrix:
    """An integer matrix ``Z^v -> Z^w`` that is onto over Z (needs v >= w)."""
    if v < w:
        raise ValueError("a surjection Z^v -> Z^w needs v >= w")
    base = [[int(a == b) for b in range(v)] for a in range(w)]
    for a in range(w):
        for b in range(w, v):
            base[a][b] = rng.randint(-2, 2)
    L, _ = _random_unimodular(rng, w)
    R, _ = _random_unimodular(rng, v)
    return L @ SparseIntMatrix.from_dense(base, v) @ R


def cech_functor(f: SparseIntMatrix, N: int) -> AugChainFunctor:
    """Levels ``V x_W ... x_W V`` (n+1 factors) over ``f : V -> W``, all in
    chain degree 0, with faces dropping and degeneracies repeating factors."""
    w, v = f.shape
    bases: Dict[int, SparseIntMatrix] = {}
    for n in range(N + 1):
        # (v_0..v_n) with f v_i = f v_{i+1}
        ent = {}
        for i in range(n):
            for (a, b), x in f.entries.items():
                ent[(i * w + a, i * v + b)] = ent.get((i * w + a, i * v + b), 0) + x
                ent[(i * w + a, (i + 1) * v + b)] = ent.get((i * w + a, (i + 1) * v + b), 0) - x
        M = SparseIntMatrix(n * w, (n + 1) * v, {k: x for k, x in ent.items() if x})
        bases[n] = integer_kernel(M) if n else SparseIntMatrix.identity(v)
    solvers = {n: LatticeSolver(B) for n, B in bases.items()}
    levels = {-1: ChainComplex({0: w}) if w else ChainComplex({})}
    for n in range(N + 1):
        r = bases[n].ncols
        levels[n] = ChainComplex({0: r}) if r else ChainComplex({})

    def coord_map(n_src, n_tgt, pick):
        # pick[t] = source factor feeding target factor t
        B, Bt = bases[n_src], bases[n_tgt]
        cols = []
        for col in B.columns():
            vec = {}
            for t, s in enumerate(pick):
                for k in range(v):
                    x = col.get(s * v + k, 0)
                    if x:
                        vec[t * v + k] = x
            cols.append(solvers[n_tgt].solve(vec))
        M = SparseIntMatrix.from_columns(Bt.ncols, cols)
        return ChainMap(levels[n_src], levels[n_tgt], {0: M} if M.nrows and M.ncols else {}, check=False)

    faces = {0: [ChainMap(levels[0], levels[-1], {0: f} if v and w else {}, check=False)]}
    for n in range(1, N + 1):
        faces[n] = [coord_map(n, n - 1, [t if t < i else t + 1 for t in range(n)]) for i in range(n + 1)]
    degens = {n: [coord_map(n, n + 1, [t if t <= j else t - 1 for t in range(n + 2)]) for j in range(n + 1)]
              for n in range(N)}
    return AugChainFunctor(levels, faces, degens, "cech")


def inject_fault(F: AugChainFunctor, rng: random.Random) -> Tuple[AugChainFunctor, str]:
    """Copy of F with one entry of one face map (level >= 1) bumped by one."""
    cands = []
    for n in range(1, F.N + 1):
        for i, f in enumerate(F.faces[n]):
            for q in f.target.ranks:
                if f.source.rank(q) and f.target.rank(q):
                    cands.append((n, i, q))
    if not cands:
        raise ValueError("functor too small to perturb")
    n, i, q = rng.choice(cands)
    f = F.faces[n][i]
    a, b = rng.randrange(f.target.rank(q)), rng.randrange(f.source.rank(q))
    M = f[q]
    ent = dict(M.entries)
    ent[(a, b)] = ent.get((a, b), 0) + 1
    mats = dict(f.mats)
    mats[q] = SparseIntMatrix(M.nrows, M.ncols, {k: x for k, x in ent.items() if x})
    faces = {k: list(v) for k, v in F.faces.items()}
    faces[n][i] = ChainMap(f.source, f.target, mats, check=False)
    G = AugChainFunctor(F.levels, faces, F.degens, F.name + "+fault")
    return G, f"d_{i} at level {n}, chain degree {q}, entry ({a},{b})"
