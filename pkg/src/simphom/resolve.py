"""Free simplicial resolutions and the Eilenberg-MacLane object K(Q, n-1).

Two resolutions are provided:

* :func:`kan_loop_group` of a reduced simplicial set, used on nerves of
  finite groups.  Level n is free on the simplices of ``X_{n+1}`` that are
  not of the form ``s_0 y``; write ``t(x)`` for the generator of x.  Faces
  and degeneracies::

      d_0 t(x) = t(d_1 x) t(d_0 x)^-1,   d_i t(x) = t(d_{i+1} x)  (i >= 1),
      s_i t(x) = t(s_{i+1} x),           t(s_0 y) = 1.

* :func:`truncated_resolution` of a presentation: level m is free on the
  iterated degeneracies ``s_I(c)`` of cells c (generators in degree 0,
  relators in degree 1, optional user cells above), with faces computed by
  normalizing ``d_i s_I``.

:func:`cocycle_to_hom` turns a normalized rational n-cocycle on pi into a
simplicial homomorphism from the resolution to K(Q, n-1).
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .chainlab import SparseIntMatrix, nullspace_q, snf, solve_q
from .freegrp import AbelianGroup, FiniteGroup, FreeGroup, GroupHom, Word, cyclic_group
from .simp import (AugSimplicialGroup, SimplicialOp, TruncationError, check_simplicial_identities, retract)

__all__ = [
    "ReducedSimplicialSet", "nerve", "kan_loop_group", "Presentation", "truncated_resolution", "EMObject",
    "em_object", "Cocycle", "CocycleError", "SimplicialHom", "cocycle_to_hom", "lift_to_moore", "bar_chain_of_word",
    "generator_bar_chain", "load_presentation", "load_cocycle", "linear_cocycle", "bilinear_cocycle",
    "table_cocycle", "coboundary", "random_cochain",
]


# ---------------------------------------------------------------------------
# reduced simplicial sets


class ReducedSimplicialSet:
    """Truncated simplicial set with a single vertex.

    ``faces[m][i][k]`` and ``degens[m][j][k]`` are simplex indices.
    """

    def __init__(self, M: int, simplices: Sequence[Sequence[Any]], faces, degens, name: str = "X"):
        self.M = M
        self.simplices = [list(s) for s in simplices]
        self.index = [{x: k for k, x in enumerate(s)} for s in self.simplices]
        self.faces = faces
        self.degens = degens
        self.name = name
        if len(self.simplices[0]) != 1:
            raise ValueError("a reduced simplicial set has exactly one 0-simplex")
        # x is s_0-degenerate iff x = s_0 d_0 x
        self.s0_degenerate = [[False] * len(self.simplices[0])]
        for m in range(1, M + 1):
            flags = [degens[m - 1][0][faces[m][0][k]] == k for k in range(len(self.simplices[m]))]
            self.s0_degenerate.append(flags)

    @classmethod
    def from_functions(cls, M: int, simplices, face_fn: Callable[[Any, int], Any],
                       degen_fn: Callable[[Any, int], Any], name: str = "X") -> "ReducedSimplicialSet":
        simplices = [list(s) for s in simplices]
        index = [{x: k for k, x in enumerate(s)} for s in simplices]
        faces = [[]] + [[[index[m - 1][face_fn(x, i)] for x in simplices[m]] for i in range(m + 1)]
                        for m in range(1, M + 1)]
        degens = [[[index[m + 1][degen_fn(x, j)] for x in simplices[m]] for j in range(m + 1)] for m in range(M)]
        return cls(M, simplices, faces, degens, name)

    def count(self, m: int) -> int:
        return len(self.simplices[m])

    def nondegenerate(self, m: int) -> List[int]:
        if m == 0:
            return [0]
        img = set()
        for j in range(m):
            img.update(self.degens[m - 1][j])
        return [k for k in range(self.count(m)) if k not in img]

    def check(self) -> Optional[str]:
        """First violated simplicial identity on stored simplices, or None."""
        F, S = self.faces, self.degens
        for m in range(2, self.M + 1):
            for k in range(self.count(m)):
                for j in range(m + 1):
                    for i in range(j):
                        if F[m - 1][i][F[m][j][k]] != F[m - 1][j - 1][F[m][i][k]]:
                            return f"d{i}d{j} on {self.simplices[m][k]}"
        for m in range(self.M):
            for k in range(self.count(m)):
                for j in range(m + 1):
                    y = S[m][j][k]
                    for i in range(m + 2):
                        lhs = F[m + 1][i][y]
                        if i < j:
                            rhs = S[m - 1][j - 1][F[m][i][k]]
                        elif i in (j, j + 1):
                            rhs = k
                        else:
                            rhs = S[m - 1][j][F[m][i - 1][k]]
                        if lhs != rhs:
                            return f"d{i}s{j} on {self.simplices[m][k]}"
        for m in range(self.M - 1):
            for k in range(self.count(m)):
                for j in range(m + 1):
                    for i in range(j + 1):
                        if S[m + 1][i][S[m][j][k]] != S[m + 1][j + 1][S[m][i][k]]:
                            return f"s{i}s{j} on {self.simplices[m][k]}"
        return None


def nerve(G: FiniteGroup, M: int) -> ReducedSimplicialSet:
    """Bar construction: m-simplices are m-tuples; d_0 drops the first entry,
    d_i multiplies entries i and i+1, d_m drops the last; s_j inserts 1."""
    if M < 1:
        raise ValueError("nerve needs M >= 1")
    e = G.identity()

    def face(x, i):
        m = len(x)
        if i == 0:
            return x[1:]
        if i == m:
            return x[:-1]
        return x[:i - 1] + (G.mul(x[i - 1], x[i]),) + x[i + 1:]

    def degen(x, j):
        return x[:j] + (e,) + x[j:]

    simplices = [list(itertools.product(range(G.order), repeat=m)) for m in range(M + 1)]
    X = ReducedSimplicialSet.from_functions(M, simplices, face, degen, name=f"B{G.name}")
    X.group = G
    return X


def kan_loop_group(X: ReducedSimplicialSet, N: int, pi=None, edge_value: Optional[Callable[[Any], Any]] = None,
                   check: bool = True) -> AugSimplicialGroup:
    """Kan loop group of X truncated at level N (needs X through degree N+1).

    ``pi`` and ``edge_value`` (1-simplex -> element of pi) default to the
    group and the single entry when X is a nerve.
    """
    if X.M < N + 1:
        raise TruncationError(f"Kan loop group through level {N} needs X through degree {N + 1}, have {X.M}")
    if X.count(0) != 1:
        raise ValueError("X must be reduced")
    if pi is None:
        pi = getattr(X, "group", None)
        if pi is None:
            raise ValueError("pi must be supplied for a simplicial set that is not a nerve")
        edge_value = edge_value or (lambda x: x[0])
    gens = [[k for k in range(X.count(n + 1)) if not X.s0_degenerate[n + 1][k]] for n in range(N + 1)]
    pos = [{k: a for a, k in enumerate(g)} for g in gens]
    glabel = getattr(pi, "labels", None)

    def lab(x):
        if glabel is not None and isinstance(x, tuple):
            return "t(" + "|".join(glabel[v] for v in x) + ")"
        return f"t{x}"

    levels = [FreeGroup([lab(X.simplices[n + 1][k]) for k in gens[n]]) for n in range(N + 1)]

    def tau(n, k):
        a = pos[n].get(k)
        if a is None:
            return levels[n].identity()
        return levels[n].gen(a)

    faces: List[List[GroupHom]] = [[]]
    for n in range(1, N + 1):
        F = X.faces[n + 1]
        fl = []
        for i in range(n + 1):
            if i == 0:
                imgs = [tau(n - 1, F[1][k]) * tau(n - 1, F[0][k]).inverse() for k in gens[n]]
            else:
                imgs = [tau(n - 1, F[i + 1][k]) for k in gens[n]]
            fl.append(GroupHom(levels[n], levels[n - 1], imgs))
        faces.append(fl)
    degens = []
    for n in range(N):
        S = X.degens[n + 1]
        degens.append([GroupHom(levels[n], levels[n + 1], [tau(n + 1, S[i + 1][k]) for k in gens[n]])
                       for i in range(n + 1)])
    eps = GroupHom(levels[0], pi, [edge_value(X.simplices[1][k]) for k in gens[0]])
    meta = {"kind": "kan", "X": X, "simplices": [[X.simplices[n + 1][k] for k in gens[n]] for n in range(N + 1)]}
    G = AugSimplicialGroup(levels, faces, degens, pi, eps, name=f"G{X.name}", exact_through=N, meta=meta)
    if check:
        rep = check_simplicial_identities(G)
        if not rep:
            raise ValueError(f"Kan loop group failed identity check: {rep.describe()}")
    return G


# ---------------------------------------------------------------------------
# presentations


@dataclass
class Presentation:
    generators: List[str]
    relators: List[str]
    cells: Dict[int, List[dict]] = field(default_factory=dict)
    exact_through: Optional[int] = None
    relator_labels: Optional[List[str]] = None

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generator labels must be distinct")
        self.free = FreeGroup(self.generators)
        self.relator_words = [self.free.parse(r) if isinstance(r, str) else r for r in self.relators]
        for r, w in zip(self.relators, self.relator_words):
            if w.is_identity():
                raise ValueError(f"relator {r!r} reduces to the identity")
        if self.relator_labels is None:
            self.relator_labels = ["r" if len(self.relators) == 1 else f"r{k + 1}" for k in range(len(self.relators))]
        self.cells = {int(d): list(v) for d, v in (self.cells or {}).items()}
        if any(d < 2 for d in self.cells):
            raise ValueError("supplied cells must have degree >= 2")
        used = set(self.generators) | set(self.relator_labels)
        for d, cs in self.cells.items():
            for c in cs:
                if c["label"] in used:
                    raise ValueError(f"duplicate cell label {c['label']!r}")
                used.add(c["label"])
                if len(c["faces"]) != d + 1:
                    raise ValueError(f"cell {c['label']!r} of degree {d} needs {d + 1} faces")

    @classmethod
    def from_dict(cls, data: dict) -> "Presentation":
        return cls(list(data["generators"]), list(data.get("relators", [])), data.get("cells") or {},
                   data.get("exact_through"), data.get("relator_labels"))

    def abelianization(self):
        """(AbelianGroup, coordinates of each generator) via Smith normal form."""
        g = len(self.generators)
        R = SparseIntMatrix.from_columns(g, [{i: v for i, v in enumerate(w.exponent_sums()) if v}
                                             for w in self.relator_words])
        res = snf(R, transforms=True)
        d = res.diagonal
        torsion_rows = [i for i, x in enumerate(d) if x > 1]
        free_rows = list(range(len(d), g))
        A = AbelianGroup(len(free_rows), [d[i] for i in torsion_rows])
        U = res.U.to_dense() if g else []
        coords = [A.normalize([U[i][k] for i in free_rows] + [U[i][k] for i in torsion_rows]) for k in range(g)]
        return A, coords


def load_presentation(path) -> Presentation:
    return Presentation.from_dict(json.loads(Path(path).read_text()))


def _descending_tuples(m: int, length: int) -> List[Tuple[int, ...]]:
    return [tuple(sorted(c, reverse=True)) for c in itertools.combinations(range(m), length)]


def _degen_label(I: Tuple[int, ...], cell: str) -> str:
    return "".join(f"s{i}" for i in I) + f"({cell})" if I else cell


def truncated_resolution(P: Presentation, N: int, check: bool = True) -> AugSimplicialGroup:
    """Free simplicial group generated by the cells of P, truncated at level N."""
    cells: List[Tuple[str, int]] = [(a, 0) for a in P.generators] + [(r, 1) for r in P.relator_labels]
    for d in sorted(P.cells):
        cells += [(c["label"], d) for c in P.cells[d]]
    deg = dict(cells)
    gen_keys, gen_pos, levels = [], [], []
    for m in range(N + 1):
        keys = []
        for c, d in cells:
            if d <= m:
                keys += [(c, I) for I in _descending_tuples(m, m - d)]
        gen_keys.append(keys)
        gen_pos.append({k: a for a, k in enumerate(keys)})
        levels.append(FreeGroup([_degen_label(I, c) for c, I in keys]))
    # cell faces as words in level d-1
    cell_faces: Dict[str, List[Word]] = {}
    for k, w in enumerate(P.relator_words):
        cell_faces[P.relator_labels[k]] = [levels[0].identity(), w.__class__(levels[0], w.letters)]
    for d, cs in P.cells.items():
        if d > N:
            continue
        for c in cs:
            try:
                cell_faces[c["label"]] = [levels[d - 1].parse(f) for f in c["faces"]]
            except (KeyError, ValueError) as exc:
                raise ValueError(f"cell {c['label']!r}: cannot parse faces ({exc})") from None

    def degen_word(w: Word, I: Tuple[int, ...], m_src: int) -> Word:
        """Apply s_I to a word of level m_src."""
        if not I:
            return w
        m_tgt = m_src + len(I)
        out = []
        for g, e in w.letters:
            c, J = gen_keys[m_src][g]
            op = SimplicialOp.normalize([("s", i) for i in I] + [("s", j) for j in J])
            out.append((gen_pos[m_tgt][(c, op.degens)], e))
        return levels[m_tgt].word(out)

    def face_image(m: int, key, i: int) -> Word:
        c, I = key
        op = SimplicialOp.normalize([("d", i)] + [("s", j) for j in I])
        if not op.faces:
            return levels[m - 1].gen(gen_pos[m - 1][(c, op.degens)])
        (k,) = op.faces
        w = cell_faces[c][k]
        return degen_word(w, op.degens, deg[c] - 1)

    faces = [[]]
    for m in range(1, N + 1):
        faces.append([GroupHom(levels[m], levels[m - 1], [face_image(m, key, i) for key in gen_keys[m]])
                      for i in range(m + 1)])
    degens = []
    for m in range(N):
        fl = []
        for j in range(m + 1):
            imgs = []
            for c, I in gen_keys[m]:
                op = SimplicialOp.normalize([("s", j)] + [("s", i) for i in I])
                imgs.append(levels[m + 1].gen(gen_pos[m + 1][(c, op.degens)]))
            fl.append(GroupHom(levels[m], levels[m + 1], imgs))
        degens.append(fl)
    pi, coords = P.abelianization()
    eps = GroupHom(levels[0], pi, coords)
    if P.exact_through is not None:
        exact = P.exact_through
    elif not P.relators and not P.cells:
        exact = N
    else:
        exact = 1
    meta = {"kind": "presentation", "presentation": P, "keys": gen_keys, "pos": gen_pos, "cell_degree": deg}
    G = AugSimplicialGroup(levels, faces, degens, pi, eps, name="Gamma", exact_through=min(exact, N), meta=meta)
    if check:
        rep = check_simplicial_identities(G)
        if not rep:
            raise ValueError(f"prescribed cell faces violate the simplicial identities: {rep.describe()}")
    return G


# ---------------------------------------------------------------------------
# comparison with bar chains and lifts into the Moore subgroup


def bar_chain_of_word(pi, letters: Sequence[Tuple[Any, int]]) -> Dict[Tuple[Any, Any], int]:
    """Normalized bar 2-chain of a word whose letters already live in pi.

    A letter ``g`` read at prefix p contributes ``+(p, g)``; ``g^-1`` read
    at prefix p contributes ``-(p g^-1, g)``.  If the word is trivial in pi
    the result is a cycle.
    """
    chain: Dict[Tuple[Any, Any], int] = {}
    p = pi.identity()
    for g, e in letters:
        step = 1 if e > 0 else -1
        for _ in range(abs(e)):
            if step > 0:
                key, p_next = (p, g), pi.mul(p, g)
            else:
                p_next = pi.mul(p, pi.inv(g))
                key = (p_next, g)
            if not (pi.is_identity(key[0]) or pi.is_identity(key[1])):
                chain[key] = chain.get(key, 0) + step
            p = p_next
    return {k: v for k, v in chain.items() if v}


def generator_bar_chain(G: AugSimplicialGroup, m: int, k: int) -> Dict[tuple, int]:
    """Normalized bar (m+1)-chain attached to generator k of level m."""
    kind = G.meta.get("kind")
    if kind == "kan":
        x = G.meta["simplices"][m][k]
        G_pi = G.pi
        if any(G_pi.is_identity(v) for v in x):
            return {}
        return {tuple(x): 1}
    if kind == "presentation":
        c, I = G.meta["keys"][m][k]
        if I:
            return {}
        d = G.meta["cell_degree"][c]
        if d == 0:
            g = G.eps(G.levels[0].gen(k))
            return {} if G.pi.is_identity(g) else {(g,): 1}
        if d == 1:
            P: Presentation = G.meta["presentation"]
            w = P.relator_words[P.relator_labels.index(c)]
            lets = [(G.eps(G.levels[0].gen(a)), e) for a, e in w.letters]
            return bar_chain_of_word(G.pi, lets)
        raise NotImplementedError("comparison with bar chains is implemented for cells of degree <= 1")
    raise ValueError("resolution carries no comparison data")


def lift_to_moore(G: AugSimplicialGroup, w: Word, certificate: Optional[Sequence[Tuple[Any, int, int]]] = None) -> Word:
    """An element z of level 1 with ``d_0 z = 1`` and ``d_1 z = w``.

    ``w`` must map to 1 in pi.  For Kan loop groups the lift is built by
    telescoping along prefixes.  For presentation resolutions a certificate
    ``[(u, relator_index, sign), ...]`` with ``w = prod u r^sign u^-1`` is
    required; each factor lifts to ``s_0(u) r^sign s_0(u)^-1``.
    """
    if not G.pi.is_identity(G.eps(w)):
        raise ValueError("word is not trivial in pi")
    L1 = G.levels[1]
    kind = G.meta.get("kind")
    if kind == "kan":
        X = G.meta["X"]
        pi = G.pi
        pos1 = {x: a for a, x in enumerate(G.meta["simplices"][1])}

        def c(g, h):
            a = pos1.get((g, h))
            t = L1.identity() if a is None else L1.gen(a)
            return retract(G, 1, 0, t)

        z = L1.identity()
        p = pi.identity()
        for a, e in w.letters:
            g = G.eps(G.levels[0].gen(a))
            for _ in range(abs(e)):
                if e > 0:
                    z = z * c(p, g)
                    p = pi.mul(p, g)
                else:
                    q = pi.mul(p, pi.inv(g))
                    z = z * c(q, g).inverse()
                    p = q
    elif kind == "presentation":
        if certificate is None:
            raise ValueError("presentation resolutions need a certificate to lift a word")
        P: Presentation = G.meta["presentation"]
        L0 = G.levels[0]
        z = L1.identity()
        for u, ridx, sign in certificate:
            u = L0.parse(u) if isinstance(u, str) else u
            su = G.degen(0, 0, u)
            r = L1.gen(G.meta["pos"][1][(P.relator_labels[ridx], ())])
            z = z * su * (r if sign > 0 else r.inverse()) * su.inverse()
    else:
        raise ValueError("resolution carries no lifting data")
    if not G.face(1, 0, z).is_identity():
        raise AssertionError("lift is not in the Moore subgroup")
    if G.face(1, 1, z) != w:
        raise ValueError(f"certificate does not reproduce the word: d_1 z = {G.face(1, 1, z)}, expected {w}")
    return z


# ---------------------------------------------------------------------------
# K(Q, n-1)


class EMObject:
    """K(Q, n-1): level m has basis the descending tuples I (the iterated
    degeneracies ``s_I`` from n-1 to m); levels below n-1 vanish."""

    def __init__(self, n: int, M: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n, self.M = n, M
        self.bases = {}
        for m in range(n - 1, M + 1):
            self.bases[m] = _descending_tuples(m, m - n + 1)
        self.pos = {m: {I: a for a, I in enumerate(b)} for m, b in self.bases.items()}

    def basis(self, m: int) -> List[Tuple[int, ...]]:
        return self.bases.get(m, [])

    def rank(self, m: int) -> int:
        return len(self.basis(m))

    def face_basis(self, m: int, i: int, I: Tuple[int, ...]) -> Optional[Tuple[int, ...]]:
        op = SimplicialOp.normalize([("d", i)] + [("s", j) for j in I])
        if op.faces:
            return None
        return op.degens

    def face(self, m: int, i: int, v: Dict[Tuple[int, ...], Fraction]) -> Dict[Tuple[int, ...], Fraction]:
        out: Dict[Tuple[int, ...], Fraction] = {}
        for I, c in v.items():
            J = self.face_basis(m, i, I)
            if J is not None:
                out[J] = out.get(J, 0) + c
        return {k: x for k, x in out.items() if x}

    def degen(self, m: int, j: int, v):
        out = {}
        for I, c in v.items():
            J = SimplicialOp.normalize([("s", j)] + [("s", i) for i in I]).degens
            out[J] = out.get(J, 0) + c
        return {k: x for k, x in out.items() if x}

    def face_matrix(self, m: int, i: int) -> SparseIntMatrix:
        ent = {}
        for a, I in enumerate(self.basis(m)):
            J = self.face_basis(m, i, I)
            if J is not None:
                ent[(self.pos[m - 1][J], a)] = 1
        return SparseIntMatrix(self.rank(m - 1), self.rank(m), ent)


def em_object(n: int, M: int) -> EMObject:
    return EMObject(n, M)


# ---------------------------------------------------------------------------
# cocycles


class CocycleError(ValueError):
    pass


class Cocycle:
    """Normalized inhomogeneous rational n-cochain on pi, ``c(g_1, ..., g_n)``."""

    def __init__(self, pi, n: int, func: Callable[[tuple], Any], name: str = "c"):
        self.pi, self.n, self.func, self.name = pi, n, func, name

    def __call__(self, args: Sequence[Any]) -> Fraction:
        args = tuple(args)
        if len(args) != self.n:
            raise CocycleError(f"{self.name} takes {self.n} arguments, got {len(args)}")
        if any(self.pi.is_identity(g) for g in args):
            return Fraction(0)
        return Fraction(self.func(args))

    def coboundary_value(self, args: Sequence[Any]) -> Fraction:
        """``(delta c)(g_0, ..., g_n)``."""
        pi, n = self.pi, self.n
        g = tuple(args)
        v = self(g[1:])
        for i in range(1, n + 1):
            v += (-1) ** i * self(g[:i - 1] + (pi.mul(g[i - 1], g[i]),) + g[i + 1:])
        v += (-1) ** (n + 1) * self(g[:-1])
        return v

    def raw_value(self, args) -> Fraction:
        return Fraction(self.func(tuple(args)))

    def check(self, rng: Optional[random.Random] = None, samples: int = 200, bound: int = 3) -> Optional[tuple]:
        """First tuple on which normalization or the cocycle identity fails."""
        pi = self.pi
        finite = isinstance(pi, FiniteGroup) or (isinstance(pi, AbelianGroup) and pi.is_finite())
        if finite:
            elems = list(pi.elements())
            tuples = itertools.product(elems, repeat=self.n + 1)
        else:
            rng = rng or random.Random(0)
            tuples = (tuple(_sample(pi, rng, bound) for _ in range(self.n + 1)) for _ in range(samples))
        for t in tuples:
            for k in range(self.n):
                a = t[:self.n]
                if pi.is_identity(a[k]) and self.raw_value(a) != 0:
                    return a
            if self.coboundary_value(t) != 0:
                return t
        return None

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle(self.pi, self.n, lambda a: self(a) + other(a), f"({self.name}+{other.name})")

    def scale(self, c) -> "Cocycle":
        c = Fraction(c)
        return Cocycle(self.pi, self.n, lambda a: c * self(a), f"{c}*{self.name}")


def _sample(pi, rng, bound):
    if isinstance(pi, AbelianGroup):
        return pi.normalize([rng.randint(-bound, bound) for _ in range(pi.width)])
    if isinstance(pi, FiniteGroup):
        return rng.randrange(pi.order)
    raise TypeError(f"cannot sample {pi}")


def linear_cocycle(pi: AbelianGroup, v: Sequence[Any]) -> Cocycle:
    """1-cocycle ``c(g) = v . g`` on the free part of an abelian group."""
    v = [Fraction(x) for x in v]
    if len(v) != pi.free_rank:
        raise CocycleError(f"need {pi.free_rank} coefficients")
    return Cocycle(pi, 1, lambda a: sum((x * y for x, y in zip(v, a[0][:pi.free_rank])), Fraction(0)), "linear")


def bilinear_cocycle(pi: AbelianGroup, B: Sequence[Sequence[Any]]) -> Cocycle:
    """2-cocycle ``c(x, y) = x^T B y`` on a free abelian group."""
    if pi.torsion:
        raise CocycleError("bilinear cocycles need a free abelian group")
    B = [[Fraction(x) for x in row] for row in B]
    r = pi.free_rank

    def f(a):
        x, y = a
        return sum((x[i] * B[i][j] * y[j] for i in range(r) for j in range(r)), Fraction(0))

    return Cocycle(pi, 2, f, "bilinear")


def table_cocycle(pi, n: int, table: Dict[tuple, Any]) -> Cocycle:
    t = {tuple(k): Fraction(v) for k, v in table.items()}
    return Cocycle(pi, n, lambda a: t.get(a, Fraction(0)), "table")


def random_cochain(pi, n: int, rng: random.Random) -> Callable[[tuple], Fraction]:
    """A random normalized n-cochain (n >= 1) with deterministic values."""
    if isinstance(pi, AbelianGroup) and not pi.is_finite():
        r = pi.width
        # random polynomial of degree <= 2 in all coordinates, vanishing when any argument is 0
        coeffs = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(r * n)] for _ in range(3)]

        def f(a):
            flat = [x for g in a for x in g]
            val = sum((c * x for c, x in zip(coeffs[0], flat)), Fraction(0))
            val += sum((c * x * x for c, x in zip(coeffs[1], flat)), Fraction(0))
            val += coeffs[2][0] * math.prod(sum(g) + 1 for g in a)
            return val
        return f
    seed = rng.getrandbits(32)
    cache: Dict[tuple, Fraction] = {}

    def g(a):
        if a not in cache:
            cache[a] = Fraction(random.Random(f"{seed}:{a!r}").randint(-4, 4))
        return cache[a]
    return g


def coboundary(pi, n: int, b: Callable[[tuple], Any]) -> Cocycle:
    """``delta b`` for a normalized (n-1)-cochain b (n >= 2); zero for n = 1."""
    if n == 1:
        return Cocycle(pi, 1, lambda a: 0, "0")
    bb = Cocycle(pi, n - 1, b, "b")

    def f(a):
        v = bb(a[1:])
        for i in range(1, n):
            v += (-1) ** i * bb(a[:i - 1] + (pi.mul(a[i - 1], a[i]),) + a[i + 1:])
        v += (-1) ** n * bb(a[:-1])
        return v

    return Cocycle(pi, n, f, "delta b")


def load_cocycle(path_or_data, pi, parse_element: Callable[[str], Any]) -> Cocycle:
    """Cocycle file: ``{"degree": n, "normalized": true, ...}`` with either
    ``"values": [{"args": [...], "value": q}, ...]`` (unlisted tuples are 0),
    ``"linear": [...]`` (n = 1) or ``"bilinear": [[...]]`` (n = 2)."""
    if isinstance(path_or_data, (str, Path)):
        data = json.loads(Path(path_or_data).read_text())
    else:
        data = path_or_data
    try:
        n = int(data["degree"])
    except (KeyError, TypeError, ValueError):
        raise CocycleError("cocycle file needs an integer 'degree'") from None
    if not data.get("normalized", False):
        raise CocycleError("only normalized cocycles are supported (set \"normalized\": true)")
    if "linear" in data:
        if n != 1:
            raise CocycleError("'linear' cocycles have degree 1")
        return linear_cocycle(pi, data["linear"])
    if "bilinear" in data:
        if n != 2:
            raise CocycleError("'bilinear' cocycles have degree 2")
        return bilinear_cocycle(pi, data["bilinear"])
    table = {}
    for entry in data.get("values", []):
        args = tuple(parse_element(a) for a in entry["args"])
        if len(args) != n:
            raise CocycleError(f"entry {entry} has {len(args)} arguments, expected {n}")
        table[args] = Fraction(str(entry["value"]))
    return table_cocycle(pi, n, table)


# ---------------------------------------------------------------------------
# simplicial homomorphisms into K(Q, n-1)


@dataclass
class SimplicialHom:
    source: AugSimplicialGroup
    target: EMObject
    images: Dict[int, List[Dict[Tuple[int, ...], Fraction]]]

    def apply(self, m: int, w: Word) -> Dict[Tuple[int, ...], Fraction]:
        out: Dict[Tuple[int, ...], Fraction] = {}
        imgs = self.images.get(m)
        if imgs is None:
            return out
        for g, e in w.letters:
            for I, c in imgs[g].items():
                out[I] = out.get(I, 0) + e * c
        return {k: v for k, v in out.items() if v}

    def check_commutes(self) -> Optional[str]:
        G, K = self.source, self.target
        for m in sorted(self.images):
            for k, g in enumerate(G.levels[m].generators()):
                if m >= 1:
                    for i in range(m + 1):
                        if K.face(m, i, self.apply(m, g)) != self.apply(m - 1, G.face(m, i, g)):
                            return f"d{i} on {G.gen_label(m, k)} (level {m})"
                if m + 1 in self.images:
                    for j in range(m + 1):
                        if K.degen(m, j, self.apply(m, g)) != self.apply(m + 1, G.degen(m, j, g)):
                            return f"s{j} on {G.gen_label(m, k)} (level {m})"
        return None


def cocycle_to_hom(G: AugSimplicialGroup, c: Cocycle, M: Optional[int] = None, check_cocycle: bool = True,
                   rng: Optional[random.Random] = None) -> SimplicialHom:
    """Simplicial homomorphism ``phi_c : G -> K(Q, n-1)``.

    On level n-1 a generator goes to ``c`` evaluated on its bar chain; on
    levels below it is zero, and on level m >= n the value is the unique
    solution of ``d_i phi(g) = phi(d_i g)``.
    """
    n = c.n
    M = G.N if M is None else M
    if M > G.N:
        raise TruncationError(f"M={M} exceeds truncation {G.N}")
    if n - 1 > M:
        raise TruncationError(f"degree {n} cocycle needs level {n - 1}")
    if check_cocycle:
        bad = c.check(rng)
        if bad is not None:
            raise CocycleError(f"delta c != 0 or c not normalized at {bad}")
    K = EMObject(n, M)
    images: Dict[int, List[Dict]] = {}
    for m in range(0, n - 1):
        images[m] = [{} for _ in range(G.levels[m].rank)]
    top = ()
    vals = []
    for k in range(G.levels[n - 1].rank):
        ch = generator_bar_chain(G, n - 1, k)
        v = sum((coef * c(t) for t, coef in ch.items()), Fraction(0))
        vals.append({top: v} if v else {})
    images[n - 1] = vals
    hom = SimplicialHom(G, K, images)
    for m in range(n, M + 1):
        A = _stack([K.face_matrix(m, i) for i in range(m + 1)])
        if nullspace_q(A):
            raise CocycleError(f"face system of K(Q,{n - 1}) at level {m} is not injective")
        lvl = []
        for k, g in enumerate(G.levels[m].generators()):
            rhs, off = {}, 0
            for i in range(m + 1):
                fv = hom.apply(m - 1, G.face(m, i, g))
                for I, x in fv.items():
                    rhs[off + K.pos[m - 1][I]] = x
                off += K.rank(m - 1)
            try:
                sol = solve_q(A, rhs)
            except ValueError:
                raise CocycleError(f"no simplicial extension at level {m}, generator {G.gen_label(m, k)}: "
                                   "the cochain is not a cocycle on this resolution") from None
            lvl.append({K.basis(m)[a]: x for a, x in sol.items() if x})
        images[m] = lvl
    bad = hom.check_commutes()
    if bad is not None:
        raise CocycleError(f"phi_c does not commute with {bad}")
    return hom


def _stack(mats: Sequence[SparseIntMatrix]) -> SparseIntMatrix:
    from .chainlab import vstack
    return vstack(mats, mats[0].ncols)
