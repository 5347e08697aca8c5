"""Simplicial operators, truncated simplicial groups and the Moore filtration.

A truncated simplicial group stores levels ``0..N`` together with face and
degeneracy homomorphisms.  Elements are whatever the level groups use
(:class:`~simphom.freegrp.Word`, finite-group indices, abelian tuples).

The retraction recursion

    r^{-1}_n(g) = g,    r^j_n(g) = r^{j-1}_n(g) * (s_j d_j r^{j-1}_n(g))^{-1}

pushes any element into the Moore subgroup ``G^j_n`` (kernels of the faces
``d_0 .. d_j``), and ``d_n r^{n-1}_n(g)`` is computed by the recursion
``A_0 = r^{n-2}_{n-1}(d_0 g)``, ``A_i = r^{n-2}_{n-1}(d_i g) A_{i-1}^{-1}``.
"""
from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .freegrp import (AbelianGroup, AbelianHom, FiniteGroup, FreeGroup, GroupHom, GroupRingElt, TableHom, Word,
                      identity_hom)

__all__ = [
    "SimplicialOp", "TruncSimplicialGroup", "AugSimplicialGroup", "IdentityReport", "TruncationError",
    "SimplicialIdentityError", "MooreIdealError", "check_simplicial_identities", "moore_member", "retract",
    "lam", "boundary_of_retract", "homotopy_groups", "HomotopyGroupInfo", "constant_simplicial_group",
    "dold_kan_finite", "SimplicialGroupRing", "moore_square_witness", "random_word", "random_moore_ring_element",
    "surjections", "dk_act", "finite_abelian_invariants",
]


class TruncationError(ValueError):
    pass


class SimplicialIdentityError(ValueError):
    pass


class MooreIdealError(ValueError):
    def __init__(self, msg: str, face: int):
        super().__init__(msg)
        self.face = face


# ---------------------------------------------------------------------------
# operator calculus

_SYM = re.compile(r"([sd])_?(\d+)")


def _rewrite(a: Tuple[str, int], b: Tuple[str, int]):
    """Rewrite the adjacent pair ``a b`` (b applied first) or return None if ordered."""
    (ka, i), (kb, j) = a, b
    if ka == "d" and kb == "s":
        if i < j:
            return [("s", j - 1), ("d", i)]
        if i in (j, j + 1):
            return []
        return [("s", j), ("d", i - 1)]
    if ka == "s" and kb == "s" and i <= j:
        return [("s", j + 1), ("s", i)]
    if ka == "d" and kb == "d" and i >= j:
        return [("d", j), ("d", i + 1)]
    return None


class SimplicialOp:
    """A composite ``s_{j1} .. s_{jp} d_{i1} .. d_{iq}`` in normal form.

    Composites read left to right as maps, so the rightmost symbol acts first.
    Normal form: degeneracy indices strictly descending, face indices strictly
    ascending.
    """

    __slots__ = ("degens", "faces")

    def __init__(self, degens: Sequence[int] = (), faces: Sequence[int] = ()):
        degens, faces = tuple(degens), tuple(faces)
        if any(a <= b for a, b in zip(degens, degens[1:])):
            raise ValueError(f"degeneracies must descend: {degens}")
        if any(a >= b for a, b in zip(faces, faces[1:])):
            raise ValueError(f"faces must ascend: {faces}")
        self.degens, self.faces = degens, faces

    @classmethod
    def normalize(cls, symbols: Sequence[Tuple[str, int]]) -> "SimplicialOp":
        syms = list(symbols)
        changed = True
        while changed:
            changed = False
            k = 0
            while k < len(syms) - 1:
                r = _rewrite(syms[k], syms[k + 1])
                if r is None:
                    k += 1
                    continue
                syms[k:k + 2] = r
                changed = True
                k = max(k - 1, 0)
        return cls([i for t, i in syms if t == "s"], [i for t, i in syms if t == "d"])

    @classmethod
    def parse(cls, text: str) -> "SimplicialOp":
        syms = [(m.group(1), int(m.group(2))) for m in _SYM.finditer(text)]
        if "".join(f"{t}{i}" for t, i in syms) != re.sub(r"[\s_*.]", "", text):
            raise ValueError(f"cannot parse operator {text!r}")
        return cls.normalize(syms)

    @classmethod
    def face(cls, i: int) -> "SimplicialOp":
        return cls((), (i,))

    @classmethod
    def degeneracy(cls, j: int) -> "SimplicialOp":
        return cls((j,), ())

    def symbols(self) -> List[Tuple[str, int]]:
        return [("s", j) for j in self.degens] + [("d", i) for i in self.faces]

    def __mul__(self, other: "SimplicialOp") -> "SimplicialOp":
        """``self o other``: apply ``other`` first."""
        return SimplicialOp.normalize(self.symbols() + other.symbols())

    def __eq__(self, other):
        return isinstance(other, SimplicialOp) and (self.degens, self.faces) == (other.degens, other.faces)

    def __hash__(self):
        return hash((self.degens, self.faces))

    def __repr__(self):
        return "".join(f"{t}{i}" for t, i in self.symbols()) or "id"

    def is_identity(self) -> bool:
        return not self.degens and not self.faces

    def shift(self) -> int:
        """Change of simplicial degree."""
        return len(self.degens) - len(self.faces)

    def valid_at(self, n: int) -> bool:
        m = n
        for i in reversed(self.faces):
            if not 0 <= i <= m or m == 0:
                return False
            m -= 1
        for j in reversed(self.degens):
            if not 0 <= j <= m:
                return False
            m += 1
        return True

    def apply(self, G: "TruncSimplicialGroup", n: int, x):
        return apply_symbols(G, n, x, self.symbols())


def apply_symbols(G: "TruncSimplicialGroup", n: int, x, symbols: Sequence[Tuple[str, int]]):
    """Apply an arbitrary (unnormalized) composite, rightmost symbol first."""
    m = n
    for t, i in reversed(list(symbols)):
        if t == "d":
            x = G.face(m, i, x)
            m -= 1
        else:
            x = G.degen(m, i, x)
            m += 1
    return x


# ---------------------------------------------------------------------------
# simplicial groups


@dataclass
class IdentityReport:
    ok: bool
    identity: Optional[str] = None
    level: Optional[int] = None
    generator: Any = None
    lhs: Any = None
    rhs: Any = None
    checked: int = 0

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return f"pass ({self.checked} identities checked on generators)"
        return (f"violated {self.identity} at level {self.level} on generator {self.generator}: "
                f"{self.lhs} != {self.rhs}")


class TruncSimplicialGroup:
    """Levels ``0..N`` with faces ``faces[n][i]`` (level n -> n-1) and
    degeneracies ``degens[n][j]`` (level n -> n+1)."""

    def __init__(self, levels: Sequence[Any], faces: Sequence[Sequence[Any]], degens: Sequence[Sequence[Any]],
                 name: str = "G", labels: Optional[Sequence[Sequence[str]]] = None):
        self.levels = list(levels)
        self.N = len(self.levels) - 1
        if self.N < 0:
            raise ValueError("need at least level 0")
        self.faces = [list(f) for f in faces]
        self.degens = [list(s) for s in degens]
        if len(self.faces) != self.N + 1 or len(self.degens) != self.N:
            raise ValueError("faces must have N+1 entries (level 0 empty) and degens N entries")
        for n in range(1, self.N + 1):
            if len(self.faces[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} faces")
        for n in range(self.N):
            if len(self.degens[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} degeneracies")
        self.name = name
        self.labels = labels

    def __repr__(self):
        return f"TruncSimplicialGroup({self.name}, N={self.N})"

    def level(self, n: int):
        self._check_level(n)
        return self.levels[n]

    def _check_level(self, n: int):
        if not 0 <= n <= self.N:
            raise TruncationError(f"level {n} outside truncation 0..{self.N}")

    def face(self, n: int, i: int, x):
        self._check_level(n)
        if n == 0 or not 0 <= i <= n:
            raise TruncationError(f"no face d_{i} on level {n}")
        return self.faces[n][i](x)

    def degen(self, n: int, j: int, x):
        if not 0 <= n < self.N:
            raise TruncationError(f"degeneracy out of level {n} exceeds truncation {self.N}")
        if not 0 <= j <= n:
            raise TruncationError(f"no degeneracy s_{j} on level {n}")
        return self.degens[n][j](x)

    def gen_label(self, n: int, k: int) -> str:
        if self.labels is not None:
            return self.labels[n][k]
        L = self.levels[n]
        if isinstance(L, FreeGroup):
            return L.names[k]
        return str(L.generators()[k])

    def with_degeneracy_image(self, n: int, j: int, k: int, image) -> "TruncSimplicialGroup":
        """Copy with the image of generator ``k`` under ``s_j`` on level ``n`` replaced."""
        degens = [list(s) for s in self.degens]
        degens[n][j] = degens[n][j].with_image(k, image)
        return self._copy(degens=degens)

    def with_face_image(self, n: int, i: int, k: int, image) -> "TruncSimplicialGroup":
        faces = [list(f) for f in self.faces]
        faces[n][i] = faces[n][i].with_image(k, image)
        return self._copy(faces=faces)

    def _copy(self, faces=None, degens=None):
        return TruncSimplicialGroup(self.levels, faces or self.faces, degens or self.degens, self.name, self.labels)

    def truncate(self, M: int) -> "TruncSimplicialGroup":
        if M > self.N:
            raise TruncationError(f"cannot extend truncation {self.N} to {M}")
        return TruncSimplicialGroup(self.levels[:M + 1], self.faces[:M + 1], self.degens[:M], self.name,
                                    self.labels[:M + 1] if self.labels else None)


class AugSimplicialGroup(TruncSimplicialGroup):
    """A truncated simplicial group with level ``-1`` (``pi``) and ``eps``."""

    def __init__(self, levels, faces, degens, pi, eps, name: str = "G", labels=None,
                 exact_through: Optional[int] = None, meta: Optional[dict] = None):
        super().__init__(levels, faces, degens, name, labels)
        self.pi = pi
        self.eps = eps
        # degrees n for which H_n(B pi) computed from this resolution is certified
        self.exact_through = self.N if exact_through is None else exact_through
        self.meta = dict(meta or {})

    def _copy(self, faces=None, degens=None):
        return AugSimplicialGroup(self.levels, faces or self.faces, degens or self.degens, self.pi, self.eps,
                                  self.name, self.labels, self.exact_through, self.meta)

    def truncate(self, M: int) -> "AugSimplicialGroup":
        base = super().truncate(M)
        return AugSimplicialGroup(base.levels, base.faces, base.degens, self.pi, self.eps, self.name, base.labels,
                                  min(self.exact_through, M), self.meta)

    def augment(self, x):
        return self.eps(x)


def check_simplicial_identities(G: TruncSimplicialGroup) -> IdentityReport:
    """Check every simplicial identity on the generators of every level."""
    count = 0
    for n in range(G.N + 1):
        L = G.levels[n]
        for k, g in enumerate(L.generators()):
            lab = G.gen_label(n, k)
            # d_i d_j = d_{j-1} d_i  (i < j), level n >= 2
            if n >= 2:
                for j in range(n + 1):
                    dj = G.face(n, j, g)
                    for i in range(j):
                        lhs = G.face(n - 1, i, dj)
                        rhs = G.face(n - 1, j - 1, G.face(n, i, g))
                        count += 1
                        if lhs != rhs:
                            return IdentityReport(False, f"d{i}d{j} = d{j - 1}d{i}", n, lab, lhs, rhs, count)
            if n < G.N:
                for j in range(n + 1):
                    sj = G.degen(n, j, g)
                    for i in range(n + 2):
                        lhs = G.face(n + 1, i, sj)
                        if i < j:
                            rhs, name = G.degen(n - 1, j - 1, G.face(n, i, g)), f"d{i}s{j} = s{j - 1}d{i}"
                        elif i in (j, j + 1):
                            rhs, name = g, f"d{i}s{j} = id"
                        else:
                            rhs, name = G.degen(n - 1, j, G.face(n, i - 1, g)), f"d{i}s{j} = s{j}d{i - 1}"
                        count += 1
                        if lhs != rhs:
                            return IdentityReport(False, name, n, lab, lhs, rhs, count)
            if n < G.N - 1:
                for j in range(n + 1):
                    sj = G.degen(n, j, g)
                    for i in range(j + 1):
                        lhs = G.degen(n + 1, i, sj)
                        rhs = G.degen(n + 1, j + 1, G.degen(n, i, g))
                        count += 1
                        if lhs != rhs:
                            return IdentityReport(False, f"s{i}s{j} = s{j + 1}s{i}", n, lab, lhs, rhs, count)
    if isinstance(G, AugSimplicialGroup) and G.N >= 1:
        P = G.pi
        for k, g in enumerate(G.levels[1].generators()):
            lhs = G.eps(G.face(1, 0, g))
            rhs = G.eps(G.face(1, 1, g))
            count += 1
            if lhs != rhs:
                return IdentityReport(False, "eps d0 = eps d1", 1, G.gen_label(1, k), lhs, rhs, count)
        hit = {G.eps(g) for g in G.levels[0].generators()}
        for p in P.generators():
            count += 1
            if p not in hit and not _in_generated(P, hit, p):
                return IdentityReport(False, "eps surjective", 0, None, p, "not hit", count)
    return IdentityReport(True, checked=count)


def _in_generated(P, images, p) -> bool:
    """Is ``p`` in the subgroup generated by ``images``?  Only decidable for finite/abelian P."""
    if isinstance(P, FiniteGroup):
        seen = {P.identity()}
        frontier = [P.identity()]
        imgs = list(images)
        while frontier:
            x = frontier.pop()
            for g in imgs:
                for y in (P.mul(x, g), P.mul(x, P.inv(g))):
                    if y not in seen:
                        seen.add(y)
                        frontier.append(y)
        return p in seen
    if isinstance(P, AbelianGroup):
        from .chainlab import SparseIntMatrix, snf
        imgs = list(images)
        cols = [list(v) for v in imgs] + [[0] * P.width for _ in P.torsion]
        for k, d in enumerate(P.torsion):
            cols[len(imgs) + k][P.free_rank + k] = d
        A = SparseIntMatrix.from_columns(P.width, [{i: c[i] for i in range(P.width) if c[i]} for c in cols])
        B = SparseIntMatrix.from_columns(P.width, [{i: c[i] for i in range(P.width) if c[i]}
                                                   for c in cols + [list(p)]])
        return snf(A).diagonal == snf(B).diagonal
    return False


# ---------------------------------------------------------------------------
# Moore filtration and retractions


def moore_member(G: TruncSimplicialGroup, n: int, j: int, g) -> bool:
    """``g in G^j_n``: faces ``d_0 .. d_j`` of g are trivial."""
    G._check_level(n)
    if not -1 <= j <= n:
        raise TruncationError(f"Moore index j={j} outside -1..{n}")
    if j >= 0 and n == 0:
        # level 0 has no faces; only the augmentation could serve as d_0
        if isinstance(G, AugSimplicialGroup):
            return G.pi.is_identity(G.eps(g))
        raise TruncationError("level 0 has no faces")
    L = G.levels[n - 1] if n else None
    return all(L.is_identity(G.face(n, i, g)) for i in range(j + 1))


def lam(G: TruncSimplicialGroup, j: int, n: int, g):
    """``lambda^j_n(g) = s_j d_j g``."""
    if not 0 <= j < n:
        raise TruncationError(f"lambda^{j}_{n} needs 0 <= j < n")
    return G.degen(n - 1, j, G.face(n, j, g))


def retract(G: TruncSimplicialGroup, n: int, j: int, g):
    """``r^j_n(g)``, an element of ``G^j_n``."""
    if j >= n:
        raise TruncationError(f"retract needs j < n (got j={j}, n={n})")
    G._check_level(n)
    L = G.levels[n]
    r = g
    for k in range(j + 1):
        r = L.mul(r, L.inv(lam(G, k, n, r)))
    return r


def boundary_of_retract(G: TruncSimplicialGroup, n: int, g, check: bool = True, strict: bool = False):
    """``A_n(g)``, the recursive description of ``d_n r^{n-1}_n(g)``.

    As words the two agree for ``n <= 2``.  From ``n = 3`` on they agree
    only modulo the normal subgroup of ``G^{n-2}_{n-1}`` generated by
    commutators ``[x, s_i z]``, which is all the chain map ``E -> D-bar``
    needs.  ``check`` asserts what is decidable: word equality for
    ``n <= 2``; for larger n, that both sides lie in ``G^{n-2}_{n-1}`` and
    have the same abelianization.  ``strict`` demands word equality always.
    """
    if n < 1:
        raise TruncationError("boundary_of_retract needs n >= 1")
    G._check_level(n)
    L = G.levels[n - 1]

    def r_low(x):
        return x if n - 2 < 0 else retract(G, n - 1, n - 2, x)

    A = r_low(G.face(n, 0, g))
    for i in range(1, n + 1):
        A = L.mul(r_low(G.face(n, i, g)), L.inv(A))
    if check or strict:
        lhs = G.face(n, n, retract(G, n, n - 1, g))
        if strict or n <= 2:
            if lhs != A:
                raise SimplicialIdentityError(f"d_{n} r^{n - 1}_{n}(g) = {lhs} but A_{n}(g) = {A}")
        else:
            if not (moore_member(G, n - 1, n - 2, lhs) and moore_member(G, n - 1, n - 2, A)):
                raise SimplicialIdentityError(f"A_{n}(g) or d_{n} r^{n - 1}_{n}(g) left G^{n - 2}_{n - 1}")
            if L.abelian_coords(lhs) != L.abelian_coords(A):
                raise SimplicialIdentityError(f"abelianized d_{n} r^{n - 1}_{n}(g) != A_{n}(g)")
    return A


# ---------------------------------------------------------------------------
# homotopy groups of levelwise finite simplicial groups


@dataclass
class HomotopyGroupInfo:
    degree: int
    order: int
    abelian: bool
    invariants: Optional[List[int]]
    group: Optional[FiniteGroup] = None

    def is_trivial(self) -> bool:
        return self.order == 1

    def __str__(self):
        if self.order == 1:
            return "0"
        if self.abelian:
            return " + ".join(f"Z/{d}" for d in self.invariants)
        return f"nonabelian group of order {self.order}"


def _elements(L):
    if hasattr(L, "elements"):
        return list(L.elements())
    raise ValueError(f"level group {L} is not enumerable")


def _closure(L, gens) -> set:
    seen = {L.identity()}
    frontier = [L.identity()]
    gens = [g for g in gens if not L.is_identity(g)]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = L.mul(x, g)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def homotopy_groups(G: TruncSimplicialGroup, n: int) -> HomotopyGroupInfo:
    """``pi_n = G^n_n / d_{n+1}(G^n_{n+1})`` by exhaustive enumeration."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n + 1 > G.N:
        raise TruncationError(f"pi_{n} needs level {n + 1}, truncation is {G.N}")
    L, U = G.levels[n], G.levels[n + 1]
    for X in (L, U):
        if isinstance(X, FreeGroup) or (isinstance(X, AbelianGroup) and not X.is_finite()):
            raise ValueError("homotopy_groups needs finite levels")
    if n == 0:
        Z = _elements(L)
    else:
        Z = [g for g in _elements(L) if all(G.levels[n - 1].is_identity(G.face(n, i, g)) for i in range(n + 1))]
    Up = [g for g in _elements(U) if all(L.is_identity(G.face(n + 1, i, g)) for i in range(n + 1))]
    B = _closure(L, [G.face(n + 1, n + 1, g) for g in Up])
    key = {x: i for i, x in enumerate(Z)}

    def canon(z):
        return min((L.mul(z, b) for b in B), key=lambda y: key[y])

    reps = sorted({canon(z) for z in Z}, key=lambda y: key[y])
    Q = FiniteGroup.from_elements(reps, lambda a, b: canon(L.mul(a, b)), canon(L.identity()),
                                  labels=str, name=f"pi_{n}")
    ab = Q.is_abelian()
    return HomotopyGroupInfo(n, Q.order, ab, finite_abelian_invariants(Q) if ab else None, Q)


def _prime_factors(m: int) -> List[int]:
    out, p = [], 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


def finite_abelian_invariants(Q: FiniteGroup) -> List[int]:
    """Invariant factors ``d_1 | d_2 | ...`` of a finite abelian group."""
    if Q.order == 1:
        return []
    prime_parts: Dict[int, List[int]] = {}
    for p in _prime_factors(Q.order):
        # count_k = #{x : x^(p^k) = 1} = p^(sum_i min(k, e_i))
        logs = [0]
        k = 1
        while True:
            c = sum(1 for x in Q.elements() if Q.is_identity(Q.pow(x, p ** k)))
            logs.append(round(math.log(c, p)))
            if logs[-1] == logs[-2]:
                break
            k += 1
        # number of cyclic factors with exponent >= k is logs[k] - logs[k-1]
        ge = [logs[k] - logs[k - 1] for k in range(1, len(logs))]
        exps = []
        for k in range(len(ge)):
            nxt = ge[k + 1] if k + 1 < len(ge) else 0
            exps += [k + 1] * (ge[k] - nxt)
        prime_parts[p] = sorted(exps, reverse=True)
    width = max(len(v) for v in prime_parts.values())
    inv = []
    for t in range(width):
        d = 1
        for p, exps in prime_parts.items():
            if t < len(exps):
                d *= p ** exps[t]
        inv.append(d)
    return sorted(inv)


# ---------------------------------------------------------------------------
# basic constructions


def constant_simplicial_group(G, N: int, name: Optional[str] = None) -> TruncSimplicialGroup:
    idh = identity_hom(G)
    return TruncSimplicialGroup([G] * (N + 1), [[]] + [[idh] * (n + 1) for n in range(1, N + 1)],
                                [[idh] * (n + 1) for n in range(N)], name or f"const({G})")


def surjections(n: int, k: int) -> List[Tuple[int, ...]]:
    """Monotone surjections ``[n] -> [k]`` as value tuples; there are C(n, k)."""
    out = []
    for jumps in itertools.combinations(range(1, n + 1), k):
        vals, cur = [], 0
        js = set(jumps)
        for t in range(n + 1):
            if t in js:
                cur += 1
            vals.append(cur)
        out.append(tuple(vals))
    return out


def coface_map(n: int, i: int) -> Tuple[int, ...]:
    """``delta^i : [n-1] -> [n]`` skipping i."""
    return tuple(t if t < i else t + 1 for t in range(n))


def codegeneracy_map(n: int, j: int) -> Tuple[int, ...]:
    """``sigma^j : [n+1] -> [n]`` hitting j twice."""
    return tuple(t if t <= j else t - 1 for t in range(n + 2))


def dk_act(eta: Tuple[int, ...], theta: Tuple[int, ...]):
    """Action of ``theta`` on the Dold-Kan summand indexed by ``eta``.

    Returns ``("id", sigma)``, ``("d", sigma)`` (apply the differential) or
    ``None`` (the summand maps to zero).
    """
    comp = tuple(eta[t] for t in theta)
    k = eta[-1]
    image = sorted(set(comp))
    if image == list(range(k + 1)):
        return "id", comp
    if image == list(range(k)):
        return "d", comp
    return None


def dold_kan_finite(moduli: Sequence[Sequence[int]], diffs: Sequence[Sequence[Sequence[int]]], N: int,
                    name: str = "Gamma(C)") -> TruncSimplicialGroup:
    """Simplicial abelian group with Moore complex the given finite complex.

    ``moduli[k]`` lists the cyclic orders of ``C_k`` and ``diffs[k]`` is the
    integer matrix of ``d_k : C_k -> C_{k-1}`` (``diffs[0]`` is ignored).
    """
    top = len(moduli) - 1
    summands = []
    for n in range(N + 1):
        summ = []
        for k in range(min(n, top) + 1):
            for eta in surjections(n, k):
                summ.append((k, eta))
        summands.append(summ)
    levels, offsets = [], []
    for n in range(N + 1):
        off, mods = {}, []
        for k, eta in summands[n]:
            off[eta] = len(mods)
            mods += list(moduli[k])
        offsets.append(off)
        levels.append(_FiniteAbelian(mods))

    def build(n_src, theta, n_tgt):
        S, T = levels[n_src], levels[n_tgt]
        images = []
        for k, eta in summands[n_src]:
            act = dk_act(eta, theta)
            for b in range(len(moduli[k])):
                v = [0] * T.width
                if act is not None:
                    kind, sigma = act
                    if kind == "id":
                        v[offsets[n_tgt][sigma] + b] = 1
                    elif k >= 1:
                        base = offsets[n_tgt][sigma]
                        for a in range(len(moduli[k - 1])):
                            v[base + a] = diffs[k][a][b]
                images.append(T.normalize(v))
        return AbelianHom(S, T, images)

    faces = [[]] + [[build(n, coface_map(n, i), n - 1) for i in range(n + 1)] for n in range(1, N + 1)]
    degens = [[build(n, codegeneracy_map(n, j), n + 1) for j in range(n + 1)] for n in range(N)]
    return TruncSimplicialGroup(levels, faces, degens, name)


class _FiniteAbelian(AbelianGroup):
    """Finite abelian group keeping every listed cyclic factor (even Z/1)."""

    def __init__(self, moduli: Sequence[int]):
        super().__init__(0, ())
        self.torsion = tuple(int(m) for m in moduli)
        self.width = len(self.torsion)


# ---------------------------------------------------------------------------
# group rings over simplicial groups


class SimplicialGroupRing:
    """Levelwise group rings ``Q[G_n]`` with linearly extended faces/degeneracies."""

    def __init__(self, G: TruncSimplicialGroup):
        self.G = G

    def face(self, n: int, i: int, x: GroupRingElt) -> GroupRingElt:
        return x.map(lambda g: self.G.face(n, i, g), self.G.levels[n - 1])

    def degen(self, n: int, j: int, x: GroupRingElt) -> GroupRingElt:
        return x.map(lambda g: self.G.degen(n, j, g), self.G.levels[n + 1])

    def in_moore_ideal(self, n: int, x: GroupRingElt, j: Optional[int] = None) -> Optional[int]:
        """First face index ``i <= j`` with ``d_i x != 0``, or None."""
        j = n if j is None else j
        for i in range(j + 1):
            if not self.face(n, i, x).is_zero():
                return i
        return None


def moore_square_witness(R: SimplicialGroupRing, n: int, a: GroupRingElt, b: GroupRingElt,
                         check: bool = True) -> GroupRingElt:
    """``w = s_n(a) (s_n(b) - s_{n-1}(b))`` with ``d_{n+1} w = a b`` and ``d_i w = 0`` for ``i <= n``."""
    if n < 1:
        raise TruncationError("the witness needs n >= 1 (uses s_{n-1})")
    if n + 1 > R.G.N:
        raise TruncationError(f"witness lives at level {n + 1}, truncation is {R.G.N}")
    for name, x in (("a", a), ("b", b)):
        bad = R.in_moore_ideal(n, x)
        if bad is not None:
            raise MooreIdealError(f"{name} is not in the level-{n} Moore ideal: d_{bad} {name} != 0", bad)
    w = R.degen(n, n, a) * (R.degen(n, n, b) - R.degen(n, n - 1, b))
    if check:
        bad = R.in_moore_ideal(n + 1, w, n)
        if bad is not None:
            raise SimplicialIdentityError(f"d_{bad} w != 0")
        if R.face(n + 1, n + 1, w) != a * b:
            raise SimplicialIdentityError("d_{n+1} w != a b")
    return w


# ---------------------------------------------------------------------------
# random elements


def random_word(F: FreeGroup, rng: random.Random, max_len: int = 8) -> Word:
    if F.rank == 0:
        return F.identity()
    length = rng.randint(0, max_len)
    return F.word([(rng.randrange(F.rank), rng.choice((-1, 1))) for _ in range(length)])


def random_element(L, rng: random.Random, max_len: int = 8):
    if isinstance(L, FreeGroup):
        return random_word(L, rng, max_len)
    if isinstance(L, FiniteGroup):
        return rng.randrange(L.order)
    if isinstance(L, AbelianGroup):
        return L.normalize([rng.randint(-max_len, max_len) for _ in range(L.width)])
    raise TypeError(f"cannot sample from {L}")


def random_moore_element(G: TruncSimplicialGroup, n: int, rng: random.Random, max_len: int = 6):
    """An element of ``G^n_n`` of the form ``d_{n+1} r^n_{n+1}(g)``."""
    g = random_element(G.levels[n + 1], rng, max_len)
    return G.face(n + 1, n + 1, retract(G, n + 1, n, g))


def random_moore_ring_element(G: TruncSimplicialGroup, n: int, rng: random.Random, terms: int = 4,
                              max_len: int = 4) -> GroupRingElt:
    """``sum c_k (g_k - 1) h_k`` with ``g_k in G^n_n``: lies in the level-n Moore ideal."""
    L = G.levels[n]
    x = GroupRingElt(L)
    one = GroupRingElt.one(L)
    for _ in range(rng.randint(0, terms)):
        g = random_moore_element(G, n, rng, max_len)
        h = random_element(L, rng, max_len)
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
        x = x + ((GroupRingElt.basis(L, g) - one) * GroupRingElt.basis(L, h)).scale(c)
    return x
