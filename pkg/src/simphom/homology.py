"""Group homology from a free simplicial resolution, and the checks around it.

``E_n`` is the abelianization of level n-1 of the resolution, with
differential the alternating sum of the abelianized faces.  ``Ebar`` divides
out the images of the degeneracies.  Both compute ``H_*(B pi)`` inside the
range the resolution certifies; the normalized bar complex of a finite group
is the independent oracle.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .chainlab import (ChainComplex, HomologyGroup, IntegralHomology, QHomology, SparseIntMatrix, homology)
from .freegrp import Word, abelianize
from .resolve import Cocycle, cocycle_to_hom, lift_to_moore
from .simp import AugSimplicialGroup, TruncationError, moore_member, random_word

__all__ = [
    "EComplexData", "EBarComplexData", "DegreeResult", "e_complex", "e_homology", "ebar_complex",
    "ebar_homology", "bar_complex", "bar_oracle", "compare", "homology_report", "dbar_class", "hopf_check",
    "pairing", "pairing_matrix", "bar_sequence_tests", "BarElement", "RangeError",
]


class RangeError(ValueError):
    pass


def _ring(ring: str) -> str:
    r = {"int": "Z", "Z": "Z", "rat": "Q", "Q": "Q"}.get(ring)
    if r is None:
        raise ValueError(f"ring must be int or rat, got {ring!r}")
    return r


@dataclass
class DegreeResult:
    degree: int
    group: HomologyGroup
    verified: bool

    def to_json(self) -> dict:
        d = {"degree": self.degree, "betti": self.group.betti, "torsion": list(self.group.torsion),
             "verified": self.verified}
        if not self.verified:
            d["flag"] = "unverified-range"
        return d


# ---------------------------------------------------------------------------
# E and Ebar


@dataclass
class EComplexData:
    G: AugSimplicialGroup
    ring: str
    N: int
    complex: ChainComplex

    @property
    def exact_through(self) -> int:
        return self.G.exact_through

    def differential(self, n: int) -> SparseIntMatrix:
        return self.complex.d(n)


def _ab_face(G: AugSimplicialGroup, m: int, i: int) -> SparseIntMatrix:
    return SparseIntMatrix.from_dense(abelianize(G.faces[m][i]), G.levels[m].rank)


def e_complex(G: AugSimplicialGroup, ring: str = "int", N: Optional[int] = None) -> EComplexData:
    """``E_n = G_{n-1}^ab`` for ``1 <= n <= N+1``."""
    N = G.N if N is None else N
    if N > G.N:
        raise TruncationError(f"E-complex through degree {N} needs level {N}, resolution stops at {G.N}")
    ranks = {n: G.levels[n - 1].rank for n in range(1, N + 2)}
    diffs = {}
    for n in range(2, N + 2):
        m = n - 1
        D = SparseIntMatrix(G.levels[m - 1].rank, G.levels[m].rank)
        for i in range(m + 1):
            D = D + _ab_face(G, m, i).scale(-1 if i % 2 else 1)
        diffs[n] = D
    return EComplexData(G, _ring(ring), N, ChainComplex(ranks, diffs, _ring(ring)))


def _degree_results(C: ChainComplex, degrees, ring: str, exact: int) -> List[DegreeResult]:
    return [DegreeResult(n, homology(C, n, ring), n <= exact) for n in degrees]


def e_homology(G: AugSimplicialGroup, ring: str = "int", N: Optional[int] = None,
               strict_range: bool = False) -> List[DegreeResult]:
    """H_n(E) for ``1 <= n <= N``; degrees beyond the certified range are
    flagged, or rejected when ``strict_range`` is set."""
    E = e_complex(G, ring, N)
    if strict_range and E.N > G.exact_through:
        raise RangeError(f"degree {E.N} is outside the certified range 1..{G.exact_through}")
    return _degree_results(E.complex, range(1, E.N + 1), E.ring, G.exact_through)


@dataclass
class EBarComplexData:
    E: EComplexData
    complex: ChainComplex
    kept: Dict[int, List[int]]
    degenerate: Dict[int, List[int]] = field(default_factory=dict)


def ebar_complex(E: EComplexData) -> EBarComplexData:
    """Quotient of E by the degeneracy images.  Degeneracies of free
    resolutions send generators to generators, so the quotient keeps the
    remaining generators and the differential is a submatrix."""
    G = E.G
    kept, degen = {}, {}
    for n in E.complex.ranks:
        m = n - 1
        hit = set()
        if m >= 1:
            for j in range(m):
                for img in G.degens[m - 1][j].images:
                    if len(img.letters) != 1 or abs(img.letters[0][1]) != 1:
                        raise ValueError(f"s_{j} at level {m - 1} does not send generators to generators")
                    hit.add(img.letters[0][0])
        degen[n] = sorted(hit)
        kept[n] = [k for k in range(G.levels[m].rank) if k not in hit]
    for n in E.complex.ranks:
        if n - 1 not in E.complex.ranks:
            continue
        D = E.complex.d(n)
        bad = [(a, b) for (a, b) in D.entries if b in set(degen[n]) and a not in set(degen[n - 1])]
        if bad:
            raise ValueError(f"d^E does not preserve degeneracies in degree {n}")
    ranks = {n: len(k) for n, k in kept.items()}
    diffs = {n: E.complex.d(n).submatrix(kept[n - 1], kept[n]) for n in kept if n - 1 in kept}
    return EBarComplexData(E, ChainComplex(ranks, diffs, E.ring), kept, degen)


def ebar_homology(Eb: EBarComplexData) -> List[DegreeResult]:
    E = Eb.E
    return _degree_results(Eb.complex, range(1, E.N + 1), E.ring, E.G.exact_through)


# ---------------------------------------------------------------------------
# bar oracle


def _elements(G) -> list:
    return list(G.elements())


def bar_complex(G, N: int, ring: str = "int", bound: int = 10 ** 7) -> ChainComplex:
    """Normalized bar complex ``C_m = Z[(G - 1)^m]`` for ``0 <= m <= N+1``."""
    order = len(_elements(G))
    if order ** N > bound:
        raise RangeError(f"|G|^N = {order ** N} exceeds the bound {bound}")
    nonid = [g for g in _elements(G) if not G.is_identity(g)]
    bases = {m: list(itertools.product(nonid, repeat=m)) for m in range(N + 2)}
    pos = {m: {t: a for a, t in enumerate(b)} for m, b in bases.items()}
    diffs = {}
    for m in range(1, N + 2):
        ent: Dict[Tuple[int, int], int] = {}
        for b, t in enumerate(bases[m]):
            terms = [(t[1:], 1)]
            for i in range(1, m):
                prod = G.mul(t[i - 1], t[i])
                if G.is_identity(prod):
                    continue
                terms.append((t[:i - 1] + (prod,) + t[i + 1:], (-1) ** i))
            terms.append((t[:-1], (-1) ** m))
            for u, s in terms:
                a = pos[m - 1][u]
                ent[(a, b)] = ent.get((a, b), 0) + s
        diffs[m] = SparseIntMatrix(len(bases[m - 1]), len(bases[m]), {k: v for k, v in ent.items() if v})
    return ChainComplex({m: len(b) for m, b in bases.items()}, diffs, _ring(ring))


def bar_oracle(G, N: int, ring: str = "int", bound: int = 10 ** 7) -> List[HomologyGroup]:
    C = bar_complex(G, N, ring, bound)
    return [homology(C, m) for m in range(N + 1)]


def compare(a: Sequence[DegreeResult], b: Sequence[HomologyGroup]) -> dict:
    """Degree-by-degree comparison on the certified part of ``a``."""
    bd = {h.degree: h for h in b}
    rows, ok = [], True
    for r in a:
        if r.degree not in bd:
            continue
        same = r.group.as_tuple() == bd[r.degree].as_tuple()
        rows.append({"degree": r.degree, "e": str(r.group), "bar": str(bd[r.degree]), "match": same,
                     "verified": r.verified})
        if r.verified and not same:
            ok = False
    return {"match": ok, "degrees": rows}


def homology_report(results: Sequence[DegreeResult], oracle: Optional[dict] = None) -> dict:
    out = {"homology": [r.to_json() for r in results]}
    if oracle is not None:
        out["oracle"] = oracle
    return out


# ---------------------------------------------------------------------------
# degree 2: Hopf classes


def _ab_vector(w: Word) -> Dict[int, int]:
    return {k: v for k, v in enumerate(w.exponent_sums()) if v}


def dbar_class(G: AugSimplicialGroup, z: Word, ring: str = "int") -> dict:
    """Class in ``H_2`` of an element z of ``G^0_1`` whose boundary ``d_1 z``
    lies in ``[F, F]``: the abelianization of z is then an E_2 cycle."""
    if z.group is not G.levels[1] and z.group != G.levels[1]:
        raise ValueError("z must be a word in level 1")
    if not moore_member(G, 1, 0, z):
        raise ValueError("z is not in G^0_1 (d_0 z != 1)")
    E = e_complex(G, ring, N=min(G.N, 2))
    v = _ab_vector(z)
    img = E.complex.d(2).apply(v)
    if any(img.values()):
        raise ValueError("abelianized z is not an E_2 cycle: d_1 z is not a commutator")
    if E.ring == "Z":
        H = IntegralHomology(E.complex, 2)
        c = H.coords(v)
        return {"ring": "int", "coords": c, "group": str(H.group), "zero": not any(c["free"]) and not any(c["torsion"]),
                "generator": _is_generator(H, c)}
    Hq = QHomology(E.complex, 2)
    cq = Hq.coords(v)
    return {"ring": "rat", "coords": [str(x) for x in cq], "dim": Hq.dim, "zero": not any(cq),
            "generator": Hq.dim == 1 and abs(cq[0]) == 1}


def _is_generator(H: IntegralHomology, c: dict) -> bool:
    """True when the class generates a cyclic H (free rank 1 or one torsion summand)."""
    if H.betti == 1 and not H.torsion:
        return abs(c["free"][0]) == 1
    if H.betti == 0 and len(H.torsion) == 1:
        import math
        return math.gcd(c["torsion"][0], H.torsion[0]) == 1
    return False


def hopf_check(G: AugSimplicialGroup, witnesses: Sequence[Tuple[Any, Any, Optional[str]]], ring: str = "int") -> dict:
    """Each witness is ``(w, certificate, expected)`` with w a word in F = level 0
    representing an element of ``R cap [F, F]``; ``expected`` is ``"generator"``,
    ``"zero"`` or None.  The witness is lifted to ``G^0_1`` and classified."""
    rows, ok = [], True
    L0 = G.levels[0]
    for w, cert, expected in witnesses:
        w = L0.parse(w) if isinstance(w, str) else w
        row = {"witness": str(w)}
        if not G.pi.is_identity(G.eps(w)):
            row.update(ok=False, error="not in R: nontrivial in pi")
        elif any(w.exponent_sums()):
            row.update(ok=False, error="not in [F, F]: nonzero exponent sums")
        else:
            z = lift_to_moore(G, w, cert)
            cls = dbar_class(G, z, ring)
            row["class"] = cls
            good = True
            if expected == "generator":
                good = cls["generator"]
            elif expected == "zero":
                good = cls["zero"]
            row["ok"] = good
        ok = ok and row["ok"]
        rows.append(row)
    return {"ok": ok, "witnesses": rows}


# ---------------------------------------------------------------------------
# pairing with cocycles


def pairing(G: AugSimplicialGroup, c: Cocycle, x: Dict[int, Any], hom=None) -> Fraction:
    """``<[c], x>`` for an E_n cycle x (coordinates on the level n-1 generators).

    x is pushed through the simplicial homomorphism ``phi_c : G -> K(Q, n-1)``
    and read off in degree n-1, where K is one-dimensional."""
    n = c.n
    if n - 1 > G.N:
        raise TruncationError(f"degree {n} needs level {n - 1}")
    E = e_complex(G, "rat", N=min(G.N, n))
    if any(E.complex.d(n).apply(x).values()):
        raise ValueError("x is not a cycle of E")
    hom = hom or cocycle_to_hom(G, c, M=min(G.N, n))
    total = Fraction(0)
    for k, coef in x.items():
        if coef:
            total += Fraction(coef) * hom.images[n - 1][k].get((), Fraction(0))
    return total


def pairing_matrix(G: AugSimplicialGroup, cocycles: Sequence[Cocycle], n: int) -> dict:
    """Rows: cocycles.  Columns: a basis of ``H_n(E; Q)``."""
    E = e_complex(G, "rat", N=min(G.N, n))
    H = QHomology(E.complex, n)
    rows = []
    for c in cocycles:
        if c.n != n:
            raise ValueError(f"cocycle of degree {c.n} cannot pair with H_{n}")
        hom = cocycle_to_hom(G, c, M=min(G.N, n))
        rows.append([pairing(G, c, z, hom) for z in H.reps])
    return {"degree": n, "basis": [{str(k): str(v) for k, v in z.items()} for z in H.reps], "matrix": rows,
            "verified": n <= G.exact_through}


# ---------------------------------------------------------------------------
# pointwise checks on Z{B G_n}


class BarElement:
    """Finite Z-combination of bar tuples over level n (n = -1 means pi)."""

    __slots__ = ("level", "terms")

    def __init__(self, level: int, terms: Optional[Dict[tuple, int]] = None):
        self.level = level
        self.terms = {t: c for t, c in (terms or {}).items() if c}

    def __add__(self, other: "BarElement") -> "BarElement":
        if other.level != self.level:
            raise ValueError("levels differ")
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0) + c
        return BarElement(self.level, out)

    def __neg__(self):
        return BarElement(self.level, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, BarElement) and self.level == other.level and self.terms == other.terms

    def __hash__(self):
        return hash((self.level, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def component(self, p: int) -> Dict[tuple, int]:
        return {t: c for t, c in self.terms.items() if len(t) == p}

    def __repr__(self):
        return f"BarElement(level={self.level}, {len(self.terms)} terms)"


def _bar_face(G: AugSimplicialGroup, x: BarElement, i: int) -> BarElement:
    n = x.level
    out: Dict[tuple, int] = {}
    for t, c in x.terms.items():
        if n == 0:
            u = tuple(G.eps(g) for g in t)
        else:
            u = tuple(G.face(n, i, g) for g in t)
        out[u] = out.get(u, 0) + c
    return BarElement(n - 1, out)


def _bar_degen(G: AugSimplicialGroup, x: BarElement, j: int) -> BarElement:
    n = x.level
    out: Dict[tuple, int] = {}
    for t, c in x.terms.items():
        u = tuple(G.degen(n, j, g) for g in t)
        out[u] = out.get(u, 0) + c
    return BarElement(n + 1, out)


def _in_moore(G, x: BarElement, j: int) -> Optional[int]:
    """First face index ``i <= j`` with ``(d_i)_* x != 0``, else None."""
    for i in range(j + 1):
        if not _bar_face(G, x, i).is_zero():
            return i
    return None


def _random_bar(G, n: int, p: int, rng: random.Random, terms: int = 3, max_len: int = 4) -> BarElement:
    out: Dict[tuple, int] = {}
    L = G.levels[n]
    for _ in range(terms):
        t = tuple(random_word(L, rng, max_len) for _ in range(p))
        out[t] = out.get(t, 0) + rng.choice([-2, -1, 1, 2])
    return BarElement(n, out)


def _bar_retract(G, x: BarElement, j: int) -> BarElement:
    """Abelian retraction ``x -> x - s_k d_k x`` for k = 0..j into G^j_n B."""
    for k in range(j + 1):
        x = x - _bar_degen(G, _bar_face(G, x, k), k)
    return x


def bar_sequence_tests(G: AugSimplicialGroup, n: int, j: int, samples: int, rng: random.Random,
                       p: int = 2) -> dict:
    """Pointwise checks of the short exact sequences
    ``G^{j+1}_n B >-> G^j_n B ->> G^{j}_{n-1} B`` and of the splitting
    of ``(d_0)_*`` by ``(s_0)_*``, on random elements at bar degree p."""
    if not (0 <= j < n - 1 and n <= G.N):
        raise TruncationError(f"need 0 <= j < n-1 and n <= {G.N}")
    counts = {"section": 0, "image": 0, "kernel": 0, "split_d0": 0, "degree0": 0}
    failures = []

    def fail(kind, x, detail):
        failures.append({"check": kind, "level": x.level, "terms": len(x.terms), "detail": detail})

    for _ in range(samples):
        # x in G^j_{n-1}B: section s_{j+1} lands in G^j_n B and d_{j+1} recovers x
        x = _bar_retract(G, _random_bar(G, n - 1, p, rng), j)
        if _in_moore(G, x, j) is not None:
            fail("retraction", x, "abelian retraction left G^j_{n-1}B")
            continue
        y = _bar_degen(G, x, j + 1)
        bad = _in_moore(G, y, j)
        if bad is not None:
            fail("section", x, f"(d_{bad})_* s_{j + 1} x != 0")
        elif _bar_face(G, y, j + 1) != x:
            fail("section", x, f"(d_{j + 1})_* s_{j + 1} x != x")
        else:
            counts["section"] += 1
        # u in G^j_n B: image of d_{j+1} lies in G^j_{n-1} B, and the kernel part lies in G^{j+1}_n B
        u = _bar_retract(G, _random_bar(G, n, p, rng), j)
        du = _bar_face(G, u, j + 1)
        bad = _in_moore(G, du, j)
        if bad is not None:
            fail("image", u, f"(d_{bad})_* (d_{j + 1})_* u != 0")
        else:
            counts["image"] += 1
        if j + 1 <= n - 1:
            k = u - _bar_degen(G, du, j + 1)
            if _in_moore(G, k, j + 1) is not None or k + _bar_degen(G, du, j + 1) != u:
                fail("kernel", u, "u - s d u is not in G^{j+1}_n B")
            else:
                counts["kernel"] += 1
        # (s_0)_* splits (d_0)_* on Z{B G_n}
        v = _random_bar(G, n - 1, p, rng)
        if _bar_face(G, _bar_degen(G, v, 0), 0) != v:
            fail("split_d0", v, "(d_0)_*(s_0)_* != id")
        else:
            w = _random_bar(G, n, p, rng)
            r = w - _bar_degen(G, _bar_face(G, w, 0), 0)
            if _in_moore(G, r, 0) is not None:
                fail("split_d0", w, "w - s_0 d_0 w is not in G^0_n B")
            else:
                counts["split_d0"] += 1
        # degree-0 components: Moore elements have none, and a nonzero one is rejected
        if u.component(0):
            fail("degree0", u, "Moore element with a degree-0 component")
        bumped = u + BarElement(n, {(): rng.choice([-1, 1])})
        if _in_moore(G, bumped, 0) is None:
            fail("degree0", bumped, "element with a degree-0 component accepted")
        else:
            counts["degree0"] += 1
    return {"n": n, "j": j, "p": p, "samples": samples, "counts": counts, "failures": failures,
            "ok": not failures}
