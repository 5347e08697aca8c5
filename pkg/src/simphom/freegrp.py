"""Exact arithmetic in free groups, small finite groups, finitely generated
abelian groups, and group rings with finite support.

Every group class exposes the same element-level protocol::

    identity(), mul(a, b), inv(a), pow(a, e), is_identity(a),
    generators(), abelian_coords(a), ab_rank

so that homomorphisms, group rings and simplicial groups can be written once.
Free-group elements are :class:`Word` values; finite-group elements are
canonical integer indices; abelian-group elements are integer tuples.
"""
from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple


class GroupMismatch(ValueError):
    pass


def _generic_pow(group, a, e: int):
    if e < 0:
        a, e = group.inv(a), -e
    result = group.identity()
    base = a
    while e:
        if e & 1:
            result = group.mul(result, base)
        e >>= 1
        if e:
            base = group.mul(base, base)
    return result


# ---------------------------------------------------------------------------
# free groups


class FreeGroup:
    """Free group on named generators."""

    def __init__(self, names: Sequence[str]):
        names = tuple(str(n) for n in names)
        if len(set(names)) != len(names):
            raise ValueError(f"generator labels must be distinct: {names}")
        self.names = names
        self.rank = len(names)
        self._index = {n: i for i, n in enumerate(names)}
        self._parse_re = None

    @classmethod
    def of_rank(cls, rank: int, prefix: str = "x") -> "FreeGroup":
        return cls([f"{prefix}{i}" for i in range(rank)])

    def __repr__(self):
        return f"FreeGroup({list(self.names)})"

    def __eq__(self, other):
        return self is other or (isinstance(other, FreeGroup) and self.names == other.names)

    def __hash__(self):
        return hash(self.names)

    def index(self, name: str) -> int:
        return self._index[name]

    # group protocol
    def identity(self) -> "Word":
        return Word(self, ())

    def gen(self, i: int) -> "Word":
        if not 0 <= i < self.rank:
            raise IndexError(i)
        return Word(self, ((i, 1),))

    def generators(self) -> List["Word"]:
        return [self.gen(i) for i in range(self.rank)]

    def mul(self, a: "Word", b: "Word") -> "Word":
        return a * b

    def inv(self, a: "Word") -> "Word":
        return a.inverse()

    def pow(self, a: "Word", e: int) -> "Word":
        return a ** e

    def is_identity(self, a: "Word") -> bool:
        return not a.letters

    @property
    def ab_rank(self) -> int:
        return self.rank

    def abelian_coords(self, a: "Word") -> Tuple[int, ...]:
        return a.exponent_sums()

    def word(self, letters: Iterable[Tuple[int, int]]) -> "Word":
        return Word.from_letters(self, letters)

    def parse(self, text: str) -> "Word":
        """Parse ``"a b^-1 a^2"``, ``"ab^-1a^2"`` or ``"1"``.

        Labels are matched greedily (longest first), so labels such as
        ``s0(a)`` work; ``*``, ``.`` and whitespace are separators.
        """
        s = re.sub(r"[\s*.]", "", text)
        if s in ("", "1", "e"):
            return self.identity()
        if self._parse_re is None:
            labels = sorted(self.names, key=len, reverse=True)
            alt = "|".join(re.escape(n) for n in labels)
            self._parse_re = re.compile(rf"({alt})(?:\^\(?(-?\d+)\)?)?")
        letters = []
        pos = 0
        while pos < len(s):
            m = self._parse_re.match(s, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse {text!r} at {s[pos:]!r} over {self}")
            e = int(m.group(2)) if m.group(2) is not None else 1
            letters.append((self._index[m.group(1)], e))
            pos = m.end()
        return Word.from_letters(self, letters)


class Word:
    """Reduced word in a free group, run-length encoded as (generator, exponent)."""

    __slots__ = ("group", "letters", "_hash")

    def __init__(self, group: FreeGroup, letters: Tuple[Tuple[int, int], ...]):
        # letters must already be reduced; use Word.from_letters otherwise
        self.group = group
        self.letters = letters
        self._hash = None

    @classmethod
    def from_letters(cls, group: FreeGroup, letters: Iterable[Tuple[int, int]]) -> "Word":
        out: List[Tuple[int, int]] = []
        for g, e in letters:
            if not 0 <= g < group.rank:
                raise IndexError(f"generator {g} out of range for {group}")
            _push(out, g, e)
        return cls(group, tuple(out))

    def __len__(self):
        return sum(abs(e) for _, e in self.letters)

    def __bool__(self):
        return True

    def is_identity(self) -> bool:
        return not self.letters

    def __eq__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return self.letters == other.letters and (self.group is other.group or self.group == other.group)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.letters)
        return self._hash

    def _check(self, other: "Word"):
        if not isinstance(other, Word):
            raise TypeError(f"expected Word, got {type(other).__name__}")
        if self.group is not other.group and self.group != other.group:
            raise GroupMismatch(f"{self.group} vs {other.group}")

    def __mul__(self, other: "Word") -> "Word":
        self._check(other)
        if not other.letters:
            return self
        if not self.letters:
            return other
        out = list(self.letters)
        for g, e in other.letters:
            if not out:
                # rest of other is already reduced
                out.append((g, e))
                continue
            _push(out, g, e)
        return Word(self.group, tuple(out))

    def inverse(self) -> "Word":
        return Word(self.group, tuple((g, -e) for g, e in reversed(self.letters)))

    def __invert__(self):
        return self.inverse()

    def __pow__(self, e: int) -> "Word":
        if e == 0 or not self.letters:
            return self.group.identity()
        if e < 0:
            return self.inverse() ** (-e)
        if len(self.letters) == 1:
            g, x = self.letters[0]
            return Word(self.group, ((g, x * e),))
        return _generic_pow(self.group, self, e)

    def exponent_sums(self) -> Tuple[int, ...]:
        v = [0] * self.group.rank
        for g, e in self.letters:
            v[g] += e
        return tuple(v)

    def expand(self) -> List[Tuple[int, int]]:
        """Letter sequence with unit exponents."""
        out = []
        for g, e in self.letters:
            s = 1 if e > 0 else -1
            out.extend([(g, s)] * abs(e))
        return out

    def __repr__(self):
        return f"Word({self})"

    def __str__(self):
        if not self.letters:
            return "1"
        parts = []
        for g, e in self.letters:
            name = self.group.names[g]
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)


def _push(out: List[Tuple[int, int]], g: int, e: int) -> None:
    if e == 0:
        return
    if out and out[-1][0] == g:
        e2 = out[-1][1] + e
        if e2:
            out[-1] = (g, e2)
        else:
            out.pop()
    else:
        out.append((g, e))


def commutator(a: Word, b: Word) -> Word:
    return a * b * a.inverse() * b.inverse()


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup:
    """Finite group given by a multiplication table on indices ``0..order-1``.

    Index 0 is the identity.
    """

    def __init__(self, table: Sequence[Sequence[int]], labels: Optional[Sequence[str]] = None,
                 gens: Optional[Sequence[int]] = None, name: str = "G"):
        self.table = [list(r) for r in table]
        self.order = len(self.table)
        if any(len(r) != self.order for r in self.table):
            raise ValueError("multiplication table must be square")
        if self.table[0] != list(range(self.order)):
            raise ValueError("index 0 must be the identity")
        self._inv = [0] * self.order
        for a in range(self.order):
            row = self.table[a]
            self._inv[a] = row.index(0)
        self.labels = list(labels) if labels is not None else [str(i) for i in range(self.order)]
        self._label_index = {l: i for i, l in enumerate(self.labels)}
        self._gens = list(gens) if gens is not None else list(range(1, self.order))
        self.name = name

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"

    @classmethod
    def from_elements(cls, elements: Sequence[Any], mul: Callable[[Any, Any], Any],
                      identity: Any, labels: Optional[Callable[[Any], str]] = None,
                      gens: Optional[Sequence[Any]] = None, name: str = "G") -> "FiniteGroup":
        elements = list(elements)
        elements.remove(identity)
        elements.insert(0, identity)
        index = {x: i for i, x in enumerate(elements)}
        table = [[index[mul(a, b)] for b in elements] for a in elements]
        lab = [labels(x) if labels else str(x) for x in elements]
        g = None if gens is None else [index[x] for x in gens]
        grp = cls(table, lab, g, name)
        grp.elements_data = elements
        grp.element_index = index
        return grp

    # group protocol
    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def pow(self, a: int, e: int) -> int:
        return _generic_pow(self, a, e)

    def is_identity(self, a: int) -> bool:
        return a == 0

    def generators(self) -> List[int]:
        return list(self._gens)

    def elements(self) -> range:
        return range(self.order)

    @property
    def ab_rank(self) -> int:
        return 0

    def abelian_coords(self, a: int) -> Tuple[int, ...]:
        # G_ab is finite, so G_ab (x) Q vanishes
        return ()

    def label(self, a: int) -> str:
        return self.labels[a]

    def parse(self, text: str) -> int:
        text = text.strip()
        if text in self._label_index:
            return self._label_index[text]
        raise ValueError(f"unknown element {text!r} of {self.name}")

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a]
                   for a in range(self.order) for b in range(a + 1, self.order))

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.table[x][a]
            k += 1
        return k


def cyclic_group(m: int) -> FiniteGroup:
    if m < 1:
        raise ValueError("order must be positive")
    table = [[(a + b) % m for b in range(m)] for a in range(m)]
    return FiniteGroup(table, [str(i) for i in range(m)], [1] if m > 1 else [], name=f"Z/{m}")


def trivial_group() -> FiniteGroup:
    return FiniteGroup([[0]], ["0"], [], name="1")


def abelian_group(moduli: Sequence[int]) -> FiniteGroup:
    """Direct sum of cyclic groups; elements are labelled like ``"1,0"``."""
    moduli = tuple(int(m) for m in moduli)
    elems = list(itertools.product(*[range(m) for m in moduli]))
    gens = []
    for k in range(len(moduli)):
        if moduli[k] > 1:
            gens.append(tuple(1 if i == k else 0 for i in range(len(moduli))))
    return FiniteGroup.from_elements(
        elems, lambda a, b: tuple((x + y) % m for x, y, m in zip(a, b, moduli)),
        tuple(0 for _ in moduli), labels=lambda x: ",".join(map(str, x)), gens=gens,
        name="x".join(f"Z/{m}" for m in moduli) or "1")


def symmetric_group(k: int) -> FiniteGroup:
    """S_k on one-line permutations; ``(p*q)(i) = p(q(i))``."""
    elems = list(itertools.permutations(range(k)))
    gens = []
    if k >= 2:
        gens.append(tuple([1, 0] + list(range(2, k))))
        gens.append(tuple(list(range(1, k)) + [0]))
    return FiniteGroup.from_elements(
        elems, lambda p, q: tuple(p[q[i]] for i in range(k)), tuple(range(k)),
        labels=lambda p: "".join(map(str, p)), gens=sorted(set(gens)), name=f"S{k}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    elems = [(a, b) for a in G.elements() for b in H.elements()]
    gens = [(g, 0) for g in G.generators()] + [(0, h) for h in H.generators()]
    return FiniteGroup.from_elements(
        elems, lambda x, y: (G.mul(x[0], y[0]), H.mul(x[1], y[1])), (0, 0),
        labels=lambda x: f"({G.label(x[0])},{H.label(x[1])})", gens=gens,
        name=f"{G.name}x{H.name}")


# ---------------------------------------------------------------------------
# finitely generated abelian groups


class AbelianGroup:
    """Z^free_rank (+) Z/d_1 (+) ... (+) Z/d_k with canonical integer tuples.

    Free coordinates come first; torsion coordinates are reduced mod d_i.
    """

    def __init__(self, free_rank: int = 0, torsion: Sequence[int] = ()):
        self.free_rank = int(free_rank)
        self.torsion = tuple(int(d) for d in torsion if int(d) != 1)
        if any(d < 1 for d in self.torsion):
            raise ValueError("torsion coefficients must be positive")
        self.width = self.free_rank + len(self.torsion)

    def __repr__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.torsion]
        return "AbelianGroup(" + (" + ".join(parts) or "0") + ")"

    def __eq__(self, other):
        return isinstance(other, AbelianGroup) and (self.free_rank, self.torsion) == (other.free_rank, other.torsion)

    def __hash__(self):
        return hash((self.free_rank, self.torsion))

    def normalize(self, v: Sequence[int]) -> Tuple[int, ...]:
        v = tuple(int(x) for x in v)
        if len(v) != self.width:
            raise ValueError(f"expected {self.width} coordinates, got {len(v)}")
        f = self.free_rank
        return v[:f] + tuple(x % d for x, d in zip(v[f:], self.torsion))

    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.width

    def mul(self, a, b):
        return self.normalize([x + y for x, y in zip(a, b)])

    def inv(self, a):
        return self.normalize([-x for x in a])

    def pow(self, a, e: int):
        return self.normalize([x * e for x in a])

    def is_identity(self, a) -> bool:
        return not any(a)

    def generators(self) -> List[Tuple[int, ...]]:
        return [tuple(1 if i == k else 0 for i in range(self.width)) for k in range(self.width)]

    @property
    def ab_rank(self) -> int:
        return self.free_rank

    def abelian_coords(self, a) -> Tuple[int, ...]:
        return tuple(a[:self.free_rank])

    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int:
        if self.free_rank:
            raise ValueError("infinite group has no order")
        return math.prod(self.torsion)

    def elements(self):
        if self.free_rank:
            raise ValueError("cannot enumerate an infinite group")
        return itertools.product(*(range(d) for d in self.torsion))

    def parse(self, text: str):
        return self.normalize([int(x) for x in text.replace("(", "").replace(")", "").split(",") if x.strip()])


class RationalLine:
    """The additive group Q; target of the pairing's augmentation-ideal step."""

    ab_rank = 1

    def identity(self):
        return Fraction(0)

    def mul(self, a, b):
        return Fraction(a) + Fraction(b)

    def inv(self, a):
        return -Fraction(a)

    def pow(self, a, e: int):
        return Fraction(a) * e

    def is_identity(self, a) -> bool:
        return a == 0

    def generators(self):
        return [Fraction(1)]

    def abelian_coords(self, a):
        return (Fraction(a),)

    def __repr__(self):
        return "RationalLine()"


# ---------------------------------------------------------------------------
# homomorphisms


class GroupHom:
    """Homomorphism out of a free group, given by images of the basis."""

    def __init__(self, source: FreeGroup, target, images: Sequence[Any]):
        if not isinstance(source, FreeGroup):
            raise TypeError("GroupHom source must be a FreeGroup; use TableHom for finite groups")
        images = tuple(images)
        if len(images) != source.rank:
            raise ValueError(f"need {source.rank} images, got {len(images)}")
        if isinstance(target, FreeGroup):
            for w in images:
                if not isinstance(w, Word):
                    raise TypeError("images in a free group must be Words")
                if w.group != target:
                    raise GroupMismatch(f"image {w} not in {target}")
        self.source = source
        self.target = target
        self.images = images

    def __call__(self, w: Word):
        if not isinstance(w, Word):
            raise TypeError(f"expected Word, got {type(w).__name__}")
        if w.group is not self.source and w.group != self.source:
            raise GroupMismatch(f"{w} is not in {self.source}")
        T = self.target
        result = T.identity()
        for g, e in w.letters:
            result = T.mul(result, T.pow(self.images[g], e))
        return result

    def __repr__(self):
        return f"GroupHom({self.source} -> {self.target})"

    def with_image(self, i: int, image) -> "GroupHom":
        imgs = list(self.images)
        imgs[i] = image
        return GroupHom(self.source, self.target, imgs)


class TableHom:
    """Homomorphism out of a finite group, stored as a full image table."""

    def __init__(self, source: FiniteGroup, target, table: Sequence[Any]):
        table = tuple(table)
        if len(table) != source.order:
            raise ValueError("table length must equal source order")
        self.source = source
        self.target = target
        self.table = table

    @property
    def images(self):
        return self.table

    def __call__(self, a: int):
        return self.table[a]

    def __repr__(self):
        return f"TableHom({self.source} -> {self.target})"

    def with_image(self, i: int, image) -> "TableHom":
        t = list(self.table)
        t[i] = image
        return TableHom(self.source, self.target, t)

    def is_homomorphism(self) -> bool:
        S, T = self.source, self.target
        return all(self.table[S.mul(a, b)] == T.mul(self.table[a], self.table[b])
                   for a in S.elements() for b in S.elements())


class AbelianHom:
    """Homomorphism out of an :class:`AbelianGroup`, given on the standard generators."""

    def __init__(self, source: AbelianGroup, target, images: Sequence[Any]):
        images = tuple(images)
        if len(images) != source.width:
            raise ValueError(f"need {source.width} images, got {len(images)}")
        for d, img in zip(source.torsion, images[source.free_rank:]):
            if not target.is_identity(target.pow(img, d)):
                raise ValueError(f"image {img} does not respect the relation of order {d}")
        self.source = source
        self.target = target
        self.images = images

    def __call__(self, a):
        T = self.target
        out = T.identity()
        for x, img in zip(a, self.images):
            if x:
                out = T.mul(out, T.pow(img, x))
        return out

    def __repr__(self):
        return f"AbelianHom({self.source} -> {self.target})"

    def with_image(self, i: int, image) -> "AbelianHom":
        imgs = list(self.images)
        imgs[i] = image
        return AbelianHom(self.source, self.target, imgs)


def hom_apply(f, w):
    return f(w)


def hom_compose(g, f):
    """``g o f`` (apply f first)."""
    if f.target is not g.source and f.target != g.source:
        raise GroupMismatch(f"cannot compose: {f.target} vs {g.source}")
    if isinstance(f, TableHom):
        return TableHom(f.source, g.target, [g(x) for x in f.table])
    if isinstance(f, AbelianHom):
        return AbelianHom(f.source, g.target, [g(x) for x in f.images])
    return GroupHom(f.source, g.target, [g(x) for x in f.images])


def identity_hom(G):
    if isinstance(G, FreeGroup):
        return GroupHom(G, G, G.generators())
    if isinstance(G, AbelianGroup):
        return AbelianHom(G, G, G.generators())
    return TableHom(G, G, list(G.elements()))


def word_mul(a: Word, b: Word) -> Word:
    return a * b


def word_inv(a: Word) -> Word:
    return a.inverse()


def abelianize(f: GroupHom) -> List[List[int]]:
    """Integer matrix of ``f_*`` on abelianizations (rows: target generators)."""
    if not isinstance(f.source, FreeGroup) or not isinstance(f.target, FreeGroup):
        raise TypeError("abelianize requires free source and free target")
    cols = [img.exponent_sums() for img in f.images]
    return [[cols[j][i] for j in range(f.source.rank)] for i in range(f.target.rank)]


# ---------------------------------------------------------------------------
# group rings


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class GroupRingElt:
    """Finite formal Q-linear combination of group elements."""

    __slots__ = ("group", "terms")

    def __init__(self, group, terms: Optional[Dict[Any, Any]] = None):
        self.group = group
        clean = {}
        if terms:
            for g, c in terms.items():
                c = _frac(c)
                if c:
                    clean[g] = c
        self.terms = clean

    @classmethod
    def basis(cls, group, g, coeff=1) -> "GroupRingElt":
        return cls(group, {g: coeff})

    @classmethod
    def one(cls, group) -> "GroupRingElt":
        return cls(group, {group.identity(): 1})

    @classmethod
    def aug_gen(cls, group, g) -> "GroupRingElt":
        """``g - 1``."""
        e = group.identity()
        if g == e:
            return cls(group)
        return cls(group, {g: 1, e: -1})

    def _check(self, other: "GroupRingElt"):
        if self.group is not other.group and self.group != other.group:
            raise GroupMismatch(f"{self.group} vs {other.group}")

    def __add__(self, other: "GroupRingElt") -> "GroupRingElt":
        self._check(other)
        t = dict(self.terms)
        for g, c in other.terms.items():
            t[g] = t.get(g, 0) + c
        return GroupRingElt(self.group, t)

    def __neg__(self):
        return GroupRingElt(self.group, {g: -c for g, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GroupRingElt":
        c = _frac(c)
        return GroupRingElt(self.group, {g: c * v for g, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, GroupRingElt):
            return self.scale(other)
        self._check(other)
        G = self.group
        t: Dict[Any, Fraction] = {}
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                k = G.mul(g, h)
                t[k] = t.get(k, 0) + a * b
        return GroupRingElt(G, t)

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, GroupRingElt):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def augmentation(self) -> Fraction:
        return sum(self.terms.values(), Fraction(0))

    def map(self, f, target=None) -> "GroupRingElt":
        """Linear extension of a group homomorphism ``f``."""
        T = target if target is not None else f.target
        t: Dict[Any, Fraction] = {}
        for g, c in self.terms.items():
            k = f(g)
            t[k] = t.get(k, 0) + c
        return GroupRingElt(T, t)

    def iq_class(self) -> Tuple[Fraction, ...]:
        """Class in I/I^2 = G_ab (x) Q, sending ``g - 1`` to ``[g]``."""
        if self.augmentation() != 0:
            raise ValueError(f"iq_class needs augmentation 0, got {self.augmentation()}")
        G = self.group
        v = [Fraction(0)] * G.ab_rank
        for g, c in self.terms.items():
            for i, x in enumerate(G.abelian_coords(g)):
                v[i] += c * x
        return tuple(v)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*[{g}]" for g, c in self.terms.items())


def ring_arith(x: GroupRingElt, y: GroupRingElt, op: str) -> GroupRingElt:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def augmentation(x: GroupRingElt) -> Fraction:
    return x.augmentation()


def iq_class(x: GroupRingElt) -> Tuple[Fraction, ...]:
    return x.iq_class()
