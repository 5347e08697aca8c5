import itertools
import json
import math
from fractions import Fraction
from pathlib import Path

import pytest

from simphom.freegrp import abelian_group, cyclic_group, symmetric_group, trivial_group
from simphom.resolve import (Cocycle, CocycleError, Presentation, bilinear_cocycle, coboundary, cocycle_to_hom,
                             em_object, kan_loop_group, lift_to_moore, linear_cocycle, load_cocycle,
                             load_presentation, nerve, random_cochain, table_cocycle, truncated_resolution)
from simphom.simp import SimplicialOp, check_simplicial_identities, random_word, retract

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def test_nerve_of_trivial_group():
    X = nerve(trivial_group(), 4)
    assert [X.count(m) for m in range(5)] == [1] * 5
    assert all(X.nondegenerate(m) == [] for m in range(1, 5))


def test_nerve_z2_nondegenerate_count():
    X = nerve(cyclic_group(2), 3)
    assert X.count(2) == 4
    # |G|^2 - (2|G| - 1)
    assert len(X.nondegenerate(2)) == 1
    assert X.check() is None


def test_nerve_faces():
    G = cyclic_group(3)
    X = nerve(G, 2)
    g, h = 1, 2
    k = X.index[2][(g, h)]
    got = [X.simplices[1][X.faces[2][i][k]] for i in range(3)]
    assert got == [(h,), (G.mul(g, h),), (g,)]


def test_kan_loop_group_z2_level_zero():
    G = kan_loop_group(nerve(cyclic_group(2), 2), 1)
    assert G.levels[0].rank == 1
    assert G.eps(G.levels[0].gen(0)) == 1


def test_kan_loop_group_z3_ranks():
    G = kan_loop_group(nerve(cyclic_group(3), 4), 3)
    assert [G.levels[n].rank for n in range(4)] == [3 ** (n + 1) - 3 ** n for n in range(4)]


def test_kan_loop_group_needs_enough_simplices():
    with pytest.raises(ValueError):
        kan_loop_group(nerve(cyclic_group(2), 2), 2)


@pytest.mark.parametrize("group", [cyclic_group(2), cyclic_group(4), abelian_group([2, 2]), symmetric_group(3)])
def test_augmentation_coequalizes(group):
    G = kan_loop_group(nerve(group, 3), 2)
    assert check_simplicial_identities(G)
    for x in G.levels[1].generators():
        assert G.eps(G.face(1, 0, x)) == G.eps(G.face(1, 1, x))


def test_augmentation_kills_boundaries_of_moore_elements(rng):
    G = kan_loop_group(nerve(symmetric_group(3), 3), 2)
    for _ in range(100):
        w = retract(G, 1, 0, random_word(G.levels[1], rng, 6))
        assert G.levels[0].is_identity(G.face(1, 0, w))
        assert G.pi.is_identity(G.eps(G.face(1, 1, w)))


def test_free_presentation_is_its_own_resolution():
    G = truncated_resolution(Presentation(["a"], []), 3)
    assert [G.levels[n].rank for n in range(4)] == [1, 1, 1, 1]
    assert check_simplicial_identities(G)
    assert G.pi.free_rank == 1 and not G.pi.torsion
    assert G.exact_through == 3


def test_z2_presentation_reads_off_relator():
    P = Presentation(["a"], ["a^2"])
    G = truncated_resolution(P, 2)
    assert G.levels[1].rank == 2
    labels = [G.gen_label(1, k) for k in range(2)]
    r = G.levels[1].gen(labels.index("r"))
    a = G.levels[0].gen(0)
    assert G.face(1, 1, r) == a ** 2
    assert G.face(1, 0, r).is_identity()
    assert G.pi.torsion == (2,)
    assert G.exact_through == 1


def test_torus_presentation_file():
    P = load_presentation(DEMOS / "torus.json")
    G = truncated_resolution(P, 3)
    assert check_simplicial_identities(G)
    assert [G.levels[n].rank for n in range(3)] == [2, 3, 4]
    assert G.exact_through == 3
    assert G.pi.free_rank == 2


def test_lift_to_moore_kan(rng):
    G = kan_loop_group(nerve(cyclic_group(3), 3), 2)
    L0 = G.levels[0]
    for _ in range(30):
        w = random_word(L0, rng, 6)
        # append the generator t(g^-1) so that eps(w) = 1
        e = G.eps(w)
        if not G.pi.is_identity(e):
            k = [G.eps(x) for x in L0.generators()].index(G.pi.inv(e))
            w = w * L0.gen(k)
        z = lift_to_moore(G, w)
        assert G.face(1, 0, z).is_identity() and G.face(1, 1, z) == w


def test_lift_to_moore_presentation():
    G = truncated_resolution(load_presentation(DEMOS / "torus.json"), 2)
    w = G.levels[0].parse("b a b^-1 a^-1")
    z = lift_to_moore(G, w, [("", 0, -1)])
    assert G.face(1, 0, z).is_identity() and G.face(1, 1, z) == w


def _degeneracy_composites(src, m):
    ops = set()
    for seq in itertools.product(*[range(k + 1) for k in range(src, m)]):
        ops.add(SimplicialOp.normalize([("s", j) for j in reversed(seq)]))
    return ops


@pytest.mark.parametrize("n", [1, 2, 3])
def test_em_object_basis_sizes(n):
    for m in range(n - 1, 9):
        E = em_object(n, m)
        assert E.rank(m) == math.comb(m, m - n + 1)
        if m - (n - 1) <= 5:
            assert E.rank(m) == len(_degeneracy_composites(n - 1, m))


def test_exponent_cocycle_on_generator():
    G = truncated_resolution(Presentation(["a"], []), 2)
    h = cocycle_to_hom(G, linear_cocycle(G.pi, [1]), M=2)
    assert h.images[0][0] == {(): 1}
    assert h.check_commutes() is None


def test_zero_cocycle_gives_zero_hom():
    G = truncated_resolution(load_presentation(DEMOS / "torus.json"), 3)
    h = cocycle_to_hom(G, bilinear_cocycle(G.pi, [[0, 0], [0, 0]]), M=3)
    assert all(not v for lvl in h.images.values() for v in lvl)


def test_cup_cocycle_commutes():
    G = truncated_resolution(load_presentation(DEMOS / "torus.json"), 3)
    h = cocycle_to_hom(G, bilinear_cocycle(G.pi, [[0, 1], [0, 0]]), M=3)
    assert h.check_commutes() is None


def test_non_cocycle_rejected():
    pi = cyclic_group(2)
    c = table_cocycle(pi, 2, {(1, 1): 1})
    assert c.check() is None  # Z/2 2-cocycle
    bad = Cocycle(cyclic_group(3), 2, lambda a: 1 if a == (1, 1) else 0)
    assert bad.check() is not None
    G = kan_loop_group(nerve(cyclic_group(3), 3), 2)
    with pytest.raises(CocycleError):
        cocycle_to_hom(G, bad)


def test_coboundaries_are_cocycles(rng):
    pi = symmetric_group(3)
    for n in (1, 2, 3):
        c = coboundary(pi, n, random_cochain(pi, n - 1, rng)) if n > 1 else coboundary(pi, 1, None)
        assert c.check() is None


def test_random_cochain_is_reproducible():
    import random
    pi = cyclic_group(5)
    f = random_cochain(pi, 2, random.Random(3))
    g = random_cochain(pi, 2, random.Random(3))
    assert [f((a, b)) for a in range(5) for b in range(5)] == [g((a, b)) for a in range(5) for b in range(5)]


def test_cocycle_file_formats(tmp_path):
    pi = cyclic_group(2)
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"degree": 2, "normalized": True, "values": [{"args": ["1", "1"], "value": "1/2"}]}))
    c = load_cocycle(p, pi, pi.parse)
    assert c((1, 1)) == Fraction(1, 2) and c((0, 1)) == 0
    p.write_text(json.dumps({"degree": 2, "values": []}))
    with pytest.raises(CocycleError):
        load_cocycle(p, pi, pi.parse)
    G = truncated_resolution(load_presentation(DEMOS / "torus.json"), 2)
    cup = load_cocycle(DEMOS / "cup.json", G.pi, G.pi.parse)
    assert cup(((1, 0), (0, 1))) == 1 and cup(((0, 1), (1, 0))) == 0
