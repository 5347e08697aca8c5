import random

import pytest

from simphom.freegrp import GroupRingElt, cyclic_group, symmetric_group
from simphom.resolve import kan_loop_group, nerve
from simphom.simp import (MooreIdealError, SimplicialGroupRing, SimplicialIdentityError, SimplicialOp,
                          TruncationError, boundary_of_retract, check_simplicial_identities,
                          constant_simplicial_group, dold_kan_finite, homotopy_groups, lam, moore_member,
                          moore_square_witness, random_moore_ring_element, random_word, retract)
from simphom.simp import apply_symbols, random_moore_element


@pytest.fixture(scope="module")
def K2():
    return kan_loop_group(nerve(cyclic_group(2), 5), 4)


@pytest.fixture(scope="module")
def K3():
    return kan_loop_group(nerve(cyclic_group(3), 5), 4)


# operators

def test_operator_normal_form():
    # d_0 s_1 = s_0 d_0
    assert SimplicialOp.parse("d0 s1") == SimplicialOp([0], [0])
    # d_1 s_1 = id
    assert SimplicialOp.parse("d1s1").is_identity()
    assert SimplicialOp.parse("s0 s0") == SimplicialOp([1, 0], [])
    with pytest.raises(ValueError):
        SimplicialOp([0, 1], [])


def _random_symbols(rng, n, N, length):
    syms, m = [], n
    for _ in range(length):
        if m > 0 and (m == N or rng.random() < 0.5):
            syms.append(("d", rng.randint(0, m)))
            m -= 1
        else:
            syms.append(("s", rng.randint(0, m)))
            m += 1
    return list(reversed(syms))


def test_normalized_composites_act_identically(K2, rng):
    for n in range(K2.N + 1):
        for _ in range(500):
            syms = _random_symbols(rng, n, K2.N, rng.randint(1, 5))
            op = SimplicialOp.normalize(syms)
            g = random_word(K2.levels[n], rng, 5)
            assert op.valid_at(n)
            assert op.apply(K2, n, g) == apply_symbols(K2, n, g, syms)


# identity checks

def test_kan_loop_group_identities_through_degree_five():
    G = kan_loop_group(nerve(cyclic_group(2), 6), 5)
    assert check_simplicial_identities(G)


def test_constant_group_identities():
    assert check_simplicial_identities(constant_simplicial_group(symmetric_group(3), 3))


def test_mutated_degeneracy_is_named(K2):
    bad = K2.with_degeneracy_image(1, 0, 0, K2.levels[2].gen(1))
    rep = check_simplicial_identities(bad)
    assert not rep
    assert rep.identity and ("s" in rep.identity)
    assert "violated" in rep.describe()


# Moore filtration and retractions

def test_identity_in_every_moore_stage(K2):
    for n in range(1, K2.N + 1):
        e = K2.levels[n].identity()
        assert all(moore_member(K2, n, j, e) for j in range(-1, n + 1))


def test_generator_with_nontrivial_d0_not_in_stage_zero(K2):
    L = K2.levels[1]
    g = next(x for x in L.generators() if not K2.levels[0].is_identity(K2.face(1, 0, x)))
    assert not moore_member(K2, 1, 0, g)
    assert moore_member(K2, 1, -1, g)


def test_retract_in_stage_zero(K2, rng):
    for n in range(1, K2.N + 1):
        for _ in range(50):
            g = random_word(K2.levels[n], rng, 6)
            assert K2.levels[n - 1].is_identity(K2.face(n, 0, retract(K2, n, 0, g)))


@pytest.mark.parametrize("G", ["K2", "K3"])
def test_retract_properties(G, request, rng):
    G = request.getfixturevalue(G)
    for n in range(1, G.N + 1):
        L = G.levels[n]
        for j in range(n):
            for _ in range(40):
                g, h = random_word(L, rng, 6), random_word(L, rng, 6)
                r = retract(G, n, j, g)
                assert moore_member(G, n, j, r)
                assert retract(G, n, j, r) == r
                defect = retract(G, n, j, g * h) * (r * retract(G, n, j, h)).inverse()
                assert not any(L.abelian_coords(defect))


def test_lambda_is_s_d(K2, rng):
    g = random_word(K2.levels[2], rng, 6)
    assert lam(K2, 1, 2, g) == K2.degen(1, 1, K2.face(2, 1, g))


def test_split_exactness_pointwise(K2, rng):
    for n in range(1, K2.N):
        for k in range(n):
            for _ in range(20):
                x = retract(K2, n, k, random_word(K2.levels[n], rng, 6))
                y = K2.degen(n, k + 1, x)
                assert moore_member(K2, n + 1, k, y)
                assert K2.face(n + 1, k + 1, y) == x


def test_boundary_identity_degree_one(K2, rng):
    for _ in range(50):
        g = random_word(K2.levels[1], rng, 6)
        A = boundary_of_retract(K2, 1, g)
        assert A == K2.face(1, 1, g) * K2.face(1, 0, g).inverse()
        assert A == K2.face(1, 1, retract(K2, 1, 0, g))


def test_boundary_identity_of_identity(K2):
    for n in range(1, K2.N + 1):
        assert boundary_of_retract(K2, n, K2.levels[n].identity(), strict=True).is_identity()


def test_boundary_identity_word_level_degree_two(K2, rng):
    for _ in range(200):
        boundary_of_retract(K2, 2, random_word(K2.levels[2], rng, 6), strict=True)


def test_boundary_identity_abelianized_degrees_three_four(K2, rng):
    for n in (3, 4):
        for _ in range(100):
            boundary_of_retract(K2, n, random_word(K2.levels[n], rng, 6), check=True)


def test_boundary_identity_word_level_breaks_in_degree_three(K2, rng):
    # the two sides differ by a product of commutators [x, s_i z]
    fails = 0
    for _ in range(100):
        try:
            boundary_of_retract(K2, 3, random_word(K2.levels[3], rng, 6), strict=True)
        except SimplicialIdentityError:
            fails += 1
    assert fails > 0


def test_truncation_is_enforced(K2):
    with pytest.raises(TruncationError):
        K2.degen(K2.N, 0, K2.levels[K2.N].identity())
    with pytest.raises(TruncationError):
        retract(K2, 2, 2, K2.levels[2].identity())


# homotopy groups

def test_constant_group_homotopy():
    G = constant_simplicial_group(symmetric_group(3), 3)
    assert homotopy_groups(G, 0).order == 6
    assert homotopy_groups(G, 1).is_trivial()
    assert homotopy_groups(G, 2).is_trivial()


def test_k_z2_1():
    G = dold_kan_finite([[], [2]], [[], []], 3)
    assert check_simplicial_identities(G)
    assert homotopy_groups(G, 0).is_trivial()
    assert homotopy_groups(G, 1).invariants == [2]


def test_two_term_complexes():
    # Z/2 --x2--> Z/4 : H_0 = Z/2, H_1 = 0
    G = dold_kan_finite([[4], [2]], [[], [[2]]], 2)
    assert check_simplicial_identities(G)
    assert homotopy_groups(G, 0).invariants == [2]
    assert homotopy_groups(G, 1).is_trivial()
    # Z/4 --mod 2--> Z/2 : H_0 = 0, H_1 = Z/2
    G = dold_kan_finite([[2], [4]], [[], [[1]]], 2)
    assert homotopy_groups(G, 0).is_trivial()
    assert homotopy_groups(G, 1).invariants == [2]


# square-zero witness

def test_witness_of_zero(K2):
    R = SimplicialGroupRing(K2)
    z = GroupRingElt(K2.levels[2])
    assert moore_square_witness(R, 2, z, z).is_zero()


def test_witness_on_group_elements(K2, rng):
    R = SimplicialGroupRing(K2)
    for n in (1, 2, 3):
        L = K2.levels[n]
        for _ in range(5):
            g, h = random_moore_element(K2, n, rng, 4), random_moore_element(K2, n, rng, 4)
            a, b = GroupRingElt.aug_gen(L, g), GroupRingElt.aug_gen(L, h)
            w = moore_square_witness(R, n, a, b)
            assert R.face(n + 1, n + 1, w) == a * b
            assert R.in_moore_ideal(n + 1, w, n) is None


def test_witness_random_pairs(K3, rng):
    R = SimplicialGroupRing(K3)
    for _ in range(100):
        n = rng.choice([1, 2])
        a, b = random_moore_ring_element(K3, n, rng), random_moore_ring_element(K3, n, rng)
        moore_square_witness(R, n, a, b, check=True)


def test_witness_rejects_non_ideal(K2):
    R = SimplicialGroupRing(K2)
    L = K2.levels[1]
    a = GroupRingElt.aug_gen(L, L.gen(0))
    with pytest.raises(MooreIdealError):
        moore_square_witness(R, 1, a, a)
