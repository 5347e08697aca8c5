import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simphom import cube as cb
from simphom.chainlab import ChainComplex, ChainMap, SparseIntMatrix, cone, homology
from simphom.cube import (Cube, NaturalTransformation, build_cube, check_prop_2_18, constant_functor,
                          designed_filtration_functor, duality_check, edge_index, fiber_is_quasi_iso,
                          fibration_sequence, filtration, filtration_oracle, induced_filtration_map,
                          iterated_homotopy_fiber, random_complex, random_split_functor, restrict_tau)

seeds = st.integers(0, 2 ** 32 - 1)


def test_edge_index_example():
    assert edge_index((0, 2), 1) == 0


def test_square_indices():
    k1, k2, k3, k4 = edge_index((), 1), edge_index((), 3), edge_index((1,), 3), edge_index((3,), 1)
    assert (k1, k2, k3, k4) == (1, 3, 2, 1)
    assert k1 == k4 and k3 == k2 - 1


@pytest.fixture(scope="module")
def split3():
    return random_split_functor(random.Random(5), 3)


def test_zero_cube_is_single_object(split3):
    F, _ = split3
    Q = build_cube(F, -1, 2)
    assert list(Q.objects) == [()] and Q.objects[()] == F.F(2)


def test_restrictions(split3):
    F, _ = split3
    for n in range(1, F.N + 1):
        for j in range(-1, n):
            Q = build_cube(F, j + 1, n)
            assert restrict_tau(Q, 1).objects[()] == F.F(n)
            assert restrict_tau(Q, 2).objects[()] == F.F(n - 1)
            assert restrict_tau(Q, 2).same_as(build_cube(F, j, n - 1))
            assert restrict_tau(Q, 1).same_as(build_cube(F, j, n))


def _one_cube(f):
    return Cube(0, 0, {(): f.source, (0,): f.target}, {((), 0): f}, {((), 0): 0})


def test_one_cube_fiber_is_shifted_cone(rng):
    for _ in range(10):
        A = random_complex(rng, (0, 1, 2), 3)
        t = rng.choice([0, 1, 2])
        f = ChainMap(A, A, {q: SparseIntMatrix.identity(A.rank(q)).scale(t) for q in A.ranks})
        hf = iterated_homotopy_fiber(_one_cube(f))
        C = cone(f).shift(-1)
        for m in range(-2, 4):
            assert homology(hf, m).as_tuple() == homology(C, m).as_tuple()


def test_surjection_kernel_is_homotopy_fiber(rng):
    for _ in range(20):
        v = rng.randint(1, 6)
        w = rng.randint(0, v)
        f = cb.random_surjection(rng, v, w)
        C, D = ChainComplex({0: v}), ChainComplex({0: w} if w else {})
        m = ChainMap(C, D, {0: f} if w else {})
        assert fiber_is_quasi_iso(_one_cube(m))


def test_square_of_zero_maps():
    def c(r):
        return ChainComplex({0: r})
    objs = {(): c(1), (0,): c(2), (1,): c(3), (0, 1): c(4)}
    edges, idx = {}, {}
    for S, i in [((), 0), ((), 1), ((1,), 0), ((0,), 1)]:
        T = tuple(sorted(S + (i,)))
        edges[(S, i)] = ChainMap.zero(objs[S], objs[T])
        idx[(S, i)] = edge_index(S, i)
    hf = iterated_homotopy_fiber(Cube(1, 1, objs, edges, idx))
    assert [homology(hf, m).betti for m in (0, -1, -2)] == [1, 2 + 3, 4]


def _zero_functor(N):
    Z = ChainComplex({})
    return constant_functor(Z, N)


def test_zero_functor_sequences():
    F = _zero_functor(2)
    fs = fibration_sequence(F, 0, 2)
    assert not fs.top.ranks or all(r == 0 for r in fs.top.ranks.values())
    assert fs.exact


def test_base_fibration_sequence(split3):
    F, _ = split3
    fs = fibration_sequence(F, -1, 0)
    # hf F^0_0 -> F(0) -> F(-1)
    assert all(fs.mid.rank(q) == F.F(0).rank(q) for q in F.F(0).ranks)
    assert fs.top.rank(0) == F.F(0).rank(0) + F.F(-1).rank(1)
    assert all(fs.bot.rank(q) == F.F(-1).rank(q) for q in F.F(-1).ranks)
    assert fs.exact


@settings(max_examples=15)
@given(seeds, st.integers(1, 3))
def test_random_split_functor_invariants(seed, N):
    rng = random.Random(seed)
    F, _ = random_split_functor(rng, N, max_rank=2)
    assert F.check()
    for n in range(-1, N + 1):
        for j in range(-1, n + 1):
            Q = build_cube(F, j, n, check=False)
            assert Q.square_failure() is None
            assert duality_check(Q)[0]
            if j + 1 <= n:
                fs = fibration_sequence(F, j, n)
                assert fs.exact and fs.alpha_surjective
    rep = check_prop_2_18(F)
    assert rep.hypothesis and rep.conclusion_holds


@settings(max_examples=15)
@given(seeds, st.integers(2, 4))
def test_filtration_monotone_and_matches_oracle(seed, N):
    F, _ = random_split_functor(random.Random(seed), N)
    for q in sorted(F.F(-1).ranks):
        a, b = filtration(F, q, N - 1), filtration_oracle(F, q, N - 1)
        assert a.is_monotone()
        assert a.same_stages(b)


def test_constant_functor_filtration_is_full(rng):
    C = random_complex(rng, (0, 1), 3)
    F = constant_functor(C, 3)
    for q in C.ranks:
        f = filtration(F, q, 2)
        assert f.dims()[1] == f.dim


def test_zero_homology_gives_zero_stages():
    C = ChainComplex({0: 1, 1: 1}, {1: SparseIntMatrix.from_dense([[1]])})
    f = filtration(constant_functor(C, 3), 0, 2)
    assert f.dim == 0 and all(v == 0 for v in f.dims().values())


def test_designed_filtration():
    F = designed_filtration_functor(3)
    a, b = filtration(F, 0, 2), filtration_oracle(F, 0, 2)
    assert a.dim == 1
    assert a.dims() == {1: 0, 2: 1} == b.dims()
    assert a.same_stages(b)


def test_kmax_bounded_by_truncation(split3):
    F, _ = split3
    with pytest.raises(ValueError):
        filtration(F, 0, F.N)


def test_identity_and_zero_transformations(split3):
    F, _ = split3
    for zeta in (NaturalTransformation.identity(F), NaturalTransformation.zero(F, F)):
        for q in sorted(F.F(-1).ranks):
            assert induced_filtration_map(zeta, q, 2)["ok"]


def test_random_natural_transformations(rng):
    for _ in range(20):
        N = rng.randint(2, 3)
        F1, d1 = random_split_functor(rng, N)
        F2, d2 = random_split_functor(rng, N)
        zeta = cb.random_natural_transformation(rng, d1, d2, F1, F2)
        assert zeta.naturality_failure() is None
        for q in sorted(F1.F(-1).ranks):
            assert induced_filtration_map(zeta, q, N - 1)["ok"]


def test_constant_functor_prop_2_18(rng):
    F = constant_functor(random_complex(rng, (0, 1), 3), 3)
    rep = check_prop_2_18(F)
    assert rep.hypothesis and rep.conclusion_holds
    for n in range(0, 4):
        for j in range(0, n + 1):
            assert iterated_homotopy_fiber(build_cube(F, j, n)).is_acyclic("Q")


def test_cech_functor(rng):
    for _ in range(5):
        f = cb.random_surjection(rng, rng.randint(1, 4), rng.randint(0, 2))
        if f.nrows > f.ncols:
            continue
        F = cb.cech_functor(f, 3)
        assert F.check()
        rep = check_prop_2_18(F)
        assert rep.hypothesis and rep.conclusion_holds


def test_negative_control_fails_hypothesis(rng):
    F = cb.negative_control_functor(rng, 3)
    rep = check_prop_2_18(F)
    assert not rep.hypothesis
    assert rep.conclusion is None
    assert rep.ok


def test_fault_injection_names_identity(split3):
    F, _ = split3
    G, where = cb.inject_fault(F, random.Random(0))
    rep = G.check()
    assert not rep
    assert rep.identity and "violated" in rep.describe()
    assert where.startswith("d_")
