import io
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from simphom.chainlab import (ChainComplex, ChainMap, QHomology, IntegralHomology, SparseIntMatrix, cone, homology,
                              integer_kernel, les_verify, read_matrix_market, snf, write_matrix_market)
from simphom.cube import random_complex


def _sympy_invariants(dense):
    if not dense or not dense[0]:
        return []
    D = smith_normal_form(Matrix(dense), domain=ZZ)
    return sorted(abs(int(D[i, i])) for i in range(min(D.shape)) if D[i, i] != 0)


def _random_dense(rng, r, c, lo=-4, hi=4, density=0.5):
    return [[rng.randint(lo, hi) if rng.random() < density else 0 for _ in range(c)] for _ in range(r)]


def test_snf_single_entry():
    assert snf(SparseIntMatrix.from_dense([[2]])).diagonal == [2]


def test_snf_rank_deficient():
    res = snf(SparseIntMatrix.from_dense([[1, 0], [0, 0]]))
    assert res.diagonal == [1] and res.rank == 1


def test_snf_transforms_recompute(rng):
    for _ in range(50):
        M = SparseIntMatrix.from_dense(_random_dense(rng, 8, 10))
        res = snf(M, transforms=True)
        assert (res.U @ M @ res.V).entries == res.diagonal_matrix().entries
        for a, b in zip(res.diagonal, res.diagonal[1:]):
            assert b % a == 0


def test_snf_matches_sympy(rng):
    # independent oracle
    for _ in range(30):
        dense = _random_dense(rng, rng.randint(1, 7), rng.randint(1, 7))
        assert sorted(snf(SparseIntMatrix.from_dense(dense)).diagonal) == _sympy_invariants(dense)


def test_snf_invariant_under_permutation(rng):
    for _ in range(20):
        dense = _random_dense(rng, 6, 7)
        rows = dense[:]
        rng.shuffle(rows)
        perm = list(range(7))
        rng.shuffle(perm)
        shuffled = [[r[p] for p in perm] for r in rows]
        assert snf(SparseIntMatrix.from_dense(dense)).diagonal == snf(SparseIntMatrix.from_dense(shuffled)).diagonal


def _unimodular(rng, n, steps=8):
    U = SparseIntMatrix.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        E = SparseIntMatrix.identity(n) + SparseIntMatrix(n, n, {(i, j): rng.choice([-2, -1, 1, 2])})
        U = E @ U
    return U


@given(st.randoms(use_true_random=False))
def test_snf_complete_invariant_under_unimodular_ops(r):
    dense = _random_dense(r, 5, 6, density=0.6)
    M = SparseIntMatrix.from_dense(dense)
    N = _unimodular(r, 5) @ M @ _unimodular(r, 6)
    assert snf(M).diagonal == snf(N).diagonal


def test_integer_kernel_is_saturated(rng):
    for _ in range(20):
        M = SparseIntMatrix.from_dense(_random_dense(rng, 4, 7))
        K = integer_kernel(M)
        assert (M @ K).is_zero()
        assert K.ncols == 7 - snf(M).rank
        if K.ncols:
            assert snf(K).diagonal == [1] * K.ncols


def _torus():
    return ChainComplex({0: 1, 1: 2, 2: 1}, {1: SparseIntMatrix(1, 2), 2: SparseIntMatrix(2, 1)})


def test_torus_cellular_homology():
    C = _torus()
    assert [homology(C, n).as_tuple() for n in range(3)] == [(1, ()), (2, ()), (1, ())]


def test_multiplication_by_two():
    C = ChainComplex({0: 1, 1: 1}, {1: SparseIntMatrix.from_dense([[2]])})
    assert homology(C, 0).as_tuple() == (0, (2,))
    assert homology(C, 1).is_zero()
    assert homology(C, 0, "Q").is_zero()


def test_cone_of_identity_is_acyclic(rng):
    for _ in range(10):
        C = random_complex(rng, (0, 1, 2), 3, torsion=True)
        assert cone(ChainMap.identity(C)).is_acyclic("Z")


def test_cone_of_zero_splits(rng):
    for _ in range(10):
        A = random_complex(rng, (0, 1), 3, torsion=True)
        B = random_complex(rng, (0, 1), 3, torsion=True)
        K = cone(ChainMap.zero(A, B))
        for n in range(-1, 4):
            hb, ha = homology(B, n), homology(A, n - 1)
            hk = homology(K, n)
            assert hk.betti == hb.betti + ha.betti
            # invariant factors of a direct sum recombine, the torsion order multiplies
            assert _torsion_order(hk) == _torsion_order(hb) * _torsion_order(ha)


def _torsion_order(h):
    return math.prod(h.torsion)


def test_euler_characteristic(rng):
    for _ in range(20):
        C = random_complex(rng, (0, 1, 2, 3), 4, torsion=True)
        chi = sum((-1) ** n * homology(C, n).betti for n in C.ranks)
        assert chi == C.euler_characteristic()


def test_rational_betti_equals_integral_betti(rng):
    for _ in range(20):
        C = random_complex(rng, (0, 1, 2), 4, torsion=True)
        for n in C.ranks:
            assert homology(C, n, "Q").betti == homology(C, n, "Z").betti == QHomology(C, n).dim


def _split_ses(rng):
    """A >-> A (+) C ->> C with a random twisting term in the middle differential."""
    A = random_complex(rng, (0, 1, 2), 3)
    Cc = random_complex(rng, (0, 1, 2), 3)
    ranks = {n: A.rank(n) + Cc.rank(n) for n in range(0, 3)}
    diffs = {}
    for n in (1, 2):
        ent = {}
        for (i, j), v in A.d(n).entries.items():
            ent[(i, j)] = v
        for (i, j), v in Cc.d(n).entries.items():
            ent[(A.rank(n - 1) + i, A.rank(n) + j)] = v
        diffs[n] = SparseIntMatrix(ranks[n - 1], ranks[n], ent)
    B = ChainComplex(ranks, diffs)
    inc = ChainMap(A, B, {n: SparseIntMatrix(ranks[n], A.rank(n), {(k, k): 1 for k in range(A.rank(n))})
                          for n in ranks})
    pr = ChainMap(B, Cc, {n: SparseIntMatrix(Cc.rank(n), ranks[n],
                                             {(k, A.rank(n) + k): 1 for k in range(Cc.rank(n))}) for n in ranks})
    return A, B, Cc, inc, pr


def test_les_exact_for_split_sequences(rng):
    for _ in range(100):
        A, B, C, i, p = _split_ses(rng)
        assert les_verify(A, B, C, i, p).exact


def test_integral_coordinates():
    C = ChainComplex({0: 1, 1: 1}, {1: SparseIntMatrix.from_dense([[4]])})
    H = IntegralHomology(C, 0)
    assert H.torsion == [4]
    assert H.coords({0: 3})["torsion"] == [3]
    assert H.coords({0: 4})["torsion"] == [0]


def test_chain_map_rejects_non_commuting():
    C = ChainComplex({0: 1, 1: 1}, {1: SparseIntMatrix.from_dense([[1]])})
    D = ChainComplex({0: 1, 1: 1}, {1: SparseIntMatrix.from_dense([[0]])})
    with pytest.raises(ValueError):
        ChainMap(C, D, {0: SparseIntMatrix.from_dense([[1]]), 1: SparseIntMatrix.from_dense([[1]])})


def test_dsquared_checked():
    with pytest.raises(ValueError):
        ChainComplex({0: 1, 1: 1, 2: 1}, {1: SparseIntMatrix.from_dense([[1]]), 2: SparseIntMatrix.from_dense([[1]])})


def test_matrix_market_round_trip(rng):
    M = SparseIntMatrix.from_dense(_random_dense(rng, 5, 3))
    text = write_matrix_market(M)
    assert text.startswith("%%MatrixMarket")
    assert read_matrix_market(io.StringIO(text)).entries == M.entries
    assert read_matrix_market(text).shape == (5, 3)
