import random
from fractions import Fraction
from pathlib import Path

import pytest

from simphom.chainlab import QHomology, nullspace_q
from simphom.freegrp import abelian_group, cyclic_group, symmetric_group, trivial_group
from simphom.homology import (BarElement, RangeError, bar_complex, bar_oracle, bar_sequence_tests, compare,
                              dbar_class, e_complex, e_homology, ebar_complex, ebar_homology, homology_report,
                              hopf_check, pairing, pairing_matrix)
from simphom.resolve import (Presentation, bilinear_cocycle, coboundary, kan_loop_group, lift_to_moore,
                             linear_cocycle, load_presentation, nerve, random_cochain, truncated_resolution)
from simphom.simp import TruncationError, random_word, retract

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def _groups(results):
    return [r.group.as_tuple() for r in results]


def kan(G, N):
    return kan_loop_group(nerve(G, N + 1), N)


@pytest.fixture(scope="module")
def torus():
    return truncated_resolution(load_presentation(DEMOS / "torus.json"), 3)


def test_trivial_group_has_no_homology():
    G = truncated_resolution(Presentation([], []), 3)
    assert all(r.group.is_zero() for r in e_homology(G))
    assert all(r.group.is_zero() for r in e_homology(kan(trivial_group(), 3)))


def test_circle():
    G = truncated_resolution(Presentation(["a"], []), 3)
    assert _groups(e_homology(G, N=2)) == [(1, ()), (0, ())]


def test_z2_kan_loop_group():
    assert _groups(e_homology(kan(cyclic_group(2), 3))) == [(0, (2,)), (0, ()), (0, (2,))]


def test_bar_oracle_values():
    # brute-force SNF of explicit bar differentials
    assert [h.as_tuple() for h in bar_oracle(cyclic_group(2), 3)] == [(1, ()), (0, (2,)), (0, ()), (0, (2,))]
    assert [h.as_tuple() for h in bar_oracle(cyclic_group(3), 3)] == [(1, ()), (0, (3,)), (0, ()), (0, (3,))]
    assert [h.as_tuple() for h in bar_oracle(trivial_group(), 3)] == [(1, ())] + [(0, ())] * 3


def test_bar_complex_squares_to_zero():
    C = bar_complex(symmetric_group(3), 2)
    for m in (2, 3):
        assert (C.d(m - 1) @ C.d(m)).is_zero()


def test_bar_oracle_size_bound():
    with pytest.raises(RangeError):
        bar_oracle(symmetric_group(3), 9)


@pytest.mark.parametrize("G", [cyclic_group(2), cyclic_group(3), cyclic_group(4), abelian_group([2, 2]),
                               cyclic_group(6)])
def test_cross_oracle(G):
    res = e_homology(kan(G, 3))
    cmp = compare(res, bar_oracle(G, 3))
    assert cmp["match"] and len(cmp["degrees"]) == 3


def test_cross_oracle_s3_rational():
    res = e_homology(kan(symmetric_group(3), 2), "rat")
    assert _groups(res) == [h.as_tuple() for h in bar_oracle(symmetric_group(3), 2, "rat")][1:]


@pytest.mark.parametrize("G", [cyclic_group(2), cyclic_group(3), abelian_group([2, 2])])
def test_ebar_matches_e(G):
    E = e_complex(kan(G, 3))
    Eb = ebar_complex(E)
    assert _groups(ebar_homology(Eb)) == _groups(e_homology(kan(G, 3)))
    # one generator per nondegenerate simplex of the nerve
    n = len(list(G.elements()))
    assert [Eb.complex.rank(k) for k in range(1, 5)] == [(n - 1) ** k for k in range(1, 5)]


def test_ebar_of_circle_vanishes_above_one():
    E = e_complex(truncated_resolution(Presentation(["a"], []), 3))
    Eb = ebar_complex(E)
    assert Eb.complex.rank(1) == 1 and all(Eb.complex.rank(k) == 0 for k in (2, 3, 4))
    assert _groups(ebar_homology(Eb)) == _groups(e_homology(E.G))


def test_ebar_of_zero_group():
    Eb = ebar_complex(e_complex(truncated_resolution(Presentation([], []), 2)))
    assert all(r == 0 for r in Eb.complex.ranks.values())


def test_verified_flags():
    G = truncated_resolution(Presentation(["a"], ["a^2"]), 3)
    res = e_homology(G)
    assert [r.verified for r in res] == [True, False, False]
    assert res[1].to_json()["flag"] == "unverified-range"
    with pytest.raises(RangeError):
        e_homology(G, strict_range=True)
    with pytest.raises(TruncationError):
        e_complex(G, N=5)


def test_report_format():
    G = cyclic_group(2)
    res = e_homology(kan(G, 2))
    rep = homology_report(res, compare(res, bar_oracle(G, 2)))
    assert rep["homology"][0] == {"degree": 1, "betti": 0, "torsion": [2], "verified": True}
    assert rep["oracle"]["match"]


def test_torus_homology(torus):
    assert _groups(e_homology(torus, N=2)) == [(2, ()), (1, ())]


def test_relator_class_generates(torus):
    r = torus.levels[1].gen([torus.gen_label(1, k) for k in range(torus.levels[1].rank)].index("r"))
    cls = dbar_class(torus, r)
    assert cls["generator"] and abs(cls["coords"]["free"][0]) == 1


def test_degenerate_element_has_trivial_class(torus, rng):
    L0, L1 = torus.levels[0], torus.levels[1]
    for _ in range(10):
        u = random_word(L0, rng, 5)
        s = torus.degen(0, 0, u)
        z = s * torus.degen(0, 0, L0.gen(0)) * s.inverse() * torus.degen(0, 0, L0.gen(0)).inverse()
        z = retract(torus, 1, 0, z)
        cls = dbar_class(torus, z)
        assert cls["zero"]


def test_z2_classes_vanish(rng):
    G = kan(cyclic_group(2), 2)
    for _ in range(20):
        z = retract(G, 1, 0, random_word(G.levels[1], rng, 6))
        w = G.face(1, 1, z)
        if any(w.exponent_sums()):
            with pytest.raises(ValueError):
                dbar_class(G, z)
            continue
        assert dbar_class(G, z)["zero"]
        assert dbar_class(G, z, "rat")["zero"]


def test_hopf_check_torus(torus):
    rep = hopf_check(torus, [("a b a^-1 b^-1", [("", 0, 1)], "generator"),
                             ("a", None, None),
                             ("b a b^-1 a^-1", [("", 0, -1)], "generator")])
    assert [w["ok"] for w in rep["witnesses"]] == [True, False, True]
    assert "not in R" in rep["witnesses"][1]["error"]


def test_pairing_exponent_cocycle():
    G = truncated_resolution(Presentation(["a"], []), 2)
    assert pairing(G, linear_cocycle(G.pi, [1]), {0: 1}) == 1


def test_pairing_cup_cocycle(torus):
    M = pairing_matrix(torus, [bilinear_cocycle(torus.pi, [[0, 1], [0, 0]])], 2)
    assert [[abs(x) for x in row] for row in M["matrix"]] == [[1]]
    # classical value: c(a, b) - c(b, a) on the bar cycle (a|b) - (b|a)
    c = bilinear_cocycle(torus.pi, [[0, 1], [0, 0]])
    a, b = (1, 0), (0, 1)
    assert abs(c((a, b)) - c((b, a))) == 1


def test_pairing_zero_cocycle(torus):
    M = pairing_matrix(torus, [bilinear_cocycle(torus.pi, [[0, 0], [0, 0]])], 2)
    assert M["matrix"] == [[0]]


def test_coboundaries_pair_to_zero(torus, rng):
    H = QHomology(e_complex(torus, "rat", 2).complex, 2)
    for _ in range(10):
        c = coboundary(torus.pi, 2, random_cochain(torus.pi, 1, rng))
        for z in H.reps:
            assert pairing(torus, c, z) == 0


def test_coboundaries_pair_to_zero_on_every_cycle():
    G = kan(cyclic_group(3), 2)
    D = e_complex(G, "rat", 2).complex.d(2)
    rng = random.Random(2)
    cycles = nullspace_q(D)
    assert cycles
    for _ in range(5):
        c = coboundary(G.pi, 2, random_cochain(G.pi, 1, rng))
        for z in cycles[:10]:
            assert pairing(G, c, z) == 0


def test_pairing_invariant_under_boundary_perturbation(torus, rng):
    c = bilinear_cocycle(torus.pi, [[1, 2], [0, -1]])
    E = e_complex(torus, "rat", 3)
    H = QHomology(E.complex, 2)
    base = pairing(torus, c, H.reps[0])
    D = E.complex.d(3)
    for _ in range(20):
        col = {k: Fraction(rng.randint(-3, 3)) for k in range(D.ncols)}
        z = dict(H.reps[0])
        for k, v in D.apply(col).items():
            z[k] = z.get(k, 0) + v
        assert pairing(torus, c, z) == base


def test_pairing_rejects_non_cycle():
    G = kan(cyclic_group(3), 2)
    D = e_complex(G, "rat", 2).complex.d(2)
    k = next(k for k in range(D.ncols) if D.apply({k: 1}))
    c = coboundary(G.pi, 2, random_cochain(G.pi, 1, random.Random(0)))
    with pytest.raises(ValueError):
        pairing(G, c, {k: 1})


def test_bar_sequences_z2(rng):
    G = kan(cyclic_group(2), 3)
    for n in (2, 3):
        for j in range(n - 1):
            rep = bar_sequence_tests(G, n, j, 100, rng)
            assert rep["ok"], rep["failures"][:3]


def test_zero_bar_element_is_sectioned():
    G = kan(cyclic_group(2), 3)
    x = BarElement(1)
    from simphom.homology import _bar_degen, _bar_face
    assert _bar_face(G, _bar_degen(G, x, 1), 1) == x


def test_degree_zero_component_rejected():
    G = kan(cyclic_group(2), 3)
    from simphom.homology import _in_moore
    x = BarElement(2, {(): 1})
    assert all(_in_moore(G, x, j) == 0 for j in range(0, 2))
