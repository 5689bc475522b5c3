import itertools

import numpy as np
import pytest

from helpers import STANDARD_Q, moduli
from wkl.covering import (CoveringDatum, CoveringError, ModuliSpace, build_covering, in_lattice)
from wkl.rootdata import build_root_datum


def cover(label, n, xi=1):
    return build_covering(label, Q=list(STANDARD_Q[label]), n=n, xi=xi)


CASES = [("A1", 2), ("A1", 4), ("A1", 6), ("A2", 2), ("A2", 3), ("A2", 4), ("C2", 2), ("C2", 3),
         ("G2", 2), ("G2", 3), ("G2", 6)]


@pytest.mark.parametrize("label, n", CASES)
def test_lattice_membership_matches_definition(label, n):
    c = cover(label, n)
    H = c.YQn
    r = c.datum.dim
    for y in itertools.product(range(-n, n + 1), repeat=r):
        expect = all(v % n == 0 for v in c.B @ np.array(y))
        assert in_lattice(y, H) == expect


@pytest.mark.parametrize("label, n", CASES)
def test_moduli_size_by_counting_classes(label, n):
    m = moduli(label, n)
    r = m.datum.dim
    classes = {m.reduce(y) for y in itertools.product(range(n), repeat=r)}
    assert len(classes) == len(m)
    assert int(np.prod(m.invariant_factors or [1])) == len(m)
    assert abs(round(np.linalg.det(np.array(m.H, dtype=float)))) == len(m)


@pytest.mark.parametrize("label, n", CASES)
def test_scaled_coroot_lattice_is_inside(label, n):
    c = cover(label, n)
    c.derive_lattices()
    for h in c.YQn:
        for b in c.datum.all_roots:
            assert b.pair(h) % c.n_alpha(b) == 0


@pytest.mark.parametrize("m_", [1, 2, 3])
def test_sl2_lattices_when_four_divides_n(m_):
    c = cover("A1", 4 * m_)
    assert c.YQn == [[2 * m_]]
    assert c.YQn_sc == [[4 * m_]]


def test_sl3_double_cover_lattice():
    c = cover("A2", 2)
    assert sorted(c.YQn) == [[0, 2], [2, 0]]
    assert c.is_saturated()


@pytest.mark.parametrize("n", range(1, 10))
def test_sl3_saturated_iff_three_does_not_divide_n(n):
    c = cover("A2", n)
    assert c.is_saturated() == (n % 3 != 0)
    if n % 3:
        assert moduli("A2", n).invariant_factors == ([n, n] if n > 1 else [])


@pytest.mark.parametrize("n", range(1, 7))
def test_sp4_saturated_iff_n_odd(n):
    assert cover("C2", n).is_saturated() == (n % 2 == 1)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_g2_moduli_when_three_divides_n(k):
    m = moduli("G2", 3 * k)
    assert len(m) == 3 * k * k
    assert sorted(m.invariant_factors) == sorted(f for f in (3 * k, k) if f > 1)


@pytest.mark.parametrize("label, n", CASES)
def test_saturated_implies_persistent(label, n):
    m = moduli(label, n)
    if m.cov.is_saturated():
        assert m.is_persistent()


@pytest.mark.parametrize("label, n", CASES)
def test_twisted_action_is_a_group_action(label, n):
    m = moduli(label, n)
    W = m.W
    y = tuple(range(1, m.datum.dim + 1))
    assert m.twisted(W.identity, y) == y
    for a in range(len(W)):
        for b in range(len(W)):
            assert m.twisted(W.mul(a, b), y) == m.twisted(a, m.twisted(b, y))


def test_simple_reflection_in_twisted_action():
    m = moduli("A2", 5)
    d = m.datum
    y = (3, -1)
    for i in range(2):
        shifted = tuple(a - (d.simple_root(i).pair(y) - 1) * c for a, c in zip(y, d.coroots[i]))
        assert m.twisted(m.W.gen(i), y) == shifted


@pytest.mark.parametrize("label, n", CASES)
def test_orbits_partition_the_moduli_space(label, n):
    m = moduli(label, n)
    orbits = m.orbits()
    seen = [m.index(y) for o in orbits for y in o.elements]
    assert sorted(seen) == list(range(len(m)))
    for o in orbits:
        assert len(o) * len(o.stabilizer) == len(m.W)
        assert set(o.stabilizer_sc) <= set(o.stabilizer)


def test_sp4_triple_cover_orbits():
    m = moduli("C2", 3)
    orbits = m.orbits()
    assert sorted(len(o) for o in orbits) == [1, 4, 4]
    single = next(o for o in orbits if o.singleton)
    assert single.elements == ((0, 2),)
    assert single.persistent


def test_sl3_double_cover_orbits():
    m = moduli("A2", 2)
    orbits = m.orbits()
    assert [len(o) for o in orbits] == [3, 1]
    assert set(orbits[0].elements) == {(0, 0), (1, 0), (0, 1)}
    assert orbits[1].elements == ((1, 1),)


@pytest.mark.parametrize("n", range(1, 13))
def test_sl2_persistence_classification(n):
    c = cover("A1", n)
    m = moduli("A1", n)
    if n % 2:
        assert c.is_saturated()
    elif n % 4 == 0:
        assert m.is_persistent() and not c.is_saturated()
    else:
        assert not m.is_persistent()


@pytest.mark.parametrize("label, n", [("A1", 6), ("C2", 3), ("C2", 2), ("A2", 3)])
def test_stabilizers_conjugate_along_the_twisted_action(label, n):
    m = moduli(label, n)
    W = m.W
    for y in m.reps:
        base = m.stabilizer(y, sc=True)
        for wo in range(len(W)):
            conj = sorted(W.mul(W.mul(wo, u), W.inverse(wo)) for u in base)
            for h in [[0] * m.datum.dim] + m.H:
                z = tuple(a + b for a, b in zip(m.twisted(wo, y), h))
                assert sorted(m.stabilizer(z, sc=True)) == conj


@pytest.mark.parametrize("label, n", [("C2", 3), ("A2", 4), ("G2", 2)])
def test_persistence_passes_to_rank_one_levis(label, n):
    m = moduli(label, n)
    assert m.is_persistent()
    for i in range(m.datum.rank):
        assert all(o.persistent for o in m.orbits([i]))


def test_dual_datum_adjoint_when_saturated():
    assert cover("A2", 2).dual_root_datum().adjoint
    assert not cover("A2", 3).dual_root_datum().adjoint


@pytest.mark.parametrize("label, n", [("C2", 2), ("G2", 3)])
def test_dual_datum_swaps_root_lengths(label, n):
    dual = cover(label, n).dual_root_datum().datum
    assert np.array_equal(dual.cartan, build_root_datum(label).cartan.T)


@pytest.mark.parametrize("label", ["A2", "C2", "G2"])
def test_dual_datum_of_linear_group(label):
    dual = cover(label, 1).dual_root_datum().datum
    assert np.array_equal(dual.cartan, build_root_datum(label).cartan)


def test_default_bisector():
    c = cover("G2", 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = rng.integers(-5, 6, size=2)
        assert c.Dform(y, y) == c.Q(y)
    assert np.array_equal(c.D + c.D.T, c.B)


def test_n_alpha_values():
    c = cover("C2", 2)
    d = c.datum
    assert [c.n_alpha(d.simple_root(i)) for i in range(2)] == [1, 2]
    c = cover("G2", 3)
    assert [c.n_alpha(c.datum.simple_root(i)) for i in range(2)] == [3, 1]


def test_full_gram_matrix_input():
    c = build_covering("A2", B_Q=[[2, -1], [-1, 2]], n=2)
    assert len(ModuliSpace(c)) == 4


@pytest.mark.parametrize("kwargs", [
    {"label": "A2", "Q": [1, 2], "n": 2},
    {"label": "A2", "Q": [1], "n": 2},
    {"label": "A2", "Q": [1, 1], "n": 0},
    {"label": "A2", "Q": [1, 1], "n": 3, "xi": -1},
    {"label": "A2", "B_Q": [[2, 0], [1, 2]], "n": 2},
    {"label": "A2", "B_Q": [[1, 0], [0, 1]], "n": 2},
    {"label": "Z2", "Q": [1, 1], "n": 2},
])
def test_invalid_coverings_raise(kwargs):
    kwargs = dict(kwargs)
    label = kwargs.pop("label")
    with pytest.raises(CoveringError):
        build_covering(label, **kwargs)


def test_bisector_must_split_the_form():
    d = build_root_datum("A2")
    B = np.array([[2, -1], [-1, 2]])
    with pytest.raises(CoveringError):
        CoveringDatum(d, B, 2, 1, D=np.array([[1, 0], [0, 1]]))
