import itertools

import numpy as np
import pytest

from helpers import element
from wkl.rootdata import RootDatumError, build_root_datum, parse_type


TYPES = ["A1", "A2", "A3", "B3", "C2", "G2", "A1xA1"]
ORDERS = {"A1": 2, "A2": 6, "A3": 24, "B3": 48, "C2": 8, "G2": 12, "A1xA1": 4}


def weyl(label, lattice="sc"):
    return build_root_datum(label, lattice=lattice).weyl_group


@pytest.mark.parametrize("label", TYPES)
def test_weyl_group_order(label):
    assert len(weyl(label)) == ORDERS[label]


@pytest.mark.parametrize("label", TYPES)
def test_longest_element_length_is_number_of_positive_roots(label):
    W = weyl(label)
    assert W.length(W.longest) == len(W.datum.positive_roots)
    assert len(W.datum.all_roots) == 2 * len(W.datum.positive_roots)


@pytest.mark.parametrize("label", TYPES)
def test_rho_pairs_to_one_with_simple_roots(label):
    d = build_root_datum(label)
    for i in range(d.rank):
        pairing = sum(a * b for a, b in zip(d.roots[i], d.rho))
        assert pairing == 1


def test_cartan_convention():
    # entry (i, j) is <alpha_i^vee, alpha_j>; alpha_1^vee is the long coroot of C2
    assert build_root_datum("C2").cartan.tolist() == [[2, -2], [-1, 2]]
    assert build_root_datum("A2").cartan.tolist() == [[2, -1], [-1, 2]]


def test_positive_coroots_of_rank_two_types():
    pos = lambda label: {b.coroot for b in build_root_datum(label).positive_roots}
    assert pos("A2") == {(1, 0), (0, 1), (1, 1)}
    assert pos("C2") == {(1, 0), (0, 1), (1, 1), (1, 2)}
    assert len(pos("G2")) == 6


def test_reflections_act_on_coroots():
    d = build_root_datum("G2")
    W = d.weyl_group
    images = {W[W.gen(i)].act(d.coroots[j]) for i in range(2) for j in range(2) if i != j}
    assert all(d.is_positive_coroot(v) for v in images)
    for i in range(2):
        assert W[W.gen(i)].act(d.coroots[i]) == tuple(-v for v in d.coroots[i])


@pytest.mark.parametrize("label", TYPES)
def test_every_reduced_word_gives_the_element(label):
    W = weyl(label)
    for w in range(len(W)):
        words = W.reduced_words(w)
        assert words
        for word in words:
            assert len(word) == W.length(w)
            assert W.from_word(word) == w


@pytest.mark.parametrize("label", ["A2", "C2", "G2"])
def test_dihedral_reduced_words(label):
    W = weyl(label)
    m = {"A2": 3, "C2": 4, "G2": 6}[label]
    assert sorted(W.reduced_words(W.longest)) == [tuple((i + k) % 2 for k in range(m)) for i in range(2)]


def _bruhat_by_reflections(W):
    """Transitive closure of x < x t over reflections t with l(x t) > l(x)."""
    N = len(W)
    refl = {W.mul(W.mul(g, W.gen(i)), W.inverse(g)) for g in range(N) for i in range(W.datum.rank)}
    le = np.eye(N, dtype=bool)
    for x in range(N):
        for t in refl:
            y = W.mul(x, t)
            if W.length(y) > W.length(x):
                le[x, y] = True
    for k in range(N):
        le |= np.outer(le[:, k], le[k, :])
    return le


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3"])
def test_bruhat_order_matches_reflection_closure(label):
    W = weyl(label)
    assert np.array_equal(W.bruhat_matrix, _bruhat_by_reflections(W))


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3"])
def test_left_length_criterion(label):
    W = weyl(label)
    d = W.datum
    for w in range(len(W)):
        winv = W[W.inverse(w)]
        for i in range(d.rank):
            longer = W.length(W.mul(W.gen(i), w)) > W.length(w)
            assert longer == d.is_positive_coroot(winv.act(d.coroots[i]))


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3"])
def test_descent_sets_of_extremes(label):
    W = weyl(label)
    everything = frozenset(range(W.datum.rank))
    assert W.left_descents(W.longest) == everything == W.right_descents(W.longest)
    assert W.left_descents(W.identity) == frozenset()


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3"])
def test_minimal_coset_representatives(label):
    W = weyl(label)
    r = W.datum.rank
    for k in range(r + 1):
        for S in itertools.combinations(range(r), k):
            reps = W.minimal_coset_reps(S)
            sub = W.parabolic(S)
            assert len(reps) * len(sub) == len(W)
            products = {W.mul(u, x) for u in sub for x in reps}
            assert len(products) == len(W)
    assert W.minimal_coset_reps(range(r)) == [W.identity]
    assert sorted(W.minimal_coset_reps(())) == list(range(len(W)))


def test_minimal_coset_reps_of_a2():
    W = weyl("A2")
    assert {W.name(w) for w in W.minimal_coset_reps([0])} == {"id", "w2", "w2w1"}


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3"])
def test_parabolic_longest_negates_its_simple_coroots(label):
    W = weyl(label)
    d = W.datum
    for S in itertools.combinations(range(d.rank), 2):
        wS = W[W.parabolic_longest(S)]
        for i in S:
            assert not d.is_positive_coroot(wS.act(d.coroots[i]))


@pytest.mark.parametrize("label", ["A2", "C2", "G2", "A3"])
def test_support_does_not_depend_on_the_word(label):
    W = weyl(label)
    for w in range(len(W)):
        assert len({W.support(w, word) for word in W.reduced_words(w)}) == 1


@pytest.mark.parametrize("label, count", [("A2", 3), ("C2", 5), ("G2", 6), ("A3", 5)])
def test_conjugacy_class_count(label, count):
    assert len(weyl(label).conjugacy_classes) == count


def test_element_names():
    W = weyl("A2")
    assert [W.name(w) for w in range(len(W))] == ["id", "w1", "w2", "w1w2", "w2w1", "w_G"]
    assert W.mul(element(W, "w1"), element(W, "w2")) == element(W, "w1w2")


def test_adjoint_and_gl_lattices():
    ad = build_root_datum("A2", lattice="adjoint")
    assert ad.coroots.tolist() == [[2, -1], [-1, 2]]
    assert len(ad.weyl_group) == 6
    gl = build_root_datum("A2", lattice="GL")
    assert gl.dim == 3 and gl.rank == 2
    assert np.array_equal(gl.cartan, build_root_datum("A2").cartan)


def test_rank_from_separate_argument():
    assert parse_type("C", 3) == [("C", 3)]
    assert parse_type("A1xA1") == [("A", 1), ("A", 1)]


@pytest.mark.parametrize("label, kwargs", [
    ("H3", {}),
    ("A", {}),
    ("A2", {"lattice": "nonsense"}),
    ("C2", {"lattice": "GL"}),
    ("A2", {"rank": 3}),
])
def test_bad_requests_raise(label, kwargs):
    with pytest.raises(RootDatumError):
        build_root_datum(label, **kwargs)
