from fractions import Fraction as Fr
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from envctl.capacity import (
    BlockMeasure,
    Capacity,
    GroundTooLarge,
    MobiusRepresentation,
    NotTwoMonotone,
    choquet,
    core_vertices,
    dual,
    expectation,
    inner_measure,
    is_n_monotone,
    is_totally_monotone,
    lower_stieltjes,
    mobius,
    outer_measure,
    unmobius,
    upper_stieltjes,
)

from strategies import simplex

AB = ("a", "b")


def two(va, vb):
    return Capacity.from_dict(AB, {"a": va, "b": vb})


def additive(ground, p):
    return Capacity.from_function(ground, lambda s: sum((p[ground.index(x)] for x in s), Fr(0)))


def test_mobius_examples():
    add = additive(("a", "b", "c"), [Fr(1, 5), Fr(3, 10), Fr(1, 2)])
    rep = mobius(add)
    assert all(x == 0 for m, x in enumerate(rep.mass) if bin(m).count("1") > 1)
    v = two(Fr(1, 5), Fr(3, 10))
    assert mobius(v)(AB) == Fr(1, 2)
    vac = Capacity.from_dict(("a", "b", "c"), {})
    assert mobius(vac).focal_sets() == [(frozenset("abc"), 1)]


def test_n_monotone_examples():
    add = additive(("a", "b", "c"), [Fr(1, 5), Fr(3, 10), Fr(1, 2)])
    for n in (2, 3, 4):
        assert is_n_monotone(add, n)
    v = two(Fr(1, 5), Fr(3, 10))
    assert is_totally_monotone(v)
    bad = two(Fr(4, 5), Fr(4, 5))
    rep = is_n_monotone(bad, 2, method="exhaustive")
    assert not rep and set(rep.witness) == {frozenset("a"), frozenset("b")}
    assert not is_n_monotone(bad, 2, method="mobius")
    big = Capacity.from_dict(tuple("abcdefg"), {})
    with pytest.raises(GroundTooLarge):
        is_n_monotone(big, 2, method="exhaustive")
    assert is_n_monotone(big, 3)


def test_dual_examples():
    add = additive(AB, [Fr(1, 5), Fr(4, 5)])
    assert dual(add) == add
    vac = Capacity.from_dict(("a", "b", "c"), {})
    assert all(dual(vac).values[m] == 1 for m in range(1, 8))
    assert dual(two(Fr(1, 5), Fr(3, 10)))("a") == Fr(7, 10)


def test_inner_outer_examples():
    pi = BlockMeasure.from_sets(("x1", "x2", "y"), [("x1", "x2"), ("y",)], [Fr(3, 5), Fr(2, 5)])
    inner, outer = inner_measure(pi), outer_measure(pi)
    assert inner(["x1"]) == 0
    assert inner(["x1", "x2"]) == Fr(3, 5) and outer(["x1", "x2"]) == Fr(3, 5)
    pi2 = BlockMeasure.from_sets(("p", "q", "r", "s"), [("p", "q"), ("r", "s")], [Fr(3, 5), Fr(2, 5)])
    assert inner_measure(pi2)(["p", "q", "r"]) == Fr(3, 5)
    assert outer_measure(pi2)(["p", "q", "r"]) == 1


def test_core_examples():
    add = additive(AB, [Fr(1, 5), Fr(4, 5)])
    assert core_vertices(add) == [(Fr(1, 5), Fr(4, 5))]
    assert set(core_vertices(two(Fr(1, 5), Fr(3, 10)))) == {(Fr(1, 5), Fr(4, 5)), (Fr(7, 10), Fr(3, 10))}
    vac = Capacity.from_dict(("a", "b", "c"), {})
    assert len(core_vertices(vac)) == 3
    with pytest.raises(NotTwoMonotone):
        core_vertices(two(Fr(4, 5), Fr(4, 5)))


def test_choquet_examples():
    v = two(Fr(1, 5), Fr(3, 10))
    assert choquet([Fr(2, 3), Fr(2, 3)], v) == Fr(2, 3)
    assert choquet([3, 1], v) == Fr(7, 5)
    assert choquet([3, 1], dual(v)) == Fr(12, 5)
    values = {expectation([3, 1], p) for p in core_vertices(v)}
    assert values == {Fr(7, 5), Fr(12, 5)}


def test_stieltjes_examples():
    pi = BlockMeasure.from_sets(("u", "v", "w"), [("u", "v"), ("w",)], [Fr(3, 5), Fr(2, 5)])
    assert lower_stieltjes([1, 1, 0], pi) == upper_stieltjes([1, 1, 0], pi) == Fr(3, 5)
    one = BlockMeasure.from_sets(("even", "odd"), [("even", "odd")], [1])
    assert lower_stieltjes([1, 0], one) == 0 and upper_stieltjes([1, 0], one) == 1
    X = [0, 1, Fr(1, 2)]
    assert lower_stieltjes(X, pi) == Fr(1, 5) and upper_stieltjes(X, pi) == Fr(4, 5)


@st.composite
def block_measures(draw, max_ground=5):
    n = draw(st.integers(1, max_ground))
    ground = tuple(f"g{i}" for i in range(n))
    labels = [draw(st.integers(0, n - 1)) for _ in range(n)]
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, 0)
        groups[lab] |= 1 << i
    blocks = tuple(groups.values())
    masses = draw(simplex(len(blocks)))
    return BlockMeasure(ground, blocks, tuple(masses))


@st.composite
def two_monotone(draw, max_ground=4):
    """Mixtures of a belief function and a convex distortion of a probability.

    Convex distortions are supermodular without being totally monotone in general, so the
    draws cover 2-monotone capacities outside the belief-function family.
    """
    n = draw(st.integers(1, max_ground))
    ground = tuple(f"g{i}" for i in range(n))
    w = draw(simplex((1 << n) - 1))
    bel = unmobius(MobiusRepresentation(ground, (Fr(0), *w)))
    p = draw(simplex(n))
    c = Fr(draw(st.integers(0, 3)), 4)

    def distort(s):
        t = sum((p[ground.index(x)] for x in s), Fr(0))
        return max(Fr(0), (t - c) / (1 - c))

    alpha = Fr(draw(st.integers(0, 4)), 4)
    dist = Capacity.from_function(ground, distort)
    return Capacity(ground, tuple(alpha * a + (1 - alpha) * b for a, b in zip(bel.values, dist.values)))


@settings(max_examples=50, deadline=None)
@given(block_measures())
def test_inner_measure_totally_monotone(pi):
    inner = inner_measure(pi)
    assert is_totally_monotone(inner)
    assert outer_measure(pi) == dual(inner)


@settings(max_examples=50, deadline=None)
@given(two_monotone(), st.data())
def test_choquet_is_min_over_core(v, data):
    X = [Fr(data.draw(st.integers(-5, 5)), data.draw(st.integers(1, 4))) for _ in v.ground]
    assert is_n_monotone(v, 2)
    verts = core_vertices(v)
    assert choquet(X, v) == min(expectation(X, p) for p in verts)
    assert choquet(X, dual(v)) == max(expectation(X, p) for p in verts)
    for p in verts:
        assert all(expectation([1 if m >> b & 1 else 0 for b in range(v.size)], p) >= v.values[m] for m in range(v.full + 1))


@settings(max_examples=50, deadline=None)
@given(block_measures(), st.data())
def test_stieltjes_matches_choquet(pi, data):
    X = [Fr(data.draw(st.integers(0, 6)), 6) for _ in pi.ground]
    assert lower_stieltjes(X, pi) == choquet(X, inner_measure(pi))
    assert upper_stieltjes(X, pi) == choquet(X, outer_measure(pi))
    assert lower_stieltjes(X, pi) <= upper_stieltjes(X, pi)
    assert lower_stieltjes(X, pi, all_partitions=True) == lower_stieltjes(X, pi)
    assert upper_stieltjes(X, pi, all_partitions=True) == upper_stieltjes(X, pi)


@settings(max_examples=40, deadline=None)
@given(two_monotone(max_ground=5))
def test_mobius_roundtrip_and_dual(v):
    assert unmobius(mobius(v)) == v
    assert dual(dual(v)) == v


def test_criteria_agree_on_grid():
    # exhaustive and Mobius routes must give identical verdicts
    vals = [Fr(k, 4) for k in range(5)]
    for va, vb in product(vals, repeat=2):
        v = two(va, vb)
        for n in (2, 3):
            assert bool(is_n_monotone(v, n, "exhaustive")) == bool(is_n_monotone(v, n, "mobius"))
