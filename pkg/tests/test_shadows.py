import random
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homshadow.graphs import DirectedGraph, GraphPath, path_reduce
from homshadow.shadows import (
    ball_mass,
    darkness_measure,
    densify,
    half_points,
    hausdorff_distance,
    parametrized_shadow,
)
from homshadow.spectral import dominant_eigendata
from homshadow.words import Word

W = "abbbAABaa"  # a b³ a⁻² b⁻¹ a²
W_VERTICES = [(0, 0), (1, 0), (1, 1), (1, 2), (1, 3), (0, 3), (-1, 3), (-1, 2), (0, 2), (1, 2)]

steps2 = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=30)


def prefix_sums(steps, dim):
    out = [tuple([0] * dim)]
    for s in steps:
        v = list(out[-1])
        v[abs(s) - 1] += 1 if s > 0 else -1
        out.append(tuple(v))
    return out


def test_example_word_vertices():
    sh = parametrized_shadow(Word.parse(W))
    assert [tuple(v) for v in sh.vertices.tolist()] == W_VERTICES
    assert len(sh) == 9


def test_shadow_small_examples():
    sh = parametrized_shadow(Word(), dim=2)
    assert sh.vertices.tolist() == [[0, 0]]
    sh = parametrized_shadow(Word.parse("bbaBB"))
    assert [tuple(v) for v in sh.vertices.tolist()] == [(0, 0), (0, 1), (0, 2), (1, 2), (1, 1), (1, 0)]


@given(steps2)
def test_shadow_is_prefix_sums(steps):
    sh = parametrized_shadow(steps, dim=2)
    assert [tuple(v) for v in sh.vertices.tolist()] == prefix_sums(steps, 2)
    diffs = np.abs(np.diff(sh.vertices, axis=0)).sum(axis=1)
    assert (diffs == 1).all()


def test_shadow_of_graph_path():
    G = DirectedGraph(((0, 1), (1, 0), (0, 0)), 2)
    sh = parametrized_shadow(GraphPath(G, 0, (1, 2, 3, -3)))
    assert sh.vertices.tolist() == [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1], [1, 1, 0]]


def test_shadow_times_with_lengths():
    sh = parametrized_shadow(Word.parse("abA"), lengths=[Fraction(2), Fraction(1, 3)])
    assert sh.times == (0, 2, Fraction(7, 3), Fraction(13, 3))


def test_darkness_example():
    mu = darkness_measure(Word.parse(W))
    assert len(mu.masses) == 9
    assert all(m == Fraction(1, 9) for m in mu.masses)
    assert mu.total() == 1
    assert darkness_measure(Word.parse("a"), lengths=[Fraction(5), Fraction(1)]).masses == [1]


@pytest.mark.parametrize("N", [1, 2, 5, 20])
def test_darkness_conjugate_family(N):
    w = Word([2] * N + [1] + [-2] * N)
    mu = darkness_measure(w)
    assert len(mu.masses) == 2 * N + 1
    assert set(mu.masses) == {Fraction(1, 2 * N + 1)}


def test_darkness_empty_raises():
    with pytest.raises(ValueError):
        darkness_measure(Word(), dim=2)


@given(steps2, st.lists(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=12), min_size=2, max_size=2))
@settings(max_examples=60, deadline=None)
def test_darkness_total_mass(steps, lengths):
    mu = darkness_measure(steps, lengths=lengths, dim=2)
    assert mu.total() == 1
    # mass of a segment = crossings * length / total length
    counts = {}
    lo = prefix_sums(steps, 2)
    for s, v in zip(steps, lo):
        base = list(v)
        if s < 0:
            base[abs(s) - 1] -= 1
        key = (tuple(base), abs(s) - 1)
        counts[key] = counts.get(key, 0) + 1
    total = sum(lengths[abs(s) - 1] for s in steps)
    expected = {k: c * lengths[k[1]] / total for k, c in counts.items()}
    assert mu.as_dict() == expected


def test_darkness_total_mass_field_lengths():
    d = dominant_eigendata([[1, 1], [1, 0]])
    rng = random.Random(3)
    for _ in range(10):
        steps = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(1, 25))]
        mu = darkness_measure(steps, lengths=list(d.right), dim=2)
        assert mu.total() == 1


def test_half_points_examples():
    assert half_points(Word.parse("a"), dim=3).points() == {(Fraction(1, 2), 0, 0)}
    hp = half_points(Word.parse("ababA"))
    h = Fraction(1, 2)
    assert hp.points() == {(h, 0), (1, h), (3 * h, 1), (2, 3 * h), (3 * h, 2)}
    assert len(half_points(Word(), dim=2)) == 0
    with pytest.raises(ValueError):
        half_points(Word.parse("a"), lengths=[2, 1])


@given(steps2)
@settings(max_examples=60, deadline=None)
def test_half_points_properties(steps):
    hp = half_points(steps, dim=2)
    for x in hp.doubled:
        assert sum(c % 2 for c in x) == 1  # exactly one non-integral coordinate
    sh = parametrized_shadow(steps, dim=2)
    assert hausdorff_distance(densify(sh, 16), hp.array()) <= 0.5 + 1e-12


def test_half_points_of_reduction_are_contained():
    G = DirectedGraph.rose(2)
    rng = random.Random(0)
    for _ in range(200):
        steps = tuple(rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(1, 8)))
        p = GraphPath(G, 0, steps)
        r = path_reduce(p)
        if not r.steps:
            continue
        assert half_points(r) <= half_points(p)


def test_hausdorff_examples():
    X = np.array([[0.0, 0.0], [1.0, 2.0]])
    assert hausdorff_distance(X, X) == 0
    assert hausdorff_distance([[0, 0]], [[3, 4]]) == 5
    seg = densify(parametrized_shadow(Word.parse("a")), samples=4)
    assert hausdorff_distance(seg, [[0], [1]]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        hausdorff_distance(np.zeros((0, 2)), X)


def test_hausdorff_metric_properties():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A, B, C = (rng.normal(size=(rng.integers(1, 20), 3)) for _ in range(3))
        ab, ba = hausdorff_distance(A, B), hausdorff_distance(B, A)
        assert ab == ba
        assert ab <= hausdorff_distance(A, C) + hausdorff_distance(C, B) + 1e-12


def test_ball_mass_examples():
    mu = darkness_measure(Word.parse(W))
    h = Fraction(1, 2)
    assert ball_mass(mu, (1, Fraction(3, 2)), h) == Fraction(1, 9)
    assert ball_mass(mu, (0, 0), 100) == 1
    assert ball_mass(mu, (50, 50), 1) == 0
    point = darkness_measure(Word.parse("a"), k=1000, dim=2)
    assert ball_mass(point, (0, 0), Fraction(1, 100)) == 1


def test_ball_mass_exact_clipping():
    mu = darkness_measure(Word.parse("a"), dim=2)
    # a 5-12-13 triangle: the ball of radius 5/13 around (0, 3/13) cuts [0, 4/13] out of the segment
    assert ball_mass(mu, (0, Fraction(3, 13)), Fraction(5, 13)) == Fraction(4, 13)
    assert ball_mass(mu, (Fraction(1, 2), 0), Fraction(1, 4)) == Fraction(1, 2)
    with pytest.raises(ValueError):
        ball_mass(mu, (0, 0, 0), 1)


def test_ball_mass_monotone_in_radius():
    rng = random.Random(2)
    steps = [rng.choice([1, -1, 2, -2]) for _ in range(60)]
    mu = darkness_measure(steps, dim=2)
    c = (Fraction(1), Fraction(-2))
    vals = [ball_mass(mu, c, Fraction(r, 4)) for r in range(0, 40)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    fvals = [ball_mass(mu, (1.0, -2.0), r / 4 + 1e-3) for r in range(0, 40)]
    assert all(a <= b + 1e-12 for a, b in zip(fvals, fvals[1:]))


@given(steps2, st.integers(1, 9), st.integers(0, 6), st.integers(-4, 4), st.integers(-4, 4))
@settings(max_examples=60, deadline=None)
def test_rescaling(steps, k, r, cx, cy):
    mu1 = darkness_measure(steps, dim=2)
    muk = darkness_measure(steps, k=k, dim=2)
    c = (Fraction(cx, k), Fraction(cy, k))
    rad = Fraction(r, 2 * k)
    assert ball_mass(muk, c, rad) == ball_mass(mu1, (k * c[0], k * c[1]), k * rad)
    assert np.allclose(muk.midpoints() * k, mu1.midpoints())


def test_float_and_exact_ball_mass_agree():
    rng = random.Random(8)
    steps = [rng.choice([1, -1, 2, -2]) for _ in range(80)]
    mu = darkness_measure(steps, k=3, dim=2)
    for _ in range(20):
        c = (Fraction(rng.randint(-9, 9), 3), Fraction(rng.randint(-9, 9), 3))
        r = Fraction(rng.randint(0, 12), 4)
        exact = ball_mass(mu, c, r)
        approx = ball_mass(mu, (float(c[0]), float(c[1])), float(r))
        assert abs(float(exact) - approx) < 1e-12


def test_shadow_runtime():
    w = Word.parse(W)
    parametrized_shadow(w)
    t = time.perf_counter()
    for _ in range(100):
        parametrized_shadow(w)
    assert (time.perf_counter() - t) / 100 < 1e-3
