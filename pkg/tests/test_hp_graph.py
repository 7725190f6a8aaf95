import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from conftest import ROSE_TRAIN_TRACKS, random_rose_map
from homshadow.graphs import GraphMap, GraphPath, transition_matrix
from homshadow.hp_graph import (
    StateBudgetExceeded,
    build_hp_graph,
    enumerate_paths,
    hp_certificates_agree,
    hp_iterate,
    limit_darkness_point,
    locality_labels,
    markov_weights,
    occupation_expectation,
    path_point_distribution,
    shadow_polytope,
    simple_vertex_cycles,
    to_dot,
)
from homshadow.polytope import linear_image, sigma1
from homshadow.shadows import ball_mass, darkness_measure, half_points
from homshadow.spectral import dominant_eigendata
from homshadow.words import Automorphism

h = Fraction(1, 2)


def labels(H, d, e):
    return Counter(H.labels_between(d, e))


def unreduced_iterate(phi, steps, k):
    p = GraphPath(phi.graph, phi.graph.origin(steps[0]), tuple(steps))
    for _ in range(k):
        p = phi.apply(p, reduce=False)
    return p


def test_worked_example_labels(worked):
    H = build_hp_graph(worked)
    assert labels(H, 1, 1) == Counter([(0, 0), (1, 1), (1, 2)])
    assert labels(H, 1, 2) == Counter([(h, h), (3 * h, 3 * h)])
    assert labels(H, 2, 2) == Counter([(0, 0), (0, 0), (1, 0)])
    assert labels(H, 2, 1) == Counter([(h, h), (h, -h)])


def test_small_hp_graphs(fib_map):
    H = build_hp_graph(GraphMap.from_automorphism(Automorphism.identity(1)))
    assert H.n_vertices == 1 and [e.label for e in H.edges] == [(0,)]
    H = build_hp_graph(fib_map)
    assert labels(H, 1, 1) == Counter([(0, 0)])
    assert labels(H, 1, 2) == Counter([(h, h)])
    assert labels(H, 2, 1) == Counter([(h, -h)])
    assert labels(H, 2, 2) == Counter()


def test_labels_are_midpoint_minus_half_source(worked):
    H = build_hp_graph(worked)
    for d in (1, 2):
        img = worked.edge_images[d - 1].steps
        hp = half_points(list(img), dim=2).points()
        got = {tuple(x + (h if i == d - 1 else 0) for i, x in enumerate(e.label)) for e in H.edges if e.source == d}
        assert got == hp


def test_adjacency_matches_transition(worked, fib_map, subdivided):
    rng = random.Random(4)
    maps = [worked, fib_map, subdivided] + [random_rose_map(3, rng) for _ in range(10)]
    for phi in maps:
        H = build_hp_graph(phi)
        assert (H.adjacency() == transition_matrix(phi)).all()
        for d in range(1, H.n_vertices + 1):
            assert len(H.out_edges[d]) == len(phi.edge_images[d - 1])
        assert hp_certificates_agree(H)


def test_hp_iterate_small_cases(worked):
    assert hp_iterate(worked, [1], 0).points() == {(h, 0)}
    assert hp_iterate(worked, [1], 1) == half_points(list(worked.edge_images[0].steps), dim=2)
    for k in range(5):
        direct = half_points(unreduced_iterate(worked, [1, 2], k))
        assert hp_iterate(worked, [1, 2], k) == direct


def test_hp_iterate_random_maps():
    rng = random.Random(12)
    for _ in range(6):
        rank = rng.randint(2, 3)
        phi = random_rose_map(rank, rng, max_len=3)
        letters = [x for i in range(1, rank + 1) for x in (i, -i)]
        for _ in range(4):
            steps = [rng.choice(letters) for _ in range(rng.randint(1, 3))]
            for k in range(4):
                assert hp_iterate(phi, steps, k) == half_points(unreduced_iterate(phi, steps, k))


def test_hp_iterate_graph_map(subdivided):
    for steps in ([1], [1, 2], [3, -2, -1], [1, 2, 3]):
        for k in range(6):
            assert hp_iterate(subdivided, steps, k) == half_points(unreduced_iterate(subdivided, steps, k))


def test_hp_iterate_budget(worked):
    with pytest.raises(StateBudgetExceeded):
        hp_iterate(worked, [1], 6, budget=50)


def test_locality():
    for ims in ROSE_TRAIN_TRACKS[:2]:
        phi = GraphMap.from_automorphism(Automorphism.parse(list(ims)))
        H = build_hp_graph(phi)
        L = locality_labels(H)
        rng = random.Random(1)
        for _ in range(40):
            steps = [rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(rng.randint(1, 4))]
            lhs = half_points(unreduced_iterate(phi, steps, 1)).doubled
            rhs = set()
            for x in half_points(steps, dim=3).doubled:
                e = next(i for i, c in enumerate(x) if c % 2) + 1
                rhs.update(tuple(a + b for a, b in zip(x, lab)) for lab in L[e])
            assert lhs == rhs


def fib_weights(fib_map):
    H = build_hp_graph(fib_map)
    d = dominant_eigendata(transition_matrix(fib_map))
    r = d.rho
    return H, markov_weights(H, [r, r * 0 + 1], d), r


def test_markov_weights_fibonacci(fib_map):
    H, W, r = fib_weights(fib_map)
    out_a = [W.mu[i] for i in H.out_edges[1]]
    assert out_a == [1 / r, 1 / (r * r)]
    assert [W.mu[i] for i in H.out_edges[2]] == [1]
    assert W.pi == [r * r / (r * r + 1), 1 / (r * r + 1)]
    assert W.closed_form == W.pi


def test_markov_weights_worked(worked):
    H = build_hp_graph(worked)
    W = markov_weights(H, [Fraction(1), Fraction(1)], dominant_eigendata(transition_matrix(worked)))
    assert set(W.mu) == {Fraction(1, 5)}
    assert W.pi == [h, h]


def test_markov_rows_sum_to_one():
    for ims in ROSE_TRAIN_TRACKS:
        phi = GraphMap.from_automorphism(Automorphism.parse(list(ims)))
        H = build_hp_graph(phi)
        pf = dominant_eigendata(transition_matrix(phi))
        W = markov_weights(H, list(pf.right), pf)
        for d in range(1, H.n_vertices + 1):
            assert sum((W.mu[i] for i in H.out_edges[d]), W.mu[0] * 0) == 1
        for j in range(H.n_vertices):
            assert sum((W.pi[i] * W.P[i][j] for i in range(H.n_vertices)), W.mu[0] * 0) == W.pi[j]


def test_non_train_length_rejected(fib_map):
    H = build_hp_graph(fib_map)
    with pytest.raises(ValueError):
        markov_weights(H, [Fraction(1), Fraction(1)])


def test_limit_point_trivial():
    H = build_hp_graph(GraphMap.from_automorphism(Automorphism.identity(1)))
    W = markov_weights(H, [Fraction(1)])
    D = limit_darkness_point(H, W)
    assert D.Q == [1] and D.point == (0,)


def test_limit_point_fibonacci(fib_map):
    H, W, r = fib_weights(fib_map)
    D = limit_darkness_point(H, W)
    pa, pb = W.pi
    assert D.Q == [pa / r, pa / (r * r), pb]
    expected = (pa / (r * r) * h + pb * h, pa / (r * r) * h - pb * h)
    assert D.point == expected
    assert D.approx == pytest.approx([(3 - 1.6180339887498949) / 5, 0.0], abs=1e-12)
    assert sum(D.Q, D.Q[0] * 0) == 1


def test_occupation_matches_enumeration(fib_map, worked):
    H, W, _ = fib_weights(fib_map)
    for k in (3, 6, 10):
        occ = occupation_expectation(H, W, 1, k)
        brute = [W.mu[0] * 0] * len(H.edges)
        for path in enumerate_paths(H, 1, k):
            w = W.mu[0] * 0 + 1
            for i in path:
                w = w * W.mu[i]
            for i in path:
                brute[i] = brute[i] + w / k
        assert occ == brute


def test_nu_k_is_half_point_darkness():
    """The μ_k-weighted endpoints of k-step HP paths give the darkness of φ^k(e)."""
    maps = [Automorphism.parse(["ab", "a"]), Automorphism.parse(["ababA", "baBAb"]), Automorphism.parse(list(ROSE_TRAIN_TRACKS[0]))]
    for f in maps:
        phi = GraphMap.from_automorphism(f)
        H = build_hp_graph(phi)
        pf = dominant_eigendata(transition_matrix(phi))
        W = markov_weights(H, list(pf.right), pf)
        n = phi.graph.n_edges
        for e in range(1, n + 1):
            for k in range(1, 5 if n == 3 else 7):
                nu = path_point_distribution(H, W, e, k)
                mu = darkness_measure(phi.iterate_steps([e], k), lengths=list(pf.right), dim=n)
                direct = {}
                for b, ax, m in zip(mu.bases.tolist(), mu.axes.tolist(), mu.masses):
                    key = [2 * x for x in b]
                    key[ax] += 1
                    direct[tuple(key)] = m
                assert nu == direct


def test_length_function_independence():
    f = Automorphism.parse(list(ROSE_TRAIN_TRACKS[1]))
    phi = GraphMap.from_automorphism(f)
    H = build_hp_graph(phi)
    pf = dominant_eigendata(transition_matrix(phi))
    D = limit_darkness_point(H, markov_weights(H, list(pf.right), pf))
    rng = random.Random(6)
    for _ in range(2):
        lengths = [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(3)]
        masses = []
        steps = np.array([1], dtype=np.int32)
        for k in range(1, 8):
            steps = phi.iterate_steps(steps, 1)
            mu = darkness_measure(steps, lengths=lengths, k=k, dim=3)
            masses.append(ball_mass(mu, D.approx, 0.4))
        # the mass near the predicted point keeps growing towards 1
        assert masses[-1] > 0.8
        assert masses[-1] > masses[2] > masses[0]


def test_shadow_polytope_matches_sigma1(fib_map, worked):
    rng = random.Random(3)
    maps = [fib_map, worked] + [GraphMap.from_automorphism(Automorphism.parse(list(t))) for t in ROSE_TRAIN_TRACKS]
    maps += [random_rose_map(2, rng, 3) for _ in range(4)]
    for phi in maps:
        H = build_hp_graph(phi)
        M = [[Fraction(e.label2[i], 2) for e in H.edges] for i in range(H.dim)]
        assert shadow_polytope(H) == linear_image(sigma1(H.as_digraph()), M)


def test_simple_vertex_cycles(fib_map):
    assert sorted(simple_vertex_cycles(build_hp_graph(fib_map))) == [(1,), (1, 2)]


def test_dot_export(fib_map):
    H, W, _ = fib_weights(fib_map)
    dot = to_dot(H, W)
    assert dot.startswith("digraph HP {") and dot.count("->") == 3
    assert 'H="(1/2,-1/2)"' in dot
    assert to_dot(H, W) == dot
