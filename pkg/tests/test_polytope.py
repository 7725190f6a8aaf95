import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DESK_DIGRAPHS, reachable_cycle_polytope, theta_graph
from homshadow.graphs import DirectedGraph, cycle_space
from homshadow.polytope import (
    RationalPolytope,
    barycentric_grid,
    contains,
    distance,
    distance_squared_exact,
    extreme_points,
    hausdorff_to_cloud,
    hausdorff_to_shadow,
    hausdorff_to_shadow_exact,
    linear_image,
    path_hat_set,
    sigma1,
    simple_cycle_vertices,
)
from homshadow.shadows import parametrized_shadow
from homshadow.words import Word

h = Fraction(1, 2)
third = Fraction(1, 3)


def test_extreme_points_square():
    pts = [(0, 0), (1, 0), (0, 1), (1, 1), (h, h), (h, 0)]
    assert extreme_points(pts) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert RationalPolytope([(1, 2), (1, 2)]).vertices == ((1, 2),)
    with pytest.raises(ValueError):
        RationalPolytope([])


def test_affine_dim():
    assert RationalPolytope([(0, 0, 0)]).affine_dim == 0
    assert RationalPolytope([(0, 0), (1, 1), (2, 2)]).affine_dim == 1
    assert RationalPolytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]).affine_dim == 3


def test_sigma1_examples():
    rose = DirectedGraph(((0, 0), (0, 0)), 1)
    assert sigma1(rose).vertices == ((0, 1), (1, 0))
    fib = DESK_DIGRAPHS["fibonacci"]
    assert sigma1(fib).vertices == ((0, h, h), (1, 0, 0))
    # theta with all edges left to right has no directed cycle
    with pytest.raises(ValueError):
        sigma1(theta_graph())
    tri = DirectedGraph(((0, 1), (1, 2), (2, 0)), 3)
    assert sigma1(tri).vertices == ((third, third, third),)


def test_sigma1_is_normalised_cycles():
    rng = random.Random(5)
    graphs = list(DESK_DIGRAPHS.values())
    for _ in range(10):
        n = rng.randint(1, 3)
        edges = tuple((rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(1, 6)))
        G = DirectedGraph(edges, n)
        if simple_cycle_vertices(G):
            graphs.append(G)
    for G in graphs:
        S = sigma1(G)
        assert S == RationalPolytope(simple_cycle_vertices(G))
        B = G.boundary_matrix()
        for v in S.vertices:
            assert sum(v) == 1 and min(v) >= 0
            assert all(sum(int(B[i][j]) * v[j] for j in range(G.n_edges)) == 0 for i in range(G.n_vertices))
        # Σ₁ lies in the cycle space
        Z = cycle_space(G).matrix()
        if Z.size:
            X = np.array([[float(x) for x in v] for v in S.vertices])
            coef = np.linalg.lstsq(Z.T.astype(float), X.T, rcond=None)[0]
            assert np.allclose(Z.T @ coef, X.T)


def test_linear_image():
    S = sigma1(DESK_DIGRAPHS["fibonacci"])
    M = [[0, h, h], [0, h, -h]]
    assert linear_image(S, M).vertices == ((0, 0), (h * h + h * h, 0))
    P = RationalPolytope([(0, 0), (1, 0), (0, 1), (1, 1)])
    A = [[1, 1], [1, -1]]
    B = [[2, 0], [0, 3]]
    AB = [[2, 3], [2, -3]]
    assert linear_image(linear_image(P, B), A) == linear_image(P, AB)
    assert linear_image(P, [[1, 1]]).vertices == ((0,), (2,))
    with pytest.raises(ValueError):
        linear_image(P, [[1, 2, 3]])


def test_json_roundtrip():
    P = RationalPolytope([(h, -third), (0, 1)])
    assert RationalPolytope.from_json(P.to_json()) == P
    assert P.to_json()["vertices"] == [["0/1", "1/1"], ["1/2", "-1/3"]]


def test_distance_examples():
    P = RationalPolytope([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert distance(P, (h, h)) == pytest.approx(0, abs=1e-12)
    assert distance_squared_exact(P, (h, h)) == 0
    assert distance(P, (2, 0)) == pytest.approx(1)
    assert distance(P, (2, 2)) == pytest.approx(2**0.5)
    assert distance_squared_exact(P, (2, 2)) == 2
    assert distance_squared_exact(P, (3, h)) == 4
    seg = RationalPolytope([(0, 0), (1, 1)])
    assert distance_squared_exact(seg, (1, 0)) == h
    assert distance_squared_exact(RationalPolytope([(1, 1, 1)]), (0, 0, 0)) == 3


def test_contains():
    P = RationalPolytope([(0, 0), (2, 0), (0, 2)])
    assert contains(P, (1, 1)) and contains(P, (0, 0)) and contains(P, (h, third))
    assert not contains(P, (Fraction(3, 2), Fraction(3, 4)))
    assert contains(P, (1.0, 1.0), tol=1e-12)
    assert not contains(P, (1.1, 1.1), tol=1e-3)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=8),
       st.tuples(st.integers(-8, 8), st.integers(-8, 8), st.integers(-8, 8)))
@settings(max_examples=60, deadline=None)
def test_distance_exact_matches_float(pts, x):
    P = RationalPolytope(pts)
    d2 = distance_squared_exact(P, x)
    assert d2 is not None
    assert abs(float(d2) ** 0.5 - distance(P, x)) < 1e-9
    # no vertex is closer than the polytope
    assert all(sum((Fraction(a) - b) ** 2 for a, b in zip(v, x)) >= d2 for v in P.vertices)
    assert (d2 == 0) == contains(P, x)


def test_barycentric_grid_inside():
    P = RationalPolytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    Q = barycentric_grid(P, 3)
    assert len(Q) == 165  # C(8 + 3, 3)
    assert (Q >= -1e-15).all() and (Q.sum(axis=1) <= 1 + 1e-12).all()


def test_hausdorff_to_cloud_of_grid():
    P = RationalPolytope([(0, 0), (1, 0), (0, 1)])
    grid = barycentric_grid(P, 3)
    assert hausdorff_to_cloud(P, grid, depth=3) == pytest.approx(0, abs=1e-12)
    # the midpoint of the long edge is farthest from the vertex cloud
    assert hausdorff_to_cloud(P, P.array(), depth=3) == pytest.approx(2**-0.5)


def test_hausdorff_to_cloud_segment():
    P = RationalPolytope([(0,), (1,)])
    S = np.array([[i / 8] for i in range(9)])
    assert hausdorff_to_cloud(P, S, depth=4) == pytest.approx(1 / 16)
    assert hausdorff_to_cloud(P, S, depth=3) <= 1 / 8
    assert hausdorff_to_cloud(P, [[2.0]], depth=2) == pytest.approx(2)


def test_hausdorff_to_shadow_conjugate():
    # shadow of b^k a b^-k is a unit step in a at height k, twice traversing the b-axis
    seg = RationalPolytope([(0, 0), (0, 1)])
    for k in (1, 2, 5, 9):
        w = Word([2] * k + [1] + [-2] * k)
        sh = parametrized_shadow(w)
        assert hausdorff_to_shadow_exact(seg, sh, k) == Fraction(1, k * k)
        assert hausdorff_to_shadow(seg, sh, k) == pytest.approx(1 / k)


def test_path_hat_set_small():
    G = DESK_DIGRAPHS["fibonacci"]
    H = path_hat_set(G, 0, 3)
    got = sorted(map(tuple, H.tolist()))
    assert got == [(0, 2, 1), (1, 1, 1), (2, 1, 0), (3, 0, 0)]
    assert path_hat_set(G, 1, 1).tolist() == [[0, 0, 1]]
    assert path_hat_set(DirectedGraph(((0, 1),), 2), 0, 2).shape == (0, 1)


@pytest.mark.parametrize("name", sorted(DESK_DIGRAPHS))
def test_path_polytope_convergence(name):
    G = DESK_DIGRAPHS[name]
    S = sigma1(G)
    for start in range(G.n_vertices):
        d = {k: hausdorff_to_cloud(S, path_hat_set(G, start, k) / k, depth=4) for k in (8, 12, 16)}
        C = 8 * d[8]
        assert d[12] <= 1.1 * C / 12 and d[16] <= 1.1 * C / 16
        assert d[16] <= 2 * G.n_vertices / 16 + 1e-12
        assert reachable_cycle_polytope(G, start) == S


def test_start_vertex_matters_without_strong_connectivity():
    # from vertex 0 both loops are reachable, from vertex 1 only the second
    G = DirectedGraph(((0, 0), (0, 1), (1, 1)), 2)
    assert reachable_cycle_polytope(G, 0) == sigma1(G)
    assert reachable_cycle_polytope(G, 1) == RationalPolytope([(0, 0, 1)])
