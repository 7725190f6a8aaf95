import random

import pytest

from homshadow.graphs import DirectedGraph, GraphMap, MarkedGraph
from homshadow.words import Automorphism

G_IMAGES = ("cbCbaBcBC", "cbC", "cbaBcbCbABcBC")
G_INVERSE = ("BabACBcaBabACbcaBAb", "BabACbcaBAb", "caBAb")

# rose train tracks whose abelianization is the identity
ROSE_TRAIN_TRACKS = [
    ("Cac", "CacbCAc", "acbCAcB"),
    ("baB", "Cbc", "bcbaBCBcbAB"),
    ("abcBC", "abcbCBA", "cabcbCBAcBC"),
    ("bacABaC", "Aba", "ABacAba"),
]


@pytest.fixture(scope="session")
def g():
    return Automorphism.parse(list(G_IMAGES), list(G_INVERSE))


@pytest.fixture(scope="session")
def fib():
    return Automorphism.parse(["ab", "a"], ["b", "Ba"])


@pytest.fixture(scope="session")
def worked():
    """The two-generator map a -> ababA, b -> baBAb."""
    return GraphMap.from_automorphism(Automorphism.parse(["ababA", "baBAb"]))


@pytest.fixture(scope="session")
def fib_map(fib):
    return GraphMap.from_automorphism(fib)


@pytest.fixture(scope="session")
def subdivided():
    G = DirectedGraph(((0, 1), (1, 0), (0, 0)), 2, ("v0", "v1"), ("a1", "a2", "b"))
    gates = {0: [{1, 3}, {-2, -3}], 1: [{-1}, {2}]}
    return GraphMap(MarkedGraph(G, 0, gates), (0, 0), [(1, 2), (3,), (1, 2)])


@pytest.fixture
def rng():
    return random.Random(20261016)


def theta_graph():
    return DirectedGraph(((0, 1), (0, 1), (0, 1)), 2)


def random_rose_map(rank, rng, max_len=4):
    """An endomorphism of the rose whose edge images are nonempty immersed paths."""
    from homshadow.words import random_reduced_word

    return GraphMap.from_automorphism(
        Automorphism([random_reduced_word(rank, rng.randint(1, max_len), rng) for _ in range(rank)])
    )


# strongly connected digraphs with at most six edges
DESK_DIGRAPHS = {
    "two_loops": DirectedGraph(((0, 0), (0, 0)), 1),
    "fibonacci": DirectedGraph(((0, 0), (0, 1), (1, 0)), 2),
    "theta": DirectedGraph(((0, 1), (1, 0), (0, 1), (1, 0)), 2),
    "triangle_chord": DirectedGraph(((0, 1), (1, 2), (2, 0), (0, 2), (2, 2)), 3),
    "two_cycles": DirectedGraph(((0, 1), (1, 0), (1, 2), (2, 1), (0, 0), (2, 0)), 3),
    "square": DirectedGraph(((0, 1), (1, 2), (2, 3), (3, 0), (1, 3), (3, 1)), 4),
}


def reachable_cycle_polytope(G, start):
    """Hull of the normalised simple cycles reachable from ``start``."""
    from homshadow.polytope import RationalPolytope, simple_cycle_vertices

    seen, todo = {start}, [start]
    while todo:
        v = todo.pop()
        for a, b in G.edges:
            if a == v and b not in seen:
                seen.add(b)
                todo.append(b)
    keep = [i for i, (a, _) in enumerate(G.edges) if a in seen]
    sub = DirectedGraph(tuple(G.edges[i] for i in keep), G.n_vertices)
    pts = []
    for c in simple_cycle_vertices(sub):
        x = [0] * G.n_edges
        for i, v in zip(keep, c):
            x[i] = v
        pts.append(x)
    return RationalPolytope(pts)
