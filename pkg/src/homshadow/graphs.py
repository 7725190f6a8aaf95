"""Finite directed graphs, edge paths, graph maps and train-track checks.

A path step is a signed 1-based edge index: ``+i`` crosses edge ``i`` along
its declared direction and ``-i`` against it, the same convention as free
group letters.  On a rose the two notions coincide.

Edge ends use the same signed integers: ``+i`` is the initial end of edge
``i`` (sitting at its initial vertex) and ``-i`` the terminal end.  A step
``s`` leaves its origin through end ``s`` and arrives through end ``-s``,
so consecutive steps ``s, t`` make the turn ``{-s, t}``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .words import (
    DEFAULT_LENGTH_BUDGET,
    Automorphism,
    LengthBudgetExceeded,
    Word,
    _reduce_tuple,
    _substitute_kernel,
    reduce_word,
)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class DirectedGraph:
    """Vertices ``0..V-1`` and edges given by (initial, terminal) pairs."""

    edges: tuple[tuple[int, int], ...]
    n_vertices: int
    vertex_names: tuple[str, ...] = ()
    edge_names: tuple[str, ...] = ()

    def __post_init__(self):
        for i, (a, b) in enumerate(self.edges):
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise GraphError(f"edge {i + 1} references a missing vertex")
        if not self.vertex_names:
            object.__setattr__(self, "vertex_names", tuple(f"v{i}" for i in range(self.n_vertices)))
        if not self.edge_names:
            object.__setattr__(self, "edge_names", tuple(f"e{i + 1}" for i in range(len(self.edges))))

    @classmethod
    def rose(cls, n: int) -> "DirectedGraph":
        names = tuple(chr(ord("a") + i) if n <= 26 else f"x{i + 1}" for i in range(n))
        return cls(tuple((0, 0) for _ in range(n)), 1, ("v0",), names)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def origin(self, s: int) -> int:
        a, b = self.edges[abs(s) - 1]
        return a if s > 0 else b

    def terminus(self, s: int) -> int:
        return self.origin(-s)

    def end_vertex(self, end: int) -> int:
        """Vertex carrying an edge end."""
        return self.origin(end)

    def ends_at(self, v: int) -> list[int]:
        out = []
        for i, (a, b) in enumerate(self.edges, start=1):
            if a == v:
                out.append(i)
            if b == v:
                out.append(-i)
        return out

    def boundary_matrix(self) -> np.ndarray:
        """``∂`` as a V x E integer matrix, ``∂(e) = τ(e) - ι(e)``."""
        D = np.zeros((self.n_vertices, self.n_edges), dtype=np.int64)
        for j, (a, b) in enumerate(self.edges):
            D[b, j] += 1
            D[a, j] -= 1
        return D

    def adjacency(self) -> np.ndarray:
        """Directed vertex adjacency counting parallel edges."""
        M = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int64)
        for a, b in self.edges:
            M[a, b] += 1
        return M

    def components(self) -> list[list[int]]:
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            parent[find(a)] = find(b)
        groups: dict[int, list[int]] = {}
        for v in range(self.n_vertices):
            groups.setdefault(find(v), []).append(v)
        return sorted(groups.values())

    def is_strongly_connected(self) -> bool:
        if self.n_vertices == 0:
            return False
        for adj in (self.adjacency(), self.adjacency().T):
            seen = {0}
            todo = [0]
            while todo:
                v = todo.pop()
                for w in np.nonzero(adj[v])[0]:
                    if int(w) not in seen:
                        seen.add(int(w))
                        todo.append(int(w))
            if len(seen) != self.n_vertices:
                return False
        return True

    def vertex_index(self, name: str) -> int:
        return self.vertex_names.index(name)

    def edge_index(self, name: str) -> int:
        """1-based index of a named edge."""
        return self.edge_names.index(name) + 1

    def step_name(self, s: int) -> str:
        n = self.edge_names[abs(s) - 1]
        return n if s > 0 else n + "^-1"


@dataclass(frozen=True)
class GraphPath:
    graph: DirectedGraph
    start: int
    steps: tuple[int, ...] = ()

    def __post_init__(self):
        v = self.start
        for i, s in enumerate(self.steps):
            if s == 0 or abs(s) > self.graph.n_edges:
                raise GraphError(f"step {i}: no edge {abs(s)}")
            if self.graph.origin(s) != v:
                raise GraphError(f"step {i}: {self.graph.step_name(s)} does not start at {self.graph.vertex_names[v]}")
            v = self.graph.terminus(s)

    @classmethod
    def from_steps(cls, graph: DirectedGraph, steps: Sequence[int]) -> "GraphPath":
        if not steps:
            raise GraphError("an empty path needs an explicit start vertex")
        return cls(graph, graph.origin(steps[0]), tuple(int(s) for s in steps))

    @property
    def end(self) -> int:
        return self.graph.terminus(self.steps[-1]) if self.steps else self.start

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[int]:
        return iter(self.steps)

    def __mul__(self, other: "GraphPath") -> "GraphPath":
        if self.end != other.start:
            raise GraphError("paths do not concatenate")
        return GraphPath(self.graph, self.start, self.steps + other.steps)

    def inverse(self) -> "GraphPath":
        return GraphPath(self.graph, self.end, tuple(-s for s in reversed(self.steps)))

    def is_circuit(self) -> bool:
        return self.start == self.end

    def is_immersed(self) -> bool:
        return all(t != -s for s, t in zip(self.steps, self.steps[1:]))

    def reduced(self) -> "GraphPath":
        return path_reduce(self)

    def hat(self) -> np.ndarray:
        """Signed crossing counts in Z^E."""
        return hat_vector(self.steps, self.graph.n_edges)

    def turns(self) -> list[tuple[int, int]]:
        return [(-s, t) for s, t in zip(self.steps, self.steps[1:])]

    def __str__(self) -> str:
        if not self.steps:
            return f"<{self.graph.vertex_names[self.start]}>"
        return " ".join(self.graph.step_name(s) for s in self.steps)


def hat_vector(steps, n_edges: int) -> np.ndarray:
    a = np.asarray(steps, dtype=np.int64)
    if a.size == 0:
        return np.zeros(n_edges, dtype=np.int64)
    return np.bincount(np.abs(a) - 1, weights=np.sign(a), minlength=n_edges).astype(np.int64)


def path_reduce(p: GraphPath) -> GraphPath:
    """Cancel backtracks ``e e^-1`` until the path is immersed."""
    return GraphPath(p.graph, p.start, _reduce_tuple(p.steps))


def _normalise_gates(graph: DirectedGraph, gates, strict: bool = True) -> dict[int, tuple[frozenset, ...]]:
    out = {}
    for v in range(graph.n_vertices):
        ends = set(graph.ends_at(v))
        classes = [frozenset(int(x) for x in g) for g in gates.get(v, ())] if gates else []
        if not classes:
            raise GraphError(f"no gates given at vertex {graph.vertex_names[v]}")
        seen: set[int] = set()
        for g in classes:
            if not g or g & seen or not g <= ends:
                raise GraphError(f"gates at {graph.vertex_names[v]} do not partition the edge ends")
            seen |= g
        if seen != ends:
            raise GraphError(f"gates at {graph.vertex_names[v]} miss some edge ends")
        if strict and len(ends) >= 2 and len(classes) < 2:
            raise GraphError(f"vertex {graph.vertex_names[v]} needs at least two gates")
        out[v] = tuple(sorted(classes, key=lambda g: sorted(g, key=lambda x: (abs(x), -x))))
    return out


@dataclass(frozen=True)
class SpanningTree:
    tree: frozenset[int]  # 1-based edge indices
    A: tuple[int, ...]  # complement, in declaration order
    parent_step: tuple[int, ...]  # step from the parent into each vertex, 0 at the root
    root: int

    def letter(self, edge: int) -> int:
        return self.A.index(edge) + 1


def spanning_tree(graph: DirectedGraph, root: int = 0) -> SpanningTree:
    """Breadth-first tree from ``root``; ties go to the earlier edge."""
    parent = [None] * graph.n_vertices
    parent[root] = 0
    order = deque([root])
    incident: list[list[int]] = [[] for _ in range(graph.n_vertices)]
    for i, (a, b) in enumerate(graph.edges, start=1):
        incident[a].append(i)
        if b != a:
            incident[b].append(-i)
    for v in range(graph.n_vertices):
        incident[v].sort(key=abs)
    tree = set()
    while order:
        v = order.popleft()
        for s in incident[v]:
            w = graph.terminus(s)
            if parent[w] is None:
                parent[w] = s
                tree.add(abs(s))
                order.append(w)
    if any(p is None for p in parent):
        raise GraphError("graph is not connected")
    A = tuple(i for i in range(1, graph.n_edges + 1) if i not in tree)
    return SpanningTree(frozenset(tree), A, tuple(parent), root)


def tree_path(graph: DirectedGraph, T: SpanningTree, v: int) -> GraphPath:
    """The tree path from the root to ``v``."""
    steps = []
    while v != T.root:
        s = T.parent_step[v]
        steps.append(s)
        v = graph.origin(s)
    return GraphPath(graph, T.root, tuple(reversed(steps)))


def reading_map(p: GraphPath, T: SpanningTree) -> Word:
    """Read off the non-tree edges of a path as a reduced word in F_A."""
    letters = [(1 if s > 0 else -1) * T.letter(abs(s)) for s in p.steps if abs(s) not in T.tree]
    return reduce_word(letters)


def reading_matrix(n_edges: int, T: SpanningTree) -> np.ndarray:
    """Coordinate projection R^E -> R^A realising the reading map on hats."""
    M = np.zeros((len(T.A), n_edges), dtype=np.int64)
    for i, e in enumerate(T.A):
        M[i, e - 1] = 1
    return M


@dataclass(frozen=True)
class CycleSpace:
    basis: tuple[tuple[int, ...], ...]
    circuits: tuple[GraphPath, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, 0), dtype=np.int64)
        return np.array(self.basis, dtype=np.int64)


def cycle_space(graph: DirectedGraph) -> CycleSpace:
    """Integral basis of ker ∂ from the fundamental circuits of a spanning forest."""
    basis = []
    circuits = []
    for comp in graph.components():
        sub_edges = [i for i, (a, _) in enumerate(graph.edges, start=1) if a in comp]
        T = _forest_tree(graph, comp[0])
        for e in sub_edges:
            if e in T.tree:
                continue
            a, b = graph.edges[e - 1]
            loop = tree_path(graph, T, a) * GraphPath(graph, a, (e,)) * tree_path(graph, T, b).inverse()
            loop = path_reduce(loop)
            circuits.append(loop)
            basis.append(tuple(int(x) for x in loop.hat()))
    return CycleSpace(tuple(basis), tuple(circuits))


def _forest_tree(graph: DirectedGraph, root: int) -> SpanningTree:
    # breadth-first tree of the component containing root
    parent: dict[int, int] = {root: 0}
    order = deque([root])
    tree = set()
    while order:
        v = order.popleft()
        for s in sorted(graph.ends_at(v), key=abs):
            w = graph.terminus(s)
            if w not in parent:
                parent[w] = s
                tree.add(abs(s))
                order.append(w)
    full = tuple(parent.get(v, 0) for v in range(graph.n_vertices))
    return SpanningTree(frozenset(tree), (), full, root)


@dataclass(frozen=True)
class MarkedGraph:
    graph: DirectedGraph
    basepoint: int = 0
    gates: dict | None = field(default=None, compare=False)
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.gates is not None:
            object.__setattr__(self, "gates", _normalise_gates(self.graph, self.gates, self.strict))

    def tree(self) -> SpanningTree:
        return spanning_tree(self.graph, self.basepoint)

    def connecting_path(self, v: int) -> GraphPath:
        """The tree path from ``v`` back to the basepoint."""
        return tree_path(self.graph, self.tree(), v).inverse()

    def gate_of(self, end: int) -> int:
        v = self.graph.end_vertex(end)
        for i, g in enumerate(self.gates[v]):
            if end in g:
                return i
        raise GraphError(f"edge end {end} has no gate")

    def is_legal_turn(self, d1: int, d2: int) -> bool:
        if d1 == d2:
            return False
        return self.gate_of(d1) != self.gate_of(d2)


class GraphMap:
    """A map of a marked graph sending vertices to vertices and edges to paths."""

    def __init__(self, marked: MarkedGraph, vertex_images: Sequence[int], edge_images: Sequence[Sequence[int]]):
        G = marked.graph
        self.marked = marked
        self.graph = G
        self.vertex_images = tuple(int(v) for v in vertex_images)
        if len(self.vertex_images) != G.n_vertices or len(edge_images) != G.n_edges:
            raise GraphError("wrong number of vertex or edge images")
        imgs = []
        for i, steps in enumerate(edge_images, start=1):
            a, b = G.edges[i - 1]
            start = self.vertex_images[a]
            p = GraphPath(G, start, tuple(int(s) for s in steps))
            if p.end != self.vertex_images[b]:
                raise GraphError(f"image of {G.edge_names[i - 1]} does not end at the image of its terminal vertex")
            imgs.append(p)
        self.edge_images = tuple(imgs)
        if self.vertex_images[marked.basepoint] != marked.basepoint:
            raise GraphError("the basepoint must be fixed")
        self._tables = None

    @classmethod
    def from_automorphism(cls, f: Automorphism, gates: dict | None = None) -> "GraphMap":
        G = DirectedGraph.rose(f.rank)
        return cls(MarkedGraph(G, 0, gates), (0,), [w.letters for w in f.images])

    def image_steps(self, s: int) -> tuple[int, ...]:
        p = self.edge_images[abs(s) - 1].steps
        return p if s > 0 else tuple(-x for x in reversed(p))

    def apply(self, p: GraphPath, reduce: bool = True) -> GraphPath:
        steps: list[int] = []
        for s in p.steps:
            steps.extend(self.image_steps(s))
        out = GraphPath(self.graph, self.vertex_images[p.start], tuple(steps))
        return path_reduce(out) if reduce else out

    def tables(self):
        if self._tables is None:
            imgs = [p.steps for p in self.edge_images]
            imgs += [tuple(-x for x in reversed(p)) for p in imgs]
            lengths = np.array([len(w) for w in imgs], dtype=np.int64)
            stops = np.cumsum(lengths)
            starts = stops - lengths
            flat = np.array([x for w in imgs for x in w], dtype=np.int32)
            self._tables = (flat, starts, stops, lengths)
        return self._tables

    def iterate_steps(self, steps, k: int, budget: int = DEFAULT_LENGTH_BUDGET) -> np.ndarray:
        """Tightened ``φ^k`` of a step sequence as an int32 array."""
        flat, starts, stops, lengths = self.tables()
        a = np.asarray(steps, dtype=np.int32)
        n = self.graph.n_edges
        for _ in range(k):
            if a.size == 0:
                break
            slots = np.where(a > 0, a - 1, n - a - 1)
            total = int(lengths[slots].sum())
            if total > budget:
                raise LengthBudgetExceeded(f"substitution needs {total} steps, budget is {budget}")
            a = _substitute_kernel(a, flat, starts, stops, n, total)
        return a

    def power(self, m: int) -> "GraphMap":
        if m < 1:
            raise ValueError("power must be positive")
        imgs = [tuple(int(x) for x in self.iterate_steps([i], m)) for i in range(1, self.graph.n_edges + 1)]
        verts = list(range(self.graph.n_vertices))
        for _ in range(m):
            verts = [self.vertex_images[v] for v in verts]
        return GraphMap(self.marked, verts, imgs)

    def derivative(self, end: int) -> int:
        """``Dφ``: the first edge end of the image of an end."""
        img = self.image_steps(end)
        if not img:
            raise GraphError(f"edge {abs(end)} collapses to a point")
        return img[0]

    def hat_matrix(self) -> np.ndarray:
        """``φ_ab`` on R^E: column e is the hat of φ(e)."""
        return np.array([p.hat() for p in self.edge_images], dtype=np.int64).T.copy()

    def with_gates(self, gates) -> "GraphMap":
        m = MarkedGraph(self.graph, self.marked.basepoint, gates)
        return GraphMap(m, self.vertex_images, [p.steps for p in self.edge_images])

    def __str__(self) -> str:
        return "; ".join(f"{self.graph.edge_names[i]} -> {p}" for i, p in enumerate(self.edge_images))


def transition_matrix(phi: GraphMap) -> np.ndarray:
    """``T[i, j]`` = number of times φ(e_i) crosses e_j in either direction."""
    n = phi.graph.n_edges
    T = np.zeros((n, n), dtype=np.int64)
    for i, p in enumerate(phi.edge_images):
        for s in p.steps:
            T[i, abs(s) - 1] += 1
    return T


def induced_automorphism(phi: GraphMap) -> Automorphism:
    """The map ``f_A`` on F_A obtained through the spanning tree and R_A."""
    G = phi.graph
    T = phi.marked.tree()
    imgs = []
    for e in T.A:
        a, b = G.edges[e - 1]
        loop = tree_path(G, T, a) * GraphPath(G, a, (e,)) * tree_path(G, T, b).inverse()
        imgs.append(reading_map(phi.apply(loop), T))
    return Automorphism(imgs)


def abelianization_defect(phi: GraphMap, p: GraphPath) -> np.ndarray:
    """``φ_ab(p̂) - p̂`` as an integer vector."""
    return phi.apply(p, reduce=False).hat() - p.hat()


def canonical_gates(phi: GraphMap) -> dict[int, list[frozenset]]:
    """Ends are equivalent when some iterate of Dφ identifies them."""
    G = phi.graph
    ends = [x for i in range(1, G.n_edges + 1) for x in (i, -i)]
    image = {d: d for d in ends}
    for _ in range(len(ends)):
        image = {d: phi.derivative(image[d]) for d in ends}
    gates = {}
    for v in range(G.n_vertices):
        classes: dict[int, set] = {}
        for d in G.ends_at(v):
            classes.setdefault(image[d], set()).add(d)
        gates[v] = [frozenset(c) for c in classes.values()]
    return gates


@dataclass
class TrainTrackReport:
    valid: bool
    immersed: bool = True
    legal_images: bool = True
    turns_ok: bool = True
    primitive: bool = True
    primitivity_exponent: int | None = None
    image_turns: tuple = ()
    problems: list[str] = field(default_factory=list)
    offending_edge: int | None = None
    offending_turn: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.valid


def _end_name(G: DirectedGraph, d: int) -> str:
    return G.edge_names[abs(d) - 1] + ("+" if d > 0 else "-")


def validate_train_track(phi: GraphMap, gates=None) -> TrainTrackReport:
    """Check immersed legal edge images, turn closure and primitivity.

    ``gates`` overrides the gates of the marked graph; when neither is
    present the canonical gates of φ are used.
    """
    from .spectral import pf_certificate

    G = phi.graph
    rep = TrainTrackReport(valid=True)
    for i, p in enumerate(phi.edge_images, start=1):
        if not p.steps:
            rep.immersed = False
            rep.problems.append(f"edge {G.edge_names[i - 1]} collapses to a point")
            rep.offending_edge = rep.offending_edge or i
        elif not p.is_immersed():
            rep.immersed = False
            rep.problems.append(f"image of {G.edge_names[i - 1]} backtracks")
            rep.offending_edge = rep.offending_edge or i
    if not rep.immersed:
        rep.valid = False
        return rep
    if gates is not None:
        marked = MarkedGraph(G, phi.marked.basepoint, gates)
    elif phi.marked.gates is not None:
        marked = phi.marked
    else:
        # canonical gates may collapse to a single gate; the turn checks report it
        marked = MarkedGraph(G, phi.marked.basepoint, canonical_gates(phi), strict=False)
    # (a) every edge image is legal
    for i, p in enumerate(phi.edge_images, start=1):
        for d1, d2 in p.turns():
            if not marked.is_legal_turn(d1, d2):
                rep.legal_images = False
                rep.offending_edge = rep.offending_edge or i
                rep.offending_turn = rep.offending_turn or (d1, d2)
                rep.problems.append(
                    f"image of {G.edge_names[i - 1]} takes illegal turn {{{_end_name(G, d1)}, {_end_name(G, d2)}}}"
                )
    # (b) the closure of the image turns under Dφ stays legal
    seen: set[frozenset] = set()
    todo = [frozenset(t) for p in phi.edge_images for t in p.turns()]
    while todo:
        t = todo.pop()
        if t in seen:
            continue
        seen.add(t)
        if len(t) == 1:
            d1 = d2 = next(iter(t))
        else:
            d1, d2 = sorted(t)
        if not marked.is_legal_turn(d1, d2):
            if rep.turns_ok:
                rep.offending_turn = rep.offending_turn or (d1, d2)
            rep.turns_ok = False
            rep.problems.append(f"turn {{{_end_name(G, d1)}, {_end_name(G, d2)}}} in the closure is illegal")
            continue
        todo.append(frozenset((phi.derivative(d1), phi.derivative(d2))))
    # (b') legal turns map to legal turns
    for v in range(G.n_vertices):
        ends = G.ends_at(v)
        for x in range(len(ends)):
            for y in range(x + 1, len(ends)):
                d1, d2 = ends[x], ends[y]
                if marked.is_legal_turn(d1, d2):
                    e1, e2 = phi.derivative(d1), phi.derivative(d2)
                    if not marked.is_legal_turn(e1, e2):
                        rep.turns_ok = False
                        rep.offending_turn = rep.offending_turn or (d1, d2)
                        rep.problems.append(
                            f"legal turn {{{_end_name(G, d1)}, {_end_name(G, d2)}}} maps to an illegal turn"
                        )
    rep.image_turns = tuple(sorted(tuple(sorted(t)) for t in seen))
    cert = pf_certificate(transition_matrix(phi))
    rep.primitive = cert.primitive
    rep.primitivity_exponent = cert.exponent
    if not cert.primitive:
        rep.problems.append("transition matrix is not primitive")
    rep.valid = rep.legal_images and rep.turns_ok and rep.primitive
    return rep
