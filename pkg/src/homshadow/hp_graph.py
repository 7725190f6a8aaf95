"""The half-point graph of a graph map, its Markov weights and the limit
darkness point.

Each segment of the unit shadow of ``φ(d)`` gives an edge ``η`` from ``v_d``
to ``v_e``, where ``e`` is the edge the segment runs along.  It records the
lower lattice corner ``c(η)`` of that segment and the label
``H(η) = c(η) + e/2 - d/2``, i.e. the segment midpoint minus ``d/2``.
Labels are kept doubled so that they are integer vectors.

Half points of iterates follow from a recursion over HP-paths: the block of
``φ^k(p)`` coming from the j-th step of ``φ^{k-1}(p)`` is the shadow of the
image of that step, translated by ``φ_ab`` of the lower corner of the step.
When ``φ_ab`` is the identity this collapses to summing H-labels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graphs import GraphMap, GraphPath, transition_matrix
from .shadows import HalfPointSet, path_steps, segment_keys
from .spectral import PFData, dominant_eigendata, stationary_distribution
from .spectral.field import to_json


class StateBudgetExceeded(RuntimeError):
    """The half-point recursion produced more distinct states than allowed."""


DEFAULT_STATE_BUDGET = 10**6


@dataclass(frozen=True)
class HPEdge:
    source: int  # 1-based edge d of G
    target: int  # 1-based edge e of G
    sign: int  # direction in which φ(d) crosses e
    index: int  # position of the segment within φ(d)
    corner: tuple[int, ...]  # lower corner c(η) of the segment
    label2: tuple[int, ...]  # 2 H(η)

    @property
    def label(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, 2) for x in self.label2)


@dataclass
class HPGraph:
    phi: GraphMap
    edges: list[HPEdge]
    out_edges: dict[int, list[int]]

    @property
    def n_vertices(self) -> int:
        return self.phi.graph.n_edges

    @property
    def dim(self) -> int:
        return self.phi.graph.n_edges

    def adjacency(self) -> np.ndarray:
        n = self.n_vertices
        M = np.zeros((n, n), dtype=np.int64)
        for h in self.edges:
            M[h.source - 1, h.target - 1] += 1
        return M

    def label_matrix(self) -> np.ndarray:
        """Columns are the H-labels, as floats."""
        return np.array([h.label2 for h in self.edges], dtype=float).T / 2.0

    def labels_between(self, d: int, e: int) -> list[tuple[Fraction, ...]]:
        return sorted(h.label for h in self.edges if h.source == d and h.target == e)

    def as_digraph(self):
        from .graphs import DirectedGraph

        return DirectedGraph(tuple((h.source - 1, h.target - 1) for h in self.edges), self.n_vertices)


def build_hp_graph(phi: GraphMap) -> HPGraph:
    n = phi.graph.n_edges
    edges = []
    out: dict[int, list[int]] = {d: [] for d in range(1, n + 1)}
    for d in range(1, n + 1):
        steps = np.asarray(phi.edge_images[d - 1].steps, dtype=np.int64)
        base, axes = segment_keys(steps, n)
        for j, s in enumerate(steps):
            e = abs(int(s))
            corner = tuple(int(x) for x in base[j])
            lab = [2 * x for x in corner]
            lab[e - 1] += 1
            lab[d - 1] -= 1
            out[d].append(len(edges))
            edges.append(HPEdge(d, e, 1 if s > 0 else -1, j, corner, tuple(lab)))
    return HPGraph(phi, edges, out)


def _seed_blocks(phi: GraphMap, p, k: int):
    """Lower corners of the seed steps pushed forward by ``φ_ab^k``, with their edges."""
    a, n = path_steps(p, phi.graph.n_edges)
    base, axes = segment_keys(a, n)
    M = phi.hat_matrix()
    C = base.T.copy()
    for _ in range(k):
        C = M @ C
    return C.T, axes + 1


def _edge_states(H: HPGraph, e: int, k: int, budget: int) -> np.ndarray:
    """Distinct final states (target edge, S) over HP-paths of length k from v_e."""
    n = H.dim
    M = H.phi.hat_matrix()
    corners = np.array([h.corner for h in H.edges], dtype=np.int64).reshape(len(H.edges), n)
    targets = np.array([h.target for h in H.edges], dtype=np.int64)
    states = np.zeros((1, n + 1), dtype=np.int64)
    states[0, 0] = e
    for _ in range(k):
        chunks = []
        for d in range(1, n + 1):
            sel = states[states[:, 0] == d]
            if not len(sel):
                continue
            S = sel[:, 1:] @ M.T
            for idx in H.out_edges[d]:
                nxt = np.empty_like(sel)
                nxt[:, 0] = targets[idx]
                nxt[:, 1:] = S + corners[idx]
                chunks.append(nxt)
        states = np.unique(np.concatenate(chunks), axis=0)
        if len(states) > budget:
            raise StateBudgetExceeded(f"{len(states)} states exceed the budget {budget}")
    return states


def hp_iterate(phi: GraphMap, p, k: int, budget: int = DEFAULT_STATE_BUDGET, H: HPGraph | None = None) -> HalfPointSet:
    """Half points of ``φ^k(p)`` (untightened) without expanding the path."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = phi.graph.n_edges
    if k == 0:
        from .shadows import half_points

        return half_points(p, dim=n)
    H = H or build_hp_graph(phi)
    offsets, edges = _seed_blocks(phi, p, k)
    cache: dict[int, np.ndarray] = {}
    out = set()
    for off, e in zip(offsets, edges):
        e = int(e)
        if e not in cache:
            st = _edge_states(H, e, k, budget)
            D = 2 * st[:, 1:]
            D[np.arange(len(st)), st[:, 0] - 1] += 1
            cache[e] = D
        pts = cache[e] + 2 * off
        out.update(map(tuple, pts.tolist()))
        if len(out) > budget:
            raise StateBudgetExceeded(f"{len(out)} half points exceed the budget {budget}")
    return HalfPointSet(frozenset(out))


def locality_labels(H: HPGraph) -> dict[int, set[tuple[int, ...]]]:
    """Doubled translation sets ``L'(e)``: half points of φ(e) minus the half point of e."""
    out: dict[int, set] = {}
    for h in H.edges:
        out.setdefault(h.source, set()).add(h.label2)
    return out


@dataclass
class MarkovWeights:
    mu: list  # per HP-edge
    P: list  # vertex transition matrix
    pi: list  # stationary distribution
    rho: object
    closed_form: list | None = None

    def edge_probability(self, i: int):
        return self.mu[i]


def _image_lengths(H: HPGraph, lengths: Sequence) -> list:
    n = H.n_vertices
    zero = lengths[0] * 0
    out = [zero] * n
    for h in H.edges:
        out[h.source - 1] = out[h.source - 1] + lengths[h.target - 1]
    return out


def markov_weights(H: HPGraph, lengths: Sequence, pf: PFData | None = None) -> MarkovWeights:
    """``μ(η) = l(e)/l(φ(d))`` with the stationary vertex distribution.

    Raises ``ValueError`` unless ``l(φ(d)) = ρ l(d)`` for a common ρ.
    """
    n = H.n_vertices
    img = _image_lengths(H, lengths)
    rho = img[0] / lengths[0]
    for d in range(n):
        if img[d] != rho * lengths[d]:
            raise ValueError(f"length function is not a train length: l(φ(e{d + 1})) != ρ l(e{d + 1})")
    mu = [lengths[h.target - 1] / img[h.source - 1] for h in H.edges]
    zero = mu[0] * 0
    P = [[zero for _ in range(n)] for _ in range(n)]
    for h, m in zip(H.edges, mu):
        P[h.source - 1][h.target - 1] = P[h.source - 1][h.target - 1] + m
    for d in range(n):
        if sum(P[d], zero) != 1:
            raise ValueError(f"outgoing weights at v{d + 1} do not sum to 1")
    pi = stationary_distribution(P)
    closed = None
    if pf is not None:
        w = [pf.left[d] * lengths[d] for d in range(n)]
        s = sum(w[1:], w[0])
        closed = [x / s for x in w]
        if closed != pi:
            raise ArithmeticError("stationary distribution disagrees with u_d l(d)")
    return MarkovWeights(mu, P, pi, rho, closed)


@dataclass
class LimitDarknessPoint:
    Q: list  # per HP-edge occupation
    point: tuple  # H(Q)
    approx: np.ndarray

    def to_json(self) -> dict:
        return {
            "point": [to_json(x) for x in self.point],
            "approx": [float(x) for x in self.approx],
            "Q": [to_json(x) for x in self.Q],
        }


def limit_darkness_point(H: HPGraph, W: MarkovWeights) -> LimitDarknessPoint:
    Q = [W.pi[h.source - 1] * m for h, m in zip(H.edges, W.mu)]
    zero = Q[0] * 0
    if sum(Q, zero) != 1:
        raise ArithmeticError("edge occupations do not sum to 1")
    point = []
    for i in range(H.dim):
        acc = zero
        for h, q in zip(H.edges, Q):
            if h.label2[i]:
                acc = acc + q * Fraction(h.label2[i], 2)
        point.append(acc)
    approx = np.array([float(x) for x in point])
    return LimitDarknessPoint(Q, tuple(point), approx)


def occupation_expectation(H: HPGraph, W: MarkovWeights, start: int, k: int) -> list:
    """Exact ``E[(1/k) #uses of η]`` over μ_k-weighted HP-paths of length k from ``v_start``.

    Computed by pushing the start distribution forward step by step, which
    sums the same products as enumerating every path.
    """
    n = H.n_vertices
    zero = W.mu[0] * 0
    dist = [zero] * n
    dist[start - 1] = zero + 1
    occ = [zero] * len(H.edges)
    for _ in range(k):
        nxt = [zero] * n
        for i, h in enumerate(H.edges):
            flow = dist[h.source - 1] * W.mu[i]
            occ[i] = occ[i] + flow
            nxt[h.target - 1] = nxt[h.target - 1] + flow
        dist = nxt
    return [x / k for x in occ]


def enumerate_paths(H: HPGraph, start: int, k: int):
    """Yield every HP-path of length k from ``v_start`` as a tuple of edge indices."""
    def rec(v, prefix):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for i in H.out_edges[v]:
            prefix.append(i)
            yield from rec(H.edges[i].target, prefix)
            prefix.pop()

    yield from rec(start, [])


def path_point_distribution(H: HPGraph, W: MarkovWeights, e: int, k: int) -> dict:
    """Doubled half points of ``φ^k(e)`` weighted by ``μ_k`` of the HP-paths reaching them."""
    n = H.dim
    M = H.phi.hat_matrix()
    states = {(e, (0,) * n): W.mu[0] * 0 + 1}
    for _ in range(k):
        nxt: dict = {}
        for (d, S), w in states.items():
            base = tuple(int(x) for x in M @ np.array(S, dtype=np.int64))
            for i in H.out_edges[d]:
                h = H.edges[i]
                key = (h.target, tuple(b + c for b, c in zip(base, h.corner)))
                nxt[key] = nxt.get(key, 0 * w) + w * W.mu[i]
        states = nxt
    out: dict = {}
    for (t, S), w in states.items():
        D = [2 * x for x in S]
        D[t - 1] += 1
        key = tuple(D)
        out[key] = out.get(key, 0 * w) + w
    return out


def to_dot(H: HPGraph, W: MarkovWeights | None = None) -> str:
    names = H.phi.graph.edge_names
    lines = ["digraph HP {"]
    for d in range(1, H.n_vertices + 1):
        lines.append(f'  v{d} [label="{names[d - 1]}"];')
    for i, h in enumerate(H.edges):
        lab = "(" + ",".join(str(Fraction(x, 2)) for x in h.label2) + ")"
        attrs = [f'H="{lab}"', f'label="{lab}"', f"index={h.index}"]
        if W is not None:
            m = W.mu[i]
            attrs.append(f'mu="{float(m):.12g}"')
        lines.append(f"  v{h.source} -> v{h.target} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def hp_certificates_agree(H: HPGraph) -> bool:
    from .spectral import pf_certificate

    return bool(pf_certificate(H.adjacency())) == bool(pf_certificate(transition_matrix(H.phi)))


def simple_vertex_cycles(H: HPGraph) -> list[tuple[int, ...]]:
    """Simple directed cycles of the underlying vertex graph, each listed once from its smallest vertex."""
    n = H.n_vertices
    succ = [sorted({h.target for h in H.edges if h.source == v}) for v in range(1, n + 1)]
    out = []

    def rec(root, path, seen):
        for w in succ[path[-1] - 1]:
            if w == root:
                out.append(tuple(path))
            elif w > root and w not in seen:
                seen.add(w)
                rec(root, path + [w], seen)
                seen.discard(w)

    for r in range(1, n + 1):
        rec(r, [r], {r})
    return out


def shadow_polytope(H: HPGraph):
    """``H(Σ₁)``: the hull of mean labels of simple cycles.

    Vertices of Σ₁ are normalised simple cycles, and along a fixed cycle of
    vertices the label sums form the Minkowski sum of the label hulls of each
    hop, so only extreme labels per vertex pair are needed.
    """
    from .polytope import RationalPolytope, extreme_points

    hull: dict[tuple[int, int], list] = {}
    for h in H.edges:
        hull.setdefault((h.source, h.target), []).append(h.label2)
    hull = {k: extreme_points(set(v)) for k, v in hull.items()}
    cands = set()
    for cyc in simple_vertex_cycles(H):
        hops = zip(cyc, cyc[1:] + cyc[:1])
        acc = [tuple(Fraction(0) for _ in range(H.dim))]
        for hop in hops:
            acc = extreme_points({tuple(a + b for a, b in zip(p, q)) for p in acc for q in hull[hop]})
        d = 2 * len(cyc)
        cands.update(tuple(x / d for x in p) for p in acc)
    if not cands:
        raise ValueError("the half-point graph has no directed cycle")
    return RationalPolytope(cands)
