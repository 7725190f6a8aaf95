"""Exact rational polytopes in V-representation.

Extreme points are found with an exact phase-one simplex, so a polytope
is determined by its sorted tuple of vertices and equality is exact.
Distances are computed in floating point with Wolfe's minimum-norm-point
algorithm; for rational inputs the active face it finds is re-solved in
exact arithmetic and certified, giving an exact squared distance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from . import linalg
from .graphs import DirectedGraph

MAX_BASES = 2_000_000


class EnumerationTooLarge(RuntimeError):
    pass


def _frac_point(p) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in p)


def _in_hull(p, others) -> bool:
    if not others:
        return False
    n = len(p)
    A = [[o[i] for o in others] for i in range(n)] + [[Fraction(1)] * len(others)]
    b = list(p) + [Fraction(1)]
    return linalg.feasible_point(A, b) is not None


def extreme_points(points: Iterable[Sequence]) -> list[tuple[Fraction, ...]]:
    pts = sorted(set(_frac_point(p) for p in points))
    if not pts:
        raise ValueError("empty point set")
    keep = list(pts)
    for p in pts:
        others = [q for q in keep if q != p]
        if _in_hull(p, others):
            keep = others
    return sorted(keep)


class RationalPolytope:
    """Convex hull of finitely many rational points, stored by its vertices."""

    def __init__(self, points: Iterable[Sequence], reduce: bool = True):
        pts = extreme_points(points) if reduce else sorted(set(_frac_point(p) for p in points))
        if not pts:
            raise ValueError("a polytope needs at least one point")
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise ValueError("points have different dimensions")
        self.vertices: tuple[tuple[Fraction, ...], ...] = tuple(pts)
        self.ambient_dim = dims.pop()
        self._affine_dim = None

    @property
    def affine_dim(self) -> int:
        if self._affine_dim is None:
            v0 = self.vertices[0]
            rows = [[a - b for a, b in zip(v, v0)] for v in self.vertices[1:]]
            self._affine_dim = linalg.rank(rows) if rows else 0
        return self._affine_dim

    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vertices], dtype=float)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPolytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        vs = ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in self.vertices[:6])
        more = ", ..." if len(self.vertices) > 6 else ""
        return f"RationalPolytope([{vs}{more}])"

    def scaled(self, s) -> "RationalPolytope":
        s = Fraction(s)
        return RationalPolytope([[s * x for x in v] for v in self.vertices], reduce=False)

    def to_json(self) -> dict:
        return {
            "dimension": self.ambient_dim,
            "vertices": [[f"{x.numerator}/{x.denominator}" for x in v] for v in self.vertices],
        }

    @classmethod
    def from_json(cls, obj) -> "RationalPolytope":
        return cls([[Fraction(x) for x in v] for v in obj["vertices"]])


def linear_image(P: RationalPolytope, M) -> RationalPolytope:
    rows = [[Fraction(x) for x in r] for r in (M.tolist() if isinstance(M, np.ndarray) else M)]
    if any(len(r) != P.ambient_dim for r in rows):
        raise ValueError(f"map expects dimension {len(rows[0]) if rows else 0}, polytope has {P.ambient_dim}")
    return RationalPolytope([linalg.matvec(rows, v) if rows else () for v in P.vertices])


def sigma1(G: DirectedGraph) -> RationalPolytope:
    """Vertices of ``{x >= 0 : ∂x = 0, Σx = 1}`` by basic feasible solutions."""
    m = G.n_edges
    if m == 0:
        raise ValueError("graph has no edges")
    rows = [[Fraction(int(x)) for x in r] for r in G.boundary_matrix().tolist()]
    rows.append([Fraction(1)] * m)
    rhs = [Fraction(0)] * G.n_vertices + [Fraction(1)]
    aug = [r + [b] for r, b in zip(rows, rhs)]
    R, piv = linalg.rref(aug, m + 1)
    if m in piv:
        raise ValueError("no nonnegative circulation: the graph has no directed cycle")
    A = [r[:m] for r in R]
    b = [r[m] for r in R]
    r = len(A)
    if math.comb(m, r) > MAX_BASES:
        raise EnumerationTooLarge(f"{math.comb(m, r)} candidate bases exceed {MAX_BASES}")
    verts = set()
    for B in itertools.combinations(range(m), r):
        sub = [[A[i][j] for j in B] for i in range(r)]
        try:
            xB = linalg.solve(sub, b)
        except ValueError:
            continue
        if any(x < 0 for x in xB):
            continue
        x = [Fraction(0)] * m
        for j, v in zip(B, xB):
            x[j] = v
        verts.add(tuple(x))
    if not verts:
        raise ValueError("no nonnegative circulation: the graph has no directed cycle")
    return RationalPolytope(sorted(verts), reduce=False)


def _affine_minimizer(V: np.ndarray) -> np.ndarray:
    k = V.shape[0]
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = V @ V.T
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:k]


def min_norm_point(V: np.ndarray, tol: float = 1e-12, maxiter: int = 1000):
    """Wolfe's algorithm: the point of conv(V) nearest the origin.

    Returns ``(point, weights, support indices)``.
    """
    V = np.asarray(V, dtype=float)
    scale = max(1.0, float((V * V).sum(axis=1).max()))
    j = int(np.argmin((V * V).sum(axis=1)))
    S = [j]
    lam = np.array([1.0])
    x = V[j].copy()
    for _ in range(maxiter):
        j = int(np.argmin(V @ x))
        if x @ x - V[j] @ x <= tol * scale or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            alpha = _affine_minimizer(V[S])
            if (alpha > tol).all():
                lam = alpha
                break
            mask = alpha <= tol
            den = lam - alpha
            ok = mask & (den > 0)
            theta = min(1.0, float((lam[ok] / den[ok]).min())) if ok.any() else 1.0
            lam = lam + theta * (alpha - lam)
            keep = lam > tol
            if not keep.any():
                keep[np.argmax(lam)] = True
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ V[S]
    return x, lam, S


def _exact_distance_sq(vertices, x, support) -> Fraction | None:
    """Re-solve Wolfe's active face exactly and certify optimality."""
    W = [[a - b for a, b in zip(vertices[i], x)] for i in support]
    k = len(W)
    G = [[sum((a * b for a, b in zip(W[i], W[j])), Fraction(0)) for j in range(k)] for i in range(k)]
    K = [G[i] + [Fraction(1)] for i in range(k)] + [[Fraction(1)] * k + [Fraction(0)]]
    rhs = [Fraction(0)] * k + [Fraction(1)]
    try:
        sol = linalg.solve(K, rhs)
    except ValueError:
        return None
    alpha = sol[:k]
    if any(a < 0 for a in alpha):
        return None
    n = len(x)
    y = [sum((alpha[i] * W[i][t] for i in range(k)), Fraction(0)) for t in range(n)]
    yy = sum((c * c for c in y), Fraction(0))
    for v in vertices:
        w = [a - b for a, b in zip(v, x)]
        if sum((a * b for a, b in zip(w, y)), Fraction(0)) < yy:
            return None
    return yy


def distance(P: RationalPolytope, x) -> float:
    """Euclidean distance from ``x`` to P."""
    V = P.array() - np.asarray([float(c) for c in x])
    y, _, _ = min_norm_point(V)
    return float(np.sqrt(y @ y))


def distance_squared_exact(P: RationalPolytope, x) -> Fraction | None:
    """Exact squared distance for rational ``x``, or None if not certified."""
    xf = np.asarray([float(c) for c in x])
    _, _, S = min_norm_point(P.array() - xf)
    return _exact_distance_sq(P.vertices, _frac_point(x), S)


def contains(P: RationalPolytope, x, tol: float = 0.0) -> bool:
    try:
        xr = _frac_point(x)
    except (TypeError, ValueError):
        xr = None
    if xr is not None and all(isinstance(c, (int, Fraction)) for c in x):
        A = [[v[i] for v in P.vertices] for i in range(P.ambient_dim)] + [[Fraction(1)] * len(P.vertices)]
        return linalg.feasible_point(A, list(xr) + [Fraction(1)]) is not None
    return distance(P, x) <= tol


def barycentric_grid(P: RationalPolytope, depth: int = 3, max_points: int = 200_000) -> np.ndarray:
    """Sample points of P: combinations with weights in multiples of 2^-depth.

    When the full grid would exceed ``max_points`` only the subdivided
    segments between pairs of vertices are sampled.
    """
    V = P.array()
    m = len(V)
    N = 2**depth
    if m == 1:
        return V.copy()
    if math.comb(N + m - 1, m - 1) <= max_points:
        out = []
        for comp in _compositions(N, m):
            out.append(np.asarray(comp, dtype=float) @ V / N)
        return np.unique(np.array(out), axis=0)
    t = np.arange(N + 1)[:, None] / N
    out = [V]
    for i, j in itertools.combinations(range(m), 2):
        out.append((1 - t) * V[i] + t * V[j])
    return np.unique(np.concatenate(out), axis=0)


def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _hull_vertices(S: np.ndarray) -> np.ndarray:
    """Points of S that can realise a maximum of a convex function."""
    S = np.unique(S, axis=0)
    if len(S) <= 64:
        return S
    c = S.mean(axis=0)
    U, sv, Vt = np.linalg.svd(S - c, full_matrices=False)
    r = int((sv > 1e-9 * max(1.0, sv[0])).sum())
    if r == 0:
        return S[:1]
    Y = (S - c) @ Vt[:r].T
    if r == 1:
        return S[[int(Y[:, 0].argmin()), int(Y[:, 0].argmax())]]
    try:
        hull = ConvexHull(Y)
    except Exception:
        return S
    return S[hull.vertices]


def max_distance_to(P: RationalPolytope, S: np.ndarray) -> float:
    """``max_{s in S} d(s, P)``; only hull vertices of S need checking."""
    Vp = P.array()
    best = 0.0
    for s in _hull_vertices(np.atleast_2d(np.asarray(S, dtype=float))):
        y, _, _ = min_norm_point(Vp - s)
        best = max(best, float(np.sqrt(y @ y)))
    return best


def hausdorff_to_cloud(P: RationalPolytope, S, depth: int = 3) -> float:
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.size == 0:
        raise ValueError("empty point cloud")
    one = max_distance_to(P, S)
    two = float(cKDTree(S).query(barycentric_grid(P, depth))[0].max())
    return max(one, two)


def _segment_distances(Q: np.ndarray, bases: np.ndarray, axes: np.ndarray, h: float) -> np.ndarray:
    """Distances from each row of Q to the nearest axis-parallel segment ``[b, b + h e_axis]``."""
    mids = bases.copy()
    mids[np.arange(len(axes)), axes] += h / 2
    tree = cKDTree(mids)
    dm = tree.query(Q)[0]
    out = np.empty(len(Q))
    for i, q in enumerate(Q):
        cand = tree.query_ball_point(q, dm[i] + h / 2 + 1e-12)
        B = bases[cand]
        ax = axes[cand]
        idx = np.arange(len(cand))
        t = np.clip(q[ax] - B[idx, ax], 0.0, h)
        C = B.copy()
        C[idx, ax] += t
        out[i] = np.sqrt(((C - q) ** 2).sum(axis=1)).min()
    return out


def hausdorff_to_shadow(P: RationalPolytope, shadow, k=1, depth: int = 3) -> float:
    """Hausdorff distance between P and the rescaled shadow ``shadow / k``.

    The shadow side is exact (the distance to P is convex, so its maximum
    over the polyline sits at a vertex).  The polytope side is sampled on
    the barycentric grid and measured against the actual segments.
    """
    from .shadows import segment_keys

    V = shadow.vertices / float(k)
    one = max_distance_to(P, V)
    if shadow.steps.size == 0:
        two = float(cKDTree(V).query(barycentric_grid(P, depth))[0].max())
        return max(one, two)
    base, axes = segment_keys(shadow.steps, shadow.dim)
    keys = np.unique(np.concatenate([base, axes[:, None]], axis=1), axis=0)
    two = float(_segment_distances(barycentric_grid(P, depth), keys[:, :-1] / float(k), keys[:, -1], 1.0 / float(k)).max())
    return max(one, two)


def hausdorff_to_shadow_exact(P: RationalPolytope, shadow, k: int, depth: int = 3) -> Fraction | None:
    """Squared version of :func:`hausdorff_to_shadow` in exact arithmetic.

    Returns None when some distance could not be certified exactly.
    """
    from .shadows import segment_keys

    k = Fraction(k)
    best = Fraction(0)
    Vs = np.unique(shadow.vertices, axis=0)
    cand = _hull_vertices(Vs.astype(float))
    for s in cand:
        x = tuple(Fraction(int(round(c))) / k for c in s)
        d = distance_squared_exact(P, x)
        if d is None:
            return None
        best = max(best, d)
    if shadow.steps.size:
        base, axes = segment_keys(shadow.steps, shadow.dim)
        keys = np.unique(np.concatenate([base, axes[:, None]], axis=1), axis=0)
        Q = barycentric_grid(P, depth)
        # locate the nearest segment numerically, then measure it exactly
        h = 1.0 / float(k)
        mids = keys[:, :-1] / float(k)
        mids[np.arange(len(keys)), keys[:, -1]] += h / 2
        tree = cKDTree(mids)
        grid = _exact_grid(P, depth, len(Q))
        for q in grid:
            qf = np.array([float(c) for c in q])
            dm = tree.query(qf)[0]
            local = Fraction(-1)
            for i in tree.query_ball_point(qf, dm + h / 2 + 1e-9):
                b = [Fraction(int(c)) / k for c in keys[i, :-1]]
                ax = int(keys[i, -1])
                t = min(max(q[ax] - b[ax], Fraction(0)), 1 / k)
                c = list(b)
                c[ax] += t
                d2 = sum(((ci - qi) ** 2 for ci, qi in zip(c, q)), Fraction(0))
                if local < 0 or d2 < local:
                    local = d2
            best = max(best, local)
    return best


def _exact_grid(P: RationalPolytope, depth: int, expected: int) -> list[tuple[Fraction, ...]]:
    N = 2**depth
    m = len(P.vertices)
    V = P.vertices
    pts = set()
    if m == 1:
        return [V[0]]
    if math.comb(N + m - 1, m - 1) <= 200_000:
        for comp in _compositions(N, m):
            pts.add(tuple(sum((Fraction(c, N) * v[t] for c, v in zip(comp, V)), Fraction(0)) for t in range(P.ambient_dim)))
    else:
        for i, j in itertools.combinations(range(m), 2):
            for s in range(N + 1):
                w = Fraction(s, N)
                pts.add(tuple((1 - w) * a + w * b for a, b in zip(V[i], V[j])))
    return sorted(pts)


def path_hat_set(G: DirectedGraph, start: int, k: int, budget: int = 2_000_000) -> np.ndarray:
    """Distinct edge-count vectors of directed paths of length k from ``start``."""
    m = G.n_edges
    out_edges = [[] for _ in range(G.n_vertices)]
    for i, (a, b) in enumerate(G.edges):
        out_edges[a].append((i, b))
    states = np.zeros((1, m + 1), dtype=np.int64)
    states[0, 0] = start
    for _ in range(k):
        chunks = []
        for v in range(G.n_vertices):
            sel = states[states[:, 0] == v]
            if not len(sel):
                continue
            for i, w in out_edges[v]:
                nxt = sel.copy()
                nxt[:, 0] = w
                nxt[:, 1 + i] += 1
                chunks.append(nxt)
        if not chunks:
            return np.zeros((0, m), dtype=np.int64)
        states = np.unique(np.concatenate(chunks), axis=0)
        if len(states) > budget:
            raise EnumerationTooLarge(f"{len(states)} path states exceed {budget}")
    return np.unique(states[:, 1:], axis=0)


def simple_cycle_vertices(G: DirectedGraph) -> set[tuple[Fraction, ...]]:
    """Edge indicator vectors of simple directed cycles, normalised to sum 1."""
    m = G.n_edges
    out_edges = [[] for _ in range(G.n_vertices)]
    for i, (a, b) in enumerate(G.edges):
        out_edges[a].append((i, b))
    found = set()

    def rec(root, v, used_edges, seen):
        for i, w in out_edges[v]:
            if w == root:
                cyc = used_edges + [i]
                vec = [0] * m
                for j in cyc:
                    vec[j] += 1
                found.add(tuple(Fraction(x, len(cyc)) for x in vec))
            elif w > root and w not in seen:
                rec(root, w, used_edges + [i], seen | {w})

    for r in range(G.n_vertices):
        rec(r, r, [], {r})
    return found
