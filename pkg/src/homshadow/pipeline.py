"""End-to-end limits for an automorphism given by a train-track map.

The shadow limit is ``h_ab · (1/m) · R_A · H(Σ₁(HP_ψ))`` and the darkness
limit ``h_ab · (1/m) · R_A · H(Q)``, where ψ = φ^m is the smallest power
whose induced automorphism has identity abelianization, ``h`` an optional
conjugator and ``R_A`` the coordinate projection onto the non-tree edges.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .graphs import (
    GraphMap,
    GraphPath,
    induced_automorphism,
    reading_matrix,
    transition_matrix,
    validate_train_track,
)
from .hp_graph import build_hp_graph, limit_darkness_point, markov_weights, shadow_polytope
from .polytope import RationalPolytope, hausdorff_to_shadow, linear_image, sigma1
from .shadows import PolygonalShadow, ball_mass, darkness_measure, densify, hausdorff_distance, parametrized_shadow
from .spectral import dominant_eigendata
from .spectral.field import to_json
from .words import (
    DEFAULT_LENGTH_BUDGET,
    Automorphism,
    Word,
    abelianization_matrix,
    apply_automorphism,
    finite_order,
    random_reduced_word,
)


class ValidationFailure(ValueError):
    """Input does not satisfy the hypotheses the computation relies on."""


@dataclass
class ProblemSpec:
    phi: GraphMap
    conjugator: Automorphism | None = None
    seeds: list[Word] = field(default_factory=lambda: [Word([1])])
    length: str | list = "unit"
    iterations: tuple[int, int] = (1, 8)
    assume_hypotheses: bool = False
    inverse: Automorphism | None = None  # optional inverse of the rose automorphism

    def __post_init__(self):
        if self.conjugator is not None and not self.conjugator.has_inverse:
            raise ValidationFailure("the conjugator needs a declared inverse")
        if any(len(s) == 0 for s in self.seeds):
            raise ValidationFailure("seed words must be nontrivial")

    @classmethod
    def from_text(cls, text: str, assume_hypotheses: bool = False) -> "ProblemSpec":
        from .dsl import build_graph_map, parse_text

        p = parse_text(text)
        phi = build_graph_map(p)
        conj = Automorphism.parse(p.conjugator, p.conjugator_inverse) if p.conjugator is not None else None
        inv = None
        if p.mode == "rose" and p.inverse is not None:
            inv = Automorphism.parse(p.images, p.inverse)
        return cls(
            phi=phi,
            conjugator=conj,
            seeds=[Word.parse(s) for s in p.seeds],
            length=p.length,
            iterations=p.iterations,
            assume_hypotheses=assume_hypotheses,
            inverse=inv,
        )


class Analysis:
    """Lazily computed intermediate objects for one problem."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        self.phi = spec.phi
        self.tree = spec.phi.marked.tree()
        self.A = self.tree.A
        if not self.A:
            raise ValidationFailure("the graph is a tree; its fundamental group is trivial")

    @cached_property
    def report(self):
        return validate_train_track(self.phi)

    @cached_property
    def f_A(self) -> Automorphism:
        return induced_automorphism(self.phi)

    @cached_property
    def order(self) -> int | None:
        return finite_order(abelianization_matrix(self.f_A))

    def check(self) -> None:
        if not self.report.valid:
            raise ValidationFailure("not a train track: " + "; ".join(self.report.problems))
        if self.order is None and not self.spec.assume_hypotheses:
            raise ValidationFailure("the induced automorphism has abelianization of infinite order")
        if self.spec.conjugator is not None and self.spec.conjugator.rank != len(self.A):
            raise ValidationFailure(f"conjugator has rank {self.spec.conjugator.rank}, expected {len(self.A)}")

    @property
    def power(self) -> int:
        return self.order or 1

    @property
    def scalar(self) -> Fraction:
        """Factor turning limits of φ^m into limits of φ."""
        return Fraction(1, self.power)

    @cached_property
    def psi(self) -> GraphMap:
        return self.phi if self.power == 1 else self.phi.power(self.power)

    @cached_property
    def pf(self):
        return dominant_eigendata(transition_matrix(self.psi))

    @cached_property
    def pf_phi(self):
        return dominant_eigendata(transition_matrix(self.phi))

    @cached_property
    def hp(self):
        return build_hp_graph(self.psi)

    @cached_property
    def sigma(self) -> RationalPolytope:
        return sigma1(self.hp.as_digraph())

    @cached_property
    def graph_shadow(self) -> RationalPolytope:
        """``H(Σ₁)`` in R^E for ψ."""
        return shadow_polytope(self.hp)

    @cached_property
    def weights(self):
        return markov_weights(self.hp, self.pf.right, self.pf)

    @cached_property
    def graph_darkness(self):
        return limit_darkness_point(self.hp, self.weights)

    def to_free_group(self) -> list[list[Fraction]]:
        """``h_ab · scalar · R_A`` as a rational matrix."""
        R = reading_matrix(self.phi.graph.n_edges, self.tree).tolist()
        M = [[self.scalar * x for x in row] for row in R]
        h = self.spec.conjugator
        if h is not None:
            Hab = abelianization_matrix(h).tolist()
            M = [[sum((Fraction(Hab[i][k]) * M[k][j] for k in range(len(M))), Fraction(0)) for j in range(len(M[0]))] for i in range(len(Hab))]
        return M

    @cached_property
    def automorphism(self) -> Automorphism:
        """The automorphism whose words are iterated: f_A, conjugated if requested."""
        f = self.f_A
        h = self.spec.conjugator
        if h is not None:
            f = h.compose(f).compose(h.inverse())
        return f

    def length_function(self):
        """Lengths of the free generators used for empirical darkness."""
        choice = self.spec.length
        if choice == "unit":
            return None
        if choice == "train":
            if self.spec.conjugator is not None:
                return None
            return [self.pf_phi.right[e - 1] for e in self.A]
        return [Fraction(choice[e - 1]) for e in self.A]


def analyse(spec: ProblemSpec, check: bool = True) -> Analysis:
    a = Analysis(spec)
    if check:
        a.check()
    return a


def compute_shadow_limit(spec: ProblemSpec) -> RationalPolytope:
    a = analyse(spec)
    return linear_image(a.graph_shadow, a.to_free_group())


@dataclass
class DarknessLimit:
    point: tuple
    approx: np.ndarray
    graph_point: tuple
    power: int
    scalar: Fraction

    def to_json(self) -> dict:
        return {
            "point": [to_json(x) for x in self.point],
            "approx": [float(x) for x in self.approx],
            "power": self.power,
            "scalar": to_json(self.scalar),
        }


def compute_darkness_limit(spec: ProblemSpec) -> DarknessLimit:
    a = analyse(spec)
    M = a.to_free_group()
    x = a.graph_darkness.point
    zero = x[0] * 0
    pt = tuple(sum((row[j] * x[j] for j in range(len(x)) if row[j]), zero) for row in M)
    return DarknessLimit(pt, np.array([float(c) for c in pt]), x, a.power, a.scalar)


def conjugation_matrix(h: Automorphism) -> np.ndarray:
    return abelianization_matrix(h)


@dataclass
class ConvergenceReport:
    seed: str
    ks: list[int]
    hausdorff: list[float]
    ball_masses: dict[float, list[float]]
    lengths: list[int]
    runtimes: list[float]
    fitted_C: float
    burn_in: int
    monotone: bool
    final_mass_ok: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_mass_ok

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "k": self.ks,
            "hausdorff": self.hausdorff,
            "ball_masses": {str(r): v for r, v in self.ball_masses.items()},
            "word_lengths": self.lengths,
            "runtimes": [round(t, 6) for t in self.runtimes],
            "fitted_C": self.fitted_C,
            "burn_in": self.burn_in,
            "monotone": self.monotone,
            "final_mass_ok": self.final_mass_ok,
        }


RADII = (0.05, 0.1, 0.2)


def fit_inverse_k(ks, ds) -> float:
    """Least-squares C in ``d ≈ C/k``."""
    ks = np.asarray(ks, dtype=float)
    ds = np.asarray(ds, dtype=float)
    if ks.size == 0:
        return 0.0
    return float((ds / ks).sum() / (1.0 / ks**2).sum())


def convergence_run(
    f: Automorphism,
    seed: Word,
    polytope: RationalPolytope,
    point,
    kmin: int,
    kmax: int,
    lengths=None,
    burn_in: int = 3,
    budget: int = DEFAULT_LENGTH_BUDGET,
) -> ConvergenceReport:
    n = f.rank
    ks, dh, lens, times = [], [], [], []
    masses: dict[float, list[float]] = {r: [] for r in RADII}
    w = apply_automorphism(f, seed, kmin - 1, budget)
    center = [float(c) for c in point]
    for k in range(kmin, kmax + 1):
        t0 = time.perf_counter()
        w = apply_automorphism(f, w, 1, budget)
        sh = parametrized_shadow(w, dim=n)
        dh.append(hausdorff_to_shadow(polytope, sh, k))
        mu = darkness_measure(w, lengths, k, dim=n)
        for r in RADII:
            masses[r].append(ball_mass(mu, center, r))
        ks.append(k)
        lens.append(len(w))
        times.append(time.perf_counter() - t0)
    tail = [(k, d) for k, d in zip(ks, dh) if k >= burn_in]
    mono = all(b <= a + 1e-12 for (_, a), (_, b) in zip(tail, tail[1:]))
    C = fit_inverse_k([k for k, _ in tail], [d for _, d in tail]) if tail else 0.0
    return ConvergenceReport(
        seed=str(seed),
        ks=ks,
        hausdorff=dh,
        ball_masses=masses,
        lengths=lens,
        runtimes=times,
        fitted_C=C,
        burn_in=burn_in,
        monotone=mono,
        final_mass_ok=bool(masses[0.1] and masses[0.1][-1] >= 0.9),
    )


def verify_convergence(spec: ProblemSpec, kmax: int | None = None, budget: int = DEFAULT_LENGTH_BUDGET) -> list[ConvergenceReport]:
    a = analyse(spec)
    P = compute_shadow_limit(spec)
    pt = compute_darkness_limit(spec).approx
    kmin, k1 = spec.iterations
    kmax = kmax or k1
    return [
        convergence_run(a.automorphism, x, P, pt, kmin, kmax, a.length_function(), budget=budget)
        for x in spec.seeds
    ]


def successive_distances(f: Automorphism, seed: Word, kmax: int, samples: int = 4, budget: int = DEFAULT_LENGTH_BUDGET):
    """Words ``f^k(x)`` and the Hausdorff distances between consecutive rescaled shadows."""
    words = []
    w = seed
    for _ in range(kmax):
        w = apply_automorphism(f, w, 1, budget)
        words.append(w)
    clouds = [densify(parametrized_shadow(w, dim=f.rank), samples, k) for k, w in enumerate(words, start=1)]
    dists = [hausdorff_distance(clouds[i], clouds[i + 1]) for i in range(len(clouds) - 1)]
    return words, dists


@dataclass
class EquivarianceReport:
    max_by_length: dict[int, float]
    bounded: bool
    power_scalars: dict[int, str]
    power_consistent: bool
    empirical_choice: dict[int, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "max_distance_by_length": {str(k): v for k, v in self.max_by_length.items()},
            "bounded": self.bounded,
            "power_scalars": {str(k): v for k, v in self.power_scalars.items()},
            "power_consistent": self.power_consistent,
            "empirical_choice": {str(k): v for k, v in self.empirical_choice.items()},
        }


def conjugation_defect(h: Automorphism, w: Word, samples: int = 2) -> float:
    """``d_H(shd h(w), h_ab · shd w)`` on sampled point sets."""
    n = h.rank
    hw = parametrized_shadow(apply_automorphism(h, w), dim=n)
    sw = parametrized_shadow(w, dim=n)
    M = abelianization_matrix(h).astype(float)
    X = densify(hw, samples)
    Y = densify(sw, samples) @ M.T
    return hausdorff_distance(X, Y)


def power_scalar(phi: GraphMap, L: int) -> str:
    """Exact relation between ``H(Σ₁)`` for φ and for φ^L: ``"L"``, ``"1/L"`` or ``"none"``."""
    P1 = shadow_polytope(build_hp_graph(phi))
    PL = shadow_polytope(build_hp_graph(phi.power(L)))
    if PL == P1.scaled(L):
        return "L"
    if PL == P1.scaled(Fraction(1, L)):
        return "1/L"
    return "none"


def empirical_power_choice(f: Automorphism, seed: Word, L: int, j: int, samples: int = 2, budget: int = DEFAULT_LENGTH_BUDGET) -> dict:
    """Distances from ``shd_j (f^L)^j(x)`` to ``s · shd_{Lj} f^{Lj}(x)`` for s = L and s = 1/L.

    The two words are produced independently, one by iterating ``f^L`` and
    one by iterating ``f``.
    """
    fL = f.power(L)
    w1 = apply_automorphism(fL, seed, j, budget)
    w2 = apply_automorphism(f, seed, L * j, budget)
    X = densify(parametrized_shadow(w1, dim=f.rank), samples, j)
    Y = densify(parametrized_shadow(w2, dim=f.rank), samples, L * j)
    return {"L": hausdorff_distance(X, L * Y), "1/L": hausdorff_distance(X, Y / L)}


def verify_equivariance_and_power(
    spec: ProblemSpec,
    h: Automorphism | None = None,
    Ls=(2, 3),
    samples_per_length: int = 4,
    max_log_length: int = 10,
    rng_seed: int = 0,
) -> EquivarianceReport:
    a = analyse(spec, check=False)
    h = h or spec.conjugator or Automorphism.identity(len(a.A))
    if not h.has_inverse:
        raise ValidationFailure("the conjugator needs a declared inverse")
    rng = random.Random(rng_seed)
    by_len: dict[int, float] = {}
    for j in range(1, max_log_length + 1):
        n = 2**j
        by_len[n] = max(conjugation_defect(h, random_reduced_word(h.rank, n, rng)) for _ in range(samples_per_length))
    lens = sorted(by_len)
    half = lens[: len(lens) // 2]
    early = max(by_len[n] for n in half) if half else 0.0
    late = max(by_len[n] for n in lens[len(lens) // 2 :])
    bounded = late <= 2 * early + 1e-9
    scalars = {L: power_scalar(a.psi, L) for L in Ls}
    f = a.automorphism
    choice = {}
    for L in Ls:
        d = empirical_power_choice(f, spec.seeds[0], L, 2)
        choice[L] = min(d, key=d.get)
    consistent = len(set(choice.values())) == 1 and all(v in ("none", choice[L]) for L, v in scalars.items())
    return EquivarianceReport(by_len, bounded, scalars, consistent, choice)


@dataclass
class MassReport:
    ks: list[int]
    masses: list[float]
    direct: float
    displayed: float
    matches: str


def mass_check(spec: ProblemSpec, seed_edges=None, kmax: int = 30) -> MassReport:
    """Mass of the non-tree edges in ``φ^k(p)`` under the train length, against two formulas."""
    a = analyse(spec, check=False)
    phi = spec.phi
    T = transition_matrix(phi).astype(object)
    pf = a.pf_phi
    l = np.array([float(x) for x in pf.right])
    u = np.array([float(x) for x in pf.left])
    Amask = np.zeros(len(l), dtype=bool)
    Amask[[e - 1 for e in a.A]] = True
    c = np.zeros(len(l), dtype=object)
    for e in seed_edges or [a.A[0]]:
        c[abs(e) - 1] += 1
    ks, ms = [], []
    for k in range(1, kmax + 1):
        c = T.T.dot(c)
        cf = c.astype(float)
        ms.append(float((cf * l)[Amask].sum() / (cf * l).sum()))
        ks.append(k)
    direct = float((u * l)[Amask].sum() / (u * l).sum())
    displayed = float(l[Amask].sum() * u[Amask].sum() / (l.sum() * u.sum()))
    last = ms[-1]
    matches = "direct" if abs(last - direct) < abs(last - displayed) else "displayed"
    return MassReport(ks, ms, direct, displayed, matches)


def ratio_check(spec: ProblemSpec, path_steps, kmax: int = 12) -> list[float]:
    """``l(φ^k p) / l((φ^k p)^red)`` under the train length, for k = 1..kmax."""
    a = analyse(spec, check=False)
    phi = spec.phi
    l = np.array([float(x) for x in a.pf_phi.right])
    T = transition_matrix(phi).astype(object)
    c = np.zeros(len(l), dtype=object)
    for s in path_steps:
        c[abs(s) - 1] += 1
    out = []
    steps = np.asarray(path_steps, dtype=np.int32)
    for k in range(1, kmax + 1):
        c = T.T.dot(c)
        steps = phi.iterate_steps(steps, 1)
        red = np.bincount(np.abs(steps) - 1, minlength=len(l)).astype(float)
        out.append(float((c.astype(float) * l).sum() / (red * l).sum()))
    return out
