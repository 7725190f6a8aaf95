"""Perron-Frobenius data for nonnegative integer matrices, computed exactly.

The dominant eigenvalue is represented in the number field generated by the
irreducible factor of the characteristic polynomial that owns the largest
real root.  When that factor is linear everything stays in Fractions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import linalg
from . import poly as P
from .field import Algebraic, NumberField


class NotPrimitive(ValueError):
    """The matrix has no strictly positive power."""


class ReducibleChain(ValueError):
    """The Markov chain is not irreducible."""


@dataclass(frozen=True)
class PFCertificate:
    primitive: bool
    exponent: int | None
    bound: int
    zero_pattern: tuple[tuple[int, int], ...] = ()

    def __bool__(self) -> bool:
        return self.primitive


def pf_certificate(A) -> PFCertificate:
    """Smallest k with A^k > 0, searched up to Wielandt's bound (n-1)^2+1.

    On failure the zero pattern of A^bound is returned as witness.
    """
    B = np.asarray(A, dtype=np.int64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("matrix must be square")
    if (B < 0).any():
        raise ValueError("matrix must be nonnegative")
    n = B.shape[0]
    bound = (n - 1) ** 2 + 1
    S = (B > 0).astype(np.int64)
    M = S.copy()
    for k in range(1, bound + 1):
        if M.all():
            return PFCertificate(True, k, bound)
        if k < bound:
            M = ((M @ S) > 0).astype(np.int64)
    zeros = tuple((int(i), int(j)) for i, j in zip(*np.nonzero(M == 0)))
    return PFCertificate(False, None, bound, zeros)


@dataclass
class PFData:
    rho: object  # Algebraic or Fraction
    approx: float
    right: tuple  # T l = rho l, first entry 1
    left: tuple  # u T = rho u, normalised so that u . l = 1
    exponent: int
    charpoly: tuple[int, ...]
    factors: list = field(default_factory=list)
    minpoly: tuple[int, ...] = ()
    field: NumberField | None = None

    def element(self, x):
        """Coerce a rational into the number system of this data."""
        return self.field(x) if self.field is not None else Fraction(x)


def _positive_normalise(v, pivot_index: int = 0):
    c = v[pivot_index]
    if c == 0:
        raise ArithmeticError("eigenvector has a zero entry")
    out = [x / c for x in v]
    for x in out:
        if not x > 0:
            raise ArithmeticError("Perron eigenvector is not positive")
    return out


def dominant_eigendata(A) -> PFData:
    A = [[int(x) for x in row] for row in A]
    cert = pf_certificate(A)
    if not cert:
        raise NotPrimitive(f"matrix is not primitive (no positive power up to {cert.bound})")
    n = len(A)
    cp = P.charpoly(A)
    factors = P.factor_integer_poly(cp)
    lo, hi = P.largest_real_root(P.poly(cp))
    owner = None
    for f, _ in factors:
        fp = P.poly(f)
        if P.count_roots(P.sturm_sequence(fp), lo, hi) == 1:
            owner = f
            break
    if owner is None:
        raise ArithmeticError("no factor owns the dominant root")
    if len(owner) == 2:
        K = None
        rho = Fraction(-owner[0], owner[1])
        one = Fraction(1)
    else:
        K = NumberField(owner, (lo, hi))
        rho = K.gen
        one = K.one()
    shifted = [[one * A[i][j] - (rho if i == j else 0) for j in range(n)] for i in range(n)]
    right = linalg.nullspace(shifted, n, one=one)
    left = linalg.nullspace(linalg.transpose(shifted), n, one=one)
    if len(right) != 1 or len(left) != 1:
        raise ArithmeticError("dominant eigenspace is not one-dimensional")
    l = _positive_normalise(right[0])
    u = _positive_normalise(left[0])
    s = sum((a * b for a, b in zip(u, l)), one * 0)
    u = [x / s for x in u]
    return PFData(
        rho=rho,
        approx=float(rho),
        right=tuple(l),
        left=tuple(u),
        exponent=cert.exponent,
        charpoly=cp,
        factors=factors,
        minpoly=tuple(owner),
        field=K,
    )


def power_iteration(A, tol: float = 1e-13, maxiter: int = 10000) -> tuple[float, np.ndarray]:
    """Numeric fallback: dominant eigenvalue and unit-sum right eigenvector."""
    M = np.asarray(A, dtype=float)
    v = np.ones(M.shape[0]) / M.shape[0]
    rho = 0.0
    for _ in range(maxiter):
        w = M @ v
        s = w.sum()
        w = w / s
        if np.abs(w - v).max() < tol and abs(s - rho) < tol * max(1.0, s):
            return float(s), w
        v, rho = w, s
    return float(rho), v


def _strongly_connected(support: np.ndarray) -> bool:
    n = support.shape[0]
    for adj in (support, support.T):
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.nonzero(adj[i])[0]:
                j = int(j)
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            return False
    return True


def stationary_distribution(Pm: Sequence[Sequence]) -> list:
    """Exact stationary vector of an irreducible row-stochastic matrix.

    Entries may be Fractions or elements of a single number field.
    """
    n = len(Pm)
    rows = [list(r) for r in Pm]
    zero = rows[0][0] * 0
    one = zero + 1
    for i, r in enumerate(rows):
        if sum(r, zero) != 1:
            raise ValueError(f"row {i} does not sum to 1")
        if any(x < 0 for x in r):
            raise ValueError(f"row {i} has a negative entry")
    support = np.array([[x != 0 for x in r] for r in rows], dtype=bool)
    if not _strongly_connected(support):
        raise ReducibleChain("chain is not irreducible")
    system = [[rows[j][i] - (one if i == j else zero) for j in range(n)] for i in range(n)]
    ker = linalg.nullspace(system, n, one=one)
    if len(ker) != 1:
        raise ReducibleChain("stationary vector is not unique")
    v = ker[0]
    s = sum(v, zero)
    pi = [x / s for x in v]
    if any(not x > 0 for x in pi):
        raise ArithmeticError("stationary vector is not positive")
    return pi


def train_length_function(phi) -> tuple:
    """Right Perron eigenvector of the transition matrix, first edge of length 1."""
    from ..graphs import transition_matrix

    return dominant_eigendata(transition_matrix(phi)).right
