"""Univariate polynomials over Q as coefficient tuples, lowest degree first.

The zero polynomial is the empty tuple.  Root isolation uses Sturm
sequences evaluated at rational points, so every answer is exact.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = tuple  # tuple[Fraction, ...]

MAX_FACTOR_DEGREE = 12


def poly(coeffs: Sequence) -> Poly:
    c = [Fraction(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def degree(p: Poly) -> int:
    return len(p) - 1


def add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def sub(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly([(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n)])


def scale(p: Poly, c) -> Poly:
    return poly([c * x for x in p])


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly(out)


def divmod_poly(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = len(q) - 1
    lead = q[-1]
    quot = [Fraction(0)] * max(len(p) - dq, 0)
    while len(r) - 1 >= dq and r:
        c = r[-1] / lead
        shift = len(r) - 1 - dq
        quot[shift] = c
        for i, b in enumerate(q):
            r[shift + i] -= c * b
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return poly(quot), poly(r)


def mod(p: Poly, q: Poly) -> Poly:
    return divmod_poly(p, q)[1]


def monic(p: Poly) -> Poly:
    return scale(p, 1 / p[-1]) if p else p


def gcd(p: Poly, q: Poly) -> Poly:
    while q:
        p, q = q, mod(p, q)
    return monic(p)


def ext_gcd(a: Poly, b: Poly) -> tuple[Poly, Poly, Poly]:
    """Return ``(g, s, t)`` with ``s a + t b = g`` and g monic."""
    r0, r1 = a, b
    s0, s1 = (Fraction(1),), ()
    t0, t1 = (), (Fraction(1),)
    while r1:
        q, r = divmod_poly(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1))
        t0, t1 = t1, sub(t0, mul(q, t1))
    lead = r0[-1]
    return scale(r0, 1 / lead), scale(s0, 1 / lead), scale(t0, 1 / lead)


def derivative(p: Poly) -> Poly:
    return poly([i * p[i] for i in range(1, len(p))])


def evaluate(p: Poly, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def sign(x) -> int:
    return (x > 0) - (x < 0)


def interval_evaluate(p: Poly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Enclosure of ``{p(x) : lo <= x <= hi}`` by interval Horner evaluation."""
    a = b = Fraction(0)
    for c in reversed(p):
        prods = (a * lo, a * hi, b * lo, b * hi)
        a, b = min(prods) + c, max(prods) + c
    return a, b


def sturm_sequence(p: Poly) -> list[Poly]:
    seq = [p, derivative(p)]
    while seq[-1]:
        r = mod(seq[-2], seq[-1])
        if not r:
            break
        seq.append(scale(r, -1))
    return seq


def _variations(seq: list[Poly], x: Fraction) -> int:
    signs = [sign(evaluate(q, x)) for q in seq]
    signs = [s for s in signs if s]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def count_roots(seq: list[Poly], lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in ``(lo, hi]``."""
    return _variations(seq, lo) - _variations(seq, hi)


def cauchy_bound(p: Poly) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def squarefree(p: Poly) -> Poly:
    return divmod_poly(p, gcd(p, derivative(p)))[0]


def largest_real_root(p: Poly) -> tuple[Fraction, Fraction] | None:
    """Isolating interval ``(lo, hi]`` for the largest real root of p, or None."""
    p = squarefree(p)
    seq = sturm_sequence(p)
    B = cauchy_bound(p)
    lo, hi = -B, B
    if count_roots(seq, lo, hi) == 0:
        return None
    while count_roots(seq, lo, hi) > 1:
        mid = (lo + hi) / 2
        if count_roots(seq, mid, hi) >= 1:
            lo = mid
        else:
            hi = mid
    while evaluate(p, lo) == 0:
        mid = (lo + hi) / 2
        if count_roots(seq, mid, hi) == 1:
            lo = mid
        else:
            hi = mid
    return lo, hi


def refine_root(p: Poly, lo: Fraction, hi: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    """Bisect an isolating interval ``(lo, hi]`` of a simple root of p."""
    slo = sign(evaluate(p, lo))
    if sign(evaluate(p, hi)) == 0:
        return hi, hi
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = sign(evaluate(p, mid))
        if s == 0:
            return mid, mid
        if s == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def charpoly(A: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Characteristic polynomial ``det(xI - A)`` of an integer matrix.

    Berkowitz's division-free recursion, so integer inputs stay integers.
    Coefficients are returned lowest degree first.
    """
    n = len(A)
    if n == 0:
        return (1,)
    A = [[int(x) for x in row] for row in A]
    C = [1, -A[0][0]]  # highest degree first
    for r in range(1, n):
        row = A[r][:r]
        v = [A[i][r] for i in range(r)]
        T = [1, -A[r][r]]
        for _ in range(r):
            T.append(-sum(a * b for a, b in zip(row, v)))
            v = [sum(A[i][j] * v[j] for j in range(r)) for i in range(r)]
        C = [sum(T[i - j] * C[j] for j in range(len(C)) if 0 <= i - j < len(T)) for i in range(r + 2)]
    return tuple(reversed(C))


def factor_integer_poly(coeffs: Sequence[int]) -> list[tuple[tuple[int, ...], int]]:
    """Irreducible factorization over Q of an integer polynomial.

    Returns ``[(factor, multiplicity), ...]`` with primitive integer factors,
    lowest degree first.  Degrees above ``MAX_FACTOR_DEGREE`` are rejected.
    """
    import sympy

    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) - 1 > MAX_FACTOR_DEGREE:
        raise ValueError(f"degree {len(coeffs) - 1} exceeds the supported bound {MAX_FACTOR_DEGREE}")
    x = sympy.Symbol("x")
    P = sympy.Poly(list(reversed(coeffs)), x, domain="ZZ")
    content, factors = P.factor_list()
    out = []
    for f, mult in factors:
        c = [int(v) for v in reversed(f.all_coeffs())]
        if c[-1] < 0:
            c = [-v for v in c]
        out.append((tuple(c), mult))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


def format_poly(p: Sequence, var: str = "x") -> str:
    terms = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and abs(c) == 1:
            coef = "-" if c < 0 else "+"
            terms.append(f"{coef}{mono}")
        else:
            terms.append(f"{'+' if c >= 0 else '-'}{abs(c)}{'*' + mono if mono else ''}")
    s = "".join(terms).lstrip("+")
    return s or "0"
