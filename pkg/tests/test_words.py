import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homshadow.words import (
    Automorphism,
    LengthBudgetExceeded,
    Word,
    abelianization_matrix,
    apply_automorphism,
    bcc_estimate,
    cancellation_defect,
    finite_order,
    has_infinite_orbit,
    iterate_words,
    nielsen_moves,
    random_reduced_word,
    reduce_word,
    reduced_words,
)

letters3 = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=40)


def naive_reduce(seq):
    out = []
    for x in seq:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def naive_apply(images, w):
    out = []
    for x in w:
        img = images[abs(x) - 1]
        out.extend(img if x > 0 else [-y for y in reversed(img)])
    return naive_reduce(out)


def test_reduce_examples():
    assert len(reduce_word(Word.parse("abBA").letters)) == 0
    assert reduce_word([1, 2, 2]).letters == (1, 2, 2)
    w = Word.parse("cbCbaBcBC")
    assert len(w) == 9 and str(w) == "cbCbaBcBC"


def test_reduce_rejects_out_of_range():
    with pytest.raises(ValueError):
        reduce_word([1, 4], rank=3)
    with pytest.raises(ValueError):
        Word([1, -1])


@given(letters3, letters3)
def test_reduce_properties(u, v):
    r = reduce_word(u)
    assert reduce_word(r.letters) == r
    assert r.letters == naive_reduce(u)
    uv = reduce_word(u + v)
    assert len(uv) <= len(u) + len(v)
    assert (len(uv) - len(u) - len(v)) % 2 == 0


def test_apply_inner_example():
    f = Automorphism.parse(["baB", "b", "c"])
    w = apply_automorphism(f, Word.parse("a"), 3)
    assert str(w) == "bbbaBBB" and len(w) == 7


def test_apply_identity_and_zero(g):
    w = Word.parse("abCab")
    assert apply_automorphism(Automorphism.identity(3), w, 5) == w
    assert apply_automorphism(g, w, 0) == w


def test_g_twice_against_naive(g):
    imgs = [w.letters for w in g.images]
    once = naive_apply(imgs, (1,))
    twice = naive_apply(imgs, once)
    w = apply_automorphism(g, Word.parse("a"), 2)
    assert w.letters == twice
    assert len(w) == 49


@given(st.integers(0, 4), st.integers(0, 4))
@settings(max_examples=25, deadline=None)
def test_iteration_composes(j, extra):
    g = Automorphism.parse(["cbCbaBcBC", "cbC", "cbaBcbCbABcBC"])
    x = Word.parse("ab")
    k = j + extra
    assert apply_automorphism(g, apply_automorphism(g, x, j), extra) == apply_automorphism(g, x, k)


@given(letters3, letters3)
@settings(max_examples=60, deadline=None)
def test_homomorphism(u, v):
    g = Automorphism.parse(["cbCbaBcBC", "cbC", "cbaBcbCbABcBC"])
    U, V = reduce_word(u), reduce_word(v)
    UV = reduce_word(U.letters + V.letters)
    lhs = apply_automorphism(g, UV)
    rhs = reduce_word(apply_automorphism(g, U).letters + apply_automorphism(g, V).letters)
    assert lhs == rhs


def test_iterate_words_lengths(g):
    lengths = [len(w) for _, w in iterate_words(g, Word.parse("a"), 7)]
    assert lengths == [9, 49, 217, 929, 3945, 16721, 70841]


def test_budget(g):
    with pytest.raises(LengthBudgetExceeded):
        apply_automorphism(g, Word.parse("a"), 10, budget=10_000)


def test_abelianization_examples(g):
    assert (abelianization_matrix(g) == np.eye(3, dtype=int)).all()
    assert finite_order(abelianization_matrix(g)) == 1
    M = abelianization_matrix(Automorphism.parse(["ababA", "baBAb"]))
    assert M.tolist() == [[1, 0], [2, 1]]
    assert finite_order(M, 100) is None
    assert finite_order(abelianization_matrix(Automorphism.identity(4))) == 1


def test_finite_order_torsion():
    assert finite_order(np.array([[0, -1], [1, 0]])) == 4
    assert finite_order(np.array([[0, 1], [1, 0]])) == 2
    assert finite_order(np.array([[0, -1], [1, 1]])) == 6


def _random_automorphism(rng, rank=3, moves=5):
    f = Automorphism.identity(rank)
    pool = nielsen_moves(rank)
    for _ in range(moves):
        f = rng.choice(pool).compose(f)
    return f


def test_abelianization_multiplicative(rng):
    for _ in range(30):
        f, h = _random_automorphism(rng), _random_automorphism(rng)
        lhs = abelianization_matrix(f.compose(h))
        assert (lhs == abelianization_matrix(f) @ abelianization_matrix(h)).all()


def test_nielsen_moves_are_invertible():
    for h in nielsen_moves(3):
        assert h.has_inverse
        x = Word.parse("abcAB")
        assert apply_automorphism(h.inverse(), apply_automorphism(h, x)) == x


def test_declared_inverse_checked():
    with pytest.raises(ValueError):
        Automorphism.parse(["ab", "b"], ["ab", "b"])


def test_cancellation_defect_identity():
    e = Automorphism.identity(2)
    assert cancellation_defect(e, Word.parse("a"), Word.parse("b")) == 0
    assert all(bcc_estimate(e, d) == 0 for d in range(1, 5))
    with pytest.raises(ValueError):
        cancellation_defect(e, Word.parse("a"), Word.parse("A"))


def brute_bcc(h, depth):
    imgs = [w.letters for w in h.images]
    words = [w for w in reduced_words(h.rank, depth) if w]
    length = {w: len(naive_apply(imgs, w)) for w in words}
    best = 0
    for a, b in itertools.product(words, words):
        if a[-1] == -b[0]:
            continue
        best = max(best, length[a] + length[b] - len(naive_apply(imgs, a + b)))
    return best


def test_bcc_matches_exhaustive(g):
    assert bcc_estimate(g, 2) == brute_bcc(g, 2)
    fib = Automorphism.parse(["ab", "a"], ["b", "Ba"])
    for d in range(1, 5):
        assert bcc_estimate(fib, d) == brute_bcc(fib, d)


def test_bcc_g_depth4_exhaustive(g):
    # exhaustive over |α|, |β| <= 4 (161 words each side)
    assert bcc_estimate(g, 4) == brute_bcc(g, 4)


def test_bcc_monotone(g):
    vals = [bcc_estimate(g, d) for d in range(1, 6)]
    assert vals == sorted(vals)


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_defect_nonnegative(seed):
    rng = random.Random(seed)
    h = _random_automorphism(rng, 3, 4)
    a = random_reduced_word(3, rng.randint(1, 12), rng)
    b = random_reduced_word(3, rng.randint(1, 12), rng)
    if a.letters[-1] == -b.letters[0]:
        return
    assert cancellation_defect(h, a, b) >= 0


def test_infinite_orbit_heuristic(g):
    assert has_infinite_orbit(g, Word.parse("a"))
    assert not has_infinite_orbit(Automorphism.identity(2), Word.parse("a"))


def test_large_word_support(g):
    w = apply_automorphism(g, Word.parse("a"), 11)
    assert len(w) > 10**7
    assert not (w.array[1:] == -w.array[:-1]).any()
