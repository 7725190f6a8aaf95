"""Free group words and automorphisms.

Letters are signed integers: ``+i`` is the generator ``a_i`` (1-based) and
``-i`` its inverse.  In the compact text notation lowercase letters are
generators and the matching uppercase letters their inverses, so ``"abA"``
is ``a b a^-1``.

Words are stored as read-only ``int32`` numpy arrays so that iterates of
automorphisms with ~10^7 letters stay manageable.  Substitution streams the
generator images onto a stack; since every image is reduced, cancellation
can only happen across the seam between the stack and the next image.
"""
from __future__ import annotations

import itertools
import random
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from numba import njit

DEFAULT_LENGTH_BUDGET = 10**8


class LengthBudgetExceeded(RuntimeError):
    """A word computation would materialise more letters than allowed."""


class Letter(NamedTuple):
    generator: int
    sign: int

    @classmethod
    def from_int(cls, x: int) -> "Letter":
        if x == 0:
            raise ValueError("0 is not a letter")
        return cls(abs(x), 1 if x > 0 else -1)

    def __int__(self) -> int:
        return self.generator * self.sign


@njit(cache=True)
def _reduce_kernel(a):
    out = np.empty(a.shape[0], dtype=np.int32)
    top = 0
    for i in range(a.shape[0]):
        x = a[i]
        if top > 0 and out[top - 1] == -x:
            top -= 1
        else:
            out[top] = x
            top += 1
    return out[:top].copy()


@njit(cache=True)
def _substitute_kernel(word, flat, starts, stops, rank, total):
    out = np.empty(total, dtype=np.int32)
    top = 0
    for i in range(word.shape[0]):
        x = word[i]
        slot = x - 1 if x > 0 else rank - x - 1
        for j in range(starts[slot], stops[slot]):
            y = flat[j]
            if top > 0 and out[top - 1] == -y:
                top -= 1
            else:
                out[top] = y
                top += 1
    return out[:top].copy()


def _as_array(letters) -> np.ndarray:
    if isinstance(letters, Word):
        return letters.array
    a = np.asarray(letters if not isinstance(letters, (tuple, list)) else list(letters), dtype=np.int64)
    if a.ndim != 1:
        raise ValueError("letters must be a flat sequence")
    if a.size and (a == 0).any():
        raise ValueError("0 is not a letter")
    return a.astype(np.int32)


def parse_letters(text: str) -> list[int]:
    """Case notation to signed letters: ``"abA" -> [1, 2, -1]``."""
    if text.strip() in ("", "1"):
        return []  # "1" denotes the empty word
    out = []
    for pos, ch in enumerate(text):
        if ch.isspace():
            continue
        if "a" <= ch <= "z":
            out.append(ord(ch) - ord("a") + 1)
        elif "A" <= ch <= "Z":
            out.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"bad letter {ch!r} at position {pos}")
    return out


def format_letters(letters: Iterable[int]) -> str:
    chars = []
    for x in letters:
        g = abs(int(x))
        if g > 26:
            raise ValueError("case notation only covers 26 generators")
        base = "a" if x > 0 else "A"
        chars.append(chr(ord(base) + g - 1))
    return "".join(chars)


class Word:
    """A reduced word in a free group.

    The constructor checks reducedness; use :func:`reduce_word` to build a
    word from an arbitrary letter sequence.
    """

    __slots__ = ("_a", "_hash")

    def __init__(self, letters=(), *, rank: int | None = None, check: bool = True):
        a = _as_array(letters)
        if check:
            if a.size > 1 and (a[1:] == -a[:-1]).any():
                raise ValueError("word is not reduced")
            if rank is not None and a.size and np.abs(a).max() > rank:
                raise ValueError(f"generator index exceeds rank {rank}")
        a.setflags(write=False)
        self._a = a
        self._hash = None

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "Word":
        return reduce_word(parse_letters(text), rank=rank)

    @property
    def array(self) -> np.ndarray:
        return self._a

    @property
    def letters(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self._a)

    def __len__(self) -> int:
        return int(self._a.shape[0])

    def __iter__(self) -> Iterator[int]:
        return (int(x) for x in self._a)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Word(self._a[idx], check=False)
        return int(self._a[idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self._a.shape == other._a.shape and bool((self._a == other._a).all())

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._a.tobytes())
        return self._hash

    def __mul__(self, other: "Word") -> "Word":
        return reduce_word(np.concatenate([self._a, other._a]))

    def inverse(self) -> "Word":
        return Word(-self._a[::-1], check=False)

    def max_generator(self) -> int:
        return int(np.abs(self._a).max()) if len(self) else 0

    def exponent_sums(self, rank: int) -> np.ndarray:
        """Abelianization of the word as an integer vector in Z^rank."""
        a = self._a.astype(np.int64)
        return np.bincount(np.abs(a) - 1, weights=np.sign(a), minlength=rank).astype(np.int64)[:rank]

    def __str__(self) -> str:
        if len(self) == 0:
            return "1"
        if self.max_generator() <= 26:
            return format_letters(self._a)
        return " ".join(f"x{abs(x)}" + ("" if x > 0 else "^-1") for x in self)

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 60:
            s = s[:57] + "..."
        return f"Word({s!r})"


def reduce_word(letters, rank: int | None = None) -> Word:
    """Freely reduce a letter sequence."""
    a = _as_array(letters)
    if rank is not None and a.size and np.abs(a).max() > rank:
        raise ValueError(f"generator index exceeds rank {rank}")
    if a.size < 2:
        return Word(a, check=False)
    return Word(_reduce_kernel(a), check=False)


def _reduce_tuple(seq: Sequence[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in seq:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


class Automorphism:
    """An endomorphism of F_n given by generator images, optionally with a
    declared inverse.

    Only the declared inverse is checked; no attempt is made to decide
    invertibility otherwise.
    """

    def __init__(self, images: Sequence, inverse_images: Sequence | None = None):
        self.images = tuple(i if isinstance(i, Word) else reduce_word(i) for i in images)
        self.rank = len(self.images)
        for w in self.images:
            if w.max_generator() > self.rank:
                raise ValueError("image uses a generator beyond the rank")
        self._tables = None
        self._small = None
        self.inverse_images = None
        if inverse_images is not None:
            inv = tuple(i if isinstance(i, Word) else reduce_word(i) for i in inverse_images)
            if len(inv) != self.rank:
                raise ValueError("inverse has the wrong rank")
            self.inverse_images = inv
            if not self._inverse_ok():
                raise ValueError("declared inverse does not invert the automorphism")

    @classmethod
    def parse(cls, images: Sequence[str], inverse_images: Sequence[str] | None = None) -> "Automorphism":
        rank = len(images)
        imgs = [reduce_word(parse_letters(s), rank=rank) for s in images]
        inv = None
        if inverse_images is not None:
            inv = [reduce_word(parse_letters(s), rank=rank) for s in inverse_images]
        return cls(imgs, inv)

    @classmethod
    def identity(cls, rank: int) -> "Automorphism":
        gens = [Word([i]) for i in range(1, rank + 1)]
        return cls(gens, gens)

    def _inverse_ok(self) -> bool:
        g = Automorphism(self.inverse_images)
        for i in range(1, self.rank + 1):
            x = Word([i])
            if apply_automorphism(self, apply_automorphism(g, x)) != x:
                return False
            if apply_automorphism(g, apply_automorphism(self, x)) != x:
                return False
        return True

    @property
    def has_inverse(self) -> bool:
        return self.inverse_images is not None

    def inverse(self) -> "Automorphism":
        if self.inverse_images is None:
            raise ValueError("no inverse declared")
        return Automorphism(self.inverse_images, self.images)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """``self ∘ other`` (apply ``other`` first)."""
        if other.rank != self.rank:
            raise ValueError("rank mismatch")
        imgs = [apply_automorphism(self, w) for w in other.images]
        inv = None
        if self.inverse_images is not None and other.inverse_images is not None:
            inv = [apply_automorphism(other.inverse(), w) for w in self.inverse_images]
        return Automorphism(imgs, inv)

    def power(self, m: int) -> "Automorphism":
        if m < 0:
            return self.inverse().power(-m)
        out = Automorphism.identity(self.rank)
        for _ in range(m):
            out = self.compose(out)
        return out

    def conjugate_by(self, h: "Automorphism") -> "Automorphism":
        """``h ∘ self ∘ h^-1``."""
        return h.compose(self).compose(h.inverse())

    def image(self, x: int) -> Word:
        w = self.images[abs(x) - 1]
        return w if x > 0 else w.inverse()

    def tables(self):
        if self._tables is None:
            imgs = list(self.images) + [w.inverse() for w in self.images]
            lengths = np.array([len(w) for w in imgs], dtype=np.int64)
            stops = np.cumsum(lengths)
            starts = stops - lengths
            flat = np.concatenate([w.array for w in imgs]).astype(np.int32) if stops[-1] else np.zeros(0, np.int32)
            self._tables = (flat, starts, stops, lengths)
        return self._tables

    def small_images(self) -> dict[int, tuple[int, ...]]:
        if self._small is None:
            d = {}
            for i, w in enumerate(self.images, start=1):
                d[i] = w.letters
                d[-i] = tuple(-x for x in reversed(d[i]))
            self._small = d
        return self._small

    def apply_small(self, letters: Sequence[int]) -> tuple[int, ...]:
        """Pure-Python substitution for short words given as tuples."""
        imgs = self.small_images()
        stack: list[int] = []
        for x in letters:
            for y in imgs[x]:
                if stack and stack[-1] == -y:
                    stack.pop()
                else:
                    stack.append(y)
        return tuple(stack)

    def __call__(self, w: Word, k: int = 1) -> Word:
        return apply_automorphism(self, w, k)

    def __eq__(self, other) -> bool:
        return isinstance(other, Automorphism) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __str__(self) -> str:
        return "; ".join(f"{format_letters([i])} -> {w}" for i, w in enumerate(self.images, start=1))

    def __repr__(self) -> str:
        return f"Automorphism({str(self)!r})"


def apply_automorphism(f: Automorphism, w: Word, k: int = 1, budget: int = DEFAULT_LENGTH_BUDGET) -> Word:
    """Compute ``f^k(w)``, reduced.

    Raises :class:`LengthBudgetExceeded` if an intermediate substitution
    would materialise more than ``budget`` letters.
    """
    if k < 0:
        raise ValueError("iteration count must be nonnegative")
    if len(w) and w.max_generator() > f.rank:
        raise ValueError("word uses a generator beyond the automorphism's rank")
    flat, starts, stops, lengths = f.tables()
    a = w.array
    rank = f.rank
    for _ in range(k):
        if a.size == 0:
            break
        slots = np.where(a > 0, a - 1, rank - a - 1)
        total = int(lengths[slots].sum())
        if total > budget:
            raise LengthBudgetExceeded(f"substitution needs {total} letters, budget is {budget}")
        a = _substitute_kernel(a, flat, starts, stops, rank, total)
    return Word(a, check=False)


def iterate_words(f: Automorphism, w: Word, kmax: int, budget: int = DEFAULT_LENGTH_BUDGET) -> Iterator[tuple[int, Word]]:
    """Yield ``(k, f^k(w))`` for ``k = 1..kmax``."""
    for k in range(1, kmax + 1):
        w = apply_automorphism(f, w, 1, budget)
        yield k, w


def abelianization_matrix(f: Automorphism) -> np.ndarray:
    """Integer matrix whose column j is the exponent-sum vector of f(a_j)."""
    cols = [w.exponent_sums(f.rank) for w in f.images]
    return np.array(cols, dtype=np.int64).T.copy()


def finite_order(M: np.ndarray, bound: int | None = None) -> int | None:
    """Smallest m <= bound with M^m = I, or None."""
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if bound is None:
        bound = 5 * 2**n
    eye = np.eye(n, dtype=np.int64).astype(object)
    P = eye.copy()
    for m in range(1, bound + 1):
        P = P.dot(M)
        if (P == eye).all():
            return m
    return None


def has_infinite_orbit(f: Automorphism, x: Word, steps: int = 10, budget: int = DEFAULT_LENGTH_BUDGET) -> bool:
    """Heuristic: the lengths of f^k(x) strictly increase for k <= steps.

    This is not a decision procedure; periodic elements can grow for a few
    steps and elements with infinite orbit can shrink transiently.
    """
    prev = len(x)
    w = x
    for _ in range(steps):
        try:
            w = apply_automorphism(f, w, 1, budget)
        except LengthBudgetExceeded:
            return True
        if len(w) <= prev:
            return False
        prev = len(w)
    return True


def cancellation_defect(h: Automorphism, alpha: Word, beta: Word) -> int:
    """``|h(α)| + |h(β)| - |h(αβ)|`` for a reduced product αβ."""
    if len(alpha) and len(beta) and alpha[-1] == -beta[0]:
        raise ValueError("product alpha*beta is not reduced")
    ab = Word(np.concatenate([alpha.array, beta.array]), check=False)
    return len(h(alpha)) + len(h(beta)) - len(h(ab))


def reduced_words(rank: int, max_length: int) -> Iterator[tuple[int, ...]]:
    """All reduced words of length <= max_length, shortest first."""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    yield ()
    layer = [()]
    for _ in range(max_length):
        nxt = []
        for w in layer:
            for x in letters:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        yield from nxt
        layer = nxt


def _common_prefix(u: tuple[int, ...], v: tuple[int, ...]) -> int:
    n = 0
    for x, y in zip(u, v):
        if x != y:
            break
        n += 1
    return n


def _max_cross_prefix(left: list[tuple[int, ...]], right: list[tuple[int, ...]]) -> int:
    # The longest common prefix between an element of `left` and one of
    # `right` is realised by neighbours in the merged sorted order.
    tagged = sorted([(u, 0) for u in left] + [(v, 1) for v in right])
    best = 0
    last: list[tuple[int, ...] | None] = [None, None]
    for w, side in tagged:
        other = last[1 - side]
        if other is not None:
            best = max(best, _common_prefix(w, other))
        last[side] = w
    return best


def bcc_estimate(h: Automorphism, depth: int) -> int:
    """Largest cancellation defect over reduced products αβ with |α|, |β| <= depth.

    The defect equals twice the common prefix of h(α)^-1 and h(β), so the
    search groups α by last letter and β by first letter and compares the
    image sets by sorting instead of pairing every α with every β.
    """
    n = h.rank
    by_last: dict[int, list[tuple[int, ...]]] = {}
    by_first: dict[int, list[tuple[int, ...]]] = {}
    for w in reduced_words(n, depth):
        if not w:
            continue
        img = h.apply_small(w)
        by_last.setdefault(w[-1], []).append(tuple(-x for x in reversed(img)))
        by_first.setdefault(w[0], []).append(img)
    best = 0
    for x, left in by_last.items():
        for y, right in by_first.items():
            if y == -x:
                continue
            best = max(best, 2 * _max_cross_prefix(left, right))
    return best


def random_reduced_word(rank: int, length: int, rng: random.Random) -> Word:
    letters: list[int] = []
    choices = [x for i in range(1, rank + 1) for x in (i, -i)]
    while len(letters) < length:
        x = rng.choice(choices)
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return Word(letters, check=False)


def nielsen_moves(rank: int) -> list[Automorphism]:
    """Elementary Nielsen automorphisms a_i -> a_i a_j^{±1}, a_j^{±1} a_i and inversions."""
    out = []
    gens = [[i] for i in range(1, rank + 1)]
    for i, j in itertools.permutations(range(1, rank + 1), 2):
        for s in (1, -1):
            for right in (True, False):
                imgs = [list(g) for g in gens]
                inv = [list(g) for g in gens]
                if right:
                    imgs[i - 1] = [i, s * j]
                    inv[i - 1] = [i, -s * j]
                else:
                    imgs[i - 1] = [s * j, i]
                    inv[i - 1] = [-s * j, i]
                out.append(Automorphism(imgs, inv))
    for i in range(1, rank + 1):
        imgs = [list(g) for g in gens]
        imgs[i - 1] = [-i]
        out.append(Automorphism(imgs, imgs))
    return out
