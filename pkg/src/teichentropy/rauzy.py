"""Permutations, Rauzy operations, Rauzy classes and renormalization matrices.

Permutations are stored as 1-indexed image tuples ``(pi(1), ..., pi(m))``.
Interval ``k`` of the top partition is placed at position ``pi(k)`` after
the exchange.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import InadmissibleWordError, InvalidInputError, ReduciblePermutationError

__all__ = [
    "Permutation",
    "RenormMatrix",
    "RauzyClass",
    "SymbolLetter",
    "is_irreducible",
    "rauzy_a",
    "rauzy_b",
    "rauzy_op",
    "rauzy_power",
    "rauzy_class",
    "matrix_of_letter",
    "letter_matrix",
    "matrix_of_word",
    "is_positive_word",
    "compatible",
    "check_admissible",
]


@dataclass(frozen=True, order=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        object.__setattr__(self, "images", images)
        if len(images) < 2:
            raise InvalidInputError("a permutation needs at least 2 symbols")
        if sorted(images) != list(range(1, len(images) + 1)):
            raise InvalidInputError(f"{images} is not a bijection of 1..{len(images)}")

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Parse ``"3,2,1"`` (brackets and spaces are tolerated)."""
        body = text.strip().strip("[]()")
        try:
            return cls(tuple(int(t) for t in body.replace(" ", ",").split(",") if t))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse permutation {text!r}") from exc

    @property
    def m(self) -> int:
        return len(self.images)

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def inv(self, j: int) -> int:
        return self.images.index(j) + 1

    def __str__(self):
        return "(" + ",".join(map(str, self.images)) + ")"

    def to_json(self) -> list[int]:
        return list(self.images)


def is_irreducible(p: Permutation | Sequence[int]) -> bool:
    if not isinstance(p, Permutation):
        p = Permutation(tuple(p))
    top = 0
    for k in range(1, p.m):
        top = max(top, p(k))
        if top == k:
            return False
    return True


def _require_irreducible(p: Permutation) -> None:
    if not is_irreducible(p):
        raise ReduciblePermutationError(f"{p} is reducible")


@lru_cache(maxsize=None)
def _a(p: Permutation) -> Permutation:
    m, k = p.m, p.inv(p.m)
    out = []
    for j in range(1, m + 1):
        if j <= k:
            out.append(p(j))
        elif j == k + 1:
            out.append(p(m))
        else:
            out.append(p(j - 1))
    return Permutation(tuple(out))


@lru_cache(maxsize=None)
def _b(p: Permutation) -> Permutation:
    m, pm = p.m, p(p.m)
    out = []
    for j in range(1, m + 1):
        v = p(j)
        if v <= pm:
            out.append(v)
        elif v < m:
            out.append(v + 1)
        else:
            out.append(pm + 1)
    return Permutation(tuple(out))


def rauzy_a(p: Permutation) -> Permutation:
    _require_irreducible(p)
    return _a(p)


def rauzy_b(p: Permutation) -> Permutation:
    _require_irreducible(p)
    return _b(p)


def rauzy_op(c: str, p: Permutation) -> Permutation:
    if c == "a":
        return rauzy_a(p)
    if c == "b":
        return rauzy_b(p)
    raise InvalidInputError(f"unknown Rauzy operation {c!r}")


@lru_cache(maxsize=None)
def rauzy_cycle_length(c: str, p: Permutation) -> int:
    """Least ``L >= 1`` with ``c^L p == p``."""
    q, n = rauzy_op(c, p), 1
    while q != p:
        q, n = rauzy_op(c, q), n + 1
    return n


def rauzy_power(c: str, n: int, p: Permutation) -> Permutation:
    """``c^n p``; the orbit of ``p`` under a single operation is periodic."""
    for _ in range(n % rauzy_cycle_length(c, p)):
        p = rauzy_op(c, p)
    return p


@dataclass(frozen=True)
class RauzyClass:
    members: tuple[Permutation, ...]
    edges: tuple[tuple[Permutation, str, Permutation], ...]

    def __len__(self):
        return len(self.members)

    def __contains__(self, p):
        return p in self.members

    def __iter__(self):
        return iter(self.members)

    def to_dot(self, name: str = "rauzy") -> str:
        lines = [f"digraph {name} {{"]
        for p in self.members:
            lines.append(f'  "{p}" [label="{p}"];')
        for src, lab, dst in self.edges:
            lines.append(f'  "{src}" -> "{dst}" [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "size": len(self.members),
            "members": [p.to_json() for p in self.members],
            "edges": [[s.to_json(), lab, d.to_json()] for s, lab, d in self.edges],
        }


def rauzy_class(p: Permutation) -> RauzyClass:
    """Breadth-first closure of ``p`` under ``a`` and ``b`` (``a`` first)."""
    _require_irreducible(p)
    seen = {p}
    queue = deque([p])
    edges = []
    while queue:
        cur = queue.popleft()
        for lab, op in (("a", _a), ("b", _b)):
            nxt = op(cur)
            edges.append((cur, lab, nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    members = tuple(sorted(seen, key=lambda q: q.images))
    order = {q: i for i, q in enumerate(members)}
    edges.sort(key=lambda e: (order[e[0]], e[1]))
    return RauzyClass(members, tuple(edges))


@dataclass(frozen=True)
class RenormMatrix:
    """Square matrix of Python integers (arbitrary precision)."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if any(len(r) != len(rows) for r in rows):
            raise InvalidInputError("matrix must be square")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def identity(cls, m: int) -> "RenormMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(m)) for i in range(m)))

    @property
    def m(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other):
        if isinstance(other, RenormMatrix):
            cols = list(zip(*other.rows))
            return RenormMatrix(
                tuple(tuple(sum(x * y for x, y in zip(r, c)) for c in cols) for r in self.rows)
            )
        return tuple(sum(x * y for x, y in zip(r, other)) for r in self.rows)

    def __pow__(self, n: int) -> "RenormMatrix":
        result, base = RenormMatrix.identity(self.m), self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def det(self) -> int:
        # Bareiss fraction-free elimination
        a = [list(r) for r in self.rows]
        n, sign, prev = self.m, 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def is_positive(self) -> bool:
        return all(x > 0 for r in self.rows for x in r)

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.rows)

    def col_sums(self) -> tuple[int, ...]:
        return tuple(sum(c) for c in zip(*self.rows))

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, data) -> "RenormMatrix":
        return cls(tuple(tuple(int(x) for x in r) for r in data))


@lru_cache(maxsize=None)
def matrix_of_letter(c: str, p: Permutation) -> RenormMatrix:
    """Single-step matrix ``A(c, pi)``."""
    _require_irreducible(p)
    m, k = p.m, p.inv(p.m)
    e = [[int(i == j) for j in range(m)] for i in range(m)]
    if c == "a":
        for i in range(k, m):
            e[i][i] = 0
        for i in range(k - 1, m - 1):
            e[i][i + 1] = 1
        e[k - 1][k - 1] = 1
        e[m - 1][k] = 1
    elif c == "b":
        e[m - 1][k - 1] += 1
    else:
        raise InvalidInputError(f"unknown Rauzy operation {c!r}")
    return RenormMatrix(tuple(map(tuple, e)))


@dataclass(frozen=True, order=True)
class SymbolLetter:
    """Letter ``(c, n, pi)``: ``n`` consecutive induction steps of type ``c``
    starting from ``pi``."""

    c: str
    n: int
    pi: Permutation

    def __post_init__(self):
        if self.c not in ("a", "b"):
            raise InvalidInputError(f"letter type must be 'a' or 'b', got {self.c!r}")
        if int(self.n) < 1:
            raise InvalidInputError("letter exponent n must be positive")
        object.__setattr__(self, "n", int(self.n))

    @property
    def end(self) -> Permutation:
        """``c^n pi``, the permutation reached after the letter."""
        return rauzy_power(self.c, self.n, self.pi)

    def __str__(self):
        return f"{self.c}:{self.n}:[{','.join(map(str, self.pi.images))}]"

    def to_json(self):
        return [self.c, self.n, self.pi.to_json()]

    @classmethod
    def from_json(cls, data) -> "SymbolLetter":
        c, n, pi = data
        return cls(c, int(n), Permutation(tuple(pi)))


def compatible(u: SymbolLetter, v: SymbolLetter) -> bool:
    """Incidence ``B(u, v)``."""
    return u.c != v.c and u.end == v.pi


def check_admissible(word: Sequence[SymbolLetter]) -> None:
    for u, v in zip(word, word[1:]):
        if not compatible(u, v):
            raise InadmissibleWordError(f"letters {u} and {v} are not compatible")


@lru_cache(maxsize=None)
def _cycle_matrix(c: str, p: Permutation) -> RenormMatrix:
    mat = RenormMatrix.identity(p.m)
    q = p
    for _ in range(rauzy_cycle_length(c, p)):
        mat = mat @ matrix_of_letter(c, q)
        q = rauzy_op(c, q)
    return mat


@lru_cache(maxsize=4096)
def letter_matrix(letter: SymbolLetter) -> RenormMatrix:
    """``A(c,pi) A(c,c pi) ... A(c,c^{n-1} pi)``."""
    c, n, p = letter.c, letter.n, letter.pi
    _require_irreducible(p)
    period = rauzy_cycle_length(c, p)
    mat = _cycle_matrix(c, p) ** (n // period)
    for _ in range(n % period):
        mat = mat @ matrix_of_letter(c, p)
        p = rauzy_op(c, p)
    return mat


def matrix_of_word(word: Iterable[SymbolLetter], m: int | None = None) -> RenormMatrix:
    word = tuple(word)
    if not word:
        if m is None:
            raise InvalidInputError("dimension required for the empty word")
        return RenormMatrix.identity(m)
    check_admissible(word)
    mat = letter_matrix(word[0])
    for letter in word[1:]:
        mat = mat @ letter_matrix(letter)
    return mat


def is_positive_word(word: Sequence[SymbolLetter]) -> bool:
    return bool(word) and matrix_of_word(word).is_positive()
