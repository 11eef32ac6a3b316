"""Word algebra over directed graphs, Markov-Bernoulli reduction and
suspension-flow helpers.

Words are tuples of vertices. The abstract layer accepts any graph that
implements ``has_edge``, ``successors`` and ``vertices``; infinite graphs
enumerate lazily and are always cut by an explicit weight budget.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .errors import InadmissibleWordError, InvalidInputError, RecurrenceNotObservedError
from .rauzy import Permutation, RauzyClass, SymbolLetter, compatible, rauzy_class, rauzy_cycle_length

__all__ = [
    "FiniteGraph",
    "CompleteGraph",
    "RauzyLetterGraph",
    "is_admissible",
    "concat",
    "occurrences",
    "is_simple_prefix",
    "is_simple",
    "iter_return_words",
    "mb_alphabet",
    "MBFactorization",
    "mb_factorize",
    "mb_join",
    "long_simple_word",
    "shortest_path",
    "SymbolicOrbit",
    "first_hitting_time",
    "abramov_entropy",
    "BernoulliSuspension",
    "parse_word",
    "format_word",
]

Vertex = Hashable
Word = tuple


class FiniteGraph:
    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[tuple[Vertex, Vertex]]):
        self._vertices = tuple(sorted(set(vertices)))
        self._succ = {v: [] for v in self._vertices}
        for u, v in edges:
            if u not in self._succ or v not in self._succ:
                raise InvalidInputError(f"edge ({u!r}, {v!r}) uses an unknown vertex")
            self._succ[u].append(v)
        for v in self._vertices:
            self._succ[v] = sorted(set(self._succ[v]))

    @classmethod
    def full_shift(cls, symbols: Iterable[Vertex]) -> "FiniteGraph":
        symbols = list(symbols)
        return cls(symbols, itertools.product(symbols, symbols))

    def has_edge(self, u, v) -> bool:
        return v in self._succ.get(u, ())

    def successors(self, u, budget: float = math.inf) -> Iterator:
        return iter(self._succ[u]) if self.weight(u) <= budget else iter(())

    def vertices(self) -> Iterator:
        return iter(self._vertices)

    def weight(self, v) -> int:
        return 1


class CompleteGraph:
    """Complete graph (loops included) over a sequence of vertices, which may
    be an unbounded generator factory."""

    def __init__(self, vertices: Callable[[], Iterable[Vertex]] | Sequence[Vertex],
                 weight: Callable[[Vertex], float] | None = None):
        self._factory = vertices if callable(vertices) else (lambda: iter(vertices))
        self._weight = weight or (lambda v: 1)

    def has_edge(self, u, v) -> bool:
        return True

    def vertices(self) -> Iterator:
        return iter(self._factory())

    def successors(self, u, budget: float = math.inf) -> Iterator:
        for v in self.vertices():
            if self._weight(v) > budget:
                return
            yield v

    def weight(self, v) -> float:
        return self._weight(v)


class RauzyLetterGraph:
    """Alphabet ``(c, n, pi)`` over a Rauzy class with incidence ``B``; a
    letter weighs ``n`` (its number of induction steps)."""

    def __init__(self, cls: RauzyClass | Permutation):
        self.cls = cls if isinstance(cls, RauzyClass) else rauzy_class(cls)
        self.max_period = max(
            rauzy_cycle_length(c, p) for p in self.cls.members for c in "ab"
        )

    def has_edge(self, u: SymbolLetter, v: SymbolLetter) -> bool:
        return compatible(u, v)

    def weight(self, v: SymbolLetter) -> int:
        return v.n

    def successors(self, u: SymbolLetter, budget: float = math.inf) -> Iterator[SymbolLetter]:
        c = "b" if u.c == "a" else "a"
        pi = u.end
        for n in itertools.count(1):
            if n > budget:
                return
            yield SymbolLetter(c, n, pi)

    def vertices(self) -> Iterator[SymbolLetter]:
        for n in itertools.count(1):
            for c in "ab":
                for p in self.cls.members:
                    yield SymbolLetter(c, n, p)


def _edge(graph, u, v) -> bool:
    if graph is None:
        if isinstance(u, SymbolLetter) and isinstance(v, SymbolLetter):
            return compatible(u, v)
        raise InvalidInputError("a graph is required for words over generic vertices")
    return graph.has_edge(u, v)


def is_admissible(word: Sequence, graph=None) -> bool:
    return all(_edge(graph, u, v) for u, v in zip(word, word[1:]))


def concat(u: Sequence, v: Sequence, graph=None) -> Word:
    u, v = tuple(u), tuple(v)
    if u and v and not _edge(graph, u[-1], v[0]):
        raise InadmissibleWordError(f"cannot join {u[-1]!r} to {v[0]!r}")
    return u + v


def occurrences(word: Sequence, w: Sequence) -> list[int]:
    """0-based start positions of ``w`` inside ``word`` (overlaps included)."""
    word, w = tuple(word), tuple(w)
    l = len(w)
    return [i for i in range(len(word) - l + 1) if word[i : i + l] == w]


def is_simple_prefix(prefix: Sequence, w: Sequence) -> bool:
    """No shift ``k`` in ``2..len(prefix)`` with ``w[1..n-k+1] == w[k..n]``."""
    prefix, w = tuple(prefix), tuple(w)
    if w[: len(prefix)] != prefix:
        raise InvalidInputError("prefix is not a prefix of the word")
    n = len(w)
    return not any(w[: n - k + 1] == w[k - 1 :] for k in range(2, len(prefix) + 1))


def is_simple(w: Sequence) -> bool:
    return is_simple_prefix(w, w)


def iter_return_words(w: Sequence, length_bound: float, graph, init=None, step=None):
    """Depth-first enumeration behind ``mb_alphabet``.

    Yields ``(word, weight, acc)`` for every return word; ``acc`` is folded
    along the path with ``step(acc, vertex)`` starting from ``init``, so
    callers can carry running products without recomputing prefixes.
    """
    w = tuple(w)
    if not w:
        raise InvalidInputError("w must be nonempty")
    if not is_admissible(w, graph):
        raise InadmissibleWordError("w is not admissible")
    l = len(w)
    base = sum(graph.weight(v) for v in w)
    stack = [(w, base, init)]
    while stack:
        word, weight, acc = stack.pop()
        for v in graph.successors(word[-1], length_bound - weight):
            wt = weight + graph.weight(v)
            if wt > length_bound:
                continue
            nxt = word + (v,)
            nacc = step(acc, v) if step is not None else None
            if nxt[-l:] == w:
                yield nxt, wt, nacc
            else:
                stack.append((nxt, wt, nacc))


def mb_alphabet(w: Sequence, length_bound: float, graph) -> list[Word]:
    """Return words ``w ... w`` with exactly two occurrences of ``w``, total
    weight at most ``length_bound``, sorted by weight then lexicographically."""
    found = sorted((wt, word) for word, wt, _ in iter_return_words(w, length_bound, graph))
    return [word for _, word in found]


@dataclass(frozen=True)
class MBFactorization:
    letters: tuple[Word, ...]
    tail: Word

    @property
    def truncated(self) -> bool:
        """True when symbols follow the last ``w``-occurrence without a close."""
        return len(self.tail) > 0


def mb_factorize(seq: Sequence, w: Sequence) -> MBFactorization:
    """Cut ``seq`` at consecutive occurrences of ``w``; neighbouring letters
    share the ``w`` between them. The unclosed remainder is ``tail``."""
    seq, w = tuple(seq), tuple(w)
    if not w or seq[: len(w)] != w:
        raise InvalidInputError("sequence must start with w")
    l = len(w)
    occ = occurrences(seq, w)
    letters = tuple(seq[i : j + l] for i, j in zip(occ, occ[1:]))
    return MBFactorization(letters, seq[occ[-1] + l :])


def mb_join(letters: Sequence[Sequence], w: Sequence, tail: Sequence = ()) -> Word:
    w = tuple(w)
    if not letters:
        return w + tuple(tail)
    out = tuple(letters[0])
    for a in letters[1:]:
        a = tuple(a)
        if a[: len(w)] != w or out[-len(w) :] != w:
            raise InvalidInputError("letters must start and end with w")
        out += a[len(w) :]
    return out + tuple(tail)


def shortest_path(graph, source, target, budget: float = math.inf, avoid=frozenset()) -> Word:
    """Lexicographically least shortest path ``source -> ... -> target``.

    Breadth-first search with successors visited in sorted order; interior
    vertices in ``avoid`` are skipped.
    """
    if source == target:
        return (source,)
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in sorted(graph.successors(u, budget)):
            if v in parent or (v in avoid and v != target):
                continue
            parent[v] = u
            if v == target:
                path = [v]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return tuple(reversed(path))
            queue.append(v)
    raise InvalidInputError(f"no path from {source!r} to {target!r}")


def long_simple_word(w: Sequence, n: int, graph) -> tuple[Word, Word]:
    """Word ``w u_1 w u_2 ... w u_n w`` whose prefix without the final ``w``
    is simple; returns ``(word, simple_prefix)``.

    Each connector ``u_k`` runs from the last letter of ``w`` through a fresh
    vertex ``v_k`` (absent from everything chosen so far) back to the first
    letter of ``w`` along shortest paths.
    """
    w = tuple(w)
    if n < 1:
        raise InvalidInputError("n must be positive")
    if not w or not is_admissible(w, graph):
        raise InadmissibleWordError("w must be a nonempty admissible word")
    slack = max(graph.weight(v) for v in w) + getattr(graph, "max_period", 1)
    first, last = w[0], w[-1]
    used = set(w)
    pieces = [w]
    fresh = graph.vertices()
    for _ in range(n):
        v = next(x for x in fresh if x not in used)
        budget = max(slack, graph.weight(v))
        to_v = shortest_path(graph, last, v, budget)
        back = shortest_path(graph, v, first, budget)
        connector = to_v[1:-1] + back[:-1]
        used.update(to_v)
        used.update(back)
        pieces.extend([connector, w])
    word = tuple(itertools.chain.from_iterable(pieces))
    if not is_admissible(word, graph):
        raise InadmissibleWordError("constructed word is not admissible")
    return word, word[: len(word) - len(w)]


@dataclass(frozen=True)
class SymbolicOrbit:
    """A finite stretch of a symbolic orbit with the roof value at each index."""

    letters: tuple
    roofs: tuple

    def __post_init__(self):
        if len(self.letters) != len(self.roofs):
            raise InvalidInputError("letters and roofs differ in length")


def first_hitting_time(orbit: SymbolicOrbit, cylinder: Sequence, start: int = 0) -> float:
    """``inf{t > 0 : S_t(x, 0) in C x {0}}`` for the base point at ``start``:
    the roof sum up to the next index whose future begins with ``cylinder``."""
    cyl = tuple(cylinder)
    letters = orbit.letters
    total = 0.0
    for k in range(start + 1, len(letters) - len(cyl) + 1):
        total += orbit.roofs[k - 1]
        if tuple(letters[k : k + len(cyl)]) == cyl:
            return total
    raise RecurrenceNotObservedError("cylinder not reached within the simulated horizon")


def abramov_entropy(h_base: float, mean_roof: float) -> float:
    if not mean_roof > 0:
        raise InvalidInputError("mean roof must be positive")
    if h_base < 0:
        raise InvalidInputError("base entropy must be nonnegative")
    return h_base / mean_roof


@dataclass(frozen=True)
class BernoulliSuspension:
    """Bernoulli base measure ``p`` with a letter-constant roof ``c``."""

    p: tuple
    c: tuple

    def __post_init__(self):
        if len(self.p) != len(self.c):
            raise InvalidInputError("p and c differ in length")
        if any(x < 0 for x in self.p) or abs(sum(self.p) - 1) > 1e-12:
            raise InvalidInputError("p must be a probability vector")
        if any(not x > 0 for x in self.c):
            raise InvalidInputError("roof values must be positive")

    @property
    def mean_roof(self) -> float:
        return math.fsum(x * y for x, y in zip(self.p, self.c))

    @property
    def base_entropy(self) -> float:
        return -math.fsum(x * math.log(x) for x in self.p if x > 0)

    @property
    def flow_entropy(self) -> float:
        return abramov_entropy(self.base_entropy, self.mean_roof)


_LETTER = re.compile(r"^\s*([ab])\s*:\s*(\d+)\s*(?::\s*\[?([\d,\s]+)\]?)?\s*$")


def parse_word(text: str, perm: Permutation | None = None) -> tuple[SymbolLetter, ...]:
    """Parse ``"a:1.b:1"`` (permutations follow the Rauzy path from ``perm``)
    or the explicit ``"a:1:[2,1].b:1:[2,1]"``."""
    text = text.strip()
    if not text:
        return ()
    letters = []
    pi = perm
    for chunk in re.split(r"\.(?![^\[]*\])", text):
        match = _LETTER.match(chunk)
        if not match:
            raise InvalidInputError(f"cannot parse letter {chunk!r}")
        c, n, images = match.group(1), int(match.group(2)), match.group(3)
        if images is not None:
            given = Permutation.parse(images)
            if pi is not None and letters and given != pi:
                raise InadmissibleWordError(f"letter {chunk!r} does not follow the path")
            pi = given
        if pi is None:
            raise InvalidInputError("a starting permutation is needed for 'c:n' letters")
        letter = SymbolLetter(c, n, pi)
        if letters and not compatible(letters[-1], letter):
            raise InadmissibleWordError(f"letters {letters[-1]} and {letter} are not compatible")
        letters.append(letter)
        pi = letter.end
    return tuple(letters)


def format_word(word: Sequence[SymbolLetter]) -> str:
    return ".".join(f"{u.c}:{u.n}:[{','.join(map(str, u.pi.images))}]" for u in word)
