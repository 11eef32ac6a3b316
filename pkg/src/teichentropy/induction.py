"""Interval exchange maps, Rauzy-Veech induction and its Zorich acceleration.

Points are ``(lam, pi)`` with ``lam`` on the open standard simplex. Two numeric
backends share the same code path: ``fractions.Fraction`` (exact, used for
verification) and ``float`` (renormalized every step, used for long orbits).

A run of consecutive induction steps of the same type is fast-forwarded: over
one full period of the Rauzy operation the renormalization matrix has the form
``I + e_w s^T``, so whole periods are removed by a single integer division of
the "winner" length by the sum of the "loser" lengths.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BoundaryError, CapExceededError, InvalidInputError, NumericalError, RecurrenceNotObservedError
from .rauzy import (
    Permutation,
    RauzyClass,
    RenormMatrix,
    SymbolLetter,
    check_admissible,
    is_irreducible,
    letter_matrix,
    matrix_of_word,
    rauzy_cycle_length,
    rauzy_op,
)

__all__ = [
    "DEFAULT_CAP",
    "IETPoint",
    "InductionType",
    "induction_type",
    "eval_iet",
    "step_T",
    "zorich_n",
    "step_G",
    "encode",
    "decode",
    "DecodedPoint",
    "roof_tau0",
    "roof_tau1",
    "roof_tauq1",
    "hilbert_distance",
    "hilbert_diameter",
    "projective_apply",
    "keane_check",
    "random_point",
    "golden_point",
]

DEFAULT_CAP = 10**6

PHI = (1 + math.sqrt(5)) / 2


def _log(x) -> float:
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


def _is_exact(values) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


@dataclass(frozen=True)
class IETPoint:
    lam: tuple
    pi: Permutation

    def __post_init__(self):
        lam = tuple(Fraction(v) if isinstance(v, int) else v for v in self.lam)
        object.__setattr__(self, "lam", lam)
        if len(lam) != self.pi.m:
            raise InvalidInputError("length vector and permutation sizes differ")
        if not is_irreducible(self.pi):
            raise InvalidInputError(f"{self.pi} is reducible")
        if any(not v > 0 for v in lam):
            raise InvalidInputError("all lengths must be positive")
        total = sum(lam)
        if self.exact:
            if total != 1:
                raise InvalidInputError("exact lengths must sum to 1")
        elif abs(total - 1) > 1e-9:
            raise InvalidInputError(f"lengths sum to {total}, expected 1")

    @classmethod
    def normalized(cls, lam: Sequence, pi: Permutation) -> "IETPoint":
        lam = tuple(Fraction(v) if isinstance(v, int) else v for v in lam)
        total = sum(lam)
        return cls(tuple(v / total for v in lam), pi)

    @property
    def exact(self) -> bool:
        return _is_exact(self.lam)

    @property
    def m(self) -> int:
        return self.pi.m

    def as_float(self) -> "IETPoint":
        return IETPoint.normalized(tuple(float(v) for v in self.lam), self.pi)

    def to_json(self) -> dict:
        return {"lambda": [str(v) for v in self.lam], "pi": self.pi.to_json()}


def golden_point() -> IETPoint:
    """Rotation point with ``lam_1 / lam_2`` equal to the golden mean."""
    return IETPoint((1 / PHI, 1 / PHI**2), Permutation((2, 1)))


class InductionType(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    BOUNDARY = "boundary"

    @property
    def letter(self) -> str:
        if self is InductionType.BOUNDARY:
            raise BoundaryError("induction undefined on the boundary")
        return "a" if self is InductionType.PLUS else "b"


def _type_of(lam, pi: Permutation) -> str:
    m = pi.m
    win, last = lam[pi.inv(m) - 1], lam[m - 1]
    if win > last:
        return "a"
    if last > win:
        return "b"
    raise BoundaryError(f"boundary point: lam_m == lam_(pi^-1 m) for pi={pi}")


def induction_type(p: IETPoint) -> InductionType:
    try:
        return InductionType.PLUS if _type_of(p.lam, p.pi) == "a" else InductionType.MINUS
    except BoundaryError:
        return InductionType.BOUNDARY


def eval_iet(p: IETPoint, x):
    if not 0 <= x < 1:
        raise InvalidInputError("x must lie in [0, 1)")
    lam, pi = p.lam, p.pi
    left, k = 0, p.m
    for j in range(1, p.m + 1):
        if x < left + lam[j - 1]:
            k = j
            break
        left += lam[j - 1]
    else:
        # float rounding can leave x just past the last endpoint
        left -= lam[-1]
    start = sum(lam[j - 1] for j in range(1, p.m + 1) if pi(j) < pi(k))
    return x - left + start


def _inverse_step(c: str, pi: Permutation, lam: list) -> list:
    """``A(c, pi)^{-1} lam`` without normalization."""
    m = pi.m
    k = pi.inv(m)
    if c == "a":
        return lam[: k - 1] + [lam[k - 1] - lam[m - 1], lam[m - 1]] + lam[k : m - 1]
    out = list(lam)
    out[m - 1] = lam[m - 1] - lam[k - 1]
    return out


def step_T(p: IETPoint) -> tuple[IETPoint, str]:
    """One Rauzy-Veech step: ``(A(c,pi)^{-1} lam / |.|, c pi)`` and the type ``c``."""
    c = _type_of(p.lam, p.pi)
    return IETPoint.normalized(_inverse_step(c, p.pi, list(p.lam)), rauzy_op(c, p.pi)), c


@lru_cache(maxsize=None)
def _run_shape(c: str, pi: Permutation):
    """Period ``L`` of ``c`` at ``pi`` with winner index and loser indices of
    the period's inverse matrix ``I - e_w s^T``; ``None`` if not of that form."""
    m = pi.m
    cols = []
    for j in range(m):
        v = [int(i == j) for i in range(m)]
        q = pi
        for _ in range(rauzy_cycle_length(c, pi)):
            v = _inverse_step(c, q, v)
            q = rauzy_op(c, q)
        cols.append(v)
    diff = [[cols[j][i] - int(i == j) for j in range(m)] for i in range(m)]
    rows = [i for i in range(m) if any(diff[i])]
    if len(rows) != 1:
        return None
    w = rows[0]
    if diff[w][w] != 0 or any(x not in (0, -1) for x in diff[w]):
        return None
    losers = tuple(j for j in range(m) if diff[w][j] == -1)
    return rauzy_cycle_length(c, pi), w, losers


def _zorich_raw(lam: list, pi: Permutation, cap: int | float, carry: list | None = None):
    """Advance an unnormalized vector through one Zorich step.

    Returns ``(c, n, lam_after, pi_after, carry_after)`` where ``lam_after``
    is ``A(w)^{-1} lam`` for the letter ``w = (c, n, pi)``; ``carry`` (if
    given) is transformed by the same inverse matrices.
    """
    c = _type_of(lam, pi)
    n = 0
    while True:
        shape = _run_shape(c, pi)
        if shape is not None:
            period, w, losers = shape
            total = sum(lam[j] for j in losers)
            if total > 0:
                cycles = math.floor(lam[w] / total) - 1
                if cycles > 0:
                    if n + cycles * period > cap:
                        raise CapExceededError(f"Zorich step exceeds cap={cap} induction steps")
                    lam = list(lam)
                    lam[w] = lam[w] - cycles * total
                    if carry is not None:
                        carry = list(carry)
                        carry[w] = carry[w] - cycles * sum(carry[j] for j in losers)
                    n += cycles * period
                    # the skip may land exactly on the boundary
                    if _type_of(lam, pi) != c:
                        raise NumericalError("cycle skip overshot the Zorich step")
        lam = _inverse_step(c, pi, lam)
        if carry is not None:
            carry = _inverse_step(c, pi, carry)
        pi = rauzy_op(c, pi)
        n += 1
        if n > cap:
            raise CapExceededError(f"Zorich step exceeds cap={cap} induction steps")
        if _type_of(lam, pi) != c:
            return c, n, lam, pi, carry


def zorich_n(p: IETPoint, cap: int = DEFAULT_CAP) -> int:
    return _zorich_raw(list(p.lam), p.pi, cap)[1]


def step_G(p: IETPoint, cap: int = DEFAULT_CAP) -> tuple[IETPoint, SymbolLetter]:
    """Zorich map ``G = T^n`` with the coding letter ``(c, n, pi)``."""
    c, n, lam, pi, _ = _zorich_raw(list(p.lam), p.pi, cap)
    return IETPoint.normalized(lam, pi), SymbolLetter(c, n, p.pi)


def encode(p: IETPoint, depth: int, cap: int = DEFAULT_CAP) -> tuple[SymbolLetter, ...]:
    word = []
    for _ in range(depth):
        p, letter = step_G(p, cap)
        word.append(letter)
    return tuple(word)


def roof_tau0(p: IETPoint):
    lam = p.lam
    return -_log(sum(lam) - min(lam[p.m - 1], lam[p.pi.inv(p.m) - 1]))


def roof_tau1(p: IETPoint, cap: int = DEFAULT_CAP) -> float:
    """``log |A(w_0) lam'|`` with ``(lam', pi') = G(lam, pi)``."""
    nxt, letter = step_G(p, cap)
    return _log(sum(letter_matrix(letter) @ nxt.lam))


def roof_tauq1(p: IETPoint, q: Sequence[SymbolLetter], cap: int = DEFAULT_CAP,
               max_letters: int = 10_000) -> float:
    """Roof up to the second occurrence of ``q`` in the coding of ``p``."""
    q = tuple(q)
    if not q:
        raise InvalidInputError("q must be nonempty")
    l = len(q)
    points, word = [p], []
    cur = p
    while len(word) < l:
        cur, letter = step_G(cur, cap)
        points.append(cur)
        word.append(letter)
    if tuple(word) != q:
        raise InvalidInputError("the coding of the point does not start with q")
    s = 1
    while True:
        while len(word) < s + l:
            if len(word) >= max_letters:
                raise RecurrenceNotObservedError(f"q did not recur within {max_letters} letters")
            cur, letter = step_G(cur, cap)
            points.append(cur)
            word.append(letter)
        if tuple(word[s : s + l]) == q:
            break
        s += 1
    mat = matrix_of_word(word[:s])
    return _log(sum(mat @ points[s].lam))


def projective_apply(a, x) -> tuple:
    """``T_A x = A x / |A x|``."""
    if isinstance(a, RenormMatrix):
        y = a @ x
    else:
        y = tuple(np.asarray(a, dtype=float) @ np.asarray(x, dtype=float))
    total = sum(y)
    return tuple(v / total for v in y)


def hilbert_distance(x: Sequence, y: Sequence) -> float:
    if len(x) != len(y):
        raise InvalidInputError("vectors differ in length")
    if any(not v > 0 for v in x) or any(not v > 0 for v in y):
        raise InvalidInputError("Hilbert distance needs strictly positive coordinates")
    if _is_exact(x) and _is_exact(y):
        ratios = [Fraction(a) / Fraction(b) for a, b in zip(x, y)]
        return math.log1p(float(max(ratios) / min(ratios) - 1))
    ratios = [a / b for a, b in zip(x, y)]
    return math.log1p(max(ratios) / min(ratios) - 1)


def hilbert_diameter(mat: RenormMatrix) -> float:
    """Hilbert diameter of ``T_A`` applied to the simplex (max over column pairs)."""
    cols = list(zip(*mat.rows))
    if any(v == 0 for col in cols for v in col):
        return math.inf
    best = 0.0
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            best = max(best, hilbert_distance(cols[i], cols[j]))
    return best


@dataclass(frozen=True)
class DecodedPoint:
    point: IETPoint
    error_bound: float


def decode(word: Sequence[SymbolLetter], tail_prefix: Sequence[SymbolLetter],
           iterations: int = 1) -> DecodedPoint:
    """Approximate the point coded by ``word tail tail ...``.

    The returned point is ``T_{A(word)}`` applied to the Perron direction of
    ``A(tail)``; ``error_bound`` is the Hilbert diameter of the cylinder
    image ``T_{A(word tail^iterations)}`` of the simplex, which contains both
    the returned point and the exact one.
    """
    word, tail = tuple(word), tuple(tail_prefix)
    if not tail:
        raise InvalidInputError("tail_prefix must be nonempty")
    check_admissible(word + tail + tail)
    a_tail = matrix_of_word(tail)
    if not a_tail.is_positive():
        raise InvalidInputError("tail_prefix must be a positive word")
    m = a_tail.m
    evals, evecs = np.linalg.eig(np.array(a_tail.rows, dtype=float))
    v = np.abs(np.real(evecs[:, int(np.argmax(np.real(evals)))]))
    v = tuple(float(x) for x in v / v.sum())
    a_word = matrix_of_word(word, m)
    lam = projective_apply(a_word, v) if word else v
    pi = word[0].pi if word else tail[0].pi
    cyl = a_word @ (a_tail ** max(iterations, 1))
    return DecodedPoint(IETPoint.normalized(lam, pi), hilbert_diameter(cyl))


def keane_check(p: IETPoint, depth: int) -> bool:
    """Finite-depth certificate of Keane's condition: no forward iterate (up to
    ``depth``) of a discontinuity hits a discontinuity."""
    if depth <= 0:
        return True
    cuts = []
    acc = 0
    for v in p.lam[:-1]:
        acc += v
        cuts.append(acc)
    targets = set(cuts)
    for start in cuts:
        x = start
        for _ in range(depth):
            x = eval_iet(p, x)
            if x in targets:
                return False
    return True


def random_point(rng: np.random.Generator, where: Permutation | RauzyClass,
                 exact: bool = False, denominator: int = 10**6) -> IETPoint:
    """Lebesgue-uniform length vector (Dirichlet(1,...,1)) and, for a class,
    a uniformly chosen member."""
    if isinstance(where, RauzyClass):
        pi = where.members[int(rng.integers(len(where.members)))]
    else:
        pi = where
    lam = rng.dirichlet(np.ones(pi.m))
    if exact:
        ints = [max(1, int(round(v * denominator))) for v in lam]
        return IETPoint.normalized([Fraction(i) for i in ints], pi)
    return IETPoint.normalized(tuple(float(v) for v in lam), pi)
