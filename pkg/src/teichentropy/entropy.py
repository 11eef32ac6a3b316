"""Entropy functionals and pressure-equation solvers.

All flow entropies are roots of ``F(beta) = sum_a exp(-beta * c_a) = 1`` for
some roof table ``c``; ``F`` is strictly decreasing, so every solver brackets
by bisection and polishes with Newton steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError, NumericalError
from .induction import hilbert_diameter
from .rauzy import RenormMatrix, SymbolLetter, letter_matrix, matrix_of_word
from .symbolic import RauzyLetterGraph, is_simple_prefix, iter_return_words

__all__ = [
    "EntropyEstimate",
    "RoofEntry",
    "entropy_functional",
    "solve_pressure",
    "maximize_entropy_finite",
    "bernoulli_flow_entropy",
    "roof_table",
    "estimate_htop_flow",
]

FINITE_TOL = 1e-10
FLOW_TOL = 1e-6


@dataclass(frozen=True)
class EntropyEstimate:
    beta: float
    bracket: tuple[float, float]
    truncation_depth: float | None
    residual: float
    kind: str
    flags: tuple[str, ...] = ()
    details: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {
            "beta": _jsonable(self.beta),
            "bracket": [_jsonable(self.bracket[0]), _jsonable(self.bracket[1])],
            "truncation_depth": self.truncation_depth,
            "residual": _jsonable(self.residual),
            "kind": self.kind,
            "flags": list(self.flags),
            "details": {k: _jsonable(v) for k, v in sorted(self.details.items())},
        }


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, np.integer):
        return int(v)
    return v


def entropy_functional(p: Sequence[float], c: Sequence[float]) -> float:
    """``-sum p log p / sum p c`` with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    c = np.asarray(c, dtype=float)
    if p.shape != c.shape:
        raise InvalidInputError("p and c differ in length")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise InvalidInputError("p must be a probability vector")
    support = p > 0
    mean_roof = math.fsum(p[support] * c[support])
    if not math.isfinite(mean_roof):
        raise InvalidInputError("sum p*c diverges")
    if mean_roof <= 0:
        raise InvalidInputError("sum p*c must be positive")
    h = -math.fsum(p[support] * np.log(p[support]))
    return h / mean_roof


def solve_pressure(F: Callable[[float], float], lo: float, hi: float, tol: float = FINITE_TOL,
                   dF: Callable[[float], float] | None = None, max_iter: int = 500):
    """Root of a decreasing ``F(beta) = 1`` on ``[lo, hi]``.

    Requires ``F(lo) >= 1 >= F(hi)``; returns ``(beta, lo, hi)`` with the
    final bracket. ``F`` may return ``inf`` below an abscissa of divergence.
    """
    flo, fhi = F(lo), F(hi)
    if not (flo >= 1 >= fhi):
        raise NumericalError(f"no sign change on [{lo}, {hi}]: F = {flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = F(mid)
        if fm >= 1:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(hi)) or (math.isfinite(fm) and abs(fm - 1) < tol * 1e-2):
            break
    beta = 0.5 * (lo + hi)
    if dF is not None:
        for _ in range(3):
            f = F(beta)
            d = dF(beta)
            if not (math.isfinite(f) and d < 0):
                break
            nxt = beta - (f - 1) / d
            if not lo <= nxt <= hi:
                break
            beta = nxt
    return beta, lo, hi


def _expand_hi(F, start: float = 1.0, limit: float = 1e6) -> float:
    hi = start
    while F(hi) > 1:
        hi *= 2
        if hi > limit:
            raise NumericalError("pressure function stays above 1")
    return hi


def maximize_entropy_finite(c: Sequence[float], tol: float = FINITE_TOL):
    """Maximizer of the entropy functional for finitely many roofs.

    Returns ``(beta, p)`` with ``sum exp(-beta c_i) = 1`` and
    ``p_i = exp(-beta c_i)``.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or len(c) < 2:
        raise InvalidInputError("at least two roof values are required")
    if np.any(~(c > 0)) or not np.all(np.isfinite(c)):
        raise InvalidInputError("roof values must be positive and finite")
    F = lambda b: math.fsum(np.exp(-b * c))  # noqa: E731
    dF = lambda b: -math.fsum(c * np.exp(-b * c))  # noqa: E731
    beta, _, _ = solve_pressure(F, 0.0, _expand_hi(F), tol, dF)
    p = np.exp(-beta * c)
    return beta, p


def _finite_estimate(c: np.ndarray, tol: float) -> EntropyEstimate:
    beta, lo, hi = solve_pressure(
        lambda b: math.fsum(np.exp(-b * c)), 0.0,
        _expand_hi(lambda b: math.fsum(np.exp(-b * c))), tol,
        lambda b: -math.fsum(c * np.exp(-b * c)),
    )
    residual = abs(math.fsum(np.exp(-beta * c)) - 1)
    return EntropyEstimate(beta, (lo, hi), len(c), residual, "root")


def _block_ratio(c_sorted: np.ndarray, beta: float) -> float:
    """Ratio of the last two dyadic block sums of ``exp(-beta c)``; a value
    >= 1 means the partial sums are not settling (divergence witness)."""
    n = len(c_sorted)
    k = int(math.log2(n))
    last = np.exp(-beta * c_sorted[2 ** (k - 1) : 2**k]).sum()
    prev = np.exp(-beta * c_sorted[2 ** (k - 2) : 2 ** (k - 1)]).sum()
    return float(last / prev)


def bernoulli_flow_entropy(roofs: Sequence[float] | Callable[[np.ndarray], np.ndarray],
                           tolerance: float = FLOW_TOL, terms: int = 2**20) -> EntropyEstimate:
    """Topological entropy of a Bernoulli flow with letter-constant roofs.

    ``roofs`` is a finite sequence or a vectorized map ``i -> c_i`` on
    ``i = 1, 2, ...``. Returns the root of ``F(beta) = 1`` when it exists and
    otherwise the abscissa ``sup{beta : F(beta) = inf}``.

    The infinite case uses ``terms`` values, estimates the abscissa from the
    growth of the counting function ``N(T) ~ A exp(beta_c T)`` and closes the
    partial sums with the matching tail integral.
    """
    if not callable(roofs):
        c = np.asarray(roofs, dtype=float)
        if np.any(~(c > 0)):
            raise InvalidInputError("roof values must be positive")
        if len(c) == 1:
            return EntropyEstimate(0.0, (0.0, 0.0), 1, 0.0, "root", ("truncation_dominated",))
        return _finite_estimate(c, min(tolerance, FINITE_TOL))

    idx = np.arange(1, terms + 1, dtype=float)
    c = np.sort(np.asarray(roofs(idx), dtype=float))
    if np.any(c < 0) or not np.all(np.isfinite(c)):
        raise InvalidInputError("roof values must be finite and nonnegative")
    ranks = np.arange(1, terms + 1, dtype=float)
    sample = np.unique(np.geomspace(terms // 64, terms, 200).astype(int)) - 1
    x, y = c[sample], np.log(ranks[sample])
    if np.ptp(x) == 0:
        raise NumericalError("roof sequence does not grow")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    se = float(np.sqrt(resid.var() / max(np.sum((x - x.mean()) ** 2), 1e-300)))
    beta_c = max(float(slope), 0.0)
    amp = math.exp(intercept)
    c_last = float(c[-1])

    def F(beta: float) -> float:
        if beta <= beta_c:
            return math.inf
        head = float(np.exp(-beta * c).sum())
        tail = amp * beta_c * math.exp((beta_c - beta) * c_last) / (beta - beta_c)
        return head + tail

    zeros = int(np.sum(c == 0))
    width = max(3 * se, tolerance)
    details = {"abscissa": beta_c, "abscissa_se": se, "terms": terms}
    if beta_c > 0:
        below = _block_ratio(c, max(beta_c - width, 0.0))
        above = _block_ratio(c, beta_c + width)
        details.update(block_ratio_below=below, block_ratio_above=above,
                       divergence_witnessed=bool(below > 1 > above))
    if zeros >= 1 and len(c) > zeros:
        # F > zeros >= 1 for every finite beta: the equation has no root
        return EntropyEstimate(
            beta_c, (beta_c - width, beta_c + width), terms, math.inf, "abscissa",
            ("no_root",), details,
        )
    lo = beta_c + 1e-12
    hi = _expand_hi(F, max(2 * beta_c, 1.0))
    beta, blo, bhi = solve_pressure(F, lo, hi, tolerance)
    return EntropyEstimate(beta, (blo, bhi), terms, abs(F(beta) - 1), "root", (), details)


@dataclass(frozen=True)
class RoofEntry:
    """Roof of one return letter ``a = u q``.

    ``value`` is ``log rho(A(u))`` (the roof at the periodic point ``u^inf``);
    ``lower``/``upper`` bound the roof over every point coded by ``a``;
    ``cylinder_diameter`` is the Hilbert diameter of the cylinder of ``a``.
    """

    word: tuple
    weight: int
    value: float
    lower: float
    upper: float
    cylinder_diameter: float

    @property
    def error_radius(self) -> float:
        return max(self.value - self.lower, self.upper - self.value)


def _integer_inverse(a: RenormMatrix) -> RenormMatrix:
    m = a.m
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)]
           for i, row in enumerate(a.rows)]
    for col in range(m):
        piv = next(r for r in range(col, m) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    rows = [row[m:] for row in aug]
    if any(x.denominator != 1 for row in rows for x in row):
        raise NumericalError("matrix is not unimodular")
    return RenormMatrix(tuple(tuple(int(x) for x in row) for row in rows))


def _log_perron(a: RenormMatrix) -> float:
    big = max(max(r) for r in a.rows)
    scale = math.log(big)
    mat = np.array([[x / big for x in r] for r in a.rows], dtype=float)
    return scale + math.log(max(abs(np.linalg.eigvals(mat))))


def _log_big(x: int) -> float:
    return math.log(x)


def roof_table(q: Sequence[SymbolLetter], length_bound: int, graph=None) -> list[RoofEntry]:
    """Roofs of all return letters of ``q`` with total weight ``<= length_bound``."""
    q = tuple(q)
    if not q:
        raise InvalidInputError("q must be nonempty")
    aq = matrix_of_word(q)
    if not aq.is_positive():
        raise InvalidInputError("q must be a positive word")
    if not any(is_simple_prefix(q[:k], q) and matrix_of_word(q[:k]).is_positive()
               for k in range(1, len(q) + 1)):
        raise InvalidInputError("q must have a simple positive prefix")
    graph = graph or RauzyLetterGraph(q[0].pi)
    aq_inv = _integer_inverse(aq)
    col_q = aq.col_sums()
    out = []
    step = lambda acc, v: acc @ letter_matrix(v)  # noqa: E731
    for word, weight, a_full in iter_return_words(q, length_bound, graph, aq, step):
        a_u = a_full @ aq_inv
        cols = a_full.col_sums()
        ratios = [_log_big(cols[j]) - _log_big(col_q[j]) for j in range(aq.m)]
        out.append(RoofEntry(
            word=word,
            weight=weight,
            value=_log_perron(a_u),
            lower=min(ratios),
            upper=max(ratios),
            cylinder_diameter=hilbert_diameter(a_full),
        ))
    out.sort(key=lambda e: (e.weight, e.word))
    return out


def _truncated_root(values: np.ndarray) -> float:
    """Root of ``sum exp(-beta v) = 1``; zero when the sum is at most one at 0."""
    if len(values) <= 1:
        return 0.0
    F = lambda b: math.fsum(np.exp(-b * values))  # noqa: E731
    dF = lambda b: -math.fsum(values * np.exp(-b * values))  # noqa: E731
    return solve_pressure(F, 0.0, _expand_hi(F), FINITE_TOL, dF)[0]


def _power_fit(ns: np.ndarray, betas: np.ndarray):
    """Least squares ``beta_N = beta_inf - C N^-gamma``; returns
    ``(beta_inf, C, gamma, rss)``."""

    def fit(gamma):
        x = ns ** (-gamma)
        design = np.vstack([np.ones_like(x), -x]).T
        coef, *_ = np.linalg.lstsq(design, betas, rcond=None)
        rss = float(np.sum((design @ coef - betas) ** 2))
        return coef, rss

    grid = np.linspace(0.1, 4.0, 79)
    rss = [fit(g)[1] for g in grid]
    k = int(np.argmin(rss))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    phi = (math.sqrt(5) - 1) / 2
    for _ in range(60):
        c1, c2 = b - phi * (b - a), a + phi * (b - a)
        if fit(c1)[1] < fit(c2)[1]:
            b = c2
        else:
            a = c1
    gamma = 0.5 * (a + b)
    (beta_inf, C), r = fit(gamma)
    return float(beta_inf), float(C), float(gamma), r


def _shell_tail(weights: np.ndarray, values: np.ndarray, bound: int, beta: float, shells: int = 6) -> float:
    """Power-law extrapolation of the weight shells beyond ``bound``."""
    ks = np.unique(weights)
    sums = np.array([np.exp(-beta * values[weights == k]).sum() for k in ks])
    keep = sums > 0
    ks, sums = ks[keep], sums[keep]
    if len(ks) < shells:
        return math.inf
    x, y = np.log(ks[-shells:].astype(float)), np.log(sums[-shells:])
    slope, intercept = np.polyfit(x, y, 1)
    alpha = -slope
    if alpha <= 1:
        return math.inf
    return math.exp(intercept) * (bound + 0.5) ** (1 - alpha) / (alpha - 1)


def estimate_htop_flow(q: Sequence[SymbolLetter], length_bound: int, tolerance: float = FLOW_TOL,
                       table: list[RoofEntry] | None = None) -> EntropyEstimate:
    """Entropy of the return-time suspension over the return letters of ``q``.

    ``details["truncated_betas"]`` holds the roots of the truncated equation
    for every weight bound up to ``length_bound`` (nondecreasing). The point
    estimate extrapolates that sequence with ``beta_inf - C N^-gamma``. The
    bracket runs from the truncated root with upper roofs (fewer and cheaper
    terms only lower the root) to the root with lower roofs plus a power-law
    extrapolation of the truncated weight shells.
    """
    table = table if table is not None else roof_table(q, length_bound)
    weights = np.array([e.weight for e in table], dtype=int)
    values = np.array([e.value for e in table], dtype=float)
    lowers = np.array([e.lower for e in table], dtype=float)
    uppers = np.array([e.upper for e in table], dtype=float)
    flags = []
    if len(table) == 0:
        return EntropyEstimate(0.0, (0.0, math.inf), length_bound, math.inf, "truncated",
                               ("empty_truncation", "lower_bound_only"),
                               {"letters": 0, "truncated_betas": []})
    bounds = list(range(int(weights.min()), length_bound + 1))
    betas = [_truncated_root(values[weights <= n]) for n in bounds]
    truncated = betas[-1]
    residual = abs(math.fsum(np.exp(-truncated * values)) - 1) if len(values) > 1 else 0.0
    if len(values) == 1:
        flags.append("truncation_dominated")
    lo = _truncated_root(uppers)

    def F_hi(beta: float) -> float:
        head = math.fsum(np.exp(-beta * lowers))
        return head + _shell_tail(weights, lowers, length_bound, beta)

    try:
        hi = solve_pressure(F_hi, max(truncated, lo), _expand_hi(F_hi, max(truncated, 1.0), 1e3),
                            tolerance)[0]
    except NumericalError:
        hi = math.inf
        flags.append("upper_envelope_unbounded")

    ns = np.array(bounds, dtype=float)
    bs = np.array(betas)
    usable = (bs > 0) & (ns >= length_bound / 2)
    details = {
        "letters": len(table),
        "truncated_beta": truncated,
        "truncated_betas": [[int(n), float(b)] for n, b in zip(bounds, betas)],
        "max_error_radius": float(max(e.error_radius for e in table)),
    }
    if usable.sum() >= 5:
        beta_inf, C, gamma, rss = _power_fit(ns[usable], bs[usable])
        wide = (bs > 0) & (ns >= length_bound / 3)
        alt = _power_fit(ns[wide], bs[wide])[0] if wide.sum() > usable.sum() else beta_inf
        details.update(extrapolation_C=C, extrapolation_gamma=gamma, extrapolation_rss=rss,
                       extrapolation_spread=abs(alt - beta_inf))
        beta, kind = beta_inf, "extrapolated"
        if not lo <= beta <= hi:
            flags.append("extrapolation_outside_envelope")
    else:
        beta, kind = truncated, "truncated"
        flags.append("lower_bound_only")
    return EntropyEstimate(beta, (lo, hi), length_bound, residual, kind, tuple(flags), details)
