"""Birkhoff-average estimators along Lebesgue-random Zorich orbits.

The invariant measure of the Zorich map is never represented in closed form;
cylinder measures are visit frequencies with binomial and batch-means
standard errors. Work is split into independently seeded chunks whose counts
add, so results depend only on ``(seed, chunks)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BoundaryError, InvalidInputError
from .induction import _zorich_raw, hilbert_diameter
from .rauzy import Permutation, RauzyClass, SymbolLetter, check_admissible, matrix_of_word, rauzy_class
from .symbolic import RauzyLetterGraph, is_simple_prefix, mb_alphabet, occurrences

__all__ = [
    "OrbitSample",
    "CylinderStats",
    "simulate_orbit",
    "simulate_chunks",
    "cylinder_frequencies",
    "stationarity_check",
    "digit_law_check",
    "MargulisReport",
    "margulis_check",
    "shortest_returns",
]

# exact float ties never occur for Dirichlet starts; the cap only guards pathology
ORBIT_CAP = 10**15


@dataclass
class OrbitSample:
    codes: np.ndarray
    roofs: np.ndarray
    alphabet: list
    restarts: int = 0

    def code_of(self, letter: SymbolLetter) -> int:
        try:
            return self.alphabet.index(letter)
        except ValueError:
            return -1

    def encode_word(self, word: Sequence[SymbolLetter]) -> np.ndarray:
        return np.array([self.code_of(u) for u in word], dtype=np.int64)


def _as_class(where) -> RauzyClass:
    if isinstance(where, RauzyClass):
        return where
    if isinstance(where, Permutation):
        return rauzy_class(where)
    raise InvalidInputError("expected a permutation or a Rauzy class")


def _start(rng: np.random.Generator, cls: RauzyClass):
    pi = cls.members[int(rng.integers(len(cls.members)))]
    lam = [float(v) for v in rng.dirichlet(np.ones(pi.m))]
    return lam, pi


def simulate_orbit(where, iterations: int, seed: int | np.random.SeedSequence) -> OrbitSample:
    """Float Zorich orbit of a Lebesgue-random start with per-step roofs
    ``log |A(w_k) lam_{k+1}|``; a boundary hit restarts from a fresh draw."""
    cls = _as_class(where)
    rng = np.random.default_rng(seed)
    lam, pi = _start(rng, cls)
    codes = np.empty(iterations, dtype=np.int32)
    roofs = np.empty(iterations, dtype=np.float64)
    index: dict = {}
    alphabet: list = []
    restarts = 0
    log = math.log
    k = 0
    while k < iterations:
        try:
            c, n, raw, nxt, _ = _zorich_raw(lam, pi, ORBIT_CAP)
        except BoundaryError:
            restarts += 1
            lam, pi = _start(rng, cls)
            continue
        key = (c, n, pi)
        code = index.get(key)
        if code is None:
            code = index[key] = len(alphabet)
            alphabet.append(SymbolLetter(c, n, pi))
        norm = sum(raw)
        codes[k] = code
        roofs[k] = -log(norm)
        lam = [v / norm for v in raw]
        pi = nxt
        k += 1
    return OrbitSample(codes, roofs, alphabet, restarts)


def _simulate_job(args):
    where, iterations, seed = args
    return simulate_orbit(where, iterations, seed)


def simulate_chunks(where, iterations: int, seed: int, chunks: int = 1, threads: int = 1) -> list[OrbitSample]:
    if iterations < 1 or chunks < 1:
        raise InvalidInputError("iterations and chunks must be positive")
    cls = _as_class(where)
    seeds = np.random.SeedSequence(seed).spawn(chunks)
    sizes = [iterations // chunks + (i < iterations % chunks) for i in range(chunks)]
    jobs = [(cls, size, s) for size, s in zip(sizes, seeds)]
    if threads > 1 and chunks > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_simulate_job, jobs))
    return [_simulate_job(job) for job in jobs]


def _word_mask(codes: np.ndarray, word_codes: np.ndarray) -> np.ndarray:
    l = len(word_codes)
    span = len(codes) - l + 1
    if span <= 0 or np.any(word_codes < 0):
        return np.zeros(max(span, 0), dtype=bool)
    mask = codes[:span] == word_codes[0]
    for j in range(1, l):
        mask &= codes[j : span + j] == word_codes[j]
    return mask


@dataclass(frozen=True)
class CylinderStats:
    word: tuple
    hits: int
    total: int
    frequency: float
    standard_error: float
    batch_standard_error: float

    @property
    def combined_error(self) -> float:
        """The larger of the binomial and batch-means errors."""
        return max(self.standard_error, self.batch_standard_error)

    def to_json(self) -> dict:
        from .symbolic import format_word

        return {
            "word": format_word(self.word),
            "hits": self.hits,
            "total": self.total,
            "frequency": self.frequency,
            "standard_error": self.standard_error,
            "batch_standard_error": self.batch_standard_error,
        }


def _batch_counts(mask: np.ndarray, batches: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0, len(mask), batches + 1).astype(int)
    hits = np.add.reduceat(mask.astype(np.int64), edges[:-1]) if len(mask) else np.zeros(batches)
    sizes = np.diff(edges)
    return hits, sizes


def _stats(word, hits_list, size_list) -> CylinderStats:
    hits_b = np.concatenate(hits_list).astype(float)
    sizes_b = np.concatenate(size_list).astype(float)
    hits, total = int(hits_b.sum()), int(sizes_b.sum())
    f = hits / total if total else 0.0
    se = math.sqrt(f * (1 - f) / total) if total else math.inf
    keep = sizes_b > 0
    fb = hits_b[keep] / sizes_b[keep]
    bse = float(np.std(fb, ddof=1) / math.sqrt(len(fb))) if len(fb) > 1 else math.inf
    return CylinderStats(tuple(word), hits, total, f, se, bse)


def cylinder_frequencies(words: Sequence[Sequence[SymbolLetter]], iterations: int, seed: int,
                         where=None, chunks: int = 1, threads: int = 1, batches: int = 20,
                         samples: list[OrbitSample] | None = None) -> list[CylinderStats]:
    """Visit frequencies of the cylinders ``Delta(w)`` along random orbits."""
    words = [tuple(w) for w in words]
    if not words or any(not w for w in words):
        raise InvalidInputError("words must be nonempty")
    for w in words:
        check_admissible(w)
    if samples is None:
        if iterations < 10**4:
            raise InvalidInputError("at least 10^4 iterations are required")
        samples = simulate_chunks(where or words[0][0].pi, iterations, seed, chunks, threads)
    out = []
    for w in words:
        hits_list, size_list = [], []
        for s in samples:
            h, z = _batch_counts(_word_mask(s.codes, s.encode_word(w)), batches)
            hits_list.append(h)
            size_list.append(z)
        out.append(_stats(w, hits_list, size_list))
    return out


def _depth_one(samples: list[OrbitSample], top: int) -> list[SymbolLetter]:
    counts: dict = {}
    for s in samples:
        values, cnt = np.unique(s.codes, return_counts=True)
        for v, c in zip(values, cnt):
            letter = s.alphabet[v]
            counts[letter] = counts.get(letter, 0) + int(c)
    ranked = sorted(counts, key=lambda u: (-counts[u], u))
    return ranked[:top]


def stationarity_check(where, iterations: int, seed: int, top: int = 8, batches: int = 20,
                       threshold: float = 3.0) -> dict:
    """Compare ``nu(Delta(w))`` with ``nu(G^-1 Delta(w))`` on a depth-one partition.

    The partition has one cell per frequent letter plus a cell for all other
    letters. Direct frequencies come from one orbit and pulled-back ones from
    an independently seeded orbit, where ``G^-1 Delta(w)`` is counted as the
    union of the two-letter cylinders ``Delta(u w)``, i.e. visits at times >= 1.
    """
    seed_a, seed_b = np.random.SeedSequence(seed).spawn(2)
    a = simulate_orbit(where, iterations, seed_a)
    b = simulate_orbit(where, iterations, seed_b)
    letters = _depth_one([a], top)

    def cell_mask(sample: OrbitSample, letter, codes: np.ndarray) -> np.ndarray:
        if letter is None:
            known = [sample.code_of(u) for u in letters]
            return ~np.isin(codes, [k for k in known if k >= 0])
        return codes == sample.code_of(letter)

    rows = []
    for w in letters + [None]:
        h, z = _batch_counts(cell_mask(a, w, a.codes), batches)
        direct = _stats((w,), [h], [z])
        h, z = _batch_counts(cell_mask(b, w, b.codes[1:]), batches)
        pulled = _stats((w,), [h], [z])
        diff = direct.frequency - pulled.frequency
        err = math.hypot(direct.combined_error, pulled.combined_error)
        rows.append({
            "letter": str(w) if w is not None else "rest",
            "frequency": direct.frequency,
            "pulled_back": pulled.frequency,
            "difference": diff,
            "combined_error": err,
            "z": diff / err if err > 0 else math.inf,
            "pass": abs(diff) <= threshold * err,
        })
    return {"rows": rows, "all_pass": all(r["pass"] for r in rows), "threshold": threshold,
            "partition_total": math.fsum(r["frequency"] for r in rows),
            "restarts": a.restarts + b.restarts}


def digit_law_check(iterations: int, seed: int, max_digit: int = 8) -> dict:
    """For ``m = 2`` the Zorich exponent ``n`` is a continued-fraction digit of
    ``lam_1 / lam_2``; compare with ``log2(1 + 1 / (k (k + 2)))``."""
    s = simulate_orbit(Permutation((2, 1)), iterations, seed)
    ns = np.array([s.alphabet[c].n for c in range(len(s.alphabet))])[s.codes]
    rows = []
    for k in range(1, max_digit + 1):
        f = float(np.mean(ns == k))
        expected = math.log2(1 + 1 / (k * (k + 2)))
        se = math.sqrt(f * (1 - f) / len(ns))
        rows.append({"digit": k, "frequency": f, "expected": expected, "standard_error": se})
    freqs = [r["frequency"] for r in rows]
    return {"rows": rows, "monotone": all(x > y for x, y in zip(freqs, freqs[1:]))}


def shortest_returns(p: Sequence[SymbolLetter], count: int, graph=None) -> list[tuple]:
    """The ``count`` lightest return words of ``p`` (ties broken lexicographically)."""
    p = tuple(p)
    graph = graph or RauzyLetterGraph(p[0].pi)
    bound = sum(u.n for u in p) + 1
    while True:
        found = mb_alphabet(p, bound, graph)
        if len(found) >= count:
            return found[:count]
        bound += 1


@dataclass
class MargulisReport:
    m: int
    p_prime: tuple
    p: tuple
    d_p_prime: float
    freq_p: float
    rows: list = field(default_factory=list)
    s: float = math.nan
    s_se: float = math.nan
    intercept: float = math.nan
    beta2: float = math.nan
    max_abs_r_minus_1: float = math.nan
    mean_abs_r_minus_1: float = math.nan
    max_excess: float = math.nan
    max_oscillation: float = math.nan
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        from .symbolic import format_word

        return {
            "m": self.m,
            "p_prime": format_word(self.p_prime),
            "p": format_word(self.p),
            "d_p_prime": self.d_p_prime,
            "freq_p": self.freq_p,
            "s": self.s,
            "s_se": self.s_se,
            "intercept": self.intercept,
            "beta2": self.beta2,
            "max_abs_R_minus_1": self.max_abs_r_minus_1,
            "mean_abs_R_minus_1": self.mean_abs_r_minus_1,
            "max_excess": self.max_excess,
            "max_oscillation": self.max_oscillation,
            "flags": list(self.flags),
            "rows": self.rows,
        }


def margulis_check(p_prime: Sequence[SymbolLetter], p: Sequence[SymbolLetter],
                   returns: Sequence[Sequence[SymbolLetter]], iterations: int, seed: int,
                   chunks: int = 1, threads: int = 1, batches: int = 20, min_hits: int = 200,
                   threshold: float = 3.0, samples: list[OrbitSample] | None = None) -> MargulisReport:
    """Uniform-expansion check ``nu(Delta(r)) ~ nu(Delta(p)) exp(-m tau_p(r))``.

    For each return word ``r`` the roof ``tau_p`` is the sum of per-step roofs
    from the start of ``r`` to the start of its closing ``p``, averaged over
    visits. ``R = nu(r) / nu(p) * exp(m * tau)`` is reported at the mean roof
    and at the extreme sampled roofs; ``excess`` is the part of ``|R - 1|``
    above ``threshold`` standard errors and ``oscillation`` is
    ``R_max / R_min - 1``, which carries no counting noise. The exponent ``s``
    is fitted (with intercept) by weighted least squares of
    ``log nu(r)/nu(p)`` against the mean roof.
    """
    p_prime, p = tuple(p_prime), tuple(p)
    returns = [tuple(r) for r in returns]
    if not p_prime or p[: len(p_prime)] != p_prime or not is_simple_prefix(p_prime, p):
        raise InvalidInputError("p must have p' as a simple prefix")
    a_pp = matrix_of_word(p_prime)
    if not a_pp.is_positive():
        raise InvalidInputError("p' must be positive")
    for r in returns:
        check_admissible(r)
        if occurrences(r, p) != [0, len(r) - len(p)] or len(r) <= len(p):
            raise InvalidInputError("each return word must start and end with p, with no other p inside")
    m = p[0].pi.m
    if samples is None:
        samples = simulate_chunks(p[0].pi, iterations, seed, chunks, threads)
    p_stats = cylinder_frequencies([p], iterations, seed, samples=samples, batches=batches)[0]
    report = MargulisReport(m, p_prime, p, hilbert_diameter(a_pp), p_stats.frequency)

    xs, ys, ws = [], [], []
    for r in returns:
        hits_list, size_list = [], []
        tau_sum = tau_sq = 0.0
        tau_min, tau_max = math.inf, -math.inf
        for s in samples:
            mask = _word_mask(s.codes, s.encode_word(r))
            h, z = _batch_counts(mask, batches)
            hits_list.append(h)
            size_list.append(z)
            starts = np.nonzero(mask)[0]
            if len(starts):
                csum = np.concatenate([[0.0], np.cumsum(s.roofs)])
                tau = csum[starts + len(r) - len(p)] - csum[starts]
                tau_sum += float(tau.sum())
                tau_sq += float((tau**2).sum())
                tau_min = min(tau_min, float(tau.min()))
                tau_max = max(tau_max, float(tau.max()))
        st = _stats(r, hits_list, size_list)
        row = {"word": [str(u) for u in r], "hits": st.hits, "frequency": st.frequency}
        if st.hits == 0:
            row.update(flag="no_hits")
            report.rows.append(row)
            report.flags.append("insufficient_hits")
            continue
        tau_mean = tau_sum / st.hits
        tau_sd = math.sqrt(max(tau_sq / st.hits - tau_mean**2, 0.0))
        tau_se = tau_sd / math.sqrt(st.hits)
        ratio = st.frequency / p_stats.frequency
        rel = math.hypot(st.combined_error / st.frequency, p_stats.combined_error / p_stats.frequency)
        R = ratio * math.exp(m * tau_mean)
        R_se = R * math.hypot(rel, m * tau_se)
        if st.hits < min_hits:
            # too few visits: inflate the error bar and keep the row out of the fit
            R_se *= math.sqrt(min_hits / st.hits)
            row.update(flag="insufficient_hits")
            report.flags.append("insufficient_hits")
        r_lo, r_hi = ratio * math.exp(m * tau_min), ratio * math.exp(m * tau_max)
        dev = max(abs(r_lo - 1), abs(r_hi - 1))
        row.update(tau=tau_mean, tau_sd=tau_sd, tau_min=tau_min, tau_max=tau_max, R=R, R_se=R_se,
                   R_min=r_lo, R_max=r_hi, abs_R_minus_1=dev, oscillation=r_hi / r_lo - 1,
                   excess=max(0.0, dev - threshold * R_se), log_ratio=math.log(ratio), log_ratio_se=rel)
        if st.hits >= min_hits:
            xs.append(tau_mean)
            ys.append(math.log(ratio))
            ws.append(1.0 / rel**2)
        report.rows.append(row)

    ok = [row for row in report.rows if "R" in row and row.get("flag") is None]
    if ok:
        dev = max(row["abs_R_minus_1"] for row in ok)
        report.max_abs_r_minus_1 = dev
        # precision-weighted, so rare noisy returns do not dominate
        wts = [1.0 / row["R_se"] ** 2 for row in ok]
        report.mean_abs_r_minus_1 = sum(w * abs(row["R"] - 1) for w, row in zip(wts, ok)) / sum(wts)
        report.max_excess = max(row["excess"] for row in ok)
        report.max_oscillation = max(row["oscillation"] for row in ok)
        report.beta2 = dev / report.d_p_prime if report.d_p_prime > 0 else math.inf
    if len(xs) >= 3:
        x, y, w = np.array(xs), np.array(ys), np.array(ws)
        design = np.vstack([np.ones_like(x), -x]).T
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
        resid = (y - design @ coef) * sw
        dof = len(x) - 2
        chi2 = float(resid @ resid) / dof if dof > 0 else 1.0
        cov = np.linalg.inv((design * w[:, None]).T @ design) * max(chi2, 1.0)
        report.intercept, report.s = float(coef[0]), float(coef[1])
        report.s_se = float(math.sqrt(cov[1, 1]))
    else:
        report.flags.append("too_few_returns_for_fit")
    report.flags = sorted(set(report.flags))
    return report
