import math

import numpy as np
import pytest

from teichentropy.errors import InvalidInputError
from teichentropy.montecarlo import (
    cylinder_frequencies, digit_law_check, margulis_check, shortest_returns, simulate_chunks,
    simulate_orbit, stationarity_check,
)
from teichentropy.rauzy import Permutation
from teichentropy.symbolic import parse_word

P2 = Permutation((2, 1))
P3 = Permutation((3, 2, 1))
Q2 = parse_word("a:1.b:1", P2)


@pytest.fixture(scope="module")
def samples2():
    return simulate_chunks(P2, 200_000, 11, chunks=2)


def test_orbit_is_deterministic():
    a = simulate_orbit(P3, 2000, 5)
    b = simulate_orbit(P3, 2000, 5)
    assert np.array_equal(a.codes, b.codes) and np.array_equal(a.roofs, b.roofs)
    assert np.all(a.roofs > 0)


def test_depth_one_partition_sums_to_one(samples2):
    letters = sorted({s.alphabet[c] for s in samples2 for c in np.unique(s.codes)})
    stats = cylinder_frequencies([(u,) for u in letters], 0, 0, samples=samples2)
    assert math.fsum(s.frequency for s in stats) == pytest.approx(1.0, abs=1e-12)


def test_chunk_counts_add(samples2):
    words = [Q2, Q2[:1]]
    both = cylinder_frequencies(words, 0, 0, samples=samples2)
    parts = [cylinder_frequencies(words, 0, 0, samples=[s]) for s in samples2]
    for k in range(len(words)):
        assert both[k].hits == sum(p[k].hits for p in parts)
        assert both[k].total == sum(p[k].total for p in parts)


def test_symmetric_letters_agree(samples2):
    a1, b1 = cylinder_frequencies([parse_word("a:1", P2), parse_word("b:1", P2)], 0, 0, samples=samples2)
    assert abs(a1.frequency - b1.frequency) <= 3 * math.hypot(a1.combined_error, b1.combined_error)


def test_minimum_iterations_enforced():
    with pytest.raises(InvalidInputError):
        cylinder_frequencies([Q2], 100, 1)


def test_digit_law():
    report = digit_law_check(200_000, 3)
    assert report["monotone"]
    for row in report["rows"][:4]:
        assert abs(row["frequency"] - row["expected"]) <= 3 * row["standard_error"] + 1e-3


def test_stationarity_small():
    report = stationarity_check(P3, 200_000, 9, top=6)
    assert report["all_pass"], report["rows"]


def test_shortest_returns_are_returns():
    rets = shortest_returns(Q2, 5)
    assert rets[0] == Q2 + Q2
    for r in rets:
        assert r[:2] == Q2 and r[-2:] == Q2


def test_margulis_small_run(samples2):
    rets = shortest_returns(Q2, 10)
    rep = margulis_check(Q2, Q2, rets, 0, 0, samples=samples2, min_hits=30)
    assert abs(rep.s - 2) <= 3 * rep.s_se + 0.05
    assert rep.d_p_prime == pytest.approx(math.log(2))
    assert rep.beta2 == pytest.approx(rep.max_abs_r_minus_1 / math.log(2))
    first = rep.rows[0]
    assert first["R_min"] <= first["R"] <= first["R_max"]


def test_rare_returns_are_flagged_and_widened(samples2):
    rets = shortest_returns(Q2, 10)
    strict = margulis_check(Q2, Q2, rets, 0, 0, samples=samples2, min_hits=200)
    loose = margulis_check(Q2, Q2, rets, 0, 0, samples=samples2, min_hits=1)
    assert "insufficient_hits" in strict.flags and not loose.flags
    for a, b in zip(strict.rows, loose.rows):
        if a.get("flag") == "insufficient_hits":
            assert a["R_se"] > b["R_se"]


def test_margulis_rejects_bad_returns():
    with pytest.raises(InvalidInputError):
        margulis_check(Q2, Q2, [Q2 + Q2 + Q2], 0, 0, samples=[])
    with pytest.raises(InvalidInputError):
        margulis_check(Q2[:1], Q2, [Q2 + Q2], 0, 0, samples=[])
