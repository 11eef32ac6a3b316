# coding: utf-8

# # Counting returns with Monte Carlo frequencies

# A long orbit estimates cylinder frequencies. For a return word r of p the
# frequency ratio against p should scale like exp(-s tau) with s = 2 for m = 2.

# In[1]:

from teichentropy.montecarlo import margulis_check, shortest_returns, simulate_chunks, stationarity_check
from teichentropy.rauzy import Permutation
from teichentropy.symbolic import parse_word

P2 = Permutation((2, 1))
q = parse_word("a:1.b:1", P2)
samples = simulate_chunks(P2, 10**6, 7, chunks=2)


# In[2]:

report = margulis_check(q, q, shortest_returns(q, 8), 10**6, 7, samples=samples, min_hits=100)
print("s =", report.s, "+-", report.s_se)
for row in report.rows:
    print(".".join(row["word"]), row.get("tau"), row.get("R"), row.get("flag"))


# The same orbit machinery tests stationarity of the measure on letters.

# In[3]:

st = stationarity_check(P2, 2 * 10**5, 3)
print("all cells within 3 SE:", st["all_pass"])
