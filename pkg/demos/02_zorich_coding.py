# coding: utf-8

# # Zorich coding of an interval exchange

# One accelerated step applies the same Rauzy move as many times as possible
# and records it as a letter (type, count, permutation).

# In[1]:

import math

import numpy as np

from teichentropy.induction import PHI, golden_point, random_point, roof_tau1, step_G
from teichentropy.rauzy import Permutation

p = golden_point()
for _ in range(5):
    p, letter = step_G(p)
    print(letter)


# The golden point is fixed by one step, and its roof is log of the golden ratio.

# In[2]:

print(roof_tau1(golden_point()), math.log(PHI))


# For m = 2 the counts are continued fraction digits of the length ratio.

# In[3]:

rng = np.random.default_rng(1)
p = random_point(rng, Permutation((2, 1)))
x = p.lam[0] / p.lam[1]
digits = []
for _ in range(6):
    p, letter = step_G(p)
    digits.append(letter.n)
print(x, digits)
