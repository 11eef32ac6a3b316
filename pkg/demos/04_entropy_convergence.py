# coding: utf-8

# # Entropy of suspension flows

# For a finite Bernoulli shift with roofs c_i the maximal entropy solves
# sum exp(-beta c_i) = 1.

# In[1]:

import math

import numpy as np

from teichentropy.entropy import bernoulli_flow_entropy, estimate_htop_flow, maximize_entropy_finite
from teichentropy.rauzy import Permutation
from teichentropy.symbolic import parse_word

print(maximize_entropy_finite([math.log(2), math.log(2)])[0])
print(maximize_entropy_finite([1.0, 2.0])[0], math.log((1 + 5 ** 0.5) / 2))


# With infinitely many roofs log(i) the answer is the abscissa where zeta(beta)
# diverges, which is 1.

# In[2]:

est = bernoulli_flow_entropy(lambda i: np.log(i))
print(est.beta, est.bracket)


# The return alphabet of a simple word gives the roofs of the flow. Truncated
# alphabets give lower roots that creep upward; extrapolating them recovers
# the expected value 2 for m = 2.

# In[3]:

q = parse_word("a:1.b:1", Permutation((2, 1)))
flow = estimate_htop_flow(q, 16)
for bound, beta in flow.details["truncated_betas"]:
    print(bound, round(beta, 4))
print("extrapolated", flow.beta, flow.bracket)
