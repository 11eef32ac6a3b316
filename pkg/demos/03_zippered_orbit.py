# coding: utf-8

# # A zippered-rectangle orbit

# The Teichmueller flow rescales widths and heights while keeping the area.
# The first return map to the transversal is the accelerated step together
# with its roof.

# In[1]:

from fractions import Fraction

from teichentropy.rauzy import Permutation
from teichentropy.zippered import ZipperedRectangle, area, first_return_F, flow_Pt, map_U, orbit_csv

zr = ZipperedRectangle((Fraction(13, 21), Fraction(8, 21)), Permutation((2, 1)), (Fraction(-1, 3), Fraction(1, 2)))
print("area", area(zr))
print("area after flow", area(flow_Pt(zr, Fraction(3, 2))))
print("area after U", area(map_U(zr)))


# Exact rationals stay exact along the orbit until the lengths hit a boundary.

# In[2]:

print(orbit_csv(zr, 4))


# In[3]:

out, t = first_return_F(zr)
print(out.lam, out.delta, t)
