# coding: utf-8

# # Rauzy classes and renormalization matrices

# Two combinatorial moves act on irreducible permutations. Starting from the
# reversal (m, ..., 1) and closing under both moves gives its Rauzy class.

# In[1]:

from teichentropy.rauzy import Permutation, matrix_of_word, rauzy_a, rauzy_b, rauzy_class
from teichentropy.symbolic import parse_word

for m in range(2, 6):
    cls = rauzy_class(Permutation(tuple(range(m, 0, -1))))
    print(m, len(cls))


# For m = 3 the class has three members; each move permutes them.

# In[2]:

cls = rauzy_class(Permutation((3, 2, 1)))
for p in cls.members:
    print(p.images, "a ->", rauzy_a(p).images, "b ->", rauzy_b(p).images)


# Each letter carries an integer matrix of determinant one, and the matrix of
# a word is the product along the word.

# In[3]:

q = parse_word("a:1:[2,3,1].b:1.a:1.b:1.a:1")
a = matrix_of_word(q)
print(a.rows, "det", a.det())
