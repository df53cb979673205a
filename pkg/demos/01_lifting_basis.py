# # Lifting a state into monomials
#
# A state x in R^d is mapped to every monomial of degree 1..N. The order
# is graded: all degree-1 monomials first, then degree 2, and so on, with the
# first coordinate carrying the most weight inside each degree.

import numpy as np

from carleman_sysid import build_basis, lift, truncate_to_d

# Two states, truncation order three.

basis = build_basis(2, 3)
print(len(basis), "monomials")
for alpha in basis.indices:
    print(alpha)

# Lifting a concrete point. Because the first d entries are the coordinates
# themselves, truncating the lifted vector gives the state back.

x = np.array([0.5, -2.0])
z = lift(basis, x)
print(z)
print(truncate_to_d(basis, z))

# The number of monomials grows like a binomial coefficient, which is what
# limits how high N can go for a fixed number of trajectories.

for N in range(1, 13):
    print(N, len(build_basis(2, N)))
