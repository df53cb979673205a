# # The model-based Carleman matrix
#
# When the polynomial field is known, differentiating each monomial along the
# flow gives a linear system on the lifted state. Terms whose degree exceeds N
# are dropped, which is the only approximation made.

import numpy as np

from carleman_sysid import build_basis, carleman_matrix, lift, van_der_pol
from carleman_sysid.simulate import TimeGrid, integrate_field, integrate_linear

field = van_der_pol()
print(field.describe())

# At N = 2 the matrix is small enough to read. Row (1, 1) holds the
# derivative of x1 x2, which picks up contributions from x1^2, x1 x2 and x2^2.

A2 = carleman_matrix(field, build_basis(2, 2))
print(A2)

# Compare the true trajectory with the truncated linear surrogate for a few
# orders. Larger N tracks the nonlinear flow for longer.

grid = TimeGrid.span(5.0, 0.01)
x0 = np.array([0.8, -0.6])
truth = integrate_field(field, x0, grid).states
for N in (1, 3, 5, 7):
    basis = build_basis(2, N)
    z = integrate_linear(carleman_matrix(field, basis), lift(basis, x0), grid)
    err = np.abs(z[:, :2] - truth).max(axis=1)
    print(f"N={N}: max error on [0, 0.2] = {err[:21].max():.2e}, on [0, 5] = {err.max():.2e}")
