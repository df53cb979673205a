# # Identifying the lifted matrix from data
#
# Without using the field, the lifted matrix can be fitted from trajectories:
# the change of each lifted trajectory over a window equals the matrix times
# its time integral. Stacking trajectories as columns gives a least-squares
# problem solved with a pseudo-inverse.

import numpy as np

from carleman_sysid import (InitialConditionSpec, TimeGrid, build_basis, estimate, generate_dataset,
                            lift_dataset, van_der_pol)
from carleman_sysid.experiment import compare_order

data = generate_dataset(van_der_pol(), InitialConditionSpec(), TimeGrid.span(10.0, 0.01), M=1.5)
print(len(data), "trajectories, peak norm", round(data.peak_norm(), 3))

# Fit at N = 3 and inspect the fit diagnostics.

model = estimate(lift_dataset(data, build_basis(2, 3)))
print("rank", model.rank, "condition", f"{model.condition_number:.2e}", "residual", f"{model.residual:.2e}")
np.set_printoptions(precision=3, suppress=True)
print(model.Ahat[:2])

# Sweep the order and compare the identified system with the model-based one.
# Errors are measured on the first 0.2 s, the window a certificate can cover.

for N in range(1, 9):
    c = compare_order(data, N, T_id=10.0, tau_star=0.2, horizon=10.0, field=van_der_pol())
    print(f"N={N}: identified {c.err_identified:.2e}, model-based {c.err_carleman:.2e}")
