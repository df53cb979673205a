# # Choosing the order with a certificate
#
# The certificate adds two pieces: the truncation error D mu^N of the exact
# Carleman system, and a drift term that grows with the uncertainty in the
# fitted matrix. Searching over N balances the two.
#
# A scalar field keeps the constants honest and the run short.

import math

import numpy as np

from carleman_sysid import (InitialConditionSpec, PolynomialField, TimeGrid, decay_constants_hint,
                            generate_dataset, order_search, validate_parameters)

field = PolynomialField(1, {(1,): [-1.0], (2,): [0.1]})
print("decay constants suggested by a grid scan:", decay_constants_hint(field))

# Conservative constants that satisfy every precondition. Validation reports
# each violated inequality by name, so a bad choice is easy to diagnose.

p = validate_parameters(C=5.0, R=5.0, C0=1.0, M=0.6, tau_star=0.2, mu=0.39, Nbar=6, Delta=math.inf)
print(f"D = {p.D:.4f}, mu must stay below {p.mu_limit:.4f}")

data = generate_dataset(field, InitialConditionSpec(count=20, low=-0.5, high=0.5, seed=1),
                        TimeGrid.span(0.2, 1e-3), M=0.6)
result = order_search(data, p)
for c in result.curve:
    print(f"N={c.N}: log10 Theta = {c.log10_theta:8.2f}   Carleman term = {c.carleman_term:.2e}")
print("selected N* =", result.Nstar)

# The bounds are valid but loose. The drift term dominates every order and
# grows much faster with N than the truncation term shrinks.

try:
    validate_parameters(C=5.0, R=5.0, C0=1.0, M=0.6, tau_star=0.2, mu=0.5, Nbar=6, Delta=1.0)
except ValueError as exc:
    print("rejected:", exc)
