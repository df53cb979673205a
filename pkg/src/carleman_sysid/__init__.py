"""Data-driven Carleman lifting with a-priori trajectory error certificates."""

__version__ = "0.1.0"

from .bounds import (BoundInputs, BoundParameters, CertifiedBound, ParameterError, SearchResult, abar,
                     bbar, carleman_error_bound, composite_bound, epsilon_norm_estimates, order_search,
                     theta, validate_parameters)
from .identify import IdentifiedModel, LiftedDataset, estimate, lift_dataset, multi_window_augment
from .lifting import LiftingBasis, build_basis, lift, truncate_to_d
from .nummat import RankDeficiencyError, expm, gram_inverse_norm, induced_norm, pinv
from .polyflow import (PolynomialField, carleman_matrix, decay_constants_hint, evaluate, linear_field,
                       van_der_pol)
from .simulate import (DivergenceError, InitialConditionSpec, TimeGrid, Trajectory, TrajectorySet,
                       generate_dataset, integrate_field, integrate_linear)
