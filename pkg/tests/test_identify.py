import numpy as np
import pytest

from carleman_sysid.identify import IdentifiedModel, LiftedDataset, estimate, lift_dataset, multi_window_augment
from carleman_sysid.lifting import build_basis
from carleman_sysid.polyflow import linear_field, van_der_pol
from carleman_sysid.simulate import InitialConditionSpec, TimeGrid, TrajectorySet, generate_dataset


@pytest.fixture(scope="module")
def vdp_data():
    return generate_dataset(van_der_pol(), InitialConditionSpec(), TimeGrid.span(10.0, 0.01), M=1.5)


def test_constant_trajectory_integral():
    grid = TimeGrid.span(2.0, 0.1)
    data = TrajectorySet(grid, np.full((1, grid.count, 1), 0.5), M=1.0)
    lifted = lift_dataset(data, build_basis(1, 2))
    np.testing.assert_allclose(lifted.IGamma[:, 0], [1.0, 0.5])
    np.testing.assert_allclose(lifted.increments, 0.0)


def test_decay_integral_matches_closed_form():
    data = generate_dataset(linear_field([[-1.0]]), InitialConditionSpec(count=1, low=1, high=1),
                            TimeGrid.span(1.0, 0.01), M=1.0)
    lifted = lift_dataset(data, build_basis(1, 1))
    assert abs(lifted.IGamma[0, 0] - (1 - np.exp(-1))) < 1e-4


def test_van_der_pol_N3_full_rank(vdp_data):
    model = estimate(lift_dataset(vdp_data, build_basis(2, 3), (0.0, 10.0)))
    assert model.Ahat.shape == (9, 9)
    assert model.rank == 9
    assert model.certifiable


@pytest.mark.parametrize("h,tol", [(0.01, 5e-6), (0.001, 5e-8)])
def test_scalar_linear_recovery(h, tol):
    # the only error left is the O(h^2) trapezoid bias
    data = generate_dataset(linear_field([[-0.7]]), InitialConditionSpec(count=5, seed=4),
                            TimeGrid.span(1.0, h), M=1.0)
    model = estimate(lift_dataset(data, build_basis(1, 1)))
    assert abs(model.Ahat[0, 0] + 0.7) < tol


def test_self_consistency_on_synthetic_lifted_data():
    # data generated exactly by z' = A z is fit back exactly
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 4))
    I = rng.normal(size=(4, 12))
    lifted = LiftedDataset(build_basis(4, 1), np.zeros((4, 12)), A @ I, I, 1.0)
    np.testing.assert_allclose(estimate(lifted).Ahat, A, atol=1e-10)


def test_single_trajectory_not_certifiable(vdp_data):
    one = TrajectorySet(vdp_data.grid, vdp_data.states[:1], vdp_data.M)
    model = estimate(lift_dataset(one, build_basis(2, 2)))
    assert not model.certifiable
    assert model.condition_number == float("inf")
    assert np.all(np.isfinite(model.Ahat))


def test_multi_window_columns():
    data = generate_dataset(van_der_pol(), InitialConditionSpec(count=20, seed=1), TimeGrid.span(3.0, 0.01), M=1.5)
    lifted = multi_window_augment(data, build_basis(2, 5), [(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)])
    assert lifted.IGamma.shape == (20, 60)
    assert estimate(lifted).rank == 20


def test_windows_must_hit_grid(vdp_data):
    with pytest.raises(ValueError):
        lift_dataset(vdp_data, build_basis(2, 2), (0.0, 0.005))
    with pytest.raises(ValueError):
        lift_dataset(vdp_data, build_basis(2, 2), (1.0, 1.0))


def test_quadrature_is_second_order():
    data_fine = generate_dataset(linear_field([[-1.0]]), InitialConditionSpec(count=1, low=1, high=1),
                                 TimeGrid.span(1.0, 0.01), M=1.0)
    data_coarse = TrajectorySet(TimeGrid.span(1.0, 0.02), data_fine.states[:, ::2], 1.0)
    exact = 1 - np.exp(-1)
    e_fine = abs(lift_dataset(data_fine, build_basis(1, 1)).IGamma[0, 0] - exact)
    e_coarse = abs(lift_dataset(data_coarse, build_basis(1, 1)).IGamma[0, 0] - exact)
    assert 3 <= e_coarse / e_fine <= 6


def test_time_shift_invariance(vdp_data):
    shifted = TrajectorySet(TimeGrid(5.0, vdp_data.grid.h, vdp_data.grid.count), vdp_data.states, vdp_data.M)
    a = lift_dataset(vdp_data, build_basis(2, 3), (0.0, 2.0))
    b = lift_dataset(shifted, build_basis(2, 3), (5.0, 7.0))
    np.testing.assert_array_equal(a.IGamma, b.IGamma)


def test_least_squares_optimality(vdp_data):
    lifted = lift_dataset(vdp_data, build_basis(2, 3), (0.0, 1.0))
    model = estimate(lifted)
    rng = np.random.default_rng(9)
    for _ in range(5):
        other = model.Ahat + 1e-3 * rng.normal(size=model.Ahat.shape)
        assert np.linalg.norm(lifted.increments - other @ lifted.IGamma) >= model.residual


def test_model_round_trip(tmp_path, vdp_data):
    model = estimate(lift_dataset(vdp_data, build_basis(2, 2), (0.0, 1.0)))
    model.save(tmp_path / "model")
    back = IdentifiedModel.load(tmp_path / "model")
    np.testing.assert_array_equal(back.Ahat, model.Ahat)
    assert back.rank == model.rank
