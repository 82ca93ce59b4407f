import math
import numpy as np

from pytest                import mark
from pytest                import raises
from hypothesis            import given
from hypothesis            import settings
from hypothesis.strategies import floats

from gevreych.errors      import TrajectoryError
from gevreych.errors      import WindowError
from gevreych.executor    import Executor
from gevreych.initial_data import build_state
from gevreych.ovsyannikov import LadderSpec
from gevreych.ovsyannikov import PicardResult
from gevreych.ovsyannikov import Trajectory
from gevreych.ovsyannikov import admissible_window
from gevreych.ovsyannikov import check_ladder_integral
from gevreych.ovsyannikov import check_scale_inequality
from gevreych.ovsyannikov import contraction_factor
from gevreych.ovsyannikov import contraction_ratios
from gevreych.ovsyannikov import delta_tau
from gevreych.ovsyannikov import ea_distance
from gevreych.ovsyannikov import ea_norm
from gevreych.ovsyannikov import lifespan_T0
from gevreych.ovsyannikov import picard_iterate
from gevreych.ovsyannikov import picard_operator
from gevreych.ovsyannikov import time_grid
from gevreych.spectral    import constant
from gevreych.spectral    import synthesize
from gevreych.state       import SystemState
from gevreych.state       import zero_state
from gevreych.systems     import lifespan_constants
from gevreych.systems     import rhs_for


@mark.parametrize("kwargs", (
    {'a': 0.0, 'sigma': 1.0, 'delta_grid': [0.5], 't_fraction_grid': [0.0]},
    {'a': 1.0, 'sigma': 0.5, 'delta_grid': [0.5], 't_fraction_grid': [0.0]},
    {'a': 1.0, 'sigma': 1.0, 'delta_grid': [0.5, 1.0], 't_fraction_grid': [0.0]},
    {'a': 1.0, 'sigma': 1.0, 'delta_grid': [0.5, 0.2], 't_fraction_grid': [0.0]},
    {'a': 1.0, 'sigma': 1.0, 'delta_grid': [], 't_fraction_grid': [0.0]},
    {'a': 1.0, 'sigma': 1.0, 'delta_grid': [0.5], 't_fraction_grid': [0.0, 1.0]},
))
def test_ladder_validation(kwargs):
    with raises(ValueError):
        LadderSpec(**kwargs)


def test_default_ladder():
    ladder = LadderSpec.default(2.0, 1.0)
    assert ladder.delta_grid.size == 32
    assert math.isclose(ladder.delta_grid[0], 0.02)
    assert math.isclose(ladder.delta_grid[-1], 0.98)
    assert ladder.t_fraction_grid[0] == 0.0
    assert math.isclose(ladder.t_fraction_grid[-1], 0.95)
    assert len(list(ladder.sample_points())) == 32 * 16
    assert math.isclose(ladder.max_time(), 2.0 * 0.98 * 0.95)
    assert ladder.with_scale(1.0).a == 1.0
    assert LadderSpec.default(1.0, 1.0, delta_points=1).delta_grid[0] == 0.5


def test_window():
    assert admissible_window(0.5, 1.0, 1.0) == 0.5
    assert math.isclose(admissible_window(0.5, 3.0, 2.0), 0.25)


@settings(max_examples=50, deadline=None)
@given(floats(min_value=0.0, max_value=0.95), floats(min_value=0.0, max_value=0.9), floats(min_value=1.0, max_value=3.0))
def test_scale_inequality_is_strict(delta, frac, sigma):
    t = frac * admissible_window(delta, 1.0, sigma)
    assert check_scale_inequality(delta, t, 1.0, sigma).holds


def test_scale_inequality_outside_window():
    with raises(WindowError):
        check_scale_inequality(0.3, 0.7, 1.0, 1.0)
    with raises(WindowError):
        check_scale_inequality(1.0, 0.0, 1.0, 1.0)
    with raises(WindowError):
        check_scale_inequality(0.3, -0.1, 1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(floats(min_value=0.0, max_value=0.95), floats(min_value=0.0, max_value=0.9), floats(min_value=1.0, max_value=3.0))
def test_delta_tau_lies_between_delta_and_one(delta, frac, sigma):
    tau = frac * admissible_window(delta, 1.0, sigma)
    assert delta < delta_tau(delta, tau, 1.0, sigma) < 1.0


def test_delta_tau_at_zero():
    # midpoint of delta and 1 at tau = 0
    assert math.isclose(delta_tau(0.3, 0.0, 1.0, 1.0), 0.65)


@mark.parametrize("sigma", (1.0, 2.0))
@mark.parametrize("frac", (0.0, 0.5))
def test_ladder_integral_holds(sigma, frac):
    t = frac * admissible_window(0.3, 1.0, sigma)
    report = check_ladder_integral(0.3, t, 1.0, sigma)
    assert report.holds
    if frac:
        assert report.lhs > 0


def test_time_grid_has_even_steps():
    ladder = LadderSpec.default(1.0, 1.0, delta_points=4, t_points=3)
    times = time_grid(ladder, quadrature_dt=ladder.max_time() / 7.0)
    assert (times.size - 1) % 2 == 0
    assert math.isclose(times[-1], ladder.max_time())
    assert time_grid(ladder).size == 257


def test_trajectory():
    u = SystemState('CH', [constant(1.0, 2)])
    traj = Trajectory([0.0, 1.0], [u, u * 3.0])
    assert traj.state_at(0.5) == u * 2.0
    assert traj.state_at(1.0) == u * 3.0
    assert traj.t_end == 1.0
    assert traj.max_abs() == 3.0
    with raises(TrajectoryError):
        traj.state_at(1.5)
    with raises(TrajectoryError):
        Trajectory([0.5, 1.0], [u, u])
    with raises(TrajectoryError):
        Trajectory([0.0, 1.0], [u, zero_state('2CH', 2)])
    with raises(TrajectoryError):
        Trajectory([0.0, 0.0], [u, u])
    assert len(Trajectory.constant(u, 0.0)) == 1


def test_ea_norm_of_constant_field():
    ladder = LadderSpec.default(1.0, 2.0, delta_points=5, t_points=4)
    traj = Trajectory.constant(SystemState('CH', [constant(1.0, 4)]), ladder.max_time(), ladder)
    assert math.isclose(ea_norm(traj, ladder, 2.0), (1.0 - ladder.delta_grid[0]) ** 2)
    assert ea_distance(traj, traj, ladder, 2.0) == 0.0


def test_ea_norm_needs_long_enough_trajectory():
    ladder = LadderSpec.default(1.0, 1.0, delta_points=3, t_points=3)
    traj = Trajectory.constant(SystemState('CH', [constant(1.0, 4)]), 0.5 * ladder.max_time())
    with raises(TrajectoryError):
        ea_norm(traj, ladder, 2.0)
    other = Trajectory.constant(zero_state('2CH', 4), ladder.max_time())
    with raises(TrajectoryError):
        ea_distance(traj, other, ladder, 2.0)


def test_picard_operator_integrates_constants():
    u0 = SystemState('CH', [synthesize([(1, 0.5)], 3)])
    f = SystemState('CH', [synthesize([(2, -0.5j)], 3)])
    times = np.linspace(0.0, 1.0, 5)
    traj = Trajectory(times, [u0] * times.size)
    out = picard_operator(lambda state: f, u0, traj)
    for t, state in zip(times, out.states):
        assert np.allclose(state.as_array(), (u0 + f * t).as_array(), atol=1e-14)


def test_picard_operator_checks_systems():
    traj = Trajectory.constant(zero_state('2CH', 2), 1.0)
    with raises(TrajectoryError):
        picard_operator(rhs_for('CH'), zero_state('CH', 2), traj)


def test_picard_ratios_skip_round_off():
    result = PicardResult([], [1.0, 0.25, 1e-14, 1e-15], [0.1] * 4, [1.0] * 4, radius=0.05)
    assert result.ratios() == [0.25, 1e-14 / 0.25]
    assert result.fixed_point_residual == 1e-15
    assert result.left_ball()
    assert result.rows[0] == [1, 1.0, 0.1, 1.0]


def _ch_setup(state):
    constants = lifespan_constants('CH', state, 1.0, 1.0)
    ladder = LadderSpec.default(constants.T0, 1.0, delta_points=6, t_points=4)
    return constants, ladder


def test_picard_converges_on_ch(small_ch_state):
    constants, ladder = _ch_setup(small_ch_state)
    result = picard_iterate(rhs_for('CH'), small_ch_state, ladder, 3, radius=constants.R)
    assert len(result.trajectories) == 4
    assert result.residuals[0] > 0
    assert all(r <= 0.5 for r in result.ratios())
    assert not result.left_ball()
    with raises(ValueError):
        picard_iterate(rhs_for('CH'), small_ch_state, ladder, 0)


def test_contraction_on_ch(small_ch_state):
    constants, ladder = _ch_setup(small_ch_state)
    rhs = rhs_for('CH')
    factor = contraction_factor(rhs, small_ch_state, ladder, 4, 0, radius=constants.R)
    assert 0 < factor <= 0.5
    serial = contraction_ratios(rhs, small_ch_state, ladder, 4, 0, radius=constants.R)
    threaded = contraction_ratios(rhs, small_ch_state, ladder, 4, 0, radius=constants.R, executor=Executor(workers=2))
    assert serial == threaded
    with raises(ValueError):
        contraction_ratios(rhs, small_ch_state, ladder, 0, 0)


def test_time_varying_contraction_on_ch(small_ch_state):
    constants, ladder = _ch_setup(small_ch_state)
    factor = contraction_factor(rhs_for('CH'), small_ch_state, ladder, 2, 1, radius=constants.R, time_varying=True,
                                quadrature_dt=ladder.max_time() / 16.0)
    assert 0 < factor <= 0.5


@mark.parametrize("L M R".split(), ((0.0, 1.0, 1.0), (1.0, 1.0, 0.0), (1.0, -1.0, 1.0)))
def test_lifespan_T0_validation(L, M, R):
    with raises(ValueError):
        lifespan_T0(L, M, R, 1.0)


def test_lifespan_T0_second_branch():
    # a large M makes the ball condition the binding one
    c = lifespan_T0(1.0, 1e6, 1.0, 1.0)
    # (2^sigma - 1) R / ((2^sigma - 1) 2^(2 sigma + 3) L R + M) at sigma = 1
    assert math.isclose(c.T0, 1.0 / (32.0 + 1e6))
    assert c.T0 < c.first_branch


def test_first_picard_iterate_of_cosine(small_ch_state):
    # F(0.1 cos x) = 0.006 sin 2x, so u^1(t) = 0.1 cos x + 0.006 t sin 2x
    _, ladder = _ch_setup(small_ch_state)
    result = picard_iterate(rhs_for('CH'), small_ch_state, ladder, 1, quadrature_dt=ladder.max_time() / 16.0)
    first = result.trajectories[1]
    for t, state in zip(first.times, first.states):
        u = state['u']
        assert abs(u.coefficient(1) - 0.05) < 1e-15
        assert abs(u.coefficient(2) - (-0.5j * 0.006 * t)) < 1e-15
        assert abs(u.coefficient(3)) < 1e-15
    assert math.isclose(result.residuals[0], result.ball_distances[0])


@mark.parametrize("sigma", (1.0, 2.0))
def test_picard_reaches_fixed_point_at_working_resolution(sigma):
    state = build_state('CH', {'u': 'cosine amp=0.1'}, 64)
    constants = lifespan_constants('CH', state, 1.0, sigma)
    ladder = LadderSpec.default(constants.T0, sigma, delta_points=8, t_points=4)
    result = picard_iterate(rhs_for('CH'), state, ladder, 6, radius=constants.R)
    assert result.residuals[0] > result.residuals[1] > result.residuals[2]
    assert all(r <= 0.55 for r in result.ratios())
    assert result.fixed_point_residual < 1e-8
    assert not result.left_ball()


@mark.parametrize("sigma", (1.0, 2.0))
def test_contraction_factor_is_linear_in_scale(small_ch_state, sigma):
    constants = lifespan_constants('CH', small_ch_state, 1.0, sigma)
    ladder = LadderSpec.default(constants.T0, sigma, delta_points=6, t_points=4)
    rhs = rhs_for('CH')
    full = contraction_factor(rhs, small_ch_state, ladder, 4, 2, radius=constants.R)
    half = contraction_factor(rhs, small_ch_state, ladder.with_scale(0.5 * constants.T0), 4, 2, radius=constants.R)
    assert 0 < half < full <= 0.5
    assert math.isclose(full / half, 2.0, rel_tol=1e-6)
