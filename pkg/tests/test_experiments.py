import math
import numpy as np

from pytest import mark
from pytest import raises

from gevreych.errors       import ConfigurationError
from gevreych.errors       import InsufficientModesError
from gevreych.errors       import IntegrationBlowUpError
from gevreych.executor     import Executor
from gevreych.experiments  import RK4
from gevreych.experiments  import continuity_experiment
from gevreych.experiments  import estimate_state_radius
from gevreych.experiments  import fit_radius
from gevreych.experiments  import integrate
from gevreych.experiments  import radius_floor
from gevreych.experiments  import resolution_cap
from gevreych.experiments  import simulation_rows
from gevreych.experiments  import stable_dt
from gevreych.experiments  import track_radius
from gevreych.initial_data import build_state
from gevreych.spectral     import synthesize
from gevreych.state        import SystemState
from gevreych.state        import zero_state


def test_stable_dt():
    assert stable_dt('CH', 16) == 0.125
    assert stable_dt('2CH', 16) == 0.125
    assert stable_dt('M2CH', 8) == 0.125
    assert stable_dt('3CH', 4) == 0.25
    assert stable_dt('CH', 0) == math.inf


def test_rk4_step_on_linear_decay():
    stepper = RK4(np.array([1.0, 2.0]), lambda u: -u)
    stepper.step(0.1)
    factor = 1.0 - 0.1 + 0.1 ** 2 / 2.0 - 0.1 ** 3 / 6.0 + 0.1 ** 4 / 24.0
    assert np.allclose(stepper.U, [factor, 2.0 * factor], rtol=1e-14)


def test_integrate_validation(small_ch_state):
    with raises(ConfigurationError):
        integrate('CH', small_ch_state, 1.0, 1.0)
    with raises(ConfigurationError):
        integrate('2CH', small_ch_state, 1e-3, 1.0)
    with raises(ConfigurationError):
        integrate('CH', small_ch_state, 0.0, 1.0)
    with raises(ConfigurationError):
        integrate('CH', small_ch_state, 1e-3, -1.0)
    traj = integrate('CH', small_ch_state, 1e-3, 0.0)
    assert len(traj) == 1


def test_integrate_stores_final_state(small_ch_state):
    traj = integrate('CH', small_ch_state, 1e-2, 0.105, store_every=4)
    assert traj.t_end == 0.105
    # 11 steps: stored after 4 and 8, plus the final one
    assert len(traj) == 4


def test_blow_up_keeps_last_valid_state(small_ch_state):
    with raises(IntegrationBlowUpError) as info:
        integrate('CH', small_ch_state, 1e-3, 1.0, overflow_cap=1e-3)
    assert info.value.last_time == 0.0
    assert len(info.value.trajectory) == 1
    assert info.value.errno == 1


def test_ch_conserves_h1():
    state = build_state('CH', {'u': 'cosine amp=0.1'}, 16)
    traj = integrate('CH', state, 1e-3, 0.5, store_every=50)
    start = traj.states[0]['u'].h1_energy()
    end = traj.states[-1]['u'].h1_energy()
    assert abs(end - start) / start < 1e-6
    # the solution moved
    assert traj.states[-1] != state


def test_simulation_rows(small_ch_state):
    traj = integrate('CH', small_ch_state, 1e-2, 0.02)
    rows = simulation_rows(traj, 1.0, 2.0)
    assert len(rows) == len(traj)
    assert rows[0][0] == 0.0
    assert math.isclose(rows[0][2], small_ch_state['u'].h1_energy())
    assert rows[0][3] == 0.0


def _decaying_field(delta, sigma, n_modes, power=0.0):
    return synthesize([(k, math.exp(-delta * k ** (1.0 / sigma)) * k ** power) for k in range(1, n_modes + 1)], n_modes)


@mark.parametrize("sigma", (1.0, 2.0))
def test_fit_radius_recovers_decay(sigma):
    fit = fit_radius(_decaying_field(0.3, sigma, 32), sigma)
    assert abs(fit.delta_hat - 0.3) < 1e-4
    assert abs(fit.slope) < 1e-6
    assert not fit.resolution_limited
    assert fit.modes_used == 29


def test_fit_radius_with_algebraic_factor():
    fit = fit_radius(_decaying_field(0.5, 1.0, 32, power=-2.0), 1.0)
    assert abs(fit.delta_hat - 0.5) < 1e-4
    assert abs(fit.slope + 2.0) < 1e-4


def test_fit_radius_needs_modes(unit_cosine):
    with raises(InsufficientModesError):
        fit_radius(unit_cosine, 1.0)
    with raises(ConfigurationError):
        fit_radius(unit_cosine, 1.0, k_max=9)


def test_fit_radius_flags_noise_floor():
    f = _decaying_field(2.0, 1.0, 24)
    fit = fit_radius(f, 1.0)
    assert fit.resolution_limited
    assert abs(fit.delta_hat - 2.0) < 1e-4


def test_resolution_cap(unit_cosine):
    assert math.isclose(resolution_cap(unit_cosine, 1.0), math.log(0.5 / 1e-14) / 8.0)
    assert resolution_cap(unit_cosine * 1e-15, 1.0) == 0.0


def test_radius_floor():
    assert radius_floor(0.0, 1.0, 1.0, 0.5) == 0.5
    assert radius_floor(1.0, 1.0, 1.0, 0.5) == 0.0
    assert radius_floor(2.0, 1.0, 1.0, 0.5) == 0.0
    assert radius_floor(1.0 / 3.0, 1.0, 2.0, 0.5) == 0.0
    values = [radius_floor(t, 1.0, 2.0, 0.5) for t in np.linspace(0.0, 0.3, 7)]
    assert all(a > b for a, b in zip(values[:-1], values[1:]))
    with raises(ValueError):
        radius_floor(-1.0, 1.0, 1.0, 0.5)
    with raises(ValueError):
        radius_floor(0.0, 0.0, 1.0, 0.5)


def test_state_radius_of_zero_state():
    delta_hat, residual, limited = estimate_state_radius(zero_state('2CH', 8), 1.0)
    assert delta_hat is None
    assert math.isnan(residual)
    assert not limited


def test_state_radius_uses_the_smallest_component(unit_cosine):
    state = SystemState('2CH', [_decaying_field(0.6, 1.0, 8), _decaying_field(0.4, 1.0, 8)])
    delta_hat, _, _ = estimate_state_radius(state, 1.0)
    assert abs(delta_hat - 0.4) < 1e-4
    # a single mode has no fit, its resolution cap stands in
    delta_hat, _, limited = estimate_state_radius(SystemState('CH', [unit_cosine]), 1.0)
    assert math.isclose(delta_hat, resolution_cap(unit_cosine, 1.0))
    assert limited


def test_track_radius_of_zero_data():
    series = track_radius('CH', zero_state('CH', 16), 1.0, 1e-3, t_end=0.1)
    assert series.below_noise_floor
    assert series.envelope_holds()
    assert series.worst_gap() == 0.0


def test_track_radius_stays_above_floor():
    state = build_state('CH', {'u': 'cosine_pack amp=0.1 decay=0.5'}, 16)
    series = track_radius('CH', state, 1.0, 1e-3)
    assert abs(series.fitted_delta[0] - 0.5) < 1e-4
    assert series.delta_floor[0] == series.fitted_delta[0]
    assert series.delta_floor[-1] < 1e-12
    assert series.envelope_holds()
    assert series.constants.T0 > 0
    assert len(series.rows) == len(series.times)


@mark.parametrize("threads", (None, 2))
def test_continuity(small_ch_state, threads):
    direction = build_state('CH', {'u': 'cosine'}, 8)
    executor = Executor(workers=threads) if threads else None
    report = continuity_experiment('CH', small_ch_state, direction, [0.0, 1e-2, 1e-3], 1.0, 2.0,
                                   ladder_kwargs={'delta_points': 4, 't_points': 3}, executor=executor)
    assert report.epsilons == [1e-2, 1e-3]
    assert report.holds()
    assert 0 < report.max_ratio() <= 2.05
    assert report.constants.norm1 > 1.0
    assert len(report.rows) == 2


def test_continuity_validation(small_ch_state):
    direction = build_state('CH', {'u': 'cosine'}, 8)
    with raises(ConfigurationError):
        continuity_experiment('CH', small_ch_state, direction, [-1e-2], 1.0, 2.0)
    with raises(ConfigurationError):
        continuity_experiment('CH', small_ch_state, zero_state('CH', 8), [1e-2], 1.0, 2.0)
    with raises(ConfigurationError):
        continuity_experiment('CH', small_ch_state, zero_state('2CH', 8), [1e-2], 1.0, 2.0)


def test_rk4_is_fourth_order():
    state = build_state('CH', {'u': 'cosine amp=0.5'}, 8)
    reference = integrate('CH', state, 0.05 / 16.0, 0.5).states[-1].as_array()
    errors = [np.max(np.abs(integrate('CH', state, dt, 0.5).states[-1].as_array() - reference)) for dt in (0.05, 0.025)]
    assert errors[1] > 0
    assert 12.0 < errors[0] / errors[1] < 20.0


@mark.parametrize("tag components".split(), (('2CH', ('u', 'rho')), ('3CH', ('u', 'v', 'w'))))
def test_track_radius_envelope_of_coupled_systems(tag, components):
    state = build_state(tag, {name: 'cosine_pack amp=0.1 decay=0.5' for name in components}, 16)
    series = track_radius(tag, state, 1.0, 1e-3)
    assert abs(series.fitted_delta[0] - 0.5) < 1e-4
    assert series.delta_floor[-1] < 1e-12
    assert series.envelope_holds()


def test_continuity_of_three_component_system():
    state = build_state('3CH', {'u': 'cosine amp=0.1'}, 8)
    direction = build_state('3CH', {'u': 'cosine'}, 8)
    report = continuity_experiment('3CH', state, direction, [1e-2, 1e-3, 1e-4], 1.0, 2.0,
                                   ladder_kwargs={'delta_points': 4, 't_points': 3})
    assert len(report.ratios) == 3
    assert report.holds()
    assert 0 < report.max_ratio() <= 2.05
