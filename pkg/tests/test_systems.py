import math
import numpy as np

from pytest                import mark
from pytest                import raises
from hypothesis            import given
from hypothesis            import settings
from hypothesis.strategies import integers

from gevreych.errors       import TrajectoryError
from gevreych.errors       import UnboundedLifespanError
from gevreych.gevrey       import GevreyParams
from gevreych.gevrey       import random_gevrey_field
from gevreych.gevrey       import sample_seed
from gevreych.ovsyannikov  import lifespan_T0
from gevreych.spectral     import constant
from gevreych.spectral     import direct_product
from gevreych.spectral     import synthesize
from gevreych.spectral     import zeros
from gevreych.state        import SystemState
from gevreych.state        import SystemTag
from gevreych.systems      import b_field
from gevreych.systems      import check_3ch_consistency
from gevreych.systems      import e_sigma
from gevreych.systems      import lifespan_constants
from gevreych.systems      import rhs_2ch
from gevreych.systems      import rhs_3ch
from gevreych.systems      import rhs_ch
from gevreych.systems      import rhs_for
from gevreych.systems      import rhs_m2ch
from gevreych.systems      import three_component_coefficients


K = 6


def _cos(amp=1.0, k=1):
    return synthesize([(k, 0.5 * amp)], K)


def _sin(amp=1.0, k=1):
    return synthesize([(k, -0.5j * amp)], K)


def _close(f, g):
    return np.allclose(f.coeffs, g.coeffs, atol=1e-13)


def _random_state(tag, seed, n_modes=K):
    p = GevreyParams(1.0, 0.5, 2.0)
    tag = SystemTag.parse(tag)
    return SystemState(tag, [random_gevrey_field(p, 0.5, n_modes, sample_seed(seed, i)) for i in range(len(tag.components))])


def test_ch_cosine():
    out = rhs_ch(SystemState('CH', [_cos()]))
    assert _close(out['u'], _sin(0.6, 2))


def test_ch_small_cosine():
    out = rhs_ch(SystemState('CH', [_cos(0.1)]))
    assert _close(out['u'], _sin(0.006, 2))


def test_2ch_example():
    out = rhs_2ch(SystemState('2CH', [_cos(), _sin()]))
    assert _close(out['u'], _sin(0.5, 2))
    assert _close(out['rho'], _cos(-1.0, 2))


def test_2ch_without_density_is_ch():
    u = _cos(0.3)
    out = rhs_2ch(SystemState('2CH', [u, zeros(K)]))
    assert _close(out['u'], rhs_ch(SystemState('CH', [u]))['u'])
    assert out['rho'].is_zero()


def test_m2ch_example():
    out = rhs_m2ch(SystemState('M2CH', [zeros(K), _cos()]))
    assert _close(out['u'], _sin(0.2, 2))
    assert out['gamma'].max_abs() < 1e-15


def test_m2ch_sign():
    state = SystemState('M2CH', [zeros(K), _cos()])
    assert _close(rhs_m2ch(state, k_sign=-1)['u'], -rhs_m2ch(state)['u'])


def test_zero_is_an_equilibrium():
    for tag in SystemTag:
        state = SystemState(tag, [zeros(K)] * len(tag.components))
        assert rhs_for(tag)(state).is_zero()


@mark.parametrize("tag", list(SystemTag))
def test_rhs_preserves_realness(tag):
    out = rhs_for(tag)(_random_state(tag, 3))
    for f in out:
        assert np.array_equal(f.coeffs, np.conj(f.coeffs[::-1]))


@mark.parametrize("tag", list(SystemTag))
def test_spectral_and_direct_products_agree(tag):
    state = _random_state(tag, 5)
    fast = rhs_for(tag)(state)
    slow = rhs_for(tag, mul=direct_product)(state)
    assert np.allclose(fast.as_array(), slow.as_array(), atol=1e-12)


def test_rhs_rejects_wrong_system():
    with raises(TrajectoryError):
        rhs_ch(SystemState('2CH', [zeros(K), zeros(K)]))
    with raises(ValueError):
        rhs_for('2CH', k_sign=2)


@settings(max_examples=20, deadline=None)
@given(integers(min_value=0, max_value=2 ** 31))
def test_3ch_forms_agree(seed):
    report = check_3ch_consistency(_random_state('3CH', seed, 12))
    assert report.holds


def test_3ch_consistency_detects_a_wrong_output():
    state = _random_state('3CH', 1)
    wrong = rhs_3ch(state) * 1.5
    assert not check_3ch_consistency(state, rhs_out=wrong).holds


def test_3ch_with_only_v():
    # with u = w = 0 only the v equation moves: v_t = 2 v b_x + v_x b with b = -2 P2 v
    v = _cos()
    out = rhs_3ch(SystemState('3CH', [zeros(K), v, zeros(K)]))
    assert out['u'].is_zero()
    assert out['w'].is_zero()
    b = b_field(zeros(K), zeros(K), v)
    assert _close(b, _cos(-0.4))


def test_coefficients():
    assert math.isclose(e_sigma(1.0), math.exp(-1.0))
    c1, c2 = three_component_coefficients(1.0)
    assert math.isclose(c1, 90.0 + 27.0 * math.exp(-1.0))
    assert math.isclose(c2, 14.0 + 6.0 * math.exp(-1.0))


def _unit_state(tag):
    # norm 1 at delta = 1
    tag = SystemTag.parse(tag)
    return SystemState(tag, [constant(1.0, K)] + [zeros(K)] * (len(tag.components) - 1))


def test_ch_lifespan():
    c = lifespan_constants('CH', _unit_state('CH'), 1.0, 1.0)
    e = math.exp(-1.0)
    assert math.isclose(c.L, 2.0 * (e + 2.0))
    assert math.isclose(c.M, e / 2.0 + 1.0)
    assert math.isclose(c.T0, 1.0 / (2.0 ** 7 * (e + 2.0)))
    assert math.isclose(c.T0, 3.2994e-3, rel_tol=1e-4)
    assert c.T0 == c.first_branch


def test_2ch_lifespan():
    c = lifespan_constants('2CH', _unit_state('2CH'), 1.0, 1.0)
    e = math.exp(-1.0)
    assert math.isclose(c.L, 4.0 * (e + 1.0))
    assert math.isclose(c.M, (e + 5.0) / 2.0)
    assert math.isclose(c.T0, 1.0 / (64.0 * 4.0 * (e + 1.0)))


def test_3ch_lifespan():
    c = lifespan_constants('3CH', _unit_state('3CH'), 1.0, 1.0)
    c1, c2 = three_component_coefficients(1.0)
    assert math.isclose(c.L, c1 + c2)
    assert math.isclose(c.T0, 1.0 / (64.0 * (c1 + c2)))
    assert math.isclose(c.T0, 1.3454e-4, rel_tol=1e-3)


def test_lifespan_scales_with_norm_and_constant():
    base = lifespan_constants('CH', _unit_state('CH'), 1.0, 1.0)
    shifted = lifespan_constants('CH', _unit_state('CH'), 1.0, 1.0, norm_shift=1.0)
    doubled = lifespan_constants('CH', _unit_state('CH'), 2.0, 1.0)
    assert shifted.norm1 == 2.0
    assert math.isclose(shifted.T0, base.T0 / 2.0)
    assert math.isclose(doubled.T0, base.T0 / 2.0)


def test_lifespan_reference_height():
    base = lifespan_constants('CH', _unit_state('CH'), 1.0, 2.0)
    tall = lifespan_constants('CH', _unit_state('CH'), 1.0, 2.0, delta_ref=2.0)
    assert math.isclose(tall.L, base.L / 4.0)
    assert math.isclose(tall.M, base.M / 4.0)


def test_zero_data_has_no_finite_lifespan():
    with raises(UnboundedLifespanError):
        lifespan_constants('CH', SystemState('CH', [zeros(K)]), 1.0, 1.0)


def test_m2ch_sampled_lifespan():
    state = SystemState('M2CH', [_cos(0.1), _cos(0.1)])
    first = lifespan_constants('M2CH', state, 1.0, 1.0, samples=6, seed=2)
    again = lifespan_constants('M2CH', state, 1.0, 1.0, samples=6, seed=2)
    assert first == again
    assert first.L > 0
    assert first.T0 > 0
    assert first.T0 == lifespan_T0(first.L, first.M, first.R, 1.0).T0
