"""Camassa-Holm type systems in nonlocal form

Right-hand sides of CH, 2CH, M2CH and 3CH written with the multipliers P1, P2, P3, P13
and P23, plus the lifespan constants of each system. Every product goes through ``mul``,
which defaults to the dealiased spectral product; passing ``direct_product`` evaluates
the same formula with the dense convolution.
"""


import math
import numpy as np
from . import log_utils
from .errors import TrajectoryError, UnboundedLifespanError
from .gevrey import EXPONENT_CAP, InequalityReport, sample_seed
from .ovsyannikov import lifespan_T0, random_ball_perturbation
from .spectral import MultiplierKind, apply_multiplier, product
from .state import SystemTag, SystemState, StateNorm, state_norm, state_norms, zero_state  # noqa: F401

module_logger = log_utils.logger

P1, P2, P3, P13, P23 = (MultiplierKind.P1, MultiplierKind.P2, MultiplierKind.P3, MultiplierKind.P13, MultiplierKind.P23)


def _require(state, tag):
    if not isinstance(state, SystemState) or state.tag is not tag:
        got = state.tag.value if isinstance(state, SystemState) else type(state).__name__
        raise TrajectoryError('expected a {0} state, got {1}'.format(tag.value, got))


def _ch_part(u, mul, extra=None):
    # -u P3u - P13[u^2 + (P3u)^2 / 2 + extra]
    ux = apply_multiplier(u, P3)
    inner = mul(u, u) + mul(ux, ux) * 0.5
    if extra is not None:
        inner = inner + extra
    return -mul(u, ux) - apply_multiplier(inner, P13)


def rhs_ch(state, mul=product):
    """F(u) = -u P3u - P13[u^2 + (P3u)^2 / 2]"""
    _require(state, SystemTag.CH)
    return SystemState(SystemTag.CH, [_ch_part(state['u'], mul)])


def rhs_2ch(state, k_sign=1, mul=product):
    """F1 = -u P3u - P13[u^2 + (P3u)^2 / 2 + (k/2) rho^2], F2 = -P3(u rho)"""
    _require(state, SystemTag.TwoCH)
    u, rho = state['u'], state['rho']
    f1 = _ch_part(u, mul, extra=mul(rho, rho) * (0.5 * k_sign))
    f2 = -apply_multiplier(mul(u, rho), P3)
    return SystemState(SystemTag.TwoCH, [f1, f2])


def rhs_m2ch(state, k_sign=1, mul=product):
    """Modified two-component system

    F_u = -u P3u - P13[u^2 + (P3u)^2 / 2 + (k/2) gamma^2 - (k/2) (P3 gamma)^2]
    F_gamma = -u P3gamma - P1(P3(P3u P3gamma) + P3u gamma)
    """
    _require(state, SystemTag.M2CH)
    u, gamma = state['u'], state['gamma']
    ux = apply_multiplier(u, P3)
    gx = apply_multiplier(gamma, P3)
    f_u = _ch_part(u, mul, extra=(mul(gamma, gamma) - mul(gx, gx)) * (0.5 * k_sign))
    f_gamma = -mul(u, gx) - apply_multiplier(apply_multiplier(mul(ux, gx), P3) + mul(ux, gamma), P1)
    return SystemState(SystemTag.M2CH, [f_u, f_gamma])


def b_operator(u, w, mul=product):
    """B(u, w) = P2(w P13u - u P13w) + 2 P2(P13u P1w - P1u P13w)"""
    u13, w13 = apply_multiplier(u, P13), apply_multiplier(w, P13)
    u1, w1 = apply_multiplier(u, P1), apply_multiplier(w, P1)
    return apply_multiplier(mul(w, u13) - mul(u, w13), P2) + apply_multiplier(mul(u13, w1) - mul(u1, w13), P2) * 2.0


def b_field(u, w, v, mul=product):
    """b = B(u, w) - 2 P2 v"""
    return b_operator(u, w, mul) - apply_multiplier(v, P2) * 2.0


def rhs_3ch(state, mul=product):
    """Three-component system with b eliminated through B(u, w)

    F1 = -v P13u + P3u (B - 2 P2v) + 3/2 u (P3B - 2 P23v) - 3/2 u (P13u P13w - P1u P1w)
    F2 = 2 v P3B - 4 v P23v + P3v B - 2 P3v P2v
    F3 = -v P13w + P3w (B - 2 P2v) + 3/2 w (P3B - 2 P23v) + 3/2 w (P13u P13w - P1u P1w)
    """
    _require(state, SystemTag.ThreeCH)
    u, v, w = state['u'], state['v'], state['w']
    big_b = b_operator(u, w, mul)
    b_x = apply_multiplier(big_b, P3)
    p2v, p23v = apply_multiplier(v, P2), apply_multiplier(v, P23)
    u13, w13 = apply_multiplier(u, P13), apply_multiplier(w, P13)
    u1, w1 = apply_multiplier(u, P1), apply_multiplier(w, P1)
    ux, vx, wx = apply_multiplier(u, P3), apply_multiplier(v, P3), apply_multiplier(w, P3)
    coupling = mul(u13, w13) - mul(u1, w1)
    stretch = b_x - p23v * 2.0

    f1 = -mul(v, u13) + mul(ux, big_b) - mul(ux, p2v) * 2.0 + mul(u, stretch) * 1.5 - mul(u, coupling) * 1.5
    f2 = mul(v, b_x) * 2.0 - mul(v, p23v) * 4.0 + mul(vx, big_b) - mul(vx, p2v) * 2.0
    f3 = -mul(v, w13) + mul(wx, big_b) - mul(wx, p2v) * 2.0 + mul(w, stretch) * 1.5 + mul(w, coupling) * 1.5
    return SystemState(SystemTag.ThreeCH, [f1, f2, f3])


def rhs_3ch_transport_form(state, mul=product):
    """The same system written with a = P1u, c = P1w and b = b_field(u, w, v)

    u_t = -v a_x + u_x b + 3/2 u b_x - 3/2 u (a_x c_x - a c)
    v_t = 2 v b_x + v_x b
    w_t = -v c_x + w_x b + 3/2 w b_x + 3/2 w (a_x c_x - a c)
    """
    _require(state, SystemTag.ThreeCH)
    u, v, w = state['u'], state['v'], state['w']
    a, c = apply_multiplier(u, P1), apply_multiplier(w, P1)
    b = b_field(u, w, v, mul)
    a_x, c_x, b_x = apply_multiplier(a, P3), apply_multiplier(c, P3), apply_multiplier(b, P3)
    q = mul(a_x, c_x) - mul(a, c)
    u_t = -mul(v, a_x) + mul(apply_multiplier(u, P3), b) + mul(u, b_x) * 1.5 - mul(u, q) * 1.5
    v_t = mul(v, b_x) * 2.0 + mul(apply_multiplier(v, P3), b)
    w_t = -mul(v, c_x) + mul(apply_multiplier(w, P3), b) + mul(w, b_x) * 1.5 + mul(w, q) * 1.5
    return SystemState(SystemTag.ThreeCH, [u_t, v_t, w_t])


def check_3ch_consistency(state, rhs_out=None, tolerance=1e-10, mul=product):
    """Largest coefficient gap between rhs_3ch and the transport form, relative to the output scale"""
    _require(state, SystemTag.ThreeCH)
    if rhs_out is None:
        rhs_out = rhs_3ch(state, mul=mul)
    _require(rhs_out, SystemTag.ThreeCH)
    reference = rhs_3ch_transport_form(state, mul=mul)
    gap = float(np.max(np.abs(rhs_out.as_array() - reference.as_array())))
    scale = max(1.0, reference.max_abs())
    return InequalityReport('3ch_consistency', gap, tolerance * scale, {'n_modes': state.n_modes})


def rhs_for(tag, k_sign=1, mul=product):
    """Autonomous right-hand side SystemState -> SystemState of the given system"""
    tag = SystemTag.parse(tag)
    if k_sign not in (1, -1):
        raise ValueError('k_sign must be +1 or -1, got {0}'.format(k_sign))
    if tag is SystemTag.CH:
        return lambda state: rhs_ch(state, mul=mul)
    if tag is SystemTag.TwoCH:
        return lambda state: rhs_2ch(state, k_sign=k_sign, mul=mul)
    if tag is SystemTag.M2CH:
        return lambda state: rhs_m2ch(state, k_sign=k_sign, mul=mul)
    return lambda state: rhs_3ch(state, mul=mul)


def e_sigma(sigma):
    return math.exp(-sigma) * sigma ** sigma


def three_component_coefficients(sigma):
    """(C1, C2) = (90 + 27 e_sigma, 14 + 6 e_sigma) with e_sigma = exp(-sigma) sigma^sigma"""
    e = e_sigma(sigma)
    return 90.0 + 27.0 * e, 14.0 + 6.0 * e


def estimate_lipschitz_constants(rhs, state0, sigma, s, radius, samples, seed, delta_ref=1.0, surplus_decay=0.5,
                                 delta_points=10, exponent_cap=EXPONENT_CAP):
    """Empirical (L, M) on the ladder of height delta_ref, normalised to height 1

    M is the largest ||F(u0)||_delta (delta_ref - delta)^sigma and L the largest
    ||F(u) - F(v)||_delta' (delta - delta')^sigma / ||u - v||_delta over random pairs in the
    ball of the given radius; both are divided by delta_ref^sigma.
    """
    deltas = delta_ref * np.linspace(1.0 / delta_points, 1.0, delta_points)
    normaliser = delta_ref ** sigma
    f0 = rhs(state0)
    m_hat = float(np.max(state_norms(f0, sigma, deltas[:-1], s, exponent_cap) * (delta_ref - deltas[:-1]) ** sigma)) / normaliser
    gaps = np.subtract.outer(deltas, deltas)  # gaps[j, i] = delta_j - delta_i
    l_hat = 0.0
    for i in range(samples):
        rng = np.random.default_rng(sample_seed(seed, i))
        u = state0 + random_ball_perturbation(state0, sigma, s, radius * rng.uniform(), surplus_decay, rng)
        v = state0 + random_ball_perturbation(state0, sigma, s, radius * rng.uniform(), surplus_decay, rng)
        du = state_norms(u - v, sigma, deltas, s, exponent_cap)
        d_f = state_norms(rhs(u) - rhs(v), sigma, deltas, s, exponent_cap)
        # ratio[j, i] = ||F(u) - F(v)||_{delta_i} (delta_j - delta_i)^sigma / ||u - v||_{delta_j}
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(gaps > 0, np.outer(1.0 / du, d_f) * np.clip(gaps, 0.0, None) ** sigma, 0.0)
        ratio = ratio[np.isfinite(ratio)]
        if ratio.size:
            l_hat = max(l_hat, float(np.max(ratio)))
    return l_hat / normaliser, m_hat


def lifespan_constants(system_tag, state0, C_s, sigma, s=2.0, delta_ref=1.0, norm_shift=0.0, k_sign=1,
                       samples=64, seed=0, safety_factor=1.10, exponent_cap=EXPONENT_CAP):
    """Lipschitz constant, size of F at u0, radius and lifespan of one system

    Arguments:
    -----------
    system_tag : SystemTag or str
    state0 : SystemState
        initial data, its norm N is taken at delta_ref (plus norm_shift)
    C_s : float
        algebra constant, > 0
    sigma : float
    s : float, optional (default : 2)
    delta_ref : float, optional (default : 1)
        height of the ladder, L and M are divided by delta_ref^sigma
    norm_shift : float, optional (default : 0)
        added to N, the continuity experiment evaluates the constants at N + 1
    k_sign, samples, seed, safety_factor :
        used by M2CH only, whose L and M are estimated by random sampling

    Returns:
    -----------
    out : LifespanConstants
    """
    tag = SystemTag.parse(system_tag)
    _require(state0, tag)
    if not C_s > 0:
        raise ValueError('C_s must be > 0, got {0}'.format(C_s))
    if not delta_ref > 0:
        raise ValueError('delta_ref must be > 0, got {0}'.format(delta_ref))
    norm1 = state_norm(state0, sigma, delta_ref, s, exponent_cap).value + norm_shift
    if norm1 == 0:
        raise UnboundedLifespanError('initial data has zero norm, the lifespan is unbounded')
    e = e_sigma(sigma)
    scale = delta_ref ** sigma
    n = norm1
    if tag is SystemTag.CH:
        big_l = 2.0 * C_s * (e + 2.0) * n
        big_m = C_s * (e / 2.0 + 1.0) * n * n
    elif tag is SystemTag.TwoCH:
        big_l = 4.0 * C_s * (e + 1.0) * n
        big_m = C_s * (e + 5.0) / 2.0 * n * n
    elif tag is SystemTag.ThreeCH:
        c1, c2 = three_component_coefficients(sigma)
        big_l = C_s * C_s * n * n * c1 + C_s * n * c2
        big_m = C_s * n * n * (C_s * n * (7.5 + 2.25 * e) + (4.5 + 1.5 * e))
    else:
        l_hat, m_hat = estimate_lipschitz_constants(rhs_for(tag, k_sign), state0, sigma, s, n, samples, seed,
                                                    delta_ref=delta_ref, exponent_cap=exponent_cap)
        if not l_hat > 0:
            raise UnboundedLifespanError('sampled Lipschitz constant of M2CH vanished')
        module_logger.info('   M2CH sampled constants: L = {0:.6e}, M = {1:.6e} ({2} pairs)'.format(l_hat, m_hat, samples))
        big_l, big_m = safety_factor * l_hat * scale, safety_factor * m_hat * scale
    constants = lifespan_T0(big_l / scale, big_m / scale, n, sigma, system=tag.value, C_s=float(C_s), norm1=float(n))
    module_logger.info('   {0}: N = {1:.6e}, L = {2:.6e}, M = {3:.6e}, T0 = {4:.6e}'.format(
        tag.value, n, constants.L, constants.M, constants.T0))
    return constants
