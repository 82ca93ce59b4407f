"""Ovsyannikov fixed-point frame on the scale of Gevrey spaces

Ladder geometry, the weighted E_a norm over sampled (t, delta) points, the Picard
operator G(u)(t) = u0 + int_0^t F(u(tau)) dtau, the lifespan formula and the
empirical contraction factor of G.
"""


import collections
import math
import warnings
import numpy as np
from scipy.integrate import quad, cumulative_simpson, IntegrationWarning
from . import log_utils
from .errors import WindowError, QuadratureError, TrajectoryError, CertificationError
from .gevrey import EXPONENT_CAP, GevreyParams, InequalityReport, random_gevrey_field, sample_seed
from .state import SystemState, state_norm, state_norms

module_logger = log_utils.logger


class LadderSpec(object):
    """Sampled (t, delta) domain of the E_a norm

    Arguments:
    -----------
    a : float
        scale time, > 0
    sigma : float
        Gevrey index, >= 1
    delta_grid : sequence of float
        increasing radii in (0, 1)
    t_fraction_grid : sequence of float
        increasing fractions in [0, 1) of the window a (1 - delta)^sigma / (2^sigma - 1)
    """

    def __init__(self, a, sigma, delta_grid, t_fraction_grid):
        a, sigma = float(a), float(sigma)
        if not (np.isfinite(a) and a > 0):
            raise ValueError('a must be a positive number, got {0}'.format(a))
        if sigma < 1:
            raise ValueError('sigma must be >= 1, got {0}'.format(sigma))
        delta_grid = np.asarray(delta_grid, dtype=float)
        t_fraction_grid = np.asarray(t_fraction_grid, dtype=float)
        if delta_grid.size == 0 or np.any(delta_grid <= 0) or np.any(delta_grid >= 1) or np.any(np.diff(delta_grid) <= 0):
            raise ValueError('delta_grid must be increasing inside (0, 1)')
        if t_fraction_grid.size == 0 or np.any(t_fraction_grid < 0) or np.any(t_fraction_grid >= 1) or np.any(np.diff(t_fraction_grid) <= 0):
            raise ValueError('t_fraction_grid must be increasing inside [0, 1)')
        self.a = a
        self.sigma = sigma
        self.delta_grid = delta_grid
        self.t_fraction_grid = t_fraction_grid

    @classmethod
    def default(cls, a, sigma, delta_points=32, delta_min=0.02, delta_max=0.98, t_points=16, t_max=0.95):
        """Chebyshev-Lobatto radii in [delta_min, delta_max] and equispaced time fractions in [0, t_max]"""
        j = np.arange(delta_points)
        if delta_points > 1:
            deltas = 0.5 * (delta_min + delta_max) - 0.5 * (delta_max - delta_min) * np.cos(np.pi * j / (delta_points - 1))
        else:
            deltas = np.array([0.5 * (delta_min + delta_max)])
        return cls(a, sigma, deltas, np.linspace(0.0, t_max, t_points))

    def with_scale(self, a):
        return LadderSpec(a, self.sigma, self.delta_grid, self.t_fraction_grid)

    def window(self, delta):
        return admissible_window(delta, self.a, self.sigma)

    def max_time(self):
        return float(self.window(self.delta_grid[0]) * self.t_fraction_grid[-1])

    def sample_points(self):
        for delta in self.delta_grid:
            w = self.window(delta)
            for frac in self.t_fraction_grid:
                yield float(frac * w), float(delta)

    def __repr__(self):
        return 'LadderSpec(a={0:.6g}, sigma={1}, {2} radii, {3} time fractions)'.format(
            self.a, self.sigma, self.delta_grid.size, self.t_fraction_grid.size)


def admissible_window(delta, a, sigma):
    return a * (1.0 - delta) ** sigma / (2.0 ** sigma - 1.0)


class Trajectory(object):
    """Time-stamped states of one system, linearly interpolated between nodes

    Arguments:
    -----------
    times : sequence of float
        increasing, starting at 0
    states : sequence of SystemState
        one per time, all with the same tag
    ladder : LadderSpec, optional
    """

    def __init__(self, times, states, ladder=None):
        times = np.asarray(times, dtype=float)
        states = list(states)
        if times.ndim != 1 or times.size == 0 or times.size != len(states):
            raise TrajectoryError('need one state per time, got {0} times and {1} states'.format(times.size, len(states)))
        if times[0] != 0.0:
            raise TrajectoryError('trajectories start at t = 0, got {0}'.format(times[0]))
        if np.any(np.diff(times) <= 0):
            raise TrajectoryError('times must be increasing')
        tag = states[0].tag
        if any(s.tag is not tag for s in states):
            raise TrajectoryError('all states of a trajectory must share one system tag')
        self.times = times
        self.states = states
        self.ladder = ladder
        self._arrays = np.stack([s.as_array() for s in states])

    @classmethod
    def from_arrays(cls, tag, times, arrays, period, ladder=None):
        return cls(times, [SystemState.from_array(tag, a, period) for a in arrays], ladder)

    @classmethod
    def constant(cls, state, t_end, ladder=None):
        if t_end <= 0:
            return cls([0.0], [state], ladder)
        return cls([0.0, float(t_end)], [state, state], ladder)

    @property
    def tag(self):
        return self.states[0].tag

    @property
    def t_end(self):
        return float(self.times[-1])

    @property
    def arrays(self):
        return self._arrays

    def __len__(self):
        return len(self.states)

    def state_at(self, t):
        if t < 0 or t > self.t_end * (1.0 + 1e-12) + 1e-300:
            raise TrajectoryError('t = {0} is outside the trajectory [0, {1}]'.format(t, self.t_end))
        i = int(np.searchsorted(self.times, t, side='right')) - 1
        if i >= len(self.times) - 1:
            return self.states[-1]
        t0, t1 = self.times[i], self.times[i + 1]
        if t == t0:
            return self.states[i]
        w = (t - t0) / (t1 - t0)
        array = (1.0 - w) * self._arrays[i] + w * self._arrays[i + 1]
        return SystemState.from_array(self.tag, array, self.states[0].period)

    def max_abs(self):
        return float(np.max(np.abs(self._arrays)))


def _ea_sup(state_at, t_end, ladder, s, exponent_cap):
    sigma = ladder.sigma
    best = 0.0
    for delta in ladder.delta_grid:
        scale = ladder.a * (1.0 - delta) ** sigma
        for frac in ladder.t_fraction_grid:
            t = frac * ladder.window(delta)
            if t > t_end * (1.0 + 1e-12):
                raise TrajectoryError('trajectory ends at t = {0} but the ladder samples t = {1}'.format(t_end, t))
            norm = state_norms(state_at(t), sigma, delta, s, exponent_cap)[0]
            best = max(best, norm * (1.0 - delta) ** sigma * math.sqrt(max(0.0, 1.0 - t / scale)))
    return float(best)


def ea_norm(traj, ladder, s, exponent_cap=EXPONENT_CAP):
    """max over the ladder samples of ||u(t)||_delta (1 - delta)^sigma sqrt(1 - t / (a (1 - delta)^sigma))

    Arguments:
    -----------
    traj : Trajectory
    ladder : LadderSpec
    s : float
        Sobolev index, component offsets of the system are applied on top

    Returns:
    -----------
    out : float
        a lower bound of the supremum over the open domain
    """
    return _ea_sup(traj.state_at, traj.t_end, ladder, s, exponent_cap)


def ea_distance(traj_a, traj_b, ladder, s, exponent_cap=EXPONENT_CAP):
    """E_a norm of traj_a - traj_b, both interpolated at the ladder samples"""
    if traj_a.tag is not traj_b.tag:
        raise TrajectoryError('cannot compare trajectories of {0} and {1}'.format(traj_a.tag.value, traj_b.tag.value))
    t_end = min(traj_a.t_end, traj_b.t_end)
    return _ea_sup(lambda t: traj_a.state_at(t) - traj_b.state_at(t), t_end, ladder, s, exponent_cap)


def _check_window(delta, t, a, sigma, name='t'):
    if not 0 <= delta < 1:
        raise WindowError('delta must lie in [0, 1), got {0}'.format(delta))
    if a <= 0 or sigma < 1:
        raise WindowError('need a > 0 and sigma >= 1, got a={0}, sigma={1}'.format(a, sigma))
    w = admissible_window(delta, a, sigma)
    if not 0 <= t < w:
        raise WindowError('{0} = {1} is outside the admissible window [0, {2})'.format(name, t, w))


def _delta_tau(delta, tau, a, sigma):
    base = (1.0 - delta) ** sigma
    return 0.5 * (1.0 + delta) + 0.5 ** (2.0 + 1.0 / sigma) * (
        max(0.0, base - tau / a) ** (1.0 / sigma) - (base + (2.0 ** (sigma + 1.0) - 1.0) * tau / a) ** (1.0 / sigma))


def delta_tau(delta, tau, a, sigma):
    """Intermediate radius delta(tau), strictly between delta and 1 inside the window"""
    _check_window(delta, tau, a, sigma, name='tau')
    value = _delta_tau(delta, tau, a, sigma)
    if not delta < value < 1:
        raise CertificationError('delta(tau) = {0!r} left ({1}, 1) at tau={2}, a={3}, sigma={4}'.format(value, delta, tau, a, sigma),
                                 check='delta_tau')
    return value


def check_scale_inequality(delta, t, a, sigma):
    """Strict check of 1 - delta > 2^-(1+1/sigma) {[(1-delta)^sigma - t/a]^(1/sigma) + [(1-delta)^sigma + (2^(sigma+1)-1) t/a]^(1/sigma)}"""
    _check_window(delta, t, a, sigma)
    base = (1.0 - delta) ** sigma
    lhs = 0.5 ** (1.0 + 1.0 / sigma) * ((base - t / a) ** (1.0 / sigma) + (base + (2.0 ** (sigma + 1.0) - 1.0) * t / a) ** (1.0 / sigma))
    context = {'sigma': sigma, 'delta': delta, 't': t, 'a': a}
    return InequalityReport('scale_inequality', lhs, 1.0 - delta, context, strict=True)


def ladder_integral_bound(delta, t, a, sigma):
    scale = a * (1.0 - delta) ** sigma
    return a * 2.0 ** (2.0 * sigma + 3.0) / (1.0 - delta) ** sigma * math.sqrt(scale / (scale - t))


def check_ladder_integral(delta, t, a, sigma, quadrature_limit=200, rel_error=1e-6):
    """Integral of the E_a envelope against the intermediate-radius bound

    The integrand 1 / ((delta(tau) - delta)^sigma (1 - delta(tau))^sigma sqrt(1 - tau / (a (1 - delta(tau))^sigma)))
    is integrated on [0, 0.99 t] directly and on [0.99 t, t] through tau = t (1 - u^2).

    Raises:
    -----------
    QuadratureError if the error estimate exceeds rel_error of the value
    """
    _check_window(delta, t, a, sigma)
    bound = ladder_integral_bound(delta, t, a, sigma)
    context = {'sigma': sigma, 'delta': delta, 't': t, 'a': a}
    if t == 0:
        return InequalityReport('ladder_integral', 0.0, bound, context)

    def integrand(tau):
        d = _delta_tau(delta, tau, a, sigma)
        return 1.0 / ((d - delta) ** sigma * (1.0 - d) ** sigma * math.sqrt(1.0 - tau / (a * (1.0 - d) ** sigma)))

    def tail(u):
        return integrand(t * (1.0 - u * u)) * 2.0 * t * u

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', IntegrationWarning)
        try:
            head, head_err = quad(integrand, 0.0, 0.99 * t, limit=quadrature_limit, epsabs=0.0, epsrel=1e-10)
            rest, rest_err = quad(tail, 0.0, 0.1, limit=quadrature_limit, epsabs=0.0, epsrel=1e-10)
        except (ValueError, ZeroDivisionError) as e:
            raise QuadratureError('ladder integral failed at delta={0}, t={1}, a={2}, sigma={3}: {4}'.format(delta, t, a, sigma, e))
    value = head + rest
    error = head_err + rest_err
    if not np.isfinite(value) or error > rel_error * abs(value):
        raise QuadratureError('ladder integral did not converge at delta={0}, t={1}, a={2}, sigma={3}: value {4!r}, error {5!r}'.format(
            delta, t, a, sigma, value, error))
    context['quadrature_error'] = error
    return InequalityReport('ladder_integral', value, bound, context)


def time_grid(ladder, quadrature_dt=None):
    """Even number of uniform steps covering the largest sampled time, dt defaults to max_time / 256"""
    t_max = ladder.max_time()
    if t_max <= 0:
        return np.array([0.0])
    dt = quadrature_dt if quadrature_dt else t_max / 256.0
    n = max(2, int(math.ceil(t_max / dt - 1e-9)))
    n += n % 2
    return np.linspace(0.0, t_max, n + 1)


def picard_operator(rhs, u0, traj):
    """G(u)(t) = u0 + int_0^t F(u(tau)) dtau on the nodes of traj, by composite Simpson"""
    if traj.tag is not u0.tag:
        raise TrajectoryError('u0 is a {0} state but the trajectory holds {1}'.format(u0.tag.value, traj.tag.value))
    base = u0.as_array()
    if len(traj) == 1:
        return Trajectory.from_arrays(u0.tag, traj.times, [base], u0.period, traj.ladder)
    values = np.stack([rhs(state).as_array() for state in traj.states])
    integral = cumulative_simpson(values.real, x=traj.times, axis=0, initial=0.0) \
        + 1j * cumulative_simpson(values.imag, x=traj.times, axis=0, initial=0.0)
    return Trajectory.from_arrays(u0.tag, traj.times, base[None] + integral, u0.period, traj.ladder)


class PicardResult(object):
    csv_header = ['iter', 'residual_Ea', 'ball_distance', 'max_coeff']

    def __init__(self, trajectories, residuals, ball_distances, max_coeffs, radius=None):
        self.trajectories = trajectories
        self.residuals = residuals
        self.ball_distances = ball_distances
        self.max_coeffs = max_coeffs
        self.radius = radius

    @property
    def rows(self):
        return [[n + 1, r, b, m] for n, (r, b, m) in enumerate(zip(self.residuals, self.ball_distances, self.max_coeffs))]

    @property
    def fixed_point_residual(self):
        return self.residuals[-1]

    def ratios(self, floor=1e-13):
        # successive residual ratios, skipping steps that start at round-off level
        return [b / a for a, b in zip(self.residuals[:-1], self.residuals[1:]) if a > floor]

    def left_ball(self):
        return self.radius is not None and any(b > self.radius for b in self.ball_distances)


def picard_iterate(rhs, u0, ladder, iterations, quadrature_dt=None, s=2.0, radius=None, exponent_cap=EXPONENT_CAP):
    """Picard iterates u^{n+1} = G(u^n) starting from u^0(t) = u0

    Arguments:
    -----------
    rhs : callable
        autonomous right-hand side, SystemState -> SystemState
    u0 : SystemState
    ladder : LadderSpec
    iterations : int
        number of applications of G, >= 1
    quadrature_dt : float, optional
        Simpson step, defaults to max_time / 256
    s : float, optional (default : 2)
    radius : float, optional
        ball radius around u0, iterates further away are reported

    Returns:
    -----------
    out : PicardResult
        iterates, E_a residuals between successive iterates, E_a distances to u0 and max coefficients
    """
    if iterations < 1:
        raise ValueError('iterations must be >= 1, got {0}'.format(iterations))
    times = time_grid(ladder, quadrature_dt)
    start = Trajectory.from_arrays(u0.tag, times, np.repeat(u0.as_array()[None], times.size, axis=0), u0.period, ladder)
    trajectories = [start]
    residuals, ball_distances, max_coeffs = [], [], []
    module_logger.info('   Picard iteration on {0} nodes up to t = {1:.6e} ({2})'.format(times.size, times[-1], ladder))
    for n in range(iterations):
        new = picard_operator(rhs, u0, trajectories[-1])
        residuals.append(ea_distance(new, trajectories[-1], ladder, s, exponent_cap))
        ball_distances.append(ea_distance(new, start, ladder, s, exponent_cap))
        max_coeffs.append(new.max_abs())
        trajectories.append(new)
        module_logger.info('   iter {0:3d}: residual {1:.3e}, distance to u0 {2:.3e}'.format(n + 1, residuals[-1], ball_distances[-1]))
        if radius is not None and ball_distances[-1] > radius:
            module_logger.warning('   iterate {0} left the ball of radius {1:.3e} around u0 (distance {2:.3e})'.format(
                n + 1, radius, ball_distances[-1]))
    return PicardResult(trajectories, residuals, ball_distances, max_coeffs, radius)


_LIFESPAN_FIELDS = ['L', 'M', 'R', 'sigma', 'T0', 'system', 'C_s', 'norm1']


class LifespanConstants(collections.namedtuple('LifespanConstants', _LIFESPAN_FIELDS, defaults=(None, None, None))):
    """Lipschitz constant L, size M of F at u0, ball radius R and lifespan T0"""
    __slots__ = ()
    csv_header = ['system', 'sigma', 'Cs', 'norm1', 'L', 'M', 'R', 'T0']

    @property
    def first_branch(self):
        return 1.0 / (2.0 ** (2.0 * self.sigma + 4.0) * self.L)

    def as_row(self):
        return [self.system or '', self.sigma, self.C_s if self.C_s is not None else '', self.norm1 if self.norm1 is not None else '',
                self.L, self.M, self.R, self.T0]


def lifespan_T0(L, M, R, sigma, **extras):
    """T0 = min{1 / (2^(2 sigma + 4) L), (2^sigma - 1) R / ((2^sigma - 1) 2^(2 sigma + 3) L R + M)}"""
    if not L > 0:
        raise ValueError('L must be > 0, got {0}'.format(L))
    if not R > 0:
        raise ValueError('R must be > 0, got {0}'.format(R))
    if not M >= 0:
        raise ValueError('M must be >= 0, got {0}'.format(M))
    c = 2.0 ** sigma - 1.0
    t0 = min(1.0 / (2.0 ** (2.0 * sigma + 4.0) * L), c * R / (c * 2.0 ** (2.0 * sigma + 3.0) * L * R + M))
    return LifespanConstants(float(L), float(M), float(R), float(sigma), float(t0), **extras)


def random_ball_perturbation(u0, sigma, s, size, surplus_decay, rng):
    params = [GevreyParams(sigma, 1.0, si) for si in u0.s_indices(s)]
    p = SystemState(u0.tag, [random_gevrey_field(q, surplus_decay, u0.n_modes, rng, period=u0.period) for q in params])
    norm = state_norm(p, sigma, 1.0, s).value
    if norm == 0:
        return p
    return p * (size / norm)


def _contraction_trial(rhs, u0, ladder, seed, index, radius, s, surplus_decay, time_varying, quadrature_dt, exponent_cap):
    rng = np.random.default_rng(sample_seed(seed, index))
    sigma = ladder.sigma
    p = random_ball_perturbation(u0, sigma, s, radius * rng.uniform(), surplus_decay, rng)
    q = random_ball_perturbation(u0, sigma, s, radius * rng.uniform(), surplus_decay, rng)
    t_end = ladder.max_time()
    if not time_varying:
        if p == q:
            return None
        u, v = u0 + p, u0 + q
        traj_u, traj_v = Trajectory.constant(u, t_end, ladder), Trajectory.constant(v, t_end, ladder)
        # G is affine in t on constant trajectories, two nodes interpolate it exactly
        g_u = Trajectory([0.0, t_end], [u0, u0 + rhs(u) * t_end], ladder)
        g_v = Trajectory([0.0, t_end], [u0, u0 + rhs(v) * t_end], ladder)
    else:
        p2 = random_ball_perturbation(u0, sigma, s, radius * rng.uniform(), surplus_decay, rng)
        q2 = random_ball_perturbation(u0, sigma, s, radius * rng.uniform(), surplus_decay, rng)
        times = time_grid(ladder, quadrature_dt)
        # convex combinations of two perturbations stay inside the ball
        traj_u = Trajectory(times, [u0 + p * (1.0 - w) + p2 * w for w in 0.5 * times / t_end], ladder)
        traj_v = Trajectory(times, [u0 + q * (1.0 - w) + q2 * w for w in 0.5 * times / t_end], ladder)
        g_u, g_v = picard_operator(rhs, u0, traj_u), picard_operator(rhs, u0, traj_v)
    denominator = ea_distance(traj_u, traj_v, ladder, s, exponent_cap)
    if denominator == 0:
        return None
    return ea_distance(g_u, g_v, ladder, s, exponent_cap) / denominator


def contraction_ratios(rhs, u0, ladder, trials, seed, radius=None, s=2.0, surplus_decay=0.5, time_varying=False,
                       quadrature_dt=None, exponent_cap=EXPONENT_CAP, executor=None):
    """Ratio ||G(u) - G(v)||_Ea / ||u - v||_Ea for each trial pair inside B(u0, R)

    Degenerate pairs come back as None. radius defaults to ||u0|| at delta = 1, or 1 for u0 = 0.
    """
    if trials < 1:
        raise ValueError('trials must be >= 1, got {0}'.format(trials))
    if radius is None:
        radius = state_norm(u0, ladder.sigma, 1.0, s).value or 1.0
    tasks = [(rhs, u0, ladder, seed, i, radius, s, surplus_decay, time_varying, quadrature_dt, exponent_cap) for i in range(trials)]
    if executor is None:
        return [_contraction_trial(*t) for t in tasks]
    return executor.map(_contraction_trial, tasks, description='contraction trials')


def contraction_factor(rhs, u0, ladder, trials, seed, **kwargs):
    """Largest sampled contraction ratio of the Picard operator, see contraction_ratios"""
    ratios = [r for r in contraction_ratios(rhs, u0, ladder, trials, seed, **kwargs) if r is not None]
    skipped = trials - len(ratios)
    if skipped:
        module_logger.warning('   {0} degenerate trial pairs skipped'.format(skipped))
    factor = max(ratios) if ratios else 0.0
    module_logger.info('   contraction factor {0:.6e} over {1} trials at a = {2:.6e}'.format(factor, len(ratios), ladder.a))
    return float(factor)
