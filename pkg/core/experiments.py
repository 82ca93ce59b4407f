"""Time integration, radius-of-analyticity tracking and data-to-solution continuity"""


import collections
import math
import numpy as np
from . import log_utils
from .errors import ConfigurationError, IntegrationBlowUpError, InsufficientModesError
from .ovsyannikov import LadderSpec, Trajectory, ea_distance
from .spectral import product, h1_energy
from .state import SystemTag, SystemState, state_norm
from .systems import rhs_for, lifespan_constants

module_logger = log_utils.logger

# explicit RK4 is used with dt <= c / K
STABILITY_CONSTANTS = {
    SystemTag.CH: 2.0,
    SystemTag.TwoCH: 2.0,
    SystemTag.M2CH: 1.0,
    SystemTag.ThreeCH: 1.0,
}
OVERFLOW_CAP = 1e100
NOISE_FLOOR = 1e-14


def stable_dt(tag, n_modes):
    """Largest admissible step c / K of the given system"""
    c = STABILITY_CONSTANTS[SystemTag.parse(tag)]
    return math.inf if n_modes == 0 else c / n_modes


class RK4(object):
    """
    4th order Runge-Kutta time-stepping on a coefficient array.

    Parameters
    ----------
    U : numpy.ndarray
        state, updated in place by step
    rhs_func : callable
        array -> array of the same shape
    """

    def __init__(self, U, rhs_func):
        self.U = U
        self.rhs_func = rhs_func
        self._allocate_arrays()

    def step(self, dt):
        """
        Take a time-step of "dt" and update U.
        """
        self.U0[...] = self.U
        self.U1[...] = 0.0

        ki = [dt / 6, dt / 3, dt / 3]
        hi = [dt / 2, dt / 2, dt]

        for h, k in zip(hi, ki):
            rhs = self.rhs_func(self.U)
            self.U[...] = self.U0 + h * rhs
            self.U1 += k * rhs

        rhs = self.rhs_func(self.U)
        self.U[...] = self.U0 + self.U1 + (dt / 6) * rhs

    def _allocate_arrays(self):
        self.U0 = np.copy(self.U)
        self.U1 = np.zeros_like(self.U)


def integrate(system_tag, state0, dt, t_end, k_sign=1, store_every=1, check_stability=True, overflow_cap=OVERFLOW_CAP, mul=product):
    """Integrate the coefficient system x' = F(x) with classical RK4

    Arguments:
    -----------
    system_tag : SystemTag or str
    state0 : SystemState
    dt : float
        requested step, the step used is t_end / ceil(t_end / dt)
    t_end : float
    k_sign : int, optional (default : 1)
        sign of the coupling term of 2CH and M2CH
    store_every : int, optional (default : 1)
        keep every n-th state, the final state is always kept
    check_stability : bool, optional (default : True)
        reject dt above stable_dt

    Returns:
    -----------
    out : Trajectory

    Raises:
    -----------
    IntegrationBlowUpError when a coefficient stops being finite or exceeds overflow_cap,
    carrying the last valid time and the partial trajectory
    """
    tag = SystemTag.parse(system_tag)
    if state0.tag is not tag:
        raise ConfigurationError('initial data is a {0} state, expected {1}'.format(state0.tag.value, tag.value))
    if not dt > 0:
        raise ConfigurationError('dt must be > 0, got {0}'.format(dt))
    if t_end < 0:
        raise ConfigurationError('t_end must be >= 0, got {0}'.format(t_end))
    limit = stable_dt(tag, state0.n_modes)
    if check_stability and dt > limit:
        raise ConfigurationError('dt = {0} exceeds the stability bound c/K = {1:.6g} for {2} at K={3}'.format(dt, limit, tag.value, state0.n_modes))
    if t_end == 0:
        return Trajectory([0.0], [state0])

    n_steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    step = t_end / n_steps
    rhs = rhs_for(tag, k_sign, mul=mul)
    period = state0.period

    def rhs_func(array):
        return rhs(SystemState.from_array(tag, array, period)).as_array()

    stepper = RK4(state0.as_array().copy(), rhs_func)
    times, states = [0.0], [state0]
    for n in range(1, n_steps + 1):
        stepper.step(step)
        worst = np.max(np.abs(stepper.U))
        if not np.isfinite(worst) or worst > overflow_cap:
            partial = Trajectory(times, states)
            raise IntegrationBlowUpError('{0} coefficients blew up at t = {1:.6e} (last valid t = {2:.6e})'.format(
                tag.value, n * step, times[-1]), last_time=times[-1], trajectory=partial)
        if n % store_every == 0 or n == n_steps:
            times.append(n * step if n < n_steps else float(t_end))
            states.append(SystemState.from_array(tag, stepper.U, period))
    module_logger.debug('   integrated {0} steps of {1:.3e} up to t = {2}'.format(n_steps, step, t_end))
    return Trajectory(times, states)


def simulation_rows(traj, sigma, s):
    """Rows t, norm at delta = 1, H1 functional of u and mean of u"""
    rows = []
    for t, state in zip(traj.times, traj.states):
        u = state['u']
        rows.append([float(t), state_norm(state, sigma, 1.0, s).value, h1_energy(u), u.mean_mode()])
    return rows


RadiusFit = collections.namedtuple('RadiusFit', ['delta_hat', 'slope', 'residual', 'resolution_limited', 'modes_used'])


def resolution_cap(f, sigma, noise_floor=NOISE_FLOOR):
    """Largest radius visible at resolution K: ln(max |f_k| / noise_floor) / K^(1/sigma)"""
    peak = f.max_abs()
    if peak <= noise_floor or f.n_modes == 0:
        return 0.0
    return math.log(peak / noise_floor) / f.n_modes ** (1.0 / sigma)


def fit_radius(f, sigma, k_min=4, k_max=None, noise_floor=NOISE_FLOOR):
    """Least-squares fit of log|f_k| = c - delta k^(1/sigma) + slope log k over k_min <= k <= k_max

    Arguments:
    -----------
    f : SpectralField
    sigma : float
        assumed Gevrey index
    k_min : int, optional (default : 4)
    k_max : int, optional (default : n_modes)
    noise_floor : float, optional (default : 1e-14)
        modes below it are excluded

    Returns:
    -----------
    out : RadiusFit
        delta_hat >= 0; resolution_limited is set when modes of the range fall below the noise floor

    Raises:
    -----------
    InsufficientModesError with fewer than 4 usable modes
    """
    k_max = f.n_modes if k_max is None else int(k_max)
    if k_max > f.n_modes:
        raise ConfigurationError('k_max = {0} exceeds n_modes = {1}'.format(k_max, f.n_modes))
    k = np.arange(max(1, int(k_min)), k_max + 1)
    amplitude = np.abs(f.coeffs[f.n_modes + k])
    usable = amplitude >= noise_floor
    if np.count_nonzero(usable) < 4:
        raise InsufficientModesError('only {0} modes above the noise floor {1:g} in [{2}, {3}]'.format(
            np.count_nonzero(usable), noise_floor, k[0] if k.size else k_min, k_max))
    xi = np.abs(f.xi[f.n_modes + k[usable]])
    design = np.column_stack([np.ones(xi.size), -xi ** (1.0 / sigma), np.log(xi)])
    target = np.log(amplitude[usable])
    coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coef - target) ** 2)))
    return RadiusFit(max(0.0, float(coef[1])), float(coef[2]), residual, bool(not np.all(usable)), int(np.count_nonzero(usable)))


def radius_floor(t, T0, sigma, delta_init):
    """delta_init (1 - ((2^sigma - 1) t / T0)^(1/sigma)), clamped at 0"""
    if t < 0:
        raise ValueError('t must be >= 0, got {0}'.format(t))
    if not T0 > 0:
        raise ValueError('T0 must be > 0, got {0}'.format(T0))
    x = (2.0 ** sigma - 1.0) * t / T0
    if x >= 1.0:
        return 0.0
    return max(0.0, delta_init * (1.0 - x ** (1.0 / sigma)))


def estimate_state_radius(state, sigma, k_min=4, k_max=None, noise_floor=NOISE_FLOOR):
    """Smallest fitted radius over the components of a state

    Components without enough usable modes but above the noise floor contribute their
    resolution cap. Returns (delta_hat, residual, resolution_limited), with delta_hat None
    when every component is below the noise floor.
    """
    best = None
    for field in state:
        if field.max_abs() < noise_floor:
            continue
        try:
            fit = fit_radius(field, sigma, k_min, k_max, noise_floor)
            candidate = (fit.delta_hat, fit.residual, fit.resolution_limited)
        except InsufficientModesError:
            candidate = (resolution_cap(field, sigma, noise_floor), 0.0, True)
        if best is None or candidate[0] < best[0]:
            best = candidate
    if best is None:
        return None, float('nan'), False
    return best


class RadiusSeries(object):
    """Fitted radius over time with the guaranteed floor"""
    csv_header = ['t', 'delta_hat', 'delta_floor', 'residual', 'resolution_limited']

    def __init__(self, times, fitted_delta, fit_residual, sigma_assumed, resolution_limited, delta_floor=None, constants=None):
        self.times = np.asarray(times, dtype=float)
        self.fitted_delta = np.asarray(fitted_delta, dtype=float)
        self.fit_residual = np.asarray(fit_residual, dtype=float)
        self.sigma_assumed = float(sigma_assumed)
        self.resolution_limited = list(resolution_limited)
        self.delta_floor = None if delta_floor is None else np.asarray(delta_floor, dtype=float)
        self.constants = constants

    @property
    def below_noise_floor(self):
        return bool(np.all(np.isnan(self.fitted_delta)))

    def envelope_holds(self, tolerance=1e-3):
        if self.delta_floor is None or self.below_noise_floor:
            return True
        defined = ~np.isnan(self.fitted_delta)
        return bool(np.all(self.fitted_delta[defined] >= self.delta_floor[defined] - tolerance))

    def worst_gap(self):
        if self.delta_floor is None or self.below_noise_floor:
            return 0.0
        defined = ~np.isnan(self.fitted_delta)
        return float(np.min(self.fitted_delta[defined] - self.delta_floor[defined]))

    @property
    def rows(self):
        floor = self.delta_floor if self.delta_floor is not None else [float('nan')] * len(self.times)
        return [[float(t), float(d), float(f), float(r), bool(lim)]
                for t, d, f, r, lim in zip(self.times, self.fitted_delta, floor, self.fit_residual, self.resolution_limited)]


def track_radius(system_tag, state0, sigma, dt, t_end=None, fit_range=(4, None), C_s=1.0, s=2.0, k_sign=1,
                 store_every=1, noise_floor=NOISE_FLOOR, constants_kwargs=None):
    """Integrate and fit the radius at every stored time, against the floor implied by the lifespan

    Arguments:
    -----------
    system_tag : SystemTag or str
    state0 : SystemState
    sigma : float
    dt : float
    t_end : float, optional
        defaults to the certified window T0 / (2^sigma - 1)
    fit_range : tuple of int, optional (default : (4, None))
        (k_min, k_max) of fit_radius
    C_s : float, optional (default : 1)
        algebra constant used for T0

    Returns:
    -----------
    out : RadiusSeries
        fitted radii are NaN (below noise floor) for zero data
    """
    tag = SystemTag.parse(system_tag)
    k_min, k_max = fit_range
    delta_init, _, limited = estimate_state_radius(state0, sigma, k_min, k_max, noise_floor)
    if delta_init is None:
        module_logger.warning('   initial data is below the noise floor {0:g}, radius undefined'.format(noise_floor))
        nan = float('nan')
        return RadiusSeries([0.0], [nan], [nan], sigma, [False])
    if not delta_init > 0:
        raise InsufficientModesError('initial data shows no analyticity radius (fitted delta = 0)')
    if limited:
        module_logger.info('   initial radius {0:.4f} is resolution limited'.format(delta_init))
    constants = lifespan_constants(tag, state0, C_s, sigma, s=s, delta_ref=delta_init, k_sign=k_sign, **(constants_kwargs or {}))
    window = constants.T0 / (2.0 ** sigma - 1.0)
    if t_end is None:
        t_end = window
    traj = integrate(tag, state0, min(dt, t_end) if t_end > 0 else dt, t_end, k_sign=k_sign, store_every=store_every)
    fitted, residuals, flags, floors = [], [], [], []
    for t, state in zip(traj.times, traj.states):
        delta_hat, residual, flag = estimate_state_radius(state, sigma, k_min, k_max, noise_floor)
        fitted.append(float('nan') if delta_hat is None else delta_hat)
        residuals.append(residual)
        flags.append(flag)
        floors.append(radius_floor(t, constants.T0, sigma, delta_init))
    series = RadiusSeries(traj.times, fitted, residuals, sigma, flags, floors, constants)
    module_logger.info('   radius tracked over {0} times up to t = {1:.4e}, smallest margin to the floor {2:.4e}'.format(
        len(traj.times), traj.t_end, series.worst_gap()))
    return series


class ContinuityReport(object):
    csv_header = ['epsilon', 'input_dist', 'output_dist', 'ratio']

    def __init__(self, epsilons, input_dists, output_dists, T, bound=2.0, constants=None):
        self.epsilons = list(epsilons)
        self.input_dists = list(input_dists)
        self.output_dists = list(output_dists)
        self.ratios = [o / i for i, o in zip(self.input_dists, self.output_dists)]
        self.T = T
        self.bound = bound
        self.constants = constants

    def holds(self, slack=0.05):
        return all(r <= self.bound + slack for r in self.ratios)

    def max_ratio(self):
        return max(self.ratios) if self.ratios else 0.0

    @property
    def rows(self):
        return [[e, i, o, r] for e, i, o, r in zip(self.epsilons, self.input_dists, self.output_dists, self.ratios)]


def _continuity_branch(tag, state, dt, t_end, k_sign):
    return integrate(tag, state, dt, t_end, k_sign=k_sign)


def continuity_experiment(system_tag, state0, direction, epsilons, sigma, s, C_s=1.0, dt=1e-3, k_sign=1,
                          ladder_kwargs=None, min_steps=64, executor=None, constants_kwargs=None):
    """Distance between perturbed and unperturbed solutions against the initial distance

    T is the lifespan of the system with constants evaluated at ||U0||_1 + 1. Each branch
    U0 + epsilon * direction is integrated over the E_T ladder and compared with the base
    solution through ea_distance; the ratios are expected to stay below 2.

    Returns:
    -----------
    out : ContinuityReport
    """
    tag = SystemTag.parse(system_tag)
    if direction.tag is not tag or state0.tag is not tag:
        raise ConfigurationError('initial data and perturbation direction must both be {0} states'.format(tag.value))
    if any(e < 0 for e in epsilons):
        raise ConfigurationError('epsilons must be >= 0, got {0}'.format(list(epsilons)))
    if state_norm(direction, sigma, 1.0, s).value == 0:
        raise ConfigurationError('the perturbation direction is zero')
    constants = lifespan_constants(tag, state0, C_s, sigma, s=s, norm_shift=1.0, k_sign=k_sign, **(constants_kwargs or {}))
    ladder = LadderSpec.default(constants.T0, sigma, **(ladder_kwargs or {}))
    t_end = ladder.max_time()
    step = min(dt, t_end / min_steps)
    module_logger.info('   continuity window T = {0:.6e}, integration up to {1:.6e} with dt = {2:.3e}'.format(constants.T0, t_end, step))

    kept = [e for e in epsilons if e > 0]
    if len(kept) < len(epsilons):
        module_logger.info('   epsilon = 0 skipped')
    tasks = [(tag, state0, step, t_end, k_sign)] + [(tag, state0 + direction * e, step, t_end, k_sign) for e in kept]
    if executor is None:
        trajectories = [_continuity_branch(*t) for t in tasks]
    else:
        trajectories = executor.map(_continuity_branch, tasks, description='continuity branches')
    base = trajectories[0]
    inputs, outputs = [], []
    for e, traj in zip(kept, trajectories[1:]):
        inputs.append(state_norm(direction * e, sigma, 1.0, s).value)
        outputs.append(ea_distance(traj, base, ladder, s))
        module_logger.info('   epsilon {0:.1e}: ratio {1:.6f}'.format(e, outputs[-1] / inputs[-1]))
    return ContinuityReport(kept, inputs, outputs, constants.T0, constants=constants)
