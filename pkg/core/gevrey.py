"""Sobolev-Gevrey norms on the torus and the inequality lab

The norm of f in G^delta_{sigma,s} is

    ( sum_k (1 + xi_k^2)^s exp(2 delta |xi_k|^(1/sigma)) |f_k|^2 )^(1/2)

evaluated in log space. Every check returns an InequalityReport; a failing report on
admissible input means an implementation defect, the underlying statements are theorems.
"""


import collections
import json
import math
import numpy as np
from scipy.special import logsumexp
from . import log_utils
from .errors import IncomparableParamsError, NormSaturationError, ConfigurationError, CertificationError
from .spectral import MultiplierKind, SpectralField, TWO_PI, apply_multiplier, constant, product

module_logger = log_utils.logger

EXPONENT_CAP = 700.0
REL_TOL = 1e-10
ABS_TOL = 1e-14


def within_tolerance(lhs, rhs, rel_tol=REL_TOL, abs_tol=ABS_TOL):
    return lhs <= rhs * (1.0 + rel_tol) + abs_tol


class GevreyParams(collections.namedtuple('GevreyParams', ['sigma', 'delta', 's'])):
    """Index (sigma, delta, s) of a Sobolev-Gevrey space, sigma >= 1 and delta > 0"""
    __slots__ = ()

    def __new__(cls, sigma, delta, s):
        sigma, delta, s = float(sigma), float(delta), float(s)
        if not all(np.isfinite([sigma, delta, s])):
            raise ValueError('Gevrey parameters must be finite, got sigma={0}, delta={1}, s={2}'.format(sigma, delta, s))
        if sigma < 1:
            raise ValueError('sigma must be >= 1, got {0}'.format(sigma))
        if delta <= 0:
            raise ValueError('delta must be > 0, got {0}'.format(delta))
        return super(GevreyParams, cls).__new__(cls, sigma, delta, s)

    def with_delta(self, delta):
        return GevreyParams(self.sigma, delta, self.s)

    def with_s(self, s):
        return GevreyParams(self.sigma, self.delta, s)


class InequalityReport(object):
    """Outcome of one lhs <= rhs check

    Arguments:
    -----------
    check : str
        name of the check, used in reports and error messages
    lhs, rhs : float
    context : dict, optional
        parameter record (sigma, s, delta, delta_prime, ...)
    strict : bool, optional (default : False)
        require lhs < rhs instead of the tolerant comparison
    """
    csv_header = ['check', 'sigma', 's', 'delta', 'delta_prime', 'lhs', 'rhs', 'margin', 'holds']

    def __init__(self, check, lhs, rhs, context=None, strict=False):
        self.check = check
        self.lhs = float(lhs)
        self.rhs = float(rhs)
        self.context = dict(context or {})
        self.strict = strict
        self.margin = self.rhs - self.lhs
        if strict:
            self.holds = bool(self.lhs < self.rhs)
        else:
            self.holds = bool(within_tolerance(self.lhs, self.rhs))

    def as_row(self):
        c = self.context
        return [self.check, c.get('sigma', ''), c.get('s', ''), c.get('delta', ''), c.get('delta_prime', ''),
                self.lhs, self.rhs, self.margin, self.holds]

    def __repr__(self):
        return 'InequalityReport({0}: {1:.6e} {2} {3:.6e}, holds={4})'.format(
            self.check, self.lhs, '<' if self.strict else '<=', self.rhs, self.holds)


def _log_terms(f, sigma, deltas, s, exponent_cap):
    # returns log of each summand for every delta, shape (n_delta, n_nonzero)
    c = f.coeffs
    nonzero = np.abs(c) > 0
    if not np.any(nonzero):
        return None
    xi = np.abs(f.xi[nonzero])
    log_amp = 2.0 * np.log(np.abs(c[nonzero]))
    exponent = 2.0 * np.multiply.outer(deltas, xi ** (1.0 / sigma))
    worst = float(np.max(exponent))
    if worst > exponent_cap:
        raise NormSaturationError('exponent 2*delta*|xi|^(1/sigma) = {0:.1f} exceeds the cap {1:.0f} (delta={2}, K={3})'.format(
            worst, exponent_cap, float(np.max(deltas)), f.n_modes))
    return s * np.log1p(xi * xi) + exponent + log_amp


def gevrey_norm(f, p, exponent_cap=EXPONENT_CAP):
    """Norm of f in G^delta_{sigma,s} over the retained modes

    Arguments:
    -----------
    f : SpectralField
    p : GevreyParams
    exponent_cap : float, optional (default : 700)
        largest admissible 2 delta |xi|^(1/sigma) on a nonzero mode

    Returns:
    -----------
    out : float

    Raises:
    -----------
    NormSaturationError if the weight would overflow
    """
    terms = _log_terms(f, p.sigma, np.array([p.delta]), p.s, exponent_cap)
    if terms is None:
        return 0.0
    return float(np.exp(0.5 * logsumexp(terms[0])))


def gevrey_norms(f, sigma, deltas, s, exponent_cap=EXPONENT_CAP):
    """gevrey_norm for an array of radii at once"""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    terms = _log_terms(f, sigma, deltas, s, exponent_cap)
    if terms is None:
        return np.zeros(deltas.shape)
    return np.exp(0.5 * logsumexp(terms, axis=1))


def check_embedding(f, p, p_weaker, exponent_cap=EXPONENT_CAP):
    """Check ||f||_{p_weaker} <= ||f||_p

    p_weaker must differ from p by lowering delta, lowering s or raising sigma, one at a time
    """
    changes = [p_weaker.delta != p.delta, p_weaker.s != p.s, p_weaker.sigma != p.sigma]
    if sum(changes) != 1:
        raise IncomparableParamsError('{0} and {1} must differ in exactly one index'.format(p, p_weaker))
    if changes[0] and not p_weaker.delta < p.delta:
        raise IncomparableParamsError('the weaker space needs a smaller delta: {0} vs {1}'.format(p_weaker.delta, p.delta))
    if changes[1] and not p_weaker.s < p.s:
        raise IncomparableParamsError('the weaker space needs a smaller s: {0} vs {1}'.format(p_weaker.s, p.s))
    if changes[2]:
        if not p_weaker.sigma > p.sigma:
            raise IncomparableParamsError('the weaker space needs a larger sigma: {0} vs {1}'.format(p_weaker.sigma, p.sigma))
        xi = np.abs(f.xi[np.abs(f.coeffs) > 0])
        # |xi|^(1/sigma) decreases with sigma only where |xi| >= 1
        if np.any((xi > 0) & (xi < 1)):
            raise IncomparableParamsError('sigma embedding needs |xi| >= 1 on every nonzero mode (period {0})'.format(f.period))
    lhs = gevrey_norm(f, p_weaker, exponent_cap)
    rhs = gevrey_norm(f, p, exponent_cap)
    context = {'sigma': p.sigma, 's': p.s, 'delta': p.delta, 'delta_prime': p_weaker.delta,
               'sigma_prime': p_weaker.sigma, 's_prime': p_weaker.s}
    return InequalityReport('embedding', lhs, rhs, context)


def derivative_constant(sigma, delta, delta_prime):
    return math.exp(-sigma) * sigma ** sigma / (delta - delta_prime) ** sigma


def check_derivative_estimate(f, sigma, s, delta, delta_prime, exponent_cap=EXPONENT_CAP):
    """Check ||d_x f||_{delta'} <= e^-sigma sigma^sigma (delta - delta')^-sigma ||f||_delta"""
    if not 0 < delta_prime < delta:
        raise IncomparableParamsError('need 0 < delta_prime < delta, got delta_prime={0}, delta={1}'.format(delta_prime, delta))
    lhs = gevrey_norm(apply_multiplier(f, MultiplierKind.P3), GevreyParams(sigma, delta_prime, s), exponent_cap)
    rhs = derivative_constant(sigma, delta, delta_prime) * gevrey_norm(f, GevreyParams(sigma, delta, s), exponent_cap)
    context = {'sigma': sigma, 's': s, 'delta': delta, 'delta_prime': delta_prime}
    return InequalityReport('derivative_estimate', lhs, rhs, context)


def g_factor_grid_search(sigma, points=20001):
    """Maximise g(z) = exp(-2z) z^(2 sigma) over [0, 20 sigma] on a coarse then a refined grid

    Returns:
    -----------
    out : tuple of float
        (maximum, argmax)
    """
    def log_g(z):
        with np.errstate(divide='ignore'):
            return -2.0 * z + 2.0 * sigma * np.log(z)

    z = np.linspace(0.0, 20.0 * sigma, points)
    i = int(np.argmax(log_g(z)))
    h = z[1] - z[0]
    fine = np.linspace(max(0.0, z[i] - h), z[i] + h, points)
    values = log_g(fine)
    j = int(np.argmax(values))
    return float(np.exp(values[j])), float(fine[j])


def sup_g_factor(sigma, tolerance=1e-8):
    """Closed form sup g = exp(-2 sigma) sigma^(2 sigma), confirmed by a grid search"""
    if sigma < 1:
        raise ValueError('sigma must be >= 1, got {0}'.format(sigma))
    closed = math.exp(-2.0 * sigma) * sigma ** (2.0 * sigma)
    grid_max, argmax = g_factor_grid_search(sigma)
    if abs(grid_max - closed) > tolerance:
        raise CertificationError('sup g grid search {0!r} differs from exp(-2s)s^(2s) = {1!r} at sigma={2}'.format(
            grid_max, closed, sigma), check='sup_g_factor')
    module_logger.debug('   sup g at sigma={0}: {1:.10f} (argmax {2:.6f})'.format(sigma, closed, argmax))
    return closed


def random_gevrey_field(p, surplus_decay, n_modes, seed, period=TWO_PI):
    """Random real field with amplitudes U_k exp(-(delta + surplus) |xi|^(1/sigma)) (1 + xi^2)^(-s/2 - 1)

    Arguments:
    -----------
    p : GevreyParams
    surplus_decay : float
        extra decay beyond delta, must be > 0
    n_modes : int
    seed : int or numpy.random.SeedSequence or numpy.random.Generator
    period : float, optional (default : 2 pi)

    Returns:
    -----------
    out : SpectralField
        U_k uniform on [0, 1], phases uniform, the zero mode gets a random sign
    """
    if not surplus_decay > 0:
        raise ValueError('surplus_decay must be > 0, got {0}'.format(surplus_decay))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = np.arange(0, n_modes + 1)
    xi = TWO_PI * k / period
    amplitude = rng.uniform(0.0, 1.0, size=k.size)
    amplitude *= np.exp(-(p.delta + surplus_decay) * xi ** (1.0 / p.sigma)) * (1.0 + xi * xi) ** (-p.s / 2.0 - 1.0)
    phase = np.exp(1j * rng.uniform(0.0, TWO_PI, size=k.size))
    phase[0] = 1.0 if rng.uniform() < 0.5 else -1.0
    half = amplitude * phase
    coeffs = np.concatenate([np.conj(half[:0:-1]), half])
    return SpectralField(coeffs, period=period)


def sample_seed(seed, index):
    # prefix-stable stream per sample: sample i does not depend on the total count
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + (index,))
    return np.random.SeedSequence(seed, spawn_key=(index,))


def _product_ratios(p, n_modes, surplus_decay, seed, index, exponent_cap):
    if index == 0:
        f = g = constant(1.0, n_modes)
    else:
        rng = np.random.default_rng(sample_seed(seed, index))
        f = random_gevrey_field(p, surplus_decay, n_modes, rng)
        g = random_gevrey_field(p, surplus_decay, n_modes, rng)
    fg = product(f, g)
    p_low = p.with_s(p.s - 1.0)
    algebra = gevrey_norm(fg, p, exponent_cap) / (gevrey_norm(f, p, exponent_cap) * gevrey_norm(g, p, exponent_cap))
    mixed = gevrey_norm(fg, p_low, exponent_cap) / (gevrey_norm(f, p_low, exponent_cap) * gevrey_norm(g, p, exponent_cap))
    return algebra, mixed


def check_product_estimates(sigma, s, delta, samples, seed, n_modes=128, surplus_decay=0.5,
                            exponent_cap=EXPONENT_CAP, executor=None):
    """Empirical suprema of the algebra ratios ||fg||_s/(||f||_s ||g||_s) and ||fg||_{s-1}/(||f||_{s-1} ||g||_s)

    Sample 0 is the pair f = g = 1, so both estimates are at least 1.

    Arguments:
    -----------
    sigma, s, delta : float
        space index, s > 1/2
    samples : int
        number of field pairs, including the constant witness
    seed : int
        root seed, sample i draws from SeedSequence(seed, spawn_key=(i,))
    n_modes : int, optional (default : 128)
    surplus_decay : float, optional (default : 0.5)
    executor : gevreych.executor.Executor, optional
        thread pool used to evaluate the samples

    Returns:
    -----------
    out : tuple
        (C_s_hat, Cbar_s_hat, reports), one report per sample and estimate
    """
    if not s > 0.5:
        raise ConfigurationError('product estimates need s > 1/2, got s={0}'.format(s))
    if samples < 1:
        raise ConfigurationError('samples must be >= 1, got {0}'.format(samples))
    p = GevreyParams(sigma, delta, s)
    tasks = [(p, n_modes, surplus_decay, seed, i, exponent_cap) for i in range(samples)]
    if executor is None:
        ratios = [_product_ratios(*t) for t in tasks]
    else:
        ratios = executor.map(_product_ratios, tasks, description='product estimates sigma={0} s={1}'.format(sigma, s))
    ratios = np.array(ratios, dtype=float)
    c_s_hat = float(np.max(ratios[:, 0]))
    cbar_s_hat = float(np.max(ratios[:, 1]))
    context = {'sigma': sigma, 's': s, 'delta': delta}
    reports = []
    for i, (algebra, mixed) in enumerate(ratios):
        reports.append(InequalityReport('algebra_ratio', algebra, c_s_hat, dict(context, sample=i)))
        reports.append(InequalityReport('mixed_algebra_ratio', mixed, cbar_s_hat, dict(context, sample=i)))
    module_logger.info('   C_s_hat = {0:.6f}, Cbar_s_hat = {1:.6f} over {2} samples (sigma={3}, s={4}, delta={5})'.format(
        c_s_hat, cbar_s_hat, samples, sigma, s, delta))
    return c_s_hat, cbar_s_hat, reports


def check_multiplier_bounds(f, p, faults=None, exponent_cap=EXPONENT_CAP):
    """Check the five multiplier bounds on f

    ||P1 f||_s <= ||f||_s, ||P2 f|| <= ||f||/4, ||P13 f||_s <= ||f||_{s-1},
    ||P13 f|| <= ||f||/2 and ||P23 f|| <= ||f||/4.

    faults maps a multiplier tag to a factor that scales its symbol, for fault injection.
    """
    faults = {MultiplierKind.parse(k): float(v) for k, v in (faults or {}).items()}

    def apply(m):
        return apply_multiplier(f, m, scale=faults.get(m, 1.0))

    def norm(g, q=p):
        return gevrey_norm(g, q, exponent_cap)

    context = {'sigma': p.sigma, 's': p.s, 'delta': p.delta}
    f_norm = norm(f)
    p13 = apply(MultiplierKind.P13)
    return [
        InequalityReport('P1_bound', norm(apply(MultiplierKind.P1)), f_norm, context),
        InequalityReport('P2_bound', norm(apply(MultiplierKind.P2)), 0.25 * f_norm, context),
        InequalityReport('P13_sobolev_bound', norm(p13), norm(f, p.with_s(p.s - 1.0)), context),
        InequalityReport('P13_bound', norm(p13), 0.5 * f_norm, context),
        InequalityReport('P23_bound', norm(apply(MultiplierKind.P23)), 0.25 * f_norm, context),
    ]


CONSTANTS_KEYS = ('sigma', 's', 'delta', 'n_modes', 'samples', 'seed', 'C_s_hat', 'Cbar_s_hat')


def save_constants(filename, record):
    missing = [k for k in CONSTANTS_KEYS if k not in record]
    if missing:
        raise ValueError('constants record is missing {0}'.format(missing))
    with open(filename, 'w') as fp:
        json.dump({k: record[k] for k in CONSTANTS_KEYS}, fp, sort_keys=True, indent=1)
        fp.write('\n')
    module_logger.info('   constants written to {0}'.format(filename))
    return filename


def load_constants(filename):
    try:
        with open(filename, 'r') as fp:
            record = json.load(fp)
    except (OSError, ValueError) as e:
        raise ConfigurationError('cannot read constants file {0}: {1}'.format(filename, e))
    missing = [k for k in CONSTANTS_KEYS if k not in record]
    if missing:
        raise ConfigurationError('constants file {0} is missing {1}'.format(filename, missing))
    return record
