"""Batch driver of the gevreych experiments

    gevreych <subcommand> [--config PATH] [--seed N] [--out DIR] [--quiet] [--log-file PATH]

Exit codes: 0 every theorem-backed check holds, 1 a check failed, 2 configuration error.
"""


import argparse
import collections
import logging
import sys
import numpy as np
from . import log_utils
from ._version import __version__
from .config import RunConfig
from .errors import GevreyError, ConfigurationError, CertificationError, QuadratureError, UnboundedLifespanError
from .executor import Executor
from .experiments import integrate, simulation_rows, track_radius, continuity_experiment
from .gevrey import (GevreyParams, InequalityReport, sup_g_factor, check_embedding, check_derivative_estimate,
                     check_multiplier_bounds, check_product_estimates, random_gevrey_field, sample_seed,
                     save_constants, load_constants)
from .initial_data import build_field, build_state, peakon_field
from .ovsyannikov import (LadderSpec, LifespanConstants, picard_iterate, contraction_ratios, delta_tau,
                          check_scale_inequality, check_ladder_integral, admissible_window)
from .reports import get_outname, write_csv, write_reports, write_series
from .spectral import constant
from .systems import rhs_for, lifespan_constants

module_logger = log_utils.logger

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

CONTRACTION_BOUND = 0.5
FIXED_POINT_TOLERANCE = 1e-8
H1_DRIFT_WARNING = 1e-6


def _outname(config, stem, ext='csv'):
    return get_outname(config.output_dir, stem, ext=ext)


def _fail(reports):
    failing = [r for r in reports if not r.holds]
    if failing:
        first = failing[0]
        module_logger.error('   {0} of {1} checks failed, first failing check: {2} ({3!r})'.format(
            len(failing), len(reports), first.check, first))
        return EXIT_FAIL
    module_logger.info('   all {0} checks hold'.format(len(reports)))
    return EXIT_PASS


def _constants_kwargs(config):
    return {
        'samples': config.constant_samples,
        'seed': config.seed_for('lifespan'),
        'safety_factor': config.constants_safety_factor,
        'exponent_cap': config.exponent_cap,
    }


def _initial_state(config, prefix='initial'):
    return build_state(config.system_tag, config.presets(prefix), config.resolution, config.seed_for(prefix))


def _estimate_record(config, executor):
    seed = config.seed_for('estimate-constants')
    c_s, cbar_s, _ = check_product_estimates(config.sigma, config.s, config.delta, config.samples, seed,
                                             n_modes=config.resolution, surplus_decay=config.surplus_decay,
                                             exponent_cap=config.exponent_cap, executor=executor)
    return {'sigma': config.sigma, 's': config.s, 'delta': config.delta, 'n_modes': config.resolution,
            'samples': config.samples, 'seed': config.seed, 'C_s_hat': c_s, 'Cbar_s_hat': cbar_s}


def _algebra_constant(config, executor):
    """C_s from constants_file, or estimated now and written to the output directory"""
    if config.constants_file is not None:
        record = load_constants(config.constants_file)
        if record['sigma'] != config.sigma or record['s'] != config.s:
            module_logger.warning('   constants file {0} was estimated at sigma={1}, s={2}, the run uses sigma={3}, s={4}'.format(
                config.constants_file, record['sigma'], record['s'], config.sigma, config.s))
        module_logger.info('   C_s = {0:.6f} from {1}'.format(record['C_s_hat'], config.constants_file))
        return record['C_s_hat']
    module_logger.info('   no constants file, estimating C_s')
    record = _estimate_record(config, executor)
    save_constants(_outname(config, 'constants', 'json'), record)
    return record['C_s_hat']


def _write_constants(config, constants, stem):
    return write_csv(_outname(config, stem), LifespanConstants.csv_header, [constants.as_row()])


def _verify_fields(config, p, seed):
    K = config.resolution
    fields = [
        ('constant', constant(1.0, K)),
        ('cosine_pack', build_field('cosine_pack decay=1.0', K)),
        ('peakon', peakon_field(1.0, 0.0, 1.0, K)),
    ]
    for j in range(config.field_samples):
        fields.append(('random_{0}'.format(j), random_gevrey_field(p, config.surplus_decay, K, sample_seed(seed, j))))
    return fields


def _space_checks(config, sigma, s, delta, seed):
    p = GevreyParams(sigma, delta, s)
    cap = config.exponent_cap
    reports = []
    for name, f in _verify_fields(config, p, seed):
        cell = check_multiplier_bounds(f, p, faults=config.faults(), exponent_cap=cap)
        cell.append(check_embedding(f, p, p.with_delta(0.5 * delta), cap))
        cell.append(check_embedding(f, p, p.with_s(s - 1.0), cap))
        cell.append(check_embedding(f, p, GevreyParams(sigma + 1.0, delta, s), cap))
        cell.append(check_derivative_estimate(f, sigma, s, delta, 0.5 * delta, cap))
        for r in cell:
            r.context['field'] = name
        reports.extend(cell)
    return reports


def _ladder_checks(config, sigma):
    a = 1.0
    deltas = np.linspace(config.delta_grid_min, config.delta_grid_max, config.ladder_samples)
    fractions = np.linspace(0.0, config.t_fraction_max, config.ladder_samples)
    reports = []
    for delta in deltas:
        window = admissible_window(delta, a, sigma)
        for frac in fractions:
            t = float(frac * window)
            reports.append(check_scale_inequality(delta, t, a, sigma))
            reports.append(check_ladder_integral(delta, t, a, sigma, quadrature_limit=config.ladder_quadrature_limit))
            value = delta_tau(delta, t, a, sigma)
            reports.append(InequalityReport('delta_tau', value, 1.0, {'sigma': sigma, 'delta': delta, 't': t, 'a': a}, strict=True))
    return reports


def cmd_verify(config, executor):
    """Run the inequality lab over sigma_list x s_list x delta_list, one CSV per check"""
    reports = []
    seed = config.seed_for('verify')
    try:
        for sigma in config.sigma_list:
            value = sup_g_factor(sigma)
            reports.append(InequalityReport('sup_g_factor', value, value, {'sigma': sigma}))
            for s in config.s_list:
                for delta in config.delta_list:
                    reports.extend(_space_checks(config, sigma, s, delta, seed))
                c_s, cbar_s, product_reports = check_product_estimates(
                    sigma, s, config.delta, config.samples, seed, n_modes=config.resolution,
                    surplus_decay=config.surplus_decay, exponent_cap=config.exponent_cap, executor=executor)
                reports.extend(product_reports)
                reports.append(InequalityReport('constant_witness', 1.0, c_s, {'sigma': sigma, 's': s, 'delta': config.delta}))
                reports.append(InequalityReport('constant_witness', 1.0, cbar_s, {'sigma': sigma, 's': s, 'delta': config.delta}))
            reports.extend(_ladder_checks(config, sigma))
    except (CertificationError, QuadratureError) as e:
        module_logger.error('   verification aborted: {0}'.format(e))
        return EXIT_FAIL

    by_check = collections.OrderedDict()
    for r in reports:
        by_check.setdefault(r.check, []).append(r)
    for check, group in by_check.items():
        write_reports(_outname(config, 'verify_' + check), group)
    return _fail(reports)


def cmd_estimate_constants(config, executor):
    """Estimate C_s and Cbar_s at (sigma, s, delta) and persist them as JSON"""
    record = _estimate_record(config, executor)
    save_constants(_outname(config, 'constants', 'json'), record)
    if record['C_s_hat'] < 1.0 or record['Cbar_s_hat'] < 1.0:
        module_logger.error('   estimated constants below the constant-function witness 1')
        return EXIT_FAIL
    return EXIT_PASS


def cmd_picard(config, executor):
    """Picard iterates and sampled contraction factor of G on E_T0"""
    tag = config.system_tag
    state0 = _initial_state(config)
    c_s = _algebra_constant(config, executor)
    constants = lifespan_constants(tag, state0, c_s, config.sigma, s=config.s, k_sign=config.k_sign, **_constants_kwargs(config))
    _write_constants(config, constants, 'picard_constants_' + tag.value)
    ladder = LadderSpec.default(constants.T0, config.sigma, **config.ladder_kwargs())
    quadrature_dt = ladder.max_time() / config.picard_steps
    rhs = rhs_for(tag, config.k_sign)

    result = picard_iterate(rhs, state0, ladder, config.picard_iterations, quadrature_dt=quadrature_dt, s=config.s,
                            radius=constants.R, exponent_cap=config.exponent_cap)
    write_csv(_outname(config, 'picard_' + tag.value), result.csv_header, result.rows)

    ratios = contraction_ratios(rhs, state0, ladder, config.contraction_trials, config.seed_for('contraction'),
                                radius=constants.R, s=config.s, surplus_decay=config.surplus_decay,
                                time_varying=config.time_varying_trials, quadrature_dt=quadrature_dt,
                                exponent_cap=config.exponent_cap, executor=executor)
    rows = [[i, '' if r is None else r] for i, r in enumerate(ratios)]
    write_csv(_outname(config, 'contraction_' + tag.value), ['trial', 'ratio'], rows)

    context = {'sigma': config.sigma, 's': config.s}
    reports = [InequalityReport('contraction_factor', r, CONTRACTION_BOUND, context) for r in ratios if r is not None]
    reports.extend(InequalityReport('picard_residual_ratio', r, CONTRACTION_BOUND, context) for r in result.ratios())
    reports.extend(InequalityReport('picard_ball', b, constants.R, context) for b in result.ball_distances)
    reports.append(InequalityReport('picard_fixed_point', result.fixed_point_residual, FIXED_POINT_TOLERANCE, context))
    module_logger.info('   max contraction ratio {0:.6e}, fixed point residual {1:.3e}'.format(
        max([r.lhs for r in reports if r.check == 'contraction_factor'] or [0.0]), result.fixed_point_residual))
    return _fail(reports)


def _t_end(config, tag, state0, executor):
    if config.t_end_model is not None:
        return config.t_end_model
    c_s = _algebra_constant(config, executor)
    try:
        constants = lifespan_constants(tag, state0, c_s, config.sigma, s=config.s, k_sign=config.k_sign, **_constants_kwargs(config))
    except UnboundedLifespanError:
        raise ConfigurationError('t_end_model is required when the initial data has zero norm')
    return constants.T0 / (2.0 ** config.sigma - 1.0)


def cmd_simulate(config, executor):
    """Integrate the configured system and record norm, H1 functional and mean of u"""
    tag = config.system_tag
    state0 = _initial_state(config)
    t_end = _t_end(config, tag, state0, executor)
    traj = integrate(tag, state0, config.dt_model, t_end, k_sign=config.k_sign)
    rows = simulation_rows(traj, config.sigma, config.s)
    write_csv(_outname(config, 'simulate_' + tag.value), ['t', 'norm_delta1', 'h1_energy', 'mean_u'], rows)
    h1 = np.array([r[2] for r in rows])
    write_series(_outname(config, 'simulate_{0}_h1'.format(tag.value), 'dat'), traj.times, h1)
    if h1[0] > 0:
        drift = float(np.max(np.abs(h1 - h1[0])) / h1[0])
        module_logger.info('   relative H1 drift {0:.3e} up to t = {1:.6e}'.format(drift, traj.t_end))
        if tag.value == 'CH' and drift > H1_DRIFT_WARNING:
            module_logger.warning('   H1 drift {0:.3e} above {1:g}, consider a smaller dt_model'.format(drift, H1_DRIFT_WARNING))
    return EXIT_PASS


def cmd_radius(config, executor):
    """Fitted radius of analyticity over the certified window against its guaranteed floor"""
    tag = config.system_tag
    state0 = _initial_state(config)
    c_s = _algebra_constant(config, executor)
    series = track_radius(tag, state0, config.sigma, config.dt_model, t_end=config.t_end_model,
                          fit_range=(config.fit_k_min, config.fit_k_max), C_s=c_s, s=config.s, k_sign=config.k_sign,
                          noise_floor=config.noise_floor, constants_kwargs=_constants_kwargs(config))
    write_csv(_outname(config, 'radius_' + tag.value), series.csv_header, series.rows)
    if series.below_noise_floor:
        module_logger.info('   initial data below noise floor, radius undefined')
        return EXIT_PASS
    _write_constants(config, series.constants, 'radius_constants_' + tag.value)
    write_series(_outname(config, 'radius_{0}_delta'.format(tag.value), 'dat'), series.times, series.fitted_delta)
    if not series.envelope_holds(config.radius_tolerance):
        module_logger.error('   fitted radius fell below the floor by {0:.3e}'.format(-series.worst_gap()))
        return EXIT_FAIL
    return EXIT_PASS


def cmd_continuity(config, executor):
    """Ratios of solution distance on E_T to initial distance for the configured perturbations"""
    tag = config.system_tag
    state0 = _initial_state(config)
    direction = _initial_state(config, 'perturbation')
    c_s = _algebra_constant(config, executor)
    report = continuity_experiment(tag, state0, direction, config.epsilons, config.sigma, config.s, C_s=c_s,
                                   dt=config.dt_model, k_sign=config.k_sign, ladder_kwargs=config.ladder_kwargs(),
                                   executor=executor, constants_kwargs=_constants_kwargs(config))
    write_csv(_outname(config, 'continuity_' + tag.value), report.csv_header, report.rows)
    _write_constants(config, report.constants, 'continuity_constants_' + tag.value)
    if not report.holds(config.continuity_slack):
        module_logger.error('   continuity ratio {0:.6f} above {1} + {2}'.format(report.max_ratio(), report.bound, config.continuity_slack))
        return EXIT_FAIL
    module_logger.info('   largest ratio {0:.6f}'.format(report.max_ratio()))
    return EXIT_PASS


COMMANDS = collections.OrderedDict([
    ('verify', (cmd_verify, 'run the inequality lab')),
    ('estimate-constants', (cmd_estimate_constants, 'estimate the algebra constants and write them as JSON')),
    ('picard', (cmd_picard, 'Picard iterates and contraction factor')),
    ('simulate', (cmd_simulate, 'integrate the configured system')),
    ('radius', (cmd_radius, 'track the radius of analyticity')),
    ('continuity', (cmd_continuity, 'data-to-solution continuity ratios')),
])


def build_parser():
    utility_parser = argparse.ArgumentParser(add_help=False)
    utility_group = utility_parser.add_argument_group('Run options')
    utility_group.add_argument('--config', type=str, default=None, help='path to the YAML configuration file')
    utility_group.add_argument('--seed', type=int, default=None, help='override the root seed of the configuration')
    utility_group.add_argument('--out', type=str, default=None, help='override the output directory')
    utility_group.add_argument('--quiet', action='store_true', default=False, help='log warnings and errors only')
    utility_group.add_argument('--log-file', dest='log_file', type=str, default=None, help='mirror the log to this file')

    parser = argparse.ArgumentParser(prog='gevreych', description='Gevrey regularity experiments for Camassa-Holm systems')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='command', metavar='subcommand')
    subparsers.required = True
    for name, (_, help_text) in COMMANDS.items():
        subparsers.add_parser(name, parents=[utility_parser], help=help_text)
    return parser


def load_config(args):
    config = RunConfig.read_options(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.out is not None:
        overrides['output_dir'] = args.out
    if args.log_file is not None:
        overrides['log_file'] = args.log_file
    return config.update(overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.INFO
    log_utils.initialise_logger(level=level)
    try:
        config = load_config(args)
        if config.log_file:
            log_utils.initialise_logger(to_file=config.log_file, level=level)
        config.info()
        executor = Executor(workers=config.threads, progress=not args.quiet and sys.stdout.isatty())
        executor.info()
        func, _ = COMMANDS[args.command]
        module_logger.info('***** gevreych {0} {1} *****'.format(__version__, args.command))
        return func(config, executor)
    except ConfigurationError as e:
        module_logger.error('Configuration error: {0}'.format(e))
        return EXIT_CONFIG
    except GevreyError as e:
        module_logger.error('{0}: {1}'.format(type(e).__name__, e))
        return e.errno
    except ValueError as e:
        module_logger.error('Invalid argument: {0}'.format(e))
        return EXIT_CONFIG


def run():
    sys.exit(main())
