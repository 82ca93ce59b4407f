"""Run configuration

A run is described by a flat YAML mapping. Every key is declared in RunConfig.supported_tags
with its kind, default and admissible range; unknown keys and out-of-range values raise
ConfigurationError. Times are model time, hence the _model suffix of dt_model and t_end_model.
"""


import collections
import copy
import os
import zlib
import numpy as np
import yaml
from . import log_utils
from .errors import ConfigurationError
from .spectral import MultiplierKind
from .state import SystemTag

module_logger = log_utils.logger

Tag = collections.namedtuple('Tag', ['kind', 'default', 'low', 'high', 'choices', 'nullable'])


def _tag(kind, default, low=None, high=None, choices=None, nullable=False):
    return Tag(kind, default, low, high, choices, nullable)


_SYSTEMS = tuple(t.value for t in SystemTag)
_SYMBOLS = tuple(m.value for m in MultiplierKind)


class RunConfig(object):
    # kind, default, inclusive range, accepted values
    supported_tags = collections.OrderedDict([
        ('resolution', _tag('int', 128, 2, 8192)),
        ('sigma', _tag('float', 1.0, 1.0)),
        ('sigma_list', _tag('floats', [1.0, 2.0], 1.0)),
        ('s', _tag('float', 2.0, 0.5)),
        ('s_list', _tag('floats', [1.0, 2.0, 3.0], 0.5)),
        ('delta', _tag('float', 0.5, 0.0)),
        ('delta_list', _tag('floats', [0.25, 0.5, 1.0], 0.0)),
        ('delta_grid_points', _tag('int', 32, 1, 1024)),
        ('delta_grid_min', _tag('float', 0.02, 0.0, 1.0)),
        ('delta_grid_max', _tag('float', 0.98, 0.0, 1.0)),
        ('t_fraction_points', _tag('int', 16, 1, 1024)),
        ('t_fraction_max', _tag('float', 0.95, 0.0, 1.0)),
        ('system', _tag('choice', 'CH', choices=_SYSTEMS)),
        ('k_sign', _tag('choice', 1, choices=(1, -1))),
        ('initial_u', _tag('preset', 'cosine amp=0.1')),
        ('initial_rho', _tag('preset', 'zero')),
        ('initial_gamma', _tag('preset', 'zero')),
        ('initial_v', _tag('preset', 'zero')),
        ('initial_w', _tag('preset', 'zero')),
        ('perturbation_u', _tag('preset', 'cosine')),
        ('perturbation_rho', _tag('preset', 'zero')),
        ('perturbation_gamma', _tag('preset', 'zero')),
        ('perturbation_v', _tag('preset', 'zero')),
        ('perturbation_w', _tag('preset', 'zero')),
        ('epsilons', _tag('floats', [1e-2, 1e-3, 1e-4], 0.0)),
        ('seed', _tag('int', 0, 0)),
        ('samples', _tag('int', 64, 1)),
        ('constant_samples', _tag('int', 64, 1)),
        ('surplus_decay', _tag('float', 0.5, 0.0)),
        ('dt_model', _tag('float', 1e-3, 0.0)),
        ('t_end_model', _tag('float', None, 0.0, nullable=True)),
        ('picard_iterations', _tag('int', 8, 1, 1000)),
        ('picard_steps', _tag('int', 256, 2)),
        ('contraction_trials', _tag('int', 32, 1)),
        ('time_varying_trials', _tag('bool', False)),
        ('field_samples', _tag('int', 4, 0)),
        ('ladder_samples', _tag('int', 8, 1)),
        ('ladder_quadrature_limit', _tag('int', 200, 10)),
        ('constants_file', _tag('str', None, nullable=True)),
        ('constants_safety_factor', _tag('float', 1.10, 1.0)),
        ('exponent_cap', _tag('float', 700.0, 1.0, 709.0)),
        ('noise_floor', _tag('float', 1e-14, 0.0)),
        ('fit_k_min', _tag('int', 4, 1)),
        ('fit_k_max', _tag('int', None, 4, nullable=True)),
        ('radius_tolerance', _tag('float', 1e-3, 0.0)),
        ('continuity_slack', _tag('float', 0.05, 0.0)),
        ('output_dir', _tag('str', 'gevreych_output')),
        ('corrupt_symbol', _tag('choice', None, choices=_SYMBOLS, nullable=True)),
        ('corrupt_factor', _tag('float', 1.0, 0.0)),
        ('threads', _tag('int', None, 1, nullable=True)),
        ('log_file', _tag('str', None, nullable=True)),
    ])

    # values that must be strictly above their lower bound
    _strict_low = ('delta', 'delta_list', 'delta_grid_min', 'surplus_decay', 'dt_model', 'noise_floor', 'corrupt_factor', 's', 's_list')

    def __init__(self, options=None, filename=None):
        """Typed run configuration

        Arguments:
        -----------
        options : dict, optional
            values overriding the defaults of supported_tags
        filename : str, optional
            source of the options, only used in messages

        Returns:
        -----------
        out : RunConfig
        """
        self.filename = filename
        self.options = {k: copy.deepcopy(t.default) for k, t in self.supported_tags.items()}
        if options:
            self.update(options)

    @classmethod
    def read_options(cls, filename):
        # load the config file
        if not os.path.isfile(filename):
            raise ConfigurationError('The configuration file {0} is missing'.format(filename))
        module_logger.info('   Reading options from {0}'.format(os.path.abspath(filename)))
        try:
            with open(filename) as fp:
                options = yaml.load(fp, Loader=yaml.FullLoader)
        except yaml.YAMLError as e:
            raise ConfigurationError('The configuration file {0} is not valid YAML: {1}'.format(filename, e))
        if options is None:
            options = {}
        if not isinstance(options, dict):
            raise ConfigurationError('The configuration file {0} must hold a flat mapping of options'.format(filename))
        return cls(options, filename)

    def update(self, options):
        # check for invalid tags
        for k in options.keys():
            if k not in self.supported_tags:
                raise ConfigurationError("The tag '{0}' is not supported".format(k))
        for k, v in options.items():
            self.options[k] = self._validate(k, v)
        if self.options['delta_grid_min'] >= self.options['delta_grid_max']:
            raise ConfigurationError('delta_grid_min must be below delta_grid_max')
        return self

    def _validate(self, key, value):
        tag = self.supported_tags[key]
        if value is None:
            if tag.nullable:
                return None
            raise ConfigurationError("The tag '{0}' cannot be empty".format(key))
        if tag.kind == 'floats':
            if not isinstance(value, (list, tuple)):
                value = [value]
            if len(value) == 0:
                raise ConfigurationError("The tag '{0}' needs at least one value".format(key))
            return [self._number(key, v, float, tag) for v in value]
        if tag.kind == 'int':
            return self._number(key, value, int, tag)
        if tag.kind == 'float':
            return self._number(key, value, float, tag)
        if tag.kind == 'bool':
            if not isinstance(value, bool):
                raise ConfigurationError("The tag '{0}' must be true or false, got {1!r}".format(key, value))
            return value
        if tag.kind == 'choice':
            if value not in tag.choices:
                raise ConfigurationError("The tag '{0}' must be one of {1}, got {2!r}".format(key, list(tag.choices), value))
            return value
        if tag.kind == 'preset':
            if not isinstance(value, (str, list)):
                raise ConfigurationError("The tag '{0}' must be a preset string or a list of modes".format(key))
            return value
        if not isinstance(value, str):
            raise ConfigurationError("The tag '{0}' must be a string, got {1!r}".format(key, value))
        return value

    def _number(self, key, value, kind, tag):
        # YAML 1.1 reads 1e-3 (no dot) as a string
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                raise ConfigurationError("The tag '{0}' must be numeric, got {1!r}".format(key, value))
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError("The tag '{0}' must be numeric, got {1!r}".format(key, value))
        if kind is int and value != int(value):
            raise ConfigurationError("The tag '{0}' must be an integer, got {1!r}".format(key, value))
        value = kind(value)
        if not np.isfinite(value):
            raise ConfigurationError("The tag '{0}' must be finite".format(key))
        if tag.low is not None:
            if value < tag.low or (key in self._strict_low and value == tag.low):
                raise ConfigurationError("The tag '{0}' is below its admissible range ({1}): {2!r}".format(key, tag.low, value))
        if tag.high is not None and value > tag.high:
            raise ConfigurationError("The tag '{0}' is above its admissible range ({1}): {2!r}".format(key, tag.high, value))
        return value

    def __getattr__(self, key):
        options = self.__dict__.get('options', {})
        if key in options:
            return options[key]
        raise AttributeError(key)

    def __getitem__(self, key):
        return self.options[key]

    def as_dict(self):
        return copy.deepcopy(self.options)

    @property
    def system_tag(self):
        return SystemTag.parse(self.options['system'])

    def presets(self, prefix='initial'):
        """Preset of each component of the configured system, keyed by component name"""
        return {name: self.options['{0}_{1}'.format(prefix, name)] for name in self.system_tag.components}

    def seed_for(self, name):
        """Independent stream of the root seed for one experiment, stable across runs and thread counts"""
        return np.random.SeedSequence(self.options['seed'], spawn_key=(zlib.crc32(name.encode('utf-8')),))

    def ladder_kwargs(self):
        return {
            'delta_points': self.options['delta_grid_points'],
            'delta_min': self.options['delta_grid_min'],
            'delta_max': self.options['delta_grid_max'],
            't_points': self.options['t_fraction_points'],
            't_max': self.options['t_fraction_max'],
        }

    def faults(self):
        if self.options['corrupt_symbol'] is None:
            return {}
        return {self.options['corrupt_symbol']: self.options['corrupt_factor']}

    def info(self, logger=None):
        logger = logger or module_logger
        logger.info('Configuration{0}:'.format('' if self.filename is None else ' from ' + self.filename))
        for k in self.supported_tags:
            logger.info('   %-24s: %s' % (k, self.options[k]))
