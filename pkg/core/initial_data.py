"""Initial data presets

A preset is either a string "<name> key=value ..." or an explicit list of modes,
each mode being [k, amplitude] or [k, re, im]:

    zero
    cosine amp=0.1 k=1                      amp cos(k x)
    sine amp=0.1 k=1                        amp sin(k x)
    cosine_pack amp=0.1 decay=1.0 count=K   sum_j amp exp(-decay j) cos(j x), j = 1..count
    random delta=0.5 s=2 sigma=1 surplus=0.5 scale=0.1
    peakon amp=1 x0=0 width=1               amp exp(-|x - x0| / width), periodized
"""


import numpy as np
from .errors import ConfigurationError
from .gevrey import GevreyParams, gevrey_norm, random_gevrey_field, sample_seed
from .spectral import SpectralField, TWO_PI, synthesize, zeros
from .state import SystemTag, SystemState

PRESETS = ('zero', 'cosine', 'sine', 'cosine_pack', 'random', 'peakon')

_DEFAULTS = {
    'zero': {},
    'cosine': {'amp': 1.0, 'k': 1},
    'sine': {'amp': 1.0, 'k': 1},
    'cosine_pack': {'amp': 1.0, 'decay': 1.0, 'count': None},
    'random': {'delta': 0.5, 's': 2.0, 'sigma': 1.0, 'surplus': 0.5, 'scale': 1.0},
    'peakon': {'amp': 1.0, 'x0': 0.0, 'width': 1.0},
}


def peakon_field(amp, x0, width, n_modes, period=TWO_PI):
    """Truncated Fourier series of amp * sum_n exp(-|x - x0 + n period| / width)

    The coefficients are amp (2 width / period) exp(-i xi x0) / (1 + width^2 xi^2).
    """
    if not width > 0:
        raise ConfigurationError('peakon width must be > 0, got {0}'.format(width))
    k = np.arange(-n_modes, n_modes + 1)
    xi = TWO_PI * k / period
    coeffs = amp * (2.0 * width / period) * np.exp(-1j * xi * x0) / (1.0 + (width * xi) ** 2)
    return SpectralField(coeffs, period=period)


def _parse_options(name, tokens):
    options = dict(_DEFAULTS[name])
    for token in tokens:
        if '=' not in token:
            raise ConfigurationError('preset option {0!r} must be written key=value'.format(token))
        key, value = token.split('=', 1)
        if key not in options:
            raise ConfigurationError("preset '{0}' has no option {1!r}. Accepted options are {2}".format(name, key, sorted(options)))
        try:
            options[key] = float(value)
        except ValueError:
            raise ConfigurationError('preset option {0}={1!r} is not a number'.format(key, value))
    return options


def _explicit_modes(modes, n_modes, period):
    pairs = []
    for mode in modes:
        if not isinstance(mode, (list, tuple)) or len(mode) not in (2, 3):
            raise ConfigurationError('explicit modes are [k, amplitude] or [k, re, im], got {0!r}'.format(mode))
        if len(mode) == 2:
            pairs.append((mode[0], complex(mode[1])))
        else:
            pairs.append((mode[0], complex(float(mode[1]), float(mode[2]))))
    return synthesize(pairs, n_modes, period)


def build_field(preset, n_modes, seed=0, period=TWO_PI):
    """SpectralField described by a preset string or a list of modes

    Arguments:
    -----------
    preset : str or list
    n_modes : int
    seed : int or numpy.random.SeedSequence, optional (default : 0)
        used by the random preset only
    period : float, optional (default : 2 pi)

    Returns:
    -----------
    out : SpectralField
    """
    if isinstance(preset, (list, tuple)):
        return _explicit_modes(preset, n_modes, period)
    if not isinstance(preset, str) or not preset.strip():
        raise ConfigurationError('initial data must be a preset string or a list of modes, got {0!r}'.format(preset))
    tokens = preset.split()
    name = tokens[0].lower()
    if name not in PRESETS:
        raise ConfigurationError("unknown preset '{0}'. Accepted presets are {1}".format(name, list(PRESETS)))
    o = _parse_options(name, tokens[1:])

    if name == 'zero':
        return zeros(n_modes, period)
    if name in ('cosine', 'sine'):
        k = int(o['k'])
        if k != o['k'] or k < 0 or k > n_modes:
            raise ConfigurationError('preset wavenumber k={0} must be an integer in [0, {1}]'.format(o['k'], n_modes))
        if k == 0:
            return synthesize([(0, o['amp'] if name == 'cosine' else 0.0)], n_modes, period)
        amplitude = 0.5 * o['amp'] if name == 'cosine' else -0.5j * o['amp']
        return synthesize([(k, amplitude)], n_modes, period)
    if name == 'cosine_pack':
        count = n_modes if o['count'] is None else int(o['count'])
        if count < 1 or count > n_modes:
            raise ConfigurationError('cosine_pack count must lie in [1, {0}], got {1}'.format(n_modes, count))
        return synthesize([(j, 0.5 * o['amp'] * np.exp(-o['decay'] * j)) for j in range(1, count + 1)], n_modes, period)
    if name == 'random':
        p = GevreyParams(o['sigma'], o['delta'], o['s'])
        field = random_gevrey_field(p, o['surplus'], n_modes, seed, period=period)
        norm = gevrey_norm(field, p)
        return field if norm == 0 else field * (o['scale'] / norm)
    return peakon_field(o['amp'], o['x0'], o['width'], n_modes, period)


def build_state(tag, presets, n_modes, seed=0, period=TWO_PI):
    """SystemState from a mapping component name -> preset, missing components are zero

    The random preset of component i draws from the i-th spawned stream of seed.
    """
    tag = SystemTag.parse(tag)
    fields = []
    for i, name in enumerate(tag.components):
        preset = presets.get(name, 'zero')
        if preset is None:
            preset = 'zero'
        fields.append(build_field(preset, n_modes, sample_seed(seed, i), period))
    return SystemState(tag, fields)
