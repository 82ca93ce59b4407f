"""Truncated Fourier representation of real periodic functions

A SpectralField stores the coefficients of f(x) = sum_k c_k exp(i xi_k x) densely over
k = -K..K (index k + K), with xi_k = 2 pi k / period. Products are dealiased by
zero-padding to at least 3K + 1 grid points so they equal the truncated convolution.
"""


import csv
import enum
import json
import numpy as np
from scipy import fft as sp_fft
from . import log_utils
from ._version import __version__
from .errors import SpectralError

module_logger = log_utils.logger

TWO_PI = 2.0 * np.pi
# tolerance used when validating conjugate symmetry of user supplied coefficients
SYMMETRY_TOLERANCE = 1e-12
# products drop coefficients below this many ulps of the largest grid value
FILTER_ULPS = 16.0


class MultiplierKind(enum.Enum):
    """Fourier multipliers of the nonlocal forms

    P1 = (1 - d_xx)^-1, P2 = (4 - d_xx)^-1, P3 = d_x, P13 = P3 P1, P23 = P3 P2
    """
    P1 = 'P1'
    P2 = 'P2'
    P3 = 'P3'
    P13 = 'P13'
    P23 = 'P23'

    def symbol(self, k, period=TWO_PI):
        """Symbol values at the integer wavenumbers k

        Arguments:
        -----------
        k : array_like of int
            wavenumbers
        period : float, optional (default : 2 pi)
            period of the torus, wavenumbers are rescaled to 2 pi k / period

        Returns:
        -----------
        out : numpy.ndarray of complex
        """
        xi = TWO_PI * np.asarray(k, dtype=float) / period
        p1 = 1.0 / (1.0 + xi * xi)
        p2 = 1.0 / (4.0 + xi * xi)
        p3 = 1j * xi
        if self is MultiplierKind.P1:
            return p1 + 0j
        if self is MultiplierKind.P2:
            return p2 + 0j
        if self is MultiplierKind.P3:
            return p3
        if self is MultiplierKind.P13:
            return p3 * p1
        return p3 * p2

    @classmethod
    def parse(cls, tag):
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).strip().upper())
        except ValueError:
            raise SpectralError('Unknown multiplier {0!r}. Accepted values are {1}'.format(tag, [m.value for m in cls]))


class SpectralField(object):
    """Real periodic function held by its Fourier coefficients

    Arguments:
    -----------
    coeffs : array_like of complex, length 2K+1
        coefficients for k = -K..K
    period : float, optional (default : 2 pi)
        period of the function
    symmetrize : bool, optional (default : True)
        project onto the Hermitian (real valued) subspace with 0.5 * (c + conj(c[::-1]))

    Returns:
    -----------
    out : SpectralField
        immutable: the coefficient array is read-only, every operation returns a new field
    """
    __slots__ = ('_coeffs', '_period')

    def __init__(self, coeffs, period=TWO_PI, symmetrize=True):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise SpectralError('coefficient array must have odd length 2K+1, got {0}'.format(c.size))
        if not np.all(np.isfinite(c)):
            raise SpectralError('coefficients must be finite')
        period = float(period)
        if not np.isfinite(period) or period <= 0:
            raise SpectralError('period must be a positive number, got {0}'.format(period))
        if symmetrize:
            c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        self._coeffs = c
        self._period = period

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def period(self):
        return self._period

    @property
    def n_modes(self):
        return (self._coeffs.size - 1) // 2

    @property
    def wavenumbers(self):
        return np.arange(-self.n_modes, self.n_modes + 1)

    @property
    def xi(self):
        return TWO_PI * self.wavenumbers / self._period

    def coefficient(self, k):
        if abs(k) > self.n_modes:
            return 0j
        return self._coeffs[k + self.n_modes]

    def mean_mode(self):
        return float(self._coeffs[self.n_modes].real)

    def max_abs(self):
        return float(np.max(np.abs(self._coeffs)))

    def is_zero(self):
        return not np.any(self._coeffs)

    def is_compatible(self, other):
        return isinstance(other, SpectralField) and other.n_modes == self.n_modes and other.period == self.period

    def _check(self, other):
        if not isinstance(other, SpectralField):
            raise TypeError('expected a SpectralField, got {0}'.format(type(other).__name__))
        if not self.is_compatible(other):
            raise SpectralError('mismatched resolutions: (K={0}, period={1}) vs (K={2}, period={3})'.format(
                self.n_modes, self.period, other.n_modes, other.period))

    def _new(self, coeffs):
        return SpectralField(coeffs, period=self._period)

    def __add__(self, other):
        self._check(other)
        return self._new(self._coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self._new(self._coeffs - other.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return product(self, scalar)
        if not np.isscalar(scalar) or np.iscomplexobj(scalar):
            raise TypeError('fields can only be scaled by real numbers')
        return self._new(self._coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self._coeffs)

    def __eq__(self, other):
        return self.is_compatible(other) and np.array_equal(self._coeffs, other.coeffs)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return 'SpectralField(n_modes={0}, period={1:.6g}, max_abs={2:.3e})'.format(self.n_modes, self._period, self.max_abs())

    def derivative(self):
        return apply_multiplier(self, MultiplierKind.P3)

    def evaluate(self, x):
        """Physical values at arbitrary points x"""
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * np.multiply.outer(x, self.xi))
        return (phase @ self._coeffs).real

    def h1_energy(self):
        return h1_energy(self)


def zeros(n_modes, period=TWO_PI):
    if int(n_modes) != n_modes or n_modes < 0:
        raise SpectralError('n_modes must be a nonnegative integer, got {0}'.format(n_modes))
    return SpectralField(np.zeros(2 * int(n_modes) + 1, dtype=complex), period=period, symmetrize=False)


def constant(value, n_modes, period=TWO_PI):
    c = np.zeros(2 * int(n_modes) + 1, dtype=complex)
    c[int(n_modes)] = float(value)
    return SpectralField(c, period=period, symmetrize=False)


def synthesize(modes, n_modes, period=TWO_PI):
    """Build a field from a list of (wavenumber, amplitude) pairs

    A pair given only for k mirrors onto -k as the conjugate amplitude; when both
    k and -k are given they must already be conjugate to each other.

    Arguments:
    -----------
    modes : iterable of (int, complex)
        wavenumbers and amplitudes, repeated wavenumbers are rejected
    n_modes : int
        highest retained wavenumber K
    period : float, optional (default : 2 pi)

    Returns:
    -----------
    out : SpectralField
    """
    if int(n_modes) != n_modes or n_modes < 0:
        raise SpectralError('n_modes must be a nonnegative integer, got {0}'.format(n_modes))
    n_modes = int(n_modes)
    given = {}
    for k, amp in modes:
        if int(k) != k:
            raise SpectralError('wavenumber {0} is not an integer'.format(k))
        k = int(k)
        if abs(k) > n_modes:
            raise SpectralError('wavenumber {0} is out of range for n_modes={1}'.format(k, n_modes))
        if k in given:
            raise SpectralError('wavenumber {0} given twice'.format(k))
        amp = complex(amp)
        if not np.isfinite(amp):
            raise SpectralError('amplitude for wavenumber {0} is not finite'.format(k))
        given[k] = amp

    c = np.zeros(2 * n_modes + 1, dtype=complex)
    for k, amp in given.items():
        mirror = given.get(-k)
        if mirror is not None:
            if abs(mirror - np.conj(amp)) > SYMMETRY_TOLERANCE * max(1.0, abs(amp)):
                raise SpectralError('amplitudes at +/-{0} violate conjugate symmetry: {1} vs {2}'.format(abs(k), amp, mirror))
        elif k == 0 and abs(amp.imag) > SYMMETRY_TOLERANCE * max(1.0, abs(amp)):
            raise SpectralError('the zero mode of a real field must be real, got {0}'.format(amp))
        c[k + n_modes] = amp
        if mirror is None:
            c[-k + n_modes] = np.conj(amp)
    return SpectralField(c, period=period)


def apply_multiplier(f, m, scale=1.0):
    """Coefficient-wise product with the symbol of m (scaled by ``scale``)"""
    m = MultiplierKind.parse(m)
    return SpectralField(f.coeffs * (scale * m.symbol(f.wavenumbers, f.period)), period=f.period)


def padded_size(n_modes):
    # smallest fast FFT length that makes the quadratic product alias-free on |k| <= K
    return sp_fft.next_fast_len(3 * n_modes + 1)


def _to_grid(coeffs, n_modes, n_points):
    half = np.zeros(n_points // 2 + 1, dtype=complex)
    half[:n_modes + 1] = coeffs[n_modes:]
    return n_points * np.fft.irfft(half, n=n_points)


def _from_grid(values, n_modes):
    n_points = values.shape[-1]
    half = np.fft.rfft(values) / n_points
    pos = half[:n_modes + 1]
    return np.concatenate([np.conj(pos[:0:-1]), pos])


def product(f, g):
    """Dealiased pointwise product, truncated back to the resolution of the inputs

    Coefficients below the round-off level of the padded transform (FILTER_ULPS ulps of
    the largest grid value) are set to zero, otherwise the Gevrey weights amplify the
    transform noise of the high modes.

    Arguments:
    -----------
    f, g : SpectralField
        fields with the same n_modes and period

    Returns:
    -----------
    out : SpectralField
        equals the truncated convolution of the coefficient sequences up to round-off
    """
    f._check(g)
    n_modes = f.n_modes
    n_points = padded_size(n_modes)
    values = _to_grid(f.coeffs, n_modes, n_points) * _to_grid(g.coeffs, n_modes, n_points)
    coeffs = _from_grid(values, n_modes)
    coeffs[np.abs(coeffs) < FILTER_ULPS * np.finfo(float).eps * np.max(np.abs(values))] = 0.0
    return SpectralField(coeffs, period=f.period)


def direct_product(f, g):
    """O(K^2) truncated convolution, the reference for product"""
    f._check(g)
    n_modes = f.n_modes
    full = np.convolve(f.coeffs, g.coeffs)
    return SpectralField(full[n_modes:3 * n_modes + 1], period=f.period)


def to_physical(f, n_points=None):
    """Values of f on the uniform grid x_j = j * period / n_points

    n_points defaults to 2K + 2 and must be at least 2K + 1
    """
    if n_points is None:
        n_points = 2 * f.n_modes + 2
    if n_points < 2 * f.n_modes + 1:
        raise SpectralError('at least {0} points are needed to represent K={1}, got {2}'.format(2 * f.n_modes + 1, f.n_modes, n_points))
    return _to_grid(f.coeffs, f.n_modes, int(n_points))


def from_physical(values, n_modes, period=TWO_PI):
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2 * n_modes + 1:
        raise SpectralError('need a 1-D array of at least {0} samples for n_modes={1}'.format(2 * n_modes + 1, n_modes))
    return SpectralField(_from_grid(values, int(n_modes)), period=period)


def physical_grid(n_points, period=TWO_PI):
    return np.arange(n_points) * (period / n_points)


def h1_energy(f):
    """Integral of u^2 + u_x^2 over one period"""
    return float(f.period * np.sum((1.0 + f.xi ** 2) * np.abs(f.coeffs) ** 2))


def max_coefficient_distance(f, g):
    f._check(g)
    return float(np.max(np.abs(f.coeffs - g.coeffs)))


# serialisation: JSON envelope and "k,re,im" rows
def field_to_dict(f):
    return {
        'n_modes': f.n_modes,
        'period': f.period,
        'coeffs': [[float(c.real), float(c.imag)] for c in f.coeffs],
    }


def field_from_dict(data):
    try:
        n_modes = int(data['n_modes'])
        period = float(data.get('period', TWO_PI))
        coeffs = np.array([complex(re, im) for re, im in data['coeffs']])
    except (KeyError, TypeError, ValueError) as e:
        raise SpectralError('malformed field envelope: {0}'.format(e))
    if coeffs.size != 2 * n_modes + 1:
        raise SpectralError('envelope declares n_modes={0} but holds {1} coefficients'.format(n_modes, coeffs.size))
    _check_symmetry(coeffs)
    return SpectralField(coeffs, period=period)


def _check_symmetry(coeffs):
    scale = max(1.0, float(np.max(np.abs(coeffs)))) if coeffs.size else 1.0
    if np.max(np.abs(coeffs - np.conj(coeffs[::-1]))) > SYMMETRY_TOLERANCE * scale:
        raise SpectralError('coefficients violate conjugate symmetry, the field is not real valued')


def save_field_json(f, filename):
    with open(filename, 'w') as fp:
        json.dump(field_to_dict(f), fp, sort_keys=True, indent=1)
    module_logger.debug('   field written to {0}'.format(filename))
    return filename


def load_field_json(filename):
    with open(filename, 'r') as fp:
        return field_from_dict(json.load(fp))


def save_field_csv(f, filename):
    with open(filename, 'w', newline='') as fp:
        fp.write('# gevreych {0} period={1!r}\n'.format(__version__, f.period))
        writer = csv.writer(fp)
        writer.writerow(['k', 're', 'im'])
        for k, c in zip(f.wavenumbers, f.coeffs):
            writer.writerow([int(k), repr(float(c.real)), repr(float(c.imag))])
    module_logger.debug('   field written to {0}'.format(filename))
    return filename


def load_field_csv(filename, period=None):
    rows = {}
    header_period = TWO_PI
    with open(filename, 'r', newline='') as fp:
        for line in fp:
            if line.startswith('#'):
                for token in line.split():
                    if token.startswith('period='):
                        header_period = float(token.split('=', 1)[1])
                continue
            if line.strip() == '' or line.strip().startswith('k'):
                continue
            k, re_, im_ = next(csv.reader([line]))
            rows[int(k)] = complex(float(re_), float(im_))
    if not rows:
        raise SpectralError('no coefficients found in {0}'.format(filename))
    n_modes = max(abs(k) for k in rows)
    coeffs = np.zeros(2 * n_modes + 1, dtype=complex)
    for k, c in rows.items():
        coeffs[k + n_modes] = c
    _check_symmetry(coeffs)
    return SpectralField(coeffs, period=header_period if period is None else period)
