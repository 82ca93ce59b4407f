"""System states: tagged bundles of spectral fields"""


import collections
import enum
import numpy as np
from .errors import TrajectoryError, SpectralError
from .gevrey import EXPONENT_CAP, gevrey_norms
from .spectral import SpectralField, TWO_PI


class SystemTag(enum.Enum):
    CH = 'CH'
    TwoCH = '2CH'
    M2CH = 'M2CH'
    ThreeCH = '3CH'

    @property
    def components(self):
        return _COMPONENTS[self]

    @property
    def s_offsets(self):
        # 2CH lives in G_s x G_{s-1}, the other systems use a uniform index
        return _S_OFFSETS[self]

    @classmethod
    def parse(cls, tag):
        if isinstance(tag, cls):
            return tag
        key = str(tag).strip().upper()
        for member in cls:
            if key in (member.value.upper(), member.name.upper()):
                return member
        raise ValueError('Unknown system {0!r}. Accepted values are {1}'.format(tag, [m.value for m in cls]))


_COMPONENTS = {
    SystemTag.CH: ('u',),
    SystemTag.TwoCH: ('u', 'rho'),
    SystemTag.M2CH: ('u', 'gamma'),
    SystemTag.ThreeCH: ('u', 'v', 'w'),
}

_S_OFFSETS = {
    SystemTag.CH: (0.0,),
    SystemTag.TwoCH: (0.0, -1.0),
    SystemTag.M2CH: (0.0, 0.0),
    SystemTag.ThreeCH: (0.0, 0.0, 0.0),
}


class SystemState(object):
    """Fields of one system at one time

    Arguments:
    -----------
    tag : SystemTag or str
    components : sequence of SpectralField
        one per component of the system, sharing n_modes and period
    """
    __slots__ = ('_tag', '_components')

    def __init__(self, tag, components):
        tag = SystemTag.parse(tag)
        components = tuple(components)
        if len(components) != len(tag.components):
            raise TrajectoryError('{0} needs {1} components {2}, got {3}'.format(
                tag.value, len(tag.components), tag.components, len(components)))
        for c in components:
            if not isinstance(c, SpectralField):
                raise TypeError('state components must be SpectralField, got {0}'.format(type(c).__name__))
            if not c.is_compatible(components[0]):
                raise SpectralError('all components of a state must share n_modes and period')
        self._tag = tag
        self._components = components

    @property
    def tag(self):
        return self._tag

    @property
    def components(self):
        return self._components

    @property
    def n_modes(self):
        return self._components[0].n_modes

    @property
    def period(self):
        return self._components[0].period

    def __getitem__(self, name):
        if isinstance(name, int):
            return self._components[name]
        try:
            return self._components[self._tag.components.index(name)]
        except ValueError:
            raise KeyError('{0} has no component {1!r}'.format(self._tag.value, name))

    def __len__(self):
        return len(self._components)

    def __iter__(self):
        return iter(self._components)

    def s_indices(self, s):
        return tuple(s + o for o in self._tag.s_offsets)

    def _check(self, other):
        if not isinstance(other, SystemState) or other.tag is not self._tag:
            raise TrajectoryError('cannot combine states of different systems')

    def __add__(self, other):
        self._check(other)
        return SystemState(self._tag, [a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        self._check(other)
        return SystemState(self._tag, [a - b for a, b in zip(self, other)])

    def __mul__(self, scalar):
        return SystemState(self._tag, [c * scalar for c in self])

    __rmul__ = __mul__

    def __neg__(self):
        return SystemState(self._tag, [-c for c in self])

    def __eq__(self, other):
        return isinstance(other, SystemState) and other.tag is self._tag and all(a == b for a, b in zip(self, other))

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return 'SystemState({0}, n_modes={1}, max_abs={2:.3e})'.format(self._tag.value, self.n_modes, self.max_abs())

    def max_abs(self):
        return max(c.max_abs() for c in self)

    def is_zero(self):
        return all(c.is_zero() for c in self)

    def as_array(self):
        return np.stack([c.coeffs for c in self])

    @classmethod
    def from_array(cls, tag, array, period=TWO_PI):
        return cls(tag, [SpectralField(row, period=period) for row in np.atleast_2d(array)])

    def zeros_like(self):
        return SystemState.from_array(self._tag, np.zeros_like(self.as_array()), self.period)


def zero_state(tag, n_modes, period=TWO_PI):
    tag = SystemTag.parse(tag)
    return SystemState.from_array(tag, np.zeros((len(tag.components), 2 * n_modes + 1), dtype=complex), period)


class StateNorm(collections.namedtuple('StateNorm', ['value', 'breakdown'])):
    """Norm on a product space: value is the sum of the component norms in ``breakdown``"""
    __slots__ = ()


def state_norm(state, sigma, delta, s, exponent_cap=EXPONENT_CAP):
    breakdown = tuple(float(gevrey_norms(c, sigma, delta, si, exponent_cap)[0]) for c, si in zip(state, state.s_indices(s)))
    return StateNorm(float(sum(breakdown)), breakdown)


def state_norms(state, sigma, deltas, s, exponent_cap=EXPONENT_CAP):
    """Sum of component norms for an array of radii"""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    total = np.zeros(deltas.shape)
    for c, si in zip(state, state.s_indices(s)):
        total += gevrey_norms(c, sigma, deltas, si, exponent_cap)
    return total
