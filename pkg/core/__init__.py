from ._version import __version__
from .errors import (GevreyError, ConfigurationError, CertificationError, SpectralError, IncomparableParamsError,
                     NormSaturationError, WindowError, QuadratureError, TrajectoryError, IntegrationBlowUpError,
                     InsufficientModesError, UnboundedLifespanError, TaskExecutionError)
from .spectral import MultiplierKind, SpectralField, apply_multiplier, product, direct_product, to_physical, from_physical
from .gevrey import GevreyParams, InequalityReport, gevrey_norm, check_product_estimates, check_multiplier_bounds
from .state import SystemTag, SystemState, state_norm
from .ovsyannikov import LadderSpec, Trajectory, ea_norm, picard_iterate, lifespan_T0, contraction_factor
from .systems import rhs_ch, rhs_2ch, rhs_m2ch, rhs_3ch, rhs_for, lifespan_constants
from .experiments import integrate, fit_radius, radius_floor, track_radius, continuity_experiment
from .executor import Executor
from .config import RunConfig
from . import log_utils

version = __version__
version_info = tuple([int(v) for v in __version__.split('.')])

name = 'gevreych'
