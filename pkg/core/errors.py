"""Exceptions raised by gevreych

Every error carries an ``errno`` that the command line uses as exit status:
1 for a failed theorem-backed check or numerical failure, 2 for configuration problems.
"""


class GevreyError(Exception):
    # base error, errno doubles as the process exit status
    def __init__(self, message, errno=1):
        super(GevreyError, self).__init__(message)
        self.errno = errno


class ConfigurationError(GevreyError, ValueError):
    def __init__(self, message):
        super(ConfigurationError, self).__init__(message, errno=2)


class CertificationError(GevreyError):
    """A theorem-backed check did not hold. ``check`` names the failing check"""
    def __init__(self, message, check=None):
        super(CertificationError, self).__init__(message, errno=1)
        self.check = check


class SpectralError(GevreyError, ValueError):
    pass


class IncomparableParamsError(GevreyError, ValueError):
    pass


class NormSaturationError(GevreyError, OverflowError):
    pass


class WindowError(GevreyError, ValueError):
    pass


class QuadratureError(GevreyError):
    pass


class TrajectoryError(GevreyError, ValueError):
    pass


class IntegrationBlowUpError(GevreyError, OverflowError):
    # the partial trajectory is kept so callers can report the last valid state
    def __init__(self, message, last_time, trajectory=None):
        super(IntegrationBlowUpError, self).__init__(message, errno=1)
        self.last_time = last_time
        self.trajectory = trajectory


class InsufficientModesError(GevreyError, ValueError):
    pass


class UnboundedLifespanError(GevreyError, ValueError):
    pass


class TaskExecutionError(GevreyError):
    # failure inside an Executor worker
    def __init__(self, message, errno=1, task_index=None):
        super(TaskExecutionError, self).__init__(message, errno=errno)
        self.task_index = task_index
