"""
Exceptions raised by attsync. Everything derives from AttsyncError so callers can catch the family.
"""


class AttsyncError(Exception):
    pass


class AngleNearPi(AttsyncError):
    """The rotation angle is too close to pi for the logarithm map."""
    def __init__(self, theta, delta):
        super().__init__('rotation angle {!r} is within {!r} of pi'.format(theta, delta))
        self.theta = theta


class OutOfDomain(AttsyncError):
    """
    A state left the domain of the transition matrix (norm >= 2 pi) or a ball radius is out of range.
    When raised by the integrator, agent and time identify the offending block.
    """
    def __init__(self, message, agent=None, time=None):
        super().__init__(message)
        self.agent = agent
        self.time = time


class NotARotation(AttsyncError):
    pass


class NotSymmetric(AttsyncError):
    pass


class Disconnected(AttsyncError):
    pass


class TopologyError(AttsyncError):
    pass


class InvalidConfig(AttsyncError):
    pass


class ScenarioError(InvalidConfig):
    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)
        self.line = line


class InsufficientHorizon(AttsyncError):
    pass
