"""Exception types raised across the toolkit."""


class InvalidInputError(ValueError):
    """Non-finite, out-of-range or otherwise malformed arguments."""


class PoleOnAxisError(ZeroDivisionError):
    """Frequency response evaluated on an undamped pole."""


class OutOfModelError(ValueError):
    """Burst width not shorter than half the oscillation period."""


class BracketError(RuntimeError):
    """Root bracket lost its sign change; indicates an internal inconsistency."""


class UnachievableAmplitudeError(ValueError):
    """Requested amplitude lies outside the range reachable on the burst bracket."""


class NonMonotoneError(RuntimeError):
    """Amplitude map was found not to increase with burst width."""


class DivergenceError(ArithmeticError):
    """Closed-loop state became non-finite.

    Attributes
    ----------
    last_time : float
        Time of the last finite state.
    """

    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class WindowError(ValueError):
    """Trace too short for the requested analysis window."""


class WrongBranchError(ValueError):
    """Cost branch requested outside its domain of validity."""
