"""Exception and warning types shared by all afdmsim modules."""


class AfdmError(Exception):
    """Base class for afdmsim errors."""


class ShapeError(AfdmError, ValueError):
    """An input array has the wrong length or dimensionality."""


class StateError(AfdmError, RuntimeError):
    """An operation was applied to a signal in the wrong state
    (e.g. adding a prefix twice)."""


class ConfigError(AfdmError, ValueError):
    """A configuration violates a structural constraint
    (frame capacity, guard bounds, inadmissible parameters)."""


class SpecFileError(ConfigError):
    """An experiment spec file contains unknown or malformed keys."""


class EqualizerConditioningWarning(UserWarning):
    """The equalizer had to regularize a singular noiseless system."""
