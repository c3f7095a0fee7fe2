"""Exception types shared across the package."""


class RcfdError(Exception):
    """Base class for all package errors."""


class CapacityExceeded(RcfdError, ValueError):
    """More nodes than the subcarrier map can hold."""


class UnmappedNode(RcfdError, KeyError):
    """A node id has no entry in the subcarrier map."""


class ChosenNotHeard(RcfdError, ValueError):
    """A node's own round-1 slot is missing from its heard set."""


class NoRtsHeard(RcfdError, ValueError):
    """CTS recipient requested with no round-2 set-1 slot heard."""


class UnsupportedRate(RcfdError, ValueError):
    """PHY rate outside the 802.11a/g OFDM rate set."""


class NonConvergence(RcfdError, RuntimeError):
    """An iterative solver hit its iteration cap."""


class InvalidN(RcfdError, ValueError):
    """Node count outside the range a model is defined on."""


class ConfigError(RcfdError, ValueError):
    """Invalid experiment configuration.

    ``violations`` holds every problem found, one string each.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DuplicateKey(ConfigError):
    """A configuration key appears twice in one file."""
