"""Exception types shared across the package."""


class SBLDError(Exception):
    """Base class for all errors raised by sbld."""


class ConfigError(SBLDError):
    """Invalid configuration: bad regex, malformed config file, unknown measure."""


class UsageError(SBLDError):
    """A call violated its preconditions (empty input, target missing, ...)."""
