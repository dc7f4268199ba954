"""Exception hierarchy shared across the package."""


class PhishScreenError(Exception):
    """Base class for all package-specific errors."""


class DataError(PhishScreenError):
    """Raised for malformed, inconsistent, or unloadable input data."""


class BundleError(PhishScreenError):
    """Raised for unreadable, corrupt, or incompatible model bundles."""


class ConfigError(PhishScreenError):
    """Raised for invalid run configuration documents."""


class HarnessError(PhishScreenError):
    """Raised when an experiment protocol cannot be carried out."""
