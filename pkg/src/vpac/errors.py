"""Exception types raised across the package."""


class VpacError(Exception):
    pass


class BlowupError(VpacError):
    """Non-finite values or |phi| beyond the stability threshold."""

    def __init__(self, message, t=None):
        if t is not None:
            message = f"{message} (t={t!r})"
        super().__init__(message)
        self.t = t


class ResolutionError(VpacError):
    pass


class GeometryError(VpacError):
    pass


class EmptyInterfaceError(VpacError):
    pass


class ConfigError(VpacError):
    """Invalid run configuration; ``violations`` holds (path, constraint) pairs."""

    def __init__(self, violations):
        if isinstance(violations, tuple):
            violations = [violations]
        self.violations = list(violations)
        lines = [f"{path}: {constraint}" for path, constraint in self.violations]
        super().__init__("; ".join(lines))


class IoError(VpacError, OSError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = str(path)
