class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigurationError(SimulationError, ValueError):
    """A configuration value violates a domain invariant."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ConfigParseError(ConfigurationError):
    """Config file cannot be parsed, or holds an unknown key / bad literal."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        super().__init__(message, key=key)
        self.line = line


class DimensionError(SimulationError, ValueError):
    """Symbol matrices or phase vectors with incompatible shapes."""


class ZeroSymbolError(SimulationError, ZeroDivisionError):
    """Element-wise division hit a zero transmit symbol."""

    def __init__(self, index: tuple[int, int]):
        super().__init__(
            f"transmit symbol at (subcarrier={index[0]}, symbol={index[1]}) is zero"
        )
        self.index = index


class OutputError(SimulationError):
    """Result files cannot be written."""
