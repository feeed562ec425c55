class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigError(SimulationError, ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NetworkError(SimulationError):
    pass


class InvalidSetupError(SimulationError, ValueError):
    pass


class NonHermitianError(SimulationError, ValueError):
    pass


class NonCommutingError(SimulationError, ValueError):
    pass


class UnsortedStreamError(SimulationError, ValueError):
    pass


class NoDataError(SimulationError):
    pass


class CalibrationError(SimulationError):
    pass
