from typing import Optional


class SimulationError(RuntimeError):
    """A run failed for numerical reasons; the CLI maps it to exit code 2."""

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class InstabilityError(SimulationError):
    pass


class BoundaryContaminationError(SimulationError):
    pass


class ConvergenceError(SimulationError):
    def __init__(self, message: str, iterations: int, distance: float):
        super().__init__(message)
        self.iterations = iterations
        self.distance = distance


class WindowError(ValueError):
    pass
