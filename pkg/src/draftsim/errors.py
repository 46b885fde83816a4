"""Exception hierarchy shared by the engine, learners and analysis tools."""


class DraftError(Exception):
    """Base class for all draftsim errors."""


class ConfigError(DraftError, ValueError):
    """Invalid game, deck, menu or experiment configuration."""


class StateError(DraftError, RuntimeError):
    """Operation not allowed in the current game state."""


class ActionError(DraftError, ValueError):
    """Illegal action submitted for a seat."""

    def __init__(self, seat: int, message: str):
        super().__init__(f"seat {seat}: {message}")
        self.seat = seat


class TrackingError(DraftError, RuntimeError):
    pass


class PerturbationError(DraftError, ValueError):
    pass


class ShapeError(DraftError, ValueError):
    pass


class TrainingError(DraftError, RuntimeError):
    pass


class StatisticsError(DraftError, ValueError):
    pass


class FittingError(DraftError, ValueError):
    pass


class ReconstructionError(DraftError, ValueError):
    pass


class ComparisonError(DraftError, ValueError):
    pass


class InputError(DraftError, ValueError):
    pass


class RemapError(DraftError, ValueError):
    pass
