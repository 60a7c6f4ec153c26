"""
Exception hierarchy for the level-generation toolkit.
"""

from typing import Optional


class PcgError(Exception):
    """Base exception for all toolkit errors."""
    pass


class ShapeError(PcgError):
    """Raised when two levels (or a level and a dataset) disagree on shape."""
    pass


class InvalidActionError(PcgError):
    """Raised when an action is out of bounds or names an unknown tile."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        if index is not None:
            message = f"action {index}: {message}"
        super().__init__(message)


class LevelFormatError(PcgError):
    """Raised when a level text file cannot be parsed."""
    pass


class ConfigError(PcgError):
    """Raised for invalid configuration values or config files."""
    pass


class EvolutionError(PcgError):
    """Raised when a GA run produced no acceptable level."""
    pass


class DatasetError(PcgError):
    """Raised for unusable GA runs or corrupt policy datasets."""
    pass


class GenerationFailedError(PcgError):
    """Raised when the policy loop exhausts its restarts."""

    def __init__(self, attempts: int, best_fitness: float, policy_queries: int = 0,
                 wall_clock_seconds: float = 0.0):
        self.attempts = attempts
        self.best_fitness = best_fitness
        self.policy_queries = policy_queries
        self.wall_clock_seconds = wall_clock_seconds
        super().__init__(
            f"no acceptable level after {attempts} attempts "
            f"(best fitness {best_fitness:.4f}); the policy dataset may be inadequate"
        )


class BenchError(PcgError):
    """Raised when a benchmark cell cannot be completed or re-validated."""
    pass


class StorageError(PcgError):
    """Raised when an artifact cannot be written or read back."""
    pass
