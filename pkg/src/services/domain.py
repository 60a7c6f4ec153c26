"""
Domain plugin interface and registry.

A domain supplies the tile alphabet, random level generation, the fitness
function and the gene encoding the evolution engine works on.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Protocol

import numpy as np

from src.models.errors import ConfigError
from src.models.genetics import GaConfig, Gene
from src.models.level import Level, TileAlphabet, format_level
from src.models.policy import PolicyConfig


class FitnessBreakdown(Protocol):
    total: float

    def to_dict(self) -> Dict[str, Any]:
        ...


class DomainPlugin(ABC):
    """Base class for a level domain; implementations must be safe to share across threads."""

    name: str = ''
    alphabet: TileAlphabet
    fitness_threshold: float

    @abstractmethod
    def random_level(self, rng: np.random.Generator) -> Level:
        """Draw one random level."""

    @abstractmethod
    def evaluate(self, level: Level) -> FitnessBreakdown:
        """Full fitness breakdown of a level."""

    @abstractmethod
    def gene_encode(self, level: Level) -> Gene:
        """Encode a level as a fixed-length gene."""

    @abstractmethod
    def gene_decode(self, gene: Gene) -> Level:
        """Decode a gene back into a level."""

    @abstractmethod
    def mutate_unit(self, gene: Gene, position: int, rng: np.random.Generator) -> Gene:
        """Return a copy of gene with the unit at position perturbed."""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Constructor arguments needed to rebuild this domain."""

    @abstractmethod
    def ga_config(self, **overrides: Any) -> GaConfig:
        """Default GA settings for the domain, with overrides applied."""

    @abstractmethod
    def policy_config(self, **overrides: Any) -> PolicyConfig:
        """Default policy settings for the domain, with overrides applied."""

    def repair(self, gene: Gene, rng: np.random.Generator) -> Gene:
        """Restore domain constraints after crossover; identity unless overridden."""
        return gene

    def fitness(self, level: Level) -> float:
        return float(self.evaluate(level).total)

    def is_acceptable(self, level: Level) -> bool:
        return self.fitness(level) >= self.fitness_threshold

    def render(self, level: Level, show_path: bool = False) -> str:
        return format_level(level)

    def check_level(self, level: Level) -> None:
        """Reject levels of the wrong alphabet or shape for this domain."""
        if level.alphabet != self.alphabet:
            raise ConfigError(
                f"level alphabet {level.alphabet.glyphs!r} does not belong to the {self.name} domain")


DOMAIN_NAMES = ('maze', 'platformer')


def create_domain(name: str, params: Optional[Dict[str, Any]] = None) -> DomainPlugin:
    """
    Instantiate a domain plugin by name.

    Args:
        name: 'maze' or 'platformer'
        params: Constructor arguments, as returned by DomainPlugin.params()

    Raises:
        ConfigError: For unknown domains or bad parameters
    """
    from src.services.maze_domain import MazeDomain
    from src.services.platformer_domain import PlatformerDomain

    classes = {'maze': MazeDomain, 'platformer': PlatformerDomain}
    if name not in classes:
        raise ConfigError(f"unknown domain {name!r}, expected one of {', '.join(DOMAIN_NAMES)}")
    try:
        return classes[name](**(params or {}))
    except TypeError as e:
        raise ConfigError(f"bad parameters for the {name} domain: {e}") from e


def domain_for_text(text: str) -> str:
    """Guess the domain of a level file from the glyphs it uses."""
    from src.config.settings import config

    glyphs = set("".join(text.split("\n")[1:]))
    if glyphs <= set(config['maze'].GLYPHS):
        return 'maze'
    if glyphs <= set(config['platformer'].GLYPHS):
        return 'platformer'
    raise ConfigError("level glyphs match no known domain; pass --domain")
