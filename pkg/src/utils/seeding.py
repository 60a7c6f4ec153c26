"""
Named random-stream derivation.

Every random draw in the toolkit comes from a generator derived from one
root seed plus a component name and integer indices, so adding or reordering
draws in one component never shifts the streams of another.
"""

import zlib

import numpy as np


def component_key(component: str) -> int:
    """Stable 32-bit key for a component name (``hash()`` is salted per process)."""
    return zlib.crc32(component.encode("utf-8"))


def derive_seed_sequence(seed: int, component: str, *indices: int) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(
        entropy=int(seed),
        spawn_key=(component_key(component),) + tuple(int(i) for i in indices),
    )


def derive_rng(seed: int, component: str, *indices: int) -> np.random.Generator:
    """Generator for the stream (seed, component, *indices)."""
    return np.random.default_rng(derive_seed_sequence(seed, component, *indices))


def derive_seed(seed: int, component: str, *indices: int) -> int:
    """A derived 63-bit integer seed, e.g. for retrying a GA run."""
    state = derive_seed_sequence(seed, component, *indices).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 32 | int(state[1])) & 0x7FFF_FFFF_FFFF_FFFF)

