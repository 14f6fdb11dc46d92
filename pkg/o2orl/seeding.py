"""Deterministic seed fan-out from one master seed."""
from enum import IntEnum
from typing import Tuple

import numpy as np
import torch


class SeedStream(IntEnum):
    """Independent random streams derived from the master seed."""

    DATASET = 0
    REFERENCE = 1
    OFFLINE = 2
    FINETUNE = 3
    EVALUATION = 4
    BOOTSTRAP = 5
    ANALYSIS = 6


def derive_seed(master: int, stream: SeedStream, *keys: int) -> int:
    """Derive a child seed with a counter-based split of the master seed.

    Args:
        master: Master seed of the pipeline.
        stream: Stream the seed belongs to.
        keys: Further integer counters (seed index, episode index, ...).

    Returns:
        32-bit seed.
    """
    sequence = np.random.SeedSequence(
        entropy=int(master), spawn_key=(int(stream),) + tuple(int(k) for k in keys)
    )
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def make_generators(seed: int) -> Tuple[np.random.Generator, torch.Generator]:
    """Create the numpy and torch generators owned by one run.

    Args:
        seed: Seed of the run.

    Returns:
        Tuple of numpy generator and torch generator.
    """
    torch_generator = torch.Generator()
    torch_generator.manual_seed(int(seed))
    return np.random.default_rng(int(seed)), torch_generator
