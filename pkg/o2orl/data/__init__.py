# pylint: disable = missing-module-docstring
from o2orl.data.generation import generate_dataset
from o2orl.data.io import FormatError, load_dataset, save_dataset
from o2orl.data.normalization import normalized_return, reference_bounds
from o2orl.data.replay_buffer import ReplayBuffer
from o2orl.data.types import (
    DatasetMeta,
    DatasetQuality,
    Transition,
    TransitionBatch,
    TransitionDataset,
)
