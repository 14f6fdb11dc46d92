"""File contains unit tests for seeding.py file."""
import torch

from o2orl.seeding import SeedStream, derive_seed, make_generators


def test_derive_seed_is_stable() -> None:
    """Test if identical keys give identical seeds across calls."""
    assert derive_seed(7, SeedStream.FINETUNE, 3) == derive_seed(7, SeedStream.FINETUNE, 3)


def test_derive_seed_separates_streams_and_keys() -> None:
    """Test if streams, counters and masters give distinct seeds."""
    seeds = {
        derive_seed(0, SeedStream.DATASET),
        derive_seed(0, SeedStream.OFFLINE),
        derive_seed(0, SeedStream.OFFLINE, 1),
        derive_seed(0, SeedStream.OFFLINE, 1, 0),
        derive_seed(1, SeedStream.OFFLINE, 1),
    }
    assert len(seeds) == 5
    assert all(0 <= seed < 2**32 for seed in seeds)


def test_make_generators_are_reproducible() -> None:
    first_rng, first_torch = make_generators(11)
    second_rng, second_torch = make_generators(11)
    assert first_rng.integers(1000) == second_rng.integers(1000)
    assert torch.equal(
        torch.rand(3, generator=first_torch), torch.rand(3, generator=second_torch)
    )
