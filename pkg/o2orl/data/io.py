"""Binary dataset files with a JSON sidecar.

Layout (little-endian): magic "O2ORLDS1", version u32, env-name length u32
and bytes, quality tag u8, state_dim u32, action kind u8 (0 discrete,
1 continuous), action size u32, action low/high f64, count u64, followed by
`count` packed records (state f64[], action f64[], reward f64,
next_state f64[], discount f64, timeout u8, episode_step u32).
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from o2orl.data.types import DatasetMeta, DatasetQuality, TransitionDataset

MAGIC: bytes = b"O2ORLDS1"
VERSION: int = 1

PathT = Union[str, Path]

_PREFIX = np.dtype([("magic", "S8"), ("version", "<u4"), ("name_length", "<u4")])
_DESCRIPTOR = np.dtype(
    [
        ("quality", "u1"),
        ("state_dim", "<u4"),
        ("action_kind", "u1"),
        ("action_size", "<u4"),
        ("action_low", "<f8"),
        ("action_high", "<f8"),
        ("count", "<u8"),
    ]
)


class FormatError(ValueError):
    """Raised when a dataset or checkpoint file cannot be parsed."""


def record_dtype(state_dim: int, action_width: int) -> np.dtype:
    """Packed record type of one transition."""
    return np.dtype(
        [
            ("state", "<f8", (state_dim,)),
            ("action", "<f8", (action_width,)),
            ("reward", "<f8"),
            ("next_state", "<f8", (state_dim,)),
            ("discount", "<f8"),
            ("timeout", "u1"),
            ("episode_step", "<u4"),
        ]
    )


def sidecar_path(path: PathT) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def meta_to_dict(meta: DatasetMeta) -> Dict[str, Any]:
    return {
        "env_name": meta.env_name,
        "quality": meta.quality.value,
        "behavior": meta.behavior,
        "size": meta.size,
        "state_dim": meta.state_dim,
        "action_discrete": meta.action_discrete,
        "action_size": meta.action_size,
        "action_low": meta.action_low,
        "action_high": meta.action_high,
        "reference_returns": (
            None if meta.reference_returns is None else list(meta.reference_returns)
        ),
        "seed": meta.seed,
        "extra": dict(meta.extra),
    }


def save_dataset(dataset: TransitionDataset, meta: DatasetMeta, path: PathT) -> Path:
    """Write dataset file and JSON sidecar.

    Args:
        dataset: Transitions to store.
        meta: Dataset description; its size must equal the dataset size.
        path: Target file.

    Returns:
        Path of the written dataset file.
    """
    if meta.size != len(dataset):
        raise ValueError(f"Meta size {meta.size} differs from dataset size {len(dataset)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    name: bytes = meta.env_name.encode("utf-8")
    prefix = np.array([(MAGIC, VERSION, len(name))], dtype=_PREFIX)
    action_width: int = 1 if meta.action_discrete else meta.action_size
    descriptor = np.array(
        [
            (
                meta.quality.tag,
                meta.state_dim,
                0 if meta.action_discrete else 1,
                meta.action_size,
                meta.action_low,
                meta.action_high,
                len(dataset),
            )
        ],
        dtype=_DESCRIPTOR,
    )
    records = np.zeros(len(dataset), dtype=record_dtype(meta.state_dim, action_width))
    records["state"] = dataset.states
    records["action"] = dataset.actions
    records["reward"] = dataset.rewards
    records["next_state"] = dataset.next_states
    records["discount"] = dataset.discounts
    records["timeout"] = dataset.timeouts
    records["episode_step"] = dataset.episode_steps
    with open(path, "wb") as file:
        file.write(prefix.tobytes())
        file.write(name)
        file.write(descriptor.tobytes())
        file.write(records.tobytes())
    with open(sidecar_path(path), "w", encoding="utf-8") as file:
        json.dump(meta_to_dict(meta), file, indent=2, sort_keys=True)
    return path


def _take(buffer: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(buffer):
        raise FormatError(f"Truncated dataset file while reading {what}.")
    return buffer[offset : offset + size]


def load_dataset(  # pylint: disable = (too-many-locals)
    path: PathT,
) -> Tuple[TransitionDataset, DatasetMeta]:
    """Read dataset file and, when present, its sidecar.

    Raises:
        FileNotFoundError: if the file does not exist.
        FormatError: on bad magic, unsupported version, truncation, an unknown
            quality tag or an unreadable sidecar.
    """
    path = Path(path)
    content: bytes = path.read_bytes()
    offset: int = 0
    prefix = np.frombuffer(_take(content, offset, _PREFIX.itemsize, "header"), _PREFIX)[0]
    offset += _PREFIX.itemsize
    if bytes(prefix["magic"]) != MAGIC:
        raise FormatError(f"{path} is not a dataset file (magic {bytes(prefix['magic'])!r}).")
    if int(prefix["version"]) != VERSION:
        raise FormatError(f"Unsupported dataset version {int(prefix['version'])}.")
    name_length: int = int(prefix["name_length"])
    try:
        env_name: str = _take(content, offset, name_length, "env name").decode("utf-8")
    except UnicodeDecodeError as error:
        raise FormatError(f"Env name in {path} is not UTF-8: {error}") from error
    offset += name_length
    descriptor = np.frombuffer(
        _take(content, offset, _DESCRIPTOR.itemsize, "descriptor"), _DESCRIPTOR
    )[0]
    offset += _DESCRIPTOR.itemsize

    try:
        quality: DatasetQuality = DatasetQuality.from_tag(int(descriptor["quality"]))
    except ValueError as error:
        raise FormatError(f"{path}: {error}") from error
    discrete: bool = int(descriptor["action_kind"]) == 0
    state_dim: int = int(descriptor["state_dim"])
    action_size: int = int(descriptor["action_size"])
    action_width: int = 1 if discrete else action_size
    count: int = int(descriptor["count"])
    dtype = record_dtype(state_dim, action_width)
    body: bytes = _take(content, offset, dtype.itemsize * count, "records")
    if offset + dtype.itemsize * count != len(content):
        raise FormatError(f"Trailing bytes after {count} records in {path}.")
    records = np.frombuffer(body, dtype=dtype)

    dataset = TransitionDataset(
        states=records["state"].astype(np.float64).reshape(count, state_dim),
        actions=records["action"].astype(np.float64).reshape(count, action_width),
        rewards=records["reward"].astype(np.float64),
        next_states=records["next_state"].astype(np.float64).reshape(count, state_dim),
        discounts=records["discount"].astype(np.float64),
        timeouts=records["timeout"].astype(bool),
        episode_steps=records["episode_step"].astype(np.int64),
    )
    sidecar: Dict[str, Any] = _read_sidecar(path)
    reference = _reference_pair(sidecar.get("reference_returns"), path)
    meta = DatasetMeta(
        env_name=env_name,
        quality=quality,
        behavior=sidecar.get("behavior", ""),
        size=count,
        state_dim=state_dim,
        action_discrete=discrete,
        action_size=action_size,
        action_low=float(descriptor["action_low"]),
        action_high=float(descriptor["action_high"]),
        reference_returns=reference,
        seed=sidecar.get("seed"),
        extra=sidecar.get("extra", {}),
    )
    return dataset, meta


def _read_sidecar(path: Path) -> Dict[str, Any]:
    """Parsed sidecar of `path`, empty when absent."""
    sidecar: Path = sidecar_path(path)
    if not sidecar.exists():
        return {}
    try:
        content = json.loads(sidecar.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise FormatError(f"Sidecar {sidecar} is not valid UTF-8 JSON: {error}") from error
    if not isinstance(content, dict):
        raise FormatError(f"Sidecar {sidecar} holds {type(content).__name__}, not an object.")
    return content


def _reference_pair(reference: Any, path: Path) -> Optional[Tuple[float, float]]:
    if reference is None:
        return None
    try:
        low, high = reference
        return float(low), float(high)
    except (TypeError, ValueError) as error:
        raise FormatError(
            f"Sidecar of {path} has reference_returns {reference!r}, expected two numbers."
        ) from error
