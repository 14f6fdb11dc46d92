"""Agent checkpoints, the hand-off artifact between offline training and fine-tuning."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import torch

from o2orl.algos.base_agent import Agent, AgentSpec
from o2orl.approx.networks import OptimisticRegion
from o2orl.data.io import FormatError
from o2orl.logger import create_logger

_LOGGER: Optional[logging.Logger] = None

CHECKPOINT_MAGIC: str = "O2ORLCK1"
CHECKPOINT_VERSION: int = 1
_REQUIRED = ("magic", "version", "algorithm", "config", "spec", "state_dict")


def log() -> logging.Logger:
    """Get or create logger."""
    # pylint: disable = global-statement
    global _LOGGER
    if _LOGGER is None:
        _LOGGER = create_logger(__name__)
    return _LOGGER


@dataclass
class Checkpoint:
    """Loaded checkpoint."""

    algorithm: str
    config: Dict[str, Any]
    agent: Agent
    fqe_state: Optional[Dict[str, Any]] = None
    extra: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(  # pylint: disable = (too-many-arguments)
    path: Union[str, Path],
    agent: Agent,
    algorithm: str,
    config: Dict[str, Any],
    fqe_state: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write agent checkpoint.

    Args:
        path: Target file.
        agent: Agent to store, including optimizer states.
        algorithm: Tag of the algorithm that trained the agent.
        config: Resolved run configuration echoed into the file.
        fqe_state: Optional FQE estimator state.
        extra: Optional further entries.

    Returns:
        Path of the written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    optimism: Optional[OptimisticRegion] = agent.optimism
    payload: Dict[str, Any] = {
        "magic": CHECKPOINT_MAGIC,
        "version": CHECKPOINT_VERSION,
        "algorithm": algorithm,
        "config": config,
        "spec": agent.spec.to_dict(),
        "state_dict": agent.state_dict(),
        "optimizers": agent.optimizer_states(),
        "optimism": None if optimism is None else optimism.state_dict(),
        "fqe": fqe_state,
        "extra": extra or {},
    }
    torch.save(payload, path)
    log().info("Checkpoint of %s written to %s.", algorithm, path)
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read checkpoint and rebuild its agent.

    Raises:
        FileNotFoundError: if the file does not exist.
        FormatError: if the file is not a compatible checkpoint.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint {path} does not exist.")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as error:  # pylint: disable = (broad-except)
        raise FormatError(f"{path} is not a checkpoint: {error}") from error
    if not isinstance(payload, dict) or payload.get("magic") != CHECKPOINT_MAGIC:
        raise FormatError(f"{path} has no checkpoint magic.")
    missing = [key for key in _REQUIRED if key not in payload]
    if missing:
        raise FormatError(f"{path} misses checkpoint fields {missing}.")
    if payload["version"] != CHECKPOINT_VERSION:
        raise FormatError(f"Unsupported checkpoint version {payload['version']}.")

    spec: AgentSpec = AgentSpec.from_dict(payload["spec"])
    agent = Agent(spec)
    try:
        agent.load_state_dict(payload["state_dict"])
        agent.load_optimizer_states(payload.get("optimizers") or {})
    except (RuntimeError, ValueError, KeyError) as error:
        raise FormatError(f"{path} does not match its agent spec: {error}") from error
    if payload.get("optimism") is not None:
        try:
            region = OptimisticRegion.from_state_dict(payload["optimism"])
        except (KeyError, ValueError) as error:
            raise FormatError(f"{path} has a malformed optimism entry: {error}") from error
        agent.attach_optimism(region)
    return Checkpoint(
        algorithm=payload["algorithm"],
        config=payload["config"],
        agent=agent,
        fqe_state=payload.get("fqe"),
        extra=payload.get("extra") or {},
    )
