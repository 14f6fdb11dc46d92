"""Harness errors carrying the exit code of the CLI entry points."""


class HarnessError(Exception):
    """Base class of harness failures."""

    exit_code: int = 1


class ConfigError(HarnessError):
    """Invalid configuration."""

    exit_code = 2


class MissingInputError(HarnessError):
    """Dataset, checkpoint or run directory does not exist."""

    exit_code = 3


class IncompatibleCheckpointError(HarnessError):
    """Checkpoint cannot seed the requested fine-tuning algorithm."""

    exit_code = 4


class EmptyAnalysisError(HarnessError):
    """No run records to analyze."""

    exit_code = 5
