"""Dynamics-informed world models for cart/block manipulation."""

from _dynmap import (
    ConfigurationError,
    ControlEnv,
    CorruptFile,
    EpisodeConfig,
    Metrics,
    Outcome,
    RandomizationSpec,
    SimulationDiverged,
    TaskId,
    Trajectory,
    evaluate,
    read_trajectory,
    record_dataset,
    rollout,
    sample_episode,
    train,
    validate_dataset,
)

__all__ = [
    "ConfigurationError",
    "ControlEnv",
    "CorruptFile",
    "EpisodeConfig",
    "Metrics",
    "Outcome",
    "RandomizationSpec",
    "SimulationDiverged",
    "TaskId",
    "Trajectory",
    "evaluate",
    "read_trajectory",
    "record_dataset",
    "rollout",
    "sample_episode",
    "train",
    "validate_dataset",
]
