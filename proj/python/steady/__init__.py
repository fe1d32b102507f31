"""Simultaneous state estimation and dynamics learning for a planar hovercraft.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from ._steady import (
    Dataset,
    DatasetSpec,
    DynamicsParams,
    HovParams,
    LandmarkMap,
    Model,
    ObservationSequence,
    ParticleDeathError,
    TrainConfig,
    TrainingData,
    TrainResult,
    Trajectory,
    __version__,
    eval_forward_prediction,
    eval_state_estimation,
    generate_dataset,
    init_params,
    load_checkpoint,
    make_training_data,
    observe_trajectory,
    place_landmarks,
    save_checkpoint,
    train,
)

__all__ = [
    "Dataset",
    "DatasetSpec",
    "DynamicsParams",
    "HovParams",
    "LandmarkMap",
    "Model",
    "ObservationSequence",
    "ParticleDeathError",
    "TrainConfig",
    "TrainingData",
    "TrainResult",
    "Trajectory",
    "__version__",
    "eval_forward_prediction",
    "eval_state_estimation",
    "generate_dataset",
    "init_params",
    "load_checkpoint",
    "make_training_data",
    "observe_trajectory",
    "place_landmarks",
    "save_checkpoint",
    "train",
]
