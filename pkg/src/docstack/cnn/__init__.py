from .architecture import ArchitectureDescriptor, mlp, vgg_lite
from .checkpoint import ModelCheckpoint, load_checkpoint, save_checkpoint
from .model import Model, build_model, init_layer
from .train import PlateauDecay, TrainConfig, TrainingError, accuracy, history_csv, predict, train

__all__ = [
    "ArchitectureDescriptor", "mlp", "vgg_lite", "ModelCheckpoint", "load_checkpoint",
    "save_checkpoint", "Model", "build_model", "init_layer", "PlateauDecay", "TrainConfig",
    "TrainingError", "accuracy", "history_csv", "predict", "train",
]
