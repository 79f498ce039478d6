"""Command-line pipeline: configuration, stage DAG and report emitters."""
from .config import DEFAULTS, PipelineConfig
from .pipeline import STAGES, MissingPrerequisite, Pipeline, StageError

__all__ = ["DEFAULTS", "PipelineConfig", "STAGES", "MissingPrerequisite", "Pipeline", "StageError"]
