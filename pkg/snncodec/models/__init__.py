from .lif import LifParams, LifState
from .encoding import EncoderMode, EncoderParams, EncoderState
from .pattern import FiringPattern, PatternBoundary
from .config import AblationFlags, ModelConfig, NeuronVariant, RunConfig
from .dataset import Dataset

__all__ = [
    'LifParams',
    'LifState',
    'EncoderMode',
    'EncoderParams',
    'EncoderState',
    'FiringPattern',
    'PatternBoundary',
    'AblationFlags',
    'ModelConfig',
    'NeuronVariant',
    'RunConfig',
    'Dataset',
]
