"""CPU-first speech/music/noise classification and segmentation toolkit."""

from .data import CLASSES
from .features import FeatureKind, FeatureMatrix, extract_features
from .model import Model, ModelConfig, build, classify, forward, load_preset, param_count
from .tensor import Tensor
from .wavio import AudioClip, load_wav, save_wav

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "CLASSES",
    "FeatureKind",
    "FeatureMatrix",
    "Model",
    "ModelConfig",
    "Tensor",
    "__version__",
    "build",
    "classify",
    "extract_features",
    "forward",
    "load_preset",
    "load_wav",
    "param_count",
    "save_wav",
]
