"""Exception types shared across the toolkit."""


class SwishNetError(Exception):
    """Base class for all toolkit errors."""


class WavDecodeError(SwishNetError):
    """Malformed RIFF/WAVE data (bad header, truncated chunk, missing data)."""


class UnsupportedFormatError(SwishNetError):
    """Structurally valid WAV whose codec or sample width is not supported."""


class TooShortError(SwishNetError):
    """Input signal or feature matrix shorter than the operation requires."""


class ShapeError(SwishNetError):
    """Tensor arguments with incompatible shapes."""


class ConfigError(SwishNetError):
    """Invalid model, filterbank, or dataset configuration."""


class FileFormatError(SwishNetError):
    """Bad magic, version, or truncation in a weight or feature-cache file."""


class DataError(SwishNetError):
    """Dataset problems: bad manifests, missing teacher logits, label issues."""


class TrainingError(SwishNetError):
    """Optimization failure, e.g. a non-finite gradient."""


class EvaluationError(SwishNetError):
    """Scoring failure, e.g. mismatched lengths or nothing to score."""
