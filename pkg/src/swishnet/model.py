"""Declarative builder for the gated 1D conv classifier (slim/wide).

A ModelConfig is an ordered list of stages; each stage holds one or more
parallel branches whose outputs are concatenated on the channel axis. Gated
branches run a causal conv with doubled width and halve it through
tanh*sigmoid gating. Stages may carry a residual add (shape-preserving
stages only) or contribute a skip path; skip outputs are aligned to the
final time resolution by strided 1x1 convolutions and summed before the
pointwise head and global average pooling.
"""

import math
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from . import ops
from .errors import ConfigError, TooShortError
from .features import FeatureMatrix
from .tensor import Tensor

GATED_CONV = "gated_conv"
GATED_SEPARABLE = "gated_separable"
_KINDS = (GATED_CONV, GATED_SEPARABLE)

PRESET_NAMES = ("swishnet-slim", "swishnet-wide")


@dataclass(frozen=True)
class LayerSpec:
    """One branch of a stage."""

    kind: str
    width: int
    kernel: int
    stride: int = 1
    residual: bool = False
    skip: bool = False


@dataclass(frozen=True)
class ModelConfig:
    stages: tuple[tuple[LayerSpec, ...], ...]
    input_channels: int = 20
    n_classes: int = 3
    width_multiplier: int = 1
    dropout_rate: float = 0.0

    def validate(self) -> None:
        if self.input_channels < 1 or self.n_classes < 1 or self.width_multiplier < 1:
            raise ConfigError("input_channels, n_classes and width_multiplier must be >= 1")
        if not self.stages:
            raise ConfigError("config has no stages")
        c_in = self.input_channels
        for i, stage in enumerate(self.stages):
            if not stage:
                raise ConfigError(f"stage {i} has no branches")
            for spec in stage:
                if spec.kind not in _KINDS:
                    raise ConfigError(f"stage {i}: unknown layer kind {spec.kind!r}")
                if spec.width < 1 or spec.kernel < 1 or spec.stride < 1:
                    raise ConfigError(f"stage {i}: width, kernel and stride must be >= 1")
            strides = {spec.stride for spec in stage}
            flags = {(spec.residual, spec.skip) for spec in stage}
            if len(strides) > 1 or len(flags) > 1:
                raise ConfigError(f"stage {i}: parallel branches disagree on stride or flags")
            c_out = self.width_multiplier * sum(spec.width for spec in stage)
            if stage[0].residual and (c_out != c_in or stage[0].stride != 1):
                raise ConfigError(
                    f"stage {i}: residual needs matching shapes, got {c_in} -> {c_out} "
                    f"channels at stride {stage[0].stride}"
                )
            c_in = c_out

    def stage_channels(self) -> list[int]:
        """Output channel count after each stage."""
        out = []
        for stage in self.stages:
            out.append(self.width_multiplier * sum(spec.width for spec in stage))
        return out

    def head_channels(self) -> int:
        return self.stage_channels()[-1]

    def min_input_frames(self) -> int:
        """Shortest accepted input: twice the total downsampling factor."""
        total = 1
        for stage in self.stages:
            total *= stage[0].stride
        return 2 * total

    def aligner_strides(self) -> dict[int, int]:
        """For each skip stage index, the stride aligning it to the final grid."""
        strides = [stage[0].stride for stage in self.stages]
        out = {}
        for i, stage in enumerate(self.stages):
            if stage[0].skip:
                out[i] = math.prod(strides[i + 1:])
        return out


@dataclass
class Model:
    config: ModelConfig
    params: dict[str, Tensor]
    metadata: dict[str, str] = field(default_factory=dict)

    def param_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data for name, t in self.params.items()}


def _reference_stages() -> tuple:
    dual = (
        LayerSpec(GATED_CONV, width=8, kernel=3),
        LayerSpec(GATED_SEPARABLE, width=8, kernel=6),
    )
    mid_entry = (LayerSpec(GATED_CONV, width=8, kernel=3),)
    mid_res = (LayerSpec(GATED_CONV, width=8, kernel=3, residual=True),)
    strided = (LayerSpec(GATED_CONV, width=8, kernel=3, stride=2, skip=True),)
    return (dual, dual, mid_entry, mid_res, mid_res, strided, strided, strided)


def slim_config(dropout_rate: float = 0.0) -> ModelConfig:
    return ModelConfig(stages=_reference_stages(), dropout_rate=dropout_rate)


def wide_config(dropout_rate: float = 0.0) -> ModelConfig:
    return replace(slim_config(dropout_rate), width_multiplier=2)


def format_config(config: ModelConfig) -> str:
    """Plain-text key-value rendering of a config (round-trips via parse_config)."""
    lines = [
        f"input_channels {config.input_channels}",
        f"n_classes {config.n_classes}",
        f"width_multiplier {config.width_multiplier}",
        f"dropout_rate {config.dropout_rate}",
    ]
    for stage in config.stages:
        branches = []
        for spec in stage:
            parts = [spec.kind, f"width={spec.width}", f"kernel={spec.kernel}"]
            if spec.stride != 1:
                parts.append(f"stride={spec.stride}")
            if spec.residual:
                parts.append("residual")
            if spec.skip:
                parts.append("skip")
            branches.append(" ".join(parts))
        lines.append("stage " + " | ".join(branches))
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ModelConfig:
    fields: dict[str, float] = {}
    stages = []
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key == "stage":
            stage = []
            for branch in rest.split("|"):
                tokens = branch.split()
                if not tokens:
                    raise ConfigError(f"empty branch in stage line: {raw_line!r}")
                kwargs = {"kind": tokens[0]}
                for token in tokens[1:]:
                    if token == "residual":
                        kwargs["residual"] = True
                    elif token == "skip":
                        kwargs["skip"] = True
                    elif "=" in token:
                        name, value = token.split("=", 1)
                        kwargs[name] = int(value)
                    else:
                        raise ConfigError(f"bad token {token!r} in stage line: {raw_line!r}")
                stage.append(LayerSpec(**kwargs))
            stages.append(tuple(stage))
        elif key in ("input_channels", "n_classes", "width_multiplier"):
            fields[key] = int(rest)
        elif key == "dropout_rate":
            fields[key] = float(rest)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    config = ModelConfig(stages=tuple(stages), **fields)
    config.validate()
    return config


def load_preset(name: str) -> ModelConfig:
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    text = resources.files("swishnet").joinpath("presets", f"{name}.cfg").read_text()
    return parse_config(text)


def _conv_param_shapes(spec: LayerSpec, c_in: int, mult: int) -> dict[str, tuple]:
    doubled = 2 * spec.width * mult
    if spec.kind == GATED_CONV:
        return {"w": (spec.kernel, c_in, doubled), "b": (doubled,)}
    return {"wd": (spec.kernel, c_in), "wp": (c_in, doubled), "b": (doubled,)}


def _param_shapes(config: ModelConfig) -> dict[str, tuple]:
    shapes: dict[str, tuple] = {}
    c_in = config.input_channels
    for i, stage in enumerate(config.stages):
        for j, spec in enumerate(stage):
            for suffix, shape in _conv_param_shapes(spec, c_in, config.width_multiplier).items():
                shapes[f"s{i}.b{j}.{suffix}"] = shape
        c_in = config.width_multiplier * sum(spec.width for spec in stage)
    head_c = config.head_channels()
    channels = config.stage_channels()
    for i in config.aligner_strides():
        shapes[f"skip{i}.w"] = (1, channels[i], head_c)
        shapes[f"skip{i}.b"] = (head_c,)
    shapes["head.w"] = (1, head_c, config.n_classes)
    shapes["head.b"] = (config.n_classes,)
    return shapes


def param_count(config: ModelConfig) -> int:
    """Closed-form parameter count for a config."""
    config.validate()
    return sum(math.prod(shape) for shape in _param_shapes(config).values())


def _glorot_limit(shape: tuple) -> float:
    if len(shape) == 3:  # conv (K, C_in, C_out)
        fan_in, fan_out = shape[0] * shape[1], shape[0] * shape[2]
    elif len(shape) == 2:  # depthwise (K, C) or pointwise (C_in, C_out)
        fan_in, fan_out = shape[0], shape[1]
    else:
        return 0.0  # biases start at zero
    return math.sqrt(6.0 / (fan_in + fan_out))


def build(config: ModelConfig, rng_seed: int = 0) -> Model:
    """Allocate and initialize parameters; deterministic per seed.

    Initial values are quantized to float32-representable numbers so a fresh
    model survives the float32 weight file exactly.
    """
    config.validate()
    rng = np.random.default_rng(rng_seed)
    params: dict[str, Tensor] = {}
    for name, shape in _param_shapes(config).items():
        limit = _glorot_limit(shape)
        if limit == 0.0:
            data = np.zeros(shape)
        else:
            data = rng.uniform(-limit, limit, size=shape)
            data = data.astype(np.float32).astype(np.float64)
        params[name] = Tensor(data, requires_grad=True)
    return Model(config=config, params=params, metadata={"seed": str(rng_seed)})


def _branch_forward(spec: LayerSpec, x, params: dict, prefix: str, mult: int):
    width = spec.width * mult
    if spec.kind == GATED_CONV:
        y = ops.conv1d(x, params[f"{prefix}.w"], params[f"{prefix}.b"],
                       stride=spec.stride, causal=True)
    else:
        y = ops.separable_conv1d(x, params[f"{prefix}.wd"], params[f"{prefix}.wp"],
                                 params[f"{prefix}.b"], stride=spec.stride, causal=True)
    content, gate = ops.split_channels(y, width)
    return ops.gated(content, gate)


def forward(
    model: Model,
    features,
    training: bool = False,
    rng: np.random.Generator | None = None,
    trace: list | None = None,
    ablate: frozenset | set = frozenset(),
) -> Tensor:
    """Run the network on (T, 20) or (B, T, 20) features; returns 3 logits.

    trace, when a list, collects (stage_name, cumulative_stride, activations)
    tuples for causality tests. ablate names connections to sever, e.g.
    "residual:s3" or "skip:s5" (connectivity tests only).
    """
    config, params = model.config, model.params
    if isinstance(features, FeatureMatrix):
        features = features.values
    x = features if isinstance(features, Tensor) else Tensor(features)
    t_in = x.data.shape[-2]
    if x.data.shape[-1] != config.input_channels:
        raise ConfigError(
            f"model expects {config.input_channels} input channels, got {x.data.shape[-1]}"
        )
    minimum = config.min_input_frames()
    if t_in < minimum:
        raise TooShortError(f"input of {t_in} frames is below the model minimum of {minimum}")

    aligner_strides = config.aligner_strides()
    skips = []
    cum_stride = 1
    n_stages = len(config.stages)
    for i, stage in enumerate(config.stages):
        branch_outs = [
            _branch_forward(spec, x, params, f"s{i}.b{j}", config.width_multiplier)
            for j, spec in enumerate(stage)
        ]
        out = branch_outs[0] if len(branch_outs) == 1 else ops.concat_channels(branch_outs)
        if stage[0].residual and f"residual:s{i}" not in ablate:
            out = ops.add_residual(out, x)
        cum_stride *= stage[0].stride
        if trace is not None:
            trace.append((f"s{i}", cum_stride, out.data))
        if stage[0].skip and f"skip:s{i}" not in ablate:
            skips.append(ops.conv1d(out, params[f"skip{i}.w"], params[f"skip{i}.b"],
                                    stride=aligner_strides[i], causal=True))
        x = out
        if training and config.dropout_rate > 0.0 and i < n_stages - 1:
            x = ops.dropout(x, config.dropout_rate, training=True, rng=rng)

    if skips:
        head_in = skips[0]
        for s in skips[1:]:
            head_in = ops.add_residual(head_in, s)
    else:
        head_in = x
    logits = ops.conv1d(head_in, params["head.w"], params["head.b"], stride=1, causal=True)
    return ops.global_avg_pool_time(logits)


def predict_proba(model: Model, features) -> np.ndarray:
    """Class probabilities for one clip or a batch (inference mode)."""
    logits = forward(model, features, training=False)
    return ops.softmax(logits).data


def classify(model: Model, features) -> tuple[int, np.ndarray]:
    probs = predict_proba(model, features)
    return int(np.argmax(probs, axis=-1)), probs
