"""Differentiable operations for the gated 1D conv nets and the FNN baseline.

Time-series tensors are (T, C) or batched (B, T, C); dense inputs are (D,)
or (B, D). Causal convolutions left-pad with zeros so outputs at time t see
inputs at times <= t only; with stride s the output length is ceil(T/s).
"""

import numpy as np

from . import backend
from .errors import ShapeError
from .tensor import Tensor, as_tensor, from_op

SELU_ALPHA = 1.6732632423543772
SELU_SCALE = 1.0507009873554805
ALPHA_DROPOUT_VALUE = -SELU_SCALE * SELU_ALPHA  # -1.7581, the SELU negative saturation


def _as3d(data: np.ndarray):
    if data.ndim == 2:
        return data[None], True
    if data.ndim == 3:
        return data, False
    raise ShapeError(f"expected (T, C) or (B, T, C), got shape {data.shape}")


def conv_output_len(t: int, kernel: int, stride: int, causal: bool) -> int:
    if causal:
        return (t - 1) // stride + 1
    return (t - kernel) // stride + 1


def conv1d(x, w, b, stride: int = 1, causal: bool = True) -> Tensor:
    """1D convolution along time: weights (K, C_in, C_out), bias (C_out,)."""
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    xd, squeezed = _as3d(x.data)
    kernel, c_in, c_out = w.data.shape
    if xd.shape[2] != c_in:
        raise ShapeError(f"conv1d: input has {xd.shape[2]} channels, weights expect {c_in}")
    if b.data.shape != (c_out,):
        raise ShapeError(f"conv1d: bias shape {b.data.shape} != ({c_out},)")
    if not causal and xd.shape[1] < kernel:
        raise ShapeError(f"conv1d: input length {xd.shape[1]} < kernel {kernel}")

    xp = np.pad(xd, ((0, 0), (kernel - 1, 0), (0, 0))) if causal and kernel > 1 else xd
    kern = backend.active()
    y = kern.conv1d_fwd(xp, w.data, b.data, stride)
    out_data = y[0] if squeezed else y

    def bwd(g):
        gy = g[None] if squeezed else g
        gy = np.ascontiguousarray(gy)
        if x.requires_grad:
            gxp = kern.conv1d_bwd_x(gy, w.data, stride, xp.shape[1])
            gx = gxp[:, kernel - 1:, :] if causal and kernel > 1 else gxp
            x.accumulate_grad(gx[0] if squeezed else gx)
        if w.requires_grad:
            w.accumulate_grad(kern.conv1d_bwd_w(xp, gy, stride, kernel))
        if b.requires_grad:
            b.accumulate_grad(gy.sum(axis=(0, 1)))

    return from_op(out_data, (x, w, b), bwd)


def separable_conv1d(x, w_depth, w_point, b, stride: int = 1, causal: bool = True) -> Tensor:
    """Depthwise conv (K, C_in) followed by a pointwise mix (C_in, C_out) plus bias."""
    x, w_depth, w_point, b = map(as_tensor, (x, w_depth, w_point, b))
    xd, squeezed = _as3d(x.data)
    kernel, c_in = w_depth.data.shape
    if xd.shape[2] != c_in:
        raise ShapeError(f"separable_conv1d: input has {xd.shape[2]} channels, expected {c_in}")
    if w_point.data.shape[0] != c_in:
        raise ShapeError("separable_conv1d: depthwise/pointwise channel mismatch")
    c_out = w_point.data.shape[1]
    if b.data.shape != (c_out,):
        raise ShapeError(f"separable_conv1d: bias shape {b.data.shape} != ({c_out},)")

    xp = np.pad(xd, ((0, 0), (kernel - 1, 0), (0, 0))) if causal and kernel > 1 else xd
    kern = backend.active()
    yd = kern.dwconv1d_fwd(xp, w_depth.data, stride)
    y = yd @ w_point.data + b.data
    out_data = y[0] if squeezed else y

    def bwd(g):
        gy = g[None] if squeezed else g
        gyd = np.ascontiguousarray(gy @ w_point.data.T)
        if x.requires_grad:
            gxp = kern.dwconv1d_bwd_x(gyd, w_depth.data, stride, xp.shape[1])
            gx = gxp[:, kernel - 1:, :] if causal and kernel > 1 else gxp
            x.accumulate_grad(gx[0] if squeezed else gx)
        if w_depth.requires_grad:
            w_depth.accumulate_grad(kern.dwconv1d_bwd_w(xp, gyd, stride, kernel))
        if w_point.requires_grad:
            w_point.accumulate_grad(np.einsum("btc,bto->co", yd, gy))
        if b.requires_grad:
            b.accumulate_grad(gy.sum(axis=(0, 1)))

    return from_op(out_data, (x, w_depth, w_point, b), bwd)


def sigmoid_data(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def gated(a, g) -> Tensor:
    """tanh(a) * sigmoid(g); the content/gate halves of a doubled-width conv."""
    a, g = as_tensor(a), as_tensor(g)
    if a.shape != g.shape:
        raise ShapeError(f"gated: shapes {a.shape} and {g.shape} differ")
    ta = np.tanh(a.data)
    sg = sigmoid_data(g.data)
    out_data = ta * sg

    def bwd(grad):
        if a.requires_grad:
            a.accumulate_grad(grad * sg * (1.0 - ta * ta))
        if g.requires_grad:
            g.accumulate_grad(grad * ta * sg * (1.0 - sg))

    return from_op(out_data, (a, g), bwd)


def split_channels(x, n_first: int):
    """Split the channel (last) axis in two; used to halve a 2W gated conv."""
    x = as_tensor(x)
    first_data = np.ascontiguousarray(x.data[..., :n_first])
    second_data = np.ascontiguousarray(x.data[..., n_first:])

    def bwd_first(g):
        full = np.zeros_like(x.data)
        full[..., :n_first] = g
        x.accumulate_grad(full)

    def bwd_second(g):
        full = np.zeros_like(x.data)
        full[..., n_first:] = g
        x.accumulate_grad(full)

    return from_op(first_data, (x,), bwd_first), from_op(second_data, (x,), bwd_second)


def dense(x, w, b) -> Tensor:
    """Affine map: x (D,) or (B, D), w (D, O), b (O,)."""
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if x.data.shape[-1] != w.data.shape[0]:
        raise ShapeError(f"dense: input dim {x.data.shape[-1]} != weight rows {w.data.shape[0]}")
    out_data = x.data @ w.data + b.data

    def bwd(g):
        if x.requires_grad:
            x.accumulate_grad(g @ w.data.T)
        if w.requires_grad:
            if x.data.ndim == 1:
                w.accumulate_grad(np.outer(x.data, g))
            else:
                w.accumulate_grad(x.data.T @ g)
        if b.requires_grad:
            b.accumulate_grad(g if g.ndim == 1 else g.sum(axis=0))

    return from_op(out_data, (x, w, b), bwd)


def selu(x) -> Tensor:
    x = as_tensor(x)
    pos = x.data > 0
    expx = np.exp(np.minimum(x.data, 0.0))
    out_data = SELU_SCALE * np.where(pos, x.data, SELU_ALPHA * (expx - 1.0))
    deriv = SELU_SCALE * np.where(pos, 1.0, SELU_ALPHA * expx)
    return from_op(out_data, (x,), lambda g: x.accumulate_grad(g * deriv))


def softmax(x) -> Tensor:
    """Softmax over the last (class) axis."""
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def bwd(g):
        inner = (g * s).sum(axis=-1, keepdims=True)
        x.accumulate_grad(s * (g - inner))

    return from_op(s, (x,), bwd)


def global_avg_pool_time(x) -> Tensor:
    """Mean over the time axis: (T, C) -> (C,) or (B, T, C) -> (B, C)."""
    x = as_tensor(x)
    xd, squeezed = _as3d(x.data)
    t = xd.shape[1]
    out = xd.mean(axis=1)

    def bwd(g):
        gy = g[None] if squeezed else g
        x_grad = np.repeat(gy[:, None, :] / t, t, axis=1)
        x.accumulate_grad(x_grad[0] if squeezed else x_grad)

    return from_op(out[0] if squeezed else out, (x,), bwd)


def concat_channels(parts) -> Tensor:
    """Concatenate along the channel (last) axis."""
    parts = [as_tensor(p) for p in parts]
    widths = [p.data.shape[-1] for p in parts]
    out_data = np.concatenate([p.data for p in parts], axis=-1)

    def bwd(g):
        start = 0
        for p, width in zip(parts, widths):
            if p.requires_grad:
                p.accumulate_grad(g[..., start:start + width])
            start += width

    return from_op(out_data, tuple(parts), bwd)


def add_residual(x, shortcut) -> Tensor:
    """Elementwise additive shortcut; shapes must match exactly."""
    x, shortcut = as_tensor(x), as_tensor(shortcut)
    if x.shape != shortcut.shape:
        raise ShapeError(f"residual: shapes {x.shape} and {shortcut.shape} differ")
    return x + shortcut


def dropout(x, rate: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout; identity when not training or rate == 0."""
    x = as_tensor(x)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs an explicit rng")
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    out_data = x.data * mask
    return from_op(out_data, (x,), lambda g: x.accumulate_grad(g * mask))


def alpha_dropout(x, rate: float, training: bool, rng: np.random.Generator | None = None) -> Tensor:
    """SELU-preserving dropout: dropped units saturate to -1.7581, then affine-corrected."""
    x = as_tensor(x)
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise ValueError("alpha_dropout in training mode needs an explicit rng")
    keep = 1.0 - rate
    a = (keep + ALPHA_DROPOUT_VALUE**2 * keep * rate) ** -0.5
    b_const = -a * ALPHA_DROPOUT_VALUE * rate
    mask = rng.random(x.shape) < keep
    out_data = a * np.where(mask, x.data, ALPHA_DROPOUT_VALUE) + b_const
    return from_op(out_data, (x,), lambda g: x.accumulate_grad(g * a * mask))


def log_softmax_data(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def cross_entropy(logits, labels) -> Tensor:
    """Mean negative log softmax probability of the true class.

    logits: (C,) with an int label, or (B, C) with (B,) labels. Stabilized
    via log-sum-exp.
    """
    logits = as_tensor(logits)
    single = logits.data.ndim == 1
    lg = logits.data[None] if single else logits.data
    idx = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if idx.min() < 0 or idx.max() >= lg.shape[-1]:
        raise ShapeError(f"label out of range for {lg.shape[-1]} classes: {labels}")
    logp = log_softmax_data(lg)
    n = lg.shape[0]
    loss = -logp[np.arange(n), idx].mean()

    def bwd(g):
        grad = np.exp(logp)
        grad[np.arange(n), idx] -= 1.0
        grad *= float(g) / n
        logits.accumulate_grad(grad[0] if single else grad)

    return from_op(np.float64(loss), (logits,), bwd)
