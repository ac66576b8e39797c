"""Pure-numpy implementations of the hot inner-loop kernels.

Convolution kernels take a pre-padded input shaped (batch, time, channels)
and full weights shaped (kernel, in_channels, out_channels); depthwise
weights are (kernel, channels). Backward kernels return the gradient with
respect to the padded input, callers strip the padding.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

NAME = "numpy"


def _windows(xp: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    # (B, To, C, K) view, no copy
    return sliding_window_view(xp, kernel, axis=1)[:, ::stride]


def conv1d_fwd(xp: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int) -> np.ndarray:
    win = _windows(xp, w.shape[0], stride)
    y = np.tensordot(win, w, axes=([3, 2], [0, 1]))
    y += b
    return y


def conv1d_bwd_x(gy: np.ndarray, w: np.ndarray, stride: int, t_pad: int) -> np.ndarray:
    n_batch, t_out, _ = gy.shape
    kernel, c_in, _ = w.shape
    gx = np.zeros((n_batch, t_pad, c_in), dtype=gy.dtype)
    pos = stride * np.arange(t_out)
    for k in range(kernel):
        # positions are unique for fixed k, so fancy-indexed += is safe
        gx[:, pos + k, :] += gy @ w[k].T
    return gx


def conv1d_bwd_w(xp: np.ndarray, gy: np.ndarray, stride: int, kernel: int) -> np.ndarray:
    win = _windows(xp, kernel, stride)
    return np.einsum("btck,bto->kco", win, gy, optimize=True)


def dwconv1d_fwd(xp: np.ndarray, wd: np.ndarray, stride: int) -> np.ndarray:
    win = _windows(xp, wd.shape[0], stride)
    return np.einsum("btck,kc->btc", win, wd, optimize=True)


def dwconv1d_bwd_x(gy: np.ndarray, wd: np.ndarray, stride: int, t_pad: int) -> np.ndarray:
    n_batch, t_out, c = gy.shape
    kernel = wd.shape[0]
    gx = np.zeros((n_batch, t_pad, c), dtype=gy.dtype)
    pos = stride * np.arange(t_out)
    for k in range(kernel):
        gx[:, pos + k, :] += gy * wd[k]
    return gx


def dwconv1d_bwd_w(xp: np.ndarray, gy: np.ndarray, stride: int, kernel: int) -> np.ndarray:
    win = _windows(xp, kernel, stride)
    return np.einsum("btck,btc->kc", win, gy, optimize=True)


def gauss_logpdf(x: np.ndarray, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Log density of diagonal Gaussians: (N, D) points x (K, D) params -> (N, K)."""
    inv = 1.0 / variances
    const = -0.5 * (x.shape[1] * np.log(2.0 * np.pi) + np.sum(np.log(variances), axis=1))
    quad = (x * x) @ inv.T - 2.0 * (x @ (means * inv).T) + np.sum(means * means * inv, axis=1)
    return const - 0.5 * quad
