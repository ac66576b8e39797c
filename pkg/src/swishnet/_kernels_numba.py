"""Numba-compiled twins of the numpy kernels in ``_kernels_numpy``.

Same signatures and padded-input conventions; thin python wrappers allocate
the outputs so the jitted loops stay dtype-generic (f32 and f64 both work).
"""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def _conv1d_fwd(xp, w, b, stride, y):
    n_batch, t_out, c_out = y.shape
    kernel, c_in, _ = w.shape
    for bi in range(n_batch):
        for t in range(t_out):
            base = t * stride
            for o in range(c_out):
                acc = b[o]
                for k in range(kernel):
                    for c in range(c_in):
                        acc += xp[bi, base + k, c] * w[k, c, o]
                y[bi, t, o] = acc


def conv1d_fwd(xp, w, b, stride):
    n_batch, t_pad, _ = xp.shape
    kernel, _, c_out = w.shape
    t_out = (t_pad - kernel) // stride + 1
    y = np.empty((n_batch, t_out, c_out), dtype=xp.dtype)
    _conv1d_fwd(xp, w, b, stride, y)
    return y


@njit(cache=True, nogil=True)
def _conv1d_bwd_x(gy, w, stride, gx):
    n_batch, t_out, c_out = gy.shape
    kernel, c_in, _ = w.shape
    for bi in range(n_batch):
        for t in range(t_out):
            base = t * stride
            for o in range(c_out):
                g = gy[bi, t, o]
                for k in range(kernel):
                    for c in range(c_in):
                        gx[bi, base + k, c] += g * w[k, c, o]


def conv1d_bwd_x(gy, w, stride, t_pad):
    gx = np.zeros((gy.shape[0], t_pad, w.shape[1]), dtype=gy.dtype)
    _conv1d_bwd_x(gy, w, stride, gx)
    return gx


@njit(cache=True, nogil=True)
def _conv1d_bwd_w(xp, gy, stride, gw):
    n_batch, t_out, c_out = gy.shape
    kernel, c_in, _ = gw.shape
    for bi in range(n_batch):
        for t in range(t_out):
            base = t * stride
            for o in range(c_out):
                g = gy[bi, t, o]
                for k in range(kernel):
                    for c in range(c_in):
                        gw[k, c, o] += g * xp[bi, base + k, c]


def conv1d_bwd_w(xp, gy, stride, kernel):
    gw = np.zeros((kernel, xp.shape[2], gy.shape[2]), dtype=gy.dtype)
    _conv1d_bwd_w(xp, gy, stride, gw)
    return gw


@njit(cache=True, nogil=True)
def _dwconv1d_fwd(xp, wd, stride, y):
    n_batch, t_out, c = y.shape
    kernel = wd.shape[0]
    for bi in range(n_batch):
        for t in range(t_out):
            base = t * stride
            for ch in range(c):
                acc = xp[bi, base, ch] * wd[0, ch]
                for k in range(1, kernel):
                    acc += xp[bi, base + k, ch] * wd[k, ch]
                y[bi, t, ch] = acc


def dwconv1d_fwd(xp, wd, stride):
    n_batch, t_pad, c = xp.shape
    kernel = wd.shape[0]
    t_out = (t_pad - kernel) // stride + 1
    y = np.empty((n_batch, t_out, c), dtype=xp.dtype)
    _dwconv1d_fwd(xp, wd, stride, y)
    return y


@njit(cache=True, nogil=True)
def _dwconv1d_bwd_x(gy, wd, stride, gx):
    n_batch, t_out, c = gy.shape
    kernel = wd.shape[0]
    for bi in range(n_batch):
        for t in range(t_out):
            base = t * stride
            for ch in range(c):
                g = gy[bi, t, ch]
                for k in range(kernel):
                    gx[bi, base + k, ch] += g * wd[k, ch]


def dwconv1d_bwd_x(gy, wd, stride, t_pad):
    gx = np.zeros((gy.shape[0], t_pad, gy.shape[2]), dtype=gy.dtype)
    _dwconv1d_bwd_x(gy, wd, stride, gx)
    return gx


@njit(cache=True, nogil=True)
def _dwconv1d_bwd_w(xp, gy, stride, gwd):
    n_batch, t_out, c = gy.shape
    kernel = gwd.shape[0]
    for bi in range(n_batch):
        for t in range(t_out):
            base = t * stride
            for ch in range(c):
                g = gy[bi, t, ch]
                for k in range(kernel):
                    gwd[k, ch] += g * xp[bi, base + k, ch]


def dwconv1d_bwd_w(xp, gy, stride, kernel):
    gwd = np.zeros((kernel, xp.shape[2]), dtype=gy.dtype)
    _dwconv1d_bwd_w(xp, gy, stride, gwd)
    return gwd


@njit(cache=True, nogil=True)
def _gauss_logpdf(x, means, variances, out):
    n, d = x.shape
    k = means.shape[0]
    log2pi = np.log(2.0 * np.pi)
    for j in range(k):
        const = -0.5 * d * log2pi
        for dd in range(d):
            const -= 0.5 * np.log(variances[j, dd])
        for i in range(n):
            quad = 0.0
            for dd in range(d):
                diff = x[i, dd] - means[j, dd]
                quad += diff * diff / variances[j, dd]
            out[i, j] = const - 0.5 * quad


def gauss_logpdf(x, means, variances):
    out = np.empty((x.shape[0], means.shape[0]), dtype=x.dtype)
    _gauss_logpdf(x, means, variances, out)
    return out
