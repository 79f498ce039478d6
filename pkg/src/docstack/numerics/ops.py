"""Forward and backward kernels for the from-scratch network.

Arrays are plain ``numpy.ndarray`` in float64. Image tensors are NCHW; the
unbatched CHW form is accepted by the forward kernels and returned unbatched.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


def check_finite(x: np.ndarray, what: str = "tensor") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        bad = int(np.size(x) - np.count_nonzero(np.isfinite(x)))
        raise NonFiniteError(f"{what} has {bad} non-finite value(s)")
    return x


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(grad: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Gradient at exactly 0 is 0."""
    if grad.shape != x.shape:
        raise ShapeError(f"relu_backward: grad {grad.shape} vs input {x.shape}")
    return grad * (x > 0.0)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    if np.isnan(logits).any():
        raise NonFiniteError("softmax: NaN in logits")
    z = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of integer ``labels`` under ``softmax(logits)``."""
    lp = log_softmax(logits)
    return float(-lp[np.arange(len(labels)), labels].mean())


def softmax_crossentropy_backward(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Fused gradient of mean cross-entropy w.r.t. logits: (p - onehot) / N."""
    probs = np.atleast_2d(probs)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if probs.shape[0] != labels.shape[0]:
        raise ShapeError(f"{probs.shape[0]} probability rows for {labels.shape[0]} labels")
    g = probs.copy()
    g[np.arange(len(labels)), labels] -= 1.0
    return g / len(labels)


# -- dense --------------------------------------------------------------------

def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``x @ w + b`` with ``w`` shaped (in, out)."""
    if x.shape[-1] != w.shape[0]:
        raise ShapeError(f"dense: input width {x.shape[-1]} vs weight {w.shape}")
    return x @ w + b


def dense_backward(grad: np.ndarray, x: np.ndarray, w: np.ndarray):
    if grad.shape[:-1] != x.shape[:-1] or grad.shape[-1] != w.shape[1]:
        raise ShapeError(f"dense_backward: grad {grad.shape}, input {x.shape}, weight {w.shape}")
    return grad @ w.T, x.T @ grad, grad.sum(axis=0)


# -- convolution --------------------------------------------------------------
#
# The training path keeps activations channel-last (N, H, W, C) so the im2col
# matrix and its gradient are built from contiguous slices; the public
# channel-first functions below wrap the same kernels.

def _out_size(size: int, k: int, stride: int, pad: int, what: str) -> int:
    span = size + 2 * pad - k
    if span < 0 or span % stride:
        raise ShapeError(
            f"{what}: (size {size} + 2*pad {pad} - kernel {k}) is not a non-negative "
            f"multiple of stride {stride}"
        )
    return span // stride + 1


def _as_batch(x: np.ndarray):
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"expected CHW or NCHW input, got shape {x.shape}")


def im2col_nhwc(x: np.ndarray, kh: int, kw: int, stride: int, pad: int):
    """Rows are output positions (n, i, j); columns are (di, dj, c)."""
    n, h, w, c = x.shape
    ho = _out_size(h, kh, stride, pad, "conv2d height")
    wo = _out_size(w, kw, stride, pad, "conv2d width")
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0))) if pad else x
    cols = np.empty((n, ho, wo, kh, kw, c), dtype=x.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, :, i, j, :] = xp[:, i:i + stride * ho:stride, j:j + stride * wo:stride, :]
    return cols.reshape(n * ho * wo, kh * kw * c), ho, wo


def col2im_nhwc(dcols: np.ndarray, x_shape, kh: int, kw: int, stride: int, pad: int, ho: int, wo: int):
    n, h, w, c = x_shape
    d = dcols.reshape(n, ho, wo, kh, kw, c)
    dxp = np.zeros((n, h + 2 * pad, w + 2 * pad, c), dtype=dcols.dtype)
    for i in range(kh):
        for j in range(kw):
            dxp[:, i:i + stride * ho:stride, j:j + stride * wo:stride, :] += d[:, :, :, i, j, :]
    if pad:
        return dxp[:, pad:pad + h, pad:pad + w, :]
    return dxp


def kernel_matrix(kernels: np.ndarray) -> np.ndarray:
    """(O, C, kH, kW) kernels as the (kH*kW*C, O) matrix matching :func:`im2col_nhwc`."""
    return kernels.transpose(2, 3, 1, 0).reshape(-1, kernels.shape[0])


def conv2d_nhwc_forward(x, kernels, bias, stride: int = 1, pad: int = 0):
    """Returns ``(out, cols)``; ``out`` is (N, H', W', O)."""
    o, c, kh, kw = kernels.shape
    if x.shape[3] != c:
        raise ShapeError(f"conv2d: input has {x.shape[3]} channels, kernels expect {c}")
    if bias.shape != (o,):
        raise ShapeError(f"conv2d: bias shape {bias.shape}, expected ({o},)")
    cols, ho, wo = im2col_nhwc(x, kh, kw, stride, pad)
    out = cols @ kernel_matrix(kernels)
    out += bias
    return out.reshape(x.shape[0], ho, wo, o), cols


def conv2d_nhwc_backward(grad, x_shape, kernels, cols, stride: int = 1, pad: int = 0,
                         need_input_grad: bool = True):
    """Returns ``(dx, dkernels, dbias)``; ``dx`` is None when not requested."""
    o, c, kh, kw = kernels.shape
    n, h, w, _ = x_shape
    ho = _out_size(h, kh, stride, pad, "conv2d height")
    wo = _out_size(w, kw, stride, pad, "conv2d width")
    if grad.shape != (n, ho, wo, o):
        raise ShapeError(f"conv2d_backward: grad {grad.shape}, expected {(n, ho, wo, o)}")
    g = grad.reshape(-1, o)
    dk = (cols.T @ g).reshape(kh, kw, c, o).transpose(3, 2, 0, 1)
    db = g.sum(axis=0)
    dx = None
    if need_input_grad:
        dx = col2im_nhwc(g @ kernel_matrix(kernels).T, x_shape, kh, kw, stride, pad, ho, wo)
    return dx, np.ascontiguousarray(dk), db


def conv2d_forward(x, kernels, bias, stride: int = 1, pad: int = 0):
    """Cross-correlation of ``x`` (C,H,W or N,C,H,W) with ``kernels`` (O,C,kH,kW)."""
    xb, single = _as_batch(np.asarray(x, dtype=np.float64))
    if xb.shape[1] != kernels.shape[1]:
        raise ShapeError(f"conv2d: input has {xb.shape[1]} channels, kernels expect {kernels.shape[1]}")
    out, _ = conv2d_nhwc_forward(xb.transpose(0, 2, 3, 1), kernels, bias, stride, pad)
    out = out.transpose(0, 3, 1, 2)
    return out[0] if single else out


def conv2d_backward(grad, x, kernels, stride: int = 1, pad: int = 0):
    """Returns ``(dx, dkernels, dbias)`` for channel-first tensors."""
    xb, single = _as_batch(np.asarray(x, dtype=np.float64))
    gb = grad[None] if grad.ndim == 3 else grad
    xl = xb.transpose(0, 2, 3, 1)
    _, _, kh, kw = kernels.shape
    cols, _, _ = im2col_nhwc(xl, kh, kw, stride, pad)
    dx, dk, db = conv2d_nhwc_backward(gb.transpose(0, 2, 3, 1), xl.shape, kernels, cols, stride, pad)
    dx = dx.transpose(0, 3, 1, 2)
    return (dx[0] if single else dx), dk, db


# -- max pooling --------------------------------------------------------------

def maxpool2d_nhwc(x, window: int = 2, stride: int = 2):
    """Channel-last max pool; returns ``(out, flat argmax indices into x)``."""
    n, h, w, c = x.shape
    ho = _out_size(h, window, stride, 0, "maxpool height")
    wo = _out_size(w, window, stride, 0, "maxpool width")
    win = sliding_window_view(x, (window, window), axis=(1, 2))[:, ::stride, ::stride]
    flat = win.reshape(n, ho, wo, c, window * window)
    local = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, local[..., None], axis=-1)[..., 0]
    di, dj = np.divmod(local, window)
    rows = np.arange(ho)[None, :, None, None] * stride + di
    cols = np.arange(wo)[None, None, :, None] * stride + dj
    idx = ((np.arange(n)[:, None, None, None] * h + rows) * w + cols) * c + np.arange(c)
    return out, idx


def maxpool2d(x, window: int = 2, stride: int = 2):
    """Window maxima plus flat argmax indices into ``x`` (ties: first row-major)."""
    xb, single = _as_batch(np.asarray(x, dtype=np.float64))
    n, c, h, w = xb.shape
    ho = _out_size(h, window, stride, 0, "maxpool height")
    wo = _out_size(w, window, stride, 0, "maxpool width")
    win = sliding_window_view(xb, (window, window), axis=(2, 3))[:, :, ::stride, ::stride]
    flat = win.reshape(n, c, ho, wo, window * window)
    local = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, local[..., None], axis=-1)[..., 0]
    di, dj = np.divmod(local, window)
    rows = np.arange(ho)[:, None] * stride + di
    cols = np.arange(wo)[None, :] * stride + dj
    base = (np.arange(n)[:, None, None, None] * c + np.arange(c)[None, :, None, None]) * (h * w)
    idx = base + rows * w + cols
    if single:
        return out[0], idx[0]
    return out, idx


def maxpool2d_backward(grad, argmax, input_shape):
    if grad.shape != argmax.shape:
        raise ShapeError(f"maxpool2d_backward: grad {grad.shape} vs cached argmax {argmax.shape}")
    size = int(np.prod(input_shape))
    dx = np.bincount(argmax.reshape(-1), weights=grad.reshape(-1), minlength=size)
    return dx.reshape(input_shape).astype(grad.dtype, copy=False)
