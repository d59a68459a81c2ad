"""Pure-numpy convolution kernels (fallback backend).

Forward uses sliding windows + einsum; backward loops over the kernel taps
only, with vectorized batch/channel math inside each tap. Depthwise
convolutions get a dedicated path because the generic grouped loop would
degenerate into one python iteration per channel.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _pad(x: np.ndarray, padding: int) -> np.ndarray:
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def _windows(xp: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    # view of shape (N, C, Ho, Wo, kh, kw)
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    return win[:, :, ::stride, ::stride]


def conv2d_forward(x, w, stride, padding, groups):
    n, c = x.shape[:2]
    o, cg, kh, kw = w.shape
    xp = _pad(x, padding)
    if groups == 1:
        win = _windows(xp, kh, kw, stride)
        out = np.einsum("nchwij,ocij->nohw", win, w, optimize=True)
    elif groups == c and o == c and cg == 1:
        win = _windows(xp, kh, kw, stride)
        out = np.einsum("nchwij,cij->nchw", win, w[:, 0], optimize=True)
    else:
        og = o // groups
        win = _windows(xp, kh, kw, stride)
        parts = []
        for g in range(groups):
            wg = w[g * og : (g + 1) * og]
            xg = win[:, g * cg : (g + 1) * cg]
            parts.append(np.einsum("nchwij,ocij->nohw", xg, wg, optimize=True))
        out = np.concatenate(parts, axis=1)
    return np.ascontiguousarray(out)


def conv2d_backward(x, w, stride, padding, groups, gout, need_input=True, need_weight=True):
    """Gradients w.r.t. input and weights; bias gradient is handled by the caller."""
    n, c, h, wid = x.shape
    o, cg, kh, kw = w.shape
    ho, wo = gout.shape[2], gout.shape[3]
    xp = _pad(x, padding)
    gxp = np.zeros_like(xp) if need_input else None
    gw = np.zeros_like(w) if need_weight else None

    if groups == c and o == c and cg == 1:
        for i in range(kh):
            for j in range(kw):
                if need_weight:
                    xs = xp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride]
                    gw[:, 0, i, j] = np.einsum("nchw,nchw->c", gout, xs, optimize=True)
                if need_input:
                    gxp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += (
                        gout * w[:, 0, i, j].reshape(1, -1, 1, 1)
                    )
    else:
        og = o // groups
        for g in range(groups):
            gs = gout[:, g * og : (g + 1) * og]
            ws = w[g * og : (g + 1) * og]
            for i in range(kh):
                for j in range(kw):
                    if need_weight:
                        xs = xp[
                            :,
                            g * cg : (g + 1) * cg,
                            i : i + stride * ho : stride,
                            j : j + stride * wo : stride,
                        ]
                        gw[g * og : (g + 1) * og, :, i, j] = np.einsum(
                            "nohw,nchw->oc", gs, xs, optimize=True
                        )
                    if need_input:
                        gxp[
                            :,
                            g * cg : (g + 1) * cg,
                            i : i + stride * ho : stride,
                            j : j + stride * wo : stride,
                        ] += np.einsum("nohw,oc->nchw", gs, ws[:, :, i, j], optimize=True)

    gx = None
    if need_input:
        if padding:
            gx = np.ascontiguousarray(gxp[:, :, padding : padding + h, padding : padding + wid])
        else:
            gx = gxp
    return gx, gw
