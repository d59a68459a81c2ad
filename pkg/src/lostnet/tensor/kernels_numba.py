"""Numba loop kernels for the hot convolution paths.

One grouped kernel covers standard (groups=1), grouped, and depthwise
(groups == channels) convolution; the group arithmetic costs nothing inside
the jit. Kernels are single-threaded on purpose: results stay bit-identical
regardless of machine, and the inference benchmark reports honest
one-thread numbers. Inputs arrive pre-padded.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_forward(xp, w, stride, ho, wo):
    n = xp.shape[0]
    o, cg, kh, kw = w.shape
    c = xp.shape[1]
    groups = c // cg
    og = o // groups
    out = np.zeros((n, o, ho, wo), dtype=xp.dtype)
    for b in range(n):
        for oc in range(o):
            c0 = (oc // og) * cg
            for oh in range(ho):
                ih0 = oh * stride
                for ow in range(wo):
                    iw0 = ow * stride
                    acc = out[b, oc, oh, ow]
                    for cc in range(cg):
                        ci = c0 + cc
                        for i in range(kh):
                            for j in range(kw):
                                acc += xp[b, ci, ih0 + i, iw0 + j] * w[oc, cc, i, j]
                    out[b, oc, oh, ow] = acc
    return out


@njit(cache=True)
def conv2d_backward_input(gout, w, gxp, stride):
    n, o, ho, wo = gout.shape
    cg, kh, kw = w.shape[1], w.shape[2], w.shape[3]
    groups = gxp.shape[1] // cg
    og = o // groups
    for b in range(n):
        for oc in range(o):
            c0 = (oc // og) * cg
            for oh in range(ho):
                ih0 = oh * stride
                for ow in range(wo):
                    iw0 = ow * stride
                    gv = gout[b, oc, oh, ow]
                    for cc in range(cg):
                        ci = c0 + cc
                        for i in range(kh):
                            for j in range(kw):
                                gxp[b, ci, ih0 + i, iw0 + j] += gv * w[oc, cc, i, j]
    return gxp


@njit(cache=True)
def conv2d_backward_weight(xp, gout, gw, stride):
    n, o, ho, wo = gout.shape
    cg, kh, kw = gw.shape[1], gw.shape[2], gw.shape[3]
    groups = xp.shape[1] // cg
    og = o // groups
    for oc in range(o):
        c0 = (oc // og) * cg
        for cc in range(cg):
            ci = c0 + cc
            for i in range(kh):
                for j in range(kw):
                    acc = gw[oc, cc, i, j]
                    for b in range(n):
                        for oh in range(ho):
                            ih = oh * stride + i
                            for ow in range(wo):
                                acc += gout[b, oc, oh, ow] * xp[b, ci, ih, ow * stride + j]
                    gw[oc, cc, i, j] = acc
    return gw
