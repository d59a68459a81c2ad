"""Independent reference implementations the tests check against.

Everything here is deliberately naive (explicit loops, direct sums) and
stays independent of the library code paths it verifies.
"""

from __future__ import annotations

import numpy as np


def naive_conv2d(x, w, bias, stride, padding, groups):
    """Six-nested-loop convolution, float64 accumulation."""
    n, c, h, wd = x.shape
    o, cg, kh, kw = w.shape
    xp = np.zeros((n, c, h + 2 * padding, wd + 2 * padding))
    xp[:, :, padding : padding + h, padding : padding + wd] = x
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (wd + 2 * padding - kw) // stride + 1
    og = o // groups
    out = np.zeros((n, o, ho, wo))
    for b in range(n):
        for oc in range(o):
            g = oc // og
            for oh in range(ho):
                for ow in range(wo):
                    acc = 0.0
                    for cc in range(cg):
                        for i in range(kh):
                            for j in range(kw):
                                acc += xp[b, g * cg + cc, oh * stride + i, ow * stride + j] * w[oc, cc, i, j]
                    if bias is not None:
                        acc += bias[oc]
                    out[b, oc, oh, ow] = acc
    return out


def naive_linear(x, w, bias):
    n = x.shape[0]
    rows = x.reshape(n, -1)
    out = np.zeros((n, w.shape[1]))
    for i in range(n):
        for j in range(w.shape[1]):
            acc = 0.0
            for k in range(w.shape[0]):
                acc += rows[i, k] * w[k, j]
            if bias is not None:
                acc += bias[j]
            out[i, j] = acc
    return out


def naive_batchnorm_train(x, scale, shift, eps=1e-5):
    """Batch statistics by direct summation over (N, H, W) per channel."""
    n, c, h, w = x.shape
    out = np.zeros_like(x, dtype=np.float64)
    count = n * h * w
    for ch in range(c):
        total = 0.0
        for b in range(n):
            for i in range(h):
                for j in range(w):
                    total += x[b, ch, i, j]
        mean = total / count
        sq = 0.0
        for b in range(n):
            for i in range(h):
                for j in range(w):
                    sq += (x[b, ch, i, j] - mean) ** 2
        var = sq / count
        out[:, ch] = (x[:, ch] - mean) / np.sqrt(var + eps) * scale[ch] + shift[ch]
    return out


def naive_cross_entropy(probs, labels, floor=1e-12):
    total = 0.0
    n, k = probs.shape
    for i in range(n):
        for c in range(k):
            if labels[i] == c:
                total -= np.log(max(probs[i, c], floor))
    return total / n


def naive_dct2d(g):
    """Direct double-sum orthonormal type-II DCT for each coefficient."""
    n = g.shape[0]
    out = np.zeros((n, n))
    xs = np.arange(n)
    for u in range(n):
        cu = np.sqrt((1.0 if u == 0 else 2.0) / n)
        cos_u = np.cos(np.pi * (2 * xs + 1) * u / (2 * n))
        for v in range(n):
            cv = np.sqrt((1.0 if v == 0 else 2.0) / n)
            cos_v = np.cos(np.pi * (2 * xs + 1) * v / (2 * n))
            out[u, v] = cu * cv * float(np.sum(g * np.outer(cos_u, cos_v)))
    return out


def wilcoxon_auc(scores, positive):
    """Fraction of (positive, negative) pairs ordered correctly; ties 0.5."""
    pos = scores[positive]
    neg = scores[~positive]
    if len(pos) == 0 or len(neg) == 0:
        return None
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def finite_diff_grad(f, x, h=1e-5):
    """Central-difference gradient of scalar f at x (float64)."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy()
        xp[idx] += h
        xm = x.copy()
        xm[idx] -= h
        grad[idx] = (f(xp) - f(xm)) / (2 * h)
        it.iternext()
    return grad


def relative_error(a, b, tiny=1e-12):
    na = np.linalg.norm(np.ravel(a))
    nb = np.linalg.norm(np.ravel(b))
    return np.linalg.norm(np.ravel(a) - np.ravel(b)) / max(na, nb, tiny)
