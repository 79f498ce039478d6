"""Slow reference implementations used only by the tests."""
import numpy as np


def conv2d_naive(x, k, b, stride=1, pad=0):
    n, c, h, w = x.shape
    o, _, kh, kw = k.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (w + 2 * pad - kw) // stride + 1
    out = np.zeros((n, o, ho, wo))
    for i in range(n):
        for f in range(o):
            for r in range(ho):
                for s in range(wo):
                    acc = b[f]
                    for ch in range(c):
                        for di in range(kh):
                            for dj in range(kw):
                                acc += xp[i, ch, r * stride + di, s * stride + dj] * k[f, ch, di, dj]
                    out[i, f, r, s] = acc
    return out


def maxpool_naive(x, window=2, stride=2):
    n, c, h, w = x.shape
    ho, wo = (h - window) // stride + 1, (w - window) // stride + 1
    out = np.zeros((n, c, ho, wo))
    arg = np.zeros((n, c, ho, wo), dtype=np.int64)
    for i in range(n):
        for ch in range(c):
            for r in range(ho):
                for s in range(wo):
                    best, where = -np.inf, None
                    for di in range(window):
                        for dj in range(window):
                            rr, ss = r * stride + di, s * stride + dj
                            if x[i, ch, rr, ss] > best:
                                best, where = x[i, ch, rr, ss], ((i * c + ch) * h + rr) * w + ss
                    out[i, ch, r, s], arg[i, ch, r, s] = best, where
    return out, arg


def central_difference(f, x, eps=1e-6):
    """Gradient of scalar ``f`` at ``x`` (modified in place and restored)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * eps)
    return g


def rel_error(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12))


def knn_brute(Xtr, ytr, Xte, k, c):
    out = []
    for x in Xte:
        d = [(float(np.sum((x - t) ** 2)), i) for i, t in enumerate(Xtr)]
        d.sort()
        votes = [0] * c
        for _, i in d[:k]:
            votes[ytr[i]] += 1
        best = max(votes)
        out.append(votes.index(best))
    return np.asarray(out)


def simplex_rows(rng, n, c, sharp=2.0, labels=None):
    z = rng.normal(size=(n, c))
    if labels is not None:
        z[np.arange(n), labels] += sharp
    p = np.exp(z)
    return p / p.sum(axis=1, keepdims=True)
