"""Independent reference implementations used as test oracles."""
import math

import numpy as np


def fnv1a_64_reference(text):
    """FNV-1a written from the published constants, byte by byte."""
    value = 14695981039346656037
    for byte in bytearray(text, "utf-8"):
        value = ((value ^ byte) * 1099511628211) % 2**64
    return value


def document_loss(inp, out, feats, gold, loss, target=None):
    """Loss of one document from the plain model equations."""
    h = inp[feats].sum(axis=0) / len(feats)
    s = out @ h
    if loss == "softmax":
        t = gold[0] if target is None else target
        m = s.max()
        return float(m + math.log(np.exp(s - m).sum()) - s[t])
    y = np.zeros(len(s))
    y[list(gold)] = 1.0
    # log(1 + e^s) - y*s, written stably
    return float(sum(max(v, 0.0) + math.log1p(math.exp(-abs(v))) - yv * v for v, yv in zip(s, y)))


def numeric_gradients(inp, out, feats, gold, loss, step=1e-5):
    """Central finite differences of ``document_loss`` w.r.t. both matrices."""
    grads = []
    for mat in (inp, out):
        g = np.zeros_like(mat)
        for idx in np.ndindex(mat.shape):
            keep = mat[idx]
            mat[idx] = keep + step
            up = document_loss(inp, out, feats, gold, loss)
            mat[idx] = keep - step
            down = document_loss(inp, out, feats, gold, loss)
            mat[idx] = keep
            g[idx] = (up - down) / (2 * step)
        grads.append(g)
    return grads


def cosine_scan(words, vectors, query, exclude, k):
    """Rank every vocabulary word by cosine to ``query`` with plain loops."""

    def norm(v):
        return math.sqrt(sum(x * x for x in v))

    qn = norm(query)
    scored = []
    for i, (word, vec) in enumerate(zip(words, vectors)):
        if word in exclude:
            continue
        vn = norm(vec)
        dot = sum(a * b for a, b in zip(vec, query))
        sim = dot / (vn * qn) if vn and qn else 0.0
        scored.append((-sim, i, word, sim))
    scored.sort()
    return [(sim, word) for _, _, word, sim in scored[:k]]


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v] if n else list(v)
