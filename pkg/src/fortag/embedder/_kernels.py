"""Compiled SGD kernels for the averaged-embedding classifier.

Every kernel is dtype-generic: float32 matrices train in single precision,
float64 matrices in double precision (used by the gradient checks).
"""
import math

import numba
import numpy as np

LOSS_SOFTMAX = 0
LOSS_OVA = 1


@numba.njit(cache=True, nogil=True)
def _log1p_exp(x):
    # log(1 + exp(x)) without overflow
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@numba.njit(cache=True, nogil=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@numba.njit(cache=True, nogil=True)
def sgd_step(inp, out, feats, gold, target, loss_kind, lr, hidden, grad, scores):
    """One SGD update on a single document; returns the pre-update loss.

    ``feats`` are input-matrix rows (duplicates allowed), ``gold`` is a 0/1
    vector over labels, ``target`` the label trained under softmax. The output
    gradient is accumulated into the hidden gradient before ``out`` changes.
    """
    n = feats.shape[0]
    dim = inp.shape[1]
    nlabels = out.shape[0]
    for d in range(dim):
        hidden[d] = 0.0
        grad[d] = 0.0
    for i in range(n):
        row = feats[i]
        for d in range(dim):
            hidden[d] += inp[row, d]
    for d in range(dim):
        hidden[d] /= n
    for j in range(nlabels):
        s = 0.0
        for d in range(dim):
            s += out[j, d] * hidden[d]
        scores[j] = s

    loss = 0.0
    if loss_kind == LOSS_SOFTMAX:
        smax = scores[0]
        for j in range(1, nlabels):
            if scores[j] > smax:
                smax = scores[j]
        z = 0.0
        for j in range(nlabels):
            z += math.exp(scores[j] - smax)
        logz = smax + math.log(z)
        loss = logz - scores[target]
        for j in range(nlabels):
            p = math.exp(scores[j] - logz)
            y = 1.0 if j == target else 0.0
            alpha = lr * (y - p)
            for d in range(dim):
                grad[d] += alpha * out[j, d]
            for d in range(dim):
                out[j, d] += alpha * hidden[d]
    else:
        for j in range(nlabels):
            s = scores[j]
            y = gold[j]
            loss += _log1p_exp(s) - y * s
            alpha = lr * (y - _sigmoid(s))
            for d in range(dim):
                grad[d] += alpha * out[j, d]
            for d in range(dim):
                out[j, d] += alpha * hidden[d]

    for i in range(n):
        row = feats[i]
        for d in range(dim):
            inp[row, d] += grad[d] / n
    return loss


@numba.njit(cache=True, nogil=True)
def train_positions(
    inp, out, feat_data, feat_ptr, label_data, label_ptr, order, draws,
    loss_kind, lr0, visit_base, total_visits, start, stride, result,
):
    """Train on ``order[start::stride]`` of one epoch's document order.

    Visit ``order[p]`` is global visit ``visit_base + p``; its learning rate
    decays linearly to zero at ``total_visits``. ``draws[p]`` picks the softmax
    target among the document's labels. ``result`` receives (loss sum,
    trained document count).
    """
    dim = inp.shape[1]
    nlabels = out.shape[0]
    hidden = np.zeros(dim, dtype=inp.dtype)
    grad = np.zeros(dim, dtype=inp.dtype)
    scores = np.zeros(nlabels, dtype=inp.dtype)
    gold = np.zeros(nlabels, dtype=inp.dtype)
    loss_sum = 0.0
    trained = 0
    for p in range(start, order.shape[0], stride):
        doc = order[p]
        f0 = feat_ptr[doc]
        f1 = feat_ptr[doc + 1]
        if f1 == f0:
            continue
        l0 = label_ptr[doc]
        l1 = label_ptr[doc + 1]
        for j in range(nlabels):
            gold[j] = 0.0
        for q in range(l0, l1):
            gold[label_data[q]] = 1.0
        target = label_data[l0 + draws[p] % (l1 - l0)]
        lr = lr0 * (1.0 - (visit_base + p) / total_visits)
        loss_sum += sgd_step(
            inp, out, feat_data[f0:f1], gold, target, loss_kind, lr, hidden, grad, scores
        )
        trained += 1
    result[0] = loss_sum
    result[1] = trained
