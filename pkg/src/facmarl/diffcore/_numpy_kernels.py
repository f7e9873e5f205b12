"""NumPy reference implementation of the hot numeric kernels.

The compiled extension (``_fastcore``) provides the same call signatures with
fused bias/activation loops and BLAS calls; this module is the always-available
fallback and the behavioural reference for backend parity tests.

Activation codes: 0 identity, 1 relu, 2 tanh, 3 elu (alpha = 1).
"""

import numpy as np

ACT_IDENTITY = 0
ACT_RELU = 1
ACT_TANH = 2
ACT_ELU = 3

BACKEND_NAME = "numpy"


def affine_forward(x, w, b, act):
    """y = act(x @ w + b) for a 2-D batch x."""
    y = x @ w
    y += b
    if act == ACT_RELU:
        np.maximum(y, 0.0, out=y)
    elif act == ACT_TANH:
        np.tanh(y, out=y)
    elif act == ACT_ELU:
        neg = y < 0.0
        y[neg] = np.expm1(y[neg])
    return y


def _act_deriv_from_output(y, act):
    if act == ACT_IDENTITY:
        return None
    if act == ACT_RELU:
        return (y > 0.0).astype(np.float64)
    if act == ACT_TANH:
        return 1.0 - y * y
    # elu with alpha 1: d/dpre = exp(pre) = y + 1 on the negative branch
    return np.where(y < 0.0, y + 1.0, 1.0)


def affine_backward(x, w, y, dy, act, need_dx, need_dw):
    """Gradients of y = act(x @ w + b).

    Uses the layer *output* y to recover the activation derivative, so no
    pre-activation buffer has to be kept.  Returns (dx, dw, db) with entries
    None when not requested.
    """
    deriv = _act_deriv_from_output(y, act)
    dpre = dy if deriv is None else dy * deriv
    dx = dpre @ w.T if need_dx else None
    if need_dw:
        dw = x.T @ dpre
        db = dpre.sum(axis=0)
    else:
        dw = db = None
    return dx, dw, db


def mix_forward(q, w):
    """out[b, e] = sum_n q[b, n] * w[b, n, e] (per-sample mixing matmul)."""
    return np.einsum("bn,bne->be", q, w)


def mix_backward(q, w, dout, need_dq, need_dw):
    dq = np.einsum("be,bne->bn", dout, w) if need_dq else None
    dw = np.einsum("bn,be->bne", q, dout) if need_dw else None
    return dq, dw


def adam_update(p, g, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam step, in place on p, m and v (flat arrays)."""
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    mhat = m / (1.0 - beta1 ** t)
    vhat = v / (1.0 - beta2 ** t)
    p -= lr * mhat / (np.sqrt(vhat) + eps)


def soft_update(target, online, tau):
    """target <- tau * online + (1 - tau) * target, in place (flat arrays)."""
    target *= 1.0 - tau
    target += tau * online
