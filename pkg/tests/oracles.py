"""Independent reference implementations used as test oracles.

Nothing here imports the package's solver; the objective is re-derived
with dense numpy so that agreement means something.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def dense_loss_grad(w, b, X, y, s, C):
    """Weighted logistic loss with L2 on w only; y in {+1, -1}."""
    z = X @ w + b
    m = y * z
    loss = np.sum(s * np.log1p(np.exp(-m))) + 0.5 * (w @ w) / C
    coef = -s * y / (1.0 + np.exp(m))
    return loss, X.T @ coef + w / C, coef.sum()


def balanced_weights(y):
    n, n_pos = len(y), int(np.sum(y > 0))
    return np.where(y > 0, n / (2.0 * n_pos), n / (2.0 * (n - n_pos)))


def gradient_descent(X, y, s, C, tol=1e-10, max_iter=2_000_000):
    """Plain gradient descent with the fixed step 1/L.

    L bounds the Hessian: a quarter of the weighted Gram matrix of the
    bias-augmented design, plus the ridge term.
    """
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    L = 0.25 * np.linalg.eigvalsh(Xa.T @ (s[:, None] * Xa)).max() + 1.0 / C
    w, b = np.zeros(d), 0.0
    for it in range(max_iter):
        loss, gw, gb = dense_loss_grad(w, b, X, y, s, C)
        if np.sqrt(gw @ gw + gb * gb) <= tol:
            return loss, w, b, it
        w = w - gw / L
        b = b - gb / L
    raise RuntimeError("gradient descent oracle did not converge")


def one_feature_optimum(C):
    """Data {(+,{f}), (-,{})}, both with weight 1: nested 1-D Brent search."""
    def inner(w):
        r = minimize_scalar(lambda b: np.logaddexp(0, -(w + b)) + np.logaddexp(0, b),
                            bracket=(-5, 5), tol=1e-12)
        return r.fun + 0.5 * w * w / C, r.x

    r = minimize_scalar(lambda w: inner(w)[0], bracket=(0, 5), tol=1e-12)
    return r.x, inner(r.x)[1]


def finite_difference_gradient(f, theta, h=1e-5):
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g
