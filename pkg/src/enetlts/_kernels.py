"""Compiled inner loops for the elastic-net solvers."""

import numpy as np
from numba import njit

# columns whose weighted variance is below this are frozen at zero
_FLAT = 1e-14


@njit(cache=True, nogil=True)
def cd_weighted(X, z, w, lam, alpha, beta, tol, max_passes):
    """Weighted elastic-net coordinate descent with an unpenalized intercept.

    Minimizes ``(1/(2m)) sum_i w_i (z_i - b0 - x_i'beta)^2 + lam * P_alpha(beta)``
    starting from ``beta`` (modified in place). Full sweeps alternate with
    sweeps over the active set; convergence needs a full sweep whose largest
    coefficient change is below ``tol``.

    Returns ``(beta, b0, passes, converged)``.
    """
    m, p = X.shape
    sw = 0.0
    for i in range(m):
        sw += w[i]
    xm = np.zeros(p)
    zm = 0.0
    for i in range(m):
        zm += w[i] * z[i]
    zm /= sw
    # centered copy stored feature-major for contiguous column sweeps
    Xc = np.empty((p, m))
    xsq = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(m):
            s += w[i] * X[i, j]
        xm[j] = s / sw
        q = 0.0
        for i in range(m):
            v = X[i, j] - xm[j]
            Xc[j, i] = v
            q += w[i] * v * v
        xsq[j] = q / m

    r = np.empty(m)
    for i in range(m):
        r[i] = z[i] - zm
    for j in range(p):
        if xsq[j] <= _FLAT:
            beta[j] = 0.0
        bj = beta[j]
        if bj != 0.0:
            for i in range(m):
                r[i] -= Xc[j, i] * bj

    l1 = lam * alpha
    l2 = lam * (1.0 - alpha)
    active = np.zeros(p, dtype=np.bool_)
    full = True
    converged = False
    passes = 0
    while passes < max_passes:
        maxd = 0.0
        for j in range(p):
            if xsq[j] <= _FLAT:
                continue
            if not full and not active[j]:
                continue
            g = 0.0
            for i in range(m):
                g += w[i] * Xc[j, i] * r[i]
            g = g / m + xsq[j] * beta[j]
            if g > l1:
                new = (g - l1) / (xsq[j] + l2)
            elif g < -l1:
                new = (g + l1) / (xsq[j] + l2)
            else:
                new = 0.0
            d = new - beta[j]
            if d != 0.0:
                for i in range(m):
                    r[i] -= d * Xc[j, i]
                beta[j] = new
                if abs(d) > maxd:
                    maxd = abs(d)
            if new != 0.0:
                active[j] = True
        passes += 1
        if maxd < tol:
            if full:
                converged = True
                break
            full = True
        else:
            full = False

    b0 = zm
    for j in range(p):
        b0 -= xm[j] * beta[j]
    return beta, b0, passes, converged


@njit(cache=True, nogil=True)
def linear_predictor(X, beta, b0):
    m, p = X.shape
    eta = np.full(m, b0)
    for j in range(p):
        bj = beta[j]
        if bj != 0.0:
            for i in range(m):
                eta[i] += X[i, j] * bj
    return eta


@njit(cache=True, nogil=True)
def deviance_sum(eta, y):
    s = 0.0
    for i in range(eta.shape[0]):
        t = (1.0 - 2.0 * y[i]) * eta[i]
        # log(1 + exp(t)) without overflow
        s += max(t, 0.0) + np.log1p(np.exp(-abs(t)))
    return s


@njit(cache=True, nogil=True)
def penalty(beta, alpha):
    s = 0.0
    for j in range(beta.shape[0]):
        b = beta[j]
        s += 0.5 * (1.0 - alpha) * b * b + alpha * abs(b)
    return s


@njit(cache=True, nogil=True)
def irls(X, y, lam, alpha, beta, b0, tol, max_passes, max_iter, clamp):
    """Penalized logistic regression by IRLS with step halving.

    Minimizes ``(1/m) sum_i d(b0 + x_i'beta, y_i) + lam * P_alpha(beta)``.

    Returns ``(beta, b0, status, iterations)`` with status 0 converged,
    1 inner coordinate descent failed, 2 IRLS cap hit, 3 degenerate weights.
    """
    m = X.shape[0]
    eta = linear_predictor(X, beta, b0)
    obj = deviance_sum(eta, y) / m + lam * penalty(beta, alpha)
    w = np.empty(m)
    z = np.empty(m)
    for it in range(max_iter):
        wmax = 0.0
        for i in range(m):
            pi = 1.0 / (1.0 + np.exp(-eta[i]))
            if pi < clamp:
                pi = clamp
            elif pi > 1.0 - clamp:
                pi = 1.0 - clamp
            w[i] = pi * (1.0 - pi)
            z[i] = eta[i] + (y[i] - pi) / w[i]
            if w[i] > wmax:
                wmax = w[i]
        if wmax < 1e-10:
            return beta, b0, 3, it
        nb, nb0, _, ok = cd_weighted(X, z, w, lam, alpha, beta.copy(), tol, max_passes)
        if not ok:
            return beta, b0, 1, it
        neta = linear_predictor(X, nb, nb0)
        nobj = deviance_sum(neta, y) / m + lam * penalty(nb, alpha)
        t = 1.0
        k = 0
        while nobj > obj and k < 50:
            t *= 0.5
            nb = beta + t * (nb - beta)
            nb0 = b0 + t * (nb0 - b0)
            neta = linear_predictor(X, nb, nb0)
            nobj = deviance_sum(neta, y) / m + lam * penalty(nb, alpha)
            k += 1
        if nobj > obj:
            # no descent possible along the Newton direction
            return beta, b0, 0, it + 1
        delta = abs(nb0 - b0)
        for j in range(beta.shape[0]):
            d = abs(nb[j] - beta[j])
            if d > delta:
                delta = d
        beta = nb
        b0 = nb0
        eta = neta
        obj = nobj
        if delta < tol:
            return beta, b0, 0, it + 1
    return beta, b0, 2, max_iter
