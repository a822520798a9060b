"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``SPDKIT_PURE_PYTHON=1``.
"""

import numpy as np

NAME = "numpy"


def chol_logdet(a):
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return float("nan")
    return 2.0 * float(np.sum(np.log(np.diagonal(L))))


def s_div_raw(x, y):
    return chol_logdet(0.5 * (x + y)) - 0.5 * (chol_logdet(x) + chol_logdet(y))


def pair_logdets(stack):
    sums = stack[:, None, :, :] + stack[None, :, :, :]
    try:
        L = np.linalg.cholesky(sums)
    except np.linalg.LinAlgError:
        m = stack.shape[0]
        out = np.empty((m, m))
        for i in range(m):
            for j in range(m):
                out[i, j] = chol_logdet(sums[i, j])
        return out
    out = 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)
    return 0.5 * (out + out.T)


def spd_inverse(a):
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    Linv = np.linalg.solve(L, np.eye(a.shape[0]))
    return Linv.T @ Linv


def picard(mats, weights, x0, tol, res_tol, max_iters):
    x = np.array(x0, dtype=np.float64, copy=True)
    steps = []
    yprev = spd_inverse(x)
    if yprev is None:
        return x, 0, np.array(steps), False, 1
    converged = False
    status = 0
    for _ in range(max_iters):
        y = np.zeros_like(x)
        for a, w in zip(mats, weights):
            inv = spd_inverse(x + a)
            if inv is None:
                status = 2
                break
            y += 2.0 * w * inv
        if status:
            break
        res = 0.5 * np.linalg.norm(yprev - y)
        xnew = spd_inverse(y)
        if xnew is None:
            status = 3
            break
        xnorm = np.linalg.norm(x)
        step = np.linalg.norm(xnew - x) / xnorm
        steps.append(step)
        x, yprev = xnew, y
        if step <= tol and res <= res_tol * max(1.0, xnorm):
            converged = True
            break
    return x, len(steps), np.array(steps), converged, status
