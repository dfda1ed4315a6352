"""Pure numpy implementations of the node kernels.

These mirror ``_ckernels.pyx`` one-for-one and are used whenever the compiled
extension is unavailable (or ``HARDYLAB_BACKEND=python`` is set).
"""

import numpy as np


def poly_eval(coeffs, z, nder):
    """Values and derivatives of a vector polynomial at many points.

    Parameters
    ----------
    coeffs : ndarray, shape (n, d + 1), complex
        Ascending power coefficients, one row per component.
    z : ndarray, shape (N,), complex
    nder : int
        Highest derivative order to return.

    Returns
    -------
    ndarray, shape (nder + 1, N, n), complex
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    z = np.ascontiguousarray(z, dtype=complex)
    n, m = coeffs.shape
    out = np.zeros((nder + 1, z.shape[0], n), dtype=complex)
    c = coeffs.copy()
    for k in range(nder + 1):
        if k > 0:
            # differentiate: c_j <- (j + 1) c_{j+1}
            c = c[:, 1:] * np.arange(1, c.shape[1])
        if c.shape[1] == 0:
            break
        acc = np.zeros((z.shape[0], n), dtype=complex)
        for j in range(c.shape[1] - 1, -1, -1):
            acc = acc * z[:, None] + c[:, j]
        out[k] = acc
    return out


def projection_frames(fz, dfz):
    """Projection onto span{f}, its d-derivative and the curvature, per node.

    Returns ``(norm2, Pi, dPi, curv)``. Nodes where ``norm2 == 0`` get zero
    matrices and zero curvature; callers mask them.
    """
    fz = np.ascontiguousarray(fz, dtype=complex)
    dfz = np.ascontiguousarray(dfz, dtype=complex)
    N, n = fz.shape
    norm2 = np.sum(fz.real**2 + fz.imag**2, axis=1)
    safe = np.where(norm2 > 0.0, norm2, 1.0)
    inv = np.where(norm2 > 0.0, 1.0 / safe, 0.0)
    fc = np.conj(fz)
    Pi = fz[:, :, None] * fc[:, None, :] * inv[:, None, None]
    inner = np.sum(fc * dfz, axis=1)  # <f', f>
    v = dfz - fz * (inner * inv)[:, None]  # (I - Pi) f'
    dPi = v[:, :, None] * fc[:, None, :] * inv[:, None, None]
    # Lagrange identity keeps the numerator nonnegative
    num = np.zeros(N)
    for j in range(n):
        for k in range(j + 1, n):
            w = fz[:, j] * dfz[:, k] - fz[:, k] * dfz[:, j]
            num += w.real**2 + w.imag**2
    curv = num * inv * inv
    return norm2, Pi, dPi, curv


def tree_sum(x):
    """Sum along axis 0 with a fixed pairwise tree.

    The input is zero-padded to a power of two and adjacent entries are added
    level by level, so the rounding pattern depends only on the length.
    """
    x = np.asarray(x)
    N = x.shape[0]
    if N == 0:
        return np.zeros(x.shape[1:], dtype=x.dtype)
    size = 1
    while size < N:
        size *= 2
    if size != N:
        pad = np.zeros((size - N,) + x.shape[1:], dtype=x.dtype)
        x = np.concatenate([x, pad], axis=0)
    while x.shape[0] > 1:
        x = x[0::2] + x[1::2]
    return x[0]
