# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled node kernels. Same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def poly_eval(coeffs, z, int nder):
    cdef const double complex[:, ::1] c = np.ascontiguousarray(coeffs, dtype=complex)
    cdef const double complex[::1] zz = np.ascontiguousarray(z, dtype=complex)
    cdef Py_ssize_t n = c.shape[0], m = c.shape[1], N = zz.shape[0]
    out_arr = np.zeros((nder + 1, N, n), dtype=complex)
    cdef double complex[:, :, ::1] out = out_arr
    work_arr = np.array(c, dtype=complex)
    cdef double complex[:, ::1] w = work_arr
    cdef Py_ssize_t k, i, a, j, mk
    cdef double complex acc, zi
    mk = m
    for k in range(nder + 1):
        if k > 0:
            for a in range(n):
                for j in range(mk - 1):
                    w[a, j] = w[a, j + 1] * <double>(j + 1)
            mk -= 1
        if mk <= 0:
            break
        for i in range(N):
            zi = zz[i]
            for a in range(n):
                acc = 0
                for j in range(mk - 1, -1, -1):
                    acc = acc * zi + w[a, j]
                out[k, i, a] = acc
    return out_arr


def projection_frames(fz, dfz):
    cdef const double complex[:, ::1] f = np.ascontiguousarray(fz, dtype=complex)
    cdef const double complex[:, ::1] df = np.ascontiguousarray(dfz, dtype=complex)
    cdef Py_ssize_t N = f.shape[0], n = f.shape[1]
    norm2_arr = np.zeros(N)
    Pi_arr = np.zeros((N, n, n), dtype=complex)
    dPi_arr = np.zeros((N, n, n), dtype=complex)
    curv_arr = np.zeros(N)
    cdef double[::1] norm2 = norm2_arr
    cdef double[::1] curv = curv_arr
    cdef double complex[:, :, ::1] Pi = Pi_arr
    cdef double complex[:, :, ::1] dPi = dPi_arr
    v_arr = np.zeros(n, dtype=complex)
    cdef double complex[::1] v = v_arr
    cdef Py_ssize_t i, a, b
    cdef double s, inv, num
    cdef double complex inner, wv, fa_c
    for i in range(N):
        s = 0.0
        for a in range(n):
            s += f[i, a].real * f[i, a].real + f[i, a].imag * f[i, a].imag
        norm2[i] = s
        if s <= 0.0:
            continue
        inv = 1.0 / s
        inner = 0
        for a in range(n):
            inner = inner + f[i, a].conjugate() * df[i, a]
        for a in range(n):
            v[a] = df[i, a] - f[i, a] * (inner * inv)
        for a in range(n):
            for b in range(n):
                fa_c = f[i, b].conjugate()
                Pi[i, a, b] = f[i, a] * fa_c * inv
                dPi[i, a, b] = v[a] * fa_c * inv
        num = 0.0
        for a in range(n):
            for b in range(a + 1, n):
                wv = f[i, a] * df[i, b] - f[i, b] * df[i, a]
                num += wv.real * wv.real + wv.imag * wv.imag
        curv[i] = num * inv * inv
    return norm2_arr, Pi_arr, dPi_arr, curv_arr


def tree_sum(x):
    x = np.asarray(x)
    cdef Py_ssize_t N = x.shape[0]
    if N == 0:
        return np.zeros(x.shape[1:], dtype=x.dtype)
    tail = x.shape[1:]
    is_complex = np.iscomplexobj(x)
    flat = np.ascontiguousarray(x, dtype=complex if is_complex else float)
    if is_complex:
        flat = flat.view(np.float64)
    flat = flat.reshape(N, -1)
    cdef Py_ssize_t M = flat.shape[1]
    cdef Py_ssize_t size = 1
    while size < N:
        size *= 2
    buf_arr = np.zeros((size, M))
    buf_arr[:N] = flat
    cdef double[:, ::1] buf = buf_arr
    cdef Py_ssize_t length = size, half, i, j
    while length > 1:
        half = length // 2
        for i in range(half):
            for j in range(M):
                buf[i, j] = buf[2 * i, j] + buf[2 * i + 1, j]
        length = half
    res = np.array(buf_arr[0])
    if is_complex:
        res = res.view(complex)
    return res.reshape(tail) if tail else res.reshape(())[()]
