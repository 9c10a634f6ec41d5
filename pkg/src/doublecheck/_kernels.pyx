# cython: language_level=3
"""Compiled kernels for the recurrent and smoothing hot loops.

Mirrors ``_pykernels`` exactly in signature and semantics. Matrix products
go through BLAS ``dgemm``; row-major operands are passed as their
column-major transposes.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline double _sigmoid(double z) noexcept nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _tanh(double z) noexcept nogil:
    # libm tanh is several times slower than exp
    return 1.0 - 2.0 / (exp(2.0 * z) + 1.0)


cdef inline void _gemm(char ta, char tb, int m, int n, int k, double alpha,
                       double *a, int lda, double *b, int ldb, double beta,
                       double *c, int ldc) noexcept nogil:
    dgemm(&ta, &tb, &m, &n, &k, &alpha, a, &lda, b, &ldb, &beta, c, &ldc)


def lstm_forward(double[:, :, ::1] xw, double[:, ::1] w_hh,
                 double[:, ::1] h0, double[:, ::1] c0):
    cdef Py_ssize_t T = xw.shape[0], B = xw.shape[1], G = xw.shape[2]
    cdef Py_ssize_t H = G // 4
    hs_arr = np.empty((T, B, H))
    cs_arr = np.empty((T, B, H))
    acts_arr = np.empty((T, B, G))
    cdef double[:, :, ::1] hs = hs_arr
    cdef double[:, :, ::1] cs = cs_arr
    cdef double[:, :, ::1] acts = acts_arr
    cdef Py_ssize_t t, b, j
    cdef double *h_prev
    cdef double *c_prev
    cdef double i_g, f_g, g_g, o_g, c_new
    if T == 0:
        return hs_arr, cs_arr, acts_arr
    with nogil:
        for t in range(T):
            if t == 0:
                h_prev = &h0[0, 0]
                c_prev = &c0[0, 0]
            else:
                h_prev = &hs[t - 1, 0, 0]
                c_prev = &cs[t - 1, 0, 0]
            for b in range(B):
                for j in range(G):
                    acts[t, b, j] = xw[t, b, j]
            if H > 0 and B > 0:
                _gemm(b'N', b'N', <int>G, <int>B, <int>H, 1.0, &w_hh[0, 0], <int>G,
                      h_prev, <int>H, 1.0, &acts[t, 0, 0], <int>G)
            for b in range(B):
                for j in range(H):
                    i_g = _sigmoid(acts[t, b, j])
                    f_g = _sigmoid(acts[t, b, H + j])
                    g_g = _tanh(acts[t, b, 2 * H + j])
                    o_g = _sigmoid(acts[t, b, 3 * H + j])
                    acts[t, b, j] = i_g
                    acts[t, b, H + j] = f_g
                    acts[t, b, 2 * H + j] = g_g
                    acts[t, b, 3 * H + j] = o_g
                    c_new = f_g * c_prev[b * H + j] + i_g * g_g
                    cs[t, b, j] = c_new
                    hs[t, b, j] = o_g * _tanh(c_new)
    return hs_arr, cs_arr, acts_arr


def lstm_backward(double[:, :, ::1] dhs, double[:, :, ::1] acts,
                  double[:, :, ::1] cs, double[:, :, ::1] hs,
                  double[:, ::1] h0, double[:, ::1] c0, double[:, ::1] w_hh):
    cdef Py_ssize_t T = dhs.shape[0], B = dhs.shape[1], H = dhs.shape[2]
    cdef Py_ssize_t G = 4 * H
    dxw_arr = np.empty((T, B, G))
    dw_arr = np.zeros((H, G))
    dh_arr = np.zeros((B, H))
    dc_arr = np.zeros((B, H))
    cdef double[:, :, ::1] dxw = dxw_arr
    cdef double[:, ::1] dw = dw_arr
    cdef double[:, ::1] dh_next = dh_arr
    cdef double[:, ::1] dc_next = dc_arr
    cdef Py_ssize_t t, b, j
    cdef double *h_prev
    cdef double *c_prev
    cdef double i_g, f_g, g_g, o_g, tc, dh, dc
    if T == 0 or H == 0 or B == 0:
        return dxw_arr, dw_arr, dh_arr, dc_arr
    with nogil:
        for t in range(T - 1, -1, -1):
            if t == 0:
                h_prev = &h0[0, 0]
                c_prev = &c0[0, 0]
            else:
                h_prev = &hs[t - 1, 0, 0]
                c_prev = &cs[t - 1, 0, 0]
            for b in range(B):
                for j in range(H):
                    i_g = acts[t, b, j]
                    f_g = acts[t, b, H + j]
                    g_g = acts[t, b, 2 * H + j]
                    o_g = acts[t, b, 3 * H + j]
                    tc = _tanh(cs[t, b, j])
                    dh = dhs[t, b, j] + dh_next[b, j]
                    dc = dc_next[b, j] + dh * o_g * (1.0 - tc * tc)
                    dxw[t, b, j] = dc * g_g * i_g * (1.0 - i_g)
                    dxw[t, b, H + j] = dc * c_prev[b * H + j] * f_g * (1.0 - f_g)
                    dxw[t, b, 2 * H + j] = dc * i_g * (1.0 - g_g * g_g)
                    dxw[t, b, 3 * H + j] = dh * tc * o_g * (1.0 - o_g)
                    dc_next[b, j] = dc * f_g
            # dW_hh += h_prev^T @ dz
            _gemm(b'N', b'T', <int>G, <int>H, <int>B, 1.0, &dxw[t, 0, 0], <int>G,
                  h_prev, <int>H, 1.0, &dw[0, 0], <int>G)
            # dh_next = dz @ W_hh^T
            _gemm(b'T', b'N', <int>H, <int>B, <int>G, 1.0, &w_hh[0, 0], <int>G,
                  &dxw[t, 0, 0], <int>G, 0.0, &dh_next[0, 0], <int>H)
    return dxw_arr, dw_arr, dh_arr, dc_arr


cdef inline Py_ssize_t _reflect(Py_ssize_t j, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t period = 2 * n
    j = j % period
    if j < 0:
        j += period
    if j >= n:
        j = period - 1 - j
    return j


def gaussian_forward(double[:, ::1] x, cnp.int64_t[::1] lengths, double[::1] weights):
    cdef Py_ssize_t B = x.shape[0], N = x.shape[1], K = weights.shape[0]
    cdef Py_ssize_t r = (K - 1) // 2
    y_arr = np.zeros((B, N))
    cdef double[:, ::1] y = y_arr
    cdef Py_ssize_t b, i, k, n
    cdef double acc
    with nogil:
        for b in range(B):
            n = lengths[b]
            for i in range(n):
                acc = 0.0
                for k in range(K):
                    acc = acc + weights[k] * x[b, _reflect(i + k - r, n)]
                y[b, i] = acc
    return y_arr


def gaussian_backward(double[:, ::1] dy, cnp.int64_t[::1] lengths, double[::1] weights):
    cdef Py_ssize_t B = dy.shape[0], N = dy.shape[1], K = weights.shape[0]
    cdef Py_ssize_t r = (K - 1) // 2
    dx_arr = np.zeros((B, N))
    cdef double[:, ::1] dx = dx_arr
    cdef Py_ssize_t b, i, k, n
    with nogil:
        for b in range(B):
            n = lengths[b]
            for i in range(n):
                for k in range(K):
                    dx[b, _reflect(i + k - r, n)] += weights[k] * dy[b, i]
    return dx_arr
