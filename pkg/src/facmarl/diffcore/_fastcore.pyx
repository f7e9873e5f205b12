# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused numeric kernels: BLAS-backed affine layers, mixing matmuls, Adam.

Mirrors the call signatures of ``_numpy_kernels`` exactly; backend parity is
enforced by tests.  All arrays are C-contiguous float64.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh as ctanh, expm1, exp, sqrt, pow as cpow
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

ACT_IDENTITY = 0
ACT_RELU = 1
ACT_TANH = 2
ACT_ELU = 3

BACKEND_NAME = "cython"

ctypedef cnp.float64_t f64

cdef char _N = 78  # 'N'
cdef char _T = 84  # 'T'


cdef void _gemm_nn(double* a, double* b, double* c, int m, int n, int k) noexcept nogil:
    # row-major C(m,n) = A(m,k) @ B(k,n), via column-major C^T = B^T A^T
    cdef double one = 1.0, zero = 0.0
    dgemm(&_N, &_N, &n, &m, &k, &one, b, &n, a, &k, &zero, c, &n)


cdef void _gemm_nt(double* a, double* bT, double* c, int m, int n, int k) noexcept nogil:
    # row-major C(m,n) = A(m,k) @ B^T where B is stored row-major (n,k)
    cdef double one = 1.0, zero = 0.0
    dgemm(&_T, &_N, &n, &m, &k, &one, bT, &k, a, &k, &zero, c, &n)


cdef void _gemm_tn(double* aT, double* b, double* c, int m, int n, int k) noexcept nogil:
    # row-major C(m,n) = A^T @ B where A is stored row-major (k,m)
    cdef double one = 1.0, zero = 0.0
    dgemm(&_N, &_T, &n, &m, &k, &one, b, &n, aT, &m, &zero, c, &n)


def affine_forward(cnp.ndarray[f64, ndim=2] x,
                   cnp.ndarray[f64, ndim=2] w,
                   cnp.ndarray[f64, ndim=1] b,
                   int act):
    cdef int m = x.shape[0], k = x.shape[1], n = w.shape[1]
    cdef cnp.ndarray[f64, ndim=2] y = np.empty((m, n), dtype=np.float64)
    cdef double* yp = <double*> y.data
    cdef double* bp = <double*> b.data
    cdef Py_ssize_t i, j
    cdef double v
    with nogil:
        _gemm_nn(<double*> x.data, <double*> w.data, yp, m, n, k)
        for i in range(m):
            for j in range(n):
                v = yp[i * n + j] + bp[j]
                if act == 1:
                    v = v if v > 0.0 else 0.0
                elif act == 2:
                    v = ctanh(v)
                elif act == 3:
                    v = v if v >= 0.0 else expm1(v)
                yp[i * n + j] = v
    return y


def affine_backward(cnp.ndarray[f64, ndim=2] x,
                    cnp.ndarray[f64, ndim=2] w,
                    cnp.ndarray[f64, ndim=2] y,
                    cnp.ndarray[f64, ndim=2] dy,
                    int act, bint need_dx, bint need_dw):
    cdef int m = x.shape[0], k = x.shape[1], n = w.shape[1]
    cdef cnp.ndarray[f64, ndim=2] dpre
    cdef cnp.ndarray[f64, ndim=2] dx = None
    cdef cnp.ndarray[f64, ndim=2] dw = None
    cdef cnp.ndarray[f64, ndim=1] db = None
    cdef double* dprep
    cdef double* yp = <double*> y.data
    cdef double* dyp = <double*> dy.data
    cdef double* dbp
    cdef Py_ssize_t i, j
    cdef double g, o, acc

    if act == 0:
        dpre = dy
    else:
        dpre = np.empty((m, n), dtype=np.float64)
    dprep = <double*> dpre.data
    if need_dw:
        dw = np.empty((k, n), dtype=np.float64)
        db = np.empty(n, dtype=np.float64)
        dbp = <double*> db.data
    if need_dx:
        dx = np.empty((m, k), dtype=np.float64)

    with nogil:
        if act != 0:
            for i in range(m):
                for j in range(n):
                    g = dyp[i * n + j]
                    o = yp[i * n + j]
                    if act == 1:
                        g = g if o > 0.0 else 0.0
                    elif act == 2:
                        g = g * (1.0 - o * o)
                    else:
                        g = g if o >= 0.0 else g * (o + 1.0)
                    dprep[i * n + j] = g
        if need_dx:
            _gemm_nt(dprep, <double*> w.data, <double*> dx.data, m, k, n)
        if need_dw:
            _gemm_tn(<double*> x.data, dprep, <double*> dw.data, k, n, m)
            for j in range(n):
                acc = 0.0
                for i in range(m):
                    acc += dprep[i * n + j]
                dbp[j] = acc
    return dx, dw, db


def mix_forward(cnp.ndarray[f64, ndim=2] q, cnp.ndarray[f64, ndim=3] w):
    cdef int bsz = q.shape[0], n = q.shape[1], e = w.shape[2]
    cdef cnp.ndarray[f64, ndim=2] out = np.zeros((bsz, e), dtype=np.float64)
    cdef double* qp = <double*> q.data
    cdef double* wp = <double*> w.data
    cdef double* op = <double*> out.data
    cdef Py_ssize_t b, i, j
    cdef double qv
    with nogil:
        for b in range(bsz):
            for i in range(n):
                qv = qp[b * n + i]
                for j in range(e):
                    op[b * e + j] += qv * wp[(b * n + i) * e + j]
    return out


def mix_backward(cnp.ndarray[f64, ndim=2] q, cnp.ndarray[f64, ndim=3] w,
                 cnp.ndarray[f64, ndim=2] dout, bint need_dq, bint need_dw):
    cdef int bsz = q.shape[0], n = q.shape[1], e = w.shape[2]
    cdef cnp.ndarray[f64, ndim=2] dq = None
    cdef cnp.ndarray[f64, ndim=3] dw = None
    cdef double* qp = <double*> q.data
    cdef double* wp = <double*> w.data
    cdef double* dop = <double*> dout.data
    cdef double* dqp = NULL
    cdef double* dwp = NULL
    cdef Py_ssize_t b, i, j
    cdef double acc, qv
    if need_dq:
        dq = np.empty((bsz, n), dtype=np.float64)
        dqp = <double*> dq.data
    if need_dw:
        dw = np.empty((bsz, n, e), dtype=np.float64)
        dwp = <double*> dw.data
    with nogil:
        for b in range(bsz):
            for i in range(n):
                if need_dq:
                    acc = 0.0
                    for j in range(e):
                        acc += dop[b * e + j] * wp[(b * n + i) * e + j]
                    dqp[b * n + i] = acc
                if need_dw:
                    qv = qp[b * n + i]
                    for j in range(e):
                        dwp[(b * n + i) * e + j] = qv * dop[b * e + j]
    return dq, dw


def adam_update(cnp.ndarray[f64, ndim=1] p, cnp.ndarray[f64, ndim=1] g,
                cnp.ndarray[f64, ndim=1] m, cnp.ndarray[f64, ndim=1] v,
                long t, double lr, double beta1, double beta2, double eps):
    cdef Py_ssize_t i, size = p.shape[0]
    cdef double* pp = <double*> p.data
    cdef double* gp = <double*> g.data
    cdef double* mp = <double*> m.data
    cdef double* vp = <double*> v.data
    cdef double c1 = 1.0 - cpow(beta1, <double> t)
    cdef double c2 = 1.0 - cpow(beta2, <double> t)
    cdef double gi
    with nogil:
        for i in range(size):
            gi = gp[i]
            mp[i] = beta1 * mp[i] + (1.0 - beta1) * gi
            vp[i] = beta2 * vp[i] + (1.0 - beta2) * gi * gi
            pp[i] -= lr * (mp[i] / c1) / (sqrt(vp[i] / c2) + eps)


def soft_update(cnp.ndarray[f64, ndim=1] target, cnp.ndarray[f64, ndim=1] online,
                double tau):
    cdef Py_ssize_t i, size = target.shape[0]
    cdef double* tp = <double*> target.data
    cdef double* op = <double*> online.data
    with nogil:
        for i in range(size):
            tp[i] = tau * op[i] + (1.0 - tau) * tp[i]
