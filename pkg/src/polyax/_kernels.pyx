# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Bessel power series, uniform cubic interpolation
with even reflection, and the fused angular-translation gather.

Must stay semantically identical to ``polyax._kernels_np``; the backend
parity tests compare the two element for element.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, sqrt

cnp.import_array()

NAME = "cython"

cdef int _MAX_TERMS = 400
cdef double _TERM_FLOOR = 1e-20


def bessel_series(double nu, x):
    """Kahan-compensated small-argument series for the normalized Bessel function."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = \
        np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xf)
    cdef Py_ssize_t m = xf.shape[0]
    cdef Py_ssize_t j
    cdef int k
    cdef double q, s, comp, t, y, tmp
    for j in range(m):
        q = 0.25 * xf[j] * xf[j]
        s = 1.0
        comp = 0.0
        t = 1.0
        for k in range(1, _MAX_TERMS):
            t = t * (-q / (k * (nu + k)))
            y = t - comp
            tmp = s + y
            comp = (tmp - s) - y
            s = tmp
            if fabs(t) < _TERM_FLOOR:
                break
        out[j] = s
    return out.reshape(np.asarray(x, dtype=np.float64).shape)


cdef inline double _cubic_at(double* values, Py_ssize_t n, double dx,
                             double xmax, double q) nogil:
    cdef double s, r, w0, w1, w2, w3
    cdef Py_ssize_t i, i0
    if q > xmax:
        return 0.0
    s = q / dx
    i = <Py_ssize_t>floor(s)
    if i > n - 3:
        i = n - 3
    r = s - i
    w0 = -r * (r - 1.0) * (r - 2.0) / 6.0
    w1 = (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0
    w2 = -(r + 1.0) * r * (r - 2.0) / 2.0
    w3 = (r + 1.0) * r * (r - 1.0) / 6.0
    i0 = i - 1
    if i0 < 0:
        i0 = -i0
    return w0 * values[i0] + w1 * values[i] + w2 * values[i + 1] + w3 * values[i + 2]


def cubic_interp_even(values, double dx, double xmax, q):
    """Uniform-grid cubic with even reflection at 0 and zero extension past xmax."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = \
        np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qq = \
        np.ascontiguousarray(np.asarray(q, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(qq)
    cdef Py_ssize_t n = vv.shape[0]
    cdef Py_ssize_t m = qq.shape[0]
    cdef Py_ssize_t j
    cdef double* vptr = &vv[0]
    for j in range(m):
        out[j] = _cubic_at(vptr, n, dx, xmax, qq[j])
    return out.reshape(np.asarray(q, dtype=np.float64).shape)


def translate_gather(values, double dx, double xmax, double x, y, u, w):
    """out[j] = sum_k w[k] * f(sqrt(x^2 + y[j]^2 - 2 x y[j] u[k])), f cubic-sampled."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = \
        np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = \
        np.ascontiguousarray(np.asarray(y, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uu = \
        np.ascontiguousarray(np.asarray(u, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = \
        np.ascontiguousarray(np.asarray(w, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(yy)
    cdef Py_ssize_t n = vv.shape[0]
    cdef Py_ssize_t ny = yy.shape[0]
    cdef Py_ssize_t nk = uu.shape[0]
    cdef Py_ssize_t j, k
    cdef double acc, arg, yj
    cdef double* vptr = &vv[0]
    with nogil:
        for j in range(ny):
            yj = yy[j]
            acc = 0.0
            for k in range(nk):
                arg = x * x + yj * yj - 2.0 * x * yj * uu[k]
                if arg < 0.0:
                    arg = 0.0
                acc += ww[k] * _cubic_at(vptr, n, dx, xmax, sqrt(arg))
            out[j] = acc
    return out
