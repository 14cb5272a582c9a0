# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled monomial-sum kernels (see _kernels_py for the reference version)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def rates(const double[::1] coef, const double[:, ::1] exps,
          const Py_ssize_t[::1] owner, Py_ssize_t nrows, const double[::1] u):
    cdef Py_ssize_t T = coef.shape[0], m = u.shape[0], t, s
    cdef double acc
    out = np.zeros(nrows)
    cdef double[::1] o = out
    for t in range(T):
        acc = 0.0
        for s in range(m):
            acc += exps[t, s] * u[s]
        o[owner[t]] += coef[t] * exp(acc)
    return out


def rates_and_dlog(const double[::1] coef, const double[:, ::1] exps,
                   const Py_ssize_t[::1] owner, Py_ssize_t nrows, const double[::1] u):
    cdef Py_ssize_t T = coef.shape[0], m = u.shape[0], t, s, i
    cdef double acc, mono
    out = np.zeros(nrows)
    jac = np.zeros((nrows, m))
    cdef double[::1] o = out
    cdef double[:, ::1] d = jac
    for t in range(T):
        acc = 0.0
        for s in range(m):
            acc += exps[t, s] * u[s]
        mono = coef[t] * exp(acc)
        i = owner[t]
        o[i] += mono
        for s in range(m):
            d[i, s] += mono * exps[t, s]
    return out, jac
