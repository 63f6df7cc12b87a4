# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures and contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx

cdef int ALIGNED = 0
cdef int SWAPPED = 1
cdef int COMBINED = 2

cdef int _TAYLOR_DEGREE = 18
cdef double _SCALE_TARGET = 0.25


cdef inline double cabs(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def gellmann_hermitian(params, int d):
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    if p.shape[0] != d * d:
        raise ValueError(f"expected {d * d} parameters, got ({p.shape[0]},)")
    out = np.zeros((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] h = out
    cdef int j, k, l, m, idx = 1
    cdef double c, x, y
    for j in range(d):
        h[j, j] = p[0]
    for j in range(d):
        for k in range(j + 1, d):
            y = p[idx]
            x = p[idx + 1]
            h[j, k] = h[j, k] + x - 1j * y
            h[k, j] = h[k, j] + x + 1j * y
            idx += 2
    for l in range(1, d):
        c = p[idx] * sqrt(2.0 / (l * (l + 1)))
        for m in range(l):
            h[m, m] = h[m, m] + c
        h[l, l] = h[l, l] - l * c
        idx += 1
    return out


cdef void _matmul(const cplx[:, ::1] a, const cplx[:, ::1] b, cplx[:, ::1] out, int n) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


def expi_hermitian(h):
    cdef const cplx[:, ::1] hv = np.ascontiguousarray(h, dtype=np.complex128)
    cdef int n = hv.shape[0]
    cdef int i, j, k, s = 0
    cdef double norm = 0.0, scale
    for i in range(n):
        for j in range(n):
            norm += hv[i, j].real * hv[i, j].real + hv[i, j].imag * hv[i, j].imag
    norm = sqrt(norm)
    while norm > _SCALE_TARGET:
        norm *= 0.5
        s += 1
    scale = 1.0
    for i in range(s):
        scale *= 0.5
    m_arr = np.empty((n, n), dtype=np.complex128)
    out_arr = np.eye(n, dtype=np.complex128)
    term_arr = np.eye(n, dtype=np.complex128)
    tmp_arr = np.empty((n, n), dtype=np.complex128)
    cdef cplx[:, ::1] m = m_arr
    cdef cplx[:, ::1] out = out_arr
    cdef cplx[:, ::1] term = term_arr
    cdef cplx[:, ::1] tmp = tmp_arr
    for i in range(n):
        for j in range(n):
            m[i, j] = 1j * hv[i, j] * scale
    for k in range(1, _TAYLOR_DEGREE + 1):
        _matmul(term, m, tmp, n)
        for i in range(n):
            for j in range(n):
                term[i, j] = tmp[i, j] / k
                out[i, j] = out[i, j] + term[i, j]
    for k in range(s):
        _matmul(out, out, tmp, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = tmp[i, j]
    return out_arr


def unitary_from_params(params, int d):
    return expi_hermitian(gellmann_hermitian(params, d))


cdef void _transform(const cplx[:, ::1] rho, const cplx[:, ::1] ua, const cplx[:, ::1] ub,
                     cplx[:, ::1] w, cplx[:, ::1] tmp, cplx[:, ::1] out,
                     int d) noexcept nogil:
    # (UA x UB)^dagger rho (UA x UB) one tensor leg at a time, O(d^5);
    # rows and columns are the composite index a * d + b
    cdef int x, y, a, b, c, k
    cdef cplx acc
    # w[(a b), (a' j)] = sum_b' rho[(a b), (a' b')] ub[b', j]
    for x in range(d * d):
        for a in range(d):
            for y in range(d):
                acc = 0
                for k in range(d):
                    acc = acc + rho[x, a * d + k] * ub[k, y]
                w[x, a * d + y] = acc
    # tmp[(a b), (i j)] = sum_a' w[(a b), (a' j)] ua[a', i]
    for x in range(d * d):
        for c in range(d):
            for y in range(d):
                acc = 0
                for k in range(d):
                    acc = acc + w[x, k * d + y] * ua[k, c]
                tmp[x, c * d + y] = acc
    # w[(a y), col] = sum_b conj(ub[b, y]) tmp[(a b), col]
    for a in range(d):
        for y in range(d):
            for c in range(d * d):
                acc = 0
                for b in range(d):
                    acc = acc + ub[b, y].conjugate() * tmp[a * d + b, c]
                w[a * d + y, c] = acc
    # out[(x y), col] = sum_a conj(ua[a, x]) w[(a y), col]
    for x in range(d):
        for y in range(d):
            for c in range(d * d):
                acc = 0
                for a in range(d):
                    acc = acc + ua[a, x].conjugate() * w[a * d + y, c]
                out[x * d + y, c] = acc


def transform(rho, ua, ub):
    cdef const cplx[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef const cplx[:, ::1] a = np.ascontiguousarray(ua, dtype=np.complex128)
    cdef const cplx[:, ::1] b = np.ascontiguousarray(ub, dtype=np.complex128)
    cdef int d = a.shape[0]
    cdef int n = d * d
    out_arr = np.empty((n, n), dtype=np.complex128)
    w_arr = np.empty((n, n), dtype=np.complex128)
    tmp_arr = np.empty((n, n), dtype=np.complex128)
    _transform(r, a, b, w_arr, tmp_arr, out_arr, d)
    return out_arr


def inequality_lhs(rho, ua, ub, int d, int kind):
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown inequality kind {kind!r}")
    cdef int n = d * d
    cdef cplx[:, ::1] r = transform(rho, ua, ub)
    cdef int a, ap, b, bp
    cdef double total = 0.0
    for a in range(d):
        for ap in range(d):
            if a == ap:
                continue
            if kind == ALIGNED:
                total += cabs(r[a * d + a, ap * d + ap])
            elif kind == SWAPPED:
                total += cabs(r[ap * d + a, a * d + ap])
            else:
                for b in range(d):
                    for bp in range(d):
                        if b != bp:
                            total += cabs(r[ap * d + b, a * d + bp])
    return total


def measure_sum(rho, ua, ub, int d, double offset):
    cdef cplx[:, ::1] r = transform(rho, ua, ub)
    cdef int a, ap, b, bp
    cdef double total = 0.0, v
    for a in range(d):
        for ap in range(d):
            if a == ap:
                continue
            for b in range(d):
                for bp in range(d):
                    if b == bp:
                        continue
                    v = cabs(r[a * d + b, ap * d + bp]) - offset
                    if v > 0:
                        total += v
    return total


cdef void _gellmann_traceless(const double[::1] p, int offset, int d, cplx[:, ::1] h) noexcept nogil:
    cdef int j, k, l, m, idx = offset
    cdef double c, x, y
    for j in range(d):
        for k in range(d):
            h[j, k] = 0
    for j in range(d):
        for k in range(j + 1, d):
            y = p[idx]
            x = p[idx + 1]
            h[j, k] = x - 1j * y
            h[k, j] = x + 1j * y
            idx += 2
    for l in range(1, d):
        c = p[idx] * sqrt(2.0 / (l * (l + 1)))
        for m in range(l):
            h[m, m] = h[m, m] + c
        h[l, l] = h[l, l] - l * c
        idx += 1


cdef void _expi(cplx[:, ::1] h, cplx[:, ::1] out, cplx[:, ::1] term,
                cplx[:, ::1] tmp, int n) noexcept nogil:
    # h is overwritten with the scaled generator i h / 2^s
    cdef int i, j, k, s = 0
    cdef double norm = 0.0, scale = 1.0
    for i in range(n):
        for j in range(n):
            norm += h[i, j].real * h[i, j].real + h[i, j].imag * h[i, j].imag
    norm = sqrt(norm)
    while norm > _SCALE_TARGET:
        norm *= 0.5
        scale *= 0.5
        s += 1
    for i in range(n):
        for j in range(n):
            h[i, j] = 1j * h[i, j] * scale
            out[i, j] = 1.0 if i == j else 0.0
            term[i, j] = out[i, j]
    for k in range(1, _TAYLOR_DEGREE + 1):
        _matmul(term, h, tmp, n)
        for i in range(n):
            for j in range(n):
                term[i, j] = tmp[i, j] / k
                out[i, j] = out[i, j] + term[i, j]
    for k in range(s):
        _matmul(out, out, tmp, n)
        for i in range(n):
            for j in range(n):
                out[i, j] = tmp[i, j]


cdef _search_transform(x, u0a, u0b, rho, int d):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const cplx[:, ::1] a0 = np.ascontiguousarray(u0a, dtype=np.complex128)
    cdef const cplx[:, ::1] b0 = np.ascontiguousarray(u0b, dtype=np.complex128)
    cdef const cplx[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef int n = d * d
    if xv.shape[0] != 2 * (n - 1):
        raise ValueError(f"expected {2 * (n - 1)} search coordinates, got {xv.shape[0]}")
    small = np.empty((7, d, d), dtype=np.complex128)
    big = np.empty((3, n, n), dtype=np.complex128)
    cdef cplx[:, ::1] h = small[0]
    cdef cplx[:, ::1] v = small[1]
    cdef cplx[:, ::1] term = small[2]
    cdef cplx[:, ::1] tmp = small[3]
    cdef cplx[:, ::1] ua = small[4]
    cdef cplx[:, ::1] ub = small[5]
    cdef cplx[:, ::1] w = big[0]
    cdef cplx[:, ::1] tmp2 = big[1]
    cdef cplx[:, ::1] out = big[2]
    with nogil:
        _gellmann_traceless(xv, 0, d, h)
        _expi(h, v, term, tmp, d)
        _matmul(a0, v, ua, d)
        _gellmann_traceless(xv, n - 1, d, h)
        _expi(h, v, term, tmp, d)
        _matmul(b0, v, ub, d)
        _transform(r, ua, ub, w, tmp2, out, d)
    return big[2]


def search_lhs(x, u0a, u0b, rho, int d, int kind):
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown inequality kind {kind!r}")
    cdef cplx[:, ::1] r = _search_transform(x, u0a, u0b, rho, d)
    cdef int a, ap, b, bp
    cdef double total = 0.0
    for a in range(d):
        for ap in range(d):
            if a == ap:
                continue
            if kind == ALIGNED:
                total += cabs(r[a * d + a, ap * d + ap])
            elif kind == SWAPPED:
                total += cabs(r[ap * d + a, a * d + ap])
            else:
                for b in range(d):
                    for bp in range(d):
                        if b != bp:
                            total += cabs(r[ap * d + b, a * d + bp])
    return total


def search_measure(x, u0a, u0b, rho, int d, double offset):
    cdef cplx[:, ::1] r = _search_transform(x, u0a, u0b, rho, d)
    cdef int a, ap, b, bp
    cdef double total = 0.0, v
    for a in range(d):
        for ap in range(d):
            if a == ap:
                continue
            for b in range(d):
                for bp in range(d):
                    if b == bp:
                        continue
                    v = cabs(r[a * d + b, ap * d + bp]) - offset
                    if v > 0:
                        total += v
    return total
