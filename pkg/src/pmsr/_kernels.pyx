# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(q) matrix kernels.

Same contract as ``pmsr._kernels_py`` (the authoritative docstrings live
there): flat row-major uint64 buffers, canonical entries, q prime and
q < 2**32 so products never overflow 64 bits.
"""

from libc.stdint cimport uint64_t


cdef inline uint64_t _pow_mod(uint64_t base, uint64_t exp, uint64_t q) nogil:
    cdef uint64_t result = 1
    base %= q
    while exp:
        if exp & 1:
            result = result * base % q
        base = base * base % q
        exp >>= 1
    return result


def mat_mul(const uint64_t[::1] a, const uint64_t[::1] b, uint64_t[::1] out,
            Py_ssize_t n, Py_ssize_t m, Py_ssize_t p, uint64_t q):
    cdef Py_ssize_t i, j, t
    cdef uint64_t acc
    with nogil:
        for i in range(n):
            for j in range(p):
                acc = 0
                for t in range(m):
                    acc = (acc + a[i * m + t] * b[t * p + j]) % q
                out[i * p + j] = acc


def mat_add(const uint64_t[::1] a, const uint64_t[::1] b, uint64_t[::1] out,
            Py_ssize_t size, uint64_t q):
    cdef Py_ssize_t i
    with nogil:
        for i in range(size):
            out[i] = (a[i] + b[i]) % q


def mat_sub(const uint64_t[::1] a, const uint64_t[::1] b, uint64_t[::1] out,
            Py_ssize_t size, uint64_t q):
    cdef Py_ssize_t i
    with nogil:
        for i in range(size):
            out[i] = (a[i] + q - b[i] % q) % q


def mod_inv(uint64_t x, uint64_t q):
    return _pow_mod(x, q - 2, q)


def gauss_jordan(uint64_t[::1] data, Py_ssize_t rows, Py_ssize_t cols,
                 Py_ssize_t pivot_cols, uint64_t q):
    cdef Py_ssize_t rank = 0, col, r, c, pivot
    cdef Py_ssize_t base, rrow, pr
    cdef uint64_t inv, factor, tmp
    with nogil:
        for col in range(pivot_cols):
            pivot = -1
            for r in range(rank, rows):
                if data[r * cols + col] % q != 0:
                    pivot = r
                    break
            if pivot < 0:
                continue
            if pivot != rank:
                pr = pivot * cols
                base = rank * cols
                for c in range(cols):
                    tmp = data[pr + c]
                    data[pr + c] = data[base + c]
                    data[base + c] = tmp
            base = rank * cols
            inv = _pow_mod(data[base + col], q - 2, q)
            if inv != 1:
                for c in range(cols):
                    data[base + c] = data[base + c] * inv % q
            for r in range(rows):
                if r == rank:
                    continue
                factor = data[r * cols + col]
                if factor != 0:
                    rrow = r * cols
                    for c in range(cols):
                        data[rrow + c] = (data[rrow + c] + (q - factor % q) * data[base + c]) % q
            rank += 1
            if rank == rows:
                break
    return rank
