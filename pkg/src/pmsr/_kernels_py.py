"""Pure-Python GF(q) matrix kernels.

Reference implementation of the hot inner loops: dense multiply, entrywise
add/sub, and Gauss-Jordan elimination.  ``pmsr._kernels`` is the compiled
twin with the identical signatures; ``pmsr.kernels`` picks one at import
time.  All kernels operate on flat row-major buffers of canonical
representatives (``array('Q')`` in practice) with q prime and q < 2**32,
so intermediate products fit in 64 bits.

These functions mutate only their ``out`` argument (or ``data`` for the
in-place elimination) and perform no validation; callers own the
invariants.
"""

from __future__ import annotations


def mat_mul(a, b, out, n: int, m: int, p: int, q: int) -> None:
    """out[n*p] = a[n*m] . b[m*p] over GF(q)."""
    for i in range(n):
        arow = i * m
        orow = i * p
        for j in range(p):
            acc = 0
            for t in range(m):
                acc += a[arow + t] * b[t * p + j]
            out[orow + j] = acc % q


def mat_add(a, b, out, size: int, q: int) -> None:
    """out = a + b entrywise."""
    for i in range(size):
        out[i] = (a[i] + b[i]) % q


def mat_sub(a, b, out, size: int, q: int) -> None:
    """out = a - b entrywise."""
    for i in range(size):
        out[i] = (a[i] - b[i]) % q


def mod_inv(x: int, q: int) -> int:
    """Inverse of x in GF(q); x must be nonzero mod q."""
    return pow(x, q - 2, q)


def gauss_jordan(data, rows: int, cols: int, pivot_cols: int, q: int) -> int:
    """Reduce ``data`` (rows x cols, in place) to RREF; return the rank.

    Pivots are searched only in the first ``pivot_cols`` columns, always
    taking the first nonzero entry (exact arithmetic needs no magnitude
    pivoting).  Elimination clears above and below each pivot across the
    full width, so augmented systems come out solved.
    """
    rank = 0
    for col in range(pivot_cols):
        pivot = -1
        for r in range(rank, rows):
            if data[r * cols + col] % q:
                pivot = r
                break
        if pivot < 0:
            continue
        if pivot != rank:
            pr, rr = pivot * cols, rank * cols
            for c in range(cols):
                data[pr + c], data[rr + c] = data[rr + c], data[pr + c]
        base = rank * cols
        inv = pow(data[base + col], q - 2, q)
        if inv != 1:
            for c in range(cols):
                data[base + c] = data[base + c] * inv % q
        for r in range(rows):
            if r == rank:
                continue
            factor = data[r * cols + col]
            if factor:
                rrow = r * cols
                for c in range(cols):
                    data[rrow + c] = (data[rrow + c] - factor * data[base + c]) % q
        rank += 1
        if rank == rows:
            break
    return rank
