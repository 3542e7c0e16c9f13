# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled line-scan kernel.

The kernel evaluates the DBEL log statistic of the projections
``z0 + t * c`` at an increasing sequence of ``t`` values.  Between
consecutive evaluation points only a few adjacent pairs in the pooled
order swap, so the per-arm log-spacing sums are updated incrementally
instead of being recomputed.  All spacing sums are accumulated in
fixed-point integers, which makes the result independent of the update
path and bit-identical to the numpy implementation in ``_kernel_py``.
"""

import numpy as np

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

cdef double FIXED_INV = 1.0 / 1099511627776.0  # 2**-40, see dbel.FIXED_BITS


cdef inline void full_sums(const int* R, int n, int lo, int hi,
                           const int64_t* logfix, int64_t* S) noexcept nogil:
    cdef int r, i, u, l, k
    cdef int64_t s
    for r in range(lo, hi + 1):
        s = 0
        for i in range(n):
            u = i + r
            if u > n - 1:
                u = n - 1
            l = i - r
            if l < 0:
                l = 0
            k = R[u] - R[l]
            if k < 1:
                k = 1
            s += logfix[k]
        S[r - lo] = s


cdef inline int floor1(int k) noexcept nogil:
    return k if k >= 1 else 1


cdef void move_rank(int* R, int n, int lo, int hi, const int64_t* logfix,
                    int64_t* S, int i0, int newval) noexcept nogil:
    """Set R[i0] = newval and patch every window sum touching index i0."""
    cdef int old = R[i0]
    cdef int r, i, first, last, u, l
    cdef int64_t delta
    for r in range(lo, hi + 1):
        delta = 0
        # terms whose upper index clamps or lands on i0
        if i0 == n - 1:
            first = n - 1 - r
            if first < 0:
                first = 0
            last = n - 1
        else:
            first = i0 - r
            last = first
        for i in range(first, last + 1):
            if i < 0:
                continue
            l = i - r
            if l < 0:
                l = 0
            delta += logfix[floor1(newval - R[l])] - logfix[floor1(old - R[l])]
        # terms whose lower index clamps or lands on i0
        if i0 == 0:
            first = 0
            last = r if r < n - 1 else n - 1
        else:
            first = i0 + r
            last = first
        for i in range(first, last + 1):
            if i > n - 1:
                continue
            u = i + r
            if u > n - 1:
                u = n - 1
            delta += logfix[floor1(R[u] - newval)] - logfix[floor1(R[u] - old)]
        S[r - lo] += delta
    R[i0] = newval


cdef inline double arm_value(const double* cst, const int64_t* S, int nr) noexcept nogil:
    cdef double best = cst[0] - <double>S[0] * FIXED_INV
    cdef double v
    cdef int q
    for q in range(1, nr):
        v = cst[q] - <double>S[q] * FIXED_INV
        if v < best:
            best = v
    return best


cdef void tie_ranks(const double* z, const int* perm, const int* lab, int N,
                    int* Rx, int* Ry) noexcept nogil:
    """Pooled ranks with <= semantics for cross-arm ties."""
    cdef int g0 = 0, g1, q, nx_before = 0, ny_before = 0, gx, gy
    cdef int ix = 0, iy = 0
    while g0 < N:
        g1 = g0 + 1
        while g1 < N and z[perm[g1]] == z[perm[g0]]:
            g1 += 1
        gx = 0
        gy = 0
        for q in range(g0, g1):
            if lab[q] == 0:
                gx += 1
            else:
                gy += 1
        for q in range(g0, g1):
            if lab[q] == 0:
                Rx[ix] = ix + 1 + ny_before + gy
                ix += 1
            else:
                Ry[iy] = iy + 1 + nx_before + gx
                iy += 1
        nx_before += gx
        ny_before += gy
        g0 = g1


cdef void position_ranks(const int* lab, const int* loc, int N,
                         int* Rx, int* Ry) noexcept nogil:
    cdef int q
    for q in range(N):
        if lab[q] == 0:
            Rx[loc[q]] = q + 1
        else:
            Ry[loc[q]] = q + 1


cdef int scan_core(const double* z0, const double* c, int n, int m,
                   const double* tpts, int T,
                   int lox, int hix, int loy, int hiy,
                   const int64_t* logfix, const double* cx, const double* cy,
                   double* out) noexcept nogil:
    cdef int N = n + m
    cdef int nrx = hix - lox + 1
    cdef int nry = hiy - loy + 1
    cdef double* z = <double*>malloc(N * sizeof(double))
    cdef int* perm = <int*>malloc(N * sizeof(int))
    cdef int* lab = <int*>malloc(N * sizeof(int))
    cdef int* loc = <int*>malloc(N * sizeof(int))
    cdef int* Rx = <int*>malloc(n * sizeof(int))
    cdef int* Ry = <int*>malloc(m * sizeof(int))
    cdef int64_t* Sx = <int64_t*>malloc(nrx * sizeof(int64_t))
    cdef int64_t* Sy = <int64_t*>malloc(nry * sizeof(int64_t))
    if (z == NULL or perm == NULL or lab == NULL or loc == NULL or Rx == NULL
            or Ry == NULL or Sx == NULL or Sy == NULL):
        free(z); free(perm); free(lab); free(loc)
        free(Rx); free(Ry); free(Sx); free(Sy)
        return -1

    cdef int i, q, d, e, tmp, tied, dirty = 1
    cdef double t, key
    cdef int cnt_x, cnt_y

    for i in range(N):
        perm[i] = i
    for d in range(T):
        t = tpts[d]
        for i in range(N):
            z[i] = z0[i] + t * c[i]
        # insertion sort of the previous order; every swap is adjacent
        for q in range(1, N):
            e = q
            key = z[perm[e]]
            while e > 0 and z[perm[e - 1]] > key:
                tmp = perm[e - 1]
                perm[e - 1] = perm[e]
                perm[e] = tmp
                if not dirty and lab[e - 1] != lab[e]:
                    tmp = lab[e - 1]; lab[e - 1] = lab[e]; lab[e] = tmp
                    tmp = loc[e - 1]; loc[e - 1] = loc[e]; loc[e] = tmp
                    # element now at e-1 moved down, element at e moved up
                    if lab[e - 1] == 0:
                        move_rank(Rx, n, lox, hix, logfix, Sx, loc[e - 1], e)
                        move_rank(Ry, m, loy, hiy, logfix, Sy, loc[e], e + 1)
                    else:
                        move_rank(Ry, m, loy, hiy, logfix, Sy, loc[e - 1], e)
                        move_rank(Rx, n, lox, hix, logfix, Sx, loc[e], e + 1)
                e -= 1
        if dirty:
            cnt_x = 0
            cnt_y = 0
            for q in range(N):
                if perm[q] < n:
                    lab[q] = 0
                    loc[q] = cnt_x
                    cnt_x += 1
                else:
                    lab[q] = 1
                    loc[q] = cnt_y
                    cnt_y += 1
        tied = 0
        for q in range(N - 1):
            if lab[q] != lab[q + 1] and z[perm[q]] == z[perm[q + 1]]:
                tied = 1
                break
        if tied:
            tie_ranks(z, perm, lab, N, Rx, Ry)
            full_sums(Rx, n, lox, hix, logfix, Sx)
            full_sums(Ry, m, loy, hiy, logfix, Sy)
            dirty = 1
        elif dirty:
            position_ranks(lab, loc, N, Rx, Ry)
            full_sums(Rx, n, lox, hix, logfix, Sx)
            full_sums(Ry, m, loy, hiy, logfix, Sy)
            dirty = 0
        out[d] = arm_value(cx, Sx, nrx) + arm_value(cy, Sy, nry)

    free(z); free(perm); free(lab); free(loc)
    free(Rx); free(Ry); free(Sx); free(Sy)
    return 0


def scan_line(const double[::1] z0, const double[::1] c, int n,
              const double[::1] tpts, int lox, int hix, int loy, int hiy,
              const int64_t[::1] logfix, const double[::1] cx,
              const double[::1] cy):
    """Log statistic of ``z0 + t * c`` (first ``n`` entries are arm X) at each t."""
    cdef int N = z0.shape[0]
    cdef int m = N - n
    cdef int T = tpts.shape[0]
    out = np.empty(T, dtype=np.float64)
    cdef double[::1] ov = out
    cdef int status
    if T == 0:
        return out
    with nogil:
        status = scan_core(&z0[0], &c[0], n, m, &tpts[0], T, lox, hix, loy, hiy,
                           &logfix[0], &cx[0], &cy[0], &ov[0])
    if status != 0:
        raise MemoryError("kernel workspace allocation failed")
    return out
