# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-element classification of nilpotent maps N = u - 1.

All matrices are small (D <= MAXD) and stored row-major with a fixed row
stride MAXD; field arithmetic goes through lookup tables.
"""
import numpy as np
cimport numpy as cnp
from libc.string cimport memcpy, memset
from libc.stdint cimport uint64_t

cdef enum:
    MAXD = 12
    MAXQ = 64
    MM = 144            # MAXD * MAXD
    BUF = 288           # room for 2 * MAXD rows
    MAXLEV = 8
    NSLOT = 30          # degrees -MAXD-2 .. MAXD+3
    HALFD = 7           # MAXD // 2 + 1

# result flag bits
cdef enum:
    FLAG_NILPOTENT = 1
    FLAG_TWIST = 2
    FLAG_QFILT = 4
    FLAG_RAISES = 8
    FLAG_E2 = 16
    FLAG_STAR = 32
    FLAG_LINE = 64
    FLAG_CLASS = 128

cdef struct Fld:
    int q
    int p
    int add[4096]
    int mul[4096]
    int neg[64]
    int inv[64]
    int root[64]

cdef struct Sub:
    int dim
    int piv[MAXD]
    int rows[MM]

cdef struct Level:
    int m
    int e
    int lam
    int M[MM]
    int B[MM]
    int N[MM]
    int Camb[MM]
    Sub Lamb
    Sub Pre


cdef inline int fadd(Fld* F, int a, int b) noexcept nogil:
    return F.add[a * MAXQ + b]

cdef inline int fmul(Fld* F, int a, int b) noexcept nogil:
    return F.mul[a * MAXQ + b]

cdef inline int fsub(Fld* F, int a, int b) noexcept nogil:
    return F.add[a * MAXQ + F.neg[b]]


cdef int rref(Fld* F, int* A, int r, int c, int* piv) noexcept nogil:
    """Reduced row echelon form in place; returns the rank."""
    cdef int rank = 0, col, i, t, f, iv, tmp
    for col in range(c):
        if rank == r:
            break
        i = rank
        while i < r and A[i * MAXD + col] == 0:
            i += 1
        if i == r:
            continue
        if i != rank:
            for t in range(c):
                tmp = A[i * MAXD + t]
                A[i * MAXD + t] = A[rank * MAXD + t]
                A[rank * MAXD + t] = tmp
        iv = F.inv[A[rank * MAXD + col]]
        if iv != 1:
            for t in range(c):
                A[rank * MAXD + t] = fmul(F, iv, A[rank * MAXD + t])
        for i in range(r):
            if i != rank:
                f = A[i * MAXD + col]
                if f != 0:
                    for t in range(c):
                        A[i * MAXD + t] = fsub(F, A[i * MAXD + t], fmul(F, f, A[rank * MAXD + t]))
        piv[rank] = col
        rank += 1
    return rank


cdef int mat_rank(Fld* F, int* A, int r, int c) noexcept nogil:
    cdef int buf[BUF]
    cdef int piv[MAXD]
    memcpy(buf, A, r * MAXD * sizeof(int))
    return rref(F, buf, r, c, piv)


cdef void sub_set(Fld* F, Sub* S, int* rows, int k, int n) noexcept nogil:
    cdef int buf[BUF]
    cdef int piv[MAXD]
    cdef int rk
    if k > 0:
        memcpy(buf, rows, k * MAXD * sizeof(int))
    rk = rref(F, buf, k, n, piv) if k > 0 else 0
    S.dim = rk
    if rk > 0:
        memcpy(S.rows, buf, rk * MAXD * sizeof(int))
        memcpy(S.piv, piv, rk * sizeof(int))


cdef void sub_full(Sub* S, int n) noexcept nogil:
    cdef int i
    memset(S.rows, 0, MM * sizeof(int))
    for i in range(n):
        S.rows[i * MAXD + i] = 1
        S.piv[i] = i
    S.dim = n


cdef void sub_copy(Sub* dst, Sub* src) noexcept nogil:
    memcpy(dst, src, sizeof(Sub))


cdef int sub_contains(Fld* F, Sub* S, int* v, int n) noexcept nogil:
    cdef int w[MAXD]
    cdef int i, t, f
    memcpy(w, v, n * sizeof(int))
    for i in range(S.dim):
        f = w[S.piv[i]]
        if f != 0:
            for t in range(n):
                w[t] = fsub(F, w[t], fmul(F, f, S.rows[i * MAXD + t]))
    for t in range(n):
        if w[t] != 0:
            return 0
    return 1


cdef int sub_subset(Fld* F, Sub* A, Sub* B, int n) noexcept nogil:
    cdef int i
    if A.dim > B.dim:
        return 0
    for i in range(A.dim):
        if not sub_contains(F, B, &A.rows[i * MAXD], n):
            return 0
    return 1


cdef int sub_eq(Sub* A, Sub* B, int n) noexcept nogil:
    cdef int i, t
    if A.dim != B.dim:
        return 0
    for i in range(A.dim):
        for t in range(n):
            if A.rows[i * MAXD + t] != B.rows[i * MAXD + t]:
                return 0
    return 1


cdef void sub_add(Fld* F, Sub* A, Sub* B, Sub* out, int n) noexcept nogil:
    cdef int buf[BUF]
    memcpy(buf, A.rows, A.dim * MAXD * sizeof(int))
    memcpy(&buf[A.dim * MAXD], B.rows, B.dim * MAXD * sizeof(int))
    sub_set(F, out, buf, A.dim + B.dim, n)


cdef void sub_add_rows(Fld* F, Sub* A, int* rows, int k, Sub* out, int n) noexcept nogil:
    cdef int buf[BUF]
    memcpy(buf, A.rows, A.dim * MAXD * sizeof(int))
    if k > 0:
        memcpy(&buf[A.dim * MAXD], rows, k * MAXD * sizeof(int))
    sub_set(F, out, buf, A.dim + k, n)


cdef void nullspace(Fld* F, int* A, int r, int c, Sub* out) noexcept nogil:
    """out = {x : A x = 0} for the r x c matrix A."""
    cdef int buf[BUF]
    cdef int piv[MAXD]
    cdef int isp[MAXD]
    cdef int vecs[MM]
    cdef int rk = 0, i, j, k = 0
    if r > 0:
        memcpy(buf, A, r * MAXD * sizeof(int))
        rk = rref(F, buf, r, c, piv)
    memset(isp, 0, MAXD * sizeof(int))
    for i in range(rk):
        isp[piv[i]] = 1
    memset(vecs, 0, MM * sizeof(int))
    for j in range(c):
        if isp[j]:
            continue
        vecs[k * MAXD + j] = 1
        for i in range(rk):
            vecs[k * MAXD + piv[i]] = F.neg[buf[i * MAXD + j]]
        k += 1
    sub_set(F, out, vecs, k, c)


cdef inline int bil(Fld* F, int* B, int n, int* x, int* y) noexcept nogil:
    cdef int i, j, s = 0, t
    for i in range(n):
        if x[i] == 0:
            continue
        t = 0
        for j in range(n):
            if y[j] != 0 and B[i * MAXD + j] != 0:
                t = fadd(F, t, fmul(F, B[i * MAXD + j], y[j]))
        s = fadd(F, s, fmul(F, x[i], t))
    return s


cdef inline int quad(Fld* F, int* M, int n, int* x) noexcept nogil:
    cdef int i, j, s = 0, t
    for i in range(n):
        if x[i] == 0:
            continue
        t = 0
        for j in range(i, n):
            if x[j] != 0 and M[i * MAXD + j] != 0:
                t = fadd(F, t, fmul(F, M[i * MAXD + j], x[j]))
        s = fadd(F, s, fmul(F, x[i], t))
    return s


cdef inline void matvec(Fld* F, int* A, int n, int* x, int* y) noexcept nogil:
    cdef int i, j, t
    for i in range(n):
        t = 0
        for j in range(n):
            if x[j] != 0 and A[i * MAXD + j] != 0:
                t = fadd(F, t, fmul(F, A[i * MAXD + j], x[j]))
        y[i] = t


cdef void matmul(Fld* F, int* A, int* B, int n, int* out) noexcept nogil:
    cdef int tmp[MM]
    cdef int i, j, k, t
    for i in range(n):
        for j in range(n):
            t = 0
            for k in range(n):
                if A[i * MAXD + k] != 0 and B[k * MAXD + j] != 0:
                    t = fadd(F, t, fmul(F, A[i * MAXD + k], B[k * MAXD + j]))
            tmp[i * MAXD + j] = t
    memcpy(out, tmp, MM * sizeof(int))


cdef void identity(int* A, int n) noexcept nogil:
    cdef int i
    memset(A, 0, MM * sizeof(int))
    for i in range(n):
        A[i * MAXD + i] = 1


cdef int is_zero(int* A, int n) noexcept nogil:
    cdef int i, j
    for i in range(n):
        for j in range(n):
            if A[i * MAXD + j] != 0:
                return 0
    return 1


cdef void mat_pow(Fld* F, int* A, int n, int k, int* out) noexcept nogil:
    cdef int i
    identity(out, n)
    for i in range(k):
        matmul(F, out, A, n, out)


cdef void perp(Fld* F, int* B, int n, Sub* W, Sub* out) noexcept nogil:
    cdef int WB[MM]
    cdef int i, j, k, t
    if W.dim == 0:
        sub_full(out, n)
        return
    for i in range(W.dim):
        for j in range(n):
            t = 0
            for k in range(n):
                if W.rows[i * MAXD + k] != 0 and B[k * MAXD + j] != 0:
                    t = fadd(F, t, fmul(F, W.rows[i * MAXD + k], B[k * MAXD + j]))
            WB[i * MAXD + j] = t
    nullspace(F, WB, W.dim, n, out)


cdef void apply_sub(Fld* F, int* N, int n, Sub* W, Sub* out) noexcept nogil:
    cdef int rows[MM]
    cdef int i
    for i in range(W.dim):
        matvec(F, N, n, &W.rows[i * MAXD], &rows[i * MAXD])
    sub_set(F, out, rows, W.dim, n)


cdef int totally_singular(Fld* F, int* M, int* B, int n, Sub* W) noexcept nogil:
    cdef int i, j
    for i in range(W.dim):
        if quad(F, M, n, &W.rows[i * MAXD]) != 0:
            return 0
        for j in range(i + 1, W.dim):
            if bil(F, B, n, &W.rows[i * MAXD], &W.rows[j * MAXD]) != 0:
                return 0
    return 1


cdef int nondegenerate_on(Fld* F, int* M, int* B, int n, int* ys, int k) noexcept nogil:
    """Is x -> Q(sum x_i y_i) nondegenerate on GF(q)^k? (rows ys, ambient quadratic form)"""
    cdef int G[MM]
    cdef int z[MAXD]
    cdef Sub R
    cdef int i, j, t
    if k == 0:
        return 1
    for i in range(k):
        for j in range(k):
            G[i * MAXD + j] = bil(F, B, n, &ys[i * MAXD], &ys[j * MAXD])
    nullspace(F, G, k, k, &R)
    if R.dim == 0:
        return 1
    if F.p != 2 or R.dim > 1:
        return 0
    memset(z, 0, MAXD * sizeof(int))
    for i in range(k):
        if R.rows[i] != 0:
            for t in range(n):
                z[t] = fadd(F, z[t], fmul(F, R.rows[i], ys[i * MAXD + t]))
    return quad(F, M, n, z) != 0


cdef int nil_invariants(Fld* F, int m, int* B, int* N, int* c, int* eps) noexcept nogil:
    """Nilpotency index (0 for N = 0, -1 if not nilpotent), Jordan counts c[0..m-1], eps bits."""
    cdef int P[MM]
    cdef int Pm[MM]
    cdef int ranks[MAXD + 3]
    cdef int i, e = -1, t
    cdef Sub K
    cdef int y[MAXD]
    identity(P, m)
    ranks[0] = m
    for i in range(1, m + 2):
        matmul(F, P, N, m, P)
        ranks[i] = mat_rank(F, P, m, m) if m > 0 else 0
    if ranks[m] != 0:
        return -1
    for i in range(m):
        c[i] = ranks[i] - 2 * ranks[i + 1] + ranks[i + 2]
    if m == 0 or ranks[1] == 0:
        e = 0
    else:
        for i in range(1, m + 1):
            if ranks[i] == 0:
                e = i
                break
    if F.p == 2:
        identity(Pm, m)        # N^(i-1)
        identity(P, m)
        for i in range(1, m + 1):
            matmul(F, P, N, m, P)              # N^i
            eps[i - 1] = 0
            nullspace(F, P, m, m, &K)
            for t in range(K.dim):
                matvec(F, Pm, m, &K.rows[t * MAXD], y)
                if bil(F, B, m, &K.rows[t * MAXD], y) != 0:
                    eps[i - 1] = 1
                    break
            matmul(F, Pm, N, m, Pm)
    else:
        for i in range(m):
            eps[i] = 0
    return e


cdef int twisted(Fld* F, int* M, int* B, int* N, int n) noexcept nogil:
    """Q(Nx) + <x, Nx> vanishes identically (as a quadratic form in x)."""
    cdef int A[MM]
    cdef int MN[MM]
    cdef int i, j, k, t
    matmul(F, M, N, n, MN)
    for i in range(n):
        for j in range(n):
            t = 0
            for k in range(n):
                if N[k * MAXD + i] != 0 and MN[k * MAXD + j] != 0:
                    t = fadd(F, t, fmul(F, N[k * MAXD + i], MN[k * MAXD + j]))
            A[i * MAXD + j] = t
    for i in range(n):
        for j in range(n):
            t = 0
            for k in range(n):
                if B[i * MAXD + k] != 0 and N[k * MAXD + j] != 0:
                    t = fadd(F, t, fmul(F, B[i * MAXD + k], N[k * MAXD + j]))
            A[i * MAXD + j] = fadd(F, A[i * MAXD + j], t)
    for i in range(n):
        if A[i * MAXD + i] != 0:
            return 0
        for j in range(i + 1, n):
            if fadd(F, A[i * MAXD + j], A[j * MAXD + i]) != 0:
                return 0
    return 1


cdef int compute_line(Fld* F, Level* lv, Sub* L, int* lam) noexcept nogil:
    """Line L of the level (in level coordinates); returns 0 on an internal inconsistency."""
    cdef int m = lv.m
    cdef int P[MM]
    cdef int ell[MM]
    cdef int x[MAXD]
    cdef int rows[MM]
    cdef Sub kerl, K, R
    cdef int t, k, any = 0, i, j, kk, a, b
    mat_pow(F, lv.N, m, lv.e - 1, P)
    lam[0] = 0
    if F.p == 2:
        memset(ell, 0, MM * sizeof(int))
        for t in range(m):
            a = 0
            for k in range(m):
                if lv.B[t * MAXD + k] != 0 and P[k * MAXD + t] != 0:
                    a = fadd(F, a, fmul(F, lv.B[t * MAXD + k], P[k * MAXD + t]))
            ell[t] = F.root[a]
            if ell[t] != 0:
                any = 1
        if any:
            lam[0] = 1
            nullspace(F, ell, 1, m, &kerl)
            perp(F, lv.B, m, &kerl, &K)
            nullspace(F, lv.B, m, m, &R)
            if R.dim == 0:
                if K.dim != 1:
                    return 0
                sub_copy(L, &K)
                return 1
            if K.dim != 2:
                return 0
            kk = -1
            for i in range(K.dim):
                if not sub_contains(F, &R, &K.rows[i * MAXD], m):
                    kk = i
                    break
            if kk < 0:
                return 0
            a = F.root[quad(F, lv.M, m, &K.rows[kk * MAXD])]
            b = F.root[quad(F, lv.M, m, R.rows)]
            for t in range(m):
                x[t] = fadd(F, fmul(F, R.rows[t], a), fmul(F, K.rows[kk * MAXD + t], b))
            sub_set(F, L, x, 1, m)
            return 1
    for i in range(m):
        for j in range(m):
            rows[i * MAXD + j] = P[j * MAXD + i]
    sub_set(F, L, rows, m, m)
    return 1


cdef int check_line(Fld* F, Level* lv, Sub* L, Sub* Lp, int lam) noexcept nogil:
    cdef int m = lv.m
    cdef int P[MM]
    cdef int y[MAXD]
    cdef int rows[MM]
    cdef Sub top, R, img, tmp
    cdef int i, j, inside
    if not sub_subset(F, L, Lp, m):
        return 0
    for i in range(L.dim):
        matvec(F, lv.N, m, &L.rows[i * MAXD], y)
        for j in range(m):
            if y[j] != 0:
                return 0
    apply_sub(F, lv.N, m, Lp, &tmp)
    if not sub_subset(F, &tmp, Lp, m):
        return 0
    if not totally_singular(F, lv.M, lv.B, m, L):
        return 0
    mat_pow(F, lv.N, m, lv.e - 1, P)
    for i in range(m):
        for j in range(m):
            rows[i * MAXD + j] = P[j * MAXD + i]
    sub_set(F, &top, rows, m, m)
    nullspace(F, lv.B, m, m, &R)
    sub_add(F, &top, &R, &tmp, m)
    if not sub_subset(F, L, &tmp, m):
        return 0
    if lam:
        if L.dim != 1:
            return 0
        if F.p == 2:
            apply_sub(F, P, m, Lp, &img)
            inside = sub_subset(F, L, &img, m)
            if inside != (top.dim % 2 == 0):
                return 0
    return 1


cdef int reduce_level(Fld* F, Level* lv, Level* nx, Sub* L, int D, int* ok_line, int lam) noexcept nogil:
    """Pass from a level to L^perp / L."""
    cdef int m = lv.m
    cdef Sub Lp, acc, tmp
    cdef int comp[MM]
    cdef int T[MM]
    cdef int S[MM]
    cdef int Sinv[BUF]
    cdef int v[MAXD]
    cdef int y[MAXD]
    cdef int piv[MAXD]
    cdef int k = 0, i, j, t, dimLp, rk, mp
    cdef int Lrow[MM]
    perp(F, lv.B, m, L, &Lp)
    if not check_line(F, lv, L, &Lp, lam):
        ok_line[0] = 0
    # complement of L in L^perp
    sub_copy(&acc, L)
    for i in range(Lp.dim):
        if not sub_contains(F, &acc, &Lp.rows[i * MAXD], m):
            memcpy(&comp[k * MAXD], &Lp.rows[i * MAXD], MAXD * sizeof(int))
            k += 1
            sub_add_rows(F, &acc, &Lp.rows[i * MAXD], 1, &tmp, m)
            sub_copy(&acc, &tmp)
    mp = k
    dimLp = Lp.dim
    if L.dim + mp != dimLp:
        return 0
    # coordinates with respect to the rows [L ; comp] via the pivot columns of L^perp
    memcpy(T, L.rows, L.dim * MAXD * sizeof(int))
    memcpy(&T[L.dim * MAXD], comp, mp * MAXD * sizeof(int))
    # augmented [S | I] with S = T[:, piv]^T so that coefficients y solve S y = v[piv]
    memset(Sinv, 0, BUF * sizeof(int))
    for i in range(dimLp):
        for j in range(dimLp):
            Sinv[i * MAXD + j] = T[j * MAXD + Lp.piv[i]]
        Sinv[i * MAXD + dimLp + i] = 1
    rk = rref(F, Sinv, dimLp, 2 * dimLp, piv)
    if rk != dimLp:
        return 0
    nx.m = mp
    memset(nx.N, 0, MM * sizeof(int))
    for k in range(mp):
        matvec(F, lv.N, m, &comp[k * MAXD], v)
        # y = S^-1 v[piv]
        for i in range(dimLp):
            t = 0
            for j in range(dimLp):
                if Sinv[i * MAXD + dimLp + j] != 0 and v[Lp.piv[j]] != 0:
                    t = fadd(F, t, fmul(F, Sinv[i * MAXD + dimLp + j], v[Lp.piv[j]]))
            y[i] = t
        for i in range(mp):
            nx.N[i * MAXD + k] = y[L.dim + i]
    memset(nx.M, 0, MM * sizeof(int))
    memset(nx.B, 0, MM * sizeof(int))
    for i in range(mp):
        nx.M[i * MAXD + i] = quad(F, lv.M, m, &comp[i * MAXD])
        for j in range(i + 1, mp):
            nx.M[i * MAXD + j] = bil(F, lv.B, m, &comp[i * MAXD], &comp[j * MAXD])
    for i in range(mp):
        for j in range(mp):
            nx.B[i * MAXD + j] = fadd(F, nx.M[i * MAXD + j], nx.M[j * MAXD + i])
    # ambient representatives
    memset(nx.Camb, 0, MM * sizeof(int))
    for i in range(mp):
        for t in range(m):
            if comp[i * MAXD + t] != 0:
                for j in range(D):
                    nx.Camb[i * MAXD + j] = fadd(F, nx.Camb[i * MAXD + j],
                                                 fmul(F, comp[i * MAXD + t], lv.Camb[t * MAXD + j]))
    memset(Lrow, 0, MM * sizeof(int))
    for i in range(L.dim):
        for t in range(m):
            if L.rows[i * MAXD + t] != 0:
                for j in range(D):
                    Lrow[i * MAXD + j] = fadd(F, Lrow[i * MAXD + j],
                                              fmul(F, L.rows[i * MAXD + t], lv.Camb[t * MAXD + j]))
    sub_add_rows(F, &lv.Lamb, Lrow, L.dim, &nx.Lamb, D)
    sub_add_rows(F, &nx.Lamb, nx.Camb, mp, &nx.Pre, D)
    return 1


cdef uint64_t fnv(uint64_t h, int v) noexcept nogil:
    h ^= <uint64_t>(v + 1)
    h *= <uint64_t>1099511628211
    return h


cdef struct Out:
    int flags
    int e
    int dimker
    int c[MAXD]
    int eps[MAXD]
    int f[2 * MAXD + 1]
    int comp
    int xi[MAXD + 1]
    int srep[HALFD]
    int nlev
    int lev_e[MAXLEV]
    int lev_lam[MAXLEV]
    int lev_c[MAXLEV * MAXD]
    int lev_eps[MAXLEV * MAXD]
    uint64_t fhash


cdef void classify_one(Fld* F, int D, int* M0, int* B0, Sub* S0, int have_ref,
                       int* N0, int keep_shift, Out* out) noexcept nogil:
    cdef Level levs[MAXLEV]
    cdef Sub X[NSLOT]
    cdef Sub tmp, tmp2, L
    cdef int reps[NSLOT * MM]
    cdef int fdim[NSLOT]
    cdef int lo[MAXLEV]
    cdef int hi[MAXLEV]
    cdef int Pw[MM]
    cdef int y[MAXD]
    cdef int ys[MM]
    cdef int z[MAXD]
    cdef int zs[HALFD * MAXD]
    cdef int G[MM]
    cdef Sub R
    cdef int nl, j, a, i, k, t, lam, ok_line, amin, amax, slot, b, sb, rk, half, fa, n_e
    cdef int flags = 0
    cdef uint64_t h
    amin = -D - 2
    amax = D + 3
    memset(out, 0, sizeof(Out))
    out.comp = -1
    for i in range(HALFD):
        out.srep[i] = -1
    # level 0 is the space itself
    levs[0].m = D
    memcpy(levs[0].M, M0, MM * sizeof(int))
    memcpy(levs[0].B, B0, MM * sizeof(int))
    memcpy(levs[0].N, N0, MM * sizeof(int))
    identity(levs[0].Camb, D)
    levs[0].Lamb.dim = 0
    sub_full(&levs[0].Pre, D)
    n_e = nil_invariants(F, D, B0, N0, out.c, out.eps)
    out.e = n_e
    if n_e < 0:
        out.flags = 0
        return
    flags |= FLAG_NILPOTENT
    if twisted(F, M0, B0, N0, D):
        flags |= FLAG_TWIST
    out.dimker = D - mat_rank(F, N0, D, D)
    ok_line = 1
    nl = 0
    while True:
        if nl >= MAXLEV:
            out.flags = flags
            return
        levs[nl].e = nil_invariants(F, levs[nl].m, levs[nl].B, levs[nl].N,
                                    &out.lev_c[nl * MAXD], &out.lev_eps[nl * MAXD])
        out.lev_e[nl] = levs[nl].e
        if levs[nl].e <= 0:
            out.lev_lam[nl] = 0
            break
        if not compute_line(F, &levs[nl], &L, &lam):
            ok_line = 0
            out.flags = flags
            return
        levs[nl].lam = lam
        out.lev_lam[nl] = lam
        if lam and keep_shift:
            lo[nl] = 1 - levs[nl].e
            hi[nl] = levs[nl].e
        else:
            lo[nl] = 2 - levs[nl].e
            hi[nl] = levs[nl].e - 1
        if not reduce_level(F, &levs[nl], &levs[nl + 1], &L, D, &ok_line, lam):
            ok_line = 0
            out.flags = flags
            return
        nl += 1
    out.nlev = nl + 1
    if ok_line:
        flags |= FLAG_LINE
    # the filtration
    for slot in range(amax - amin + 1):
        a = amin + slot
        j = 0
        while j < nl:
            if a < lo[j]:
                sub_copy(&X[slot], &levs[j].Pre)
                break
            if a > hi[j]:
                sub_copy(&X[slot], &levs[j].Lamb)
                break
            j += 1
        if j == nl:
            if a <= 0:
                sub_copy(&X[slot], &levs[nl].Pre)
            else:
                sub_copy(&X[slot], &levs[nl].Lamb)
    # Q-filtration law
    t = 1
    for a in range(1, amax + 1):
        slot = a - amin
        if not totally_singular(F, M0, B0, D, &X[slot]):
            t = 0
            break
        perp(F, B0, D, &X[slot], &tmp)
        if 1 - a - amin >= 0 and not sub_eq(&tmp, &X[1 - a - amin], D):
            t = 0
            break
    if t:
        flags |= FLAG_QFILT
    # N raises degrees by two
    t = 1
    for slot in range(amax - amin - 1):
        apply_sub(F, N0, D, &X[slot], &tmp)
        if not sub_subset(F, &tmp, &X[slot + 2], D):
            t = 0
            break
    if t:
        flags |= FLAG_RAISES
    # graded pieces via complements
    for slot in range(amax - amin):
        sub_copy(&tmp, &X[slot + 1])
        k = 0
        for i in range(X[slot].dim):
            if not sub_contains(F, &tmp, &X[slot].rows[i * MAXD], D):
                memcpy(&reps[slot * MM + k * MAXD], &X[slot].rows[i * MAXD], MAXD * sizeof(int))
                k += 1
                sub_add_rows(F, &tmp, &X[slot].rows[i * MAXD], 1, &tmp2, D)
                sub_copy(&tmp, &tmp2)
        fdim[slot] = k
    fdim[amax - amin] = 0
    # degree-two part: <Nx, y> + <x, Ny> = 0 on gr^a x gr^b with a + b = -2; <x, Nx> = 0 on gr^-1
    t = 1
    for a in range(amin, amax):
        b = -2 - a
        if b < a or b < amin or b >= amax:
            continue
        slot = a - amin
        sb = b - amin
        for i in range(fdim[slot]):
            matvec(F, N0, D, &reps[slot * MM + i * MAXD], y)
            for k in range(fdim[sb]):
                matvec(F, N0, D, &reps[sb * MM + k * MAXD], z)
                if fadd(F, bil(F, B0, D, y, &reps[sb * MM + k * MAXD]),
                        bil(F, B0, D, &reps[slot * MM + i * MAXD], z)) != 0:
                    t = 0
            if a == -1 and bil(F, B0, D, &reps[slot * MM + i * MAXD], y) != 0:
                t = 0
    if t:
        flags |= FLAG_E2
    # nondegeneracy conditions and kernel dimensions
    t = 1
    for a in range(0, D + 1):
        slot = -a - amin
        fa = fdim[slot]
        if fa == 0:
            continue
        if a % 2 == 0:
            mat_pow(F, N0, D, a // 2, Pw)
            for i in range(fa):
                matvec(F, Pw, D, &reps[slot * MM + i * MAXD], &ys[i * MAXD])
            if not nondegenerate_on(F, M0, B0, D, ys, fa):
                t = 0
        if a >= 1:
            mat_pow(F, N0, D, a, Pw)
            for i in range(fa):
                for k in range(fa):
                    matvec(F, Pw, D, &reps[slot * MM + k * MAXD], y)
                    G[i * MAXD + k] = bil(F, B0, D, &reps[slot * MM + i * MAXD], y)
            rk = mat_rank(F, G, fa, fa)
            out.xi[a] = fa - rk
            if a % 2 == 1 and rk != fa:
                t = 0
    if t and (flags & FLAG_E2):
        flags |= FLAG_STAR
    if not ((flags & FLAG_QFILT) and (flags & FLAG_RAISES)):
        flags &= ~(FLAG_E2 | FLAG_STAR)
    # label
    for a in range(-D, D + 1):
        out.f[a + D] = fdim[a - amin]
    if D % 2 == 0 and D > 0 and fdim[-amin] == 0 and have_ref:
        sub_add(F, S0, &X[1 - amin], &tmp, D)
        k = S0.dim + X[1 - amin].dim - tmp.dim
        out.comp = (S0.dim - k) % 2
    # classes of the odd-dimensional images in degree 0 (char 2)
    if F.p == 2 and fdim[-amin] > 0:
        t = 1
        for half in range(D // 2 + 1):
            a = 2 * half
            slot = -a - amin
            fa = fdim[slot]
            if fa % 2 == 0:
                continue
            mat_pow(F, N0, D, half, Pw)
            for i in range(fa):
                matvec(F, Pw, D, &reps[slot * MM + i * MAXD], &ys[i * MAXD])
            for i in range(fa):
                for k in range(fa):
                    G[i * MAXD + k] = bil(F, B0, D, &ys[i * MAXD], &ys[k * MAXD])
            nullspace(F, G, fa, fa, &R)
            if R.dim != 1:
                t = 0
                continue
            memset(z, 0, MAXD * sizeof(int))
            for i in range(fa):
                if R.rows[i] != 0:
                    for k in range(D):
                        z[k] = fadd(F, z[k], fmul(F, R.rows[i], ys[i * MAXD + k]))
            memcpy(&zs[half * MAXD], z, MAXD * sizeof(int))
            out.srep[half] = half
            for b in range(half):
                if out.srep[b] != b:
                    continue
                sub_add_rows(F, &X[1 - amin], &zs[b * MAXD], 1, &tmp, D)
                if sub_contains(F, &tmp, z, D):
                    out.srep[half] = b
                    break
            # equal dimensions must give equal lines
            for b in range(half):
                if out.srep[b] >= 0 and fdim[-2 * b - amin] == fa and out.srep[b] != out.srep[half]:
                    t = 0
        if t:
            flags |= FLAG_CLASS
    else:
        flags |= FLAG_CLASS
    # fingerprint of the filtration
    h = <uint64_t>14695981039346656037
    for slot in range(amax - amin + 1):
        h = fnv(h, X[slot].dim)
        for i in range(X[slot].dim):
            for k in range(D):
                h = fnv(h, X[slot].rows[i * MAXD + k])
    out.fhash = h
    out.flags = flags


cdef void load_field(Fld* F, object ctx):
    cdef int a, b
    cdef int q = ctx.q
    F.q = q
    F.p = ctx.p
    add = np.asarray(ctx.add_table)
    mul = np.asarray(ctx.mul_table)
    neg = np.asarray(ctx.neg_table)
    inv = np.asarray(ctx.inv_table)
    root = np.asarray(ctx.root_table) if ctx.p == 2 else np.zeros(q, dtype=np.int64)
    memset(F.add, 0, sizeof(F.add))
    memset(F.mul, 0, sizeof(F.mul))
    for a in range(q):
        F.neg[a] = neg[a]
        F.inv[a] = inv[a] if a else 0
        F.root[a] = root[a]
        for b in range(q):
            F.add[a * MAXQ + b] = add[a, b]
            F.mul[a * MAXQ + b] = mul[a, b]


def max_dimension():
    return MAXD


def classify_batch(ctx, gram_upper, reference, Ns, bint keep_shift=True):
    """Classify each N in Ns (shape (n, D, D)); returns a dict of numpy arrays."""
    cdef Fld Fs
    cdef int D, n, i, j, idx, L
    cdef int M0[MM]
    cdef int B0[MM]
    cdef int N0[MM]
    cdef Sub S0
    cdef int have_ref = 0
    cdef Out o
    load_field(&Fs, ctx)
    gram = np.asarray(gram_upper, dtype=np.int64)
    D = gram.shape[0]
    if D > MAXD:
        raise ValueError(f"dimension {D} exceeds the compiled limit {MAXD}")
    if ctx.q > MAXQ:
        raise ValueError("field too large for the compiled kernel")
    memset(M0, 0, MM * sizeof(int))
    memset(B0, 0, MM * sizeof(int))
    for i in range(D):
        for j in range(D):
            M0[i * MAXD + j] = gram[i, j]
    for i in range(D):
        for j in range(D):
            B0[i * MAXD + j] = fadd(&Fs, M0[i * MAXD + j], M0[j * MAXD + i])
    S0.dim = 0
    if reference is not None:
        ref = np.asarray(reference, dtype=np.int64).reshape(-1, D)
        memset(N0, 0, MM * sizeof(int))
        for i in range(ref.shape[0]):
            for j in range(D):
                N0[i * MAXD + j] = ref[i, j]
        sub_set(&Fs, &S0, N0, ref.shape[0], D)
        have_ref = 1
    arr = np.ascontiguousarray(Ns, dtype=np.int64).reshape(-1, D, D)
    n = arr.shape[0]
    L = MAXLEV
    cdef cnp.int64_t[:, :, ::1] A = arr
    flags = np.zeros(n, dtype=np.int32)
    e = np.zeros(n, dtype=np.int8)
    dimker = np.zeros(n, dtype=np.int8)
    c = np.zeros((n, D), dtype=np.int8)
    eps = np.zeros((n, D), dtype=np.int8)
    f = np.zeros((n, 2 * D + 1), dtype=np.int8)
    comp = np.zeros(n, dtype=np.int8)
    xi = np.zeros((n, D + 1), dtype=np.int8)
    srep = np.zeros((n, D // 2 + 1), dtype=np.int8)
    nlev = np.zeros(n, dtype=np.int8)
    lev_e = np.zeros((n, L), dtype=np.int8)
    lev_lam = np.zeros((n, L), dtype=np.int8)
    lev_c = np.zeros((n, L, D), dtype=np.int8)
    lev_eps = np.zeros((n, L, D), dtype=np.int8)
    fhash = np.zeros(n, dtype=np.uint64)
    cdef cnp.int32_t[::1] vflags = flags
    cdef cnp.int8_t[::1] ve = e, vdk = dimker, vcomp = comp, vnl = nlev
    cdef cnp.int8_t[:, ::1] vc = c, veps = eps, vf = f, vxi = xi, vsr = srep, vle = lev_e, vll = lev_lam
    cdef cnp.int8_t[:, :, ::1] vlc = lev_c, vlp = lev_eps
    cdef cnp.uint64_t[::1] vh = fhash
    memset(N0, 0, MM * sizeof(int))
    for idx in range(n):
        for i in range(D):
            for j in range(D):
                N0[i * MAXD + j] = <int> A[idx, i, j]
        classify_one(&Fs, D, M0, B0, &S0, have_ref, N0, keep_shift, &o)
        vflags[idx] = o.flags
        ve[idx] = o.e
        vdk[idx] = o.dimker
        vcomp[idx] = o.comp
        vnl[idx] = o.nlev
        vh[idx] = o.fhash
        for i in range(D):
            vc[idx, i] = o.c[i]
            veps[idx, i] = o.eps[i]
        for i in range(2 * D + 1):
            vf[idx, i] = o.f[i]
        for i in range(D + 1):
            vxi[idx, i] = o.xi[i]
        for i in range(D // 2 + 1):
            vsr[idx, i] = o.srep[i]
        for j in range(L):
            vle[idx, j] = o.lev_e[j]
            vll[idx, j] = o.lev_lam[j]
            for i in range(D):
                vlc[idx, j, i] = o.lev_c[j * MAXD + i]
                vlp[idx, j, i] = o.lev_eps[j * MAXD + i]
    return dict(flags=flags, e=e, dimker=dimker, c=c, eps=eps, f=f, comp=comp, xi=xi,
                srep=srep, nlev=nlev, lev_e=lev_e, lev_lam=lev_lam, lev_c=lev_c,
                lev_eps=lev_eps, fhash=fhash)
