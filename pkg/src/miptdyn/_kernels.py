"""Numba kernels over qubit-major bit-packed tableaux.

Layout: ``x`` and ``z`` are ``uint64[n, 2*Wn]`` with ``Wn = ceil(n/64)``.
``x[q]`` holds, for qubit ``q``, the X bits of all ``2n`` rows: words
``0..Wn-1`` cover destabilizer rows ``0..n-1``, words ``Wn..2Wn-1`` cover
stabilizer rows.  Row ``k`` of a half sits at bit ``k & 63`` of word
``k >> 6``.  ``r`` is ``uint64[2*Wn]`` with the sign bits in the same row
order.  Padding bits (local row index >= n) are always zero.

Gates become word-parallel boolean maps over rows.  Each gate carries a
linear part (the symplectic matrix, ``lin``) and the algebraic normal form
of its sign function (``anf``), both as 16-bit masks.
"""

import numpy as np
from numba import njit

_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)

MEAS_RANDOM = 2
MEAS_SKIPPED = 4


@njit(cache=True, inline="always")
def popcount(v):
    v = v - ((v >> np.uint64(1)) & _M1)
    v = (v & _M2) + ((v >> np.uint64(2)) & _M2)
    v = (v + (v >> np.uint64(4))) & _M4
    return np.int64((v * _H01) >> np.uint64(56))


@njit(cache=True, inline="always")
def ctz(v):
    # v != 0
    return popcount((v & (_ZERO - v)) - _ONE)


@njit(cache=True, inline="always")
def _mask(bits, k):
    # all-ones word if bit k of the int64 ``bits`` is set
    return _ZERO - np.uint64((bits >> k) & 1)


@njit(cache=True)
def apply_gates(x, z, r, qa, qb, gids, lin, anf):
    """Apply gates ``gids[k]`` on ``(qa[k], qb[k])`` in list order."""
    nw = x.shape[1]
    for k in range(qa.shape[0]):
        a = qa[k]
        b = qb[k]
        L = lin[gids[k]]
        F = anf[gids[k]]
        # new coordinate i = xor_j lin[4i+j] * old coordinate j; coordinates (xa, xb, za, zb)
        l00 = _mask(L, 0); l01 = _mask(L, 1); l02 = _mask(L, 2); l03 = _mask(L, 3)
        l10 = _mask(L, 4); l11 = _mask(L, 5); l12 = _mask(L, 6); l13 = _mask(L, 7)
        l20 = _mask(L, 8); l21 = _mask(L, 9); l22 = _mask(L, 10); l23 = _mask(L, 11)
        l30 = _mask(L, 12); l31 = _mask(L, 13); l32 = _mask(L, 14); l33 = _mask(L, 15)
        fA = _mask(F, 1); fB = _mask(F, 2); fAB = _mask(F, 3)
        fC = _mask(F, 4); fAC = _mask(F, 5); fBC = _mask(F, 6); fABC = _mask(F, 7)
        fD = _mask(F, 8); fAD = _mask(F, 9); fBD = _mask(F, 10); fABD = _mask(F, 11)
        fCD = _mask(F, 12); fACD = _mask(F, 13); fBCD = _mask(F, 14); fABCD = _mask(F, 15)
        xa = x[a]
        xb = x[b]
        za = z[a]
        zb = z[b]
        for w in range(nw):
            A = xa[w]
            B = xb[w]
            C = za[w]
            D = zb[w]
            if (A | B | C | D) == _ZERO:
                continue
            AB = A & B
            CD = C & D
            s = ((fA & A) ^ (fB & B) ^ (fC & C) ^ (fD & D)
                 ^ (fAB & AB) ^ (fAC & A & C) ^ (fAD & A & D)
                 ^ (fBC & B & C) ^ (fBD & B & D) ^ (fCD & CD)
                 ^ (fABC & AB & C) ^ (fABD & AB & D)
                 ^ (fACD & A & CD) ^ (fBCD & B & CD) ^ (fABCD & AB & CD))
            r[w] ^= s
            xa[w] = (l00 & A) ^ (l01 & B) ^ (l02 & C) ^ (l03 & D)
            xb[w] = (l10 & A) ^ (l11 & B) ^ (l12 & C) ^ (l13 & D)
            za[w] = (l20 & A) ^ (l21 & B) ^ (l22 & C) ^ (l23 & D)
            zb[w] = (l30 & A) ^ (l31 & B) ^ (l32 & C) ^ (l33 & D)


@njit(cache=True, inline="always")
def _g(x1, z1, x2, z2):
    # exponent of i in the product of single-qubit Paulis (x1,z1)(x2,z2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@njit(cache=True)
def deterministic_outcome(x, z, r, n, a):
    """Outcome bit of measuring Z_a when no stabilizer anticommutes with it."""
    nw = x.shape[1] // 2
    sx = np.zeros(n, dtype=np.int64)
    sz = np.zeros(n, dtype=np.int64)
    phase = 0
    for i in range(n):
        w = i >> 6
        sh = np.uint64(i & 63)
        if (x[a, w] >> sh) & _ONE:
            sw = nw + w
            phase += 2 * np.int64((r[sw] >> sh) & _ONE)
            for j in range(n):
                x1 = np.int64((x[j, sw] >> sh) & _ONE)
                z1 = np.int64((z[j, sw] >> sh) & _ONE)
                if x1 | z1:
                    phase += _g(x1, z1, sx[j], sz[j])
                    sx[j] ^= x1
                    sz[j] ^= z1
    return 1 if (phase & 3) == 2 else 0


@njit(cache=True)
def measure_z(x, z, r, n, a, random_bit, want_outcome):
    """Z measurement of qubit ``a`` (Aaronson-Gottesman update).

    Returns ``outcome_bit | MEAS_RANDOM`` for a random outcome (equal to
    ``random_bit``), ``outcome_bit`` for a determined one, or
    ``MEAS_SKIPPED`` for a determined outcome that was not requested.
    """
    nw = x.shape[1] // 2
    xa = x[a]
    p = -1
    for w in range(nw):
        v = xa[nw + w]
        if v != _ZERO:
            p = w * 64 + ctz(v)
            break
    if p < 0:
        if not want_outcome:
            return MEAS_SKIPPED
        return deterministic_outcome(x, z, r, n, a)

    pw = nw + (p >> 6)
    dw = p >> 6
    sh = np.uint64(p & 63)
    pbit = _ONE << sh
    M = xa.copy()
    M[pw] &= ~pbit
    c0 = np.zeros(2 * nw, dtype=np.uint64)
    c1 = np.zeros(2 * nw, dtype=np.uint64)
    for j in range(n):
        xp = (x[j, pw] >> sh) & _ONE
        zp = (z[j, pw] >> sh) & _ONE
        if (xp | zp) == _ZERO:
            continue
        xj = x[j]
        zj = z[j]
        for w in range(2 * nw):
            m = M[w]
            if m == _ZERO:
                continue
            xh = xj[w]
            zh = zj[w]
            if zp == _ZERO:      # X on j
                pos = xh & zh
                neg = ~xh & zh
            elif xp == _ZERO:    # Z on j
                pos = xh & ~zh
                neg = xh & zh
            else:                # Y on j
                pos = ~xh & zh
                neg = xh & ~zh
            pos &= m
            neg &= m
            cz = c0[w]
            c1[w] ^= (cz & pos) | (~cz & neg)
            c0[w] = cz ^ pos ^ neg
            if xp != _ZERO:
                xj[w] = xh ^ m
            if zp != _ZERO:
                zj[w] = zh ^ m
    rp = _ZERO - ((r[pw] >> sh) & _ONE)
    for w in range(2 * nw):
        r[w] ^= (c1[w] ^ rp) & M[w]
    # destabilizer p <- stabilizer p; stabilizer p <- (-1)^bit Z_a
    keep = ~pbit
    for j in range(n):
        x[j, dw] = (x[j, dw] & keep) | (x[j, pw] & pbit)
        z[j, dw] = (z[j, dw] & keep) | (z[j, pw] & pbit)
        x[j, pw] &= keep
        z[j, pw] &= keep
    r[dw] = (r[dw] & keep) | (r[pw] & pbit)
    z[a, pw] |= pbit
    r[pw] = (r[pw] & keep) | (np.uint64(random_bit & 1) << sh)
    return np.int64(random_bit & 1) | MEAS_RANDOM


@njit(cache=True)
def measure_sites(x, z, r, n, mask, random_bits, want_outcome, codes):
    count = 0
    for a in range(mask.shape[0]):
        if mask[a]:
            codes[a] = measure_z(x, z, r, n, a, np.int64(random_bits[a]), want_outcome)
            count += 1
        else:
            codes[a] = -1
    return count


@njit(cache=True)
def gf2_rank_inplace(mat, ncols):
    """Rank over GF(2) of a packed ``uint64[rows, W]`` matrix (destroys ``mat``)."""
    nrows = mat.shape[0]
    nw = mat.shape[1]
    rank = 0
    for c in range(ncols):
        if rank == nrows:
            break
        w = c >> 6
        bit = _ONE << np.uint64(c & 63)
        piv = -1
        for i in range(rank, nrows):
            if mat[i, w] & bit:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(w, nw):
                tmp = mat[piv, k]
                mat[piv, k] = mat[rank, k]
                mat[rank, k] = tmp
        for i in range(piv + 1, nrows):
            if mat[i, w] & bit:
                for k in range(w, nw):
                    mat[i, k] ^= mat[rank, k]
        rank += 1
    return rank


@njit(cache=True)
def region_rank(x, z, n, start, size):
    """Rank of the stabilizer generators restricted to sites ``start .. start+size-1`` (mod n).

    Uses rank(G|_A) = rank of its transpose, whose rows are the qubit columns.
    """
    nw = x.shape[1] // 2
    mat = np.empty((2 * size, nw), dtype=np.uint64)
    for j in range(size):
        q = (start + j) % n
        for w in range(nw):
            mat[2 * j, w] = x[q, nw + w]
            mat[2 * j + 1, w] = z[q, nw + w]
    return gf2_rank_inplace(mat, n)
