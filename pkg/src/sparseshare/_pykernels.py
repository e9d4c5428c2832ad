"""Pure-Python reference versions of the hot kernels.

Same signatures and bit-identical results as the compiled ``_kernels``
module; used when the extension is not built or when
``SPARSESHARE_PURE=1`` is set.
"""

import numpy as np

MASK64 = (1 << 64) - 1
_TWO_M53 = 1.0 / (1 << 53)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def xoshiro_raw(state, count):
    """Advance a xoshiro256** state ``count`` times, returning raw outputs.

    ``state`` is a uint64 array of length 4 and is updated in place.
    """
    s0, s1, s2, s3 = (int(v) for v in state)
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
    state[:] = np.array([s0, s1, s2, s3], dtype=np.uint64)
    return out


def xoshiro_uniforms(state, count):
    """Doubles in [0, 1) from the top 53 bits of each raw output."""
    raw = xoshiro_raw(state, count)
    return (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53


def spgemm(a_ptr, a_col, a_val, b_ptr, b_col, b_val, m, q):
    """Row-wise sparse product of two CSR matrices mod q.

    Returns ``(ptr, col, val)`` of the product in CSR form with columns
    sorted inside each row and explicit zeros dropped.
    """
    k = len(a_ptr) - 1
    ptr = [0]
    cols = []
    vals = []
    a_ptr = a_ptr.tolist()
    a_col = a_col.tolist()
    a_val = a_val.tolist()
    b_ptr = b_ptr.tolist()
    b_col = b_col.tolist()
    b_val = b_val.tolist()
    for i in range(k):
        acc = {}
        for p in range(a_ptr[i], a_ptr[i + 1]):
            j = a_col[p]
            av = a_val[p]
            for t in range(b_ptr[j], b_ptr[j + 1]):
                c = b_col[t]
                acc[c] = (acc.get(c, 0) + av * b_val[t]) % q
        for c in sorted(acc):
            v = acc[c]
            if v:
                cols.append(c)
                vals.append(v)
        ptr.append(len(cols))
    return (
        np.asarray(ptr, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(vals, dtype=np.int64),
    )


def padding_draw(a, u, neg_inv_alpha, q, p1, p_star):
    """Inverse-CDF draw of one padding entry per source entry.

    ``a`` holds source entries, ``u`` one uniform per entry and
    ``neg_inv_alpha[i] = -1/alpha_i mod q``.  Category order is documented in
    :func:`sparseshare.sharing.sample_padding`.
    """
    a = np.asarray(a, dtype=np.int64)
    u = np.asarray(u, dtype=np.float64)
    c = np.asarray(neg_inv_alpha, dtype=np.int64)
    n = len(c)
    p1_inv = (1.0 - p1) / (q - 1)
    ps_inv = (1.0 - n * p_star) / (q - n)
    top = n * p_star
    r = np.zeros(a.shape, dtype=np.int64)

    zero = a == 0
    uz = u[zero]
    rz = np.zeros(uz.shape, dtype=np.int64)
    tail = uz >= p1
    if p1_inv > 0:
        k = np.floor((uz[tail] - p1) / p1_inv)
        rz[tail] = np.minimum(k, q - 2).astype(np.int64) + 1
    r[zero] = rz

    nz = ~zero
    an = a[nz]
    un = u[nz]
    rn = np.zeros(an.shape, dtype=np.int64)
    special = un < top
    if p_star > 0 and special.any():
        j = np.minimum(np.floor(un[special] / p_star), n - 1).astype(np.int64)
        rn[special] = an[special] * c[j] % q
    rest = ~special
    if rest.any():
        if ps_inv > 0:
            kk = np.minimum(np.floor((un[rest] - top) / ps_inv), q - n - 1).astype(np.int64)
        else:
            kk = np.zeros(int(rest.sum()), dtype=np.int64)
        spec = np.sort(an[rest, None] * c[None, :] % q, axis=1)
        for col in range(n):
            kk += spec[:, col] <= kk
        rn[rest] = kk
    r[nz] = rn
    return r
