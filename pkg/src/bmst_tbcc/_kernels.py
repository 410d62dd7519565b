"""Compiled inner loops for the tail-biting trellis.

Conventions shared by every kernel:

* path metric = correlation sum(y_i * phi(c_i)); larger is more likely;
* info words are packed into int64 with u[0] as the most significant of k
  bits, so integer order is lexicographic order;
* subtrellis ``s`` holds the paths that start and end in state ``s``;
* on equal metrics the survivor with the smaller packed prefix wins.
"""

import numpy as np
from numba import njit

NEG_INF = -np.inf
MAX_PACKED_K = 62


@njit(cache=True)
def branch_metrics(y, k):
    # bm[t, label], label = 2*g1bit + g2bit
    bm = np.empty((k, 4))
    for t in range(k):
        a = y[2 * t]
        b = y[2 * t + 1]
        bm[t, 0] = a + b
        bm[t, 1] = a - b
        bm[t, 2] = -a + b
        bm[t, 3] = -a - b
    return bm


@njit(cache=True)
def forward_all(bm, out_label, m, k):
    """Viterbi forward pass on all 2^m start-state subtrellises.

    Returns alpha[s, t, state] and prefix[s, t, state] (packed survivor inputs
    u[0..t-1]); unreachable nodes carry -inf.
    """
    S = 1 << m
    hi = 1 << (m - 1)
    alpha = np.full((S, k + 1, S), NEG_INF)
    prefix = np.zeros((S, k + 1, S), dtype=np.int64)
    for s in range(S):
        alpha[s, 0, s] = 0.0
        for t in range(k):
            for st in range(S):
                b = st & 1
                p0 = st >> 1
                p1 = p0 | hi
                c0 = alpha[s, t, p0] + bm[t, out_label[p0, b]]
                c1 = alpha[s, t, p1] + bm[t, out_label[p1, b]]
                if c1 > c0 or (c1 == c0 and prefix[s, t, p1] < prefix[s, t, p0]):
                    alpha[s, t + 1, st] = c1
                    prefix[s, t + 1, st] = (prefix[s, t, p1] << 1) | b
                else:
                    alpha[s, t + 1, st] = c0
                    prefix[s, t + 1, st] = (prefix[s, t, p0] << 1) | b
    return alpha, prefix


@njit(cache=True)
def viterbi_best(bm, out_label, m, k):
    """Best closed path over all subtrellises: (metric, packed info, start state)."""
    S = 1 << m
    hi = 1 << (m - 1)
    a = np.empty(S)
    p = np.empty(S, dtype=np.int64)
    na = np.empty(S)
    npf = np.empty(S, dtype=np.int64)
    best_metric = NEG_INF
    best_info = np.int64(-1)
    best_s = -1
    for s in range(S):
        for st in range(S):
            a[st] = NEG_INF
            p[st] = 0
        a[s] = 0.0
        for t in range(k):
            for st in range(S):
                b = st & 1
                p0 = st >> 1
                p1 = p0 | hi
                c0 = a[p0] + bm[t, out_label[p0, b]]
                c1 = a[p1] + bm[t, out_label[p1, b]]
                if c1 > c0 or (c1 == c0 and p[p1] < p[p0]):
                    na[st] = c1
                    npf[st] = (p[p1] << 1) | b
                else:
                    na[st] = c0
                    npf[st] = (p[p0] << 1) | b
            for st in range(S):
                a[st] = na[st]
                p[st] = npf[st]
        if a[s] > best_metric or (a[s] == best_metric and p[s] < best_info):
            best_metric = a[s]
            best_info = p[s]
            best_s = s
    return best_metric, best_info, best_s


@njit(cache=True)
def state_at(info, t, m, k):
    # register contents before input t: u[t-1], ..., u[t-m] (cyclic)
    st = 0
    for j in range(1, m + 1):
        idx = (t - j) % k
        st |= ((info >> (k - 1 - idx)) & 1) << (j - 1)
    return st


@njit(cache=True)
def deviations(alpha_s, prefix_s, bm, out_label, m, k, info, j, total):
    """Alternatives to a path that leave its survivor prefix at stage i <= j.

    The path is the survivor prefix up to stage j followed by a fixed suffix;
    it is fully described by its packed info word.  For each stage i in 1..j
    the other incoming edge of the path's state at stage i gives one new
    (metric, info, i - 1) entry.
    """
    hi = 1 << (m - 1)
    metrics = np.empty(j)
    infos = np.empty(j, dtype=np.int64)
    bounds = np.empty(j, dtype=np.int64)
    cnt = 0
    prev = state_at(info, 0, m, k)
    for i in range(1, j + 1):
        cur = state_at(info, i, m, k)
        alt = prev ^ hi
        a_alt = alpha_s[i - 1, alt]
        if a_alt != NEG_INF:
            b = cur & 1
            metrics[cnt] = total - alpha_s[i, cur] + a_alt + bm[i - 1, out_label[alt, b]]
            nbits = k - i + 1
            infos[cnt] = (prefix_s[i - 1, alt] << nbits) | (info & ((np.int64(1) << nbits) - 1))
            bounds[cnt] = i - 1
            cnt += 1
        prev = cur
    return metrics[:cnt], infos[:cnt], bounds[:cnt]


@njit(cache=True)
def encode_packed(info, out_bits, next_state, m, k):
    v = np.empty(2 * k, dtype=np.uint8)
    st = state_at(info, 0, m, k)
    for t in range(k):
        b = (info >> (k - 1 - t)) & 1
        v[2 * t] = out_bits[st, b, 0]
        v[2 * t + 1] = out_bits[st, b, 1]
        st = next_state[st, b]
    return v


def pack_bits(u) -> int:
    out = 0
    for b in u:
        out = (out << 1) | int(b)
    return out


def unpack_bits(x: int, k: int) -> np.ndarray:
    return np.array([(x >> (k - 1 - i)) & 1 for i in range(k)], dtype=np.uint8)


@njit(cache=True)
def edf_of(v, y, inv_var):
    # (1/n) sum 1 - log2(1 + exp(-2 y phi(v) / sigma^2))
    n = y.size
    acc = 0.0
    for i in range(n):
        a = -2.0 * inv_var * y[i]
        if v[i]:
            a = -a
        if a > 0:
            acc += a + np.log1p(np.exp(-a))
        else:
            acc += np.log1p(np.exp(a))
    return 1.0 - acc / (n * np.log(2.0))


@njit(cache=True)
def gf2_vecmat(v, R):
    n = v.size
    w = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        if v[i]:
            for j in range(n):
                w[j] ^= R[i, j]
    return w


@njit(cache=True)
def flip_by(y, w):
    z = y.copy()
    for i in range(y.size):
        if w[i]:
            z[i] = -z[i]
    return z


@njit(cache=True)
def score_candidate(packed, z0, y1, R, out_bits, next_state, out_label, m, k, inv_var):
    """Soft metric of one candidate; also returns its transformed word v R."""
    v = encode_packed(packed, out_bits, next_state, m, k)
    own = edf_of(v, z0, inv_var)
    w = gf2_vecmat(v, R)
    z1 = flip_by(y1, w)
    bm = branch_metrics(z1, k)
    _, p2, _ = viterbi_best(bm, out_label, m, k)
    v2 = encode_packed(p2, out_bits, next_state, m, k)
    return own, edf_of(v2, z1, inv_var), w
