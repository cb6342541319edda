"""Reference implementations of the hot loops in ``_ckernels``.

Used when the compiled extension is unavailable, or forced with the
``TAYLORLP_PURE_PYTHON`` environment variable. Results agree with the
compiled path bit for bit on the RNG streams and to rounding elsewhere.
"""

import math

import numpy as np

_MASK = 0xFFFF_FFFF_FFFF_FFFF
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


def group_demean(values, codes, n_groups):
    values = np.asarray(values, dtype=np.float64)
    sums = np.zeros((n_groups, values.shape[1]))
    np.add.at(sums, codes, values)
    counts = np.bincount(codes, minlength=n_groups).astype(np.float64)
    means = np.divide(sums, counts[:, None], out=np.zeros_like(sums), where=counts[:, None] > 0)
    return values - means[codes]


def cluster_score_sums(scores, codes, n_clusters):
    out = np.zeros((n_clusters, scores.shape[1]))
    np.add.at(out, codes, scores)
    return out


def shift_index(codes, years, k):
    # codes are 0..G-1 in row order and years ascend within a code, so the
    # composite key is globally sorted.
    if len(years) == 0:
        return np.empty(0, dtype=np.int64)
    span = int(years.max() - years.min()) + abs(int(k)) + 1
    base = years.min()
    keys = codes.astype(np.int64) * span + (years - base)
    target = codes.astype(np.int64) * span + (years - base - k)
    pos = np.searchsorted(keys, target)
    pos_c = np.minimum(pos, len(keys) - 1)
    hit = (pos < len(keys)) & (keys[pos_c] == target) & (years - k >= base)
    hit &= (years - k) <= years.max()
    return np.where(hit, pos_c, -1).astype(np.int64)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def _stream(state):
    s0, s1, s2, s3 = (int(v) for v in state)
    while True:
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        yield result, (s0, s1, s2, s3)


def _draw(state, n):
    out = []
    gen = _stream(state)
    last = tuple(int(v) for v in state)
    for _ in range(n):
        value, last = next(gen)
        out.append(value)
    state[:] = np.array(last, dtype=np.uint64)
    return out


def xoshiro_uint64(state, n):
    return np.array(_draw(state, n), dtype=np.uint64)


def xoshiro_uniform(state, n):
    return np.array([(v >> 11) * _INV_2_53 for v in _draw(state, n)], dtype=np.float64)


def xoshiro_normal(state, n):
    m = (n + 1) // 2
    raw = _draw(state, 2 * m)
    out = np.empty(2 * m)
    for i in range(m):
        u1 = 1.0 - (raw[2 * i] >> 11) * _INV_2_53
        u2 = (raw[2 * i + 1] >> 11) * _INV_2_53
        r = math.sqrt(-2.0 * math.log(u1))
        out[2 * i] = r * math.cos(_TWO_PI * u2)
        out[2 * i + 1] = r * math.sin(_TWO_PI * u2)
    return out[:n]
