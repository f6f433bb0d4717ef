"""Compiled sequential-seating kernel for the exchangeable-partition models.

Each draw is a pure function of one 64-bit key: the kernel runs a
splitmix64 stream seeded by the key, so batches are reproducible and
independent of how draws are sharded across workers.
"""

import numba
import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@numba.njit(numba.types.UniTuple(numba.uint64, 2)(numba.uint64), cache=True, inline="always")
def _sm64(state):
    state = (state + _SM_GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> np.uint64(30))) * _SM_M1) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * _SM_M2) & _MASK
    z = z ^ (z >> np.uint64(31))
    return state, z


@numba.njit(cache=True, nogil=True)
def crp_batch(n, alpha, theta, keys, J):
    """Seat n individuals per draw by the two-parameter prediction rule.

    Individual i+1 joins an existing group of size s with probability
    (s - alpha) / (i + theta) and founds a new group with probability
    (theta + k alpha) / (i + theta).  Group choice proportional to
    (size - alpha) is done by proposing a uniformly chosen individual's
    group (probability proportional to size) and accepting with
    probability (size - alpha) / size.

    Returns (m, k): m[d, j-1] counts groups of size j (j <= J) in draw d.
    """
    count = keys.shape[0]
    m_out = np.zeros((count, J), dtype=np.int64)
    k_out = np.zeros(count, dtype=np.int64)
    table_of = np.empty(n, dtype=np.int32)
    sizes = np.empty(n, dtype=np.int32)
    for d in range(count):
        state = keys[d]
        k = 0
        for i in range(n):
            if i == 0:
                table_of[0] = 0
                sizes[0] = 1
                k = 1
                continue
            state, z = _sm64(state)
            u = (z >> np.uint64(11)) * _INV53
            if u * (i + theta) < theta + k * alpha:
                table_of[i] = k
                sizes[k] = 1
                k += 1
            else:
                while True:
                    state, z = _sm64(state)
                    j = int((z >> np.uint64(11)) * _INV53 * i)
                    if j >= i:
                        j = i - 1
                    t = table_of[j]
                    if alpha == 0.0:
                        break
                    state, z = _sm64(state)
                    u2 = (z >> np.uint64(11)) * _INV53
                    if u2 * sizes[t] < sizes[t] - alpha:
                        break
                table_of[i] = t
                sizes[t] += 1
        k_out[d] = k
        for t in range(k):
            s = sizes[t]
            if s <= J:
                m_out[d, s - 1] += 1
    return m_out, k_out
