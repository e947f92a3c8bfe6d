"""Counter-based randomness for the permutation kernel (numpy backend).

The permutation test derives one independent Philox4x64-10 stream per
(permutation index, topic index) pair: ``counter = [block, perm, topic, 0]``,
``key = [seed, domain]``.  Stream draws are therefore a pure function of
(seed, perm, topic, draw index), which makes results bit-identical under any
batching or number of worker threads.  The compiled kernel in ``_native``
implements the exact same construction; ``tests/`` verify both against
``numpy.random.Philox``.
"""

from __future__ import annotations

import numpy as np

# Philox4x64 constants (Salmon et al., Random123; same values as numpy).
_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B

_MASK32 = 0xFFFFFFFF
_FULL64 = 1 << 64

# Domain constants: second key word, separating independent uses of one seed.
TUKEY_DOMAIN = 0x74756B6579687364  # b"tukeyhsd"
SAMPLE_DOMAIN = 0x746F706963736D70  # b"topicsmp"


def _mulhi(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """High 64 bits of the elementwise 128-bit product of uint64 arrays."""
    a_lo = a & _MASK32
    a_hi = a >> 32
    b_lo = b & _MASK32
    b_hi = b >> 32
    lo = a_lo * b_lo
    m1 = a_hi * b_lo
    m2 = a_lo * b_hi
    carry = ((lo >> 32) + (m1 & _MASK32) + (m2 & _MASK32)) >> 32
    return a_hi * b_hi + (m1 >> 32) + (m2 >> 32) + carry


def philox_4x64(
    c0: np.ndarray,
    c1: np.ndarray,
    c2: np.ndarray,
    c3: np.ndarray,
    k0: np.ndarray,
    k1: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One Philox4x64-10 block per counter; all inputs broadcastable uint64."""
    m0 = np.array([_M0], dtype=np.uint64)
    m1 = np.array([_M1], dtype=np.uint64)
    w0 = np.array([_W0], dtype=np.uint64)
    w1 = np.array([_W1], dtype=np.uint64)
    x0, x1, x2, x3 = c0, c1, c2, c3
    with np.errstate(over="ignore"):
        for rnd in range(10):
            if rnd:
                k0 = k0 + w0
                k1 = k1 + w1
            hi0 = _mulhi(m0, x0)
            lo0 = m0 * x0
            hi1 = _mulhi(m1, x2)
            lo1 = m1 * x2
            x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    return x0, x1, x2, x3


class ShuffleStreams:
    """Buffered Philox draw state for a batch of (perm, topic) streams.

    Draw ``t`` of stream ``s`` is lane ``t % 4`` of the Philox block at
    counter ``[t // 4, perm[s], topic[s], 0]``.  Rejection in the bounded
    draw advances only the rejecting streams, so streams stay independent.
    """

    def __init__(self, seed: int, domain: int, perm_ids: np.ndarray, topic_ids: np.ndarray):
        if perm_ids.shape != topic_ids.shape or perm_ids.ndim != 1:
            raise ValueError("perm_ids and topic_ids must be equal-length 1-d arrays")
        self._k0 = np.array([seed & (_FULL64 - 1)], dtype=np.uint64)
        self._k1 = np.array([domain & (_FULL64 - 1)], dtype=np.uint64)
        self._c1 = perm_ids.astype(np.uint64)
        self._c2 = topic_ids.astype(np.uint64)
        n = len(perm_ids)
        self._t = np.zeros(n, dtype=np.uint64)
        self._buf = np.zeros((n, 4), dtype=np.uint64)
        self._blk = np.full(n, _FULL64 - 1, dtype=np.uint64)  # sentinel: nothing buffered
        self._all = np.arange(n)

    def __len__(self) -> int:
        return len(self._t)

    def draw(self, idx: np.ndarray) -> np.ndarray:
        """Next raw 64-bit value for each stream in ``idx``."""
        t = self._t[idx]
        blk = t >> 2
        stale = blk != self._blk[idx]
        if stale.any():
            sel = idx[stale]
            bsel = blk[stale]
            zero = np.zeros_like(bsel)
            l0, l1, l2, l3 = philox_4x64(bsel, self._c1[sel], self._c2[sel], zero, self._k0, self._k1)
            self._buf[sel, 0] = l0
            self._buf[sel, 1] = l1
            self._buf[sel, 2] = l2
            self._buf[sel, 3] = l3
            self._blk[sel] = bsel
        out = self._buf[idx, (t & np.uint64(3)).astype(np.intp)]
        self._t[idx] = t + np.uint64(1)
        return out

    def bounded(self, bound: int) -> np.ndarray:
        """Unbiased draw in [0, bound) for every stream (Lemire rejection)."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        su = np.array([bound], dtype=np.uint64)
        thresh = _FULL64 % bound
        res = np.empty(len(self), dtype=np.uint64)
        pos = self._all
        with np.errstate(over="ignore"):
            while pos.size:
                x = self.draw(pos)
                res[pos] = _mulhi(x, su)
                if thresh == 0:
                    break
                lo = x * su
                pos = pos[lo < np.uint64(thresh)]
        return res


def shuffle_rows(a: np.ndarray, streams: ShuffleStreams) -> None:
    """In-place Fisher-Yates shuffle of each row of ``a``, one stream per row."""
    n_rows, m = a.shape
    if len(streams) != n_rows:
        raise ValueError("one stream per row required")
    rows = np.arange(n_rows)
    for i in range(m - 1, 0, -1):
        r = streams.bounded(i + 1).astype(np.intp)
        vi = a[rows, i]
        vr = a[rows, r]
        a[rows, r] = vi
        a[rows, i] = vr


def max_stat_sample_numpy(
    values: np.ndarray, permutations: int, seed: int, batch: int | None = None
) -> np.ndarray:
    """Permutation sample of max(run sums) - min(run sums); numpy backend.

    For each permutation, every topic column of ``values`` (runs x topics) is
    independently shuffled across runs; the statistic is the range of the
    resulting per-run score sums.  Output is a pure function of
    (values, permutations, seed), independent of ``batch``.
    """
    x = np.ascontiguousarray(values, dtype=np.float64)
    m, n = x.shape
    if m < 2:
        raise ValueError("need at least 2 runs")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    cols = np.ascontiguousarray(x.T)  # (n, m): one row per topic column
    if batch is None:
        batch = max(1, min(permutations, 4_000_000 // (n * m)))
    out = np.empty(permutations, dtype=np.float64)
    for start in range(0, permutations, batch):
        count = min(batch, permutations - start)
        work = np.repeat(cols[None, :, :], count, axis=0)  # (count, n, m)
        perm_ids = np.repeat(np.arange(start, start + count, dtype=np.uint64), n)
        topic_ids = np.tile(np.arange(n, dtype=np.uint64), count)
        streams = ShuffleStreams(seed, TUKEY_DOMAIN, perm_ids, topic_ids)
        shuffle_rows(work.reshape(count * n, m), streams)
        sums = np.zeros((count, m), dtype=np.float64)
        for j in range(n):
            sums += work[:, j, :]
        out[start : start + count] = sums.max(axis=1) - sums.min(axis=1)
    return out
