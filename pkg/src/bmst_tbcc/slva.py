"""Viterbi and serial list Viterbi decoding on the tail-biting trellis.

Tail-biting is handled exactly: every one of the 2^m start states gets its
own subtrellis (paths forced to start and end there), and the candidates of
all subtrellises are merged through one priority queue.

Within a subtrellis the list is produced by deviation enumeration: after a
forward Viterbi pass, each emitted path spawns one alternative per stage at
which it follows a survivor, namely "take the other incoming edge here, then
the survivor back to the start".  Every path of the subtrellis is spawned
exactly once, and a spawned path never ranks above its parent, so popping
the queue yields paths in non-increasing metric order.

Ties on the path metric go to the lexicographically smallest info word.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .channel import ChannelModel
from .tbcc import Trellis


class ListExhausted(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class Candidate:
    codeword: np.ndarray
    info_word: np.ndarray
    metric: float  # correlation <y, phi(codeword)>
    rank: int
    packed: int = -1

    def log_likelihood(self, y, model: ChannelModel) -> float:
        """sum_i log f(y_i | c_i) for the given channel."""
        y = np.asarray(y, dtype=np.float64)
        x = 1.0 - 2.0 * self.codeword
        d = y - x
        n = y.size
        return float(-(d @ d) / (2 * model.variance) - n * math.log(model.sigma * math.sqrt(2 * math.pi)))


def _check_input(y, trellis: Trellis) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    code = trellis.code
    if y.ndim != 1 or y.size != code.n:
        raise ValueError(f"received vector must have length n={code.n}, got {y.shape}")
    if code.k > K.MAX_PACKED_K:
        raise ValueError(f"k={code.k} exceeds the supported maximum {K.MAX_PACKED_K}")
    return y


def _make_candidate(packed: int, metric: float, rank: int, trellis: Trellis) -> Candidate:
    code = trellis.code
    v = K.encode_packed(packed, trellis.out_bits, trellis.next_state, code.m, code.k)
    return Candidate(v, K.unpack_bits(packed, code.k), float(metric), rank, int(packed))


def viterbi(y, trellis: Trellis) -> Candidate:
    """Maximum-likelihood tail-biting codeword for the received vector ``y``."""
    y = _check_input(y, trellis)
    code = trellis.code
    bm = K.branch_metrics(y, code.k)
    metric, packed, _ = K.viterbi_best(bm, trellis.out_label, code.m, code.k)
    return _make_candidate(packed, metric, 1, trellis)


def viterbi_packed(y, trellis: Trellis) -> tuple[float, int]:
    """Fast path for callers that only need (metric, packed info word)."""
    code = trellis.code
    bm = K.branch_metrics(y, code.k)
    metric, packed, _ = K.viterbi_best(bm, trellis.out_label, code.m, code.k)
    return metric, packed


class SlvaSession:
    """Serial enumeration of the most likely codewords for one received vector.

    Call :meth:`next` (or iterate) to obtain candidates of rank 1, 2, ...
    """

    def __init__(self, y, trellis: Trellis, l_max: int | None = None):
        if l_max is not None and l_max < 1:
            raise ValueError("l_max must be >= 1")
        self.received = _check_input(y, trellis)
        self.trellis = trellis
        self.l_max = l_max
        self.emitted_count = 0
        code = trellis.code
        self._bm = K.branch_metrics(self.received, code.k)
        self._alpha, self._prefix = K.forward_all(self._bm, trellis.out_label, code.m, code.k)
        self._heap = []
        self._seen = set()
        self._dedupe = not is_injective(trellis)
        for s in range(code.num_states):
            metric = self._alpha[s, code.k, s]
            if metric != -np.inf:
                packed = int(self._prefix[s, code.k, s])
                self._heap.append((-metric, packed, s, code.k))
        heapq.heapify(self._heap)

    def next_packed(self) -> tuple[float, int]:
        """Advance the list by one; returns (metric, packed info word)."""
        if self.l_max is not None and self.emitted_count >= self.l_max:
            raise ListExhausted(f"list cap l_max={self.l_max} reached")
        code = self.trellis.code
        while self._heap:
            neg, packed, s, j = heapq.heappop(self._heap)
            if j > 0:
                ms, infos, bounds = K.deviations(
                    self._alpha[s], self._prefix[s], self._bm, self.trellis.out_label,
                    code.m, code.k, packed, j, -neg,
                )
                for mm, ii, bb in zip(ms.tolist(), infos.tolist(), bounds.tolist()):
                    heapq.heappush(self._heap, (-mm, ii, s, bb))
            # distinct info words can share a codeword only for non-injective codes
            if self._dedupe:
                key = self._codeword_key(packed)
                if key in self._seen:
                    continue
                self._seen.add(key)
            self.emitted_count += 1
            return -neg, packed
        raise ListExhausted("every codeword has been listed")

    def _codeword_key(self, packed: int) -> bytes:
        code = self.trellis.code
        return K.encode_packed(packed, self.trellis.out_bits, self.trellis.next_state, code.m, code.k).tobytes()

    def next(self) -> Candidate:
        metric, packed = self.next_packed()
        return _make_candidate(packed, metric, self.emitted_count, self.trellis)

    __next__ = next

    def __iter__(self):
        while True:
            try:
                yield self.next()
            except ListExhausted:
                return


_INJECTIVE: dict = {}


def is_injective(trellis: Trellis) -> bool:
    """Whether distinct info words always give distinct codewords.

    Checked through the rank of the cyclic generator matrix over GF(2).
    """
    key = (trellis.code.generators, trellis.code.k)
    if key not in _INJECTIVE:
        from .tbcc import generator_matrix

        _INJECTIVE[key] = _gf2_rank(generator_matrix(trellis.code)) == trellis.code.k
    return _INJECTIVE[key]


def _gf2_rank(G: np.ndarray) -> int:
    A = G.copy() & 1
    rank = 0
    rows, cols = A.shape
    for c in range(cols):
        piv = np.nonzero(A[rank:, c])[0]
        if piv.size == 0:
            continue
        p = rank + piv[0]
        A[[rank, p]] = A[[p, rank]]
        others = np.nonzero(A[:, c])[0]
        others = others[others != rank]
        A[others] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def slva_list(y, trellis: Trellis, count: int) -> list[Candidate]:
    """The ``count`` best codewords (fewer if the code is smaller)."""
    session = SlvaSession(y, trellis)
    out = []
    for cand in session:
        out.append(cand)
        if len(out) == count:
            break
    return out
