"""BMST-TBCC encoding and successive-cancellation list decoding.

Transmitted sub-frame t is c(t) = v(t) + v(t-1) R with v(-1) = 0, and a
termination sub-frame c(L) = v(L-1) R closes the frame.

The decoder works on a window of two sub-frames.  For sub-frame t it lists
candidates for v(t) from the cancelled observation z0, scores each one with
the soft metric against y(t+1), stops as soon as the best score exceeds the
threshold, and then strips the decided v(t) R from y(t+1) to obtain the next
z0.  Wrong decisions are not detected afterwards and propagate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels as K
from .channel import ChannelModel
from .gf2 import BinaryMatrix, as_bits, random_matrix, vec_add, vec_mat_mul
from .slva import ListExhausted, SlvaSession
from .tbcc import TbccCode, Trellis, build_trellis, encode


@dataclass(frozen=True)
class BmstConfig:
    code: TbccCode
    L: int
    r_seed: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")

    @classmethod
    def for_total_rate(cls, code: TbccCode, total_rate: float, r_seed: int) -> "BmstConfig":
        """Pick L so that k L / (n (L + 1)) equals ``total_rate``."""
        if not 0 < total_rate < code.rate:
            raise ValueError(f"total rate must lie in (0, {code.rate})")
        L = total_rate / (code.rate - total_rate)
        if abs(L - round(L)) > 1e-6:
            raise ValueError(f"total rate {total_rate} is not reachable with integer L")
        return cls(code, int(round(L)), r_seed)

    @property
    def total_rate(self) -> float:
        return self.code.k * self.L / (self.code.n * (self.L + 1))

    @cached_property
    def R(self) -> BinaryMatrix:
        return random_matrix(self.code.n, self.r_seed)

    @cached_property
    def trellis(self) -> Trellis:
        return build_trellis(self.code)


@dataclass(frozen=True)
class DecoderConfig:
    threshold: float
    l_max: int
    model: ChannelModel

    def __post_init__(self):
        if self.l_max < 1:
            raise ValueError(f"l_max must be >= 1, got {self.l_max}")


@dataclass(frozen=True, eq=False)
class SubframeLog:
    list_size: int
    m_max: float
    passed_threshold: bool
    info_word: np.ndarray


@dataclass
class FrameLog:
    subframes: list[SubframeLog] = field(default_factory=list)

    @property
    def list_sizes(self) -> list[int]:
        return [s.list_size for s in self.subframes]

    @property
    def total_list_size(self) -> int:
        return sum(self.list_sizes)


def bmst_encode(cfg: BmstConfig, u: Sequence) -> list[np.ndarray]:
    """L info words in, L + 1 transmitted sub-frames out."""
    if len(u) != cfg.L:
        raise ValueError(f"expected {cfg.L} info words, got {len(u)}")
    code, R = cfg.code, cfg.R
    prev = np.zeros(code.n, dtype=np.uint8)
    out = []
    for t, ut in enumerate(u):
        v = encode(code, as_bits(ut, code.k), cfg.trellis)
        out.append(vec_add(v, vec_mat_mul(prev, R)))
        prev = v
    out.append(vec_mat_mul(prev, R))
    return out


class SuccessiveCancellationDecoder:
    """Streaming decoder: feed sub-frames in order, get one decision per step.

    ``push(y)`` returns None for the first sub-frame and afterwards the
    decision for the previous one, so the decision on sub-frame t never
    sees anything past y(t+1).
    """

    def __init__(self, cfg: BmstConfig, dcfg: DecoderConfig):
        self.cfg = cfg
        self.dcfg = dcfg
        self.t = 0
        self._z0 = None
        self._R = np.ascontiguousarray(cfg.R.entries)
        self._inv_var = 1.0 / dcfg.model.variance

    @property
    def done(self) -> bool:
        return self.t == self.cfg.L

    def push(self, y) -> tuple[np.ndarray, SubframeLog] | None:
        n = self.cfg.code.n
        y = np.ascontiguousarray(y, dtype=np.float64)
        if y.shape != (n,):
            raise ValueError(f"sub-frame must have length n={n}, got {y.shape}")
        if self.done:
            raise ValueError(f"all {self.cfg.L} sub-frames already decoded")
        if self._z0 is None:
            self._z0 = y
            return None
        packed, w, log = self._decide(self._z0, y)
        self._z0 = K.flip_by(y, w)
        self.t += 1
        return log.info_word, log

    def _decide(self, z0, y1):
        code, tr = self.cfg.code, self.cfg.trellis
        T, l_max = self.dcfg.threshold, self.dcfg.l_max
        session = SlvaSession(z0, tr)
        m_max = -math.inf
        best = None
        ell = 0
        while m_max <= T and ell < l_max:
            try:
                _, packed = session.next_packed()
            except ListExhausted:
                break
            ell += 1
            own, nxt, w = K.score_candidate(
                packed, z0, y1, self._R, tr.out_bits, tr.next_state, tr.out_label,
                code.m, code.k, self._inv_var,
            )
            if own + nxt >= m_max:
                m_max = own + nxt
                best = (packed, w)
        packed, w = best
        log = SubframeLog(ell, m_max, m_max > T, K.unpack_bits(packed, code.k))
        return packed, w, log


def decode_stream(cfg: BmstConfig, dcfg: DecoderConfig,
                  frames: Iterable) -> Iterator[tuple[np.ndarray, SubframeLog]]:
    """Lazily decode; pulls y(t+1) only when the decision on t is requested."""
    dec = SuccessiveCancellationDecoder(cfg, dcfg)
    for y in frames:
        out = dec.push(y)
        if out is not None:
            yield out
        if dec.done:
            return
    if not dec.done:
        raise ValueError(f"stream ended after {dec.t} decisions, expected {cfg.L}")


def bmst_decode(cfg: BmstConfig, dcfg: DecoderConfig, y: Sequence) -> tuple[list[np.ndarray], FrameLog]:
    if len(y) != cfg.L + 1:
        raise ValueError(f"expected {cfg.L + 1} received sub-frames, got {len(y)}")
    words, log = [], FrameLog()
    for info, sub in decode_stream(cfg, dcfg, y):
        words.append(info)
        log.subframes.append(sub)
    return words, log
