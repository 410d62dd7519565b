"""Empirical divergence function and the two-frame soft metric.

For BPSK over AWGN the per-symbol log-ratio log2 f(y|x)/f(y) reduces to
1 - log2(1 + exp(-2*y*phi(x)/sigma^2)), so the Gaussian normalisation never
appears and large |y|/sigma^2 cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .channel import LN2, ChannelModel, bpsk
from .gf2 import BinaryMatrix, as_bits, vec_mat_mul
from .slva import Candidate, viterbi_packed
from .tbcc import Trellis


@dataclass(frozen=True)
class SoftMetric:
    own: float  # EDF of the candidate on its own frame
    next: float  # EDF of the re-decoded, sign-corrected next frame

    @property
    def value(self) -> float:
        return self.own + self.next

    @property
    def parts(self) -> tuple[float, float]:
        return self.own, self.next


def _edf_signed(z, model: ChannelModel) -> float:
    # z = phi(x) * y
    return 1.0 - float(np.mean(np.logaddexp(0.0, (-2.0 / model.variance) * z))) / LN2


def edf(x, y, model: ChannelModel) -> float:
    """D(x, y) = (1/n) log2 f(y|x)/f(y) in bits per symbol."""
    y = np.asarray(y, dtype=np.float64)
    x = as_bits(x)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    return _edf_signed(bpsk(x) * y, model)


def flip(y, c) -> np.ndarray:
    """Componentwise y * phi(c): negate y where c is 1."""
    y = np.asarray(y, dtype=np.float64)
    c = as_bits(c)
    if c.size != y.size:
        raise ValueError(f"length mismatch: {c.size} vs {y.size}")
    return y * bpsk(c)


def next_frame_edf(codeword, y1, R: BinaryMatrix, trellis: Trellis, model: ChannelModel) -> float:
    """EDF of VA(z) on z = y1 * phi(codeword R)."""
    z = np.ascontiguousarray(flip(y1, vec_mat_mul(codeword, R)))
    code = trellis.code
    _, packed = viterbi_packed(z, trellis)
    v = K.encode_packed(packed, trellis.out_bits, trellis.next_state, code.m, code.k)
    return _edf_signed(bpsk(v) * z, model)


def soft_metric(cand: Candidate | np.ndarray, y0, y1, R: BinaryMatrix, trellis: Trellis,
                model: ChannelModel) -> SoftMetric:
    codeword = cand.codeword if isinstance(cand, Candidate) else as_bits(cand)
    n = trellis.code.n
    if codeword.size != n or np.size(y0) != n or np.size(y1) != n:
        raise ValueError(f"all inputs must have length n={n}")
    own = edf(codeword, y0, model)
    return SoftMetric(own, next_frame_edf(codeword, y1, R, trellis, model))
