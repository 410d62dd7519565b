"""Error counters, the ensemble weight enumerator of the two-sub-frame
truncated code, and the union bound built on it."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import erfc
from scipy.stats import binomtest


@dataclass
class ErrorCounters:
    L: int
    frames_sent: int = 0
    frames_in_error: int = 0
    subframes_sent: int = 0
    subframes_in_error: int = 0
    first_error_positions: np.ndarray = None

    def __post_init__(self):
        if self.first_error_positions is None:
            self.first_error_positions = np.zeros(self.L, dtype=np.int64)

    def record(self, subframe_wrong) -> None:
        """Add one decoded frame given its per-sub-frame error flags."""
        bad = np.asarray(subframe_wrong, dtype=bool)
        if bad.size != self.L:
            raise ValueError(f"expected {self.L} flags, got {bad.size}")
        self.frames_sent += 1
        self.subframes_sent += self.L
        nbad = int(bad.sum())
        self.subframes_in_error += nbad
        if nbad:
            self.frames_in_error += 1
            self.first_error_positions[int(np.argmax(bad))] += 1

    def merge(self, other: "ErrorCounters") -> "ErrorCounters":
        if other.L != self.L:
            raise ValueError("cannot merge counters of different L")
        return ErrorCounters(
            self.L,
            self.frames_sent + other.frames_sent,
            self.frames_in_error + other.frames_in_error,
            self.subframes_sent + other.subframes_sent,
            self.subframes_in_error + other.subframes_in_error,
            self.first_error_positions + other.first_error_positions,
        )

    __add__ = merge

    @property
    def first_subframe_errors(self) -> int:
        return int(self.first_error_positions[0])

    @property
    def clean_decisions(self) -> int:
        """Decisions taken while every earlier decision in the frame was right."""
        t = np.arange(1, self.L + 1)
        ok_frames = self.frames_sent - self.frames_in_error
        return int(self.first_error_positions @ t) + ok_frames * self.L


def error_rates(c: ErrorCounters) -> tuple[float, float, float]:
    """(subFER, FER, fER).

    subFER is the rate of first error events among decisions whose past was
    decoded correctly.  With a correct past every stage faces the same
    statistics as sub-frame 0, and pooling them makes
    subFER <= FER <= L subFER hold exactly on any batch.
    :func:`sub_fer_first_only` gives the plain sub-frame-0 estimate.
    """
    if c.frames_sent <= 0 or c.subframes_sent <= 0:
        raise ValueError("no frames recorded")
    return (
        c.frames_in_error / c.clean_decisions,
        c.frames_in_error / c.frames_sent,
        c.subframes_in_error / c.subframes_sent,
    )


def sub_fer_first_only(c: ErrorCounters) -> float:
    if c.frames_sent <= 0:
        raise ValueError("no frames recorded")
    return c.first_subframe_errors / c.frames_sent


def ensemble_wef(a, n: int, k: int) -> np.ndarray:
    """B(X) = 2^(k-n) (1+X)^n A(X), coefficients indexed by weight 0..2n."""
    a = [int(x) for x in np.asarray(a)]
    if a and a[0] != 0:
        raise ValueError("A(X) must not count the zero codeword")
    binom = [comb(n, i) for i in range(n + 1)]
    out = [0] * (len(a) + n)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(binom):
                out[i + j] += ai * bj
    # exact integers, scaled by a power of two
    return np.array([x / 2 ** (n - k) for x in out], dtype=np.float64)


def qfunc(x):
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def union_bound(b, model) -> float:
    """sum_d B_d Q(sqrt(d)/sigma): BPSK words at Hamming distance d are
    2 sqrt(d) apart."""
    b = np.asarray(b, dtype=np.float64)
    d = np.arange(b.size)
    mask = (b != 0) & (d > 0)
    return float(np.sum(b[mask] * qfunc(np.sqrt(d[mask]) / model.sigma)))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class BoundReport:
    sub_fer: float
    fer_frame: float
    fer: float
    ordering_holds: bool  # subFER <= FER <= L subFER
    propagation_point: bool  # fER <= (L/2) subFER on the point estimates
    propagation_within_ci: bool  # same, allowing both 95% Wilson intervals
    fer_interval: tuple[float, float] = field(default=(0.0, 1.0))
    sub_fer_interval: tuple[float, float] = field(default=(0.0, 1.0))

    def lines(self) -> list[str]:
        return [
            f"subFER={self.sub_fer:.4g} FER={self.fer_frame:.4g} fER={self.fer:.4g}",
            f"subFER <= FER <= L*subFER: {'holds' if self.ordering_holds else 'VIOLATED'}",
            f"fER <~ (L/2)*subFER (95% Wilson): {'consistent' if self.propagation_within_ci else 'not consistent'}",
        ]


def fer_bound_check(c: ErrorCounters, L: int | None = None, confidence: float = 0.95) -> BoundReport:
    """Check the error-rate ordering exactly and the propagation estimate
    fER <~ (L/2) subFER statistically.  The latter is advisory only.

    Counters that no real decoding run can produce (more errored frames than
    frames, histogram not matching the errored-frame count, ...) are reported
    as violating the ordering.
    """
    L = c.L if L is None else L
    if c.frames_sent <= 0:
        raise ValueError("no frames recorded")
    consistent = (
        0 <= c.frames_in_error <= c.frames_sent
        and c.frames_in_error <= c.subframes_in_error <= c.subframes_sent
        and c.subframes_sent == L * c.frames_sent
        and int(c.first_error_positions.sum()) == c.frames_in_error
        and c.frames_sent <= c.clean_decisions <= L * c.frames_sent
    )
    if not consistent:
        nan = float("nan")
        return BoundReport(nan, nan, nan, False, False, False, (nan, nan), (nan, nan))
    sub, frame, fer = error_rates(c)
    # given consistent counts, subFER <= FER <= L subFER reduces to
    # F <= clean <= L F, checked above in exact integers
    fer_ci = wilson_interval(c.subframes_in_error, c.subframes_sent, confidence)
    sub_ci = wilson_interval(c.frames_in_error, c.clean_decisions, confidence)
    return BoundReport(
        sub, frame, fer, True,
        fer <= L / 2 * sub,
        fer_ci[0] <= L / 2 * sub_ci[1],
        fer_ci, sub_ci,
    )
