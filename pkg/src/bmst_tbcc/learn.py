"""Off-line threshold learning from labelled soft-metric samples.

Samples come from two-sub-frame transmissions where the sampler knows the
transmitted word: every listed candidate for the first sub-frame is scored
and labelled correct or erroneous.  Two reductions turn samples into a
threshold:

``quantile:a``  the a-quantile of the erroneous scores, so about a fraction
                1 - a of wrong candidates would still be accepted;
``midpoint:a``  halfway between the a-quantile of the erroneous scores and
                the (1 - a)-quantile of the correct ones;
``accept:a``    the (1 - a)-quantile of the correct scores, so a correct
                candidate clears the threshold with probability about a.
                ``accept:0.5`` and ``accept:0.99`` land close to the two
                published threshold ladders (see REFERENCE_THRESHOLDS).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .bmst import BmstConfig
from .channel import ChannelModel, awgn, bpsk
from .gf2 import vec_add, vec_mat_mul
from .slva import ListExhausted, SlvaSession
from .tbcc import encode


REFERENCE_SNRS = (2.0, 2.5, 3.0, 3.5, 4.0)
REFERENCE_THRESHOLDS = {
    "A": (1.3, 1.35, 1.4, 1.45, 1.5),
    "B": (0.95, 1.0, 1.05, 1.1, 1.15),
}


@dataclass(frozen=True)
class MetricSample:
    m_value: float
    correct: bool
    snr_db: float
    rank: int

    @property
    def label(self) -> str:
        return "correct" if self.correct else "erroneous"


@dataclass(frozen=True)
class Policy:
    kind: str
    alpha: float

    def __post_init__(self):
        if self.kind not in ("quantile", "midpoint", "accept"):
            raise ValueError(f"unknown policy {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"policy level must lie in [0, 1], got {self.alpha}")

    @classmethod
    def parse(cls, text: str) -> "Policy":
        kind, _, level = text.partition(":")
        default = {"quantile": 0.99, "midpoint": 1.0, "accept": 0.5}.get(kind, 0.0)
        return cls(kind, float(level) if level else default)

    def __str__(self):
        return f"{self.kind}:{self.alpha:g}"


def collect_samples(cfg: BmstConfig, model: ChannelModel, trials: int,
                    rng: np.random.Generator, l_max: int = 64,
                    noiseless: bool = False) -> list[MetricSample]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    code, tr = cfg.code, cfg.trellis
    R = np.ascontiguousarray(cfg.R.entries)
    inv_var = 1.0 / model.variance
    out = []
    for _ in range(trials):
        u0, u1 = rng.integers(0, 2, size=(2, code.k), dtype=np.uint8)
        v0, v1 = encode(code, u0, tr), encode(code, u1, tr)
        c0, c1 = v0, vec_add(v1, vec_mat_mul(v0, cfg.R))
        if noiseless:
            y0, y1 = bpsk(c0), bpsk(c1)
        else:
            y0, y1 = awgn(bpsk(c0), model, rng), awgn(bpsk(c1), model, rng)
        truth = K.pack_bits(u0)
        session = SlvaSession(y0, tr, l_max)
        for rank in range(1, l_max + 1):
            try:
                _, packed = session.next_packed()
            except ListExhausted:
                break
            own, nxt, _ = K.score_candidate(
                packed, y0, y1, R, tr.out_bits, tr.next_state, tr.out_label,
                code.m, code.k, inv_var,
            )
            out.append(MetricSample(own + nxt, packed == truth, model.snr_db, rank))
    return out


def choose_threshold(samples, policy: Policy | str) -> float:
    if isinstance(policy, str):
        policy = Policy.parse(policy)
    values = np.array([s.m_value for s in samples], dtype=np.float64)
    good = np.array([s.correct for s in samples], dtype=bool)
    if good.all() or not good.any():
        raise ValueError("threshold learning needs both correct and erroneous samples")
    if policy.kind == "accept":
        return float(np.quantile(values[good], 1.0 - policy.alpha))
    wrong_q = float(np.quantile(values[~good], policy.alpha))
    if policy.kind == "quantile":
        return wrong_q
    right_q = float(np.quantile(values[good], 1.0 - policy.alpha))
    return 0.5 * (wrong_q + right_q)


class ThresholdTable:
    """Thresholds keyed by (snr_db, k, l_max), persisted as CSV."""

    FIELDS = ("snr_db", "k", "l_max", "threshold", "policy")

    def __init__(self):
        self._entries: dict[tuple[float, int, int], tuple[float, str]] = {}

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return self._key(*key) in self._entries

    @staticmethod
    def _key(snr_db, k, l_max):
        return float(snr_db), int(k), int(l_max)

    def set(self, snr_db: float, k: int, l_max: int, threshold: float, policy: Policy | str) -> None:
        self._entries[self._key(snr_db, k, l_max)] = (float(threshold), str(policy))

    def lookup(self, snr_db: float, k: int, l_max: int) -> float:
        try:
            return self._entries[self._key(snr_db, k, l_max)][0]
        except KeyError:
            raise KeyError(f"no threshold stored for snr_db={snr_db}, k={k}, l_max={l_max}") from None

    def policy(self, snr_db: float, k: int, l_max: int) -> str:
        return self._entries[self._key(snr_db, k, l_max)][1]

    def rows(self):
        for (snr, k, lm), (T, pol) in sorted(self._entries.items()):
            yield snr, k, lm, T, pol

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.FIELDS)
            for snr, k, lm, T, pol in self.rows():
                w.writerow([repr(snr), k, lm, repr(T), pol])

    @classmethod
    def read(cls, path) -> "ThresholdTable":
        table = cls()
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                table.set(float(row["snr_db"]), int(row["k"]), int(row["l_max"]),
                          float(row["threshold"]), row["policy"])
        return table


def learn_table(cfg: BmstConfig, snrs, trials: int, policy: Policy | str,
                l_max: int = 64, seed: int = 0) -> ThresholdTable:
    """One threshold per SNR, each from its own seeded sample set."""
    policy = Policy.parse(policy) if isinstance(policy, str) else policy
    table = ThresholdTable()
    for i, snr in enumerate(snrs):
        rng = np.random.default_rng([seed, i])
        samples = collect_samples(cfg, ChannelModel.from_snr_db(snr), trials, rng, l_max)
        table.set(snr, cfg.code.k, l_max, choose_threshold(samples, policy), policy)
    return table
