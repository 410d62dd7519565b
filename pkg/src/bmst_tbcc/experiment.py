"""Monte Carlo runner for BMST-TBCC over BPSK/AWGN.

Every frame draws its data and noise from its own generator seeded with
(master_seed, point index, frame index), so results do not depend on the
number of worker processes or on how frames are chunked.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import ErrorCounters, error_rates
from .bmst import BmstConfig, DecoderConfig, bmst_decode, bmst_encode
from .channel import ChannelModel, awgn, bpsk
from .tbcc import DEFAULT_GENERATORS, TbccCode

log = logging.getLogger(__name__)

CSV_FIELDS = ("snr_db", "threshold", "frames", "subframes", "subframe_errors",
              "fer", "subfer", "ferr_frame", "avg_list_size", "seed")
CHUNK = 8


@dataclass(frozen=True)
class ExperimentConfig:
    snr_db: tuple[float, ...]
    thresholds: tuple[float, ...]
    generators: str = ",".join(DEFAULT_GENERATORS)
    k: int = 32
    L: int = 49
    l_max: int = 64
    frames: int = 100
    master_seed: int = 0
    r_seed: int = 1
    max_errors: int | None = None
    noiseless: bool = False
    workers: int = 1
    policy: str = "given"
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if len(self.thresholds) != len(self.snr_db):
            raise ValueError(f"{len(self.thresholds)} thresholds for {len(self.snr_db)} SNR points")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.l_max < 1:
            raise ValueError("l_max must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.max_errors is not None and self.max_errors < 1:
            raise ValueError("max_errors must be >= 1")
        # fail on bad code parameters before any simulation starts
        self.bmst_config()

    def bmst_config(self) -> BmstConfig:
        return BmstConfig(TbccCode(self.generators, self.k), self.L, self.r_seed)


@dataclass
class SimPoint:
    snr_db: float
    threshold: float
    counters: ErrorCounters
    total_list_size: int
    seed: int
    wall_clock: float = 0.0
    list_size_hist: np.ndarray = None

    @property
    def frames(self) -> int:
        return self.counters.frames_sent

    @property
    def subframes(self) -> int:
        return self.counters.subframes_sent

    @property
    def avg_list_size(self) -> float:
        return self.total_list_size / self.subframes

    @property
    def rates(self) -> tuple[float, float, float]:
        return error_rates(self.counters)

    def csv_row(self) -> list[str]:
        sub, frame, fer = self.rates
        c = self.counters
        return [repr(self.snr_db), repr(self.threshold), str(c.frames_sent), str(c.subframes_sent),
                str(c.subframes_in_error), repr(fer), repr(sub), repr(frame),
                repr(self.avg_list_size), str(self.seed)]


@dataclass
class SimResult:
    config: ExperimentConfig | None = None
    points: list[SimPoint] = field(default_factory=list)
    partial: bool = False


def simulate_frame(cfg: BmstConfig, dcfg: DecoderConfig, rng: np.random.Generator,
                   noiseless: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """One full frame; returns (per-sub-frame error flags, per-sub-frame list sizes)."""
    code = cfg.code
    u = rng.integers(0, 2, size=(cfg.L, code.k), dtype=np.uint8)
    tx = [bpsk(c) for c in bmst_encode(cfg, u)]
    y = tx if noiseless else [awgn(x, dcfg.model, rng) for x in tx]
    decoded, flog = bmst_decode(cfg, dcfg, y)
    bad = np.array([not np.array_equal(a, b) for a, b in zip(decoded, u)])
    return bad, np.array(flog.list_sizes, dtype=np.int64)


def _run_chunk(cfg: ExperimentConfig, point: int, start: int, stop: int):
    bcfg = cfg.bmst_config()
    dcfg = DecoderConfig(cfg.thresholds[point], cfg.l_max, ChannelModel.from_snr_db(cfg.snr_db[point]))
    out = []
    for f in range(start, stop):
        rng = np.random.default_rng([cfg.master_seed, point, f])
        out.append(simulate_frame(bcfg, dcfg, rng, cfg.noiseless))
    return out


def _chunks(cfg: ExperimentConfig, point: int):
    return [(cfg, point, s, min(s + CHUNK, cfg.frames)) for s in range(0, cfg.frames, CHUNK)]


def run_point(cfg: ExperimentConfig, point: int, pool=None) -> SimPoint:
    t0 = time.perf_counter()
    counters = ErrorCounters(cfg.L)
    hist = np.zeros(cfg.l_max + 1, dtype=np.int64)
    total = 0
    jobs = _chunks(cfg, point)
    results = pool.map(_run_chunk, *zip(*jobs)) if pool else (_run_chunk(*j) for j in jobs)
    for chunk in results:
        for bad, sizes in chunk:
            counters.record(bad)
            total += int(sizes.sum())
            hist += np.bincount(sizes, minlength=cfg.l_max + 1)
            if cfg.max_errors is not None and counters.subframes_in_error >= cfg.max_errors:
                break
        else:
            continue
        break
    return SimPoint(cfg.snr_db[point], cfg.thresholds[point], counters, total,
                    cfg.master_seed, time.perf_counter() - t0, hist)


def run_experiment(cfg: ExperimentConfig, on_point=None) -> SimResult:
    """Simulate every SNR point in order.

    ``on_point(result)`` is called after each finished point, which lets
    callers flush partial output.  A KeyboardInterrupt stops the run and
    returns what has been completed, flagged as partial.
    """
    result = SimResult(cfg)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for i in range(len(cfg.snr_db)):
            pt = run_point(cfg, i, pool)
            result.points.append(pt)
            log.info("snr %.2f dB T=%.3f: %d sub-frames, fER=%.3g, avg list %.2f (%.1fs)",
                     pt.snr_db, pt.threshold, pt.subframes, pt.rates[2], pt.avg_list_size, pt.wall_clock)
            if on_point:
                on_point(result)
    except KeyboardInterrupt:
        result.partial = True
        log.warning("interrupted; %d of %d points complete", len(result.points), len(cfg.snr_db))
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return result


def format_csv(result: SimResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for pt in result.points:
        w.writerow(pt.csv_row())
    if result.partial:
        buf.write("# partial\n")
    return buf.getvalue()


def emit_csv(result: SimResult, path) -> Path:
    path = Path(path)
    try:
        path.write_text(format_csv(result))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path
