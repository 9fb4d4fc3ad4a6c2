"""BPSK/AWGN Monte-Carlo harness for frame and bit error rates.

Every frame draws its info bits and noise from its own generator, keyed by
``(seed, point index, frame index)``. Frames are decoded in fixed-size
chunks, and the stopping rule is applied frame by frame in index order. The
results are therefore the same for any worker count.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fixedpoint import FLOAT, QuantSpec, quantize_channel
from .polar_code import CodeSpec, encode
from .sc_reference import sc_decode
from .sr_compiler import emit_program
from .srfsc_decoder import srfsc_decode

log = logging.getLogger(__name__)

CHUNK = 500
CSV_HEADER = ("ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber")


@dataclass(frozen=True)
class SimConfig:
    spec: CodeSpec
    decoder: str = "srfsc"
    q: QuantSpec = FLOAT
    ebn0_points: tuple[float, ...] = (2.0,)
    max_frames: int = 10_000
    max_frame_errors: int = 100
    seed: int = 0
    workers: int = 1
    P: int = 64
    llr_gain: float = 1.0
    all_zero: bool = False

    def __post_init__(self):
        if self.decoder not in ("sc", "srfsc"):
            raise ValueError(f"decoder must be 'sc' or 'srfsc', got {self.decoder!r}")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if any(not math.isfinite(e) for e in self.ebn0_points):
            raise ValueError("Eb/N0 points must be finite")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class PointResult:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    K: int

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.K) if self.frames and self.K else 0.0


@dataclass
class SimResult:
    K: int
    points: list[PointResult] = field(default_factory=list)
    cycles: int | None = None

    def rows(self):
        for p in self.points:
            yield (p.ebn0_db, p.frames, p.frame_errors, p.bit_errors, p.fer, p.ber)

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "cycles": self.cycles,
            "points": [dict(zip(CSV_HEADER, row)) for row in self.rows()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimResult":
        K = obj["K"]
        pts = [PointResult(p["ebn0_db"], p["frames"], p["frame_errors"], p["bit_errors"], K) for p in obj["points"]]
        return cls(K, pts, obj.get("cycles"))


def noise_sigma2(ebn0_db: float, rate: float) -> float:
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def awgn_llrs(x, ebn0_db: float, rate: float, rng: np.random.Generator | None) -> np.ndarray:
    """BPSK (0 -> +1) over AWGN; returns channel LLRs ``2 y / sigma**2``.

    ``rng=None`` gives the noiseless LLRs.
    """
    sigma2 = noise_sigma2(ebn0_db, rate)
    y = 1.0 - 2.0 * np.asarray(x, dtype=np.float64)
    if rng is not None:
        y = y + math.sqrt(sigma2) * rng.standard_normal(y.shape)
    return 2.0 * y / sigma2


def frame_rng(seed: int, point: int, frame: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(point, frame))))


def chunk_errors(cfg: SimConfig, program, point: int, first: int, count: int):
    """Per-frame (frame_error, bit_errors) for frames ``first .. first+count-1``."""
    spec = cfg.spec
    if spec.K == 0:
        return np.zeros(count, dtype=bool), np.zeros(count, dtype=np.int64)
    ebn0 = cfg.ebn0_points[point]
    info = np.array(spec.info, dtype=int)
    u = np.zeros((count, spec.N), dtype=np.uint8)
    rngs = []
    for t in range(count):
        rng = frame_rng(cfg.seed, point, first + t)
        bits = rng.integers(0, 2, spec.K, dtype=np.uint8)
        if not cfg.all_zero:
            u[t, info] = bits
        rngs.append(rng)
    x = encode(spec, u)
    real = np.stack([awgn_llrs(x[t], ebn0, spec.rate, rngs[t]) for t in range(count)])
    llr = quantize_channel(cfg.llr_gain * real, cfg.q)
    if cfg.decoder == "srfsc":
        u_hat = srfsc_decode(program, llr, cfg.q).u_hat
    else:
        u_hat, _ = sc_decode(spec, llr, cfg.q)
    errs = (u_hat[:, info] != u[:, info]).sum(axis=1)
    return errs > 0, errs


def _work(args):
    cfg, program, point, first, count = args
    return chunk_errors(cfg, program, point, first, count)


def run_trials(cfg: SimConfig) -> SimResult:
    """Simulate every Eb/N0 point until ``max_frames`` or ``max_frame_errors``."""
    program = emit_program(cfg.spec, cfg.P) if cfg.decoder == "srfsc" else None
    result = SimResult(cfg.spec.K, cycles=program.total_cycles if program is not None else None)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for point, ebn0 in enumerate(cfg.ebn0_points):
            result.points.append(_run_point(cfg, program, point, ebn0, pool))
            p = result.points[-1]
            log.info("%.2f dB: %d/%d frame errors", ebn0, p.frame_errors, p.frames)
    finally:
        if pool is not None:
            pool.shutdown()
    _warn_non_monotone(result)
    return result


def _run_point(cfg, program, point, ebn0, pool) -> PointResult:
    frames = frame_errors = bit_errors = 0
    next_frame = 0
    wave = cfg.workers
    while frames < cfg.max_frames and frame_errors < cfg.max_frame_errors:
        jobs = []
        for _ in range(wave):
            if next_frame >= cfg.max_frames:
                break
            count = min(CHUNK, cfg.max_frames - next_frame)
            jobs.append((cfg, program, point, next_frame, count))
            next_frame += count
        outs = pool.map(_work, jobs) if pool is not None else map(_work, jobs)
        for fe, be in outs:
            if frames >= cfg.max_frames or frame_errors >= cfg.max_frame_errors:
                break
            # stop exactly at the frame that reaches the error budget
            cum = np.cumsum(fe)
            need = cfg.max_frame_errors - frame_errors
            hit = np.flatnonzero(cum >= need)
            take = hit[0] + 1 if hit.size else fe.size
            frames += int(take)
            frame_errors += int(fe[:take].sum())
            bit_errors += int(be[:take].sum())
    return PointResult(ebn0, frames, frame_errors, bit_errors, cfg.spec.K)


def _warn_non_monotone(result: SimResult) -> None:
    rows = list(result.rows())
    for (e0, n0, fe0, *_), (e1, n1, fe1, *_) in zip(rows, rows[1:]):
        if e1 > e0 and n0 and n1 and fe1 / n1 > fe0 / n0:
            sd = math.sqrt(fe0 / n0 / n0 + fe1 / n1 / n1)
            if fe1 / n1 - fe0 / n0 > 3 * sd:
                log.warning("FER rises from %.2f to %.2f dB beyond Monte-Carlo noise", e0, e1)


def export(result: SimResult, fmt: str, path: str | Path) -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for row in result.rows():
                w.writerow([repr(float(row[0])), *row[1:4], repr(float(row[4])), repr(float(row[5]))])
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump(result.to_json(), fh, indent=1)
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def load_json(path: str | Path) -> SimResult:
    with open(path) as fh:
        return SimResult.from_json(json.load(fh))


def parse_range(text: str) -> tuple[float, ...]:
    """``'1.0:0.5:3.5'`` (inclusive) or a comma list ``'1,2,3'``."""
    if ":" in text:
        lo, step, hi = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("Eb/N0 step must be positive")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(round(lo + k * step, 10) for k in range(count))
    return tuple(float(t) for t in text.split(","))
