"""Acceptance criteria A1-A6.

Each test prints one PASS/FAIL line; the lines are repeated in the pytest
terminal summary. Run with ``pytest -s tests/test_acceptance.py``.
"""

import itertools
import math
import time

import numpy as np
import pytest

from srfsc.channel_sim import SimConfig, chunk_errors, run_trials
from srfsc.cycles import calibrated_cost_model, throughput_report
from srfsc.fixedpoint import FLOAT, Q640
from srfsc.polar_code import CodeSpec, encode, generator_matrix, nr_code
from srfsc.sc_reference import ml_metric_trellis, ml_node_oracle, node_codebook
from srfsc.sr_compiler import (
    SR,
    emit_program,
    pack_instruction,
    repetition_sequences,
    unpack_instruction,
)
from srfsc.srfsc_decoder import count_cycles, sr_node_decode

from conftest import random_spec, record

REFERENCE_CYCLES = {"1/2": 222, "1/4": 186, "3/4": 200}
A1_VECTORS = 1000
A4_GRID = (2.25, 2.5, 2.75, 3.0)
A4_TARGET_FER = 1e-2
A4_MAX_SHIFT_DB = 0.25
A4_MIN_ERRORS = 100
A5_EBN0 = 2.5
A5_FRAMES = 10_000


# --------------------------------------------------------------------------- #
# A1


def _sr_shapes(programs):
    shapes = {}
    for prog in programs.values():
        for ins in prog.instructions:
            if ins.opcode != SR or ins.source_stage > 6:
                continue
            seqs = prog.sequences(ins)
            key = (ins.sr_stage, ins.source_stage, ins.fro_num, seqs.tobytes())
            shapes.setdefault(key, (ins, seqs, prog.spec.frozen_mask[ins.start : ins.start + ins.length]))
    return list(shapes.values())


def _oracle_step1(alphas, seq, r, q):
    """Signed block sums with a saturating pairwise adder tree, written out longhand."""
    block = seq.size
    out = np.empty(alphas.shape[:-1] + (2**r,), dtype=np.int64 if not q.is_float else np.float64)
    for i in range(2**r):
        terms = [alphas[..., i * block + k] * (-1 if seq[k] else 1) for k in range(block)]
        terms = [t.astype(out.dtype) for t in terms]
        while len(terms) > 1:
            terms = [q.sat(terms[k] + terms[k + 1]) for k in range(0, len(terms), 2)]
        out[..., i] = terms[0]
    return out


def _source_ml(mask, alphas):
    if 2 ** int((~mask).sum()) <= 2**12:
        return ml_node_oracle(node_codebook(mask), alphas)[1].astype(np.float64)
    return ml_metric_trellis(mask, alphas)


def _a1_vectors(rng, q, L):
    if q.is_float:
        # realistic channel-domain magnitudes on a 1/8 grid, so sums are exact
        return np.round(rng.normal(1.5, 4.0, (A1_VECTORS, L)) * 8) / 8
    half = A1_VECTORS // 2
    wide = rng.integers(-q.internal_max, q.internal_max + 1, (half, L))
    narrow = rng.integers(-q.channel_max, q.channel_max + 1, (A1_VECTORS - half, L))
    return np.concatenate([wide, narrow]).astype(q.dtype)


def test_a1_oracle_equivalence(nr_programs):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    shapes = _sr_shapes(nr_programs)
    bad, full_checked = [], 0
    for ins, seqs, mask in shapes:
        r, b = ins.source_stage, ins.fro_num
        src_mask = np.zeros(2**r, dtype=bool)
        src_mask[:b] = True
        for q in (FLOAT, Q640):
            a = _a1_vectors(rng, q, ins.length)
            res = sr_node_decode(a, seqs, r, b, q)
            # brute force over every sequence and every source codeword
            per_seq = np.stack([_source_ml(src_mask, _oracle_step1(a, s, r, q)) for s in seqs], axis=-1)
            ok = np.array_equal(res.metric.astype(np.float64), per_seq.max(axis=-1))
            if q.is_float:
                # the node-domain correlation must also be the node's ML metric
                node_metric = np.sum((1 - 2 * res.beta.astype(np.float64)) * a, axis=-1)
                n_frozen, n_info = int(mask.sum()), int((~mask).sum())
                if n_info <= 16 and mask.size <= 64:
                    ok &= np.array_equal(node_metric, ml_node_oracle(node_codebook(mask), a)[1])
                    full_checked += 1
                elif n_frozen <= 16:
                    ok &= np.array_equal(node_metric, ml_metric_trellis(mask, a))
                    full_checked += 1
            if not ok:
                bad.append((ins.sr_stage, r, b, len(seqs), str(q)))
    dt = time.perf_counter() - t0
    ok = not bad and len(shapes) > 0 and dt < 120
    record(
        "A1",
        ok,
        f"{len(shapes)} SR shapes x {A1_VECTORS} vectors x (float, Q(6,4,0)), exact metric match; "
        f"{full_checked} shapes also matched full-node ML; mismatches={bad}; {dt:.1f}s",
    )
    assert ok


# --------------------------------------------------------------------------- #
# A2


def test_a2_instruction_count(nr_programs):
    prog = nr_programs["1/2"]
    print("P(1024,512), P=64 instruction listing:")
    for k, ins in enumerate(prog.instructions):
        print(
            f"  {k:>2} {ins.opcode:<5} start={ins.start:<4} stage={ins.sr_stage} src={ins.source_stage} "
            f"fro={ins.fro_num} seq={ins.seq_num} type={ins.node_type}"
        )
    count = len(prog.instructions)
    tables = set()
    for p in nr_programs.values():
        for ins in p.instructions:
            if ins.seq_num > 0:
                tables.add(p.sequences(ins).tobytes())
    ok = 35 <= count <= 47 and len(tables) == 6
    record("A2", ok, f"R=1/2 compiles to {count} instructions (window 35..47, reference 41); {len(tables)} distinct SeqNum>0 tables (need 6)")
    assert ok


# --------------------------------------------------------------------------- #
# A3


def test_a3_cycles_and_throughput(nr_programs):
    default = {name: count_cycles(nr_programs[name]) for name in REFERENCE_CYCLES}
    calibrated = count_cycles(nr_programs["1/2"], calibrated_cost_model())
    tp = throughput_report(222, 1024, 109.6e6)
    dev = {name: default[name] / REFERENCE_CYCLES[name] - 1 for name in REFERENCE_CYCLES}
    cal_dev = calibrated / REFERENCE_CYCLES["1/2"] - 1
    tp_dev = tp / 505.6e6 - 1
    ok = all(abs(d) <= 0.15 for d in dev.values()) and abs(cal_dev) <= 0.05 and abs(tp_dev) <= 0.005
    parts = ", ".join(f"R={n}: {default[n]} ({dev[n]:+.1%})" for n in REFERENCE_CYCLES)
    record(
        "A3",
        ok,
        f"default cycles {parts} (tol 15%); calibrated R=1/2: {calibrated} ({cal_dev:+.1%}, tol 5%); "
        f"throughput {tp / 1e6:.2f} Mbps ({tp_dev:+.3%}, tol 0.5%)",
    )
    assert ok


# --------------------------------------------------------------------------- #
# A4


def _crossing(points, target):
    """Eb/N0 where log10(FER) crosses ``target``, by linear interpolation."""
    for p0, p1 in zip(points, points[1:]):
        if p0.fer >= target >= p1.fer and p0.fer > 0 and p1.fer > 0:
            y0, y1 = math.log10(p0.fer), math.log10(p1.fer)
            t = (math.log10(target) - y0) / (y1 - y0) if y1 != y0 else 0.0
            return p0.ebn0_db + t * (p1.ebn0_db - p0.ebn0_db)
    return None


def _fmt(x):
    return "n/a" if x is None else f"{x:.3f}"


@pytest.mark.slow
def test_a4_fixed_vs_float(nr_codes):
    spec = nr_codes["1/2"]
    curves = {}
    for q in (FLOAT, Q640):
        cfg = SimConfig(spec, "srfsc", q, A4_GRID, max_frames=2_000_000, max_frame_errors=A4_MIN_ERRORS, seed=2024)
        curves[str(q)] = run_trials(cfg).points
    for name, pts in curves.items():
        print(name, ", ".join(f"{p.ebn0_db:.2f} dB: {p.frame_errors}/{p.frames} = {p.fer:.2e}" for p in pts))
    enough = all(p.frame_errors >= A4_MIN_ERRORS for pts in curves.values() for p in pts)
    e_float = _crossing(curves["float"], A4_TARGET_FER)
    e_fixed = _crossing(curves[str(Q640)], A4_TARGET_FER)
    shift = abs(e_fixed - e_float) if e_float is not None and e_fixed is not None else float("inf")
    ok = enough and shift <= A4_MAX_SHIFT_DB
    record(
        "A4",
        ok,
        f"FER=1e-2 at {_fmt(e_float)} dB (float) vs {_fmt(e_fixed)} dB (Q(6,4,0)); shift {shift:.3f} dB (tol {A4_MAX_SHIFT_DB}); "
        f">= {A4_MIN_ERRORS} errors/point: {enough}",
    )
    assert ok


# --------------------------------------------------------------------------- #
# A5


@pytest.mark.slow
def test_a5_srfsc_vs_sc_paired(nr_codes):
    spec = nr_codes["1/2"]
    program = emit_program(spec, 64)
    cfg_sr = SimConfig(spec, "srfsc", FLOAT, (A5_EBN0,), max_frames=A5_FRAMES, seed=77)
    cfg_sc = SimConfig(spec, "sc", FLOAT, (A5_EBN0,), max_frames=A5_FRAMES, seed=77)
    e_sr, e_sc = [], []
    for first in range(0, A5_FRAMES, 1000):
        e_sr.append(chunk_errors(cfg_sr, program, 0, first, 1000)[0])
        e_sc.append(chunk_errors(cfg_sc, None, 0, first, 1000)[0])
    e_sr, e_sc = np.concatenate(e_sr).astype(float), np.concatenate(e_sc).astype(float)
    d = e_sr - e_sc
    delta = d.mean()
    sigma = d.std(ddof=1) / math.sqrt(d.size)
    ok = abs(delta) <= 3 * sigma if sigma > 0 else delta == 0
    record(
        "A5",
        ok,
        f"{d.size} paired frames at {A5_EBN0} dB: FER srfsc {e_sr.mean():.4f}, sc {e_sc.mean():.4f}, "
        f"delta {delta:+.4f}, 3 sigma {3 * sigma:.4f}; frames differing {int(np.count_nonzero(d))}",
    )
    assert ok


# --------------------------------------------------------------------------- #
# A6


def test_a6_structural_properties(nr_codes):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    checks = {}

    # stage bound j + W_v <= 1 + log2 P on every emitted instruction
    compiled, eq_ok = 0, True
    specs = list(nr_codes.values()) + [random_spec(rng, N) for N in (16, 32, 64, 128, 256, 512, 1024) for _ in range(15)]
    for spec in specs:
        for P in (2, 4, 8, 16, 32, 64, 128):
            prog = emit_program(spec, P)
            compiled += 1
            bound = 1 + int(math.log2(P))
            eq_ok &= all(ins.sr_stage + ins.seq_num <= bound for ins in prog.instructions if ins.opcode == SR)
    checks["stage_bound"] = eq_ok

    count_ok = True
    for d in range(7):
        for v in itertools.product((0, 1), repeat=d):
            S = repetition_sequences(v)
            count_ok &= S.shape[0] == 2 ** sum(v) and len({s.tobytes() for s in S}) == S.shape[0]
    checks["seq_count"] = count_ok

    enc_ok = True
    for N in (1, 2, 4, 8, 16):
        G = generator_matrix(N).astype(np.int64)
        U = np.array(list(itertools.product((0, 1), repeat=N)), dtype=np.uint8)
        enc_ok &= np.array_equal(encode(CodeSpec(N, ()), U), (U.astype(np.int64) @ G) % 2)
    checks["encode"] = enc_ok

    words = rng.integers(0, 2**13, 10_000)
    checks["pack"] = all(pack_instruction(unpack_instruction(int(w))) == w for w in words)

    small = nr_code(128, 64)
    kw = dict(ebn0_points=(1.5, 2.5), max_frames=2000, max_frame_errors=50, seed=11)
    r1 = run_trials(SimConfig(small, workers=1, **kw))
    checks["determinism"] = r1 == run_trials(SimConfig(small, workers=1, **kw))
    checks["workers"] = r1 == run_trials(SimConfig(small, workers=2, **kw))

    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 120
    record("A6", ok, f"{compiled} compiles; " + ", ".join(f"{k}={v}" for k, v in checks.items()) + f"; {dt:.1f}s")
    assert ok
