"""Instruction-driven SRFSC decoding.

Between instructions the decoder walks the pruned tree with the usual f/g
descents and partial-sum combines; at each instruction it either emits zeros
(RATE0), hard-decides (RATE1), or runs the three-step SR node decoder:

1. transform the node LLRs into source-node LLRs once per repetition sequence,
2. decode the source node for each sequence (hard decision plus Wagner
   decoding on its parity groups),
3. keep the sequence with the best correlation metric and expand the source
   estimate back to the node length.

Every array carries a leading batch axis, so many frames decode in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cycles import DEFAULT_COST_MODEL, CostModel, throughput_report  # noqa: F401
from .fixedpoint import FLOAT, QuantSpec
from .polar_code import polar_transform
from .sc_reference import combine, hard_decision, split_f, split_g
from .sr_compiler import RATE0, RATE1, SR, DecodingProgram, Instruction


@dataclass
class DecodeOutput:
    x_hat: np.ndarray
    u_hat: np.ndarray
    cycles: int
    trace: list[dict] = field(default_factory=list)

    @property
    def selected_sequences(self) -> list[int]:
        return [int(np.ravel(t["l"])[0]) for t in self.trace if t["opcode"] == SR]


def tree_sum(x, q: QuantSpec = FLOAT):
    """Pairwise adder-tree reduction over the last axis, saturating after every layer."""
    acc = np.asarray(x)
    if not q.is_float:
        acc = acc.astype(np.int64)
    while acc.shape[-1] > 1:
        acc = q.sat(acc[..., 0::2] + acc[..., 1::2])
    return acc[..., 0]


def sr_step1_transform(alphas, seqs, r: int, q: QuantSpec = FLOAT):
    """Source-node LLRs for every repetition sequence.

    ``alphas`` has shape ``(..., 2**j)`` and ``seqs`` shape ``(S, 2**(j-r))``
    (a single sequence may be passed as 1-D). Returns ``(..., S, 2**r)``, or
    ``(..., 2**r)`` for a 1-D ``seqs``.
    """
    alphas = np.asarray(alphas)
    seqs = np.asarray(seqs, dtype=np.uint8)
    single = seqs.ndim == 1
    seqs = np.atleast_2d(seqs)
    block = seqs.shape[-1]
    if alphas.shape[-1] != block * 2**r:
        raise ValueError(f"{alphas.shape[-1]} LLRs cannot form 2**{r} blocks of length {block}")
    blocks = alphas.reshape(alphas.shape[:-1] + (1, 2**r, block))
    signed = np.where(seqs[:, None, :] == 1, -blocks, blocks)
    out = tree_sum(signed, q).astype(alphas.dtype)
    return out[..., 0, :] if single else out


def parity_groups(fro_num: int, source_len: int):
    """Index groups of the parallel SPC codes inside a source node.

    Returns ``(groups, mode)`` where ``mode`` is ``"none"`` (Rate-1),
    ``"even"`` or ``"common"`` (all groups share one parity, chosen by metric).
    Groups are contiguous blocks in this bit ordering.
    """
    if source_len < 2 or source_len & (source_len - 1):
        raise ValueError(f"source length must be a power of two >= 2, got {source_len}")
    idx = np.arange(source_len)
    if fro_num == 0:
        return [], "none"
    if fro_num == 1:
        return [idx], "even"
    if fro_num == 2 and source_len >= 4:
        return list(idx.reshape(2, -1)), "even"
    if fro_num == 3 and source_len >= 8:
        return list(idx.reshape(4, -1)), "common"
    raise ValueError(f"unsupported fro_num={fro_num} for source length {source_len}")


def wagner_decode(alphas, parity=0):
    """ML decoding of a single-parity-check code with the given parity.

    Hard decision, then flip the least reliable bit (lowest index on ties) if
    the parity is wrong. Returns ``(beta, metric, flipped)``.
    """
    alphas = np.asarray(alphas)
    mag = np.abs(alphas).astype(np.float64 if alphas.dtype.kind == "f" else np.int64)
    beta = hard_decision(alphas)
    wrong = (beta.sum(axis=-1) % 2) != np.asarray(parity)
    weakest = np.argmin(mag, axis=-1)
    flip_val = np.take_along_axis(mag, weakest[..., None], -1)[..., 0]
    np.put_along_axis(
        beta, weakest[..., None], (np.take_along_axis(beta, weakest[..., None], -1) ^ wrong[..., None]).astype(np.uint8), -1
    )
    metric = mag.sum(axis=-1) - 2 * flip_val * wrong
    return beta, metric, wrong


def decode_source(alphas, fro_num: int):
    """Decode a source node; returns ``(beta, metric, flips)``."""
    alphas = np.asarray(alphas)
    L = alphas.shape[-1]
    groups, mode = parity_groups(fro_num, L)
    if mode == "none":
        mag = np.abs(alphas).astype(np.float64 if alphas.dtype.kind == "f" else np.int64)
        return hard_decision(alphas), mag.sum(axis=-1), np.zeros(alphas.shape[:-1], dtype=int)
    g = len(groups)
    split = alphas.reshape(alphas.shape[:-1] + (g, L // g))
    if mode == "even":
        beta, metric, wrong = wagner_decode(split, 0)
        return beta.reshape(alphas.shape), metric.sum(-1), wrong.sum(-1)
    b0, m0, w0 = wagner_decode(split, 0)
    b1, m1, w1 = wagner_decode(split, 1)
    m0, m1 = m0.sum(-1), m1.sum(-1)
    odd = m1 > m0
    beta = np.where(odd[..., None, None], b1, b0).reshape(alphas.shape)
    return beta, np.where(odd, m1, m0), np.where(odd, w1.sum(-1), w0.sum(-1))


@dataclass
class SrResult:
    beta: np.ndarray
    l: np.ndarray
    metric: np.ndarray
    flips: np.ndarray


def sr_node_decode(alphas, seqs, r: int, fro_num: int, q: QuantSpec = FLOAT) -> SrResult:
    """Three-step decoding of one SR node.

    ``seqs`` is the repetition-sequence table, shape ``(S, 2**(j-r))``, all-zero
    sequence first. ``metric`` is the source-domain correlation of the winner.
    """
    alphas = np.asarray(alphas)
    seqs = np.atleast_2d(np.asarray(seqs, dtype=np.uint8))
    src = sr_step1_transform(alphas, seqs, r, q)  # (..., S, 2**r)
    beta_r, metric, flips = decode_source(src, fro_num)
    best = np.argmax(metric, axis=-1) if seqs.shape[0] > 1 else np.zeros(metric.shape[:-1], dtype=np.intp)
    pick = best[..., None, None]
    beta_r = np.take_along_axis(beta_r, pick, -2)[..., 0, :]
    chosen = seqs[best]  # (..., block)
    beta = (beta_r[..., :, None] ^ chosen[..., None, :]).reshape(alphas.shape)
    return SrResult(
        beta=beta.astype(np.uint8),
        l=best,
        metric=np.take_along_axis(metric, best[..., None], -1)[..., 0],
        flips=np.take_along_axis(flips, best[..., None], -1)[..., 0],
    )


def srfsc_decode(program: DecodingProgram, channel_llrs, q: QuantSpec = FLOAT, trace: bool = False) -> DecodeOutput:
    """Decode one frame (shape ``(N,)``) or a batch (shape ``(B, N)``)."""
    alpha = np.asarray(channel_llrs, dtype=q.dtype)
    N = program.spec.N
    if alpha.shape[-1] != N:
        raise ValueError(f"program is for N={N}, got {alpha.shape[-1]} LLRs")
    leaves = {(ins.sr_stage, ins.start): ins for ins in program.instructions}
    log: list[dict] = []

    def run(ins: Instruction, a):
        if ins.opcode == RATE0:
            beta = np.zeros(a.shape, dtype=np.uint8)
            if trace:
                log.append({"opcode": RATE0, "start": ins.start, "stage": ins.sr_stage})
            return beta
        if ins.opcode == RATE1:
            if trace:
                log.append({"opcode": RATE1, "start": ins.start, "stage": ins.sr_stage})
            return hard_decision(a)
        res = sr_node_decode(a, program.sequences(ins), ins.source_stage, ins.fro_num, q)
        if trace:
            log.append({"opcode": SR, "start": ins.start, "stage": ins.sr_stage, "l": res.l, "flips": res.flips})
        return res.beta

    def visit(level, start, a):
        ins = leaves.get((level, start))
        if ins is not None:
            return run(ins, a)
        if level == 0:
            raise ValueError(f"program does not cover bit {start}")
        left = visit(level - 1, start, split_f(a, q))
        right = visit(level - 1, start + 2 ** (level - 1), split_g(a, left, q))
        return combine(left, right)

    x_hat = visit(program.spec.n, 0, alpha)
    return DecodeOutput(x_hat=x_hat, u_hat=polar_transform(x_hat), cycles=count_cycles(program, program.cost_model), trace=log)


def count_cycles(program: DecodingProgram, cm: CostModel = DEFAULT_COST_MODEL) -> int:
    """Cycles to decode one frame: traversal of the pruned tree plus leaf costs."""
    if not program.instructions:
        return 0
    P = program.P
    leaves = {(ins.sr_stage, ins.start): ins for ins in program.instructions}
    internal = set()
    for level, start in leaves:
        s, st = level, start
        while s < program.spec.n:
            s += 1
            st -= st % 2**s
            if (s, st) in internal:
                break
            internal.add((s, st))
    total = 0
    for s, st in internal:
        fg = cm.fg_cycles(s, P)
        left = leaves.get((s - 1, st))
        f_cost = 0 if (cm.skip_rate0_f and left is not None and left.opcode == RATE0) else fg
        total += f_cost + fg + cm.combine
    for ins in program.instructions:
        if ins.opcode == RATE0:
            total += cm.rate0
        elif ins.opcode == RATE1:
            total += cm.rate1
        else:
            total += cm.sr_cycles(ins.sr_stage, ins.source_stage)
    return total
