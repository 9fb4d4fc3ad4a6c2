"""Reference successive-cancellation decoder and exhaustive ML oracles.

All routines accept a leading batch axis: LLR arrays have shape ``(..., L)``.
"""

from __future__ import annotations

import itertools

import numpy as np

from .fixedpoint import FLOAT, QuantSpec
from .polar_code import CodeSpec, generator_matrix, polar_transform

MAX_ORACLE_LENGTH = 64
MAX_ORACLE_CODEBOOK = 2**20


def f_op(a, b):
    """Min-sum check-node update; sign(0) counts as positive."""
    a = np.asarray(a)
    b = np.asarray(b)
    sign = np.where((a < 0) ^ (b < 0), -1, 1)
    return sign * np.minimum(np.abs(a), np.abs(b))


def g_op(a, b, beta, q: QuantSpec = FLOAT):
    """Variable-node update ``(-1)**beta * a + b`` with saturation."""
    a = np.asarray(a)
    return q.sat(np.where(np.asarray(beta) == 1, -a, a) + b)


def hard_decision(llr):
    return (np.asarray(llr) < 0).astype(np.uint8)


def bit_decision(llr, position: int, spec: CodeSpec) -> int:
    if spec.frozen_mask[position]:
        return 0
    return int(llr < 0)


def combine(left, right):
    """Partial-sum update: interleave ``left ^ right`` with ``right``."""
    left = np.asarray(left, dtype=np.uint8)
    right = np.asarray(right, dtype=np.uint8)
    if left.shape != right.shape:
        raise ValueError(f"combine length mismatch: {left.shape} vs {right.shape}")
    out = np.empty(left.shape[:-1] + (2 * left.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = left ^ right
    out[..., 1::2] = right
    return out


def split_f(alpha, q: QuantSpec = FLOAT):
    return f_op(alpha[..., 0::2], alpha[..., 1::2]).astype(alpha.dtype)


def split_g(alpha, beta_left, q: QuantSpec = FLOAT):
    return g_op(alpha[..., 0::2], alpha[..., 1::2], beta_left, q).astype(alpha.dtype)


def sc_decode(spec: CodeSpec, channel_llrs, q: QuantSpec = FLOAT):
    """Plain SC decoding over the full tree.

    Returns ``(u_hat, x_hat)``, each with the shape of ``channel_llrs``.
    """
    alpha = np.asarray(channel_llrs, dtype=q.dtype)
    if alpha.shape[-1] != spec.N:
        raise ValueError(f"expected {spec.N} LLRs, got {alpha.shape[-1]}")
    u_hat = np.zeros(alpha.shape, dtype=np.uint8)
    frozen = spec.frozen_mask

    def visit(a, start):
        L = a.shape[-1]
        if L == 1:
            if frozen[start]:
                bit = np.zeros(a.shape, dtype=np.uint8)
            else:
                bit = hard_decision(a)
            u_hat[..., start] = bit[..., 0]
            return bit
        if frozen[start : start + L].all():
            return np.zeros(a.shape, dtype=np.uint8)
        left = visit(split_f(a, q), start)
        right = visit(split_g(a, left, q), start + L // 2)
        return combine(left, right)

    x_hat = visit(alpha, 0)
    return u_hat, x_hat


def node_codebook(frozen_mask) -> np.ndarray:
    """All codewords of the constituent code with the given leaf frozen pattern.

    Rows are sorted lexicographically.
    """
    frozen_mask = np.asarray(frozen_mask, dtype=bool)
    L = frozen_mask.size
    free = np.flatnonzero(~frozen_mask)
    if 2 ** free.size > MAX_ORACLE_CODEBOOK:
        raise ValueError(f"codebook of size 2**{free.size} is too large to enumerate")
    U = np.zeros((2**free.size, L), dtype=np.uint8)
    if free.size:
        U[:, free] = np.array(list(itertools.product((0, 1), repeat=free.size)), dtype=np.uint8)
    C = polar_transform(U)
    order = np.lexsort(C.T[::-1])
    return C[order]


def ml_node_oracle(codebook, alphas):
    """Exhaustive ML over a codebook; ties go to the lexicographically smallest word.

    Returns ``(codeword, metric)``; batched over the leading axes of ``alphas``.
    """
    C = np.asarray(codebook, dtype=np.uint8)
    if C.ndim != 2 or C.shape[0] == 0:
        raise ValueError("codebook must be a non-empty 2-D array")
    if C.shape[1] > MAX_ORACLE_LENGTH or C.shape[0] > MAX_ORACLE_CODEBOOK:
        raise ValueError(f"codebook {C.shape} exceeds oracle limits")
    C = C[np.lexsort(C.T[::-1])]
    alphas = np.asarray(alphas)
    if alphas.shape[-1] != C.shape[1]:
        raise ValueError("LLR length does not match codeword length")
    metrics = alphas @ (1 - 2 * C.astype(alphas.dtype)).T
    best = np.argmax(metrics, axis=-1)
    return C[best], np.take_along_axis(metrics, best[..., None], -1)[..., 0]


def parity_check_matrix(frozen_mask) -> np.ndarray:
    """Parity checks of a constituent code, one row per frozen leaf.

    ``G`` is an involution, so ``x`` is a codeword iff ``(x G)`` vanishes on the
    frozen positions.
    """
    frozen_mask = np.asarray(frozen_mask, dtype=bool)
    return generator_matrix(frozen_mask.size)[:, frozen_mask].T.copy()


def ml_metric_trellis(frozen_mask, alphas):
    """Maximum of ``sum((-1)**c * alpha)`` over all codewords, via a syndrome trellis.

    Exact for any length as long as the number of frozen leaves stays small
    (the trellis has ``2**#frozen`` states).
    """
    H = parity_check_matrix(frozen_mask)
    m, L = H.shape
    if m > 16:
        raise ValueError(f"{m} parity checks is too many for the trellis oracle")
    alphas = np.asarray(alphas)
    cols = H.T.astype(np.int64) @ (1 << np.arange(m, dtype=np.int64))
    S = 1 << m
    states = np.arange(S)
    best = np.full(alphas.shape[:-1] + (S,), -np.inf)
    best[..., 0] = 0.0
    for k in range(L):
        a = alphas[..., k : k + 1].astype(np.float64)
        keep = best + a
        flip = best[..., states ^ cols[k]] - a
        best = np.maximum(keep, flip)
    return best[..., 0]
