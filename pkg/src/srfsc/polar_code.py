"""Polar code construction and encoding.

Positions are 0-based everywhere in code and in files. The butterfly used by
:func:`encode` realises ``x = u G_N`` with ``G_N = R_N F_2^{(x)n}``, i.e. the
bit-reversed ordering in which a node's codeword is formed by interleaving
``left ^ right`` with ``right``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

RELIABILITY_ASSET = "nr_polar_sequence_1024.txt"
RELIABILITY_ASSET_VERSION = "TS 38.212 Table 5.3.1.2-1 (Nmax=1024)"


def _log2_exact(N: int) -> int:
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    return N.bit_length() - 1


@dataclass(frozen=True)
class CodeSpec:
    """Frozen-set description of a polar code P(N, K).

    Parameters
    ----------
    N : int
        Code length, a power of two.
    frozen : tuple of int
        Sorted 0-based frozen positions.
    """

    N: int
    frozen: tuple[int, ...]
    n: int = field(init=False)
    K: int = field(init=False)
    info: tuple[int, ...] = field(init=False)
    frozen_mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = _log2_exact(self.N)
        frozen = tuple(sorted(int(i) for i in self.frozen))
        if len(set(frozen)) != len(frozen):
            raise ValueError("duplicate frozen positions")
        if frozen and (frozen[0] < 0 or frozen[-1] >= self.N):
            raise ValueError(f"frozen positions must lie in [0, {self.N})")
        mask = np.zeros(self.N, dtype=bool)
        mask[list(frozen)] = True
        mask.setflags(write=False)
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "K", self.N - len(frozen))
        object.__setattr__(self, "info", tuple(int(i) for i in np.flatnonzero(~mask)))
        object.__setattr__(self, "frozen_mask", mask)

    @property
    def rate(self) -> float:
        return self.K / self.N

    def to_json(self) -> dict:
        return {"n": self.N, "k": self.K, "frozen": list(self.frozen)}

    @classmethod
    def from_json(cls, obj: dict) -> "CodeSpec":
        for key in ("n", "k", "frozen"):
            if key not in obj:
                raise ValueError(f"code spec is missing field '{key}'")
        if not isinstance(obj["n"], int) or isinstance(obj["n"], bool):
            raise ValueError("field 'n' must be an integer")
        if not isinstance(obj["frozen"], list) or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in obj["frozen"]
        ):
            raise ValueError("field 'frozen' must be a list of integers")
        spec = cls(obj["n"], tuple(obj["frozen"]))
        if spec.K != obj["k"]:
            raise ValueError(
                f"field 'k' is {obj['k']} but the frozen set leaves {spec.K} information bits"
            )
        return spec


def build_code_spec(N: int, K: int, reliability_order) -> CodeSpec:
    """Freeze the ``N - K`` least reliable positions.

    ``reliability_order`` is a permutation of ``range(N)`` sorted from least
    to most reliable.
    """
    _log2_exact(N)
    order = [int(i) for i in reliability_order]
    if sorted(order) != list(range(N)):
        raise ValueError("reliability_order must be a permutation of range(N)")
    if not 0 <= K <= N:
        raise ValueError(f"K must satisfy 0 <= K <= N, got K={K}")
    return CodeSpec(N, tuple(order[: N - K]))


def load_reliability_sequence(path: str | Path | None = None, N: int | None = None) -> list[int]:
    """Read a reliability sequence file (one 0-based index per line, least reliable first).

    Without ``path`` the bundled 5G NR sequence is used. When ``N`` is given the
    sequence is restricted to indices below ``N``, as done for shorter 5G codes.
    """
    if path is None:
        text = resources.files("srfsc.data").joinpath(RELIABILITY_ASSET).read_text()
    else:
        text = Path(path).read_text()
    seq = [int(line) for line in text.split() if line.strip()]
    if N is not None:
        seq = [i for i in seq if i < N]
        if len(seq) != N:
            raise ValueError(f"reliability sequence does not cover N={N}")
    return seq


def nr_code(N: int, K: int) -> CodeSpec:
    """5G NR polar code P(N, K) from the bundled sequence (no rate matching)."""
    return build_code_spec(N, K, load_reliability_sequence(N=N))


def read_code_spec(path: str | Path) -> CodeSpec:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed code spec JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError("code spec must be a JSON object")
    return CodeSpec.from_json(obj)


def write_code_spec(spec: CodeSpec, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_json(), fh)


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply ``G_N`` along the last axis (works on batches)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    _log2_exact(N)
    # Bottom-up: at width 2L, output = interleave(left ^ right, right).
    L = 1
    while L < N:
        blocks = x.reshape(x.shape[:-1] + (N // (2 * L), 2, L))
        left, right = blocks[..., 0, :], blocks[..., 1, :]
        out = np.empty_like(blocks)
        out[..., 0, :] = left ^ right
        out[..., 1, :] = right
        # (left^right, right) pairs are interleaved element-wise
        x = out.transpose(*range(out.ndim - 2), out.ndim - 1, out.ndim - 2).reshape(x.shape)
        L *= 2
    return x


def encode(spec: CodeSpec, u) -> np.ndarray:
    """Encode a length-N input word (or a batch of them) with zeros at frozen positions."""
    u = np.asarray(u)
    if u.shape[-1] != spec.N:
        raise ValueError(f"input length {u.shape[-1]} does not match N={spec.N}")
    if np.any((u != 0) & (u != 1)):
        raise ValueError("input must be binary")
    if np.any(u[..., spec.frozen_mask]):
        raise ValueError("nonzero value at a frozen position")
    return polar_transform(u)


def bit_reversal_permutation(N: int) -> np.ndarray:
    """0-based bit-reversal permutation of ``range(N)``."""
    n = _log2_exact(N)
    idx = np.arange(N)
    rev = np.zeros(N, dtype=int)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


def generator_matrix(N: int) -> np.ndarray:
    """Explicit ``G_N = R_N F_2^{(x)n}`` over GF(2). Test oracle only."""
    n = _log2_exact(N)
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    return G[bit_reversal_permutation(N)] % 2
