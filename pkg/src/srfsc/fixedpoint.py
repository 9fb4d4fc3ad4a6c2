"""LLR number model: saturating fixed point Q(Qi, Qc, Qf) or plain floating point.

Fixed-point values are held as integers in units of ``2**-Qf``. Both ranges are
symmetric (sign-magnitude style), so ``-2**(Q-1)`` never occurs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantSpec:
    """Quantization profile.

    ``mode="float"`` ignores the bit widths and makes every operation exact
    real arithmetic.
    """

    Qi: int = 6
    Qc: int = 4
    Qf: int = 0
    mode: str = "fixed"

    def __post_init__(self):
        if self.mode not in ("fixed", "float"):
            raise ValueError(f"mode must be 'fixed' or 'float', got {self.mode!r}")
        if self.mode == "fixed":
            if not (self.Qi >= self.Qc >= 2):
                raise ValueError(f"need Qi >= Qc >= 2, got Qi={self.Qi}, Qc={self.Qc}")
            if not (0 <= self.Qf < self.Qc):
                raise ValueError(f"need 0 <= Qf < Qc, got Qf={self.Qf}")

    @property
    def is_float(self) -> bool:
        return self.mode == "float"

    @property
    def internal_max(self) -> int:
        return 2 ** (self.Qi - 1) - 1

    @property
    def channel_max(self) -> int:
        return 2 ** (self.Qc - 1) - 1

    @property
    def dtype(self):
        return np.float64 if self.is_float else np.int32

    def sat(self, x):
        """Clip to the internal range (identity in float mode)."""
        if self.is_float:
            return x
        m = self.internal_max
        return np.clip(x, -m, m)

    def __str__(self) -> str:
        return "float" if self.is_float else f"Q({self.Qi},{self.Qc},{self.Qf})"


FLOAT = QuantSpec(mode="float")
Q640 = QuantSpec(6, 4, 0)


def parse_quant(text: str) -> QuantSpec:
    """Parse ``'float'`` or ``'Qi,Qc,Qf'``."""
    text = text.strip()
    if text.lower() == "float":
        return FLOAT
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"quantization must be 'float' or 'Qi,Qc,Qf', got {text!r}")
    try:
        qi, qc, qf = (int(p) for p in parts)
    except ValueError:
        raise ValueError(f"quantization fields must be integers, got {text!r}") from None
    return QuantSpec(qi, qc, qf)


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_channel(llr, q: QuantSpec):
    """Map real channel LLRs to the channel representation of ``q``.

    Scales by ``2**Qf``, rounds half away from zero and saturates to
    ``[-(2**(Qc-1) - 1), 2**(Qc-1) - 1]``. Scalars in, scalar out.
    """
    arr = np.asarray(llr, dtype=np.float64)
    if np.any(np.isnan(arr)):
        raise ValueError("NaN channel LLR")
    if q.is_float:
        out = arr.copy()
    else:
        m = q.channel_max
        out = np.clip(_round_half_away(arr * 2.0**q.Qf), -m, m).astype(np.int32)
    return out.item() if out.ndim == 0 else out


def sat_add(a, b, q: QuantSpec):
    """Sum saturated to the internal range."""
    if q.is_float:
        return a + b
    m = q.internal_max
    s = np.clip(np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64), -m, m)
    return s.astype(np.int32) if s.ndim else int(s)


def to_real(value, q: QuantSpec):
    """Convert a stored LLR back to real units."""
    if q.is_float:
        return value
    return np.asarray(value, dtype=np.float64) / 2.0**q.Qf


def check_channel_range(llrs, q: QuantSpec) -> None:
    if q.is_float:
        if not np.all(np.isfinite(llrs)):
            raise ValueError("channel LLRs must be finite")
        return
    if np.any(np.abs(llrs) > q.channel_max) or not np.all(np.equal(np.mod(llrs, 1), 0)):
        raise ValueError(f"channel LLRs outside the {q} channel range")

