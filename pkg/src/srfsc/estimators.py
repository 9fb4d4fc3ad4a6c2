"""scikit-learn style wrappers.

``fit`` resolves the code (and compiles the instruction stream);
``transform`` / ``predict`` work on 2-D arrays with one frame per row.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cycles import DEFAULT_COST_MODEL, CostModel, throughput_report
from .fixedpoint import QuantSpec, parse_quant, quantize_channel
from .polar_code import CodeSpec, encode, nr_code, polar_transform
from .sc_reference import sc_decode
from .sr_compiler import emit_program
from .srfsc_decoder import srfsc_decode


def _resolve_code(N, K, frozen) -> CodeSpec:
    if frozen is None:
        return nr_code(N, K)
    spec = CodeSpec(N, tuple(frozen))
    if K is not None and spec.K != K:
        raise ValueError(f"frozen set leaves {spec.K} information bits, K={K} requested")
    return spec


def _resolve_quant(quant) -> QuantSpec:
    return quant if isinstance(quant, QuantSpec) else parse_quant(str(quant))


class PolarEncoder(TransformerMixin, BaseEstimator):
    """Map rows of K information bits to rows of N code bits.

    Parameters
    ----------
    N, K : int
        Code length and dimension.
    frozen : sequence of int, optional
        0-based frozen positions; defaults to the 5G NR construction.
    """

    def __init__(self, N=1024, K=512, frozen=None):
        self.N = N
        self.K = K
        self.frozen = frozen

    def fit(self, X=None, y=None):
        self.spec_ = _resolve_code(self.N, self.K, self.frozen)
        self.info_ = np.array(self.spec_.info, dtype=int)
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=np.uint8)
        if X.shape[1] != self.spec_.K:
            raise ValueError(f"expected {self.spec_.K} information bits per row, got {X.shape[1]}")
        if np.any(X > 1):
            raise ValueError("information bits must be 0 or 1")
        u = np.zeros((X.shape[0], self.spec_.N), dtype=np.uint8)
        u[:, self.info_] = X
        return encode(self.spec_, u)

    def inverse_transform(self, X):
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=np.uint8)
        return polar_transform(X)[:, self.info_]


class _DecoderBase(BaseEstimator):
    def _validate_llrs(self, X):
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.spec_.N:
            raise ValueError(f"expected {self.spec_.N} LLRs per row, got {X.shape[1]}")
        return quantize_channel(self.llr_gain * X, self.quant_)

    def predict(self, X):
        """Decoded information bits, shape ``(n_frames, K)``."""
        return self.predict_codeword(X)[1][:, self.info_]

    def score(self, X, y):
        """Fraction of frames decoded without error (1 - FER)."""
        y = check_array(y, dtype=np.uint8)
        return float(np.mean(np.all(self.predict(X) == y, axis=1)))


class SCDecoder(_DecoderBase):
    """Reference successive-cancellation decoder (min-sum)."""

    def __init__(self, N=1024, K=512, frozen=None, quant="float", llr_gain=1.0):
        self.N = N
        self.K = K
        self.frozen = frozen
        self.quant = quant
        self.llr_gain = llr_gain

    def fit(self, X=None, y=None):
        self.spec_ = _resolve_code(self.N, self.K, self.frozen)
        self.quant_ = _resolve_quant(self.quant)
        self.info_ = np.array(self.spec_.info, dtype=int)
        return self

    def predict_codeword(self, X):
        """``(x_hat, u_hat)`` for each row of channel LLRs."""
        u_hat, x_hat = sc_decode(self.spec_, self._validate_llrs(X), self.quant_)
        return x_hat, u_hat


class SRFSCDecoder(_DecoderBase):
    """Fast-SSC decoder driven by a compiled SR-node instruction stream.

    Parameters
    ----------
    N, K, frozen :
        Code definition, as for :class:`PolarEncoder`.
    P : int
        Number of processing elements; bounds SR node size.
    quant : str or QuantSpec
        ``"float"`` or ``"Qi,Qc,Qf"``.
    cost_model : CostModel, optional
        Cycle accounting used for :attr:`cycles_`.
    llr_gain : float
        Scale applied to channel LLRs before quantization.
    """

    def __init__(self, N=1024, K=512, frozen=None, P=64, quant="float", cost_model=None, llr_gain=1.0):
        self.N = N
        self.K = K
        self.frozen = frozen
        self.P = P
        self.quant = quant
        self.cost_model = cost_model
        self.llr_gain = llr_gain

    def fit(self, X=None, y=None):
        self.spec_ = _resolve_code(self.N, self.K, self.frozen)
        self.quant_ = _resolve_quant(self.quant)
        cm = self.cost_model if self.cost_model is not None else DEFAULT_COST_MODEL
        if isinstance(cm, dict):
            cm = CostModel(**cm)
        self.program_ = emit_program(self.spec_, self.P, cm)
        self.info_ = np.array(self.spec_.info, dtype=int)
        self.cycles_ = self.program_.total_cycles
        self.n_instructions_ = len(self.program_.instructions)
        return self

    def predict_codeword(self, X):
        llr = self._validate_llrs(X)
        out = srfsc_decode(self.program_, llr, self.quant_)
        return out.x_hat, out.u_hat

    def throughput(self, f_max_hz: float) -> float:
        check_is_fitted(self, "program_")
        return throughput_report(self.cycles_, self.spec_.N, f_max_hz)
