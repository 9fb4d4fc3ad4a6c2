"""Polar-code decoding with sequence-repetition (SR) nodes."""

__version__ = "0.1.0"

from .cycles import CostModel, throughput_report
from .estimators import PolarEncoder, SCDecoder, SRFSCDecoder
from .fixedpoint import FLOAT, Q640, QuantSpec, parse_quant, quantize_channel, sat_add
from .polar_code import CodeSpec, build_code_spec, encode, nr_code
from .sc_reference import sc_decode
from .sr_compiler import DecodingProgram, emit_program
from .srfsc_decoder import count_cycles, srfsc_decode

__all__ = [
    "CodeSpec",
    "CostModel",
    "DecodingProgram",
    "FLOAT",
    "PolarEncoder",
    "Q640",
    "QuantSpec",
    "SCDecoder",
    "SRFSCDecoder",
    "build_code_spec",
    "count_cycles",
    "emit_program",
    "encode",
    "nr_code",
    "parse_quant",
    "quantize_channel",
    "sat_add",
    "sc_decode",
    "srfsc_decode",
    "throughput_report",
]
