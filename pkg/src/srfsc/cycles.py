"""Clock-cycle accounting for the instruction-driven decoder."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class CostModel:
    """Per-operation cycle costs.

    An f or g pass over a stage-``s`` node produces ``2**(s-1)`` LLRs and takes
    ``ceil(2**(s-1) / P)`` cycles on ``P`` processing elements, scaled by
    ``fg_scale`` and padded by ``fg_extra``.
    """

    fg_scale: int = 1
    fg_extra: int = 0
    combine: int = 0
    rate0: int = 1
    rate1: int = 1
    sr_step1: int = 1
    sr_step2: int = 2
    # SR nodes whose source is the node itself need no LLR transform
    skip_trivial_step1: bool = False
    # Rate-0 left children: the f pass feeding them can be elided
    skip_rate0_f: bool = False

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, bool) and v < 0:
                raise ValueError(f"cost '{f.name}' must be non-negative")

    def fg_cycles(self, stage: int, P: int) -> int:
        half = 2 ** (stage - 1)
        return self.fg_scale * (-(-half // P)) + self.fg_extra

    def sr_cycles(self, sr_stage: int, source_stage: int) -> int:
        step1 = self.sr_step1
        if self.skip_trivial_step1 and sr_stage == source_stage:
            step1 = 0
        return step1 + self.sr_step2

    @classmethod
    def from_file(cls, path: str | Path) -> "CostModel":
        with open(path) as fh:
            obj = json.load(fh)
        unknown = set(obj) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown cost model fields: {sorted(unknown)}")
        return cls(**obj)

    def to_json(self) -> dict:
        return asdict(self)


DEFAULT_COST_MODEL = CostModel()


def throughput_report(cycles: int, N: int, f_max: float) -> float:
    """Coded throughput in bit/s: ``N * f_max / cycles``."""
    if cycles <= 0:
        raise ValueError("cycle count must be positive")
    return N * f_max / cycles


def calibrated_cost_model() -> CostModel:
    """Bundled calibration: no Step 1 cycle when the SR node is its own source."""
    from importlib import resources

    return CostModel(**json.loads(resources.files("srfsc.data").joinpath("cost_model_calibrated.json").read_text()))
