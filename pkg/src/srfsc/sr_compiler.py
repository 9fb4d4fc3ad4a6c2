"""Offline compilation of a frozen set into an SR-node instruction stream.

The pruned decoding tree is cut into RATE0, RATE1 and SR leaves in
depth-first order. Each SR leaf carries the five packed fields
(``sr_stage``, ``source_stage``, ``fro_num``, ``seq_num``, ``node_type``) plus
contextual data (opcode, first bit position, leaf cycle cost).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cycles import DEFAULT_COST_MODEL, CostModel
from .polar_code import CodeSpec

RATE0, RATE1, SR = "RATE0", "RATE1", "SR"

# field widths, MSB to LSB
FIELD_BITS = (("sr_stage", 3), ("source_stage", 3), ("fro_num", 2), ("seq_num", 2), ("node_type", 3))
WORD_BITS = sum(b for _, b in FIELD_BITS)

MAX_FRO_NUM = 3


def _log2(P: int) -> int:
    if P < 1 or P & (P - 1):
        raise ValueError(f"P must be a power of two, got {P}")
    return P.bit_length() - 1


# --------------------------------------------------------------------------- #
# node classification


def leading_frozen(mask) -> int | None:
    """``b`` if the pattern is ``b`` frozen leaves followed only by information leaves."""
    mask = np.asarray(mask, dtype=bool)
    b = int(np.argmin(mask)) if not mask.all() else mask.size
    if mask[b:].any():
        return None
    return b


def node_label(mask) -> str:
    """Label a constituent code by its leaf frozen pattern."""
    mask = np.asarray(mask, dtype=bool)
    L = mask.size
    if mask.all():
        return "Rate-0"
    if not mask.any():
        return "Rate-1"
    if L > 1 and mask[:-1].all() and not mask[-1]:
        return "REP"
    b = leading_frozen(mask)
    if b == 1:
        return "SPC"
    if b is not None:
        # leftmost level-h node Rate-0 (b = 2**h) or REP (b = 2**h - 1), h < level
        for h in range(1, L.bit_length() - 1):
            if b == 2**h or b == 2**h - 1:
                return f"EG-PC({h})"
    return "generic"


def classify_tree(spec: CodeSpec) -> dict[tuple[int, int], str]:
    """Label every node ``(level, index)`` of the full tree; ``index`` is 1-based."""
    labels = {}
    for j in range(spec.n + 1):
        L = 2**j
        for i in range(spec.N // L):
            labels[(j, i + 1)] = node_label(spec.frozen_mask[i * L : (i + 1) * L])
    return labels


def is_rep_or_rate0(mask) -> bool:
    return node_label(mask) in ("Rate-0", "REP") or (mask.size == 1)


def source_fro_num(mask) -> int | None:
    """Frozen-bit count of a supported source node, or ``None``.

    Supported sources have length >= 2 and are Rate-1 (0), SPC (1), or EG-PC
    with a leftmost length-2 Rate-0 (2) or length-4 REP (3) at level ``h <= r - 1``.
    """
    mask = np.asarray(mask, dtype=bool)
    L = mask.size
    if L < 2:
        return None
    b = leading_frozen(mask)
    if b is None or b > MAX_FRO_NUM:
        return None
    if b == 2 and L < 4:
        return None
    if b == 3 and L < 8:
        return None
    return b


# --------------------------------------------------------------------------- #
# repetition sequences


def kron_sum(a, b) -> np.ndarray:
    """Kronecker structure with GF(2) addition; ``b`` varies fastest."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    return (a[:, None] ^ b[None, :]).reshape(-1)


def repetition_sequences(v) -> np.ndarray:
    """All repetition sequences for ``v = (v[j], ..., v[r+1])``.

    Returns an array of shape ``(2**sum(v), 2**len(v))``; row 0 is all zeros.
    """
    v = [int(x) for x in v]
    if any(x not in (0, 1) for x in v):
        raise ValueError("v must be binary")
    d = len(v)
    # eta_k for k = r .. j-1 is free iff v[k+1] = 1; v[k+1] sits at v[d-1-(k-r)]
    free = [v[d - 1 - t] for t in range(d)]
    seqs = []
    for choice in itertools.product((0, 1), repeat=sum(free)):
        it = iter(choice)
        etas = [next(it) if f else 0 for f in free]
        s = np.zeros(1, dtype=np.uint8)
        for eta in etas:
            s = kron_sum(s, (eta, 0))
        seqs.append(s)
    return np.array(seqs, dtype=np.uint8)


@dataclass(frozen=True)
class RepSeqTable:
    node_type: int
    sequences: np.ndarray

    def __post_init__(self):
        self.sequences.setflags(write=False)

    def __eq__(self, other):
        return (
            isinstance(other, RepSeqTable)
            and self.node_type == other.node_type
            and np.array_equal(self.sequences, other.sequences)
        )

    __hash__ = None


# --------------------------------------------------------------------------- #
# SR node identification


@dataclass(frozen=True)
class SrNodeDescriptor:
    """One SR node: level ``j`` at 1-based ``index``, source at level ``r``."""

    j: int
    index: int
    r: int
    v: tuple[int, ...]
    fro_num: int

    @property
    def start(self) -> int:
        return (self.index - 1) * 2**self.j

    @property
    def source_index(self) -> int:
        return self.index * 2 ** (self.j - self.r)

    @property
    def w_v(self) -> int:
        return sum(self.v)

    @property
    def seq_num(self) -> int:
        return self.w_v

    @property
    def h(self) -> int | None:
        return {2: 1, 3: 2}.get(self.fro_num)

    @property
    def source_mask(self) -> np.ndarray:
        m = np.zeros(2**self.r, dtype=bool)
        m[: self.fro_num] = True
        return m


def match_sr(mask) -> tuple[int, tuple[int, ...], int] | None:
    """Decompose a node's frozen pattern as an SR node.

    Walks down the right spine and stops at the first supported source, so the
    source is as large as possible and ``v`` as short as possible. Returns
    ``(r, v, fro_num)`` or ``None``.
    """
    mask = np.asarray(mask, dtype=bool)
    j = mask.size.bit_length() - 1
    v = []
    node = mask
    for k in range(j, 0, -1):
        b = source_fro_num(node)
        if b is not None:
            return k, tuple(v), b
        half = node.size // 2
        left, node = node[:half], node[half:]
        if not is_rep_or_rate0(left):
            return None
        v.append(0 if left.all() else 1)
    return None


def identify_sr_nodes(spec: CodeSpec, P: int) -> list[SrNodeDescriptor]:
    return [leaf.descriptor for leaf in _cut_tree(spec, P) if leaf.descriptor is not None]


@dataclass(frozen=True)
class _Leaf:
    opcode: str
    level: int
    start: int
    descriptor: SrNodeDescriptor | None = None


def _cut_tree(spec: CodeSpec, P: int) -> list[_Leaf]:
    max_stage = 1 + _log2(P)
    mask = spec.frozen_mask
    leaves: list[_Leaf] = []

    def visit(level, start):
        L = 2**level
        m = mask[start : start + L]
        if level <= max_stage:
            if m.all():
                leaves.append(_Leaf(RATE0, level, start))
                return
            if not m.any():
                leaves.append(_Leaf(RATE1, level, start))
                return
            hit = match_sr(m)
            if hit is not None:
                r, v, b = hit
                if level + sum(v) <= max_stage:
                    d = SrNodeDescriptor(level, start // L + 1, r, v, b)
                    leaves.append(_Leaf(SR, level, start, d))
                    return
        if level == 0:
            # unreachable: a single leaf is always Rate-0 or Rate-1
            raise AssertionError(f"cannot cut leaf at {start}")
        visit(level - 1, start)
        visit(level - 1, start + L // 2)

    visit(spec.n, 0)
    return leaves


# --------------------------------------------------------------------------- #
# instructions and programs


@dataclass(frozen=True)
class Instruction:
    opcode: str
    sr_stage: int
    source_stage: int
    fro_num: int = 0
    seq_num: int = 0
    node_type: int = 0
    start: int = 0
    cycle_cost: int = 0

    @property
    def length(self) -> int:
        return 2**self.sr_stage

    def fields(self) -> tuple[int, int, int, int, int]:
        return (self.sr_stage, self.source_stage, self.fro_num, self.seq_num, self.node_type)


@dataclass(frozen=True)
class DecodingProgram:
    spec: CodeSpec
    P: int
    instructions: tuple[Instruction, ...]
    rep_seq_tables: dict[int, RepSeqTable] = field(hash=False)
    cost_model: CostModel = DEFAULT_COST_MODEL

    @property
    def total_cycles(self) -> int:
        from .srfsc_decoder import count_cycles

        return count_cycles(self, self.cost_model)

    def sequences(self, instr: Instruction) -> np.ndarray:
        """Repetition sequences of an SR instruction, shape ``(2**seq_num, 2**(j-r))``."""
        if instr.node_type == 0:
            return np.zeros((1, 2 ** (instr.sr_stage - instr.source_stage)), dtype=np.uint8)
        return self.rep_seq_tables[instr.node_type].sequences

    def distinct_sr_shapes(self) -> set[tuple]:
        return {i.fields()[:4] + (self.sequences(i).tobytes(),) for i in self.instructions if i.opcode == SR}

    def to_json(self) -> dict:
        return {
            "p": self.P,
            "n": self.spec.N,
            "k": self.spec.K,
            "instructions": [asdict(i) for i in self.instructions],
            "rep_seqs": {
                str(t): tab.sequences.astype(int).tolist() for t, tab in sorted(self.rep_seq_tables.items())
            },
            "total_cycles": self.total_cycles,
            "cost_model": self.cost_model.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict, spec: CodeSpec) -> "DecodingProgram":
        if obj.get("n", spec.N) != spec.N:
            raise ValueError(f"program is for N={obj['n']}, code has N={spec.N}")
        instructions = tuple(Instruction(**i) for i in obj["instructions"])
        tables = {
            int(t): RepSeqTable(int(t), np.array(s, dtype=np.uint8)) for t, s in obj.get("rep_seqs", {}).items()
        }
        cm = CostModel(**obj["cost_model"]) if "cost_model" in obj else DEFAULT_COST_MODEL
        prog = cls(spec, int(obj["p"]), instructions, tables, cm)
        validate_program(prog)
        return prog


def emit_program(spec: CodeSpec, P: int = 64, cost_model: CostModel = DEFAULT_COST_MODEL) -> DecodingProgram:
    """Compile ``spec`` for ``P`` processing elements."""
    instructions = []
    tables: dict[int, RepSeqTable] = {}
    type_of: dict[bytes, int] = {}
    for leaf in _cut_tree(spec, P):
        if leaf.opcode == RATE0:
            instructions.append(Instruction(RATE0, leaf.level, leaf.level, start=leaf.start, cycle_cost=cost_model.rate0))
            continue
        if leaf.opcode == RATE1:
            instructions.append(Instruction(RATE1, leaf.level, leaf.level, start=leaf.start, cycle_cost=cost_model.rate1))
            continue
        d = leaf.descriptor
        node_type = 0
        if d.seq_num > 0:
            seqs = repetition_sequences(d.v)
            key = seqs.tobytes() + bytes(seqs.shape)
            if key not in type_of:
                type_of[key] = len(type_of) + 1
                tables[type_of[key]] = RepSeqTable(type_of[key], seqs)
            node_type = type_of[key]
        instructions.append(
            Instruction(
                SR,
                d.j,
                d.r,
                d.fro_num,
                d.seq_num,
                node_type,
                start=d.start,
                cycle_cost=cost_model.sr_cycles(d.j, d.r),
            )
        )
    prog = DecodingProgram(spec, P, tuple(instructions), tables, cost_model)
    validate_program(prog)
    return prog


def validate_program(prog: DecodingProgram) -> None:
    """Check span coverage, field ranges and the parallelism constraint."""
    max_stage = 1 + _log2(prog.P)
    pos = 0
    for k, ins in enumerate(prog.instructions):
        if ins.opcode not in (RATE0, RATE1, SR):
            raise ValueError(f"instruction {k}: unknown opcode {ins.opcode!r}")
        if ins.start != pos:
            raise ValueError(f"instruction {k} starts at {ins.start}, expected {pos}")
        pos += ins.length
        if not 0 <= ins.source_stage <= ins.sr_stage <= max_stage:
            raise ValueError(f"instruction {k}: stages out of range")
        if ins.sr_stage + ins.seq_num > max_stage:
            raise ValueError(f"instruction {k} violates 2**(sr_stage+seq_num) <= 2P")
        if (ins.node_type == 0) != (ins.seq_num == 0):
            raise ValueError(f"instruction {k}: node_type must be 0 exactly when seq_num is 0")
        if ins.opcode == SR:
            if ins.source_stage < 1 or not 0 <= ins.fro_num <= MAX_FRO_NUM:
                raise ValueError(f"instruction {k}: bad source node")
            if ins.node_type:
                tab = prog.rep_seq_tables.get(ins.node_type)
                if tab is None or tab.sequences.shape != (2**ins.seq_num, 2 ** (ins.sr_stage - ins.source_stage)):
                    raise ValueError(f"instruction {k}: missing or inconsistent repetition table")
    if pos != prog.spec.N:
        raise ValueError(f"instructions cover {pos} bits, code has {prog.spec.N}")


def write_program(prog: DecodingProgram, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(prog.to_json(), fh, indent=1)


def read_program(path: str | Path, spec: CodeSpec | None = None) -> DecodingProgram:
    """Load ``program.json``.

    The program file does not carry the frozen set, so ``spec`` is rebuilt from
    the instruction stream when not given.
    """
    with open(path) as fh:
        obj = json.load(fh)
    if spec is None:
        spec = spec_from_instructions(obj)
    return DecodingProgram.from_json(obj, spec)


def spec_from_instructions(obj: dict) -> CodeSpec:
    """Recover a frozen set consistent with a serialized program."""
    N = int(obj["n"])
    frozen = []
    for i in obj["instructions"]:
        L = 2 ** i["sr_stage"]
        if i["opcode"] == RATE0:
            frozen.extend(range(i["start"], i["start"] + L))
        elif i["opcode"] == SR:
            frozen.extend(_sr_frozen_positions(i, obj.get("rep_seqs", {})))
    return CodeSpec(N, tuple(frozen))


def _sr_frozen_positions(ins: dict, rep_seqs: dict) -> list[int]:
    j, r = ins["sr_stage"], ins["source_stage"]
    seqs = rep_seqs.get(str(ins["node_type"])) if ins["node_type"] else None
    v = _v_from_sequences(np.array(seqs, dtype=np.uint8), j - r) if seqs else (0,) * (j - r)
    out = []
    start = ins["start"]
    for k, vk in enumerate(v):
        half = 2 ** (j - k - 1)
        if vk:
            out.extend(range(start, start + half - 1))
        else:
            out.extend(range(start, start + half))
        start += half
    out.extend(range(start, start + ins["fro_num"]))
    return out


def _v_from_sequences(seqs: np.ndarray, d: int) -> tuple[int, ...]:
    for v in itertools.product((0, 1), repeat=d):
        cand = repetition_sequences(v)
        if cand.shape == seqs.shape and np.array_equal(cand, seqs):
            return v
    raise ValueError("repetition table does not match any v")


# --------------------------------------------------------------------------- #
# packed words and selector metadata


def pack_instruction(instr: Instruction) -> int:
    word = 0
    for name, bits in FIELD_BITS:
        val = getattr(instr, name)
        if not 0 <= val < 2**bits:
            raise ValueError(f"field {name}={val} does not fit in {bits} bits")
        word = (word << bits) | val
    return word


def unpack_instruction(word: int) -> Instruction:
    if not 0 <= word < 2**WORD_BITS:
        raise ValueError(f"word {word} is not a {WORD_BITS}-bit value")
    vals = {}
    for name, bits in reversed(FIELD_BITS):
        vals[name] = word & (2**bits - 1)
        word >>= bits
    return Instruction(SR, **vals)


def program_words(prog: DecodingProgram) -> list[int]:
    return [pack_instruction(i) for i in prog.instructions]


def write_program_bin(prog: DecodingProgram, path: str | Path) -> None:
    np.array(program_words(prog), dtype="<u2").tofile(path)


def read_program_bin(path: str | Path, spec: CodeSpec) -> list[Instruction]:
    """Unpack ``program.bin``; opcode and start are restored from visit order and ``spec``."""
    words = np.fromfile(path, dtype="<u2")
    if np.any(words >> WORD_BITS):
        raise ValueError("high bits set in instruction word")
    out = []
    pos = 0
    for w in words:
        ins = unpack_instruction(int(w))
        L = 2**ins.sr_stage
        m = spec.frozen_mask[pos : pos + L]
        if m.all():
            opcode = RATE0
        elif not m.any() and ins.sr_stage == ins.source_stage:
            opcode = RATE1
        else:
            opcode = SR
        out.append(Instruction(opcode, *ins.fields(), start=pos))
        pos += L
    return out


@dataclass(frozen=True)
class SelectorSet:
    cmd1: int
    cmd2: int
    cmd3: int
    cmd4: int


def derive_selectors(instr: Instruction, P: int = 64) -> SelectorSet:
    """Adder/CS-tree output-layer selectors for an SR instruction.

    ``cmd2`` and ``cmd3`` are sized for the six-node P=64 architecture
    (4-layer Step 3 adder tree, 2-layer CS tree) and are only consumed when
    ``seq_num > 0``.
    """
    layers = 1 + _log2(P)
    cmd1 = layers - (instr.sr_stage - instr.source_stage)
    cmd4 = layers if instr.fro_num == 0 else layers - 1 - instr.source_stage + instr.fro_num
    return SelectorSet(cmd1=cmd1, cmd2=4 - instr.source_stage, cmd3=2 - instr.seq_num, cmd4=cmd4)
