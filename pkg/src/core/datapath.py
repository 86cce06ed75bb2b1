"""Combinational datapath units in two equivalent forms.

Each unit comes as a direct case analysis driven by a binary select code
(the "mux" form) and as a one-hot form where every candidate result is
computed, gated to zero unless its select bit is set, and merged with
XOR. The two forms are interchangeable; `sweep_alu_equivalence` and
`sweep_extend_equivalence` check that over large samples.

All arithmetic here accepts either Python ints or numpy int64 arrays
holding 32-bit words, so the sweeps run vectorised.

Usage:
    from src.core.datapath import AluOp, alu_mux, alu_onehot, onehot_alu

    alu_mux(5, 7, AluOp.ADD)                   # 12
    alu_onehot(5, 7, onehot_alu(AluOp.ADD))    # 12
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Optional

import numpy as np

from src.core.isa import MASK32, DecodedInstr, Kind, to_signed
from src.core.variants import get_variant

logger = logging.getLogger(__name__)

# Either a Python int or an int64 ndarray of 32-bit words
Word = Any


class AluOp(IntEnum):
    """Binary ALU select codes: funct3 with the funct7 alternate bit at bit 3."""

    ADD = 0b0000
    SLL = 0b0001
    SLT = 0b0010
    SLTU = 0b0011
    XOR = 0b0100
    SRL = 0b0101
    OR = 0b0110
    AND = 0b0111
    SUB = 0b1000
    SRA = 0b1101


# Bit position of each operation in the one-hot select vector
ALU_ONEHOT_ORDER: tuple[AluOp, ...] = tuple(AluOp)
ALU_ONEHOT_WIDTH = len(ALU_ONEHOT_ORDER)

_ALU_FOR_KIND: dict[Kind, AluOp] = {
    Kind.ADD: AluOp.ADD,
    Kind.ADDI: AluOp.ADD,
    Kind.SUB: AluOp.SUB,
    Kind.SLL: AluOp.SLL,
    Kind.SLLI: AluOp.SLL,
    Kind.SLT: AluOp.SLT,
    Kind.SLTI: AluOp.SLT,
    Kind.SLTU: AluOp.SLTU,
    Kind.SLTIU: AluOp.SLTU,
    Kind.XOR: AluOp.XOR,
    Kind.XORI: AluOp.XOR,
    Kind.SRL: AluOp.SRL,
    Kind.SRLI: AluOp.SRL,
    Kind.SRA: AluOp.SRA,
    Kind.SRAI: AluOp.SRA,
    Kind.OR: AluOp.OR,
    Kind.ORI: AluOp.OR,
    Kind.AND: AluOp.AND,
    Kind.ANDI: AluOp.AND,
}


def alu_op_for(kind: Kind) -> AluOp:
    """ALU operation an instruction kind drives.

    Everything that is not an R/I arithmetic instruction uses ADD
    (address generation, LUI/AUIPC, link address).
    """
    return _ALU_FOR_KIND.get(kind, AluOp.ADD)


def onehot_alu(op: AluOp) -> int:
    """Binary code to one-hot select vector."""
    return 1 << ALU_ONEHOT_ORDER.index(op)


def alu_from_onehot(sel: int) -> AluOp:
    """One-hot select vector back to the binary code.

    Raises:
        ValueError: If sel does not have exactly one legal bit set
    """
    if sel <= 0 or sel & (sel - 1) or sel >= (1 << ALU_ONEHOT_WIDTH):
        raise ValueError(f"Not a one-hot ALU select: {sel:#x}")
    return ALU_ONEHOT_ORDER[sel.bit_length() - 1]


def _signed(x: Word) -> Word:
    return (x ^ 0x80000000) - 0x80000000


def _gate(value: Word, enable: int) -> Word:
    """AND value with a select bit broadcast across 32 lanes."""
    return value & (MASK32 if enable else 0)


def alu_mux(a: Word, b: Word, sel: AluOp) -> Word:
    """ALU with a single wide multiplexer over a binary select code.

    Args:
        a: First operand (32-bit word)
        b: Second operand (32-bit word); shifts use its low 5 bits
        sel: Binary operation code

    Returns:
        32-bit result

    Example:
        alu_mux(0xFFFFFFFF, 1, AluOp.SLT)   # 1
        alu_mux(0xFFFFFFFF, 1, AluOp.SLTU)  # 0
    """
    if sel == AluOp.ADD:
        return (a + b) & MASK32
    if sel == AluOp.SUB:
        return (a - b) & MASK32
    if sel == AluOp.SLL:
        return (a << (b & 0x1F)) & MASK32
    if sel == AluOp.SLT:
        return (_signed(a) < _signed(b)) * 1
    if sel == AluOp.SLTU:
        return (a < b) * 1
    if sel == AluOp.XOR:
        return a ^ b
    if sel == AluOp.SRL:
        return a >> (b & 0x1F)
    if sel == AluOp.SRA:
        return (_signed(a) >> (b & 0x1F)) & MASK32
    if sel == AluOp.OR:
        return a | b
    if sel == AluOp.AND:
        return a & b
    raise ValueError(f"Illegal ALU select code {sel}")


def alu_onehot(a: Word, b: Word, sel: int) -> Word:
    """ALU that computes every candidate and XOR-merges the gated results.

    Args:
        a: First operand (32-bit word)
        b: Second operand (32-bit word)
        sel: One-hot select vector in ALU_ONEHOT_ORDER bit order

    Returns:
        32-bit result, equal to alu_mux for the matching binary code
    """
    assert sel > 0 and not sel & (sel - 1), f"ALU select {sel:#x} is not one-hot"
    shamt = b & 0x1F
    sa, sb = _signed(a), _signed(b)
    candidates = (
        (a + b) & MASK32,
        (a << shamt) & MASK32,
        (sa < sb) * 1,
        (a < b) * 1,
        a ^ b,
        a >> shamt,
        a | b,
        a & b,
        (a - b) & MASK32,
        (sa >> shamt) & MASK32,
    )
    result: Word = 0
    for bit, value in enumerate(candidates):
        result = result ^ _gate(value, sel & (1 << bit))
    return result


class LoadOp(IntEnum):
    """Load kinds, numbered by their funct3 field."""

    LB = 0
    LH = 1
    LW = 2
    LBU = 4
    LHU = 5


_LOAD_FOR_KIND = {
    Kind.LB: LoadOp.LB,
    Kind.LH: LoadOp.LH,
    Kind.LW: LoadOp.LW,
    Kind.LBU: LoadOp.LBU,
    Kind.LHU: LoadOp.LHU,
}

_LEGAL_OFFSETS = {
    LoadOp.LB: (0, 1, 2, 3),
    LoadOp.LBU: (0, 1, 2, 3),
    LoadOp.LH: (0, 2),
    LoadOp.LHU: (0, 2),
    LoadOp.LW: (0,),
}


@dataclass(frozen=True)
class LoadExtendSelect:
    """Binary align/extend control: load kind plus address offset.

    Attributes:
        op: Load kind
        offset: Low two bits of the effective address
    """

    op: LoadOp
    offset: int

    def __post_init__(self) -> None:
        if self.offset not in _LEGAL_OFFSETS[self.op]:
            raise ValueError(f"Offset {self.offset} is not legal for {self.op.name}")


# Bit position of each (op, offset) pair in the one-hot select vector
EXTEND_ONEHOT_ORDER: tuple[LoadExtendSelect, ...] = tuple(
    LoadExtendSelect(op, off) for op in LoadOp for off in _LEGAL_OFFSETS[op]
)


def load_op_for(kind: Kind) -> LoadOp:
    """Load kind to LoadOp.

    Raises:
        KeyError: If kind is not a load
    """
    return _LOAD_FOR_KIND[kind]


def onehot_extend(sel: LoadExtendSelect) -> int:
    """Binary align/extend select to one-hot vector."""
    return 1 << EXTEND_ONEHOT_ORDER.index(sel)


def _sext8(x: Word) -> Word:
    return (((x & 0xFF) ^ 0x80) - 0x80) & MASK32


def _sext16(x: Word) -> Word:
    return (((x & 0xFFFF) ^ 0x8000) - 0x8000) & MASK32


def load_extend_mux(word: Word, sel: LoadExtendSelect) -> Word:
    """Align the addressed lane by shifting, then sign- or zero-extend.

    Example:
        load_extend_mux(0x80FFEE11, LoadExtendSelect(LoadOp.LB, 3))   # 0xFFFFFF80
        load_extend_mux(0x80FFEE11, LoadExtendSelect(LoadOp.LHU, 2))  # 0x000080FF
    """
    shifted = word >> (8 * sel.offset)
    if sel.op == LoadOp.LB:
        return _sext8(shifted)
    if sel.op == LoadOp.LBU:
        return shifted & 0xFF
    if sel.op == LoadOp.LH:
        return _sext16(shifted)
    if sel.op == LoadOp.LHU:
        return shifted & 0xFFFF
    return word & MASK32


def load_extend_onehot(word: Word, sel: int) -> Word:
    """Align/extend with fixed per-lane candidates merged by XOR.

    Args:
        word: Aligned data word read from memory
        sel: One-hot select vector in EXTEND_ONEHOT_ORDER bit order

    Returns:
        Extended value, equal to load_extend_mux for the matching selector
    """
    assert sel > 0 and not sel & (sel - 1), f"Extend select {sel:#x} is not one-hot"
    b0, b1, b2, b3 = word & 0xFF, (word >> 8) & 0xFF, (word >> 16) & 0xFF, word >> 24
    h0, h2 = word & 0xFFFF, word >> 16
    candidates = {
        LoadOp.LB: (_sext8(b0), _sext8(b1), _sext8(b2), _sext8(b3)),
        LoadOp.LH: (_sext16(h0), _sext16(h2)),
        LoadOp.LW: (word & MASK32,),
        LoadOp.LBU: (b0, b1, b2, b3),
        LoadOp.LHU: (h0, h2),
    }
    result: Word = 0
    bit = 0
    for op in LoadOp:
        for value in candidates[op]:
            result = result ^ _gate(value, sel & (1 << bit))
            bit += 1
    return result


@dataclass(frozen=True)
class BranchOutcome:
    """Resolved control transfer.

    Attributes:
        taken: Transfer redirects away from pc + 4
        target: Correct next pc (pc + 4 when not taken)
    """

    taken: bool
    target: int


def resolve_branch(instr: DecodedInstr, rs1_val: int, rs2_val: int, pc: int) -> BranchOutcome:
    """Compute the direction and correct next pc of a control transfer.

    Args:
        instr: Conditional branch, JAL or JALR
        rs1_val: Forwarded rs1 value
        rs2_val: Forwarded rs2 value
        pc: Address of the instruction

    Returns:
        BranchOutcome with target = pc + 4 for a not-taken branch

    Raises:
        ValueError: If instr is not a control transfer
    """
    kind = instr.kind
    if kind is Kind.JAL:
        return BranchOutcome(True, (pc + instr.imm) & MASK32)
    if kind is Kind.JALR:
        return BranchOutcome(True, (rs1_val + instr.imm) & MASK32 & ~1)

    if kind is Kind.BEQ:
        taken = rs1_val == rs2_val
    elif kind is Kind.BNE:
        taken = rs1_val != rs2_val
    elif kind is Kind.BLT:
        taken = to_signed(rs1_val) < to_signed(rs2_val)
    elif kind is Kind.BGE:
        taken = to_signed(rs1_val) >= to_signed(rs2_val)
    elif kind is Kind.BLTU:
        taken = rs1_val < rs2_val
    elif kind is Kind.BGEU:
        taken = rs1_val >= rs2_val
    else:
        raise ValueError(f"{kind.value} is not a control transfer")

    target = (pc + instr.imm) & MASK32 if taken else (pc + 4) & MASK32
    return BranchOutcome(taken, target)


class Datapath:
    """The ALU and load align/extend unit of one machine, in a configured form.

    Select codes are produced once in decode (alu_select) or Ma
    (extend_select) and consumed by the unit, so a one-hot machine
    carries one-hot codes through its latches.

    Example:
        dp = Datapath("onehot", "mux")
        dp.alu(5, 7, dp.alu_select(AluOp.SUB))  # 0xFFFFFFFE
    """

    def __init__(self, alu_impl: str = "mux", extend_impl: str = "mux") -> None:
        self._alu = get_variant(f"alu.{alu_impl}")
        self._extend = get_variant(f"extend.{extend_impl}")

    @property
    def forms(self) -> tuple[str, str]:
        return self._alu.form, self._extend.form

    def alu_select(self, op: AluOp) -> Any:
        return self._alu.encode(op)

    def alu(self, a: int, b: int, sel: Any) -> int:
        return int(self._alu.impl(a, b, sel))

    def extend_select(self, op: LoadOp, offset: int) -> Any:
        return self._extend.encode(LoadExtendSelect(op, offset))

    def extend(self, word: int, sel: Any) -> int:
        return int(self._extend.impl(word, sel))


# Byte values every lane of the stratified sample draws from
_BYTE_STRATA = (
    0x00, 0x01, 0x02, 0x0F, 0x10, 0x3C, 0x55, 0x7E,
    0x7F, 0x80, 0x81, 0xAA, 0xC3, 0xF0, 0xFE, 0xFF,
)  # fmt: skip


def stratified_words() -> np.ndarray:
    """2**16 words covering every combination of 16 byte strata per lane."""
    strata = np.array(_BYTE_STRATA, dtype=np.int64)
    b0, b1, b2, b3 = np.meshgrid(strata, strata, strata, strata, indexing="ij")
    return (b0 | (b1 << 8) | (b2 << 16) | (b3 << 24)).ravel()


@dataclass
class SweepResult:
    """Outcome of an equivalence sweep.

    Attributes:
        unit: "alu" or "extend"
        checked: Number of (operands, select) combinations compared
        mismatches: Up to a handful of failing cases as (select name, inputs, mux, onehot)
    """

    unit: str
    checked: int = 0
    mismatches: list[tuple[str, tuple[int, ...], int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _record_mismatches(
    result: SweepResult, name: str, inputs: tuple[np.ndarray, ...], want: Word, got: Word
) -> None:
    bad = np.nonzero(np.asarray(want) != np.asarray(got))[0]
    for i in bad[: 5 - len(result.mismatches)]:
        result.mismatches.append(
            (name, tuple(int(x[i]) for x in inputs), int(want[i]), int(got[i]))
        )


def sweep_alu_equivalence(samples: int = 1_000_000, seed: Optional[int] = 0) -> SweepResult:
    """Compare alu_onehot with alu_mux on random operand pairs for every op.

    Operand pairs mix uniform words with boundary values so shifts,
    signed compares and overflow are all exercised.
    """
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 1 << 32, size=samples, dtype=np.int64)
    b = rng.integers(0, 1 << 32, size=samples, dtype=np.int64)
    edges = np.array([0, 1, 0x7FFFFFFF, 0x80000000, 0xFFFFFFFF, 31, 32], dtype=np.int64)
    n = min(samples, edges.size**2)
    ea, eb = np.meshgrid(edges, edges)
    a[:n] = ea.ravel()[:n]
    b[:n] = eb.ravel()[:n]

    result = SweepResult("alu")
    for op in AluOp:
        want = alu_mux(a, b, op)
        got = alu_onehot(a, b, onehot_alu(op))
        result.checked += samples
        _record_mismatches(result, op.name, (a, b), want, got)

    logger.debug(f"ALU sweep: {result.checked} checks, {len(result.mismatches)} mismatches")
    return result


def sweep_extend_equivalence(words: Optional[np.ndarray] = None) -> SweepResult:
    """Compare load_extend_onehot with load_extend_mux for every legal selector."""
    if words is None:
        words = stratified_words()
    result = SweepResult("extend")
    for sel in EXTEND_ONEHOT_ORDER:
        want = load_extend_mux(words, sel)
        got = load_extend_onehot(words, onehot_extend(sel))
        result.checked += int(words.size)
        _record_mismatches(result, f"{sel.op.name}+{sel.offset}", (words,), want, got)

    logger.debug(f"Extend sweep: {result.checked} checks, {len(result.mismatches)} mismatches")
    return result


__all__ = [
    "AluOp",
    "ALU_ONEHOT_ORDER",
    "ALU_ONEHOT_WIDTH",
    "alu_op_for",
    "onehot_alu",
    "alu_from_onehot",
    "alu_mux",
    "alu_onehot",
    "LoadOp",
    "LoadExtendSelect",
    "EXTEND_ONEHOT_ORDER",
    "load_op_for",
    "onehot_extend",
    "load_extend_mux",
    "load_extend_onehot",
    "BranchOutcome",
    "resolve_branch",
    "Datapath",
    "stratified_words",
    "SweepResult",
    "sweep_alu_equivalence",
    "sweep_extend_equivalence",
]
