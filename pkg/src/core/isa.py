"""RV32I instruction decoding.

Provides the instruction vocabulary shared by the functional and the
pipelined simulator: instruction kinds, formats, per-kind attributes,
the full decoder and the partial If-stage decoder (decode_if).

Usage:
    from src.core.isa import decode, decode_if

    instr = decode(0x00B50463)
    instr.kind        # Kind.BEQ
    instr.imm         # 8
    decode_if(0x00B50463).reads_rs2  # True
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum
from typing import Optional

MASK32 = 0xFFFFFFFF


class Format(Enum):
    """RV32I base instruction formats."""

    R = "R"
    I = "I"  # noqa: E741
    S = "S"
    B = "B"
    U = "U"
    J = "J"


class Kind(Enum):
    """Instruction kinds: the RV32I base operations plus FENCE/ECALL/EBREAK.

    ILLEGAL marks any word that is not a recognised encoding. It is a
    regular kind so both simulators can halt on it identically.
    """

    LUI = "lui"
    AUIPC = "auipc"
    JAL = "jal"
    JALR = "jalr"
    BEQ = "beq"
    BNE = "bne"
    BLT = "blt"
    BGE = "bge"
    BLTU = "bltu"
    BGEU = "bgeu"
    LB = "lb"
    LH = "lh"
    LW = "lw"
    LBU = "lbu"
    LHU = "lhu"
    SB = "sb"
    SH = "sh"
    SW = "sw"
    ADDI = "addi"
    SLTI = "slti"
    SLTIU = "sltiu"
    XORI = "xori"
    ORI = "ori"
    ANDI = "andi"
    SLLI = "slli"
    SRLI = "srli"
    SRAI = "srai"
    ADD = "add"
    SUB = "sub"
    SLL = "sll"
    SLT = "slt"
    SLTU = "sltu"
    XOR = "xor"
    SRL = "srl"
    SRA = "sra"
    OR = "or"
    AND = "and"
    FENCE = "fence"
    ECALL = "ecall"
    EBREAK = "ebreak"
    ILLEGAL = "illegal"


@dataclass(frozen=True)
class Attributes:
    """Control attributes of an instruction kind.

    Attributes:
        reads_rs1: Instruction consumes register rs1
        reads_rs2: Instruction consumes register rs2
        writes_rd: Instruction produces a value for rd
        is_load: One of LB/LH/LW/LBU/LHU
        is_store: One of SB/SH/SW
        is_cond_branch: One of the six conditional branches
        is_jump: JAL or JALR
    """

    reads_rs1: bool = False
    reads_rs2: bool = False
    writes_rd: bool = False
    is_load: bool = False
    is_store: bool = False
    is_cond_branch: bool = False
    is_jump: bool = False

    @property
    def is_control(self) -> bool:
        """Conditional branch or jump."""
        return self.is_cond_branch or self.is_jump


_R = Attributes(reads_rs1=True, reads_rs2=True, writes_rd=True)
_I = Attributes(reads_rs1=True, writes_rd=True)
_U = Attributes(writes_rd=True)
_LOAD = Attributes(reads_rs1=True, writes_rd=True, is_load=True)
_STORE = Attributes(reads_rs1=True, reads_rs2=True, is_store=True)
_BRANCH = Attributes(reads_rs1=True, reads_rs2=True, is_cond_branch=True)
_NONE = Attributes()

ATTRIBUTES: dict[Kind, Attributes] = {
    Kind.LUI: _U,
    Kind.AUIPC: _U,
    Kind.JAL: Attributes(writes_rd=True, is_jump=True),
    Kind.JALR: Attributes(reads_rs1=True, writes_rd=True, is_jump=True),
    **{k: _BRANCH for k in (Kind.BEQ, Kind.BNE, Kind.BLT, Kind.BGE, Kind.BLTU, Kind.BGEU)},
    **{k: _LOAD for k in (Kind.LB, Kind.LH, Kind.LW, Kind.LBU, Kind.LHU)},
    **{k: _STORE for k in (Kind.SB, Kind.SH, Kind.SW)},
    **{
        k: _I
        for k in (
            Kind.ADDI,
            Kind.SLTI,
            Kind.SLTIU,
            Kind.XORI,
            Kind.ORI,
            Kind.ANDI,
            Kind.SLLI,
            Kind.SRLI,
            Kind.SRAI,
        )
    },
    **{
        k: _R
        for k in (
            Kind.ADD,
            Kind.SUB,
            Kind.SLL,
            Kind.SLT,
            Kind.SLTU,
            Kind.XOR,
            Kind.SRL,
            Kind.SRA,
            Kind.OR,
            Kind.AND,
        )
    },
    Kind.FENCE: _NONE,
    Kind.ECALL: _NONE,
    Kind.EBREAK: _NONE,
    Kind.ILLEGAL: _NONE,
}

# Kinds that end a run when they reach commit
HALT_KINDS = frozenset({Kind.ECALL, Kind.EBREAK})

# Access width in bytes for memory kinds
ACCESS_WIDTH: dict[Kind, int] = {
    Kind.LB: 1,
    Kind.LBU: 1,
    Kind.SB: 1,
    Kind.LH: 2,
    Kind.LHU: 2,
    Kind.SH: 2,
    Kind.LW: 4,
    Kind.SW: 4,
}

_BRANCH_F3 = {0: Kind.BEQ, 1: Kind.BNE, 4: Kind.BLT, 5: Kind.BGE, 6: Kind.BLTU, 7: Kind.BGEU}
_LOAD_F3 = {0: Kind.LB, 1: Kind.LH, 2: Kind.LW, 4: Kind.LBU, 5: Kind.LHU}
_STORE_F3 = {0: Kind.SB, 1: Kind.SH, 2: Kind.SW}
_OPIMM_F3 = {0: Kind.ADDI, 2: Kind.SLTI, 3: Kind.SLTIU, 4: Kind.XORI, 6: Kind.ORI, 7: Kind.ANDI}
_OP_F3 = {
    (0, 0x00): Kind.ADD,
    (0, 0x20): Kind.SUB,
    (1, 0x00): Kind.SLL,
    (2, 0x00): Kind.SLT,
    (3, 0x00): Kind.SLTU,
    (4, 0x00): Kind.XOR,
    (5, 0x00): Kind.SRL,
    (5, 0x20): Kind.SRA,
    (6, 0x00): Kind.OR,
    (7, 0x00): Kind.AND,
}

OPCODE_LUI = 0x37
OPCODE_AUIPC = 0x17
OPCODE_JAL = 0x6F
OPCODE_JALR = 0x67
OPCODE_BRANCH = 0x63
OPCODE_LOAD = 0x03
OPCODE_STORE = 0x23
OPCODE_OP_IMM = 0x13
OPCODE_OP = 0x33
OPCODE_MISC_MEM = 0x0F
OPCODE_SYSTEM = 0x73

WORD_ECALL = 0x00000073
WORD_EBREAK = 0x00100073


def sign_extend(value: int, bits: int) -> int:
    """Sign-extend the low `bits` of value to a 32-bit word."""
    value &= (1 << bits) - 1
    if value & (1 << (bits - 1)):
        value -= 1 << bits
    return value & MASK32


def to_signed(word: int) -> int:
    """Interpret a 32-bit word as a two's-complement integer."""
    return (word ^ 0x80000000) - 0x80000000


@dataclass(frozen=True)
class DecodedInstr:
    """One decoded RV32I instruction.

    Register fields that the instruction's format does not carry, or that
    the kind does not use, are zero. `imm` is the sign-extended immediate
    as a 32-bit word (the shift amount for SLLI/SRLI/SRAI, and the
    fm/pred/succ field for FENCE).

    Attributes:
        kind: Instruction kind
        fmt: Encoding format (None for ILLEGAL)
        rd: Destination register index
        rs1: First source register index
        rs2: Second source register index
        imm: Immediate as a 32-bit word
        raw: Original instruction word
        attrs: Control attributes (pure function of kind)
    """

    kind: Kind
    fmt: Optional[Format]
    rd: int
    rs1: int
    rs2: int
    imm: int
    raw: int
    attrs: Attributes

    @property
    def reads_rs1(self) -> bool:
        return self.attrs.reads_rs1

    @property
    def reads_rs2(self) -> bool:
        return self.attrs.reads_rs2

    @property
    def writes_rd(self) -> bool:
        return self.attrs.writes_rd

    @property
    def is_load(self) -> bool:
        return self.attrs.is_load

    @property
    def is_store(self) -> bool:
        return self.attrs.is_store

    @property
    def is_cond_branch(self) -> bool:
        return self.attrs.is_cond_branch

    @property
    def is_jump(self) -> bool:
        return self.attrs.is_jump

    @property
    def is_control(self) -> bool:
        return self.attrs.is_control

    @property
    def is_halt(self) -> bool:
        return self.kind in HALT_KINDS

    @property
    def is_illegal(self) -> bool:
        return self.kind is Kind.ILLEGAL

    def __str__(self) -> str:
        return f"{self.kind.value} rd=x{self.rd} rs1=x{self.rs1} rs2=x{self.rs2} imm={self.imm:#x}"


@dataclass(frozen=True)
class IfDecode:
    """Partial decode produced in the If stage (decoder_if).

    Only the fields needed for early hazard detection. Every field agrees
    with the full decoder.
    """

    rs1: int
    rs2: int
    rd: int
    reads_rs1: bool
    reads_rs2: bool
    writes_rd: bool
    is_load: bool
    is_store: bool


def _illegal(word: int) -> DecodedInstr:
    return DecodedInstr(Kind.ILLEGAL, None, 0, 0, 0, 0, word, ATTRIBUTES[Kind.ILLEGAL])


def _classify(word: int) -> tuple[Kind, Optional[Format]]:
    """Map an instruction word to its kind and format."""
    opcode = word & 0x7F
    funct3 = (word >> 12) & 0x7
    funct7 = word >> 25

    if opcode == OPCODE_LUI:
        return Kind.LUI, Format.U
    if opcode == OPCODE_AUIPC:
        return Kind.AUIPC, Format.U
    if opcode == OPCODE_JAL:
        return Kind.JAL, Format.J
    if opcode == OPCODE_JALR:
        return (Kind.JALR, Format.I) if funct3 == 0 else (Kind.ILLEGAL, None)
    if opcode == OPCODE_BRANCH:
        kind = _BRANCH_F3.get(funct3)
        return (kind, Format.B) if kind else (Kind.ILLEGAL, None)
    if opcode == OPCODE_LOAD:
        kind = _LOAD_F3.get(funct3)
        return (kind, Format.I) if kind else (Kind.ILLEGAL, None)
    if opcode == OPCODE_STORE:
        kind = _STORE_F3.get(funct3)
        return (kind, Format.S) if kind else (Kind.ILLEGAL, None)
    if opcode == OPCODE_OP_IMM:
        if funct3 == 1:
            return (Kind.SLLI, Format.I) if funct7 == 0 else (Kind.ILLEGAL, None)
        if funct3 == 5:
            if funct7 == 0:
                return Kind.SRLI, Format.I
            if funct7 == 0x20:
                return Kind.SRAI, Format.I
            return Kind.ILLEGAL, None
        return _OPIMM_F3[funct3], Format.I
    if opcode == OPCODE_OP:
        kind = _OP_F3.get((funct3, funct7))
        return (kind, Format.R) if kind else (Kind.ILLEGAL, None)
    if opcode == OPCODE_MISC_MEM:
        return (Kind.FENCE, Format.I) if funct3 == 0 else (Kind.ILLEGAL, None)
    if opcode == OPCODE_SYSTEM:
        if word == WORD_ECALL:
            return Kind.ECALL, Format.I
        if word == WORD_EBREAK:
            return Kind.EBREAK, Format.I
    return Kind.ILLEGAL, None


def _immediate(word: int, kind: Kind, fmt: Format) -> int:
    if kind in (Kind.SLLI, Kind.SRLI, Kind.SRAI):
        return (word >> 20) & 0x1F
    if kind is Kind.FENCE:
        return word >> 20
    if kind in (Kind.ECALL, Kind.EBREAK):
        return 0
    if fmt is Format.I:
        return sign_extend(word >> 20, 12)
    if fmt is Format.S:
        return sign_extend(((word >> 25) << 5) | ((word >> 7) & 0x1F), 12)
    if fmt is Format.B:
        imm = (
            ((word >> 31) << 12)
            | (((word >> 7) & 0x1) << 11)
            | (((word >> 25) & 0x3F) << 5)
            | (((word >> 8) & 0xF) << 1)
        )
        return sign_extend(imm, 13)
    if fmt is Format.U:
        return word & 0xFFFFF000
    if fmt is Format.J:
        imm = (
            ((word >> 31) << 20)
            | (((word >> 12) & 0xFF) << 12)
            | (((word >> 20) & 0x1) << 11)
            | (((word >> 21) & 0x3FF) << 1)
        )
        return sign_extend(imm, 21)
    return 0


@functools.lru_cache(maxsize=8192)
def decode(word: int) -> DecodedInstr:
    """Decode a 32-bit instruction word.

    Total and deterministic: every word yields a DecodedInstr, with
    unrecognised encodings mapped to Kind.ILLEGAL.

    Args:
        word: Instruction word (only the low 32 bits are considered)

    Returns:
        Fully populated DecodedInstr

    Example:
        decode(0x00000013)  # ADDI rd=0 rs1=0 imm=0 (canonical NOP)
    """
    word &= MASK32
    kind, fmt = _classify(word)
    if fmt is None:
        return _illegal(word)

    attrs = ATTRIBUTES[kind]
    rd = (word >> 7) & 0x1F if attrs.writes_rd else 0
    rs1 = (word >> 15) & 0x1F if attrs.reads_rs1 else 0
    rs2 = (word >> 20) & 0x1F if attrs.reads_rs2 else 0
    return DecodedInstr(kind, fmt, rd, rs1, rs2, _immediate(word, kind, fmt), word, attrs)


def decode_if(word: int) -> IfDecode:
    """Partially decode an instruction word for If-stage hazard detection.

    Mirrors the hardware's small decoder: register fields are extracted
    straight from the word and qualified by opcode-level enables, without
    building the full instruction.

    Args:
        word: Instruction word

    Returns:
        IfDecode agreeing with decode() on every field
    """
    word &= MASK32
    kind, fmt = _classify(word)
    attrs = ATTRIBUTES[kind] if fmt is not None else ATTRIBUTES[Kind.ILLEGAL]
    return IfDecode(
        rs1=(word >> 15) & 0x1F if attrs.reads_rs1 else 0,
        rs2=(word >> 20) & 0x1F if attrs.reads_rs2 else 0,
        rd=(word >> 7) & 0x1F if attrs.writes_rd else 0,
        reads_rs1=attrs.reads_rs1,
        reads_rs2=attrs.reads_rs2,
        writes_rd=attrs.writes_rd,
        is_load=attrs.is_load,
        is_store=attrs.is_store,
    )


__all__ = [
    "MASK32",
    "Format",
    "Kind",
    "Attributes",
    "ATTRIBUTES",
    "HALT_KINDS",
    "ACCESS_WIDTH",
    "DecodedInstr",
    "IfDecode",
    "decode",
    "decode_if",
    "sign_extend",
    "to_signed",
]
