"""A small two-pass RV32I assembler.

Builds the bundled benchmark images and test fixtures. Supports the
base instruction set, a handful of pseudo-instructions and the data
directives the corpus needs. Text and data live in separate address
spaces (both starting at 0), matching the Harvard memory arrangement.

Usage:
    from src.core.asm import assemble

    program = assemble('''
        li   a0, 10
    loop:
        addi a0, a0, -1
        bnez a0, loop
        halt
    ''')
    program.text.words  # encoded instruction words
    program.symbols["loop"]  # 4
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from src.core.isa import MASK32, Format, Kind, sign_extend, to_signed
from src.core.memsys import MemImage

logger = logging.getLogger(__name__)


class AssemblerError(Exception):
    """Raised for malformed source or out-of-range operands.

    Attributes:
        line: 1-based source line number (0 when not tied to a line)
    """

    def __init__(self, message: str, line: int = 0) -> None:
        super().__init__(message)
        self.line = line

    def __str__(self) -> str:
        msg = super().__str__()
        return f"line {self.line}: {msg}" if self.line else msg


# (opcode, funct3, funct7) per kind
_ENCODING: dict[Kind, tuple[Format, int, int, int]] = {
    Kind.LUI: (Format.U, 0x37, 0, 0),
    Kind.AUIPC: (Format.U, 0x17, 0, 0),
    Kind.JAL: (Format.J, 0x6F, 0, 0),
    Kind.JALR: (Format.I, 0x67, 0, 0),
    Kind.BEQ: (Format.B, 0x63, 0, 0),
    Kind.BNE: (Format.B, 0x63, 1, 0),
    Kind.BLT: (Format.B, 0x63, 4, 0),
    Kind.BGE: (Format.B, 0x63, 5, 0),
    Kind.BLTU: (Format.B, 0x63, 6, 0),
    Kind.BGEU: (Format.B, 0x63, 7, 0),
    Kind.LB: (Format.I, 0x03, 0, 0),
    Kind.LH: (Format.I, 0x03, 1, 0),
    Kind.LW: (Format.I, 0x03, 2, 0),
    Kind.LBU: (Format.I, 0x03, 4, 0),
    Kind.LHU: (Format.I, 0x03, 5, 0),
    Kind.SB: (Format.S, 0x23, 0, 0),
    Kind.SH: (Format.S, 0x23, 1, 0),
    Kind.SW: (Format.S, 0x23, 2, 0),
    Kind.ADDI: (Format.I, 0x13, 0, 0),
    Kind.SLTI: (Format.I, 0x13, 2, 0),
    Kind.SLTIU: (Format.I, 0x13, 3, 0),
    Kind.XORI: (Format.I, 0x13, 4, 0),
    Kind.ORI: (Format.I, 0x13, 6, 0),
    Kind.ANDI: (Format.I, 0x13, 7, 0),
    Kind.SLLI: (Format.I, 0x13, 1, 0x00),
    Kind.SRLI: (Format.I, 0x13, 5, 0x00),
    Kind.SRAI: (Format.I, 0x13, 5, 0x20),
    Kind.ADD: (Format.R, 0x33, 0, 0x00),
    Kind.SUB: (Format.R, 0x33, 0, 0x20),
    Kind.SLL: (Format.R, 0x33, 1, 0x00),
    Kind.SLT: (Format.R, 0x33, 2, 0x00),
    Kind.SLTU: (Format.R, 0x33, 3, 0x00),
    Kind.XOR: (Format.R, 0x33, 4, 0x00),
    Kind.SRL: (Format.R, 0x33, 5, 0x00),
    Kind.SRA: (Format.R, 0x33, 5, 0x20),
    Kind.OR: (Format.R, 0x33, 6, 0x00),
    Kind.AND: (Format.R, 0x33, 7, 0x00),
    Kind.FENCE: (Format.I, 0x0F, 0, 0),
}

_SHIFT_IMM = frozenset({Kind.SLLI, Kind.SRLI, Kind.SRAI})


def _check_signed(value: int, bits: int, what: str) -> int:
    """Return value as a signed int, raising if it does not fit `bits`."""
    signed = to_signed(value & MASK32) if value > (1 << 31) - 1 else value
    if not -(1 << (bits - 1)) <= signed < (1 << (bits - 1)):
        raise AssemblerError(f"{what} {value} does not fit in {bits} signed bits")
    return signed


def encode(kind: Kind, rd: int = 0, rs1: int = 0, rs2: int = 0, imm: int = 0) -> int:
    """Encode one instruction; the inverse of decode for legal kinds.

    `imm` uses the same convention decode produces: the sign-extended
    immediate (negative Python ints are accepted), the full upper word
    for LUI/AUIPC, the shift amount for shifts and the raw 12-bit field
    for FENCE.

    Raises:
        AssemblerError: Unknown kind, bad register or immediate out of range
    """
    if kind is Kind.ECALL:
        return 0x00000073
    if kind is Kind.EBREAK:
        return 0x00100073
    if kind not in _ENCODING:
        raise AssemblerError(f"Cannot encode {kind.value}")
    for reg in (rd, rs1, rs2):
        if not 0 <= reg < 32:
            raise AssemblerError(f"Register index {reg} out of range")

    fmt, opcode, funct3, funct7 = _ENCODING[kind]

    if fmt is Format.R:
        return (funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode

    if fmt is Format.I:
        if kind in _SHIFT_IMM:
            if not 0 <= imm < 32:
                raise AssemblerError(f"Shift amount {imm} out of range")
            field_ = (funct7 << 5) | imm
        elif kind is Kind.FENCE:
            if not 0 <= imm < (1 << 12):
                raise AssemblerError(f"FENCE field {imm:#x} out of range")
            field_ = imm
        else:
            field_ = _check_signed(imm, 12, "Immediate") & 0xFFF
        return (field_ << 20) | (rs1 << 15) | (funct3 << 12) | (rd << 7) | opcode

    if fmt is Format.S:
        v = _check_signed(imm, 12, "Store offset") & 0xFFF
        hi, lo = v >> 5, v & 0x1F
        return (hi << 25) | (rs2 << 20) | (rs1 << 15) | (funct3 << 12) | (lo << 7) | opcode

    if fmt is Format.B:
        v = _check_signed(imm, 13, "Branch offset")
        if v & 1:
            raise AssemblerError(f"Branch offset {v} is odd")
        v &= 0x1FFF
        return (
            ((v >> 12) << 31)
            | (((v >> 5) & 0x3F) << 25)
            | (rs2 << 20)
            | (rs1 << 15)
            | (funct3 << 12)
            | (((v >> 1) & 0xF) << 8)
            | (((v >> 11) & 1) << 7)
            | opcode
        )

    if fmt is Format.U:
        if imm & 0xFFF:
            raise AssemblerError(f"U-type immediate {imm:#x} has low bits set")
        return (imm & 0xFFFFF000) | (rd << 7) | opcode

    # Format.J
    v = _check_signed(imm, 21, "Jump offset")
    if v & 1:
        raise AssemblerError(f"Jump offset {v} is odd")
    v &= 0x1FFFFF
    return (
        ((v >> 20) << 31)
        | (((v >> 1) & 0x3FF) << 21)
        | (((v >> 11) & 1) << 20)
        | (((v >> 12) & 0xFF) << 12)
        | (rd << 7)
        | opcode
    )


REGISTERS: dict[str, int] = {f"x{i}": i for i in range(32)}
REGISTERS.update(
    {
        "zero": 0,
        "ra": 1,
        "sp": 2,
        "gp": 3,
        "tp": 4,
        "t0": 5,
        "t1": 6,
        "t2": 7,
        "s0": 8,
        "fp": 8,
        "s1": 9,
        **{f"a{i}": 10 + i for i in range(8)},
        **{f"s{i}": 16 + i for i in range(2, 12)},
        **{f"t{i}": 25 + i for i in range(3, 7)},
    }
)


def hi20(value: int) -> int:
    """Upper immediate for a lui/addi pair building `value`."""
    return ((value + 0x800) >> 12) & 0xFFFFF


def lo12(value: int) -> int:
    """Signed low immediate for a lui/addi pair building `value`."""
    return to_signed(sign_extend(value & 0xFFF, 12))


@dataclass
class Program:
    """Assembled output.

    Attributes:
        text: Instruction image (origin 0)
        data: Data image (origin 0)
        symbols: Label and .equ values
        lines: Source line number of each text word, by address
    """

    text: MemImage
    data: MemImage
    symbols: dict[str, int] = field(default_factory=dict)
    lines: dict[int, int] = field(default_factory=dict)


@dataclass
class _Stmt:
    line: int
    section: str
    addr: int
    op: str
    args: list[str]
    size: int


_LABEL_RE = re.compile(r"^\s*([A-Za-z_.$][\w.$]*)\s*:")
_MEM_RE = re.compile(r"^(.*)\((\s*\w+\s*)\)$")
_RELOC_RE = re.compile(r"^%(hi|lo)\((.+)\)$")

_BRANCHES = {
    "beq": Kind.BEQ,
    "bne": Kind.BNE,
    "blt": Kind.BLT,
    "bge": Kind.BGE,
    "bltu": Kind.BLTU,
    "bgeu": Kind.BGEU,
}
# pseudo branch -> (real branch, swap operands)
_SWAPPED_BRANCHES = {
    "bgt": ("blt", True),
    "ble": ("bge", True),
    "bgtu": ("bltu", True),
    "bleu": ("bgeu", True),
}
# pseudo branch against zero -> (real branch, zero first)
_ZERO_BRANCHES = {
    "beqz": ("beq", False),
    "bnez": ("bne", False),
    "bltz": ("blt", False),
    "bgez": ("bge", False),
    "blez": ("bge", True),
    "bgtz": ("blt", True),
}
_LOADS = {"lb": Kind.LB, "lh": Kind.LH, "lw": Kind.LW, "lbu": Kind.LBU, "lhu": Kind.LHU}
_STORES = {"sb": Kind.SB, "sh": Kind.SH, "sw": Kind.SW}
_OPS_R = {k.value: k for k in (
    Kind.ADD, Kind.SUB, Kind.SLL, Kind.SLT, Kind.SLTU,
    Kind.XOR, Kind.SRL, Kind.SRA, Kind.OR, Kind.AND,
)}  # fmt: skip
_OPS_I = {k.value: k for k in (
    Kind.ADDI, Kind.SLTI, Kind.SLTIU, Kind.XORI, Kind.ORI, Kind.ANDI,
    Kind.SLLI, Kind.SRLI, Kind.SRAI,
)}  # fmt: skip
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", '"': '"', "'": "'"}


def _strip_comment(line: str) -> str:
    in_str = False
    for i, ch in enumerate(line):
        if ch == '"' and (i == 0 or line[i - 1] != "\\"):
            in_str = not in_str
        elif ch == "#" and not in_str:
            return line[:i]
    return line


def _split_args(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    if text.startswith('"'):
        return [text]
    return [a.strip() for a in text.split(",")]


def _parse_string(arg: str, line: int) -> bytes:
    if len(arg) < 2 or not (arg.startswith('"') and arg.endswith('"')):
        raise AssemblerError(f"Expected a quoted string, got {arg}", line)
    out: list[str] = []
    body = arg[1:-1]
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            esc = body[i + 1]
            if esc not in _ESCAPES:
                raise AssemblerError(f"Unknown escape \\{esc}", line)
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out).encode("latin-1")


class Assembler:
    """Two-pass assembler producing separate text and data images.

    The first pass sizes every statement and assigns label addresses;
    the second pass evaluates operands and encodes.
    """

    def __init__(self) -> None:
        self.symbols: dict[str, int] = {}
        self._stmts: list[_Stmt] = []

    # -- expressions -----------------------------------------------------

    def _value(self, expr: str, line: int, *, strict: bool = True) -> Optional[int]:
        """Evaluate an integer expression (literals, symbols, + and -, %hi/%lo).

        Returns None for an undefined symbol when strict is False.
        """
        expr = expr.strip()
        m = _RELOC_RE.match(expr)
        if m:
            inner = self._value(m.group(2), line, strict=strict)
            if inner is None:
                return None
            return hi20(inner) if m.group(1) == "hi" else lo12(inner)

        if not expr:
            raise AssemblerError("Missing operand", line)
        terms = re.findall(r"[+-]?\s*[^+\-\s][^+-]*", expr)
        total = 0
        for term in terms:
            term = term.replace(" ", "")
            sign = -1 if term.startswith("-") else 1
            atom = term.lstrip("+-")
            if re.fullmatch(r"'(\\?.)'", atom):
                body = atom[1:-1]
                val = ord(_ESCAPES.get(body[1], body[1]) if body.startswith("\\") else body)
            elif re.fullmatch(r"0[xX][0-9a-fA-F_]+|0[bB][01_]+", atom):
                val = int(atom, 0)
            elif atom.isdigit():
                val = int(atom, 10)
            elif atom in self.symbols:
                val = self.symbols[atom]
            elif re.fullmatch(r"[A-Za-z_.$][\w.$]*", atom):
                if strict:
                    raise AssemblerError(f"Undefined symbol '{atom}'", line)
                return None
            else:
                raise AssemblerError(f"Cannot parse expression '{expr}'", line)
            total += sign * val
        return total

    def _reg(self, name: str, line: int) -> int:
        reg = REGISTERS.get(name.strip().lower())
        if reg is None:
            raise AssemblerError(f"Unknown register '{name}'", line)
        return reg

    def _mem_operand(self, arg: str, line: int) -> tuple[int, int]:
        """Parse `off(reg)` into (offset, register)."""
        m = _MEM_RE.match(arg.strip())
        if not m:
            raise AssemblerError(f"Expected offset(register), got '{arg}'", line)
        off_text = m.group(1).strip()
        offset = self._value(off_text, line) if off_text else 0
        assert offset is not None
        return offset, self._reg(m.group(2), line)

    # -- pass 1 ----------------------------------------------------------

    def _size(self, op: str, args: list[str], line: int, addr: int) -> int:
        if op == "li":
            if len(args) != 2:
                raise AssemblerError("li expects rd, value", line)
            val = self._value(args[1], line, strict=False)
            if val is not None and -2048 <= to_signed(val & MASK32) < 2048:
                return 4
            return 8
        if op == "la":
            return 8
        return 4

    def _first_pass(self, source: str) -> None:
        section = "text"
        counters = {"text": 0, "data": 0}

        for lineno, raw_line in enumerate(source.splitlines(), start=1):
            text = _strip_comment(raw_line).strip()
            while True:
                m = _LABEL_RE.match(text)
                if not m:
                    break
                label = m.group(1)
                if label in self.symbols:
                    raise AssemblerError(f"Duplicate symbol '{label}'", lineno)
                self.symbols[label] = counters[section]
                text = text[m.end() :].strip()
            if not text:
                continue

            parts = text.split(None, 1)
            op = parts[0].lower()
            args = _split_args(parts[1] if len(parts) > 1 else "")
            addr = counters[section]

            if op.startswith("."):
                size, addr = self._directive_size(op, args, lineno, addr, section)
                if op in (".text", ".data"):
                    section = op[1:]
                    continue
                if op in (".equ", ".set", ".globl", ".global", ".section"):
                    continue
            else:
                if section != "text":
                    raise AssemblerError(f"Instruction '{op}' outside .text", lineno)
                if addr % 4:
                    raise AssemblerError("Instruction is not word-aligned", lineno)
                size = self._size(op, args, lineno, addr)

            self._stmts.append(_Stmt(lineno, section, addr, op, args, size))
            counters[section] = addr + size

    def _directive_size(
        self, op: str, args: list[str], line: int, addr: int, section: str
    ) -> tuple[int, int]:
        """Return (size, possibly realigned address) for a directive."""
        if op in (".text", ".data", ".globl", ".global", ".section"):
            return 0, addr
        if op in (".equ", ".set"):
            if len(args) != 2:
                raise AssemblerError(f"{op} expects NAME, value", line)
            val = self._value(args[1], line)
            assert val is not None
            self.symbols[args[0]] = val
            return 0, addr
        if op == ".word":
            addr = (addr + 3) & ~3
            return 4 * len(args), addr
        if op == ".half":
            addr = (addr + 1) & ~1
            return 2 * len(args), addr
        if op == ".byte":
            return len(args), addr
        if op in (".space", ".zero"):
            val = self._value(args[0], line) if args else None
            if val is None or val < 0:
                raise AssemblerError(f"{op} expects a non-negative size", line)
            return val, addr
        if op == ".align":
            val = self._value(args[0], line) if args else None
            if val is None or not 0 <= val <= 12:
                raise AssemblerError(".align expects a power-of-two exponent", line)
            step = 1 << val
            return (-addr) % step, addr
        if op in (".string", ".asciz"):
            return len(_parse_string(args[0] if args else "", line)) + 1, addr
        if op == ".ascii":
            return len(_parse_string(args[0] if args else "", line)), addr
        raise AssemblerError(f"Unknown directive '{op}'", line)

    # -- pass 2 ----------------------------------------------------------

    def _emit_directive(self, stmt: _Stmt, buf: bytearray) -> None:
        op, args, line = stmt.op, stmt.args, stmt.line
        if op == ".word":
            for a in args:
                val = self._value(a, line)
                assert val is not None
                buf += (val & MASK32).to_bytes(4, "little")
        elif op == ".half":
            for a in args:
                val = self._value(a, line)
                assert val is not None
                buf += (val & 0xFFFF).to_bytes(2, "little")
        elif op == ".byte":
            for a in args:
                val = self._value(a, line)
                assert val is not None
                buf.append(val & 0xFF)
        elif op in (".space", ".zero", ".align"):
            buf += bytes(stmt.size)
        elif op in (".string", ".asciz"):
            buf += _parse_string(args[0], line) + b"\0"
        elif op == ".ascii":
            buf += _parse_string(args[0], line)

    def _expect(self, stmt: _Stmt, count: int) -> None:
        if len(stmt.args) != count:
            raise AssemblerError(
                f"'{stmt.op}' expects {count} operand(s), got {len(stmt.args)}", stmt.line
            )

    def _target_offset(self, arg: str, stmt: _Stmt) -> int:
        target = self._value(arg, stmt.line)
        assert target is not None
        return target - stmt.addr

    def _encode_stmt(self, stmt: _Stmt) -> list[int]:
        op, a, line = stmt.op, stmt.args, stmt.line

        def reg(i: int) -> int:
            return self._reg(a[i], line)

        def val(i: int) -> int:
            v = self._value(a[i], line)
            assert v is not None
            return v

        if op in _OPS_R:
            self._expect(stmt, 3)
            return [encode(_OPS_R[op], reg(0), reg(1), reg(2))]
        if op in _OPS_I:
            self._expect(stmt, 3)
            return [encode(_OPS_I[op], reg(0), reg(1), imm=val(2))]
        if op in _LOADS:
            self._expect(stmt, 2)
            off, base = self._mem_operand(a[1], line)
            return [encode(_LOADS[op], reg(0), base, imm=off)]
        if op in _STORES:
            self._expect(stmt, 2)
            off, base = self._mem_operand(a[1], line)
            return [encode(_STORES[op], rs1=base, rs2=reg(0), imm=off)]
        if op in _BRANCHES:
            self._expect(stmt, 3)
            off = self._target_offset(a[2], stmt)
            return [encode(_BRANCHES[op], rs1=reg(0), rs2=reg(1), imm=off)]
        if op in _SWAPPED_BRANCHES:
            self._expect(stmt, 3)
            real, _ = _SWAPPED_BRANCHES[op]
            off = self._target_offset(a[2], stmt)
            return [encode(_BRANCHES[real], rs1=reg(1), rs2=reg(0), imm=off)]
        if op in _ZERO_BRANCHES:
            self._expect(stmt, 2)
            real, zero_first = _ZERO_BRANCHES[op]
            off = self._target_offset(a[1], stmt)
            rs1, rs2 = (0, reg(0)) if zero_first else (reg(0), 0)
            return [encode(_BRANCHES[real], rs1=rs1, rs2=rs2, imm=off)]
        if op in ("lui", "auipc"):
            self._expect(stmt, 2)
            upper = val(1)
            if not 0 <= upper < (1 << 20):
                raise AssemblerError(f"Upper immediate {upper:#x} out of range", line)
            return [encode(Kind(op), reg(0), imm=upper << 12)]
        if op == "jal":
            if len(a) == 1:
                return [encode(Kind.JAL, 1, imm=self._target_offset(a[0], stmt))]
            self._expect(stmt, 2)
            return [encode(Kind.JAL, reg(0), imm=self._target_offset(a[1], stmt))]
        if op == "jalr":
            if len(a) == 1:
                return [encode(Kind.JALR, 1, reg(0))]
            if len(a) == 2:
                off, base = self._mem_operand(a[1], line)
                return [encode(Kind.JALR, reg(0), base, imm=off)]
            self._expect(stmt, 3)
            return [encode(Kind.JALR, reg(0), reg(1), imm=val(2))]
        if op == "fence":
            return [encode(Kind.FENCE, imm=0x0FF)]
        if op in ("ecall", "halt"):
            return [encode(Kind.ECALL)]
        if op == "ebreak":
            return [encode(Kind.EBREAK)]
        if op == "nop":
            return [encode(Kind.ADDI)]
        if op == "li":
            value = val(1)
            rd = reg(0)
            if stmt.size == 4:
                return [encode(Kind.ADDI, rd, 0, imm=to_signed(value & MASK32))]
            return [
                encode(Kind.LUI, rd, imm=hi20(value) << 12),
                encode(Kind.ADDI, rd, rd, imm=lo12(value)),
            ]
        if op == "la":
            self._expect(stmt, 2)
            value, rd = val(1), reg(0)
            return [
                encode(Kind.LUI, rd, imm=hi20(value) << 12),
                encode(Kind.ADDI, rd, rd, imm=lo12(value)),
            ]
        if op == "mv":
            self._expect(stmt, 2)
            return [encode(Kind.ADDI, reg(0), reg(1))]
        if op == "not":
            self._expect(stmt, 2)
            return [encode(Kind.XORI, reg(0), reg(1), imm=-1)]
        if op == "neg":
            self._expect(stmt, 2)
            return [encode(Kind.SUB, reg(0), 0, reg(1))]
        if op == "j":
            self._expect(stmt, 1)
            return [encode(Kind.JAL, 0, imm=self._target_offset(a[0], stmt))]
        if op == "call":
            self._expect(stmt, 1)
            return [encode(Kind.JAL, 1, imm=self._target_offset(a[0], stmt))]
        if op == "jr":
            self._expect(stmt, 1)
            return [encode(Kind.JALR, 0, reg(0))]
        if op == "ret":
            return [encode(Kind.JALR, 0, 1)]
        raise AssemblerError(f"Unknown instruction '{op}'", line)

    def assemble(self, source: str) -> Program:
        """Assemble source text into a Program.

        Raises:
            AssemblerError: On any syntax or range error
        """
        self.symbols = {}
        self._stmts = []
        self._first_pass(source)

        text: list[int] = []
        lines: dict[int, int] = {}
        data = bytearray()

        for stmt in self._stmts:
            if stmt.section == "data":
                data += bytes(stmt.addr - len(data))
                self._emit_directive(stmt, data)
                continue
            if stmt.op.startswith("."):
                raise AssemblerError(f"Directive '{stmt.op}' not allowed in .text", stmt.line)
            try:
                words = self._encode_stmt(stmt)
            except AssemblerError as e:
                if not e.line:
                    e.line = stmt.line
                raise
            for i, word in enumerate(words):
                lines[stmt.addr + 4 * i] = stmt.line
            text.extend(words)

        logger.debug(f"Assembled {len(text)} instruction words, {len(data)} data bytes")
        return Program(
            text=MemImage(origin=0, words=text),
            data=MemImage.from_bytes(bytes(data), origin=0),
            symbols=dict(self.symbols),
            lines=lines,
        )


def assemble(source: str) -> Program:
    """Assemble RV32I source text. See Assembler."""
    return Assembler().assemble(source)


def assemble_file(path: Union[str, Path]) -> Program:
    """Assemble the source file at path.

    Raises:
        AssemblerError: On read failure or any assembly error
    """
    path = Path(path)
    try:
        source = path.read_text()
    except OSError as e:
        raise AssemblerError(f"Cannot read {path}: {e}") from e
    return assemble(source)


__all__ = [
    "AssemblerError",
    "Assembler",
    "Program",
    "REGISTERS",
    "encode",
    "assemble",
    "assemble_file",
    "hi20",
    "lo12",
]
