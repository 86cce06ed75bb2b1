"""Tests for the assembler."""

import tempfile
from pathlib import Path

import pytest

from src.core.asm import AssemblerError, Program, assemble, assemble_file, encode, hi20, lo12
from src.core.isa import Kind, decode, to_signed


def kinds(program: Program) -> list[Kind]:
    return [decode(w).kind for w in program.text.words]


class TestBasicAssembly:
    """Test instruction assembly."""

    def test_single_instructions(self) -> None:
        """Test base instructions encode like encode()."""
        program = assemble(
            """
            addi x1, x0, -1
            add  t1, t0, ra
            lw   t0, 8(sp)
            sw   t0, 12(sp)
            ecall
            """
        )
        assert program.text.words == [
            0xFFF00093,
            encode(Kind.ADD, 6, 5, 1),
            0x00812283,
            0x00512623,
            0x00000073,
        ]

    def test_labels_and_branches(self) -> None:
        """Test branch offsets are relative to the branch itself."""
        program = assemble(
            """
            start:
                nop
            loop:
                addi a0, a0, 1
                bne  a0, a1, loop
                beq  zero, zero, done
                nop
            done:
                ecall
            """
        )
        words = program.text.words
        assert to_signed(decode(words[2]).imm) == -4
        assert decode(words[3]).imm == 8
        assert program.symbols["start"] == 0
        assert program.symbols["loop"] == 4
        assert program.symbols["done"] == 20

    def test_comments_and_blank_lines(self) -> None:
        """Test that comments are stripped, including after code."""
        program = assemble("# header\n\n  nop  # trailing\necall\n")
        assert kinds(program) == [Kind.ADDI, Kind.ECALL]

    def test_line_map(self) -> None:
        """Test each text word maps back to its source line."""
        program = assemble("nop\nli t0, 0x12345678\necall\n")
        assert program.lines == {0: 1, 4: 2, 8: 2, 12: 3}


class TestPseudoInstructions:
    """Test pseudo-instruction expansion."""

    def test_li_small_is_one_word(self) -> None:
        """Test li with a 12-bit value expands to a single addi."""
        program = assemble("li t0, -2048\nli t1, 2047\n")
        assert len(program.text.words) == 2
        assert to_signed(decode(program.text.words[0]).imm) == -2048

    def test_li_large_is_lui_addi(self) -> None:
        """Test li outside 12 bits builds the value with lui + addi."""
        value = 0x12345FFF
        program = assemble(f"li t0, {value:#x}\n")
        lui, addi = (decode(w) for w in program.text.words)
        assert lui.kind is Kind.LUI
        assert addi.kind is Kind.ADDI
        assert (lui.imm + addi.imm) & 0xFFFFFFFF == value

    def test_la_is_always_two_words(self) -> None:
        """Test la reserves two words even for small addresses."""
        program = assemble(
            """
            la a0, buf
            ecall
            .data
            .word 1
            buf: .word 2
            """
        )
        assert kinds(program) == [Kind.LUI, Kind.ADDI, Kind.ECALL]
        assert decode(program.text.words[1]).imm == 4

    def test_jumps_and_moves(self) -> None:
        """Test j, call, ret, mv, not, neg and halt."""
        program = assemble(
            """
            j    next
            next:
            call fn
            mv   a0, a1
            not  a2, a3
            neg  a4, a5
            halt
            fn:
            ret
            """
        )
        words = [decode(w) for w in program.text.words]
        assert words[0].kind is Kind.JAL and words[0].rd == 0 and words[0].imm == 4
        assert words[1].kind is Kind.JAL and words[1].rd == 1 and words[1].imm == 20
        assert words[2].kind is Kind.ADDI and (words[2].rd, words[2].rs1) == (10, 11)
        assert words[3].kind is Kind.XORI and words[3].imm == 0xFFFFFFFF
        assert words[4].kind is Kind.SUB and (words[4].rs1, words[4].rs2) == (0, 15)
        assert words[5].kind is Kind.ECALL
        assert words[6].kind is Kind.JALR and (words[6].rd, words[6].rs1) == (0, 1)

    def test_swapped_and_zero_branches(self) -> None:
        """Test bgt swaps operands and beqz/blez compare against x0."""
        program = assemble(
            """
            top:
            bgt  a0, a1, top
            beqz t0, top
            blez t1, top
            """
        )
        bgt, beqz, blez = (decode(w) for w in program.text.words)
        assert bgt.kind is Kind.BLT and (bgt.rs1, bgt.rs2) == (11, 10)
        assert beqz.kind is Kind.BEQ and (beqz.rs1, beqz.rs2) == (5, 0)
        assert blez.kind is Kind.BGE and (blez.rs1, blez.rs2) == (0, 6)


class TestDataSection:
    """Test data directives."""

    def test_words_halves_bytes(self) -> None:
        """Test little-endian layout with alignment of .word and .half."""
        program = assemble(
            """
            .data
            .byte 0x11
            .half 0x2233
            .word 0x44556677
            """
        )
        assert program.data.to_bytes() == bytes(
            [0x11, 0x00, 0x33, 0x22, 0x77, 0x66, 0x55, 0x44]
        )

    def test_string_space_align(self) -> None:
        """Test .asciz terminator, .space padding and .align."""
        program = assemble(
            """
            .data
            msg: .asciz "hi\\n"
            .align 2
            after: .space 3
            end:
            """
        )
        assert program.symbols["msg"] == 0
        assert program.symbols["after"] == 4
        assert program.symbols["end"] == 7
        assert program.data.to_bytes()[:4] == b"hi\n\0"

    def test_equ_and_expressions(self) -> None:
        """Test .equ symbols and +/- expressions."""
        program = assemble(
            """
            .equ COUNT, 16
            li t0, COUNT - 1
            .data
            arr: .space 8
            arr_end:
            .text
            la t1, arr_end - 4
            """
        )
        first = decode(program.text.words[0])
        assert first.imm == 15
        lui, addi = (decode(w) for w in program.text.words[1:3])
        assert (lui.imm + addi.imm) & 0xFFFFFFFF == 4

    def test_hi_lo_relocations(self) -> None:
        """Test %hi/%lo pair rebuilds the address."""
        for value in (0, 0x7FF, 0x800, 0xFFFFF800, 0x12345678):
            assert ((hi20(value) << 12) + lo12(value)) & 0xFFFFFFFF == value
        program = assemble("lui t0, %hi(0x12345678)\naddi t0, t0, %lo(0x12345678)\n")
        lui, addi = (decode(w) for w in program.text.words)
        assert (lui.imm + addi.imm) & 0xFFFFFFFF == 0x12345678


class TestErrors:
    """Test assembler error reporting."""

    def test_unknown_instruction_reports_line(self) -> None:
        """Test the line number is carried on the error."""
        with pytest.raises(AssemblerError) as exc_info:
            assemble("nop\nfrobnicate t0\n")
        assert exc_info.value.line == 2
        assert str(exc_info.value).startswith("line 2:")

    def test_undefined_symbol(self) -> None:
        """Test branches to unknown labels fail."""
        with pytest.raises(AssemblerError, match="Undefined symbol"):
            assemble("beq t0, t1, nowhere\n")

    def test_duplicate_label(self) -> None:
        """Test labels cannot be redefined."""
        with pytest.raises(AssemblerError, match="Duplicate"):
            assemble("a: nop\na: nop\n")

    def test_immediate_out_of_range(self) -> None:
        """Test 12-bit immediates are range checked."""
        with pytest.raises(AssemblerError):
            assemble("addi t0, t0, 4096\n")

    def test_unknown_register(self) -> None:
        """Test unknown register names are rejected."""
        with pytest.raises(AssemblerError, match="Unknown register"):
            assemble("add t0, t1, x32\n")

    def test_instruction_in_data_section(self) -> None:
        """Test instructions are only allowed in .text."""
        with pytest.raises(AssemblerError, match="outside .text"):
            assemble(".data\nnop\n")

    def test_missing_file(self) -> None:
        """Test an unreadable file becomes an AssemblerError."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(AssemblerError, match="Cannot read"):
                assemble_file(Path(tmpdir) / "missing.s")

    def test_assemble_file(self) -> None:
        """Test assembling from disk."""
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "prog.s"
            path.write_text("li a0, 3\necall\n")
            program = assemble_file(path)
            assert kinds(program) == [Kind.ADDI, Kind.ECALL]
