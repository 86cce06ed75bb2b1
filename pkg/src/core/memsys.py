"""Instruction and data memories with a memory-mapped console.

Harvard arrangement: instruction memory is only reachable through
instruction fetch, data memory only through loads and stores. A single
byte-wide console register above data memory stands in for a serial
port; bytes written there are captured in order and optionally echoed.

Usage:
    mem = MemSystem()
    mem.load_image(MemImage(origin=0, words=[0x00000013]), target="imem")
    mem.write_data(0x100, 4, 0xDEADBEEF)
    mem.read_data(0x100, 1)  # 0xEF
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

logger = logging.getLogger(__name__)

DEFAULT_MEM_BYTES = 32 * 1024
DEFAULT_CONSOLE_ADDRESS = 0xF0000000


class FaultReason(Enum):
    """Why a simulation stopped abnormally."""

    MISALIGNED_ACCESS = "misaligned data access"
    ACCESS_OUT_OF_RANGE = "data address out of range"
    CONSOLE_READ = "read from write-only console"
    CONSOLE_WIDTH = "console accepts byte writes only"
    FETCH_OUT_OF_RANGE = "instruction fetch outside instruction memory"
    MISALIGNED_FETCH = "misaligned instruction fetch"
    ILLEGAL_INSTRUCTION = "illegal instruction"


class SimulationFault(Exception):
    """Raised when the simulated program performs an illegal operation.

    Both simulators raise the same fault for the same program, which is
    what `same_as` checks.

    Attributes:
        reason: What went wrong
        pc: Address of the faulting instruction (None until attached)
        addr: Offending data or fetch address, if any
        cycle: Cycle of the fault (pipeline only)
    """

    def __init__(
        self,
        reason: FaultReason,
        *,
        addr: Optional[int] = None,
        pc: Optional[int] = None,
        cycle: Optional[int] = None,
    ) -> None:
        super().__init__(reason.value)
        self.reason = reason
        self.addr = addr
        self.pc = pc
        self.cycle = cycle

    def at(self, *, pc: Optional[int] = None, cycle: Optional[int] = None) -> SimulationFault:
        """Attach the faulting pc and/or cycle, returning self."""
        if pc is not None:
            self.pc = pc
        if cycle is not None:
            self.cycle = cycle
        return self

    def same_as(self, other: SimulationFault) -> bool:
        """True if both faults have the same reason, pc and address."""
        return (self.reason, self.pc, self.addr) == (other.reason, other.pc, other.addr)

    def __str__(self) -> str:
        msg = self.reason.value
        if self.addr is not None:
            msg += f" (addr {self.addr:#010x})"
        if self.pc is not None:
            msg += f" at pc {self.pc:#010x}"
        if self.cycle is not None:
            msg += f", cycle {self.cycle}"
        return msg


class ImageFormatError(Exception):
    """Raised when a memory image file cannot be parsed."""

    def __init__(self, message: str, path: Optional[Path] = None, line: int = 0) -> None:
        super().__init__(message)
        self.path = path
        self.line = line


class ImageTooLargeError(Exception):
    """Raised when an image does not fit in its target memory."""

    pass


@dataclass
class MemImage:
    """A contiguous run of 32-bit words placed at a byte origin.

    Attributes:
        origin: Word-aligned byte address of the first word
        words: Words in ascending address order
    """

    origin: int = 0
    words: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.origin % 4:
            raise ImageFormatError(f"Image origin {self.origin:#x} is not word-aligned")

    @property
    def size_bytes(self) -> int:
        return 4 * len(self.words)

    def to_hex(self) -> str:
        """Render as readmemh text: one 8-digit word per line."""
        return "".join(f"{w & 0xFFFFFFFF:08x}\n" for w in self.words)

    def to_bytes(self) -> bytes:
        """Render as raw little-endian bytes."""
        return b"".join((w & 0xFFFFFFFF).to_bytes(4, "little") for w in self.words)

    @classmethod
    def from_hex(cls, text: str, origin: int = 0, path: Optional[Path] = None) -> MemImage:
        """Parse readmemh-style text (one word per line, MS nibble first).

        Blank lines and `//` or `#` comments are ignored.
        """
        words: list[int] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("//", 1)[0].split("#", 1)[0].strip()
            if not line:
                continue
            if len(line) > 8:
                raise ImageFormatError(f"Word wider than 32 bits: '{line}'", path, lineno)
            try:
                words.append(int(line, 16))
            except ValueError as e:
                raise ImageFormatError(f"Invalid hex word '{line}'", path, lineno) from e
        return cls(origin=origin, words=words)

    @classmethod
    def from_bytes(cls, data: bytes, origin: int = 0) -> MemImage:
        """Parse raw little-endian bytes, zero-padding to a whole word."""
        if len(data) % 4:
            data = data + b"\x00" * (4 - len(data) % 4)
        words = [int.from_bytes(data[i : i + 4], "little") for i in range(0, len(data), 4)]
        return cls(origin=origin, words=words)


def read_image(path: str | Path, origin: int = 0) -> MemImage:
    """Load a memory image file.

    `.hex` and `.mem` files are read as readmemh text; anything else is
    read as a raw little-endian binary.

    Raises:
        ImageFormatError: If the file is missing or malformed
    """
    path = Path(path)
    try:
        if path.suffix.lower() in (".hex", ".mem"):
            return MemImage.from_hex(path.read_text(), origin=origin, path=path)
        return MemImage.from_bytes(path.read_bytes(), origin=origin)
    except OSError as e:
        raise ImageFormatError(f"Cannot read image {path}: {e}", path) from e


def _check_pow2(name: str, size: int) -> None:
    if size <= 0 or size & (size - 1):
        raise ValueError(f"{name} size must be a power of two, got {size}")


class MemSystem:
    """Instruction memory, data memory and console.

    Example:
        mem = MemSystem(imem_bytes=4096, dmem_bytes=4096)
        mem.write_data(mem.console_address, 1, ord("A"))
        mem.console_text()  # "A"
    """

    def __init__(
        self,
        imem_bytes: int = DEFAULT_MEM_BYTES,
        dmem_bytes: int = DEFAULT_MEM_BYTES,
        *,
        imem_base: int = 0,
        dmem_base: int = 0,
        console_address: int = DEFAULT_CONSOLE_ADDRESS,
        console_echo: Optional[Callable[[str], None]] = None,
    ) -> None:
        _check_pow2("imem", imem_bytes)
        _check_pow2("dmem", dmem_bytes)
        self.imem_bytes = imem_bytes
        self.dmem_bytes = dmem_bytes
        self.imem_base = imem_base
        self.dmem_base = dmem_base
        self.console_address = console_address
        self.console_echo = console_echo
        self.imem: list[int] = [0] * (imem_bytes // 4)
        self.dmem = bytearray(dmem_bytes)
        self.console_buffer = bytearray()

    def copy(self) -> MemSystem:
        """Independent copy with identical contents (console echo not shared)."""
        clone = MemSystem(
            self.imem_bytes,
            self.dmem_bytes,
            imem_base=self.imem_base,
            dmem_base=self.dmem_base,
            console_address=self.console_address,
        )
        clone.imem = list(self.imem)
        clone.dmem = bytearray(self.dmem)
        clone.console_buffer = bytearray(self.console_buffer)
        return clone

    def load_image(self, image: MemImage, target: str = "imem") -> MemSystem:
        """Place an image into instruction or data memory.

        Args:
            image: Words and origin to load
            target: "imem" or "dmem"

        Returns:
            self, for chaining

        Raises:
            ImageTooLargeError: If the image does not fit
            ValueError: If target is unknown
        """
        if target == "imem":
            start = image.origin - self.imem_base
            if start < 0 or start + image.size_bytes > self.imem_bytes:
                raise ImageTooLargeError(
                    f"Image of {image.size_bytes} bytes at {image.origin:#x} "
                    f"does not fit in {self.imem_bytes}-byte imem"
                )
            first = start // 4
            self.imem[first : first + len(image.words)] = [w & 0xFFFFFFFF for w in image.words]
        elif target == "dmem":
            start = image.origin - self.dmem_base
            if start < 0 or start + image.size_bytes > self.dmem_bytes:
                raise ImageTooLargeError(
                    f"Image of {image.size_bytes} bytes at {image.origin:#x} "
                    f"does not fit in {self.dmem_bytes}-byte dmem"
                )
            self.dmem[start : start + image.size_bytes] = image.to_bytes()
        else:
            raise ValueError(f"Unknown memory target '{target}'")

        logger.debug(f"Loaded {len(image.words)} words into {target} at {image.origin:#x}")
        return self

    def read_instr(self, pc: int) -> int:
        """Fetch the instruction word at pc.

        Raises:
            SimulationFault: Misaligned pc or pc outside instruction memory
        """
        if pc & 3:
            raise SimulationFault(FaultReason.MISALIGNED_FETCH, addr=pc)
        offset = pc - self.imem_base
        if offset < 0 or offset >= self.imem_bytes:
            raise SimulationFault(FaultReason.FETCH_OUT_OF_RANGE, addr=pc)
        return self.imem[offset >> 2]

    def _dmem_offset(self, addr: int, width: int) -> int:
        if addr % width:
            raise SimulationFault(FaultReason.MISALIGNED_ACCESS, addr=addr)
        offset = addr - self.dmem_base
        if offset < 0 or offset + width > self.dmem_bytes:
            raise SimulationFault(FaultReason.ACCESS_OUT_OF_RANGE, addr=addr)
        return offset

    def read_data(self, addr: int, width: int) -> int:
        """Read `width` bytes (1, 2 or 4) little-endian, zero-extended.

        Raises:
            SimulationFault: Misaligned, out of range, or a console read
        """
        if addr == self.console_address:
            raise SimulationFault(FaultReason.CONSOLE_READ, addr=addr)
        offset = self._dmem_offset(addr, width)
        return int.from_bytes(self.dmem[offset : offset + width], "little")

    def read_word(self, addr: int, width: int = 4) -> int:
        """Read the aligned word containing a `width`-byte access at addr.

        Checks the access exactly as read_data(addr, width) would, then
        returns the whole word for the align/extend unit.

        Raises:
            SimulationFault: Same conditions as read_data
        """
        if addr == self.console_address:
            raise SimulationFault(FaultReason.CONSOLE_READ, addr=addr)
        self._dmem_offset(addr, width)
        offset = (addr & ~3) - self.dmem_base
        return int.from_bytes(self.dmem[offset : offset + 4], "little")

    def write_data(self, addr: int, width: int, value: int) -> None:
        """Write the low `width` bytes of value little-endian.

        A 1-byte write to the console address appends to the console
        buffer and leaves data memory untouched.

        Raises:
            SimulationFault: Misaligned, out of range, or a wide console write
        """
        if addr == self.console_address:
            if width != 1:
                raise SimulationFault(FaultReason.CONSOLE_WIDTH, addr=addr)
            byte = value & 0xFF
            self.console_buffer.append(byte)
            if self.console_echo is not None:
                self.console_echo(chr(byte))
            return
        offset = self._dmem_offset(addr, width)
        mask = (1 << (8 * width)) - 1
        self.dmem[offset : offset + width] = (value & mask).to_bytes(width, "little")

    def console_text(self) -> str:
        """Console output decoded as latin-1 text."""
        return self.console_buffer.decode("latin-1")


__all__ = [
    "DEFAULT_MEM_BYTES",
    "DEFAULT_CONSOLE_ADDRESS",
    "FaultReason",
    "SimulationFault",
    "ImageFormatError",
    "ImageTooLargeError",
    "MemImage",
    "MemSystem",
    "read_image",
]
