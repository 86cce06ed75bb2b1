"""Functional reference simulator.

Executes one RV32I instruction per step with no notion of time and
records a CommitRecord per instruction: the pc, the instruction word and
all 32 registers after write-back. The pipeline model must reproduce
this log exactly.

The instruction semantics here are written independently of the
datapath module so each model checks the other.

Usage:
    sim = FuncSim(mem)
    result = sim.run(max_steps=100_000)
    result.commits[-1].pc
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from src.core import event_bus
from src.core.isa import ACCESS_WIDTH, MASK32, DecodedInstr, Kind, decode, to_signed
from src.core.memsys import FaultReason, MemSystem, SimulationFault

logger = logging.getLogger(__name__)

NUM_REGS = 32


@dataclass
class ArchState:
    """Architectural state: pc and register file (x0 always zero)."""

    pc: int = 0
    regs: list[int] = field(default_factory=lambda: [0] * NUM_REGS)

    def copy(self) -> ArchState:
        return ArchState(self.pc, list(self.regs))


@dataclass(frozen=True)
class CommitRecord:
    """One retired instruction.

    Attributes:
        pc: Instruction address
        raw: Instruction word
        regs: All 32 registers after write-back
    """

    pc: int
    raw: int
    regs: tuple[int, ...]

    def to_line(self) -> str:
        """Commit-log line: pc, word and 32 registers as 8-digit hex, space-separated."""
        return " ".join(f"{v:08x}" for v in (self.pc, self.raw, *self.regs))

    @classmethod
    def from_line(cls, line: str) -> CommitRecord:
        """Parse a commit-log line.

        Raises:
            ValueError: Wrong field count or non-hex field
        """
        fields = line.split()
        if len(fields) != 2 + NUM_REGS:
            raise ValueError(f"Expected {2 + NUM_REGS} fields, got {len(fields)}")
        values = [int(f, 16) for f in fields]
        return cls(values[0], values[1], tuple(values[2:]))


@dataclass
class StepResult:
    """Outcome of one step."""

    record: CommitRecord
    state: ArchState
    halted: bool


@dataclass
class FuncRunResult:
    """Outcome of a run.

    Attributes:
        commits: Commit log in program order
        retired: Number of committed instructions (including the halt)
        halted: True if ECALL/EBREAK ended the run
    """

    commits: list[CommitRecord]
    retired: int
    halted: bool


def _load(mem: MemSystem, kind: Kind, addr: int) -> int:
    width = ACCESS_WIDTH[kind]
    value = mem.read_data(addr, width)
    if kind is Kind.LB:
        return value - 0x100 & MASK32 if value & 0x80 else value
    if kind is Kind.LH:
        return value - 0x10000 & MASK32 if value & 0x8000 else value
    return value


def _compute(instr: DecodedInstr, pc: int, a: int, b: int) -> Optional[int]:
    """Result written to rd, or None for kinds without one."""
    kind, imm = instr.kind, instr.imm
    if kind is Kind.LUI:
        return imm
    if kind is Kind.AUIPC:
        return (pc + imm) & MASK32
    if kind in (Kind.JAL, Kind.JALR):
        return (pc + 4) & MASK32
    if kind is Kind.ADD:
        return (a + b) & MASK32
    if kind is Kind.ADDI:
        return (a + imm) & MASK32
    if kind is Kind.SUB:
        return (a - b) & MASK32
    if kind in (Kind.SLT, Kind.SLTI):
        other = b if kind is Kind.SLT else imm
        return int(to_signed(a) < to_signed(other))
    if kind in (Kind.SLTU, Kind.SLTIU):
        other = b if kind is Kind.SLTU else imm
        return int(a < other)
    if kind in (Kind.XOR, Kind.XORI):
        return a ^ (b if kind is Kind.XOR else imm)
    if kind in (Kind.OR, Kind.ORI):
        return a | (b if kind is Kind.OR else imm)
    if kind in (Kind.AND, Kind.ANDI):
        return a & (b if kind is Kind.AND else imm)
    if kind in (Kind.SLL, Kind.SLLI):
        sh = (b if kind is Kind.SLL else imm) & 0x1F
        return (a << sh) & MASK32
    if kind in (Kind.SRL, Kind.SRLI):
        sh = (b if kind is Kind.SRL else imm) & 0x1F
        return a >> sh
    if kind in (Kind.SRA, Kind.SRAI):
        sh = (b if kind is Kind.SRA else imm) & 0x1F
        return (to_signed(a) >> sh) & MASK32
    return None


def _branch_taken(kind: Kind, a: int, b: int) -> bool:
    if kind is Kind.BEQ:
        return a == b
    if kind is Kind.BNE:
        return a != b
    if kind is Kind.BLT:
        return to_signed(a) < to_signed(b)
    if kind is Kind.BGE:
        return to_signed(a) >= to_signed(b)
    if kind is Kind.BLTU:
        return a < b
    return a >= b  # BGEU


def step(state: ArchState, mem: MemSystem) -> StepResult:
    """Execute the instruction at state.pc.

    The input state is not modified; a new ArchState is returned.

    Raises:
        SimulationFault: Fetch, illegal-instruction or data-access fault,
            with pc attached
    """
    pc = state.pc
    try:
        raw = mem.read_instr(pc)
    except SimulationFault as e:
        raise e.at(pc=pc)

    instr = decode(raw)
    if instr.is_illegal:
        raise SimulationFault(FaultReason.ILLEGAL_INSTRUCTION, pc=pc)

    regs = list(state.regs)
    a, b = regs[instr.rs1], regs[instr.rs2]
    next_pc = (pc + 4) & MASK32
    kind = instr.kind

    try:
        if instr.is_load:
            result: Optional[int] = _load(mem, kind, (a + instr.imm) & MASK32)
        elif instr.is_store:
            mem.write_data((a + instr.imm) & MASK32, ACCESS_WIDTH[kind], b)
            result = None
        else:
            result = _compute(instr, pc, a, b)
    except SimulationFault as e:
        raise e.at(pc=pc)

    if instr.is_cond_branch:
        if _branch_taken(kind, a, b):
            next_pc = (pc + instr.imm) & MASK32
    elif kind is Kind.JAL:
        next_pc = (pc + instr.imm) & MASK32
    elif kind is Kind.JALR:
        next_pc = (a + instr.imm) & MASK32 & ~1

    if result is not None and instr.rd != 0:
        regs[instr.rd] = result

    record = CommitRecord(pc, raw, tuple(regs))
    return StepResult(record, ArchState(next_pc, regs), instr.is_halt)


class FuncSim:
    """Stateful wrapper stepping an ArchState over a MemSystem.

    Example:
        sim = FuncSim(mem, entry=0)
        while not sim.halted:
            sim.step()
    """

    def __init__(self, mem: MemSystem, entry: int = 0) -> None:
        self.mem = mem
        self.state = ArchState(pc=entry)
        self.halted = False
        self.retired = 0

    def step(self) -> CommitRecord:
        """Execute one instruction and return its record.

        Raises:
            RuntimeError: If already halted
            SimulationFault: On a program fault
        """
        if self.halted:
            raise RuntimeError("Functional simulator already halted")
        try:
            result = step(self.state, self.mem)
        except SimulationFault as fault:
            event_bus.emit(event_bus.simulation_fault, sender=self, fault=fault)
            raise
        self.state = result.state
        self.retired += 1
        event_bus.emit(
            event_bus.instruction_committed, sender=self, record=result.record, cycle=None
        )
        if result.halted:
            self.halted = True
            event_bus.emit(
                event_bus.simulation_halted, sender=self, pc=result.record.pc, cycle=None
            )
        return result.record

    def run(self, max_steps: int) -> FuncRunResult:
        """Step until halt or max_steps instructions.

        Raises:
            ValueError: If max_steps is not positive
            SimulationFault: On a program fault
        """
        if max_steps <= 0:
            raise ValueError(f"max_steps must be positive, got {max_steps}")
        commits: list[CommitRecord] = []
        while not self.halted and len(commits) < max_steps:
            commits.append(self.step())
        if self.halted:
            logger.debug(f"Functional run halted after {self.retired} instructions")
        else:
            logger.warning(f"Functional run stopped at step budget {max_steps}")
        return FuncRunResult(commits, len(commits), self.halted)


def run(state: ArchState, mem: MemSystem, max_steps: int) -> FuncRunResult:
    """Run from an explicit state (the state object is left untouched)."""
    sim = FuncSim(mem, entry=state.pc)
    sim.state = state.copy()
    return sim.run(max_steps)


__all__ = [
    "NUM_REGS",
    "ArchState",
    "CommitRecord",
    "StepResult",
    "FuncRunResult",
    "step",
    "run",
    "FuncSim",
]
