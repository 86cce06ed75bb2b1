"""Random-program lockstep fuzzing of every preset.

Set RVSIM_FUZZ_PROGRAMS to change the size of the slow run.
"""

import os
import random

import pytest

from src.core.asm import assemble
from src.core.config import PRESETS, SimConfig
from src.core.funcsim import FuncSim
from src.core.isa import decode
from src.core.lockstep import CommitChannel
from src.core.pipeline import Machine, build_machine

FUZZ_PROGRAMS = int(os.environ.get("RVSIM_FUZZ_PROGRAMS", "10000"))
SMOKE_PROGRAMS = 40
MAX_CYCLES = 200_000

ALU_RR = ["add", "sub", "sll", "slt", "sltu", "xor", "srl", "sra", "or", "and"]
ALU_RI = ["addi", "slti", "sltiu", "xori", "ori", "andi"]
SHIFT_I = ["slli", "srli", "srai"]
LOADS = [("lw", 4), ("lh", 2), ("lhu", 2), ("lb", 1), ("lbu", 1)]
STORES = [("sw", 4), ("sh", 2), ("sb", 1)]
BRANCHES = ["beq", "bne", "blt", "bge", "bltu", "bgeu"]

# x24 holds auipc results for jalr, x26 is the loop counter
DEST_REGS = [f"x{i}" for i in range(24)]
SRC_REGS = [f"x{i}" for i in range(32)]


class ProgramGenerator:
    """Builds random, always-terminating RV32I programs from one seed."""

    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)
        self.labels = 0

    def _label(self) -> str:
        self.labels += 1
        return f"L{self.labels}"

    def simple(self) -> str:
        """One ALU, load or store instruction."""
        rng = self.rng
        rd, rs1, rs2 = rng.choice(DEST_REGS), rng.choice(SRC_REGS), rng.choice(SRC_REGS)
        roll = rng.random()
        if roll < 0.3:
            return f"{rng.choice(ALU_RR)} {rd}, {rs1}, {rs2}"
        if roll < 0.5:
            return f"{rng.choice(ALU_RI)} {rd}, {rs1}, {rng.randint(-2048, 2047)}"
        if roll < 0.6:
            return f"{rng.choice(SHIFT_I)} {rd}, {rs1}, {rng.randint(0, 31)}"
        if roll < 0.65:
            return f"lui {rd}, {rng.randint(0, 0xFFFFF)}"
        if roll < 0.7:
            return f"li {rd}, {rng.randint(-(2**31), 2**31 - 1)}"
        if roll < 0.85:
            op, width = rng.choice(LOADS)
            return f"{op} {rd}, {rng.randrange(0, 256, width)}(x0)"
        op, width = rng.choice(STORES)
        return f"{op} {rs2}, {rng.randrange(0, 256, width)}(x0)"

    def block(self) -> list[str]:
        rng = self.rng
        roll = rng.random()
        body = [self.simple() for _ in range(rng.randint(0, 3))]
        if roll < 0.4:
            return [self.simple() for _ in range(rng.randint(1, 4))]
        if roll < 0.65:
            label = self._label()
            a, b = rng.choice(SRC_REGS), rng.choice(SRC_REGS)
            return [f"{rng.choice(BRANCHES)} {a}, {b}, {label}", *body, f"{label}:"]
        if roll < 0.75:
            label = self._label()
            return [f"jal {rng.choice(DEST_REGS)}, {label}", *body, f"{label}:"]
        if roll < 0.85:
            skip = len(body)
            return ["auipc x24, 0", f"jalr {rng.choice(DEST_REGS)}, x24, {8 + 4 * skip}", *body]
        label = self._label()
        loop_body = [self.simple() for _ in range(rng.randint(1, 4))]
        return [
            f"li x26, {rng.randint(1, 8)}",
            f"{label}:",
            *loop_body,
            "addi x26, x26, -1",
            f"bnez x26, {label}",
        ]

    def program(self) -> str:
        lines: list[str] = []
        for _ in range(self.rng.randint(4, 16)):
            lines.extend(self.block())
        lines.append("ecall")
        lines.append(".data")
        for _ in range(8):
            words = ", ".join(hex(self.rng.getrandbits(32)) for _ in range(8))
            lines.append(f".word {words}")
        return "\n".join(lines) + "\n"


def build(seed: int) -> Machine:
    program = assemble(ProgramGenerator(seed).program())
    config = SimConfig.from_preset(list(PRESETS)[seed % len(PRESETS)])
    return build_machine(config, program.text, program.data)


def check_program(seed: int) -> None:
    machine = build(seed)
    reference = FuncSim(machine.mem.copy())
    with CommitChannel(machine, reference) as channel:
        result = machine.run_to_halt(MAX_CYCLES)

    context = f"seed {seed} ({machine.config.name})"
    assert channel.divergence is None, f"{context}: {channel.divergence}"
    assert result.halted and reference.halted, context
    assert channel.index == len(result.commits)

    stats = result.stats
    assert stats.cycles == stats.expected_cycles(), context
    assert all(record.regs[0] == 0 for record in result.commits), context
    assert machine.predictor.counters_in_range(), context
    control = sum(1 for record in result.commits if decode(record.raw).is_control)
    assert stats.pred_hits + stats.pred_misses == control, context

    if seed % 100 == 0:
        again = build(seed).run_to_halt(MAX_CYCLES)
        assert again.commits == result.commits, context
        assert again.stats == stats, context


class TestGenerator:
    """Test the program generator itself."""

    def test_deterministic(self) -> None:
        """Test the same seed yields the same source."""
        assert ProgramGenerator(7).program() == ProgramGenerator(7).program()
        assert ProgramGenerator(7).program() != ProgramGenerator(8).program()

    def test_programs_assemble_and_halt(self) -> None:
        """Test generated programs halt on the functional simulator."""
        for seed in range(20):
            machine = build(seed)
            assert FuncSim(machine.mem).run(100_000).halted


class TestLockstepFuzz:
    """Lockstep random programs across every preset."""

    @pytest.mark.parametrize("seed", range(SMOKE_PROGRAMS))
    def test_smoke(self, seed: int) -> None:
        """Test a small fixed set of programs."""
        check_program(seed)

    @pytest.mark.slow
    def test_many_programs(self) -> None:
        """Test RVSIM_FUZZ_PROGRAMS programs, each preset in turn."""
        for seed in range(FUZZ_PROGRAMS):
            check_program(seed)
