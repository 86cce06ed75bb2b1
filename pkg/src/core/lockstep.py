"""Lockstep verification of the pipeline against the functional simulator.

Both models run the same images from identical, independent memories.
Every pipeline commit steps the functional simulator once and the two
commit records are compared field by field: pc, instruction word, then
x0..x31. The first difference stops the run and is reported as a
Divergence. A difference is a failing result, never an exception.

Faults count as equivalent when both models fault with the same reason,
pc and address after identical commit prefixes.

Usage:
    result = lockstep(SimConfig.from_preset("rvp-optif"), program.text, program.data)
    if not result.passed:
        print(result.divergence)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from src.core import event_bus
from src.core.config import SimConfig
from src.core.funcsim import NUM_REGS, CommitRecord, FuncSim
from src.core.logging_config import get_logger
from src.core.memsys import MemImage, SimulationFault
from src.core.pipeline import Machine, RunStats, RunStatus, build_machine
from src.core.safe_write import safe_write_lines

logger = get_logger(__name__, component="lockstep")


@dataclass(frozen=True)
class Divergence:
    """First difference between two commit streams.

    Attributes:
        index: 0-based position in the commit stream
        pc: pc of the reference record (or of the candidate if the
            reference has none)
        field: "pc", "instr", "x<n>", "length" or "fault"
        expected: Reference value (None if the reference had no record)
        actual: Candidate value (None if the candidate had no record)
        detail: Extra context (fault descriptions)
    """

    index: int
    pc: int
    field: str
    expected: Optional[int]
    actual: Optional[int]
    detail: str = ""

    def __str__(self) -> str:
        def fmt(v: Optional[int]) -> str:
            return "<none>" if v is None else f"{v:#010x}"

        msg = (
            f"commit {self.index} (pc {self.pc:#010x}): {self.field} "
            f"expected {fmt(self.expected)}, got {fmt(self.actual)}"
        )
        if self.detail:
            msg += f" [{self.detail}]"
        return msg


def compare_records(index: int, ref: CommitRecord, dut: CommitRecord) -> Optional[Divergence]:
    """First differing field of two records, or None if they match."""
    if ref.pc != dut.pc:
        return Divergence(index, ref.pc, "pc", ref.pc, dut.pc)
    if ref.raw != dut.raw:
        return Divergence(index, ref.pc, "instr", ref.raw, dut.raw)
    for reg in range(NUM_REGS):
        if ref.regs[reg] != dut.regs[reg]:
            return Divergence(index, ref.pc, f"x{reg}", ref.regs[reg], dut.regs[reg])
    return None


def compare_logs(
    reference: Sequence[CommitRecord], candidate: Sequence[CommitRecord]
) -> Optional[Divergence]:
    """Compare two complete commit logs.

    Returns:
        The first divergence, a "length" divergence if one log is a
        strict prefix of the other, or None if identical
    """
    for index, (ref, dut) in enumerate(zip(reference, candidate)):
        divergence = compare_records(index, ref, dut)
        if divergence is not None:
            return divergence
    if len(reference) != len(candidate):
        index = min(len(reference), len(candidate))
        longer = reference if len(reference) > len(candidate) else candidate
        return Divergence(index, longer[index].pc, "length", len(reference), len(candidate))
    return None


def read_commit_log(path: str | Path) -> list[CommitRecord]:
    """Read a commit log written by write_commit_log (or an external model).

    Blank lines and lines starting with '#' are skipped.

    Raises:
        ValueError: Malformed line, with its line number
    """
    records: list[CommitRecord] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                records.append(CommitRecord.from_line(text))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from e
    return records


def write_commit_log(path: str | Path, records: Iterable[CommitRecord]) -> Path:
    """Write one line per record: pc, instruction word, x0..x31 in hex."""
    return safe_write_lines(path, (record.to_line() for record in records))


class CommitChannel:
    """Steps a functional simulator for every commit of one pipeline.

    Subscribes to the machine's instruction_committed signal. After the
    first divergence (or a reference fault) the channel stops stepping
    and keeps the divergence for the caller.

    Example:
        with CommitChannel(machine, FuncSim(mem_copy)) as channel:
            while not machine.halted and channel.divergence is None:
                machine.step_cycle()
    """

    def __init__(self, machine: Machine, reference: FuncSim) -> None:
        self.machine = machine
        self.reference = reference
        self.index = 0
        self.divergence: Optional[Divergence] = None
        self.reference_fault: Optional[SimulationFault] = None
        self._subscription = event_bus.SignalSubscription(
            event_bus.instruction_committed, self._on_commit, sender=machine
        )

    def _on_commit(self, sender: Any, record: CommitRecord, **kwargs: Any) -> None:
        if self.divergence is not None:
            return
        try:
            ref = self.reference.step()
        except SimulationFault as fault:
            self.reference_fault = fault
            self._diverge(
                Divergence(
                    self.index, record.pc, "fault", None, record.raw, f"reference: {fault}"
                )
            )
            return
        divergence = compare_records(self.index, ref, record)
        if divergence is not None:
            self._diverge(divergence)
            return
        self.index += 1

    def _diverge(self, divergence: Divergence) -> None:
        self.divergence = divergence
        logger.warning(f"Divergence: {divergence}")
        event_bus.emit(event_bus.lockstep_diverged, sender=self, divergence=divergence)

    def check_fault(self, fault: SimulationFault) -> Optional[Divergence]:
        """Step the reference once more and check it faults like the pipeline did.

        Returns:
            None if the reference raises a same_as fault, else the divergence
        """
        if self.divergence is not None:
            return self.divergence
        try:
            ref = self.reference.step()
        except SimulationFault as ref_fault:
            self.reference_fault = ref_fault
            if ref_fault.same_as(fault):
                return None
            self._diverge(
                Divergence(
                    self.index,
                    fault.pc or 0,
                    "fault",
                    ref_fault.pc,
                    fault.pc,
                    f"reference: {ref_fault}; pipeline: {fault}",
                )
            )
            return self.divergence
        self._diverge(
            Divergence(self.index, ref.pc, "fault", ref.raw, None, f"pipeline: {fault}")
        )
        return self.divergence

    def connect(self) -> None:
        self._subscription.connect()

    def disconnect(self) -> None:
        self._subscription.disconnect()

    def __enter__(self) -> CommitChannel:
        self.connect()
        return self

    def __exit__(self, *args: Any) -> None:
        self.disconnect()


@dataclass
class LockstepResult:
    """Outcome of one lockstep run.

    Attributes:
        passed: Streams matched and the run ended in a halt or in
            equivalent faults
        divergence: First difference, if any
        commits: Records compared
        status: Pipeline run status (None if it faulted)
        stats: Pipeline counters
        fault: Pipeline fault, if any
        reference_fault: Functional simulator fault, if any
        console: Pipeline console output
    """

    passed: bool
    divergence: Optional[Divergence]
    commits: int
    status: Optional[RunStatus]
    stats: RunStats
    fault: Optional[SimulationFault] = None
    reference_fault: Optional[SimulationFault] = None
    console: str = ""

    @property
    def faulted(self) -> bool:
        return self.fault is not None or self.reference_fault is not None

    def summary(self) -> str:
        if self.divergence is not None:
            return f"FAIL {self.divergence}"
        if self.status is RunStatus.BUDGET_EXHAUSTED:
            return f"FAIL cycle budget exhausted after {self.commits} commits"
        if self.fault is not None:
            return f"FAULT (both models) {self.fault}"
        return f"PASS {self.commits} commits"


def lockstep(
    config: SimConfig,
    text: MemImage,
    data: Optional[MemImage] = None,
    *,
    entry: int = 0,
    max_cycles: Optional[int] = None,
) -> LockstepResult:
    """Run the pipeline and the functional simulator in lockstep.

    Args:
        config: Pipeline configuration
        text: Instruction image
        data: Optional data image
        entry: Start pc for both models
        max_cycles: Pipeline cycle budget (default config.max_cycles)

    Returns:
        LockstepResult; a divergence or an unfinished run is a failure
    """
    machine = build_machine(config, text, data, entry=entry)
    reference = FuncSim(machine.mem.copy(), entry=entry)
    budget = config.max_cycles if max_cycles is None else max_cycles

    status: Optional[RunStatus] = None
    fault: Optional[SimulationFault] = None
    with CommitChannel(machine, reference) as channel:
        try:
            while not machine.halted and machine.cycle < budget and channel.divergence is None:
                machine.step_cycle()
        except SimulationFault as e:
            fault = e
            channel.check_fault(e)
        else:
            if machine.halted:
                status = RunStatus.HALTED
            elif channel.divergence is None:
                status = RunStatus.BUDGET_EXHAUSTED
                logger.warning(f"Cycle budget {budget} exhausted in {config.name}")

    divergence = channel.divergence
    passed = divergence is None and (status is RunStatus.HALTED or fault is not None)
    if passed:
        logger.debug(f"{config.name}: {channel.index} commits match")
    return LockstepResult(
        passed,
        divergence,
        channel.index,
        status,
        machine.stats,
        fault,
        channel.reference_fault,
        machine.mem.console_text(),
    )


__all__ = [
    "Divergence",
    "compare_records",
    "compare_logs",
    "read_commit_log",
    "write_commit_log",
    "CommitChannel",
    "LockstepResult",
    "lockstep",
]
