"""Cycle-accurate five-stage pipeline (If, Id, Ex, Ma, Wb).

Each call to `Machine.step_cycle` advances every stage once. Stages are
evaluated from Wb back to If against the latches of the previous cycle,
so a stage always sees what the older stage held at the start of the
cycle:

- Wb writes the register file before Id reads it (same-cycle
  write-before-read), and commits.
- Ma performs loads and stores and checks the control transfer's
  prediction. A misprediction (w_bmis) squashes If, Id and Ex and
  redirects fetch to the correct pc, a 3-cycle penalty.
- Ex forwards operands from Ma and Wb, runs the ALU and resolves
  control transfers.
- Id decodes, reads registers and detects load-use hazards (or consumes
  the flag the If stage computed early). A hazard inserts one bubble
  into IdEx and holds If and Id (w_stall).
- If fetches, consults the branch predictor and picks the next pc by
  priority: correct pc on bmis, held pc on stall, BTB target on a taken
  prediction (w_btkn), else pc + 4.

Usage:
    machine = Machine(SimConfig.from_preset("rvp-optif"), mem)
    result = machine.run_to_halt(max_cycles=1_000_000)
    result.stats.ipc
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, NoReturn, Optional, Protocol, TextIO

from src.core import event_bus
from src.core.config import SimConfig
from src.core.datapath import (
    AluOp,
    BranchOutcome,
    Datapath,
    alu_op_for,
    load_op_for,
    resolve_branch,
)
from src.core.funcsim import CommitRecord
from src.core.isa import (
    ACCESS_WIDTH,
    MASK32,
    DecodedInstr,
    Kind,
    decode,
    decode_if,
)
from src.core.logging_config import get_logger
from src.core.memsys import FaultReason, MemSystem, SimulationFault
from src.core.predictor import NOT_TAKEN, BranchPredictor, Prediction, PredictorMode
from src.core.variants import get_variant

logger = get_logger(__name__, component="pipeline")

# Placeholder carried by slots that hold no real instruction (fetch faults)
_NO_INSTR = decode(0)


class RunStatus(str, Enum):
    """How a run ended."""

    HALTED = "halted"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class IfId:
    """If -> Id latch.

    Attributes:
        valid: False for a bubble
        pc: Fetch address
        raw: Fetched word (0 when the fetch faulted)
        prediction: Fetch-time prediction
        fault: Fetch fault to raise if this slot commits
        load_use: Early load-use flag computed in If (hazard_detect="if")
    """

    valid: bool = False
    pc: int = 0
    raw: int = 0
    prediction: Prediction = NOT_TAKEN
    fault: Optional[SimulationFault] = None
    load_use: bool = False


@dataclass(frozen=True)
class IdEx:
    """Id -> Ex latch."""

    valid: bool = False
    pc: int = 0
    instr: DecodedInstr = _NO_INSTR
    rs1_val: int = 0
    rs2_val: int = 0
    alu_sel: Any = AluOp.ADD
    prediction: Prediction = NOT_TAKEN
    fault: Optional[SimulationFault] = None


@dataclass(frozen=True)
class ExMa:
    """Ex -> Ma latch.

    Attributes:
        result: ALU output (effective address for memory ops, link
            address for jumps)
        store_val: Forwarded rs2 for stores
        outcome: Resolved direction/target for control transfers
        npc_true: Correct next pc
        mispredicted: Fetch after this instruction went the wrong way
    """

    valid: bool = False
    pc: int = 0
    instr: DecodedInstr = _NO_INSTR
    result: int = 0
    store_val: int = 0
    prediction: Prediction = NOT_TAKEN
    outcome: Optional[BranchOutcome] = None
    npc_true: int = 0
    mispredicted: bool = False
    fault: Optional[SimulationFault] = None


@dataclass(frozen=True)
class MaWb:
    """Ma -> Wb latch."""

    valid: bool = False
    pc: int = 0
    instr: DecodedInstr = _NO_INSTR
    value: int = 0
    fault: Optional[SimulationFault] = None


BUBBLE_IFID = IfId()
BUBBLE_IDEX = IdEx()
BUBBLE_EXMA = ExMa()
BUBBLE_MAWB = MaWb()


@dataclass
class PipelineState:
    """Fetch pc plus the four inter-stage latches and this cycle's signals."""

    r_pc: int = 0
    ifid: IfId = BUBBLE_IFID
    idex: IdEx = BUBBLE_IDEX
    exma: ExMa = BUBBLE_EXMA
    mawb: MaWb = BUBBLE_MAWB
    w_bmis: bool = False
    w_stall: bool = False
    w_btkn: bool = False


@dataclass
class RunStats:
    """Counters for one run.

    `retired` counts every commit including the halting instruction, so
    cycles == retired + 4 + 3 * flushes + load_use_stalls for any run
    that halts.
    """

    cycles: int = 0
    retired: int = 0
    pred_hits: int = 0
    pred_misses: int = 0
    load_use_stalls: int = 0
    flushes: int = 0
    halted_at_cycle: Optional[int] = None
    invalid_predictions: int = 0

    @property
    def ipc(self) -> float:
        return self.retired / self.cycles if self.cycles else 0.0

    @property
    def hit_rate(self) -> Optional[float]:
        total = self.pred_hits + self.pred_misses
        return self.pred_hits / total if total else None

    def expected_cycles(self) -> int:
        """Cycle count implied by the accounting identity."""
        return self.retired + 4 + 3 * self.flushes + self.load_use_stalls


@dataclass(frozen=True)
class CycleEvent:
    """What happened in one cycle.

    Attributes:
        cycle: 1-based cycle number
        stages: pc occupying (If, Id, Ex, Ma, Wb), None for a bubble
        bmis: Misprediction redirect fired
        stall: Load-use stall fired
        btkn: Fetch followed a taken prediction
    """

    cycle: int
    stages: tuple[Optional[int], ...]
    bmis: bool
    stall: bool
    btkn: bool

    def to_line(self) -> str:
        """Trace line: cycle, five stage pcs (-------- for bubbles), bmis stall btkn."""
        cols = " ".join("--------" if pc is None else f"{pc:08x}" for pc in self.stages)
        return f"{self.cycle} {cols} {int(self.bmis)} {int(self.stall)} {int(self.btkn)}"


TRACE_HEADER = "# cycle IF ID EX MA WB bmis stall btkn"


@dataclass
class RunResult:
    """Outcome of run_to_halt."""

    commits: list[CommitRecord]
    stats: RunStats
    status: RunStatus

    @property
    def halted(self) -> bool:
        return self.status is RunStatus.HALTED


@dataclass(frozen=True)
class Bypass:
    """A result available for forwarding: destination register and value."""

    rd: int
    value: int


class ForwardFn(Protocol):
    def __call__(
        self,
        instr: DecodedInstr,
        rs1_val: int,
        rs2_val: int,
        ma: Optional[Bypass],
        wb: Optional[Bypass],
    ) -> tuple[int, int]: ...


def forward_operands(
    instr: DecodedInstr,
    rs1_val: int,
    rs2_val: int,
    ma: Optional[Bypass],
    wb: Optional[Bypass],
) -> tuple[int, int]:
    """Resolve Ex-stage operands through the bypass network.

    Per source register the Ma-stage result wins over the Wb-stage
    result, which wins over the value read from the register file in Id.

    Args:
        instr: Instruction in Ex
        rs1_val: rs1 as read in Id
        rs2_val: rs2 as read in Id (store data for stores)
        ma: Result of the instruction in Ma, if it writes a register
        wb: Result of the instruction in Wb, if it writes a register

    Returns:
        (rs1, rs2) operand values
    """

    def pick(reg: int, reads: bool, value: int) -> int:
        if not reads or reg == 0:
            return value
        if ma is not None and ma.rd == reg:
            return ma.value
        if wb is not None and wb.rd == reg:
            return wb.value
        return value

    return (
        pick(instr.rs1, instr.reads_rs1, rs1_val),
        pick(instr.rs2, instr.reads_rs2, rs2_val),
    )


def detect_load_use(consumer: Any, producer: DecodedInstr) -> bool:
    """True if consumer reads the register producer is loading.

    Args:
        consumer: decode_if() result (If-stage detection) or DecodedInstr
        producer: Instruction one stage ahead of the consumer

    Example:
        detect_load_use(decode_if(add_x6_x5_x1), decode(lw_x5))  # True
    """
    if not producer.is_load or producer.rd == 0:
        return False
    return (consumer.reads_rs1 and consumer.rs1 == producer.rd) or (
        consumer.reads_rs2 and consumer.rs2 == producer.rd
    )


def next_pc(
    *,
    pc_true: int,
    hold: int,
    btb_target: int,
    pc_plus_4: int,
    w_bmis: bool,
    w_stall: bool,
    w_btkn: bool,
) -> int:
    """Select the next fetch pc by priority: bmis, stall, btkn, pc + 4."""
    if w_bmis:
        return pc_true
    if w_stall:
        return hold
    if w_btkn:
        return btb_target
    return pc_plus_4


def _operands(instr: DecodedInstr, pc: int, v1: int, v2: int) -> tuple[int, int]:
    """ALU inputs for an instruction given its forwarded register values."""
    kind = instr.kind
    if kind is Kind.LUI:
        return 0, instr.imm
    if kind is Kind.AUIPC:
        return pc, instr.imm
    if instr.is_jump:
        return pc, 4
    if instr.reads_rs2 and not instr.is_store:
        return v1, v2
    return v1, instr.imm


class Machine:
    """A pipeline with its memories, register file and predictor.

    Attributes:
        config: Configuration the machine was built from
        mem: Instruction/data memories (owned)
        regs: Register file
        predictor: Branch predictor
        state: Pipeline latches and signals
        stats: Run counters
        commits: Commit log
        halted: An ECALL/EBREAK has committed
    """

    def __init__(self, config: SimConfig, mem: MemSystem, *, entry: int = 0) -> None:
        config.validate()
        self.config = config
        self.mem = mem
        self.regs = [0] * 32
        self.predictor = BranchPredictor(
            PredictorMode(config.predictor_mode), config.pht_entries, config.btb_entries
        )
        self.datapath = Datapath(config.alu_impl, config.extend_impl)
        self.forward: ForwardFn = get_variant(f"forward.{config.forward_impl}").impl
        self.state = PipelineState(r_pc=entry)
        self.stats = RunStats()
        self.commits: list[CommitRecord] = []
        self.halted = False
        self.cycle = 0
        self._frozen = False
        self._early_hazard = config.hazard_detect == "if"
        self._pipelined = self.predictor.mode is PredictorMode.PIPELINED

    # -- stages ----------------------------------------------------------

    def _writeback(self, w: MaWb, cycle: int) -> bool:
        """Commit the Wb instruction. Returns True if it halts the machine."""
        if not w.valid:
            return False
        if w.fault is not None:
            self._fault(w.fault.at(pc=w.pc, cycle=cycle))
        instr = w.instr
        if instr.writes_rd and instr.rd != 0:
            self.regs[instr.rd] = w.value & MASK32
        record = CommitRecord(w.pc, instr.raw, tuple(self.regs))
        self.commits.append(record)
        self.stats.retired += 1
        event_bus.emit(event_bus.instruction_committed, sender=self, record=record, cycle=cycle)
        return instr.is_halt

    def _memory(self, m: ExMa, cycle: int) -> MaWb:
        if not m.valid:
            return BUBBLE_MAWB
        if m.fault is not None:
            return MaWb(True, m.pc, m.instr, 0, m.fault)

        instr = m.instr
        value = m.result
        try:
            if instr.is_load:
                width = ACCESS_WIDTH[instr.kind]
                word = self.mem.read_word(m.result, width)
                sel = self.datapath.extend_select(load_op_for(instr.kind), m.result & 3)
                value = self.datapath.extend(word, sel)
            elif instr.is_store:
                self.mem.write_data(m.result, ACCESS_WIDTH[instr.kind], m.store_val)
        except SimulationFault as fault:
            self._fault(fault.at(pc=m.pc, cycle=cycle))

        if instr.is_control:
            assert m.outcome is not None
            self.predictor.update(
                m.pc,
                instr.kind,
                taken=m.outcome.taken,
                target=m.outcome.target,
                prediction=m.prediction,
                mispredicted=m.mispredicted,
            )
            if m.mispredicted:
                self.stats.pred_misses += 1
            else:
                self.stats.pred_hits += 1
            event_bus.emit(
                event_bus.branch_resolved,
                sender=self,
                pc=m.pc,
                kind=instr.kind,
                predicted_taken=m.prediction.taken,
                taken=m.outcome.taken,
                target=m.outcome.target,
                hit=not m.mispredicted,
                cycle=cycle,
            )
        return MaWb(True, m.pc, instr, value)

    def _execute(self, x: IdEx, ma: ExMa, wb: MaWb) -> ExMa:
        if not x.valid:
            return BUBBLE_EXMA
        if x.fault is not None:
            return ExMa(True, x.pc, x.instr, fault=x.fault)

        instr = x.instr
        ma_bypass = (
            Bypass(ma.instr.rd, ma.result)
            if ma.valid and ma.fault is None and ma.instr.writes_rd and not ma.instr.is_load
            else None
        )
        wb_bypass = (
            Bypass(wb.instr.rd, wb.value)
            if wb.valid and wb.fault is None and wb.instr.writes_rd
            else None
        )
        v1, v2 = self.forward(instr, x.rs1_val, x.rs2_val, ma_bypass, wb_bypass)

        a, b = _operands(instr, x.pc, v1, v2)
        result = self.datapath.alu(a, b, x.alu_sel)

        outcome = resolve_branch(instr, v1, v2, x.pc) if instr.is_control else None
        npc_true = outcome.target if outcome is not None else (x.pc + 4) & MASK32
        mispredicted = x.prediction.next_pc(x.pc) != npc_true
        return ExMa(True, x.pc, instr, result, v2, x.prediction, outcome, npc_true, mispredicted)

    def _decode(self, f: IfId, ex: IdEx) -> tuple[IdEx, bool]:
        """Id stage. Returns (new IdEx, stall)."""
        if not f.valid:
            return BUBBLE_IDEX, False

        if f.fault is not None:
            self._frozen = True
            return IdEx(True, f.pc, _NO_INSTR, prediction=f.prediction, fault=f.fault), False

        instr = decode(f.raw)
        if self._early_hazard:
            stall = f.load_use
        else:
            stall = ex.valid and ex.fault is None and detect_load_use(instr, ex.instr)
        if stall:
            return BUBBLE_IDEX, True

        fault = None
        if instr.is_illegal:
            fault = SimulationFault(FaultReason.ILLEGAL_INSTRUCTION, pc=f.pc)
        if instr.is_halt or instr.is_illegal:
            self._frozen = True

        sel = self.datapath.alu_select(alu_op_for(instr.kind))
        idex = IdEx(
            True,
            f.pc,
            instr,
            self.regs[instr.rs1],
            self.regs[instr.rs2],
            sel,
            f.prediction,
            fault,
        )
        return idex, False

    def _fetch(self, pc: int, id_slot: IfId) -> IfId:
        """If stage for an accepted fetch at pc."""
        fault = None
        try:
            raw = self.mem.read_instr(pc)
        except SimulationFault as e:
            raw, fault = 0, e.at(pc=pc)

        prediction = self.predictor.predict(pc)
        self.predictor.accept(prediction)
        if self._pipelined:
            if not prediction.valid:
                self.stats.invalid_predictions += 1
            self.predictor.prestage(pc)

        load_use = False
        if self._early_hazard and fault is None and id_slot.valid and id_slot.fault is None:
            load_use = detect_load_use(decode_if(raw), decode(id_slot.raw))
        return IfId(True, pc, raw, prediction, fault, load_use)

    # -- cycle -----------------------------------------------------------

    def _fault(self, fault: SimulationFault) -> NoReturn:
        logger.warning(f"Fault: {fault}")
        event_bus.emit(event_bus.simulation_fault, sender=self, fault=fault)
        raise fault

    def step_cycle(self) -> CycleEvent:
        """Advance every stage by one cycle.

        Returns:
            CycleEvent describing the cycle

        Raises:
            RuntimeError: If the machine already halted
            SimulationFault: Program fault, with pc and cycle attached
        """
        if self.halted:
            raise RuntimeError("Machine already halted")

        s = self.state
        cycle = self.cycle + 1
        self.cycle = cycle
        self.stats.cycles = cycle
        occupancy = (
            s.ifid.pc if s.ifid.valid else None,
            s.idex.pc if s.idex.valid else None,
            s.exma.pc if s.exma.valid else None,
            s.mawb.pc if s.mawb.valid else None,
        )

        if self._writeback(s.mawb, cycle):
            self.halted = True
            self.stats.halted_at_cycle = cycle
            s.w_bmis = s.w_stall = s.w_btkn = False
            event = CycleEvent(cycle, (None, *occupancy), False, False, False)
            event_bus.emit(event_bus.cycle_completed, sender=self, event=event)
            event_bus.emit(event_bus.simulation_halted, sender=self, pc=s.mawb.pc, cycle=cycle)
            logger.info(
                f"Halted at cycle {cycle}: {self.stats.retired} retired, "
                f"IPC {self.stats.ipc:.3f}"
            )
            return event

        mawb = self._memory(s.exma, cycle)
        bmis = s.exma.valid and s.exma.fault is None and s.exma.mispredicted
        pc_true = s.exma.npc_true

        stall = btkn = False
        fetch_pc: Optional[int] = s.r_pc
        btb_target = 0
        if bmis:
            # If, Id and Ex are squashed
            self.stats.flushes += 1
            self._frozen = False
            exma, idex, ifid = BUBBLE_EXMA, BUBBLE_IDEX, BUBBLE_IFID
            event_bus.emit(
                event_bus.pipeline_flushed, sender=self, pc=s.exma.pc, pc_true=pc_true, cycle=cycle
            )
            if self._pipelined:
                self.predictor.prestage(pc_true)
        else:
            exma = self._execute(s.idex, s.exma, s.mawb)
            idex, stall = self._decode(s.ifid, s.idex)
            if stall:
                self.stats.load_use_stalls += 1
                event_bus.emit(event_bus.load_use_stalled, sender=self, pc=s.ifid.pc, cycle=cycle)
                ifid = replace(s.ifid, load_use=False)
                if self._pipelined:
                    self.predictor.prestage(s.r_pc)
            elif self._frozen:
                ifid, fetch_pc = BUBBLE_IFID, None
            else:
                ifid = self._fetch(s.r_pc, s.ifid)
                btkn = ifid.prediction.taken
                btb_target = ifid.prediction.target

        held = not bmis and (stall or self._frozen)
        r_pc = next_pc(
            pc_true=pc_true,
            hold=s.r_pc,
            btb_target=btb_target,
            pc_plus_4=(s.r_pc + 4) & MASK32,
            w_bmis=bmis,
            w_stall=held,
            w_btkn=btkn,
        )

        self.state = PipelineState(r_pc, ifid, idex, exma, mawb, bmis, stall, btkn)
        event = CycleEvent(cycle, (fetch_pc, *occupancy), bmis, stall, btkn)
        event_bus.emit(event_bus.cycle_completed, sender=self, event=event)
        return event

    def run_to_halt(self, max_cycles: Optional[int] = None) -> RunResult:
        """Step until the program halts or the cycle budget runs out.

        Args:
            max_cycles: Budget (defaults to config.max_cycles)

        Returns:
            RunResult; status BUDGET_EXHAUSTED if the budget ran out

        Raises:
            ValueError: If max_cycles is not positive
            SimulationFault: Program fault
        """
        budget = self.config.max_cycles if max_cycles is None else max_cycles
        if budget <= 0:
            raise ValueError(f"max_cycles must be positive, got {budget}")

        logger.debug(f"Run start: {self.config.name} at pc {self.state.r_pc:#010x}")
        while not self.halted and self.cycle < budget:
            self.step_cycle()

        if self.halted:
            status = RunStatus.HALTED
        else:
            status = RunStatus.BUDGET_EXHAUSTED
            logger.warning(f"Cycle budget {budget} exhausted after {self.stats.retired} commits")
        return RunResult(list(self.commits), self.stats, status)


class TraceWriter:
    """Writes a per-cycle trace of one machine to a text stream.

    Example:
        with open("run.trace", "w") as f, TraceWriter(machine, f):
            machine.run_to_halt()
    """

    def __init__(self, machine: Machine, stream: TextIO, *, header: bool = True) -> None:
        self.machine = machine
        self.stream = stream
        self.header = header
        self._subscription = event_bus.SignalSubscription(
            event_bus.cycle_completed, self._on_cycle, sender=machine
        )

    def _on_cycle(self, sender: Any, event: CycleEvent, **kwargs: Any) -> None:
        self.stream.write(event.to_line() + "\n")

    def __enter__(self) -> TraceWriter:
        if self.header:
            self.stream.write(TRACE_HEADER + "\n")
        self._subscription.connect()
        return self

    def __exit__(self, *args: Any) -> None:
        self._subscription.disconnect()


def build_machine(
    config: SimConfig, text: Any, data: Any = None, *, entry: int = 0, echo: Any = None
) -> Machine:
    """Machine with fresh memories sized from config and images loaded.

    Args:
        config: Machine configuration
        text: MemImage for instruction memory
        data: Optional MemImage for data memory
        entry: Initial fetch pc
        echo: Console echo callback (default: none)
    """
    mem = MemSystem(
        config.imem_bytes,
        config.dmem_bytes,
        console_address=config.console_address,
        console_echo=echo,
    )
    mem.load_image(text, "imem")
    if data is not None and data.words:
        mem.load_image(data, "dmem")
    return Machine(config, mem, entry=entry)


__all__ = [
    "RunStatus",
    "IfId",
    "IdEx",
    "ExMa",
    "MaWb",
    "PipelineState",
    "RunStats",
    "CycleEvent",
    "TRACE_HEADER",
    "RunResult",
    "Bypass",
    "forward_operands",
    "detect_load_use",
    "next_pc",
    "Machine",
    "TraceWriter",
    "build_machine",
]
