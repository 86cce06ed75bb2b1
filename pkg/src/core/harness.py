"""Benchmark runs, reports and corpus verification.

A Workload is an assembled program plus its expectations. Running one
under a SimConfig yields a ReportEntry (cycles, retired instructions,
predictor hits and misses). A Report groups entries by preset and
derives every average from the entries on demand.

`run_matrix` and `verify` spread the workload x preset matrix over a
process pool; every cell builds its own machine and memories.

Reported `retired` excludes the halting ECALL/EBREAK, so
IPC = retired / cycles. RunStats.retired (used for the cycle accounting
identity) counts it.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Any, Callable, Iterable, Optional, Sequence, TextIO, TypeVar

import psutil

from src.core.asm import Program
from src.core.config import SimConfig
from src.core.corpus import Corpus
from src.core.datapath import SweepResult, sweep_alu_equivalence, sweep_extend_equivalence
from src.core.lockstep import Divergence, lockstep
from src.core.logging_config import get_logger
from src.core.memsys import MemImage, SimulationFault
from src.core.pipeline import Machine, RunResult, RunStatus, TraceWriter, build_machine

logger = get_logger(__name__, component="harness")

REPORT_FORMATS = ("text", "kv")
STATUS_FAULT = "fault"

T = TypeVar("T")


@dataclass(frozen=True)
class Workload:
    """A program to run, with what the corpus expects of it.

    Attributes:
        name: Benchmark name
        text: Instruction image
        data: Data image
        entry: Start pc
        max_cycles: Cycle budget overriding the config's (None = config)
        expected_console: Required console output, if any
        expected_retired: Required retired count (halt excluded), if any
        tags: Corpus tags
    """

    name: str
    text: MemImage
    data: MemImage = field(default_factory=MemImage)
    entry: int = 0
    max_cycles: Optional[int] = None
    expected_console: Optional[str] = None
    expected_retired: Optional[int] = None
    tags: tuple[str, ...] = ()

    def budget(self, config: SimConfig) -> int:
        """Cycle budget: the workload's own, else the config's."""
        return self.max_cycles or config.max_cycles

    @classmethod
    def from_program(cls, name: str, program: Program, **kwargs: Any) -> Workload:
        return cls(name, program.text, program.data, **kwargs)

    @classmethod
    def from_corpus(cls, corpus: Corpus, name: str) -> Workload:
        """Workload for a corpus benchmark (assembled on demand).

        Raises:
            CorpusError: Unknown or unbuildable benchmark
        """
        manifest = corpus.get(name).manifest
        return cls.from_program(
            name,
            corpus.program(name),
            max_cycles=manifest.max_cycles,
            expected_console=manifest.expected_console,
            expected_retired=manifest.expected_retired,
            tags=tuple(manifest.tags),
        )


def corpus_workloads(
    corpus: Corpus, names: Optional[Iterable[str]] = None, *, tag: Optional[str] = None
) -> list[Workload]:
    """Workloads for the named benchmarks, or every enabled one (optionally by tag)."""
    selected = list(names) if names is not None else corpus.names(tag=tag)
    return [Workload.from_corpus(corpus, name) for name in selected]


@dataclass
class ReportEntry:
    """One benchmark run under one preset.

    Attributes:
        benchmark: Benchmark name
        preset: Config name
        predictor_mode: Predictor mode of the config
        cycles: Elapsed cycles
        retired: Committed instructions, halting instruction excluded
        hits: Correctly predicted control transfers
        misses: Mispredicted control transfers (= flushes)
        load_use_stalls: Load-use stall cycles
        invalid_predictions: Pipelined fetches with invalid staging
        status: "halted", "budget_exhausted" or "fault"
        console: Console output
        error: Fault description, if any
    """

    benchmark: str
    preset: str
    predictor_mode: str
    cycles: int
    retired: int
    hits: int
    misses: int
    load_use_stalls: int = 0
    invalid_predictions: int = 0
    status: str = RunStatus.HALTED.value
    console: str = ""
    error: Optional[str] = None

    @property
    def ipc(self) -> float:
        return self.retired / self.cycles if self.cycles else 0.0

    @property
    def hit_rate(self) -> Optional[float]:
        """hits / (hits + misses); None without prediction or control transfers."""
        total = self.hits + self.misses
        if self.predictor_mode == "none" or not total:
            return None
        return self.hits / total

    @property
    def ok(self) -> bool:
        return self.status == RunStatus.HALTED.value

    @classmethod
    def from_run(
        cls, benchmark: str, config: SimConfig, machine: Machine, result: RunResult
    ) -> ReportEntry:
        stats = result.stats
        retired = stats.retired - 1 if result.halted else stats.retired
        return cls(
            benchmark=benchmark,
            preset=config.name,
            predictor_mode=config.predictor_mode,
            cycles=stats.cycles,
            retired=retired,
            hits=stats.pred_hits,
            misses=stats.pred_misses,
            load_use_stalls=stats.load_use_stalls,
            invalid_predictions=stats.invalid_predictions,
            status=result.status.value,
            console=machine.mem.console_text(),
        )

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["ipc"] = self.ipc
        data["hit_rate"] = self.hit_rate
        return data


@dataclass(frozen=True)
class ReportAverage:
    """Averages over a preset's entries.

    IPC is the arithmetic mean of per-benchmark IPCs. Counts are means
    too, and hit_rate is mean hits / (mean hits + mean misses).
    """

    preset: str
    ipc: float
    cycles: float
    retired: float
    hits: float
    misses: float
    hit_rate: Optional[float]


@dataclass
class Report:
    """Report entries grouped by preset.

    Example:
        report = Report([entry_a, entry_b])
        report.average("rvp-simple").ipc
        print(report.render("text"))
    """

    entries: list[ReportEntry] = field(default_factory=list)

    def add(self, entry: ReportEntry) -> None:
        self.entries.append(entry)

    def presets(self) -> list[str]:
        """Presets in first-seen order."""
        return list(dict.fromkeys(e.preset for e in self.entries))

    def for_preset(self, preset: str) -> list[ReportEntry]:
        return [e for e in self.entries if e.preset == preset]

    def entry(self, benchmark: str, preset: str) -> ReportEntry:
        for e in self.entries:
            if e.benchmark == benchmark and e.preset == preset:
                return e
        raise KeyError(f"No entry for {benchmark} under {preset}")

    def average(self, preset: str) -> ReportAverage:
        """Averages recomputed from the preset's entries.

        Raises:
            KeyError: If the preset has no entries
        """
        entries = self.for_preset(preset)
        if not entries:
            raise KeyError(f"No entries for preset {preset}")
        hits = fmean(e.hits for e in entries)
        misses = fmean(e.misses for e in entries)
        no_prediction = all(e.predictor_mode == "none" for e in entries)
        return ReportAverage(
            preset=preset,
            ipc=fmean(e.ipc for e in entries),
            cycles=fmean(e.cycles for e in entries),
            retired=fmean(e.retired for e in entries),
            hits=hits,
            misses=misses,
            hit_rate=None if no_prediction or not hits + misses else hits / (hits + misses),
        )

    @property
    def ok(self) -> bool:
        """True if every run halted."""
        return all(e.ok for e in self.entries)

    def render(self, fmt: str = "text") -> str:
        return emit_report(self.entries, fmt)


def _rate(value: Optional[float]) -> str:
    return "N/A" if value is None else f"{100 * value:.1f}%"


def _kv_rate(value: Optional[float]) -> str:
    return "N/A" if value is None else f"{value:.6f}"


_HEADER = (
    f"{'preset':<12} {'benchmark':<18} {'cycles':>10} {'retired':>10} "
    f"{'IPC':>6} {'hits':>8} {'misses':>8} {'hit rate':>9}"
)


def _text_row(
    preset: str,
    name: str,
    counts: tuple[str, str, str, str],
    ipc: float,
    rate: Optional[float],
    note: str = "",
) -> str:
    cycles, retired, hits, misses = counts
    row = (
        f"{preset:<12} {name:<18} {cycles:>10} {retired:>10} "
        f"{ipc:>6.3f} {hits:>8} {misses:>8} {_rate(rate):>9}"
    )
    return f"{row}  {note}" if note else row


def emit_report(entries: Sequence[ReportEntry], fmt: str = "text") -> str:
    """Render entries as a table ("text") or key=value lines ("kv").

    The text table lists each preset's benchmarks followed by an average
    row. The kv form uses keys `<preset>.<benchmark>.<metric>` and
    `<preset>.average.<metric>`.

    Raises:
        ValueError: No entries or unknown format
    """
    if not entries:
        raise ValueError("Report needs at least one entry")
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"Unknown report format '{fmt}' (expected one of {REPORT_FORMATS})")

    report = Report(list(entries))
    lines: list[str] = []
    if fmt == "text":
        lines.append("# retired excludes the halting ECALL/EBREAK; IPC = retired / cycles")
        lines.append(_HEADER)
        for preset in report.presets():
            for e in report.for_preset(preset):
                note = "" if e.ok else f"[{e.status}{': ' + e.error if e.error else ''}]"
                counts = (str(e.cycles), str(e.retired), str(e.hits), str(e.misses))
                lines.append(_text_row(preset, e.benchmark, counts, e.ipc, e.hit_rate, note))
            avg = report.average(preset)
            means = (
                f"{avg.cycles:.1f}",
                f"{avg.retired:.1f}",
                f"{avg.hits:.1f}",
                f"{avg.misses:.1f}",
            )
            lines.append(_text_row(preset, "average", means, avg.ipc, avg.hit_rate))
        return "\n".join(lines) + "\n"

    for preset in report.presets():
        for e in report.for_preset(preset):
            key = f"{preset}.{e.benchmark}"
            lines += [
                f"{key}.status={e.status}",
                f"{key}.cycles={e.cycles}",
                f"{key}.retired={e.retired}",
                f"{key}.ipc={e.ipc:.6f}",
                f"{key}.hits={e.hits}",
                f"{key}.misses={e.misses}",
                f"{key}.hit_rate={_kv_rate(e.hit_rate)}",
                f"{key}.load_use_stalls={e.load_use_stalls}",
            ]
        avg = report.average(preset)
        lines += [
            f"{preset}.average.ipc={avg.ipc:.6f}",
            f"{preset}.average.hit_rate={_kv_rate(avg.hit_rate)}",
        ]
    return "\n".join(lines) + "\n"


def prepare_machine(
    config: SimConfig, workload: Workload, *, echo: Optional[Callable[[str], None]] = None
) -> Machine:
    """Machine with the workload's images loaded, ready to run."""
    return build_machine(config, workload.text, workload.data, entry=workload.entry, echo=echo)


def run_machine(
    machine: Machine, workload: Workload, *, trace: Optional[TextIO] = None
) -> RunResult:
    """Run a prepared machine to halt within the workload's budget.

    Raises:
        SimulationFault: If the program faults
    """
    budget = workload.budget(machine.config)
    if trace is None:
        return machine.run_to_halt(budget)
    with TraceWriter(machine, trace):
        return machine.run_to_halt(budget)


def run_program(
    config: SimConfig,
    workload: Workload,
    *,
    trace: Optional[TextIO] = None,
    echo: Optional[Callable[[str], None]] = None,
) -> tuple[Machine, RunResult]:
    """Build a machine for the workload and run it to halt.

    Args:
        config: Machine configuration
        workload: Program and budget
        trace: Stream receiving the per-cycle trace
        echo: Console echo callback

    Raises:
        SimulationFault: If the program faults
    """
    machine = prepare_machine(config, workload, echo=echo)
    return machine, run_machine(machine, workload, trace=trace)


def run_benchmark(
    config: SimConfig,
    workload: Workload,
    *,
    trace: Optional[TextIO] = None,
    echo: Optional[Callable[[str], None]] = None,
) -> ReportEntry:
    """Run one workload and summarise it.

    A fault or an exhausted budget is reported in the entry's status
    rather than raised.
    """
    try:
        machine, result = run_program(config, workload, trace=trace, echo=echo)
    except SimulationFault as fault:
        logger.error(f"{workload.name} under {config.name}: {fault}")
        return ReportEntry(
            benchmark=workload.name,
            preset=config.name,
            predictor_mode=config.predictor_mode,
            cycles=fault.cycle or 0,
            retired=0,
            hits=0,
            misses=0,
            status=STATUS_FAULT,
            error=str(fault),
        )
    entry = ReportEntry.from_run(workload.name, config, machine, result)
    logger.info(
        f"{workload.name} under {config.name}: {entry.cycles} cycles, IPC {entry.ipc:.3f}"
    )
    return entry


def default_jobs() -> int:
    """Physical core count (at least 1)."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def _map_cells(fn: Callable[..., T], cells: list[tuple[Any, ...]], jobs: int) -> list[T]:
    """Apply fn to every cell, in a process pool unless jobs == 1. Order is kept."""
    workers = min(jobs if jobs > 0 else default_jobs(), len(cells)) or 1
    if workers == 1:
        return [fn(*cell) for cell in cells]
    logger.debug(f"Running {len(cells)} cells on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*cells)))


def run_matrix(
    workloads: Sequence[Workload], configs: Sequence[SimConfig], *, jobs: int = 0
) -> Report:
    """Run every workload under every config.

    Args:
        workloads: Programs to run
        configs: Machine configurations
        jobs: Worker processes (0 = physical core count, 1 = in-process)

    Returns:
        Report with entries ordered by config, then workload
    """
    cells = [(config, workload) for config in configs for workload in workloads]
    return Report(_map_cells(run_benchmark, cells, jobs))


@dataclass(frozen=True)
class VerifyCell:
    """Lockstep outcome of one workload under one config.

    Attributes:
        benchmark: Workload name
        preset: Config name
        passed: Lockstep, accounting and expectations all held
        summary: One-line outcome
        commits: Records compared
        divergence: First divergence, if any
        problems: Failed checks besides lockstep
    """

    benchmark: str
    preset: str
    passed: bool
    summary: str
    commits: int
    divergence: Optional[Divergence] = None
    problems: tuple[str, ...] = ()


def verify_workload(config: SimConfig, workload: Workload) -> VerifyCell:
    """Lockstep one workload and check its cycle accounting and expectations."""
    result = lockstep(
        config,
        workload.text,
        workload.data,
        entry=workload.entry,
        max_cycles=workload.max_cycles,
    )
    problems: list[str] = []
    stats = result.stats
    if result.status is RunStatus.HALTED:
        if stats.cycles != stats.expected_cycles():
            problems.append(
                f"cycle accounting: {stats.cycles} cycles, identity gives "
                f"{stats.expected_cycles()}"
            )
        if (
            workload.expected_retired is not None
            and stats.retired - 1 != workload.expected_retired
        ):
            problems.append(
                f"retired {stats.retired - 1}, expected {workload.expected_retired}"
            )
        if workload.expected_console is not None and result.console != workload.expected_console:
            problems.append(
                f"console {result.console!r}, expected {workload.expected_console!r}"
            )
    if result.fault is not None:
        problems.append(f"program fault: {result.fault}")

    summary = result.summary()
    if problems and result.passed:
        summary = "FAIL " + "; ".join(problems)
    return VerifyCell(
        benchmark=workload.name,
        preset=config.name,
        passed=result.passed and not problems,
        summary=summary,
        commits=result.commits,
        divergence=result.divergence,
        problems=tuple(problems),
    )


@dataclass
class VerifyReport:
    """Outcome of verify: lockstep cells plus datapath sweeps."""

    cells: list[VerifyCell] = field(default_factory=list)
    sweeps: list[SweepResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells) and all(s.ok for s in self.sweeps)

    @property
    def failures(self) -> list[VerifyCell]:
        return [c for c in self.cells if not c.passed]

    def render(self) -> str:
        lines = [
            f"{'PASS' if c.passed else 'FAIL'} {c.preset:<12} {c.benchmark:<18} {c.summary}"
            for c in self.cells
        ]
        for sweep in self.sweeps:
            status = "PASS" if sweep.ok else "FAIL"
            lines.append(f"{status} datapath     {sweep.unit:<18} {sweep.checked} checks")
            for name, inputs, want, got in sweep.mismatches:
                args = ", ".join(f"{x:#010x}" for x in inputs)
                lines.append(f"     {name}({args}): mux {want:#010x}, onehot {got:#010x}")
        failed = len(self.failures) + sum(not s.ok for s in self.sweeps)
        lines.append(f"{'OK' if self.passed else 'FAILED'}: {failed} failing check(s)")
        return "\n".join(lines) + "\n"


def verify(
    workloads: Sequence[Workload],
    configs: Sequence[SimConfig],
    *,
    jobs: int = 0,
    sweep_samples: int = 1_000_000,
    sweeps: bool = True,
) -> VerifyReport:
    """Lockstep every workload under every config, then sweep the datapath forms.

    Args:
        workloads: Programs to verify
        configs: Machine configurations
        jobs: Worker processes (0 = physical core count, 1 = in-process)
        sweep_samples: Random operand pairs per ALU operation
        sweeps: Run the datapath equivalence sweeps
    """
    cells = [(config, workload) for config in configs for workload in workloads]
    report = VerifyReport(_map_cells(verify_workload, cells, jobs))
    if sweeps:
        report.sweeps.append(sweep_alu_equivalence(sweep_samples))
        report.sweeps.append(sweep_extend_equivalence())
    if report.passed:
        logger.info(f"Verified {len(report.cells)} lockstep runs")
    else:
        logger.warning(f"Verification failed: {len(report.failures)} lockstep failure(s)")
    return report


__all__ = [
    "REPORT_FORMATS",
    "STATUS_FAULT",
    "Workload",
    "corpus_workloads",
    "ReportEntry",
    "ReportAverage",
    "Report",
    "emit_report",
    "prepare_machine",
    "run_machine",
    "run_program",
    "run_benchmark",
    "default_jobs",
    "run_matrix",
    "VerifyCell",
    "verify_workload",
    "VerifyReport",
    "verify",
]
