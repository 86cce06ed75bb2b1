"""Main CLI entry point for rvsim.

Exit codes: 0 success, 1 verification failure or program fault,
2 usage or I/O error.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional

import click

from src.core.config import (
    DATAPATH_FORMS,
    HAZARD_STAGES,
    PREDICTOR_MODES,
    PRESETS,
    PROCESSOR_PRESETS,
    Config,
    ConfigError,
    SimConfig,
    get_config,
)
from src.core.logging_config import get_logger, set_log_level, setup_logging
from src.core.variants import UNITS, list_variants

logger = get_logger(__name__, component="cli")


class VerificationFailed(click.ClickException):
    """Lockstep divergence, failed check or program fault (exit 1)."""

    exit_code = 1


class InputError(click.ClickException):
    """Unreadable input, bad configuration or unwritable output (exit 2)."""

    exit_code = 2


def _config(ctx: click.Context) -> Config:
    return ctx.obj["config"]


def _sim_config(
    ctx: click.Context,
    preset: Optional[str],
    max_cycles: Optional[int] = None,
    **overrides: Optional[str],
) -> SimConfig:
    try:
        sim = _config(ctx).sim_config(preset, max_cycles=max_cycles)
        if any(v is not None for v in overrides.values()):
            sim = sim.with_overrides(name=f"{sim.name}*", **overrides)
        return sim
    except ConfigError as e:
        raise InputError(str(e)) from e


def _workloads(
    ctx: click.Context, names: tuple[str, ...], tag: Optional[str] = None
) -> list[Any]:
    from src.core.corpus import Corpus, CorpusError
    from src.core.harness import corpus_workloads

    bench_dir = ctx.obj.get("bench_dir")
    corpus = Corpus(Path(bench_dir) if bench_dir else None)
    try:
        workloads = corpus_workloads(corpus, names or None, tag=tag)
    except CorpusError as e:
        raise InputError(str(e)) from e
    if not workloads:
        raise InputError("No benchmarks selected")
    return workloads


def _presets(ctx: click.Context, names: tuple[str, ...]) -> list[SimConfig]:
    try:
        return [_config(ctx).sim_config(name) for name in names or PROCESSOR_PRESETS]
    except ConfigError as e:
        raise InputError(str(e)) from e


def _jobs(ctx: click.Context, jobs: Optional[int]) -> int:
    return int(_config(ctx).get("bench.jobs", 0)) if jobs is None else jobs


@click.group()
@click.version_option(version=__import__("rvsim").__version__, prog_name="rvsim")
@click.option(
    "--home",
    type=click.Path(file_okay=False, path_type=Path),
    envvar="RVSIM_HOME",
    help="Home directory for config.yaml, logs and traces (default ~/.rvsim)",
)
@click.option("--bench-dir", type=click.Path(file_okay=False), help="Benchmark corpus directory")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Verbose log level (default from config.yaml)",
)
@click.pass_context
def cli(
    ctx: click.Context, home: Optional[Path], bench_dir: Optional[str], log_level: Optional[str]
) -> None:
    """rvsim - cycle-accurate RV32I five-stage pipeline simulator.

    Runs programs on the pipeline model, verifies it commit by commit
    against a functional simulator and reports IPC and branch
    prediction accuracy.
    """
    try:
        config = get_config(home)
        setup_logging(
            config.logs_dir,
            str(config.get("logging.level", "INFO")).upper(),
            max_bytes=int(config.get("logging.max_size_mb", 10)) * 1024 * 1024,
            backup_count=int(config.get("logging.backup_count", 3)),
        )
    except (ConfigError, OSError) as e:
        raise InputError(str(e)) from e
    if log_level:
        set_log_level(log_level)
    logger.info(f"rvsim {ctx.invoked_subcommand} (home {config.home})")
    ctx.obj = {"config": config, "bench_dir": bench_dir}


_preset_choice = click.Choice(sorted(PRESETS))
_report_choice = click.Choice(["text", "kv"])
_file = click.Path(dir_okay=False, path_type=Path)


def _machine_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Preset selection plus per-field overrides."""
    options = [
        click.option(
            "--config", "preset", type=_preset_choice, help="Preset (default from config.yaml)"
        ),
        click.option("--predictor", type=click.Choice(PREDICTOR_MODES), help="Predictor mode"),
        click.option("--alu", type=click.Choice(DATAPATH_FORMS), help="ALU form"),
        click.option("--extend", type=click.Choice(DATAPATH_FORMS), help="Load extend form"),
        click.option("--hazard", type=click.Choice(HAZARD_STAGES), help="Load-use detect stage"),
        click.option("--max-cycles", type=click.IntRange(min=1), help="Cycle budget"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@cli.command()
@_machine_options
@click.option("--imem", type=_file, help="Instruction image (.hex/.mem or raw binary)")
@click.option("--dmem", type=_file, help="Data image (.hex/.mem or raw binary)")
@click.option("--asm", "asm_file", type=_file, help="Assemble and run a source file")
@click.option("--benchmark", help="Run a corpus benchmark by name")
@click.option("--trace", type=_file, help="Write the per-cycle trace")
@click.option(
    "--save-trace", is_flag=True, help="Write the trace under the home traces directory"
)
@click.option("--commit-log", type=_file, help="Write the commit log")
@click.option("--report", "report_format", type=_report_choice, default="text", show_default=True)
@click.option("--lockstep", "check", is_flag=True, help="Also verify against the reference model")
@click.option("--echo/--no-echo", default=None, help="Echo console output while running")
@click.pass_context
def run(
    ctx: click.Context,
    preset: Optional[str],
    predictor: Optional[str],
    alu: Optional[str],
    extend: Optional[str],
    hazard: Optional[str],
    max_cycles: Optional[int],
    imem: Optional[Path],
    dmem: Optional[Path],
    asm_file: Optional[Path],
    benchmark: Optional[str],
    trace: Optional[Path],
    save_trace: bool,
    commit_log: Optional[Path],
    report_format: str,
    check: bool,
    echo: Optional[bool],
) -> None:
    """Run one program on the pipeline and print its report.

    Exits 1 if the program faults or --lockstep finds a divergence. An
    exhausted cycle budget is reported with a warning.
    """
    from src.core.asm import AssemblerError, assemble_file
    from src.core.harness import ReportEntry, Workload, emit_report, prepare_machine, run_machine
    from src.core.lockstep import lockstep, write_commit_log
    from src.core.memsys import (
        ImageFormatError,
        ImageTooLargeError,
        MemImage,
        SimulationFault,
        read_image,
    )
    from src.core.pipeline import RunResult
    from src.core.safe_write import SafeWriteError, atomic_writer

    if sum(s is not None for s in (imem, asm_file, benchmark)) != 1:
        raise click.UsageError("Give exactly one of --imem, --asm or --benchmark")
    if dmem is not None and imem is None:
        raise click.UsageError("--dmem needs --imem")

    sim = _sim_config(
        ctx,
        preset,
        max_cycles,
        predictor_mode=predictor,
        alu_impl=alu,
        extend_impl=extend,
        hazard_detect=hazard,
    )
    try:
        if imem is not None:
            data = read_image(dmem) if dmem is not None else MemImage()
            workload = Workload(imem.stem, read_image(imem), data)
        elif asm_file is not None:
            workload = Workload.from_program(asm_file.stem, assemble_file(asm_file))
        else:
            workload = _workloads(ctx, (str(benchmark),))[0]
    except (ImageFormatError, AssemblerError) as e:
        raise InputError(str(e)) from e
    if max_cycles is not None:
        workload = replace(workload, max_cycles=max_cycles)
    saved_trace = trace is None and (save_trace or sim.trace)
    if saved_trace:
        trace = _config(ctx).traces_dir / f"{workload.name}-{sim.name.rstrip('*')}.trace"

    echo = sim.echo_console if echo is None else echo
    echo_fn = (lambda ch: click.echo(ch, nl=False)) if echo else None
    try:
        machine = prepare_machine(sim, workload, echo=echo_fn)
    except ImageTooLargeError as e:
        raise InputError(str(e)) from e

    fault: Optional[SimulationFault] = None
    result: Optional[RunResult] = None
    try:
        with atomic_writer(trace) if trace is not None else nullcontext() as trace_stream:
            try:
                result = run_machine(machine, workload, trace=trace_stream)
            except SimulationFault as e:
                fault = e
        if commit_log is not None:
            write_commit_log(commit_log, machine.commits)
    except SafeWriteError as e:
        raise InputError(str(e)) from e

    if echo and machine.mem.console_buffer:
        click.echo()
    if fault is not None or result is None:
        raise VerificationFailed(f"{workload.name}: {fault}")

    entry = ReportEntry.from_run(workload.name, sim, machine, result)
    click.echo(emit_report([entry], report_format), nl=False)
    if not result.halted:
        click.echo(
            f"warning: cycle budget exhausted before halt ({result.stats.cycles} cycles)",
            err=True,
        )
    if saved_trace:
        click.echo(f"trace: {trace}", err=True)

    if check:
        outcome = lockstep(
            sim,
            workload.text,
            workload.data,
            entry=workload.entry,
            max_cycles=workload.budget(sim),
        )
        click.echo(f"lockstep: {outcome.summary()}")
        if not outcome.passed:
            raise VerificationFailed("Lockstep verification failed")


@cli.command()
@click.option(
    "--config",
    "presets",
    multiple=True,
    type=_preset_choice,
    help="Preset to verify (repeatable; default: the four processor versions)",
)
@click.option("--benchmark", "names", multiple=True, help="Benchmark (repeatable; default: all)")
@click.option("--jobs", type=click.IntRange(min=0), help="Worker processes (0 = physical cores)")
@click.option(
    "--samples",
    type=click.IntRange(min=1),
    default=1_000_000,
    show_default=True,
    help="ALU sweep operand pairs per operation",
)
@click.option("--sweeps/--no-sweeps", default=True, help="Run the datapath equivalence sweeps")
@click.pass_context
def verify(
    ctx: click.Context,
    presets: tuple[str, ...],
    names: tuple[str, ...],
    jobs: Optional[int],
    samples: int,
    sweeps: bool,
) -> None:
    """Lockstep every benchmark under every preset and sweep the datapath forms."""
    from src.core.harness import verify as run_verify

    workloads = _workloads(ctx, names)
    configs = _presets(ctx, presets)
    report = run_verify(
        workloads, configs, jobs=_jobs(ctx, jobs), sweep_samples=samples, sweeps=sweeps
    )
    click.echo(report.render(), nl=False)
    if not report.passed:
        raise VerificationFailed(f"{len(report.failures)} lockstep run(s) failed")


@cli.command()
@click.option(
    "--config",
    "presets",
    multiple=True,
    type=_preset_choice,
    help="Preset to run (repeatable; default: the four processor versions)",
)
@click.option("--benchmark", "names", multiple=True, help="Benchmark (repeatable; default: all)")
@click.option("--tag", help="Only benchmarks with this tag")
@click.option("--jobs", type=click.IntRange(min=0), help="Worker processes (0 = physical cores)")
@click.option("--report", "report_format", type=_report_choice, default="text", show_default=True)
@click.option("--output", type=_file, help="Also write the report to a file")
@click.pass_context
def bench(
    ctx: click.Context,
    presets: tuple[str, ...],
    names: tuple[str, ...],
    tag: Optional[str],
    jobs: Optional[int],
    report_format: str,
    output: Optional[Path],
) -> None:
    """Run the benchmark x preset matrix and print the report."""
    from src.core.harness import STATUS_FAULT, run_matrix
    from src.core.safe_write import SafeWriteError, safe_write

    workloads = _workloads(ctx, names, tag)
    configs = _presets(ctx, presets)
    report = run_matrix(workloads, configs, jobs=_jobs(ctx, jobs))
    text = report.render(report_format)
    click.echo(text, nl=False)
    if output is not None:
        try:
            safe_write(output, text)
        except SafeWriteError as e:
            raise InputError(str(e)) from e
    faulted = [e for e in report.entries if e.status == STATUS_FAULT]
    if faulted:
        raise VerificationFailed(f"{len(faulted)} run(s) faulted")


@cli.command("diff-logs")
@click.argument("reference", type=_file)
@click.argument("candidate", type=_file)
def diff_logs(reference: Path, candidate: Path) -> None:
    """Compare two commit logs record by record."""
    from src.core.lockstep import compare_logs, read_commit_log

    try:
        ref = read_commit_log(reference)
        dut = read_commit_log(candidate)
    except (OSError, ValueError) as e:
        raise InputError(str(e)) from e
    divergence = compare_logs(ref, dut)
    if divergence is not None:
        click.echo(f"DIVERGED {divergence}")
        raise VerificationFailed("Commit logs differ")
    click.echo(f"IDENTICAL {len(ref)} records")


@cli.command()
@click.argument("source", type=_file)
@click.option("--text", "text_out", type=_file, help="Text image (default SOURCE.text.hex)")
@click.option("--data", "data_out", type=_file, help="Data image (default SOURCE.data.hex)")
def assemble(source: Path, text_out: Optional[Path], data_out: Optional[Path]) -> None:
    """Assemble a source file into readmemh instruction and data images."""
    from src.core.asm import AssemblerError, assemble_file
    from src.core.safe_write import SafeWriteError, safe_write

    try:
        program = assemble_file(source)
    except AssemblerError as e:
        raise InputError(str(e)) from e
    text_out = text_out or source.with_suffix(".text.hex")
    data_out = data_out or source.with_suffix(".data.hex")
    try:
        safe_write(text_out, program.text.to_hex())
        safe_write(data_out, program.data.to_hex())
    except SafeWriteError as e:
        raise InputError(str(e)) from e
    click.echo(f"{len(program.text.words)} text words -> {text_out}")
    click.echo(f"{len(program.data.words)} data words -> {data_out}")


@cli.command()
def presets() -> None:
    """List the machine presets and the registered datapath forms."""
    for name, sim in PRESETS.items():
        click.echo(
            f"{name:<12} predictor={sim.predictor_mode:<9} alu={sim.alu_impl:<6} "
            f"extend={sim.extend_impl:<6} hazard={sim.hazard_detect}"
        )
    click.echo()
    for unit in UNITS:
        click.echo(f"{unit:<12} {' '.join(list_variants(unit))}")


@cli.command()
@click.pass_context
def doctor(ctx: click.Context) -> None:
    """Run health check and verify dependencies."""
    from rvsim.cli.doctor import check_dependencies

    if not check_dependencies(_config(ctx).home):
        raise VerificationFailed("Health check found issues")


@cli.command()
def version() -> None:
    """Show version information."""
    from rvsim import __version__

    click.echo(f"rvsim {__version__}")


def main() -> None:
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
