"""Tests for the main CLI entry point."""

import logging
import logging.handlers
import tempfile
from pathlib import Path

from click.testing import CliRunner

from rvsim import __version__
from rvsim.cli.main import cli, main
from src.core.config import reset_config

LOOP = """
        li   t0, 3
    loop:
        addi t0, t0, -1
        bnez t0, loop
        ecall
"""


class CLITestCase:
    """Runs commands against a scratch home directory."""

    def setup_method(self) -> None:
        """Create a scratch home."""
        self._tmp = tempfile.TemporaryDirectory()
        self.home = Path(self._tmp.name)
        self.runner = CliRunner()

    def teardown_method(self) -> None:
        """Drop the scratch home and the cached config."""
        reset_config()
        self._tmp.cleanup()

    def invoke(self, *args: str):
        return self.runner.invoke(cli, ["--home", str(self.home), *args])

    def source(self, text: str = LOOP, name: str = "prog.s") -> Path:
        path = self.home / name
        path.write_text(text)
        return path


class TestCLIHelp(CLITestCase):
    """Test help and metadata commands."""

    def test_main_function_exists(self) -> None:
        """Test the console entry point is callable."""
        assert callable(main)

    def test_all_commands_listed(self) -> None:
        """Test every command appears in the help."""
        result = self.runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        assert "RV32I" in result.output
        for command in ("run", "verify", "bench", "diff-logs", "assemble", "presets", "doctor"):
            assert command in result.output

    def test_version(self) -> None:
        """Test the version command and option."""
        result = self.invoke("version")
        assert result.exit_code == 0
        assert f"rvsim {__version__}" in result.output
        assert __version__ in self.runner.invoke(cli, ["--version"]).output

    def test_presets(self) -> None:
        """Test all presets and the registered datapath forms are listed."""
        result = self.invoke("presets")
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert len(lines) == 9
        assert any(line.startswith("rvp-optall") and "pipelined" in line for line in lines[:5])
        assert lines[5] == ""
        assert lines[6].split() == ["alu", "alu.mux", "alu.onehot"]
        assert lines[7].split() == ["extend", "extend.mux", "extend.onehot"]
        assert lines[8].split() == ["forward", "forward.standard"]

    def test_home_gets_config(self) -> None:
        """Test the first command creates config.yaml and logs the subcommand."""
        assert self.invoke("presets").exit_code == 0
        assert (self.home / "config.yaml").exists()
        verbose = (self.home / "logs" / "verbose.log").read_text()
        assert f"[cli] rvsim presets (home {self.home})" in verbose

    def test_log_level_option_overrides_config(self) -> None:
        """Test --log-level raises the verbose log level but leaves error.log at WARNING."""
        result = self.runner.invoke(
            cli, ["--home", str(self.home), "--log-level", "debug", "presets"]
        )
        assert result.exit_code == 0
        levels = {
            Path(h.baseFilename).name: h.level
            for h in logging.getLogger().handlers
            if isinstance(h, logging.handlers.RotatingFileHandler)
        }
        assert levels == {"verbose.log": logging.DEBUG, "error.log": logging.WARNING}

    def test_log_level_from_config(self) -> None:
        """Test without the option the configured level is used."""
        (self.home / "config.yaml").write_text("logging:\n  level: WARNING\n")
        assert self.invoke("presets").exit_code == 0
        assert "rvsim presets" not in (self.home / "logs" / "verbose.log").read_text()


class TestRunCommand(CLITestCase):
    """Test rvsim run."""

    def test_run_asm(self) -> None:
        """Test running a source file prints a report row."""
        result = self.invoke("run", "--asm", str(self.source()), "--config", "rvp-nobp")
        assert result.exit_code == 0, result.output
        row = [line.split() for line in result.output.splitlines() if " prog " in line][0]
        assert row[:4] == ["rvp-nobp", "prog", "18", "7"]

    def test_run_kv_with_lockstep(self) -> None:
        """Test kv output and the lockstep verdict."""
        result = self.invoke(
            "run", "--asm", str(self.source()), "--config", "rvp-optif", "--report", "kv", "--lockstep"
        )
        assert result.exit_code == 0, result.output
        assert "rvp-optif.prog.retired=7" in result.output
        assert "lockstep: PASS 8 commits" in result.output

    def test_overrides_rename_preset(self) -> None:
        """Test per-field overrides mark the preset as modified."""
        result = self.invoke(
            "run", "--asm", str(self.source()), "--config", "rvp-simple", "--predictor", "none",
            "--report", "kv",
        )
        assert result.exit_code == 0, result.output
        assert "rvp-simple*.prog.hit_rate=N/A" in result.output

    def test_budget_exhausted_warns(self) -> None:
        """Test an unfinished run exits 0 with a warning."""
        result = self.invoke("run", "--asm", str(self.source("spin: j spin\n")), "--max-cycles", "50")
        assert result.exit_code == 0
        assert "cycle budget exhausted" in result.output

    def test_fault_exits_1(self) -> None:
        """Test a program fault is a verification failure."""
        path = self.source("li t0, 2\nlw t1, 0(t0)\necall\n")
        result = self.invoke("run", "--asm", str(path))
        assert result.exit_code == 1
        assert "misaligned" in result.output

    def test_usage_errors_exit_2(self) -> None:
        """Test missing or conflicting program options."""
        assert self.invoke("run").exit_code == 2
        path = str(self.source())
        assert self.invoke("run", "--asm", path, "--benchmark", "straight_line").exit_code == 2
        assert self.invoke("run", "--asm", path, "--dmem", path).exit_code == 2

    def test_bad_inputs_exit_2(self) -> None:
        """Test unreadable images and assembler errors."""
        assert self.invoke("run", "--imem", str(self.home / "missing.hex")).exit_code == 2
        result = self.invoke("run", "--asm", str(self.source("frobnicate x1\n")))
        assert result.exit_code == 2
        assert "frobnicate" in result.output

    def test_trace_and_commit_log(self) -> None:
        """Test trace and commit log files are written."""
        trace = self.home / "out" / "run.trace"
        log = self.home / "out" / "commits.log"
        result = self.invoke(
            "run", "--asm", str(self.source()), "--trace", str(trace), "--commit-log", str(log)
        )
        assert result.exit_code == 0, result.output
        assert trace.read_text().startswith("# cycle IF ID EX MA WB")
        assert len(log.read_text().splitlines()) == 8

    def test_save_trace_to_home(self) -> None:
        """Test --save-trace writes under the traces directory named by program and preset."""
        result = self.invoke(
            "run", "--asm", str(self.source()), "--config", "rvp-optif", "--save-trace"
        )
        assert result.exit_code == 0, result.output
        saved = self.home / "traces" / "prog-rvp-optif.trace"
        assert f"trace: {saved}" in result.output
        assert saved.read_text().startswith("# cycle IF ID EX MA WB")

    def test_trace_setting_from_config(self) -> None:
        """Test simulator.trace saves a trace and an explicit --trace path wins."""
        (self.home / "config.yaml").write_text("simulator:\n  trace: true\n")
        result = self.invoke("run", "--asm", str(self.source()), "--predictor", "none")
        assert result.exit_code == 0, result.output
        assert (self.home / "traces" / "prog-rvp-simple.trace").exists()

        explicit = self.home / "mine.trace"
        result = self.invoke("run", "--asm", str(self.source()), "--trace", str(explicit))
        assert result.exit_code == 0, result.output
        assert explicit.exists()
        assert "trace:" not in result.output

    def test_benchmark(self) -> None:
        """Test running a corpus benchmark by name."""
        result = self.invoke("run", "--benchmark", "hello_console", "--echo", "--report", "kv")
        assert result.exit_code == 0, result.output
        assert "Hello, RV32I!" in result.output


class TestAssembleAndImages(CLITestCase):
    """Test rvsim assemble and image-based runs."""

    def test_assemble_then_run(self) -> None:
        """Test hex images produced by assemble run like the source."""
        path = self.source(LOOP + ".data\n.word 5\n")
        result = self.invoke("assemble", str(path))
        assert result.exit_code == 0, result.output
        text = path.with_suffix(".text.hex")
        data = path.with_suffix(".data.hex")
        assert text.read_text().splitlines()[0] == "00300293"
        assert data.read_text() == "00000005\n"

        result = self.invoke("run", "--imem", str(text), "--dmem", str(data), "--report", "kv")
        assert result.exit_code == 0, result.output
        assert "prog.text.retired=7" in result.output


class TestDiffLogs(CLITestCase):
    """Test rvsim diff-logs."""

    def write_log(self, preset: str, source: str, name: str) -> Path:
        log = self.home / name
        result = self.invoke(
            "run", "--asm", str(self.source(source)), "--config", preset, "--commit-log", str(log)
        )
        assert result.exit_code == 0, result.output
        return log

    def test_identical_across_presets(self) -> None:
        """Test the same program commits identically under two presets."""
        a = self.write_log("rvp-nobp", LOOP, "a.log")
        b = self.write_log("rvp-optall", LOOP, "b.log")
        result = self.invoke("diff-logs", str(a), str(b))
        assert result.exit_code == 0
        assert "IDENTICAL 8 records" in result.output

    def test_divergence(self) -> None:
        """Test differing logs exit 1 with the first divergence."""
        a = self.write_log("rvp-simple", LOOP, "a.log")
        b = self.write_log("rvp-simple", LOOP.replace("li   t0, 3", "li   t0, 2"), "b.log")
        result = self.invoke("diff-logs", str(a), str(b))
        assert result.exit_code == 1
        assert "DIVERGED commit 0" in result.output

    def test_unreadable(self) -> None:
        """Test a missing log exits 2."""
        assert self.invoke("diff-logs", "nope.log", "nope2.log").exit_code == 2


class TestBenchAndVerify(CLITestCase):
    """Test the corpus commands."""

    def test_bench_kv(self) -> None:
        """Test bench runs the selected matrix and writes the report."""
        output = self.home / "report.txt"
        result = self.invoke(
            "bench", "--benchmark", "straight_line", "--config", "rvp-simple",
            "--config", "rvp-nobp", "--jobs", "1", "--report", "kv", "--output", str(output),
        )
        assert result.exit_code == 0, result.output
        assert "rvp-simple.straight_line.retired=37" in result.output
        assert "rvp-nobp.straight_line.cycles=42" in result.output
        assert output.read_text() == result.output

    def test_bench_tag(self) -> None:
        """Test tag selection."""
        result = self.invoke("bench", "--tag", "console", "--config", "rvp-nobp", "--jobs", "1")
        assert result.exit_code == 0, result.output
        assert "hello_console" in result.output
        assert "straight_line" not in result.output

    def test_unknown_benchmark(self) -> None:
        """Test an unknown benchmark name exits 2."""
        result = self.invoke("bench", "--benchmark", "missing", "--jobs", "1")
        assert result.exit_code == 2
        assert "Unknown benchmark" in result.output

    def test_verify(self) -> None:
        """Test verify passes on a benchmark."""
        result = self.invoke(
            "verify", "--benchmark", "dependent_chain", "--config", "rvp-optif",
            "--jobs", "1", "--no-sweeps",
        )
        assert result.exit_code == 0, result.output
        assert "OK: 0 failing check(s)" in result.output
