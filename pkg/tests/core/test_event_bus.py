"""Tests for the simulation event signals."""

import threading
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

from src.core.asm import assemble
from src.core.config import SimConfig
from src.core.event_bus import (
    ALL_SIGNALS,
    SignalSubscription,
    branch_resolved,
    cycle_completed,
    emit,
    has_receivers,
    instruction_committed,
    load_use_stalled,
    pipeline_flushed,
    simulation_halted,
)
from src.core.pipeline import build_machine

LOOP = """
    li   t0, 2
loop:
    addi t0, t0, -1
    bnez t0, loop
    ecall
"""


class TestSignalBasics:
    """Test emit and receiver bookkeeping."""

    def test_payload_delivered(self) -> None:
        """Test a subscribed receiver gets the sender and payload."""
        received = {}

        def handler(sender, pc, pc_true, cycle, **kwargs):
            received.update(sender=sender, pc=pc, pc_true=pc_true, cycle=cycle)

        with SignalSubscription(pipeline_flushed, handler):
            emit(pipeline_flushed, sender="machine", pc=0x40, pc_true=0x80, cycle=12)
        assert received == {"sender": "machine", "pc": 0x40, "pc_true": 0x80, "cycle": 12}

    def test_emit_without_receivers_skips_send(self) -> None:
        """Test emitting an unobserved signal never reaches send."""
        assert not has_receivers(load_use_stalled)
        with patch.object(load_use_stalled, "send") as send:
            emit(load_use_stalled, sender=None, pc=0, cycle=1)
        send.assert_not_called()

    def test_emit_with_receiver_sends(self) -> None:
        """Test a connected receiver makes emit call send."""
        with SignalSubscription(load_use_stalled, lambda sender, **kw: None):
            with patch.object(load_use_stalled, "send") as send:
                emit(load_use_stalled, sender="m", pc=8, cycle=2)
        send.assert_called_once_with("m", pc=8, cycle=2)

    def test_sender_filter(self) -> None:
        """Test a receiver bound to one sender ignores others."""
        seen = []
        with SignalSubscription(
            simulation_halted, lambda sender, **kw: seen.append(sender), sender="a"
        ):
            emit(simulation_halted, sender="a", pc=0, cycle=1)
            emit(simulation_halted, sender="b", pc=0, cycle=1)
        assert seen == ["a"]

    def test_subscription_disconnects(self) -> None:
        """Test the context manager removes its receiver."""
        seen = []

        def receiver(sender, **kwargs):
            seen.append(kwargs["cycle"])

        with SignalSubscription(load_use_stalled, receiver):
            assert has_receivers(load_use_stalled)
            emit(load_use_stalled, pc=4, cycle=3)
        emit(load_use_stalled, pc=4, cycle=9)
        assert seen == [3]
        assert not has_receivers(load_use_stalled)

    def test_connect_is_idempotent(self) -> None:
        """Test connecting twice delivers once."""
        seen = []
        subscription = SignalSubscription(load_use_stalled, lambda sender, **kw: seen.append(1))
        subscription.connect()
        subscription.connect()
        emit(load_use_stalled, pc=0, cycle=1)
        subscription.disconnect()
        subscription.disconnect()
        assert seen == [1]
        assert not has_receivers(load_use_stalled)

    def test_concurrent_emit(self) -> None:
        """Test receivers see every emission from several threads."""
        lock = threading.Lock()
        seen: list[int] = []

        def receiver(sender, cycle, **kwargs):
            with lock:
                seen.append(cycle)

        with SignalSubscription(load_use_stalled, receiver):
            with ThreadPoolExecutor(max_workers=4) as pool:
                list(pool.map(lambda c: emit(load_use_stalled, pc=0, cycle=c), range(200)))
        assert sorted(seen) == list(range(200))


class TestMachineSignals:
    """Test the pipeline publishes what it does."""

    def test_run_emits_cycles_commits_and_flush(self) -> None:
        """Test counts of emitted signals match the run statistics."""
        machine = build_machine(SimConfig.from_preset("rvp-nobp"), assemble(LOOP).text)
        counts = {"cycles": 0, "commits": 0, "branches": 0, "flushes": 0}

        def bump(key):
            def receiver(sender, **kwargs):
                counts[key] += 1

            return receiver

        with SignalSubscription(cycle_completed, bump("cycles"), sender=machine), SignalSubscription(
            instruction_committed, bump("commits"), sender=machine
        ), SignalSubscription(branch_resolved, bump("branches"), sender=machine), SignalSubscription(
            pipeline_flushed, bump("flushes"), sender=machine
        ):
            result = machine.run_to_halt()

        assert counts["cycles"] == result.stats.cycles
        assert counts["commits"] == result.stats.retired == 6
        assert counts["branches"] == 2
        assert counts["flushes"] == result.stats.flushes == 1

    def test_unobserved_run_sends_nothing(self) -> None:
        """Test a run never calls send on a signal nobody subscribed to."""
        idle = [signal for signal in ALL_SIGNALS if not has_receivers(signal)]
        assert cycle_completed in idle
        machine = build_machine(SimConfig.from_preset("rvp-nobp"), assemble(LOOP).text)
        sends = [patch.object(signal, "send") for signal in idle]
        mocks = [p.start() for p in sends]
        try:
            machine.run_to_halt()
        finally:
            for p in sends:
                p.stop()
        assert all(not m.called for m in mocks)
