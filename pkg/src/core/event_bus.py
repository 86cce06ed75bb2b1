"""Simulation event signals using blinker.

The engines publish what happens inside a run (cycles, commits, branch
resolutions, flushes, stalls, halts) on named signals. Observers such
as the trace writer and the streaming lockstep checker subscribe to
them. emit() calls send only when a receiver is connected. Payloads are
still built by the caller.
"""

from __future__ import annotations

import threading
from typing import Any, Callable

from blinker import Namespace

_signals = Namespace()

cycle_completed = _signals.signal("cycle.completed")
"""Emitted at the end of every simulated pipeline cycle.

Args:
    sender: The Machine
    event: CycleEvent (cycle number, stage occupancy, bmis/stall/btkn)
"""

instruction_committed = _signals.signal("instruction.committed")
"""Emitted when an instruction retires.

Args:
    sender: The Machine or FuncSim
    record: CommitRecord
    cycle: Commit cycle (None for the functional simulator)
"""

branch_resolved = _signals.signal("branch.resolved")
"""Emitted when a control transfer is checked against its prediction (Ma stage).

Args:
    sender: The Machine
    pc: Address of the control transfer
    kind: Instruction Kind
    predicted_taken: Prediction direction
    taken: Actual direction
    target: Correct next pc
    hit: True if the fetch path was right
    cycle: Cycle number
"""

pipeline_flushed = _signals.signal("pipeline.flushed")
"""Emitted when a misprediction squashes If, Id and Ex.

Args:
    sender: The Machine
    pc: Address of the mispredicted instruction
    pc_true: Redirect target
    cycle: Cycle number
"""

load_use_stalled = _signals.signal("load_use.stalled")
"""Emitted for each load-use stall cycle.

Args:
    sender: The Machine
    pc: Address of the stalled consumer
    cycle: Cycle number
"""

simulation_halted = _signals.signal("simulation.halted")
"""Emitted when ECALL/EBREAK commits.

Args:
    sender: The Machine or FuncSim
    pc: Address of the halting instruction
    cycle: Halting cycle (None for the functional simulator)
"""

simulation_fault = _signals.signal("simulation.fault")
"""Emitted just before a SimulationFault propagates.

Args:
    sender: The Machine or FuncSim
    fault: The SimulationFault
"""

lockstep_diverged = _signals.signal("lockstep.diverged")
"""Emitted when a commit stream differs from the reference.

Args:
    sender: The CommitChannel (or None for offline comparison)
    divergence: Divergence describing the first difference
"""


class SignalSubscription:
    """Connect a receiver for the lifetime of a `with` block.

    Example:
        with SignalSubscription(instruction_committed, on_commit, sender=machine):
            machine.run_to_halt(10_000)
    """

    def __init__(self, signal: Any, receiver: Callable, sender: Any = None) -> None:
        self.signal = signal
        self.receiver = receiver
        self.sender = sender
        self._connected = False
        self._lock = threading.Lock()

    def connect(self) -> None:
        with self._lock:
            if not self._connected:
                if self.sender is not None:
                    self.signal.connect(self.receiver, sender=self.sender, weak=False)
                else:
                    self.signal.connect(self.receiver, weak=False)
                self._connected = True

    def disconnect(self) -> None:
        with self._lock:
            if self._connected:
                if self.sender is not None:
                    self.signal.disconnect(self.receiver, sender=self.sender)
                else:
                    self.signal.disconnect(self.receiver)
                self._connected = False

    def __enter__(self) -> SignalSubscription:
        self.connect()
        return self

    def __exit__(self, *args: Any) -> None:
        self.disconnect()


def has_receivers(signal: Any) -> bool:
    """True if anything is connected to the signal."""
    return bool(signal.receivers)


def emit(signal: Any, *, sender: Any = None, **kwargs: Any) -> None:
    """Send a signal if anyone listens.

    Args:
        signal: The signal to emit
        sender: Sender identification
        **kwargs: Signal-specific payload
    """
    if has_receivers(signal):
        signal.send(sender, **kwargs)


ALL_SIGNALS = (
    cycle_completed,
    instruction_committed,
    branch_resolved,
    pipeline_flushed,
    load_use_stalled,
    simulation_halted,
    simulation_fault,
    lockstep_diverged,
)


__all__ = [
    "cycle_completed",
    "instruction_committed",
    "branch_resolved",
    "pipeline_flushed",
    "load_use_stalled",
    "simulation_halted",
    "simulation_fault",
    "lockstep_diverged",
    "ALL_SIGNALS",
    "emit",
    "has_receivers",
    "SignalSubscription",
]
