"""gshare + BTB branch prediction.

Three modes:

- none: every fetch predicted not-taken, no tables touched.
- single: the BTB read and the PHT lookup happen in the fetch cycle;
  the PHT is indexed by (pc >> 2) XOR history.
- pipelined: a pre-fetch stage (`prestage`) reads the BTB and latches
  the pc one cycle ahead. The fetch in the following cycle uses the
  latched entry and a PHT index formed from the previous pc, and the
  prediction is only valid when the fetch pc is the latched pc + 4.
  BTB entries are therefore written at branch_pc - 4.

Usage:
    bp = BranchPredictor(PredictorMode.SINGLE)
    pred = bp.predict(0x104)
    bp.accept(pred)                      # speculative history update
    ...
    bp.update(0x104, Kind.BEQ, taken=True, target=0x130,
              prediction=pred, mispredicted=True)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.core.isa import MASK32, Kind
from src.core.logging_config import get_logger

logger = get_logger(__name__, component="predictor")

DEFAULT_PHT_ENTRIES = 8192
DEFAULT_BTB_ENTRIES = 512
COUNTER_INIT = 1  # weakly not-taken
COUNTER_MAX = 3


class PredictorMode(str, Enum):
    """Branch prediction arrangement."""

    NONE = "none"
    SINGLE = "single"
    PIPELINED = "pipelined"


@dataclass(frozen=True)
class BtbEntry:
    """One BTB line.

    Attributes:
        tag: pc bits above the index
        target: Predicted target address
        is_branch: Conditional branch (False for JAL entries)
    """

    tag: int
    target: int
    is_branch: bool


@dataclass(frozen=True)
class Prediction:
    """Outcome of one fetch-time prediction, carried with the instruction.

    Attributes:
        taken: Redirect fetch to target
        target: BTB target (meaningful when btb_hit)
        valid: False when the pipelined staging did not match this pc
        pht_index: PHT index to train at resolution
        btb_hit: The BTB held an entry for this fetch
        is_cond_entry: The hit entry belongs to a conditional branch
        history: History register value before this fetch's speculation
    """

    taken: bool = False
    target: int = 0
    valid: bool = True
    pht_index: int = 0
    btb_hit: bool = False
    is_cond_entry: bool = False
    history: int = 0

    def next_pc(self, pc: int) -> int:
        """Fetch address this prediction steers to after pc."""
        return self.target if self.taken else (pc + 4) & MASK32


NOT_TAKEN = Prediction()


def _log2(n: int, what: str) -> int:
    if n < 2 or n & (n - 1):
        raise ValueError(f"{what} must be a power of two >= 2, got {n}")
    return n.bit_length() - 1


class BranchPredictor:
    """gshare pattern history table with a direct-mapped BTB.

    Attributes:
        mode: Prediction arrangement
        bhr: Global history register (log2(pht_entries) bits)
        pht: Two-bit saturating counters
        btb: BTB lines (None = invalid)
        staged_entry: BTB read latched by prestage (pipelined mode)
        staged_pc: pc latched by prestage (pipelined mode)
    """

    def __init__(
        self,
        mode: PredictorMode | str = PredictorMode.SINGLE,
        pht_entries: int = DEFAULT_PHT_ENTRIES,
        btb_entries: int = DEFAULT_BTB_ENTRIES,
    ) -> None:
        self.mode = PredictorMode(mode)
        self.history_bits = _log2(pht_entries, "pht_entries")
        self.history_mask = pht_entries - 1
        self.btb_index_bits = _log2(btb_entries, "btb_entries")
        self.btb_mask = btb_entries - 1

        self.bhr = 0
        self.pht = bytearray([COUNTER_INIT] * pht_entries)
        self.btb: list[Optional[BtbEntry]] = [None] * btb_entries
        self.staged_entry: Optional[BtbEntry] = None
        self.staged_pc: Optional[int] = None
        logger.debug(
            f"Predictor {self.mode.value}: {pht_entries} PHT counters, {btb_entries} BTB lines"
        )

    # -- table helpers ---------------------------------------------------

    def pht_index(self, pc: int) -> int:
        """gshare index: (pc >> 2) XOR history, masked to the table size."""
        return ((pc >> 2) ^ self.bhr) & self.history_mask

    def btb_index(self, pc: int) -> int:
        return (pc >> 2) & self.btb_mask

    def btb_tag(self, pc: int) -> int:
        return pc >> (2 + self.btb_index_bits)

    def btb_lookup(self, pc: int) -> Optional[BtbEntry]:
        """BTB line for pc if valid with a matching tag."""
        entry = self.btb[self.btb_index(pc)]
        if entry is not None and entry.tag == self.btb_tag(pc):
            return entry
        return None

    def _from_entry(self, entry: Optional[BtbEntry], index: int, valid: bool = True) -> Prediction:
        if entry is None:
            return Prediction(valid=valid, pht_index=index, history=self.bhr)
        taken = not entry.is_branch or self.pht[index] >= 2
        return Prediction(
            taken=taken,
            target=entry.target,
            valid=valid,
            pht_index=index,
            btb_hit=True,
            is_cond_entry=entry.is_branch,
            history=self.bhr,
        )

    # -- prediction ------------------------------------------------------

    def predict_single(self, pc: int) -> Prediction:
        """Single-cycle lookup: BTB and PHT both read for pc itself."""
        return self._from_entry(self.btb_lookup(pc), self.pht_index(pc))

    def prestage(self, pc: int) -> None:
        """Pre-fetch stage: latch the BTB read and pc for the next cycle's fetch."""
        self.staged_entry = self.btb_lookup(pc)
        self.staged_pc = pc

    def predict_pipelined(self, pc: int) -> Prediction:
        """Lookup using the previous cycle's staging.

        Valid only when pc == staged_pc + 4. An invalid prediction falls
        through and still carries the index a sequential fetch would have
        formed, so the branch can train the PHT at resolution.
        """
        if self.staged_pc is None or (self.staged_pc + 4) & MASK32 != pc:
            index = (((pc - 4) & MASK32) >> 2 ^ self.bhr) & self.history_mask
            return Prediction(valid=False, pht_index=index, history=self.bhr)
        # Only the BTB read is staged. The PHT index XORs the history as of
        # this fetch, which already holds the speculation of the fetch at
        # staged_pc, so it equals predict_single(staged_pc) over the same
        # tables. Training uses the carried index, never a recomputed one.
        return self._from_entry(self.staged_entry, self.pht_index(self.staged_pc))

    def predict(self, pc: int) -> Prediction:
        """Predict the fetch at pc according to the mode. Has no side effects."""
        if self.mode is PredictorMode.SINGLE:
            return self.predict_single(pc)
        if self.mode is PredictorMode.PIPELINED:
            return self.predict_pipelined(pc)
        return NOT_TAKEN

    def speculate_history(self, taken: bool) -> None:
        """Shift a predicted direction into the history register."""
        self.bhr = ((self.bhr << 1) | int(taken)) & self.history_mask

    def accept(self, prediction: Prediction) -> None:
        """Apply fetch-time side effects once the fetch is accepted.

        History is speculated only for a valid hit on a conditional entry.
        """
        if prediction.valid and prediction.btb_hit and prediction.is_cond_entry:
            self.speculate_history(prediction.taken)

    # -- training --------------------------------------------------------

    def update(
        self,
        branch_pc: int,
        kind: Kind,
        *,
        taken: bool,
        target: int,
        prediction: Prediction,
        mispredicted: bool,
    ) -> None:
        """Train at resolution, in program order.

        Conditional branches move their counter (at the carried index)
        and write the BTB when taken. JAL forces its counter high and
        writes a jump entry. JALR trains nothing. On a misprediction the
        history register is rebuilt from the carried checkpoint.

        Args:
            branch_pc: Address of the control transfer
            kind: Its kind
            taken: Resolved direction
            target: Resolved target (for the BTB)
            prediction: The Prediction made when it was fetched
            mispredicted: Fetch went down the wrong path
        """
        if self.mode is PredictorMode.NONE:
            return

        index = prediction.pht_index
        btb_pc = (branch_pc - 4) & MASK32 if self.mode is PredictorMode.PIPELINED else branch_pc
        is_cond = kind not in (Kind.JAL, Kind.JALR)

        if is_cond:
            counter = self.pht[index]
            self.pht[index] = min(counter + 1, COUNTER_MAX) if taken else max(counter - 1, 0)
            if taken:
                self._write_btb(btb_pc, target, is_branch=True)
        elif kind is Kind.JAL:
            self.pht[index] = COUNTER_MAX
            self._write_btb(btb_pc, target, is_branch=False)

        if mispredicted:
            if is_cond:
                self.bhr = ((prediction.history << 1) | int(taken)) & self.history_mask
            else:
                self.bhr = prediction.history

    def _write_btb(self, pc: int, target: int, *, is_branch: bool) -> None:
        self.btb[self.btb_index(pc)] = BtbEntry(self.btb_tag(pc), target, is_branch)

    def counters_in_range(self) -> bool:
        """True if every PHT counter is a legal two-bit value."""
        return max(self.pht) <= COUNTER_MAX


__all__ = [
    "DEFAULT_PHT_ENTRIES",
    "DEFAULT_BTB_ENTRIES",
    "COUNTER_INIT",
    "COUNTER_MAX",
    "PredictorMode",
    "BtbEntry",
    "Prediction",
    "NOT_TAKEN",
    "BranchPredictor",
]
