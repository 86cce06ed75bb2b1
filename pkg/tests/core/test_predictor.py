"""Tests for the gshare + BTB branch predictor."""

import logging
import random
from typing import Optional

import pytest

from src.core.isa import MASK32, Kind
from src.core.predictor import (
    COUNTER_INIT,
    COUNTER_MAX,
    NOT_TAKEN,
    BranchPredictor,
    Prediction,
    PredictorMode,
)


class TestTables:
    """Test table sizing and indexing."""

    def test_initial_state(self) -> None:
        """Test counters start weakly not-taken and the BTB is empty."""
        bp = BranchPredictor()
        assert len(bp.pht) == 8192
        assert len(bp.btb) == 512
        assert set(bp.pht) == {COUNTER_INIT}
        assert all(entry is None for entry in bp.btb)
        assert bp.bhr == 0

    def test_indexing(self) -> None:
        """Test gshare XORs the word address with history."""
        bp = BranchPredictor(pht_entries=16, btb_entries=8)
        bp.bhr = 0b1010
        assert bp.pht_index(0x104) == (0x41 ^ 0b1010) & 0xF
        assert bp.btb_index(0x104) == 0x41 & 7
        assert bp.btb_tag(0x104) == 0x104 >> 5

    @pytest.mark.parametrize("size", [0, 1, 3, 100])
    def test_sizes_must_be_powers_of_two(self, size: int) -> None:
        """Test table sizes are validated."""
        with pytest.raises(ValueError):
            BranchPredictor(pht_entries=size)

    def test_btb_tag_mismatch_misses(self) -> None:
        """Test an entry with another tag at the same index is not a hit."""
        bp = BranchPredictor(PredictorMode.SINGLE, btb_entries=8)
        bp.update(0x04, Kind.BNE, taken=True, target=0x40, prediction=NOT_TAKEN, mispredicted=True)
        assert bp.btb_lookup(0x04) is not None
        assert bp.btb_lookup(0x04 + 8 * 4) is None


class TestNoneMode:
    """Test the predictor-less configuration."""

    def test_always_not_taken_and_untrained(self) -> None:
        """Test none mode predicts fall-through and never trains."""
        bp = BranchPredictor(PredictorMode.NONE)
        bp.update(0x10, Kind.JAL, taken=True, target=0x80, prediction=NOT_TAKEN, mispredicted=True)
        assert bp.predict(0x10) == NOT_TAKEN
        assert bp.btb[bp.btb_index(0x10)] is None
        assert bp.bhr == 0


class TestSingleMode:
    """Test single-cycle lookup and training."""

    def test_miss_then_learn(self) -> None:
        """Test a taken branch is learned after one resolution."""
        bp = BranchPredictor(PredictorMode.SINGLE)
        first = bp.predict(0x20)
        assert not first.taken and not first.btb_hit and first.valid
        bp.accept(first)
        assert bp.bhr == 0

        bp.update(0x20, Kind.BEQ, taken=True, target=0x08, prediction=first, mispredicted=True)
        assert bp.bhr == 1
        assert bp.pht[first.pht_index] == COUNTER_INIT + 1

        bp.bhr = 0
        second = bp.predict(0x20)
        assert second.btb_hit and second.is_cond_entry
        assert second.taken and second.target == 0x08
        assert second.next_pc(0x20) == 0x08

    def test_jal_forces_counter_and_jump_entry(self) -> None:
        """Test JAL entries are always predicted taken."""
        bp = BranchPredictor(PredictorMode.SINGLE)
        pred = bp.predict(0x30)
        bp.update(0x30, Kind.JAL, taken=True, target=0x100, prediction=pred, mispredicted=True)
        assert bp.pht[pred.pht_index] == COUNTER_MAX
        entry = bp.btb_lookup(0x30)
        assert entry is not None and not entry.is_branch
        assert bp.bhr == 0  # a jump misprediction restores history unchanged

        bp.bhr = 0x155
        again = bp.predict(0x30)
        assert again.taken and not again.is_cond_entry
        bp.accept(again)
        assert bp.bhr == 0x155

    def test_jalr_trains_nothing(self) -> None:
        """Test JALR never writes the tables."""
        bp = BranchPredictor(PredictorMode.SINGLE)
        pred = bp.predict(0x44)
        bp.update(0x44, Kind.JALR, taken=True, target=0x10, prediction=pred, mispredicted=True)
        assert bp.btb_lookup(0x44) is None
        assert set(bp.pht) == {COUNTER_INIT}

    def test_speculative_history_and_repair(self) -> None:
        """Test history is speculated at fetch and rebuilt on a misprediction."""
        bp = BranchPredictor(PredictorMode.SINGLE)
        warm = bp.predict(0x50)
        bp.update(0x50, Kind.BNE, taken=True, target=0x60, prediction=warm, mispredicted=True)
        bp.pht[:] = bytes([COUNTER_MAX]) * len(bp.pht)
        bp.bhr = 0b110

        pred = bp.predict(0x50)
        assert pred.taken and pred.history == 0b110
        bp.accept(pred)
        assert bp.bhr == 0b1101

        bp.update(0x50, Kind.BNE, taken=False, target=0x54, prediction=pred, mispredicted=True)
        assert bp.bhr == 0b1100

    def test_history_is_masked(self) -> None:
        """Test the history register keeps log2(pht_entries) bits."""
        bp = BranchPredictor(pht_entries=16)
        for _ in range(10):
            bp.speculate_history(True)
        assert bp.bhr == 0xF

    def test_correct_prediction_keeps_history(self) -> None:
        """Test a hit does not rewrite the speculated history."""
        bp = BranchPredictor(PredictorMode.SINGLE)
        bp.bhr = 0b101
        pred = bp.predict(0x70)
        bp.update(0x70, Kind.BEQ, taken=False, target=0x74, prediction=pred, mispredicted=False)
        assert bp.bhr == 0b101


class TestPipelinedMode:
    """Test the pre-staged lookup."""

    def test_prediction_needs_matching_stage(self) -> None:
        """Test only the sequential successor of the staged pc gets a valid prediction."""
        bp = BranchPredictor(PredictorMode.PIPELINED)
        assert not bp.predict(0x100).valid  # nothing staged yet
        bp.prestage(0x100)
        assert bp.predict(0x104).valid
        assert not bp.predict(0x130).valid

    def test_invalid_prediction_carries_sequential_index(self) -> None:
        """Test an invalid prediction still indexes from pc - 4."""
        bp = BranchPredictor(PredictorMode.PIPELINED)
        bp.bhr = 3
        pred = bp.predict(0x200)
        assert not pred.valid and not pred.taken
        assert pred.pht_index == ((0x1FC >> 2) ^ 3)

    def test_taken_branch_learned_at_previous_pc(self) -> None:
        """Test a branch at 0x104 is stored under 0x100 and predicted one cycle early."""
        bp = BranchPredictor(PredictorMode.PIPELINED)
        bp.prestage(0x100)
        first = bp.predict(0x104)
        assert first.valid and not first.btb_hit
        assert first.pht_index == 0x100 >> 2
        bp.accept(first)

        bp.update(0x104, Kind.BEQ, taken=True, target=0x130, prediction=first, mispredicted=True)
        assert bp.btb_index(0x100) == 64
        assert bp.btb[64] is not None and bp.btb[64].target == 0x130
        assert bp.btb[65] is None

        bp.bhr = 0
        bp.prestage(0x100)
        second = bp.predict(0x104)
        assert second.valid and second.btb_hit and second.taken
        assert second.target == 0x130

        bp.accept(second)
        bp.prestage(0x104)
        after_redirect = bp.predict(0x130)
        assert not after_redirect.valid and not after_redirect.taken


class TestSaturation:
    """Property checks on counter behaviour."""

    def test_counters_stay_in_range(self) -> None:
        """Test random outcome streams never push a counter outside 0..3."""
        rng = random.Random(42)
        for mode in (PredictorMode.SINGLE, PredictorMode.PIPELINED):
            bp = BranchPredictor(mode, pht_entries=64, btb_entries=16)
            for _ in range(20_000):
                pc = rng.randrange(0, 256, 4)
                bp.prestage(pc - 4 if pc else 0)
                pred = bp.predict(pc)
                bp.accept(pred)
                taken = rng.random() < 0.6
                kind = rng.choice([Kind.BEQ, Kind.BLT, Kind.JAL, Kind.JALR])
                if kind in (Kind.JAL, Kind.JALR):
                    taken = True
                target = rng.randrange(0, 256, 4) if taken else pc + 4
                mispredicted = pred.next_pc(pc) != target
                bp.update(
                    pc, kind, taken=taken, target=target, prediction=pred, mispredicted=mispredicted
                )
                assert 0 <= bp.bhr <= 63
            assert bp.counters_in_range()
            assert max(bp.pht) <= COUNTER_MAX and min(bp.pht) >= 0

    def test_saturates_at_both_ends(self) -> None:
        """Test repeated outcomes pin a counter at 0 or 3."""
        bp = BranchPredictor(PredictorMode.SINGLE)
        pred = Prediction(pht_index=5)
        for _ in range(6):
            bp.update(0, Kind.BNE, taken=True, target=8, prediction=pred, mispredicted=False)
        assert bp.pht[5] == COUNTER_MAX
        for _ in range(6):
            bp.update(0, Kind.BNE, taken=False, target=4, prediction=pred, mispredicted=False)
        assert bp.pht[5] == 0


def trained_predictor(mode: PredictorMode, seed: int) -> BranchPredictor:
    """Small predictor with random BTB lines and random counters."""
    rng = random.Random(seed)
    bp = BranchPredictor(mode, pht_entries=256, btb_entries=32)
    for pc in rng.sample(range(4, 1024, 4), 40):
        bp.update(
            pc,
            rng.choice([Kind.BEQ, Kind.BNE, Kind.JAL]),
            taken=True,
            target=rng.randrange(0, 1024, 4),
            prediction=Prediction(pht_index=rng.randrange(256)),
            mispredicted=False,
        )
    bp.pht[:] = bytes(rng.randrange(COUNTER_MAX + 1) for _ in range(256))
    return bp


class TestPipelinedValidity:
    """Property checks on the staged lookup."""

    @pytest.mark.parametrize("seed", range(5))
    def test_valid_iff_sequential_to_staged_pc(self, seed: int) -> None:
        """Test random fetch streams: valid exactly when pc follows the staged pc."""
        rng = random.Random(seed)
        bp = trained_predictor(PredictorMode.PIPELINED, seed)
        staged: Optional[int] = None
        last = 0
        valid_seen = invalid_seen = 0
        for _ in range(10_000):
            roll = rng.random()
            if roll < 0.6:
                pc = (last + 4) & MASK32
            elif roll < 0.75:
                # redirect or stall: staging restarts at the next fetch pc
                pc = rng.choice([(last + 4) & MASK32, rng.randrange(0, 1024, 4)])
                bp.prestage(pc)
                staged = pc
            elif roll < 0.85:
                pc = last
            else:
                pc = rng.randrange(0, 1024, 4)

            pred = bp.predict(pc)
            expected = staged is not None and pc == (staged + 4) & MASK32
            assert pred.valid is expected
            if pred.valid:
                valid_seen += 1
            else:
                invalid_seen += 1
                assert not pred.taken and not pred.btb_hit
                assert pred.next_pc(pc) == (pc + 4) & MASK32
                assert pred.pht_index == ((((pc - 4) & MASK32) >> 2) ^ bp.bhr) & 255
            bp.accept(pred)
            bp.prestage(pc)
            staged = last = pc
        assert valid_seen > 1000 and invalid_seen > 1000

    @pytest.mark.parametrize("seed", range(5))
    def test_sequential_stream_equals_single_mode_one_pc_back(self, seed: int) -> None:
        """Test a sequential pipelined lookup at pc equals a single lookup at pc - 4."""
        bp = trained_predictor(PredictorMode.PIPELINED, seed)
        twin = BranchPredictor(PredictorMode.SINGLE, pht_entries=256, btb_entries=32)
        hits = 0
        bp.prestage(0)
        for pc in range(4, 4096, 4):
            twin.pht, twin.btb, twin.bhr = bp.pht, bp.btb, bp.bhr
            pred = bp.predict(pc)
            assert pred.valid
            assert pred == twin.predict_single(pc - 4)
            hits += pred.btb_hit
            bp.accept(pred)
            bp.prestage(pc)
        assert hits == sum(entry is not None for entry in bp.btb)

    def test_index_uses_history_at_fetch(self) -> None:
        """Test the staged lookup XORs the history current at fetch, after older speculation."""
        bp = BranchPredictor(PredictorMode.PIPELINED, pht_entries=256, btb_entries=32)
        bp.prestage(0x100)
        bp.speculate_history(True)
        pred = bp.predict(0x104)
        assert pred.valid
        assert pred.pht_index == ((0x100 >> 2) ^ 1) & 255
        assert pred.history == 1


class TestPredictorLogging:
    """Test construction is logged."""

    def test_construction_logged_at_debug(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test the mode and table sizes are logged with the predictor prefix."""
        with caplog.at_level(logging.DEBUG, logger="src.core.predictor"):
            BranchPredictor(PredictorMode.PIPELINED, pht_entries=64, btb_entries=16)
        assert "[predictor] Predictor pipelined: 64 PHT counters, 16 BTB lines" in caplog.messages
